//! The operator zoo: maximal-translation and restricted variation square
//! functions, bilinear multipliers summed over families of frequency squares
//! (Whitney-type tilings of the antidiagonal), a bi-sublinear scale
//! supremum, maximal adjoints of lacunary translation averages, and a
//! Littlewood-Paley square function.
//!
//! All suprema over continuous parameters are evaluated on the caller's
//! finite parameter lists, so every output is a certified pointwise lower
//! bound of the corresponding continuous supremum; enlarging any parameter
//! family can only increase the output.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, fft_in_place, project_window, GridSignal, Interval};
use crate::windows::{build_profile, WindowKind, WindowProfile};

fn pow2(k: i32) -> f64 {
    (2.0f64).powi(k)
}

/// An axis-parallel frequency square: a pair of intervals of common dyadic
/// width `2^{-scale_exp}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySquare {
    pub p1: Interval,
    pub p2: Interval,
    pub scale_exp: i32,
}

impl FrequencySquare {
    pub fn new(p1: Interval, p2: Interval, scale_exp: i32) -> Result<Self> {
        let w = pow2(-scale_exp);
        if (p1.width - w).abs() > 1e-12 * w || (p2.width - w).abs() > 1e-12 * w {
            return Err(Error::InvalidParam(format!(
                "square sides {} and {} do not match dyadic width 2^-{scale_exp}",
                p1.width, p2.width
            )));
        }
        Ok(FrequencySquare { p1, p2, scale_exp })
    }

    pub fn width(&self) -> f64 {
        pow2(-self.scale_exp)
    }
}

/// Generation recipe for a tile family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileFamily {
    /// At each scale `k >= 8`, first coordinates `m + lambda 2^{-k}` for
    /// integer `m` and `|lambda| < 2^{k-8}`: squares jittered around the
    /// integer frequencies carried by chirp trains.
    IntegerJitter,
    /// At each scale, first coordinates `m 2^{-k}` over integer `m`:
    /// equally spaced translated copies tiling the band.
    WhitneyPeriodic,
}

/// Placement of the second coordinate relative to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `c_{P2} = -c_{P1} + gamma 2^{-k}`: squares adapted to the line
    /// `xi_1 + xi_2 = 0`.
    Reflected,
    /// `c_{P2} = c_{P1} + gamma 2^{-k}`.
    Literal,
}

/// A finite family of frequency squares together with its generation
/// parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TileSet {
    pub squares: Vec<FrequencySquare>,
    pub family: TileFamily,
    pub gamma: f64,
    pub k_range: (i32, i32),
    pub orientation: Orientation,
}

impl TileSet {
    /// Re-checks the family invariants: dyadic side lengths, the reflected
    /// center relation, and equal spacing at each scale of the periodic
    /// family.
    pub fn verify(&self) -> Result<()> {
        for sq in &self.squares {
            let w = sq.width();
            if (sq.p1.width - w).abs() > 1e-12 * w || (sq.p2.width - w).abs() > 1e-12 * w {
                return Err(Error::InvalidParam("square sides are not dyadic".into()));
            }
            let target = match self.orientation {
                Orientation::Reflected => -sq.p1.center + self.gamma * w,
                Orientation::Literal => sq.p1.center + self.gamma * w,
            };
            let scale = sq.p1.center.abs().max(1.0);
            if (sq.p2.center - target).abs() > 1e-12 * scale {
                return Err(Error::InvalidParam(format!(
                    "second coordinate {} violates the {:?} center relation",
                    sq.p2.center, self.orientation
                )));
            }
        }
        if self.family == TileFamily::WhitneyPeriodic {
            for (&k, group) in &self.by_scale() {
                let mut centers: Vec<f64> = group.iter().map(|s| s.p1.center).collect();
                centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let step = pow2(-k);
                for pair in centers.windows(2) {
                    if ((pair[1] - pair[0]) - step).abs() > 1e-12 * step.max(1.0) {
                        return Err(Error::InvalidParam(
                            "periodic family is not equally spaced".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Constant phase carried by the square's second wave packet. For the
    /// jittered family the packet around `-m - lambda 2^{-k} + gamma 2^{-k}`
    /// is multiplied by `e^{2 pi i gamma 2^{-k} m}` (`m` = the integer block
    /// index): this cancels the chirp-pair phase twist so the per-scale sum
    /// over blocks is coherent. The periodic family carries no phase.
    pub fn packet_phase(&self, sq: &FrequencySquare) -> Complex64 {
        match self.family {
            TileFamily::IntegerJitter => {
                let m = sq.p1.center.round();
                Complex64::from_polar(1.0, 2.0 * PI * self.gamma * sq.width() * m)
            }
            TileFamily::WhitneyPeriodic => Complex64::new(1.0, 0.0),
        }
    }

    /// Squares grouped by scale exponent, ascending.
    pub fn by_scale(&self) -> BTreeMap<i32, Vec<FrequencySquare>> {
        let mut map: BTreeMap<i32, Vec<FrequencySquare>> = BTreeMap::new();
        for sq in &self.squares {
            map.entry(sq.scale_exp).or_default().push(*sq);
        }
        map
    }
}

/// Builds the tile family for scales `k_range.0 ..= k_range.1` and first
/// coordinates indexed by `m_range.0 ..= m_range.1`.
pub fn make_tiles(
    family: TileFamily,
    gamma: f64,
    k_range: (i32, i32),
    m_range: (i64, i64),
    orientation: Orientation,
) -> Result<TileSet> {
    let (k_lo, k_hi) = k_range;
    let (m_lo, m_hi) = m_range;
    if k_lo > k_hi || m_lo > m_hi {
        return Err(Error::InvalidParam("empty tile index range".into()));
    }
    if family == TileFamily::IntegerJitter && k_lo < 8 {
        return Err(Error::InvalidParam(format!(
            "jittered family needs scale exponents >= 8, got {k_lo}"
        )));
    }
    if k_hi >= 60 || k_lo <= -60 {
        return Err(Error::InvalidParam("scale exponent out of range".into()));
    }
    let mut squares = Vec::new();
    for k in k_lo..=k_hi {
        let w = pow2(-k);
        let second = |c1: f64| match orientation {
            Orientation::Reflected => -c1 + gamma * w,
            Orientation::Literal => c1 + gamma * w,
        };
        match family {
            TileFamily::IntegerJitter => {
                let lam_bound = 1i64 << (k - 8);
                for m in m_lo..=m_hi {
                    for lam in (1 - lam_bound)..lam_bound {
                        let c1 = m as f64 + lam as f64 * w;
                        squares.push(FrequencySquare::new(
                            Interval::new(c1, w)?,
                            Interval::new(second(c1), w)?,
                            k,
                        )?);
                    }
                }
            }
            TileFamily::WhitneyPeriodic => {
                for m in m_lo..=m_hi {
                    let c1 = m as f64 * w;
                    squares.push(FrequencySquare::new(
                        Interval::new(c1, w)?,
                        Interval::new(second(c1), w)?,
                        k,
                    )?);
                }
            }
        }
    }
    let tiles = TileSet {
        squares,
        family,
        gamma,
        k_range,
        orientation,
    };
    tiles.verify()?;
    Ok(tiles)
}

/// Smallest scale exponent `k >= 8` at which every jittered tile (and its
/// reflected partner) fits inside the plateau of the chirp atom around its
/// integer block and stays clear of the neighboring blocks, for all larger
/// scales as well. Checked by interval arithmetic on the generation
/// parameters.
pub fn jitter_min_scale(gamma: f64, atom: &WindowProfile) -> Result<i32> {
    let ph = *atom
        .certified_constants
        .get("plateau_halfwidth")
        .ok_or_else(|| Error::InvalidParam("atom lacks a certified plateau".into()))?;
    let sh = *atom
        .certified_constants
        .get("support_halfwidth")
        .ok_or_else(|| Error::InvalidParam("atom lacks a certified support".into()))?;
    let fits = |k: i32| {
        let w = pow2(-k);
        let off1 = ((1i64 << (k - 8)) - 1) as f64 * w;
        let off2 = off1 + gamma.abs() * w;
        let half = w / 2.0;
        [off1, off2]
            .iter()
            .all(|off| off + half <= ph && off + half <= 1.0 - sh)
    };
    for k in 8..=40 {
        if (k..=40).all(fits) {
            return Ok(k);
        }
    }
    Err(Error::InvalidParam(format!(
        "no admissible scale for gamma = {gamma}"
    )))
}

/// A finite, strictly increasing family of positive scales.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaleFamily {
    sigmas: Vec<f64>,
}

impl ScaleFamily {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidParam("scale family must be nonempty".into()));
        }
        for s in &sigmas {
            if !(s.is_finite() && *s > 0.0) {
                return Err(Error::InvalidParam(format!("scale {s} is not positive")));
            }
        }
        for pair in sigmas.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidParam(
                    "scales must be strictly increasing".into(),
                ));
            }
        }
        Ok(ScaleFamily { sigmas })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

/// Physical spectrum of a signal, indexed by signed bin number.
pub(crate) struct Spectrum {
    vals: Vec<Complex64>,
    m: usize,
    l: f64,
}

impl Spectrum {
    pub(crate) fn of(f: &GridSignal) -> Spectrum {
        let dft = f.dft();
        let vals = (0..f.len())
            .map(|idx| GridSignal::spectrum_value(&dft, f, idx))
            .collect();
        Spectrum {
            vals,
            m: f.len(),
            l: f.period(),
        }
    }

    pub(crate) fn get(&self, j: i64) -> Complex64 {
        self.vals[j.rem_euclid(self.m as i64) as usize]
    }

    /// Signed bin range carrying all but a 1e-13-relative sliver of the
    /// spectrum's sup, or None for the zero signal.
    pub(crate) fn effective_band(&self) -> Option<(i64, i64)> {
        let max = self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return None;
        }
        let thresh = 1e-13 * max;
        let half = (self.m / 2) as i64;
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for j in -half..half {
            if self.get(j).norm() > thresh {
                lo = lo.min(j);
                hi = hi.max(j);
            }
        }
        Some((lo, hi))
    }
}

/// Windowed spectrum bins of `f_hat * w((xi - c)/width)` over the window's
/// support, as (first signed bin, values). Bins outside the grid band are
/// dropped.
fn window_bins(spec: &Spectrum, c: f64, width: f64, w: &WindowProfile) -> (i64, Vec<Complex64>) {
    let (slo, shi) = w.support();
    let lo = c + width * slo;
    let hi = c + width * shi;
    let half = (spec.m / 2) as i64;
    let j0 = ((lo * spec.l).ceil() as i64).max(-half);
    let j1 = ((hi * spec.l).floor() as i64).min(half - 1);
    if j1 < j0 {
        return (0, Vec::new());
    }
    let vals = (j0..=j1)
        .map(|j| spec.get(j) * w.eval((j as f64 / spec.l - c) / width))
        .collect();
    (j0, vals)
}

/// Adds the autocorrelation `a(d) = sum_j v_j conj(v_{j-d})`, scaled by
/// `1/L`, into `acc[dmax + d]` for `|d| <= dmax`. This is the physical
/// spectrum contribution of `|u|^2` where `u` has windowed spectrum `v`.
fn autocorr_accumulate(v: &[Complex64], acc: &mut [Complex64], dmax: i64, inv_l: f64) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let dcap = dmax.min(n as i64 - 1);
    if n <= 64 {
        for d in -dcap..=dcap {
            let mut a = Complex64::new(0.0, 0.0);
            let j_lo = d.max(0);
            let j_hi = (n as i64 - 1).min(n as i64 - 1 + d);
            for j in j_lo..=j_hi {
                a += v[j as usize] * v[(j - d) as usize].conj();
            }
            acc[(dmax + d) as usize] += a * inv_l;
        }
        return;
    }
    let s = (2 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); s];
    buf[..n].copy_from_slice(v);
    fft_in_place(&mut buf, false);
    for t in buf.iter_mut() {
        *t = Complex64::new(t.norm_sqr(), 0.0);
    }
    fft_in_place(&mut buf, true);
    let scale = inv_l / s as f64;
    for d in -dcap..=dcap {
        let idx = if d >= 0 { d } else { s as i64 + d } as usize;
        acc[(dmax + d) as usize] += buf[idx] * scale;
    }
}

/// Adds the linear convolution of two windowed bin blocks, scaled by `1/L`,
/// into the full-grid physical spectrum `g` (bin indices fold modulo the
/// grid length). This is the spectrum contribution of the pointwise product
/// of the two band-passed signals.
fn conv_accumulate(
    (j1, v1): (i64, &[Complex64]),
    (j2, v2): (i64, &[Complex64]),
    g: &mut [Complex64],
    inv_l: f64,
) {
    let (n1, n2) = (v1.len(), v2.len());
    if n1 == 0 || n2 == 0 {
        return;
    }
    let m = g.len() as i64;
    let base = j1 + j2;
    if n1.min(n2) <= 16 || n1 + n2 <= 64 {
        for (a, x) in v1.iter().enumerate() {
            for (b, y) in v2.iter().enumerate() {
                let idx = (base + a as i64 + b as i64).rem_euclid(m) as usize;
                g[idx] += x * y * inv_l;
            }
        }
        return;
    }
    let s = (n1 + n2 - 1).next_power_of_two();
    let mut b1 = vec![Complex64::new(0.0, 0.0); s];
    let mut b2 = vec![Complex64::new(0.0, 0.0); s];
    b1[..n1].copy_from_slice(v1);
    b2[..n2].copy_from_slice(v2);
    fft_in_place(&mut b1, false);
    fft_in_place(&mut b2, false);
    for (x, y) in b1.iter_mut().zip(&b2) {
        *x *= y;
    }
    fft_in_place(&mut b1, true);
    let scale = inv_l / s as f64;
    for (t, x) in b1.iter().enumerate().take(n1 + n2 - 1) {
        let idx = (base + t as i64).rem_euclid(m) as usize;
        g[idx] += x * scale;
    }
}

/// Output grid length for a band-limited square sum with lags `|d| <= dmax`:
/// at least 4x oversampled, capped by the input length (where folding is
/// exact sampling).
fn coarse_len(dmax: i64, m_in: usize) -> usize {
    let want = ((8 * dmax.max(1)) as usize).max(64).next_power_of_two();
    want.min(m_in)
}

/// Real samples of the signal with physical spectrum `acc[dmax + d]` at bin
/// `d`, evaluated on the `m_out`-point grid of the same period.
fn lags_to_real(acc: &[Complex64], dmax: i64, m_out: usize, l: f64, origin: f64) -> Vec<f64> {
    let mut bins = vec![Complex64::new(0.0, 0.0); m_out];
    let spacing = l / m_out as f64;
    for d in -dmax..=dmax {
        let v = acc[(dmax + d) as usize];
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let xi = d as f64 / l;
        let phase = Complex64::from_polar(1.0, 2.0 * PI * xi * origin);
        bins[d.rem_euclid(m_out as i64) as usize] += v * phase / spacing;
    }
    let out = GridSignal::from_dft(bins, spacing, origin).expect("valid coarse grid");
    out.samples().iter().map(|z| z.re).collect()
}

/// Builds a signal from a full-grid physical spectrum vector.
fn signal_from_physical(g: &[Complex64], l: f64, origin: f64) -> GridSignal {
    let m = g.len();
    let spacing = l / m as f64;
    let bins = (0..m)
        .map(|idx| {
            let j = if idx < m / 2 {
                idx as i64
            } else {
                idx as i64 - m as i64
            };
            let xi = j as f64 / l;
            g[idx] * Complex64::from_polar(1.0, 2.0 * PI * xi * origin) / spacing
        })
        .collect();
    GridSignal::from_dft(bins, spacing, origin).expect("valid grid")
}

/// The scale-`k` interval family: for each `k <= k_max`, the `k` intervals
/// `[k + l/k, k + (l+1)/k]` partitioning `[k, k+1]`.
fn translation_intervals(k_max: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        let width = 1.0 / k as f64;
        for l in 0..k {
            out.push((k as f64 + (l as f64 + 0.5) * width, width));
        }
    }
    out
}

/// Maximal translation square function: the pointwise supremum over the
/// translation set of the square sum of band-passes through every interval
/// of the scale family, evaluated on an oversampled coarse grid of the same
/// period (each square sum is band-limited, so the coarse values are exact).
pub fn v2_translation_square(
    f: &GridSignal,
    k_max: usize,
    tau_set: &[f64],
    w: &WindowProfile,
) -> Result<GridSignal> {
    if k_max < 2 {
        return Err(Error::InvalidParam(format!("k_max must be >= 2, got {k_max}")));
    }
    if tau_set.is_empty() {
        return Err(Error::InvalidParam("translation set must be nonempty".into()));
    }
    let nyq = f.nyquist();
    let tau_max = tau_set.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tau_min = tau_set.iter().cloned().fold(f64::INFINITY, f64::min);
    if (k_max + 1) as f64 + tau_max > nyq || 1.0 + tau_min < -nyq {
        return Err(Error::BandOverflow(format!(
            "interval family up to {} with translations in [{tau_min}, {tau_max}] \
             exceeds the grid band {nyq}",
            k_max + 1
        )));
    }
    let spec = Spectrum::of(f);
    let band = spec.effective_band();
    let l = f.period();
    let intervals = translation_intervals(k_max);
    let wmax = intervals.iter().map(|i| i.1).fold(0.0, f64::max);
    let dmax = ((wmax * l).ceil() as i64 + 2).min(f.len() as i64 / 2);
    let m_out = coarse_len(dmax, f.len());
    let mut best = vec![0.0f64; m_out];
    let mut acc = vec![Complex64::new(0.0, 0.0); (2 * dmax + 1) as usize];
    for &tau in tau_set {
        acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut touched = false;
        for &(c, width) in &intervals {
            let c = c + tau;
            if let Some((blo, bhi)) = band {
                let jlo = ((c - width / 2.0) * l).floor() as i64;
                let jhi = ((c + width / 2.0) * l).ceil() as i64;
                if jhi < blo || jlo > bhi {
                    continue;
                }
            } else {
                continue;
            }
            let (j0, v) = window_bins(&spec, c, width, w);
            let _ = j0;
            autocorr_accumulate(&v, &mut acc, dmax, 1.0 / l);
            touched = true;
        }
        if !touched {
            continue;
        }
        let g = lags_to_real(&acc, dmax, m_out, l, f.origin());
        for (b, v) in best.iter_mut().zip(g) {
            *b = b.max(v);
        }
    }
    let spacing = l / m_out as f64;
    GridSignal::from_samples(
        best.iter()
            .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0))
            .collect(),
        spacing,
        f.origin(),
    )
}

/// Restricted variation square function: supremum over window lengths `R`
/// and offsets `alpha` (sampled uniformly in `[0, R)`) of the square sum of
/// band-passes through the arithmetic window family `[alpha + jR,
/// alpha + (j+1)R]` covering the signal's band.
pub fn v2res(
    f: &GridSignal,
    r_set: &[f64],
    alpha_count: usize,
    w: &WindowProfile,
) -> Result<GridSignal> {
    if r_set.is_empty() || alpha_count == 0 {
        return Err(Error::InvalidParam(
            "need a nonempty R set and alpha_count >= 1".into(),
        ));
    }
    let l = f.period();
    for r in r_set {
        if !(r.is_finite() && *r >= 1.0 / l) {
            return Err(Error::InvalidParam(format!(
                "window length {r} is below one frequency-grid step 1/{l}"
            )));
        }
    }
    let spec = Spectrum::of(f);
    let band = spec.effective_band();
    let rmax = r_set.iter().cloned().fold(0.0, f64::max);
    let dmax = ((rmax * l).ceil() as i64 + 2).min(f.len() as i64 / 2);
    let m_out = coarse_len(dmax, f.len());
    let mut best = vec![0.0f64; m_out];
    let mut acc = vec![Complex64::new(0.0, 0.0); (2 * dmax + 1) as usize];
    if let Some((blo, bhi)) = band {
        let (flo, fhi) = (blo as f64 / l, bhi as f64 / l);
        for &r in r_set {
            for a in 0..alpha_count {
                let alpha = a as f64 * r / alpha_count as f64;
                acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                let j_lo = ((flo - alpha) / r).floor() as i64 - 1;
                let j_hi = ((fhi - alpha) / r).ceil() as i64;
                for j in j_lo..=j_hi {
                    let c = alpha + (j as f64 + 0.5) * r;
                    let (_, v) = window_bins(&spec, c, r, w);
                    autocorr_accumulate(&v, &mut acc, dmax, 1.0 / l);
                }
                let g = lags_to_real(&acc, dmax, m_out, l, f.origin());
                for (b, v) in best.iter_mut().zip(g) {
                    *b = b.max(v);
                }
            }
        }
    }
    let spacing = l / m_out as f64;
    GridSignal::from_samples(
        best.iter()
            .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0))
            .collect(),
        spacing,
        f.origin(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmMode {
    FullSum,
    PerScale,
}

#[derive(Clone, Debug)]
pub enum TmOutput {
    FullSum(GridSignal),
    PerScale(Vec<(i32, GridSignal)>),
}

impl TmOutput {
    pub fn full_sum(self) -> GridSignal {
        match self {
            TmOutput::FullSum(g) => g,
            TmOutput::PerScale(parts) => {
                let mut parts = parts.into_iter();
                let (_, mut acc) = parts.next().expect("nonempty per-scale list");
                for (_, g) in parts {
                    for (a, b) in acc.samples_mut().iter_mut().zip(g.samples()) {
                        *a += b;
                    }
                }
                acc
            }
        }
    }
}

fn check_tile_bands(f1: &GridSignal, f2: &GridSignal, tiles: &TileSet) -> Result<()> {
    if !f1.same_geometry(f2) {
        return Err(Error::GridMismatch);
    }
    let nyq = f1.nyquist();
    for sq in &tiles.squares {
        for iv in [&sq.p1, &sq.p2] {
            if iv.lo() < -nyq || iv.hi() > nyq {
                return Err(Error::BandOverflow(format!(
                    "tile interval [{}, {}] exceeds the grid band {nyq}",
                    iv.lo(),
                    iv.hi()
                )));
            }
        }
    }
    Ok(())
}

/// Bilinear tile multiplier: the sum over squares of
/// `(f1 * w1_{P1})(x) (f2 * w2_{P2})(x) packet_phase`, grouped by scale. Each scale is
/// assembled in the spectral domain (one inverse transform per scale); the
/// per-square loop `bilinear_tm_direct` is the reference oracle.
pub fn bilinear_tm(
    f1: &GridSignal,
    f2: &GridSignal,
    tiles: &TileSet,
    w1: &WindowProfile,
    w2: &WindowProfile,
    mode: TmMode,
) -> Result<TmOutput> {
    check_tile_bands(f1, f2, tiles)?;
    if tiles.squares.is_empty() {
        return Err(Error::InvalidParam("empty tile set".into()));
    }
    let spec1 = Spectrum::of(f1);
    let spec2 = Spectrum::of(f2);
    let l = f1.period();
    let m = f1.len();
    let mut per_scale = Vec::new();
    let mut total = vec![Complex64::new(0.0, 0.0); m];
    for (&k, group) in &tiles.by_scale() {
        let mut g = vec![Complex64::new(0.0, 0.0); m];
        for sq in group {
            let (j1, v1) = window_bins(&spec1, sq.p1.center, sq.p1.width, w1);
            if v1.is_empty() {
                continue;
            }
            let (j2, mut v2) = window_bins(&spec2, sq.p2.center, sq.p2.width, w2);
            let phase = tiles.packet_phase(sq);
            if phase.im != 0.0 || phase.re != 1.0 {
                for z in v2.iter_mut() {
                    *z *= phase;
                }
            }
            conv_accumulate((j1, &v1), (j2, &v2), &mut g, 1.0 / l);
        }
        match mode {
            TmMode::PerScale => {
                per_scale.push((k, signal_from_physical(&g, l, f1.origin())));
            }
            TmMode::FullSum => {
                for (t, x) in total.iter_mut().zip(&g) {
                    *t += x;
                }
            }
        }
    }
    Ok(match mode {
        TmMode::PerScale => TmOutput::PerScale(per_scale),
        TmMode::FullSum => TmOutput::FullSum(signal_from_physical(&total, l, f1.origin())),
    })
}

/// Reference implementation of the tile multiplier: explicit band-pass per
/// square and pointwise products.
pub fn bilinear_tm_direct(
    f1: &GridSignal,
    f2: &GridSignal,
    tiles: &TileSet,
    w1: &WindowProfile,
    w2: &WindowProfile,
) -> Result<GridSignal> {
    check_tile_bands(f1, f2, tiles)?;
    let mut out = GridSignal::make_grid(f1.len(), f1.period(), f1.origin())?;
    for sq in &tiles.squares {
        let u1 = project_window(f1, &sq.p1, w1)?;
        let u2 = project_window(f2, &sq.p2, w2)?;
        let phase = tiles.packet_phase(sq);
        for ((o, a), b) in out.samples_mut().iter_mut().zip(u1.samples()).zip(u2.samples()) {
            *o += a * b * phase;
        }
    }
    Ok(out)
}

/// Bi-sublinear scale supremum: `sup_k |sum_m (f1 * w_{P1}) (f2 * w_{-P1})|`
/// with `P1 = [m 2^k - 2^{k-1}, m 2^k + 2^{k-1}]` running over all squares
/// inside the band.
pub fn bilinear_scale_sup(
    f1: &GridSignal,
    f2: &GridSignal,
    k_range: (i32, i32),
    w: &WindowProfile,
) -> Result<GridSignal> {
    if !f1.same_geometry(f2) {
        return Err(Error::GridMismatch);
    }
    if k_range.0 > k_range.1 {
        return Err(Error::InvalidParam("empty scale range".into()));
    }
    let nyq = f1.nyquist();
    let spec1 = Spectrum::of(f1);
    let spec2 = Spectrum::of(f2);
    let l = f1.period();
    let m = f1.len();
    let mut out = GridSignal::make_grid(m, l, f1.origin())?;
    for k in k_range.0..=k_range.1 {
        let s = pow2(k);
        if s / 2.0 > nyq {
            return Err(Error::BandOverflow(format!(
                "scale 2^{k} exceeds the grid band {nyq}"
            )));
        }
        let m_max = ((nyq - s / 2.0) / s).floor() as i64;
        let mut g = vec![Complex64::new(0.0, 0.0); m];
        for mm in -m_max..=m_max {
            let c = mm as f64 * s;
            let (j1, v1) = window_bins(&spec1, c, s, w);
            if v1.is_empty() {
                continue;
            }
            let (j2, v2) = window_bins(&spec2, -c, s, w);
            conv_accumulate((j1, &v1), (j2, &v2), &mut g, 1.0 / l);
        }
        let sig = signal_from_physical(&g, l, f1.origin());
        for (o, v) in out.samples_mut().iter_mut().zip(sig.samples()) {
            o.re = o.re.max(v.norm());
            o.im = 0.0;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjointMethod {
    /// Single multiplier: the periodization of the window over the
    /// `sigma`-spaced interval family.
    FrequencySide,
    /// Truncated translation sum `sum_n c_n f(x - n/sigma)` with the
    /// certified coefficient list, realized spectrally.
    TimeSide,
}

/// Maximal adjoint of the lacunary translation averages:
/// `sup_sigma |(sum_tau f * w_{I_tau^sigma})(x) (g * w_{I_0^sigma})(x)|`
/// with `I_tau^sigma = [tau sigma - sigma/2, tau sigma + sigma/2]`.
pub fn maximal_adjoint(
    f: &GridSignal,
    g: &GridSignal,
    sigmas: &ScaleFamily,
    eta: &WindowProfile,
    method: AdjointMethod,
) -> Result<GridSignal> {
    if !f.same_geometry(g) {
        return Err(Error::GridMismatch);
    }
    let l = f.period();
    let mut out = GridSignal::make_grid(f.len(), l, f.origin())?;
    let coeffs = match method {
        AdjointMethod::TimeSide => Some(eta.certified_coeffs()?),
        AdjointMethod::FrequencySide => None,
    };
    for &sigma in sigmas.sigmas() {
        if sigma < 1.0 / l {
            return Err(Error::InvalidParam(format!(
                "scale {sigma} is below one frequency-grid step 1/{l}"
            )));
        }
        let v = project_window(g, &Interval::new(0.0, sigma)?, eta)?;
        let a = match &coeffs {
            None => apply_multiplier(f, |xi| {
                let t = xi / sigma;
                Complex64::new(eta.eval(t - t.round()), 0.0)
            })?,
            Some(c) => apply_multiplier(f, |xi| {
                let mut s = c[0];
                for (n, cn) in c.iter().enumerate().skip(1) {
                    s += 2.0 * cn * (2.0 * PI * n as f64 * xi / sigma).cos();
                }
                Complex64::new(s, 0.0)
            })?,
        };
        for ((o, x), y) in out.samples_mut().iter_mut().zip(a.samples()).zip(v.samples()) {
            o.re = o.re.max((x * y).norm());
            o.im = 0.0;
        }
    }
    Ok(out)
}

fn dyadic_plateau() -> &'static WindowProfile {
    static P: OnceLock<WindowProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(WindowKind::PlateauPhi, 2048).expect("default plateau"))
}

/// Littlewood-Paley square function over the dyadic annuli
/// `2^{k-1} <~ |xi| <~ 2^k` for `k` in `k_range`, built from telescoped
/// plateau low-passes so that the squared symbols sum to exactly 1 on the
/// covered band.
pub fn square_function(f: &GridSignal, k_range: (i32, i32)) -> Result<GridSignal> {
    if k_range.0 > k_range.1 {
        return Err(Error::InvalidParam("empty scale range".into()));
    }
    let phi = dyadic_plateau();
    let sh = phi.certified_constants["support_halfwidth"];
    let nyq = f.nyquist();
    if sh * pow2(k_range.1 + 1) > nyq {
        return Err(Error::BandOverflow(format!(
            "annulus for scale 2^{} exceeds the grid band {nyq}",
            k_range.1
        )));
    }
    let mut sumsq = vec![0.0f64; f.len()];
    for k in k_range.0..=k_range.1 {
        let piece = apply_multiplier(f, |xi| {
            let hi = phi.eval(xi * pow2(-k - 1));
            let lo = phi.eval(xi * pow2(-k));
            Complex64::new((hi - lo).max(0.0).sqrt(), 0.0)
        })?;
        for (s, z) in sumsq.iter_mut().zip(piece.samples()) {
            *s += z.norm_sqr();
        }
    }
    GridSignal::from_samples(
        sumsq.iter().map(|s| Complex64::new(s.sqrt(), 0.0)).collect(),
        f.spacing(),
        f.origin(),
    )
}
