//! Smooth frequency windows with certified pointwise bounds, plus the small
//! kernel zoo used by the operators: Fejér kernel, tent weights, exponential
//! sums, and the Wiener norm.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSignal;
#[cfg(test)]
use crate::grid::lp_norm;

/// Largest certified Fourier-coefficient index for the nonnegative eta
/// window; the coefficient tail beyond this index is below 1e-8 of `c_0`,
/// tight enough for the translation-sum representation of the maximal
/// adjoint.
pub const COEFF_CUTOFF: i64 = 48;

/// The canonical C^inf bump on (-1, 1), `exp(1 - 1/(1 - u^2))`.
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

fn bump_cdf_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 1 << 16;
        let mut acc = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        let h = 2.0 / n as f64;
        acc.push(0.0);
        let mut prev = bump(-1.0);
        for i in 1..=n {
            let u = -1.0 + i as f64 * h;
            let cur = bump(u);
            s += 0.5 * (prev + cur) * h;
            acc.push(s);
            prev = cur;
        }
        let total = *acc.last().unwrap();
        for v in acc.iter_mut() {
            *v /= total;
        }
        acc
    })
}

/// Normalized CDF of the unit bump: 0 at -1, 1 at +1, monotone.
pub fn bump_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let table = bump_cdf_table();
    let n = (table.len() - 1) as f64;
    let t = (u + 1.0) / 2.0 * n;
    let i = t.floor() as usize;
    let frac = t - i as f64;
    if i + 1 >= table.len() {
        return 1.0;
    }
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

/// Inverse transform of the narrow bump `b(4 xi)`:
/// `int_{-1/4}^{1/4} b(4 xi) cos(2 pi xi x) d xi` (real, even).
pub fn narrow_bump_check(x: f64) -> f64 {
    let n = 8192;
    let h = 0.5 / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let xi = -0.25 + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * bump(4.0 * xi) * (2.0 * PI * xi * x).cos();
    }
    s * h
}

/// Self-convolution `(b~ * b~)(xi)` of the narrow bump, supported in
/// [-1/2, 1/2]; its inverse transform is `narrow_bump_check(x)^2 >= 0`.
fn narrow_selfconv(xi: f64) -> f64 {
    if xi.abs() >= 0.5 {
        return 0.0;
    }
    let n = 4096;
    let h = 0.5 / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let t = -0.25 + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * bump(4.0 * t) * bump(4.0 * (xi - t));
    }
    s * h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    SmoothIndicator,
    PlateauPhi,
    PositivePhi,
    NonnegEta,
    PartitionBar1,
}

/// A smooth frequency window stored as uniform samples over its nominal
/// support, with constants measured at construction time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowProfile {
    pub version: u32,
    pub kind: WindowKind,
    pub resolution: usize,
    support_lo: f64,
    support_hi: f64,
    values: Vec<f64>,
    pub certified_constants: BTreeMap<String, f64>,
}

impl WindowProfile {
    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    /// Window value at frequency `xi` (linear interpolation; exactly zero
    /// outside the support).
    pub fn eval(&self, xi: f64) -> f64 {
        if xi <= self.support_lo || xi >= self.support_hi {
            return 0.0;
        }
        let n = (self.values.len() - 1) as f64;
        let t = (xi - self.support_lo) / (self.support_hi - self.support_lo) * n;
        let i = t.floor() as usize;
        let frac = t - i as f64;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        if self.values[i] == self.values[i + 1] {
            return self.values[i];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Inverse transform at `x`, exact for the stored piecewise-linear
    /// window (all kinds are real and even in frequency): each segment
    /// integral of `(a + b t) cos(2 pi x (s + t))` is evaluated in closed
    /// form, with a Simpson fallback when the phase per segment is tiny.
    pub fn inverse_at(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let h = (self.support_hi - self.support_lo) / n as f64;
        let omega = 2.0 * PI * x;
        let mut total = 0.0;
        if omega.abs() * h < 1e-3 {
            for i in 0..n {
                let s = self.support_lo + i as f64 * h;
                let (v0, v1) = (self.values[i], self.values[i + 1]);
                let g0 = v0 * (omega * s).cos();
                let gm = 0.5 * (v0 + v1) * (omega * (s + 0.5 * h)).cos();
                let g1 = v1 * (omega * (s + h)).cos();
                total += h / 6.0 * (g0 + 4.0 * gm + g1);
            }
            return total;
        }
        for i in 0..n {
            let s = self.support_lo + i as f64 * h;
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            let beta = (v1 - v0) / h;
            let (sin0, cos0) = (omega * s).sin_cos();
            let (sin1, cos1) = (omega * (s + h)).sin_cos();
            total += v0 * (sin1 - sin0) / omega
                + beta * (h * sin1 / omega + (cos1 - cos0) / (omega * omega));
        }
        total
    }

    /// Fourier coefficient `c_n = (inverse transform)(-n)`.
    pub fn coeff(&self, n: i64) -> f64 {
        self.inverse_at(-(n as f64))
    }

    /// Certified coefficient list `c_0 ..= c_COEFF_CUTOFF` recorded at
    /// construction (nonnegative-eta windows only).
    pub fn certified_coeffs(&self) -> Result<Vec<f64>> {
        (0..=COEFF_CUTOFF)
            .map(|n| {
                self.certified_constants
                    .get(&format!("c_{n}"))
                    .copied()
                    .ok_or_else(|| {
                        Error::Certification(format!("missing certified coefficient c_{n}"))
                    })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: WindowProfile = serde_json::from_str(s)?;
        p.certify()?;
        Ok(p)
    }

    fn sample_grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.values.len() - 1;
        let h = (self.support_hi - self.support_lo) / n as f64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.support_lo + i as f64 * h, v))
    }

    /// Re-runs the kind-specific invariant checks; deterministic.
    pub fn certify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Certification(msg));
        let eps = 1e-12;
        if self.values.first().map_or(true, |v| v.abs() > eps)
            || self.values.last().map_or(true, |v| v.abs() > eps)
        {
            return fail("window does not vanish at its support endpoints".into());
        }
        match self.kind {
            WindowKind::SmoothIndicator => {
                let mut c_min = f64::INFINITY;
                for i in 0..=400 {
                    let x = i as f64 / 200.0;
                    c_min = c_min.min(self.inverse_at(x).abs());
                }
                if c_min <= 0.0 {
                    return fail("smooth indicator: inverse transform vanishes on [-2,2]".into());
                }
            }
            WindowKind::PlateauPhi => {
                for i in 0..=64 {
                    let xi = -0.25 + i as f64 / 128.0;
                    if self.eval(xi) != 1.0 {
                        return fail(format!("plateau: value at {xi} is not exactly 1"));
                    }
                }
                for (_, v) in self.sample_grid() {
                    if !(-eps..=1.0 + eps).contains(&v) {
                        return fail("plateau: value outside [0,1]".into());
                    }
                }
                if self.support_lo < -0.5 || self.support_hi > 0.5 {
                    return fail("plateau: support exceeds [-1/2, 1/2]".into());
                }
            }
            WindowKind::PositivePhi => {
                for i in 0..=400 {
                    let x = i as f64 / 400.0;
                    if self.inverse_at(x) <= 1.0 {
                        return fail(format!("positive Phi: inverse at {x} not > 1"));
                    }
                }
            }
            WindowKind::NonnegEta => {
                // The stored window is a piecewise-linear sample of an
                // exactly nonnegative-definite symbol; nonnegativity is
                // certified up to the interpolation error scale.
                let tol = 1e-4 * self.inverse_at(0.0).abs();
                let mut c_eta = f64::INFINITY;
                for i in -1600..=1600 {
                    let x = i as f64 / 200.0;
                    let v = self.inverse_at(x);
                    if v < -tol {
                        return fail(format!("eta: inverse at {x} is negative ({v})"));
                    }
                    if x.abs() <= 1.0 {
                        c_eta = c_eta.min(v);
                    }
                }
                if c_eta <= 0.0 {
                    return fail("eta: no positive lower bound on [-1,1]".into());
                }
                for n in 0..=COEFF_CUTOFF {
                    if self.coeff(n) < -tol {
                        return fail(format!("eta: coefficient c_{n} negative"));
                    }
                }
                if self.coeff(1) <= 0.0 {
                    return fail("eta: c_1 not positive".into());
                }
            }
            WindowKind::PartitionBar1 => {
                for i in 0..=256 {
                    let x = i as f64 / 256.0 - 0.5;
                    let sum: f64 = (-2..=2).map(|n| self.eval(x - n as f64)).sum();
                    if (sum - 1.0).abs() > 1e-8 {
                        return fail(format!("bar1: partition sum at {x} is {sum}"));
                    }
                }
                for (xi, v) in self.sample_grid() {
                    if !(-eps..=1.0 + eps).contains(&v) {
                        return fail("bar1: value outside [0,1]".into());
                    }
                    if xi.abs() <= 0.25 && (v - 1.0).abs() > eps {
                        return fail("bar1: not 1 on [-1/4,1/4]".into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn uniform_samples(lo: f64, hi: f64, resolution: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = (hi - lo) / resolution as f64;
    (0..=resolution).map(|i| f(lo + i as f64 * h)).collect()
}

/// Mollified indicator: `1_{[-a, a]}` convolved with a half-width-`w`
/// normalized bump; exactly 1 on [-(a-w), a-w], exactly 0 outside
/// [-(a+w), a+w].
fn mollified_indicator(a: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |xi: f64| bump_cdf((xi + a) / w) - bump_cdf((xi - a) / w)
}

/// Builds a plateau window with a custom plateau edge `a` and mollifier
/// half-width `w` (`a + w <= 1/2`); `build_profile(PlateauPhi, _)` uses the
/// default `a = 3/8, w = 1/16`.
pub fn plateau_variant(a: f64, w: f64, resolution: usize) -> Result<WindowProfile> {
    if !(a > 0.0 && w > 0.0 && a + w <= 0.5 && a - w >= 0.25) {
        return Err(Error::InvalidParam(format!(
            "plateau variant needs 0.25 <= a-w and a+w <= 0.5, got a={a}, w={w}"
        )));
    }
    if resolution < 256 {
        return Err(Error::InvalidParam(format!(
            "resolution must be >= 256, got {resolution}"
        )));
    }
    let f = mollified_indicator(a, w);
    let mut constants = BTreeMap::new();
    constants.insert("plateau_halfwidth".into(), a - w);
    constants.insert("support_halfwidth".into(), a + w);
    let profile = WindowProfile {
        version: 1,
        kind: WindowKind::PlateauPhi,
        resolution,
        support_lo: -0.5,
        support_hi: 0.5,
        values: uniform_samples(-0.5, 0.5, resolution, f),
        certified_constants: constants,
    };
    profile.certify()?;
    Ok(profile)
}

/// Constructs and certifies a window of the given kind.
pub fn build_profile(kind: WindowKind, mut resolution: usize) -> Result<WindowProfile> {
    if resolution < 256 {
        return Err(Error::InvalidParam(format!(
            "resolution must be >= 256, got {resolution}"
        )));
    }
    let mut constants = BTreeMap::new();
    let (lo, hi, values) = match kind {
        WindowKind::SmoothIndicator => {
            let peak = narrow_selfconv(0.0);
            let v = uniform_samples(-0.5, 0.5, resolution, |xi| narrow_selfconv(xi) / peak);
            (-0.5, 0.5, v)
        }
        WindowKind::PlateauPhi => {
            return plateau_variant(3.0 / 8.0, 1.0 / 16.0, resolution);
        }
        WindowKind::PositivePhi | WindowKind::NonnegEta => {
            let min_sq = (0..=400)
                .map(|i| narrow_bump_check(i as f64 / 400.0).powi(2))
                .fold(f64::INFINITY, f64::min);
            let amp = 1.1 / min_sq;
            constants.insert("amplitude".into(), amp);
            let v = uniform_samples(-0.5, 0.5, resolution, |xi| amp * narrow_selfconv(xi));
            (-0.5, 0.5, v)
        }
        WindowKind::PartitionBar1 => {
            // The support has width 3/2, so a segment count divisible by 3
            // puts integer translates of the sample grid back on sample
            // points; the interpolated partition sum then telescopes exactly.
            resolution = resolution.div_ceil(3) * 3;
            let f = mollified_indicator(0.5, 0.25);
            (-0.75, 0.75, uniform_samples(-0.75, 0.75, resolution, f))
        }
    };
    let mut profile = WindowProfile {
        version: 1,
        kind,
        resolution,
        support_lo: lo,
        support_hi: hi,
        values,
        certified_constants: constants,
    };
    match kind {
        WindowKind::SmoothIndicator => {
            let c_min = (0..=400)
                .map(|i| profile.inverse_at(i as f64 / 200.0).abs())
                .fold(f64::INFINITY, f64::min);
            profile.certified_constants.insert("c_min".into(), c_min);
        }
        WindowKind::PositivePhi => {
            let phi_min = (0..=400)
                .map(|i| profile.inverse_at(i as f64 / 400.0))
                .fold(f64::INFINITY, f64::min);
            profile
                .certified_constants
                .insert("inverse_min_on_unit".into(), phi_min);
        }
        WindowKind::NonnegEta => {
            let c_eta = (0..=400)
                .map(|i| profile.inverse_at(i as f64 / 400.0))
                .fold(f64::INFINITY, f64::min);
            profile.certified_constants.insert("c_eta".into(), c_eta);
            for n in 0..=COEFF_CUTOFF {
                profile
                    .certified_constants
                    .insert(format!("c_{n}"), profile.coeff(n));
            }
        }
        _ => {}
    }
    profile.certify()?;
    Ok(profile)
}

/// Fejér kernel of order `n = 2^{k-1}` by direct triangular summation:
/// `F(t) = sum_{|gamma| < n} (1 - |gamma|/n) e^{2 pi i gamma t}`.
pub fn fejer(k: u32, t: f64) -> f64 {
    assert!(k >= 1, "fejer needs k >= 1");
    let n = 1i64 << (k - 1);
    let mut s = 1.0;
    for gamma in 1..n {
        let w = 1.0 - gamma as f64 / n as f64;
        s += 2.0 * w * (2.0 * PI * gamma as f64 * t).cos();
    }
    s.max(0.0)
}

/// Periodic tent pair: `T(x) = max(0, 1 - 2|x|)` extended 1-periodically,
/// and its half-period shift; they sum to 1 exactly.
pub fn tent(x: f64) -> (f64, f64) {
    let u = x - x.round();
    let t = (1.0 - 2.0 * u.abs()).clamp(0.0, 1.0);
    (t, 1.0 - t)
}

/// Tent weights of a frequency square: `a = T(c_{Q1} - |Q|/2)`, `b = 1 - a`.
pub fn tent_weights(q: &crate::varops::FrequencySquare) -> (f64, f64) {
    let (t, _) = tent(q.p1.center - q.p1.width / 2.0);
    (t, 1.0 - t)
}

/// L^{p'}(T) norm of `sum_{lambda in start + step*{0..len}} e^{2 pi i lambda x}`
/// by adaptive trapezoid quadrature; independent of `start`.
pub fn exp_sum_norm(start: f64, step: f64, len: usize, p_prime: f64) -> Result<f64> {
    let _ = start;
    if len == 0 {
        return Err(Error::InvalidParam("progression length must be >= 1".into()));
    }
    if !(p_prime > 1.0 && p_prime <= 2.0) {
        return Err(Error::InvalidParam(format!(
            "p' must lie in (1, 2], got {p_prime}"
        )));
    }
    if step == 0.0 || len == 1 {
        return Ok(1.0);
    }
    let n = len as f64;
    let modulus = |x: f64| {
        let d = (PI * step * x).sin();
        if d.abs() < 1e-12 {
            n
        } else {
            ((PI * n * step * x).sin() / d).abs().min(n)
        }
    };
    let mut points = (64 * len).next_power_of_two();
    let mut prev = -1.0;
    loop {
        let h = 1.0 / points as f64;
        let mut s = 0.0;
        for i in 0..points {
            s += modulus(i as f64 * h).powf(p_prime);
        }
        let val = (s * h).powf(1.0 / p_prime);
        if prev > 0.0 && (val - prev).abs() <= 1e-9 * val {
            return Ok(val);
        }
        if points >= 1 << 23 {
            return Ok(val);
        }
        prev = val;
        points *= 2;
    }
}

/// Wiener-type norm `||f_hat||_{p1'}` on the frequency grid with measure
/// `1/L`; dominates `lp_norm(f, p1)` by Hausdorff-Young.
pub fn wiener_norm(f: &GridSignal, p1: f64) -> Result<f64> {
    if !(p1 >= 2.0) {
        return Err(Error::InvalidParam(format!("p1 must be >= 2, got {p1}")));
    }
    let p_prime = if p1.is_infinite() {
        1.0
    } else {
        p1 / (p1 - 1.0)
    };
    let dft = f.dft();
    let l = f.period();
    let sum: f64 = dft
        .iter()
        .map(|z| (f.spacing() * z.norm()).powf(p_prime))
        .sum();
    Ok((sum / l).powf(1.0 / p_prime))
}
