//! Periodic discrete substrate: complex signals on a uniform grid, FFT-based
//! spectra, L^p norms, and generic Fourier-multiplier application.
//!
//! Conventions: samples live at `x_n = origin + n * spacing` for
//! `n = 0..M`, the period is `L = M * spacing`, and the frequency grid is
//! `xi_j = j / L` for `j in [-M/2, M/2)`. The physical transform is
//! `f_hat(xi_j) = spacing * e^{-2 pi i xi_j origin} * DFT_j`, so Plancherel
//! holds with weight `spacing` in position and `1/L` in frequency.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windows::WindowProfile;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fft = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// A closed frequency (or time) interval given by its center and width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub width: f64,
}

impl Interval {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() || !width.is_finite() {
            return Err(Error::InvalidParam(format!(
                "interval needs finite center and positive width, got ({center}, {width})"
            )));
        }
        Ok(Interval { center, width })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn hi(&self) -> f64 {
        self.center + self.width / 2.0
    }
}

/// Complex samples of a function on the periodic domain `[origin, origin + L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSignal {
    samples: Vec<Complex64>,
    spacing: f64,
    origin: f64,
}

fn check_len(m: usize) -> Result<()> {
    if m < 8 || !m.is_power_of_two() {
        return Err(Error::BadGridLength(m));
    }
    Ok(())
}

impl GridSignal {
    /// Zero-filled signal with `m` samples on a period-`l` domain.
    pub fn make_grid(m: usize, l: f64, origin: f64) -> Result<Self> {
        check_len(m)?;
        if !(l > 0.0) || !l.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidParam(format!(
                "period must be positive and finite, got {l}"
            )));
        }
        Ok(GridSignal {
            samples: vec![Complex64::new(0.0, 0.0); m],
            spacing: l / m as f64,
            origin,
        })
    }

    pub fn from_samples(samples: Vec<Complex64>, spacing: f64, origin: f64) -> Result<Self> {
        check_len(samples.len())?;
        if !(spacing > 0.0) || !spacing.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidParam(format!("bad spacing {spacing}")));
        }
        Ok(GridSignal {
            samples,
            spacing,
            origin,
        })
    }

    /// Fills samples from a pointwise function of position.
    pub fn from_fn(
        m: usize,
        l: f64,
        origin: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let mut g = Self::make_grid(m, l, origin)?;
        for n in 0..m {
            g.samples[n] = f(g.x_at(n));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn period(&self) -> f64 {
        self.spacing * self.len() as f64
    }

    /// Highest representable frequency magnitude, `M / (2L)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn x_at(&self, n: usize) -> f64 {
        self.origin + n as f64 * self.spacing
    }

    /// Signed frequency `xi_j = j / L` of DFT bin `idx`, with `j in [-M/2, M/2)`.
    pub fn freq_at(&self, idx: usize) -> f64 {
        let m = self.len();
        let j = if idx < m / 2 {
            idx as i64
        } else {
            idx as i64 - m as i64
        };
        j as f64 / self.period()
    }

    /// Raw (unnormalized) DFT of the samples.
    pub fn dft(&self) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        fft_in_place(&mut buf, false);
        buf
    }

    /// Rebuilds a signal from raw DFT bins.
    pub fn from_dft(bins: Vec<Complex64>, spacing: f64, origin: f64) -> Result<Self> {
        let m = bins.len();
        check_len(m)?;
        let mut buf = bins;
        fft_in_place(&mut buf, true);
        let scale = 1.0 / m as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        GridSignal::from_samples(buf, spacing, origin)
    }

    /// Physical spectrum value at bin `idx`:
    /// `spacing * e^{-2 pi i xi origin} * DFT_idx`.
    pub fn spectrum_value(dft: &[Complex64], sig: &GridSignal, idx: usize) -> Complex64 {
        let xi = sig.freq_at(idx);
        let phase = Complex64::from_polar(1.0, -2.0 * PI * xi * sig.origin);
        sig.spacing * phase * dft[idx]
    }

    pub fn same_geometry(&self, other: &GridSignal) -> bool {
        self.len() == other.len()
            && self.spacing == other.spacing
            && self.origin == other.origin
    }
}

/// Builds the signal whose physical spectrum is `fhat(xi_j)` at every grid
/// frequency.
pub fn signal_from_spectrum(
    m: usize,
    l: f64,
    origin: f64,
    mut fhat: impl FnMut(f64) -> Complex64,
) -> Result<GridSignal> {
    let proto = GridSignal::make_grid(m, l, origin)?;
    let spacing = proto.spacing;
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    for (idx, b) in bins.iter_mut().enumerate() {
        let xi = proto.freq_at(idx);
        let v = fhat(xi);
        let phase = Complex64::from_polar(1.0, 2.0 * PI * xi * origin);
        *b = v * phase / spacing;
    }
    GridSignal::from_dft(bins, spacing, origin)
}

/// `(spacing * sum |f|^p)^{1/p}`; the max modulus for `p = inf`.
pub fn lp_norm(f: &GridSignal, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParam(format!("p must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.samples().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let sum: f64 = f.samples().iter().map(|z| z.norm_sqr().powf(p / 2.0)).sum();
    Ok((f.spacing() * sum).powf(1.0 / p))
}

/// Multiplies the spectrum by `symbol(xi_j)` at every grid frequency.
pub fn apply_multiplier(
    f: &GridSignal,
    symbol: impl Fn(f64) -> Complex64,
) -> Result<GridSignal> {
    let mut bins = f.dft();
    for idx in 0..bins.len() {
        let xi = f.freq_at(idx);
        let s = symbol(xi);
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::NonFiniteSymbol(xi));
        }
        bins[idx] *= s;
    }
    GridSignal::from_dft(bins, f.spacing(), f.origin())
}

/// Band-pass of `f` through the profile rescaled to the interval `i`: the
/// output spectrum is `w((xi - c_I)/|I|) * f_hat(xi)` and vanishes outside
/// the profile's support rescaled to `i`.
pub fn project_window(f: &GridSignal, i: &Interval, w: &WindowProfile) -> Result<GridSignal> {
    let nyq = f.nyquist();
    if i.lo() < -nyq || i.hi() > nyq {
        return Err(Error::BandOverflow(format!(
            "interval [{}, {}] exceeds the grid band [{}, {}]",
            i.lo(),
            i.hi(),
            -nyq,
            nyq
        )));
    }
    apply_multiplier(f, |xi| {
        Complex64::new(w.eval((xi - i.center) / i.width), 0.0)
    })
}

/// `f(x - shift) * e^{2 pi i freq x}`, with the translation done spectrally
/// (circular on the period, exact for band-limited signals).
pub fn shift_modulate(f: &GridSignal, shift: f64, freq: f64) -> GridSignal {
    let mut bins = f.dft();
    for idx in 0..bins.len() {
        let xi = f.freq_at(idx);
        bins[idx] *= Complex64::from_polar(1.0, -2.0 * PI * xi * shift);
    }
    let mut out = GridSignal::from_dft(bins, f.spacing(), f.origin())
        .expect("geometry preserved");
    if freq != 0.0 {
        for n in 0..out.len() {
            let x = out.x_at(n);
            out.samples[n] *= Complex64::from_polar(1.0, 2.0 * PI * freq * x);
        }
    }
    out
}

/// `spacing * sum f g_conj`, the discrete L^2 pairing.
pub fn inner(f: &GridSignal, g: &GridSignal) -> Result<Complex64> {
    if !f.same_geometry(g) {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = f
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.spacing())
}
