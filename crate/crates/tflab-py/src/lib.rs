//! Python bindings: signals on periodic grids, certified frequency windows,
//! the variation/bilinear/maximal operators, the deterministic extremizer
//! generators, and the experiment harness.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tflab::adversary;
use tflab::harness;
use tflab::varops;
use tflab::{GridSignal, WindowKind, WindowProfile};

fn err(e: tflab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_kind(kind: &str) -> PyResult<WindowKind> {
    Ok(match kind {
        "smooth_indicator" => WindowKind::SmoothIndicator,
        "plateau_phi" => WindowKind::PlateauPhi,
        "positive_phi" => WindowKind::PositivePhi,
        "nonneg_eta" => WindowKind::NonnegEta,
        "partition_bar1" => WindowKind::PartitionBar1,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown window kind {other:?}; expected smooth_indicator, plateau_phi, \
                 positive_phi, nonneg_eta, or partition_bar1"
            )))
        }
    })
}

/// A complex signal sampled on a periodic grid.
#[pyclass(name = "Signal", skip_from_py_object)]
#[derive(Clone)]
struct Signal {
    inner: GridSignal,
}

#[pymethods]
impl Signal {
    /// Zero signal on `m` points covering one period of length `l`.
    #[staticmethod]
    #[pyo3(signature = (m, l, origin = 0.0))]
    fn grid(m: usize, l: f64, origin: f64) -> PyResult<Self> {
        Ok(Signal { inner: GridSignal::make_grid(m, l, origin).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (samples, spacing, origin = 0.0))]
    fn from_samples(samples: Vec<Complex64>, spacing: f64, origin: f64) -> PyResult<Self> {
        Ok(Signal { inner: GridSignal::from_samples(samples, spacing, origin).map_err(err)? })
    }

    fn samples(&self) -> Vec<Complex64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    #[getter]
    fn origin(&self) -> f64 {
        self.inner.origin()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn nyquist(&self) -> f64 {
        self.inner.nyquist()
    }

    fn x_at(&self, n: usize) -> f64 {
        self.inner.x_at(n)
    }

    fn freq_at(&self, idx: usize) -> f64 {
        self.inner.freq_at(idx)
    }

    /// Raw DFT bins (index order as stored; see `freq_at` for the mapping).
    fn dft(&self) -> Vec<Complex64> {
        self.inner.dft()
    }

    /// `(spacing * sum |f|^p)^(1/p)`; pass `float("inf")` for the sup norm.
    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        tflab::lp_norm(&self.inner, p).map_err(err)
    }

    /// Frequency-side norm `||f_hat||_{p'}`; dominates `lp_norm(p)`.
    fn wiener_norm(&self, p: f64) -> PyResult<f64> {
        tflab::wiener_norm(&self.inner, p).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Signal(len={}, period={}, origin={})",
            self.inner.len(),
            self.inner.period(),
            self.inner.origin()
        )
    }
}

/// A certified smooth frequency window.
#[pyclass(name = "Window", skip_from_py_object)]
#[derive(Clone)]
struct Window {
    inner: WindowProfile,
}

#[pymethods]
impl Window {
    /// Builds and certifies a window of the given kind.
    #[staticmethod]
    #[pyo3(signature = (kind, resolution = 2048))]
    fn build(kind: &str, resolution: usize) -> PyResult<Self> {
        Ok(Window { inner: tflab::build_profile(parse_kind(kind)?, resolution).map_err(err)? })
    }

    /// Mollified-indicator plateau window with edges `a +- w`.
    #[staticmethod]
    #[pyo3(signature = (a, w, resolution = 2048))]
    fn plateau(a: f64, w: f64, resolution: usize) -> PyResult<Self> {
        Ok(Window { inner: tflab::plateau_variant(a, w, resolution).map_err(err)? })
    }

    fn eval(&self, xi: f64) -> f64 {
        self.inner.eval(xi)
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    /// Constants measured at certification time.
    fn certified_constants(&self) -> std::collections::BTreeMap<String, f64> {
        self.inner.certified_constants.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }
}

/// A family of time-frequency squares for the bilinear multiplier.
#[pyclass(name = "Tiles")]
struct Tiles {
    inner: varops::TileSet,
}

#[pymethods]
impl Tiles {
    fn __len__(&self) -> usize {
        self.inner.squares.len()
    }
}

/// Builds the jittered (`"integer_jitter"`) or periodic (`"whitney"`) tile
/// family over scales `k_lo..=k_hi` and blocks `m_lo..=m_hi`, oriented
/// `"reflected"` or `"literal"`.
#[pyfunction]
#[pyo3(signature = (family, gamma, k_lo, k_hi, m_lo, m_hi, orientation = "reflected"))]
fn make_tiles(
    family: &str,
    gamma: f64,
    k_lo: i32,
    k_hi: i32,
    m_lo: i64,
    m_hi: i64,
    orientation: &str,
) -> PyResult<Tiles> {
    let fam = match family {
        "integer_jitter" => varops::TileFamily::IntegerJitter,
        "whitney" => varops::TileFamily::WhitneyPeriodic,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown tile family {other:?}; expected integer_jitter or whitney"
            )))
        }
    };
    let orient = match orientation {
        "reflected" => varops::Orientation::Reflected,
        "literal" => varops::Orientation::Literal,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown orientation {other:?}; expected reflected or literal"
            )))
        }
    };
    let inner = varops::make_tiles(fam, gamma, (k_lo, k_hi), (m_lo, m_hi), orient).map_err(err)?;
    Ok(Tiles { inner })
}

/// Band-pass projection of `f` to the interval `[center - width/2,
/// center + width/2]` with the given window shape.
#[pyfunction]
fn project_window(f: &Signal, center: f64, width: f64, w: &Window) -> PyResult<Signal> {
    let iv = tflab::Interval::new(center, width).map_err(err)?;
    Ok(Signal { inner: tflab::project_window(&f.inner, &iv, &w.inner).map_err(err)? })
}

/// Spectral translation by `shift` and modulation by `freq` (exact for
/// band-limited signals).
#[pyfunction]
#[pyo3(signature = (f, shift, freq = 0.0))]
fn shift_modulate(f: &Signal, shift: f64, freq: f64) -> Signal {
    Signal { inner: tflab::shift_modulate(&f.inner, shift, freq) }
}

/// Chirp train `sum_{1<=n<=N} phi(x - n) e^{2 pi i n x}`.
#[pyfunction]
#[pyo3(signature = (n, phi, m, l, origin = 0.0))]
fn chirp_train(n: usize, phi: &Window, m: usize, l: f64, origin: f64) -> PyResult<Signal> {
    Ok(Signal { inner: adversary::chirp_train(n, &phi.inner, m, l, origin).map_err(err)? })
}

/// The chirp train and its conjugate-modulated partner.
#[pyfunction]
#[pyo3(signature = (n, phi, m, l, origin = 0.0))]
fn bichirp_pair(
    n: usize,
    phi: &Window,
    m: usize,
    l: f64,
    origin: f64,
) -> PyResult<(Signal, Signal)> {
    let (f1, f2) = adversary::bichirp_pair(n, &phi.inner, m, l, origin).map_err(err)?;
    Ok((Signal { inner: f1 }, Signal { inner: f2 }))
}

/// Train of unit-height indicator atoms of the given width at the shifts.
#[pyfunction]
#[pyo3(signature = (k0, shifts, width, m, l, origin = 0.0))]
fn spike_train(
    k0: u32,
    shifts: Vec<f64>,
    width: f64,
    m: usize,
    l: f64,
    origin: f64,
) -> PyResult<Signal> {
    Ok(Signal { inner: adversary::spike_train(k0, &shifts, width, m, l, origin).map_err(err)? })
}

/// 2-variation square function over translated frequency squares.
#[pyfunction]
fn v2_translation_square(
    f: &Signal,
    k_max: usize,
    taus: Vec<f64>,
    w: &Window,
) -> PyResult<Signal> {
    Ok(Signal {
        inner: varops::v2_translation_square(&f.inner, k_max, &taus, &w.inner).map_err(err)?,
    })
}

/// Restricted 2-variation over arithmetic window families.
#[pyfunction]
fn v2res(f: &Signal, r_set: Vec<f64>, alpha_count: usize, w: &Window) -> PyResult<Signal> {
    Ok(Signal { inner: varops::v2res(&f.inner, &r_set, alpha_count, &w.inner).map_err(err)? })
}

/// Bilinear tile multiplier (full sum over all squares).
#[pyfunction]
fn bilinear_tm(f1: &Signal, f2: &Signal, tiles: &Tiles, w1: &Window, w2: &Window) -> PyResult<Signal> {
    let out = varops::bilinear_tm(
        &f1.inner,
        &f2.inner,
        &tiles.inner,
        &w1.inner,
        &w2.inner,
        varops::TmMode::FullSum,
    )
    .map_err(err)?;
    Ok(Signal { inner: out.full_sum() })
}

/// Bilinear tile multiplier, one output signal per scale exponent.
#[pyfunction]
fn bilinear_tm_per_scale(
    f1: &Signal,
    f2: &Signal,
    tiles: &Tiles,
    w1: &Window,
    w2: &Window,
) -> PyResult<Vec<(i32, Signal)>> {
    let out = varops::bilinear_tm(
        &f1.inner,
        &f2.inner,
        &tiles.inner,
        &w1.inner,
        &w2.inner,
        varops::TmMode::PerScale,
    )
    .map_err(err)?;
    match out {
        varops::TmOutput::PerScale(parts) => {
            Ok(parts.into_iter().map(|(k, g)| (k, Signal { inner: g })).collect())
        }
        varops::TmOutput::FullSum(_) => unreachable!("per-scale mode returns per-scale output"),
    }
}

/// Maximal adjoint of the lacunary translation averages;
/// `method` is `"frequency"` or `"time"`.
#[pyfunction]
#[pyo3(signature = (f, g, sigmas, eta, method = "frequency"))]
fn maximal_adjoint(
    f: &Signal,
    g: &Signal,
    sigmas: Vec<f64>,
    eta: &Window,
    method: &str,
) -> PyResult<Signal> {
    let fam = varops::ScaleFamily::new(sigmas).map_err(err)?;
    let m = match method {
        "frequency" => varops::AdjointMethod::FrequencySide,
        "time" => varops::AdjointMethod::TimeSide,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?}; expected frequency or time"
            )))
        }
    };
    Ok(Signal {
        inner: varops::maximal_adjoint(&f.inner, &g.inner, &fam, &eta.inner, m).map_err(err)?,
    })
}

/// Littlewood-Paley square function over dyadic annuli `k_lo..=k_hi`.
#[pyfunction]
fn square_function(f: &Signal, k_lo: i32, k_hi: i32) -> PyResult<Signal> {
    Ok(Signal { inner: varops::square_function(&f.inner, (k_lo, k_hi)).map_err(err)? })
}

/// Smallest admissible scale exponent for the jittered tile family.
#[pyfunction]
fn jitter_min_scale(gamma: f64, atom: &Window) -> PyResult<i32> {
    varops::jitter_min_scale(gamma, &atom.inner).map_err(err)
}

/// `L^{p'}`-type norm of the exponential sum with the given arithmetic
/// frequency progression.
#[pyfunction]
fn exp_sum_norm(start: f64, step: f64, len: usize, p_prime: f64) -> PyResult<f64> {
    tflab::exp_sum_norm(start, step, len, p_prime).map_err(err)
}

/// Fejer kernel of order `2^(k-1)` at `t`.
#[pyfunction]
fn fejer(k: u32, t: f64) -> f64 {
    tflab::fejer(k, t)
}

/// Greedy cover of `[1, 2^k0]` by shifted power orbits, as a dict with the
/// certificate fields.
#[pyfunction]
fn greedy_cover(py: Python<'_>, k0: u32) -> PyResult<Py<pyo3::types::PyDict>> {
    let c = adversary::greedy_cover(k0).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("k0", c.k0)?;
    d.set_item("shifts", c.shifts)?;
    d.set_item("covered_measure", c.covered_measure)?;
    d.set_item("target_measure", c.target_measure)?;
    d.set_item("shift_constant", c.shift_constant)?;
    Ok(d.unbind())
}

/// Residues `2^k mod 5^m` and whether they are all distinct.
#[pyfunction]
fn orbit_distinct(m: u32) -> PyResult<(Vec<u64>, bool)> {
    adversary::orbit_distinct(m).map_err(err)
}

/// Simultaneous-approximation certificate for the staircase gauges
/// `alpha_j = 2^(j(j-1)/2)`, returned as a JSON string.
#[pyfunction]
#[pyo3(signature = (k, precision = 0))]
fn theta_staircase(k: u32, precision: u32) -> PyResult<String> {
    let alphas: Vec<adversary::Dyadic> = (1..=k as i64)
        .map(|j| adversary::Dyadic::pow2(j * (j - 1) / 2))
        .collect();
    let p = if precision == 0 { 128.max(k * (k - 1) / 2 + 96) } else { precision };
    let cert = adversary::theta_construct(&alphas, k, p).map_err(err)?;
    serde_json::to_string_pretty(&cert).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a named growth study with its default parameters and returns the
/// full report as a JSON string.
#[pyfunction]
#[pyo3(signature = (descriptor, refinement_level = 0, seed = 17))]
fn growth_study(descriptor: &str, refinement_level: u32, seed: u64) -> PyResult<String> {
    let cfg = harness::StudyConfig { seed, refinement_level, ..Default::default() };
    let report = harness::growth_study(
        descriptor,
        &harness::default_params(descriptor),
        &harness::default_norms(descriptor),
        &cfg,
    )
    .map_err(err)?;
    harness::report_to_json(&report).map_err(err)
}

/// Known growth-study descriptors.
#[pyfunction]
fn descriptors() -> Vec<String> {
    harness::DESCRIPTORS.iter().map(|s| s.to_string()).collect()
}

#[pymodule]
fn tflab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Signal>()?;
    m.add_class::<Window>()?;
    m.add_class::<Tiles>()?;
    m.add_function(wrap_pyfunction!(make_tiles, m)?)?;
    m.add_function(wrap_pyfunction!(project_window, m)?)?;
    m.add_function(wrap_pyfunction!(shift_modulate, m)?)?;
    m.add_function(wrap_pyfunction!(chirp_train, m)?)?;
    m.add_function(wrap_pyfunction!(bichirp_pair, m)?)?;
    m.add_function(wrap_pyfunction!(spike_train, m)?)?;
    m.add_function(wrap_pyfunction!(v2_translation_square, m)?)?;
    m.add_function(wrap_pyfunction!(v2res, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_tm, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_tm_per_scale, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_adjoint, m)?)?;
    m.add_function(wrap_pyfunction!(square_function, m)?)?;
    m.add_function(wrap_pyfunction!(jitter_min_scale, m)?)?;
    m.add_function(wrap_pyfunction!(exp_sum_norm, m)?)?;
    m.add_function(wrap_pyfunction!(fejer, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_cover, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_distinct, m)?)?;
    m.add_function(wrap_pyfunction!(theta_staircase, m)?)?;
    m.add_function(wrap_pyfunction!(growth_study, m)?)?;
    m.add_function(wrap_pyfunction!(descriptors, m)?)?;
    Ok(())
}
