//! Experiment driver and CLI: norm-ratio growth studies, boundedness
//! studies, exponent fitting, refinement studies, and report emission.
//!
//! Each experiment descriptor names a deterministic generator + operator
//! pipeline; the driver measures `output_norm / product(input_norms)` across
//! a parameter sweep, fits a growth model, and checks the result against an
//! acceptance band loaded from a descriptor file (so tolerance tuning never
//! touches operator code).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    bichirp_pair, chirp_train, greedy_cover, greedy_cover_continuous, orbit_distinct,
    recount_cover, remeasure_cover_continuous, spike_train, theta_construct, Dyadic,
};
use crate::error::{Error, Result};
use crate::grid::{lp_norm, signal_from_spectrum, GridSignal};
use crate::varops::{
    bilinear_tm, jitter_min_scale, make_tiles, maximal_adjoint, v2_translation_square, v2res,
    AdjointMethod, Orientation, ScaleFamily, TileFamily, TmMode,
};
use crate::windows::{build_profile, exp_sum_norm, plateau_variant, WindowKind, WindowProfile};

/// Default tile-family separation parameter.
pub const DEFAULT_GAMMA: f64 = 100.0;
/// Separation parameter for the Whitney-periodic boundedness study. The
/// reflected partner window sits `gamma 2^{-k}` off the diagonal; a small
/// gamma keeps the coarse scales inside the corpus band, so the scale
/// truncations converge instead of switching on mid-sweep.
pub const WHITNEY_GAMMA: f64 = 8.0;
/// Default corpus seed, recorded in every report.
pub const DEFAULT_SEED: u64 = 17;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// Growth model fitted to the (param, ratio) rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `ratio ~ a * (log param)^beta`.
    LogPower,
    /// `ratio ~ a * param^beta`.
    PolyPower,
    /// `ratio ~ a`; the residual is the dispersion.
    Constant,
}

impl FitModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitModel::LogPower => "log_power",
            FitModel::PolyPower => "poly_power",
            FitModel::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Result<FitModel> {
        match s {
            "log_power" => Ok(FitModel::LogPower),
            "poly_power" => Ok(FitModel::PolyPower),
            "constant" => Ok(FitModel::Constant),
            other => Err(Error::Config(format!("unknown fit model `{other}`"))),
        }
    }
}

/// One measured sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub param: f64,
    pub input_norms: Vec<f64>,
    pub output_norm: f64,
    /// `output_norm / product(input_norms)`.
    pub ratio: f64,
}

/// Exponent pair for the measured norms: `p1` (and `p2` for bilinear
/// experiments) for the inputs, `p_out` for the output. A `None` second
/// exponent means the experiment fixes its own second norm (e.g. a sup norm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p1: f64,
    pub p2: Option<f64>,
    pub p_out: f64,
}

impl NormSpec {
    pub fn unary(p: f64) -> NormSpec {
        NormSpec { p1: p, p2: None, p_out: p }
    }
}

/// Reproducibility context captured with every report. For sweeps that size
/// the grid per parameter, the largest grid used is recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub grid_len: usize,
    pub period: f64,
    pub profile_constants: BTreeMap<String, f64>,
    pub seed: u64,
    pub refinement_level: u32,
}

/// Result of a growth study: sorted rows, the fitted model, and the context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub experiment_id: String,
    pub rows: Vec<GrowthRow>,
    pub norms: NormSpec,
    pub model: FitModel,
    pub fitted_exponent: f64,
    /// Root-mean-square fit error in log coordinates.
    pub residual: f64,
    pub environment: Environment,
}

/// One refinement level: the study's summary value recomputed with doubled
/// parameter sampling, and its relative change from the previous level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub level: u32,
    pub value: f64,
    pub rel_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub experiment_id: String,
    pub levels: Vec<RefinementLevel>,
    pub max_rel_change: f64,
    pub final_rel_change: f64,
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Least-squares fit in transformed coordinates. Returns `(exponent,
/// residual)` where the residual is the RMS error of `log ratio`.
pub fn fit_growth(rows: &[GrowthRow], model: FitModel) -> Result<(f64, f64)> {
    if rows.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 rows, got {}", rows.len())));
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        if !(r.ratio > 0.0 && r.ratio.is_finite()) {
            return Err(Error::Fit(format!(
                "non-positive ratio {} at param {}",
                r.ratio, r.param
            )));
        }
        ys.push(r.ratio.ln());
        let x = match model {
            FitModel::Constant => 0.0,
            FitModel::PolyPower => {
                if !(r.param > 0.0) {
                    return Err(Error::Fit(format!("poly fit needs positive params, got {}", r.param)));
                }
                r.param.ln()
            }
            FitModel::LogPower => {
                if !(r.param > 1.0) {
                    return Err(Error::Fit(format!("log-power fit needs params > 1, got {}", r.param)));
                }
                r.param.ln().ln()
            }
        };
        xs.push(x);
    }
    let n = rows.len() as f64;
    let ybar = ys.iter().sum::<f64>() / n;
    if model == FitModel::Constant {
        let rms = (ys.iter().map(|y| (y - ybar).powi(2)).sum::<f64>() / n).sqrt();
        return Ok((0.0, rms));
    }
    let xbar = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx < 1e-18 {
        return Err(Error::Fit("degenerate parameter set: all transformed params equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let beta = sxy / sxx;
    let a = ybar - beta * xbar;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - a - beta * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((beta, rms))
}

// ---------------------------------------------------------------------------
// Shared generators
// ---------------------------------------------------------------------------

fn smooth_ind() -> &'static WindowProfile {
    static P: OnceLock<WindowProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(WindowKind::SmoothIndicator, 2048).expect("smooth indicator"))
}

fn std_plateau() -> &'static WindowProfile {
    static P: OnceLock<WindowProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(WindowKind::PlateauPhi, 2048).expect("plateau"))
}

fn sharp_plateau() -> &'static WindowProfile {
    static P: OnceLock<WindowProfile> = OnceLock::new();
    P.get_or_init(|| plateau_variant(0.49375, 0.00125, 32768).expect("sharp plateau"))
}

fn eta_profile() -> &'static WindowProfile {
    static P: OnceLock<WindowProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(WindowKind::NonnegEta, 2048).expect("eta"))
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two().max(8)
}

fn param_usize(p: f64) -> Result<usize> {
    if !(p.is_finite() && p >= 1.0 && p.fract() == 0.0) {
        return Err(Error::InvalidParam(format!(
            "parameter {p} must be a positive integer"
        )));
    }
    Ok(p as usize)
}

/// Band-limited signal with independent uniform spectral coefficients under
/// a quadratic edge taper; the generator order is fixed, so equal seeds give
/// bit-identical signals.
pub fn random_band_signal(
    rng: &mut ChaCha8Rng,
    m: usize,
    l: f64,
    band: f64,
) -> Result<GridSignal> {
    signal_from_spectrum(m, l, 0.0, |xi| {
        if xi.abs() >= band {
            Complex64::new(0.0, 0.0)
        } else {
            let env = 1.0 - (xi / band).powi(2);
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            Complex64::new(re * env, im * env)
        }
    })
}

fn ratio_of(output: f64, inputs: &[f64]) -> f64 {
    output / inputs.iter().product::<f64>()
}

fn env_for(
    grid_len: usize,
    period: f64,
    profile: &WindowProfile,
    cfg: &StudyConfig,
) -> Environment {
    Environment {
        grid_len,
        period,
        profile_constants: profile.certified_constants.clone(),
        seed: cfg.seed,
        refinement_level: cfg.refinement_level,
    }
}

// ---------------------------------------------------------------------------
// Experiment descriptors
// ---------------------------------------------------------------------------

/// Knobs shared by every experiment; `None` means the descriptor's own
/// sizing rule (grids may still be enlarged per parameter as needed).
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub grid_m: Option<usize>,
    pub period: Option<f64>,
    pub seed: u64,
    pub refinement_level: u32,
    pub orientation: Orientation,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            grid_m: None,
            period: None,
            seed: DEFAULT_SEED,
            refinement_level: 0,
            orientation: Orientation::Reflected,
        }
    }
}

/// Known experiment descriptors.
pub const DESCRIPTORS: &[&str] = &[
    "identity",
    "v2_blowup",
    "tm3_blowup",
    "v2res_bound",
    "v2res_l2fail",
    "whitney_bound",
    "badjoint_counter",
];

pub fn default_params(descriptor: &str) -> Vec<f64> {
    match descriptor {
        "identity" => vec![1.0, 2.0, 3.0, 4.0],
        "v2_blowup" | "tm3_blowup" | "v2res_bound" => vec![16.0, 32.0, 64.0, 128.0, 256.0],
        "v2res_l2fail" => (4..=12).map(|j| f64::powi(2.0, j)).collect(),
        "whitney_bound" => (4..=12).map(|k| k as f64).collect(),
        "badjoint_counter" => (4..=10).map(|k| k as f64).collect(),
        _ => Vec::new(),
    }
}

pub fn default_norms(descriptor: &str) -> NormSpec {
    match descriptor {
        "tm3_blowup" | "whitney_bound" => NormSpec { p1: 4.0, p2: Some(4.0), p_out: 2.0 },
        "v2res_l2fail" => NormSpec::unary(2.0),
        "badjoint_counter" => NormSpec { p1: 4.0, p2: None, p_out: 1.0 },
        _ => NormSpec::unary(4.0),
    }
}

fn default_model(descriptor: &str) -> FitModel {
    match descriptor {
        "identity" => FitModel::Constant,
        "v2res_bound" | "whitney_bound" | "badjoint_counter" => FitModel::PolyPower,
        _ => FitModel::LogPower,
    }
}

/// Runs one descriptor over a parameter sweep and fits the growth model.
pub fn growth_study(
    descriptor: &str,
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<GrowthReport> {
    if params.len() < 4 {
        return Err(Error::InvalidParam(format!(
            "growth study needs at least 4 parameter values, got {}",
            params.len()
        )));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParam("parameters must be finite".into()));
    }
    let mut ps = params.to_vec();
    ps.sort_by(|a, b| a.partial_cmp(b).expect("finite params"));
    let (rows, environment) = experiment_rows(descriptor, &ps, norms, cfg)?;
    let model = default_model(descriptor);
    let (fitted_exponent, residual) = fit_growth(&rows, model)?;
    Ok(GrowthReport {
        experiment_id: descriptor.to_string(),
        rows,
        norms: *norms,
        model,
        fitted_exponent,
        residual,
        environment,
    })
}

fn experiment_rows(
    descriptor: &str,
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    match descriptor {
        "identity" => rows_identity(params, norms, cfg),
        "v2_blowup" => rows_v2_blowup(params, norms, cfg),
        "tm3_blowup" => rows_tm3_blowup(params, norms, cfg),
        "v2res_bound" => rows_v2res_bound(params, norms, cfg),
        "v2res_l2fail" => rows_v2res_l2fail(params, norms, cfg),
        "whitney_bound" => rows_whitney_bound(params, norms, cfg),
        "badjoint_counter" => rows_badjoint_counter(params, norms, cfg),
        other => Err(Error::UnknownDescriptor(other.to_string())),
    }
}

/// Identity operator on a fixed bump: every ratio equals the same constant.
fn rows_identity(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let l = cfg.period.unwrap_or(16.0);
    let m = next_pow2(cfg.grid_m.unwrap_or(1 << 10));
    let f = spike_train(1, &[0.0], 1.0, m, l, 0.0)?;
    let input = lp_norm(&f, norms.p1)?;
    let output = lp_norm(&f, norms.p_out)?;
    let rows = params
        .iter()
        .map(|&p| GrowthRow {
            param: p,
            input_norms: vec![input],
            output_norm: output,
            ratio: output / input,
        })
        .collect();
    Ok((rows, env_for(m, l, std_plateau(), cfg)))
}

/// Translation-variation square function on chirp trains: the ratio grows
/// like a power of `log N`.
fn rows_v2_blowup(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let atom = std_plateau();
    let w = smooth_ind();
    let mut rows = Vec::new();
    let mut top = (0usize, 0.0f64);
    for &p in params {
        let n = param_usize(p)?;
        let l = cfg.period.unwrap_or(8.0 * n as f64).max(8.0 * n as f64);
        let m_need = next_pow2((2.0 * l * (2 * n + 2) as f64).ceil() as usize);
        let m = next_pow2(cfg.grid_m.unwrap_or(m_need)).max(m_need);
        let f = chirp_train(n, atom, m, l, 0.0)?;
        let denom = 1usize << cfg.refinement_level.min(8);
        let taus: Vec<f64> = (0..=n * denom).map(|j| j as f64 / denom as f64).collect();
        let v = v2_translation_square(&f, n, &taus, w)?;
        let input = lp_norm(&f, norms.p1)?;
        let output = lp_norm(&v, norms.p_out)?;
        rows.push(GrowthRow {
            param: p,
            input_norms: vec![input],
            output_norm: output,
            ratio: ratio_of(output, &[input]),
        });
        if m > top.0 {
            top = (m, l);
        }
    }
    Ok((rows, env_for(top.0, top.1, w, cfg)))
}

/// Jittered-tile bilinear multiplier on bi-chirp pairs.
fn rows_tm3_blowup(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let phi = sharp_plateau();
    let c_gamma = jitter_min_scale(DEFAULT_GAMMA, phi)?;
    let k_hi = c_gamma + 4 + cfg.refinement_level.min(4) as i32;
    let p2 = norms.p2.unwrap_or(norms.p1);
    let mut rows = Vec::new();
    let mut top = (0usize, 0.0f64);
    for &p in params {
        let n = param_usize(p)?;
        let l = cfg
            .period
            .unwrap_or(0.0)
            .max(8.0 * n as f64)
            .max(f64::powi(2.0, k_hi));
        let m_need = next_pow2((2.0 * l * (n + 2) as f64).ceil() as usize);
        let m = next_pow2(cfg.grid_m.unwrap_or(m_need)).max(m_need);
        let (f1, f2) = bichirp_pair(n, phi, m, l, 0.0)?;
        let tiles = make_tiles(
            TileFamily::IntegerJitter,
            DEFAULT_GAMMA,
            (c_gamma, k_hi),
            (1, n as i64),
            cfg.orientation,
        )?;
        let t = bilinear_tm(&f1, &f2, &tiles, phi, phi, TmMode::FullSum)?.full_sum();
        let in1 = lp_norm(&f1, norms.p1)?;
        let in2 = lp_norm(&f2, p2)?;
        let output = lp_norm(&t, norms.p_out)?;
        rows.push(GrowthRow {
            param: p,
            input_norms: vec![in1, in2],
            output_norm: output,
            ratio: ratio_of(output, &[in1, in2]),
        });
        if m > top.0 {
            top = (m, l);
        }
    }
    Ok((rows, env_for(top.0, top.1, phi, cfg)))
}

/// Restricted-variation window sampling: window lengths on a geometric mesh
/// of `2 << level` points per octave, with the uniform `alpha` sampling
/// density doubled per level.
fn v2res_sampling(level: u32, j_lo: i32, j_hi: i32) -> (Vec<f64>, usize) {
    let divs = 2usize << level.min(4);
    let mut r_set = Vec::new();
    for j in j_lo..=j_hi {
        for s in 0..divs {
            r_set.push(f64::powf(2.0, j as f64 + s as f64 / divs as f64));
        }
    }
    (r_set, 16usize << level.min(4))
}

/// Restricted variation on the chirp sub-family: the boundedness side.
fn rows_v2res_bound(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let atom = std_plateau();
    let w = smooth_ind();
    let (r_set, alpha_count) = v2res_sampling(cfg.refinement_level, -1, 4);
    let mut rows = Vec::new();
    let mut top = (0usize, 0.0f64);
    for &p in params {
        let n = param_usize(p)?;
        let l = cfg.period.unwrap_or(8.0 * n as f64).max(8.0 * n as f64);
        let m_need = next_pow2((2.0 * l * (n + 2) as f64).ceil() as usize);
        let m = next_pow2(cfg.grid_m.unwrap_or(m_need)).max(m_need);
        let f = chirp_train(n, atom, m, l, 0.0)?;
        let v = v2res(&f, &r_set, alpha_count, w)?;
        let input = lp_norm(&f, norms.p1)?;
        let output = lp_norm(&v, norms.p_out)?;
        rows.push(GrowthRow {
            param: p,
            input_norms: vec![input],
            output_norm: output,
            ratio: ratio_of(output, &[input]),
        });
        if m > top.0 {
            top = (m, l);
        }
    }
    Ok((rows, env_for(top.0, top.1, w, cfg)))
}

fn restricted_norm(v: &GridSignal, t: f64, p: f64) -> f64 {
    let sp = v.spacing();
    let mut acc = 0.0;
    for (i, z) in v.samples().iter().enumerate() {
        if v.x_at(i).abs() <= t {
            acc += z.norm().powf(p) * sp;
        }
    }
    acc.powf(1.0 / p)
}

/// Restricted variation of a single plateau atom measured on growing
/// windows `[-T, T]`: the `1/sqrt(1+|x|)`-type tail makes the restricted
/// norm grow like a power of `log T`.
fn rows_v2res_l2fail(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let atom = std_plateau();
    let w = smooth_ind();
    let l = cfg.period.unwrap_or(16384.0);
    let m = next_pow2(cfg.grid_m.unwrap_or(1 << 17));
    let origin = -l / 2.0;
    let f = signal_from_spectrum(m, l, origin, |xi| Complex64::new(atom.eval(xi / 4.0), 0.0))?;
    let (r_set, alpha_count) = v2res_sampling(cfg.refinement_level, -12, 1);
    let v = v2res(&f, &r_set, alpha_count, w)?;
    let input = lp_norm(&f, norms.p1)?;
    let mut rows = Vec::new();
    for &p in params {
        if !(p > 0.0) {
            return Err(Error::InvalidParam(format!("window size {p} must be positive")));
        }
        let output = restricted_norm(&v, p, norms.p_out);
        rows.push(GrowthRow {
            param: p,
            input_norms: vec![input],
            output_norm: output,
            ratio: ratio_of(output, &[input]),
        });
    }
    Ok((rows, env_for(m, l, w, cfg)))
}

/// Whitney-periodic bilinear multiplier truncated at finest scale `K`,
/// maximized over a seeded 20-pair corpus (bi-chirp pair included). The
/// coarsest scale is fixed, so truncations converge as `K` grows.
fn rows_whitney_bound(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let w = smooth_ind();
    let phi = sharp_plateau();
    let band = 4.0;
    let k_lo = 1i32;
    let mut k_params = Vec::new();
    for &p in params {
        let k = param_usize(p)? as i32;
        if k < k_lo {
            return Err(Error::InvalidParam(format!(
                "truncation scale {k} is below the coarsest scale {k_lo}"
            )));
        }
        k_params.push(k);
    }
    let k_max = *k_params.iter().max().expect("nonempty params");
    let l = cfg.period.unwrap_or(4096.0).max(f64::powi(2.0, k_max));
    let nyq_need = band + WHITNEY_GAMMA * f64::powi(2.0, -k_lo) + 1.0;
    let m_need = next_pow2((2.0 * l * nyq_need).ceil() as usize);
    let m = next_pow2(cfg.grid_m.unwrap_or(m_need)).max(m_need);
    let p2 = norms.p2.unwrap_or(norms.p1);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = vec![bichirp_pair(2, phi, m, l, 0.0)?];
    for _ in 0..19 {
        let f1 = random_band_signal(&mut rng, m, l, band)?;
        let f2 = random_band_signal(&mut rng, m, l, band)?;
        pairs.push((f1, f2));
    }

    // best[k] = (ratio, in1, in2, output) of the corpus-max pair at
    // truncation K = k.
    let mut best: BTreeMap<i32, (f64, f64, f64, f64)> = BTreeMap::new();
    for (f1, f2) in &pairs {
        let n1 = lp_norm(f1, norms.p1)?;
        let n2 = lp_norm(f2, p2)?;
        let mut acc = GridSignal::make_grid(m, l, 0.0)?;
        for k in k_lo..=k_max {
            let m_cap = (band * f64::powi(2.0, k)).floor() as i64;
            let tiles = make_tiles(
                TileFamily::WhitneyPeriodic,
                WHITNEY_GAMMA,
                (k, k),
                (-m_cap, m_cap),
                cfg.orientation,
            )?;
            let piece = bilinear_tm(f1, f2, &tiles, w, w, TmMode::FullSum)?.full_sum();
            for (a, b) in acc.samples_mut().iter_mut().zip(piece.samples()) {
                *a += b;
            }
            if k_params.contains(&k) {
                let output = lp_norm(&acc, norms.p_out)?;
                let ratio = ratio_of(output, &[n1, n2]);
                let e = best.entry(k).or_insert((f64::NEG_INFINITY, 0.0, 0.0, 0.0));
                if ratio > e.0 {
                    *e = (ratio, n1, n2, output);
                }
            }
        }
    }
    let rows = k_params
        .iter()
        .map(|k| {
            let (ratio, n1, n2, output) = best[k];
            GrowthRow {
                param: *k as f64,
                input_norms: vec![n1, n2],
                output_norm: output,
                ratio,
            }
        })
        .collect();
    Ok((rows, env_for(m, l, w, cfg)))
}

/// Maximal adjoint on a single atom of width `1/k0` against the indicator
/// of `[-1, 1]`, with the scale family `sigma = k0/j` (`j = 1..k0-1`) so
/// the first-coefficient translate `x -> x - 1/sigma` places a copy of the
/// atom at every `j/k0`: the copies tile `[-1, 1]` (minus a `1/k0` sliver)
/// at a height independent of `k0`. The `sigma = 1` scale is deliberately
/// excluded: its integer translates land far outside `[-1, 1]` and add an
/// `O(1/k0)` nuisance mass that masks the flat lower bound.
fn rows_badjoint_counter(
    params: &[f64],
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<(Vec<GrowthRow>, Environment)> {
    let eta = eta_profile();
    let l = cfg.period.unwrap_or(128.0);
    let m = next_pow2(cfg.grid_m.unwrap_or(1 << 15));
    let origin = -l / 2.0;
    let g = spike_train(1, &[0.0], 2.0, m, l, origin)?;
    let g_norm = lp_norm(&g, f64::INFINITY)?;
    let denom = 1usize << cfg.refinement_level.min(6);
    let mut rows = Vec::new();
    for &p in params {
        let k0 = param_usize(p)?;
        let f = spike_train(k0 as u32, &[0.0], 1.0 / k0 as f64, m, l, origin)?;
        // sigma = k0 / j, refined to half-integer (then quarter-integer, ...)
        // denominators at higher levels; ascending for the scale family.
        let mut sig: Vec<f64> = (denom..=k0 * denom - denom)
            .map(|i| k0 as f64 * denom as f64 / i as f64)
            .collect();
        sig.reverse();
        let sigmas = ScaleFamily::new(sig)?;
        let mz = maximal_adjoint(&f, &g, &sigmas, eta, AdjointMethod::FrequencySide)?;
        let output = lp_norm(&mz, norms.p_out)?;
        let in1 = lp_norm(&f, norms.p1)?;
        rows.push(GrowthRow {
            param: p,
            input_norms: vec![in1, g_norm],
            output_norm: output,
            ratio: ratio_of(output, &[in1, g_norm]),
        });
    }
    Ok((rows, env_for(m, l, eta, cfg)))
}

// ---------------------------------------------------------------------------
// Refinement studies
// ---------------------------------------------------------------------------

/// Recomputes a descriptor's summary value with doubled discretization
/// sampling per level and reports the relative change between consecutive
/// levels.
pub fn refinement_study(
    descriptor: &str,
    levels: u32,
    norms: &NormSpec,
    cfg: &StudyConfig,
) -> Result<RefinementReport> {
    if levels < 2 {
        return Err(Error::InvalidParam(format!(
            "refinement study needs at least 2 levels, got {levels}"
        )));
    }
    let mut out = Vec::new();
    let mut max_change = 0.0f64;
    let mut prev: Option<f64> = None;
    for level in 0..levels {
        let mut c = cfg.clone();
        c.refinement_level = level;
        let value = refinement_value(descriptor, norms, &c)?;
        let rel_change = match prev {
            None => 0.0,
            Some(pv) if pv != 0.0 => (value - pv).abs() / pv.abs(),
            Some(_) => 0.0,
        };
        max_change = max_change.max(rel_change);
        out.push(RefinementLevel { level, value, rel_change });
        prev = Some(value);
    }
    let final_rel_change = out.last().map(|r| r.rel_change).unwrap_or(0.0);
    Ok(RefinementReport {
        experiment_id: descriptor.to_string(),
        levels: out,
        max_rel_change: max_change,
        final_rel_change,
    })
}

fn refinement_value(descriptor: &str, norms: &NormSpec, cfg: &StudyConfig) -> Result<f64> {
    match descriptor {
        "identity" => {
            let (rows, _) = experiment_rows(descriptor, &[1.0], norms, cfg)?;
            Ok(rows[0].ratio)
        }
        "v2_blowup" => {
            let (rows, _) = experiment_rows(descriptor, &[64.0], norms, cfg)?;
            Ok(rows[0].ratio)
        }
        "v2res_bound" => {
            // 50-signal seeded corpus on a small grid plus the chirp
            // sub-family; the value is the corpus max ratio.
            let w = smooth_ind();
            let (r_set, alpha_count) = v2res_sampling(cfg.refinement_level, -1, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let (m, l, band) = (1usize << 12, 64.0, 8.0);
            let mut best = 0.0f64;
            for _ in 0..50 {
                let f = random_band_signal(&mut rng, m, l, band)?;
                let v = v2res(&f, &r_set, alpha_count, w)?;
                best = best.max(lp_norm(&v, norms.p_out)? / lp_norm(&f, norms.p1)?);
            }
            let (rows, _) = experiment_rows(descriptor, &[16.0, 64.0, 256.0], norms, cfg)?;
            for r in rows {
                best = best.max(r.ratio);
            }
            Ok(best)
        }
        _ => {
            let params = default_params(descriptor);
            if params.is_empty() {
                return Err(Error::UnknownDescriptor(descriptor.to_string()));
            }
            let (rows, _) = experiment_rows(descriptor, &params, norms, cfg)?;
            Ok(rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max))
        }
    }
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str =
    "experiment,param,p1,p2,input_norm1,input_norm2,output_norm,ratio";

/// Rows of a report as CSV with the fixed schema. Floats use the shortest
/// representation that parses back to the identical value.
pub fn report_to_csv(r: &GrowthReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_HEADER}");
    let p2 = r.norms.p2.map(|v| v.to_string()).unwrap_or_default();
    for row in &r.rows {
        let in2 = row
            .input_norms
            .get(1)
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.experiment_id,
            row.param,
            r.norms.p1,
            p2,
            row.input_norms[0],
            in2,
            row.output_norm,
            row.ratio
        );
    }
    s
}

/// Parses the fixed-schema CSV back into `(experiment_id, rows)`.
pub fn rows_from_csv(text: &str) -> Result<(String, Vec<GrowthRow>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV report".into()))?;
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header `{header}`")));
    }
    let mut id = String::new();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(Error::Config(format!("bad CSV row `{line}`")));
        }
        id = parts[0].to_string();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number `{s}`: {e}")))
        };
        let mut input_norms = vec![num(parts[4])?];
        if !parts[5].is_empty() {
            input_norms.push(num(parts[5])?);
        }
        rows.push(GrowthRow {
            param: num(parts[1])?,
            input_norms,
            output_norm: num(parts[6])?,
            ratio: num(parts[7])?,
        });
    }
    Ok((id, rows))
}

pub fn report_to_json(r: &GrowthReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)?)
}

pub fn report_from_json(s: &str) -> Result<GrowthReport> {
    Ok(serde_json::from_str(s)?)
}

// ---------------------------------------------------------------------------
// Acceptance bands
// ---------------------------------------------------------------------------

/// Tolerances for one experiment, loaded from an embedded key=value file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AcceptanceBand {
    pub model: Option<FitModel>,
    pub exponent_lo: Option<f64>,
    pub exponent_hi: Option<f64>,
    pub exponent_abs_max: Option<f64>,
    pub residual_max: Option<f64>,
    pub monotone_increasing: bool,
    pub spread_max: Option<f64>,
    pub min_output: Option<f64>,
}

/// Embedded band descriptor for an experiment, if one exists.
pub fn band_descriptor(experiment_id: &str) -> Option<&'static str> {
    match experiment_id {
        "v2_blowup" => Some(include_str!("../bands/v2_blowup.kv")),
        "tm3_blowup" => Some(include_str!("../bands/tm3_blowup.kv")),
        "v2res_bound" => Some(include_str!("../bands/v2res_bound.kv")),
        "v2res_l2fail" => Some(include_str!("../bands/v2res_l2fail.kv")),
        "whitney_bound" => Some(include_str!("../bands/whitney_bound.kv")),
        "badjoint_counter" => Some(include_str!("../bands/badjoint_counter.kv")),
        _ => None,
    }
}

/// Parses a flat key=value band file (`#` comments, blank lines allowed).
pub fn parse_band(text: &str) -> Result<AcceptanceBand> {
    let mut band = AcceptanceBand::default();
    for (key, value) in parse_kv_lines(text)? {
        let fv = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad value for `{key}`: {e}")))
        };
        match key.as_str() {
            "model" => band.model = Some(FitModel::parse(&value)?),
            "exponent_lo" => band.exponent_lo = Some(fv()?),
            "exponent_hi" => band.exponent_hi = Some(fv()?),
            "exponent_abs_max" => band.exponent_abs_max = Some(fv()?),
            "residual_max" => band.residual_max = Some(fv()?),
            "monotone" => band.monotone_increasing = value == "increasing",
            "spread_max" => band.spread_max = Some(fv()?),
            "min_output" => band.min_output = Some(fv()?),
            other => return Err(Error::Config(format!("unknown band key `{other}`"))),
        }
    }
    Ok(band)
}

/// Returns the list of band violations (empty = report is inside the band).
pub fn check_band(report: &GrowthReport, band: &AcceptanceBand) -> Vec<String> {
    let mut bad = Vec::new();
    if let Some(model) = band.model {
        if report.model != model {
            bad.push(format!(
                "model {} differs from required {}",
                report.model.as_str(),
                model.as_str()
            ));
        }
    }
    if let Some(lo) = band.exponent_lo {
        if report.fitted_exponent < lo {
            bad.push(format!("fitted exponent {} below {lo}", report.fitted_exponent));
        }
    }
    if let Some(hi) = band.exponent_hi {
        if report.fitted_exponent > hi {
            bad.push(format!("fitted exponent {} above {hi}", report.fitted_exponent));
        }
    }
    if let Some(am) = band.exponent_abs_max {
        if report.fitted_exponent.abs() > am {
            bad.push(format!(
                "fitted exponent magnitude {} above {am}",
                report.fitted_exponent.abs()
            ));
        }
    }
    if let Some(rm) = band.residual_max {
        if report.residual > rm {
            bad.push(format!("fit residual {} above {rm}", report.residual));
        }
    }
    if band.monotone_increasing {
        for w in report.rows.windows(2) {
            if !(w[1].ratio > w[0].ratio) {
                bad.push(format!(
                    "ratio not strictly increasing between params {} and {}",
                    w[0].param, w[1].param
                ));
            }
        }
    }
    if let Some(sm) = band.spread_max {
        let max = report.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let min = report.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        if min > 0.0 && max / min - 1.0 > sm {
            bad.push(format!("ratio spread {} above {sm}", max / min - 1.0));
        }
    }
    if let Some(mo) = band.min_output {
        for r in &report.rows {
            if r.output_norm < mo {
                bad.push(format!(
                    "output norm {} at param {} below {mo}",
                    r.output_norm, r.param
                ));
            }
        }
    }
    bad
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

fn parse_kv_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{line}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a flat key=value config file into a map; later keys override
/// earlier ones. Flags always take precedence over config values.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    Ok(parse_kv_lines(text)?.into_iter().collect())
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "tflab",
    about = "Norm-ratio experiment driver for time-frequency operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct StudyArgs {
    /// Largest sweep parameter (N for chirp sweeps, T for window sweeps).
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// Largest scale parameter (k0 or truncation K, per subcommand).
    #[arg(long)]
    k0: Option<usize>,
    /// Grid length override (rounded up to a power of two).
    #[arg(long = "grid-m")]
    grid_m: Option<usize>,
    /// Period override.
    #[arg(long)]
    period: Option<f64>,
    /// Norm exponent for unary experiments (also the output norm).
    #[arg(long)]
    p: Option<f64>,
    /// First input norm exponent for bilinear experiments.
    #[arg(long)]
    p1: Option<f64>,
    /// Second input norm exponent for bilinear experiments.
    #[arg(long)]
    p2: Option<f64>,
    /// Corpus seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Tile orientation.
    #[arg(long, value_parser = ["reflected", "literal"])]
    orientation: Option<String>,
    /// Flat key=value config file; flags override config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long, default_value_t = 8)]
    k0: u32,
    /// Re-verify the certificate with the independent recount/remeasure.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Modulus exponent: residues of powers of two modulo 5^m.
    #[arg(long)]
    m: u32,
}

#[derive(Args, Debug)]
struct ThetaArgs {
    /// Number of gauge steps.
    #[arg(long, default_value_t = 16)]
    k0: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExpsumArgs {
    #[arg(long = "n-max", default_value_t = 1024)]
    n_max: usize,
    /// Dual exponent p' in (1, 2].
    #[arg(long, default_value_t = 1.5)]
    p: f64,
}

#[derive(Args, Debug)]
struct RefineArgs {
    /// Experiment descriptor to refine.
    #[arg(long)]
    experiment: String,
    #[arg(long, default_value_t = 2)]
    levels: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Translation-variation blow-up sweep on chirp trains.
    #[command(name = "v2-blowup")]
    V2Blowup(StudyArgs),
    /// Bilinear jittered-tile blow-up sweep on bi-chirp pairs.
    #[command(name = "tm3-blowup")]
    Tm3Blowup(StudyArgs),
    /// Restricted-variation boundedness sweep on chirp trains.
    #[command(name = "v2res-bound")]
    V2resBound(StudyArgs),
    /// Restricted-variation growth on truncation windows.
    #[command(name = "v2res-l2fail")]
    V2resL2fail(StudyArgs),
    /// Whitney-periodic bilinear boundedness over scale truncations.
    #[command(name = "whitney-bound")]
    WhitneyBound(StudyArgs),
    /// Maximal-adjoint counterexample sweep.
    #[command(name = "badjoint-counter")]
    BadjointCounter(StudyArgs),
    /// Greedy shift cover of [1, 2^k0] by translated power-of-two orbits.
    Cover(CoverArgs),
    /// Continuous greedy cover from unit intervals around k0 spread points.
    CoverCont(CoverArgs),
    /// Distinct residues of powers of two modulo 5^m.
    Orbit(OrbitArgs),
    /// Staircase gauge-distance certificate.
    Theta(ThetaArgs),
    /// Exponential sum norms against the n^{1-1/p'} rate.
    Expsum(ExpsumArgs),
    /// Refinement study for one experiment descriptor.
    Refine(RefineArgs),
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

struct MergedArgs {
    args: StudyArgs,
    config: BTreeMap<String, String>,
}

impl MergedArgs {
    fn new(args: StudyArgs) -> Result<MergedArgs> {
        let config = match &args.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        Ok(MergedArgs { args, config })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.config.get(key).map(|s| s.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Config(format!("bad config value for `{key}`: {e}"))),
        }
    }

    fn n_max(&self, default: usize) -> Result<usize> {
        Ok(self.args.n_max.or(self.parsed("n-max")?).unwrap_or(default))
    }

    fn k0(&self, default: usize) -> Result<usize> {
        Ok(self.args.k0.or(self.parsed("k0")?).unwrap_or(default))
    }

    fn p(&self) -> Result<Option<f64>> {
        Ok(self.args.p.or(self.parsed("p")?))
    }

    fn p1(&self) -> Result<Option<f64>> {
        Ok(self.args.p1.or(self.parsed("p1")?))
    }

    fn p2(&self) -> Result<Option<f64>> {
        Ok(self.args.p2.or(self.parsed("p2")?))
    }

    fn format(&self) -> String {
        self.args
            .format
            .clone()
            .or_else(|| self.raw("format").map(str::to_string))
            .unwrap_or_else(|| "csv".to_string())
    }

    fn study_config(&self) -> Result<StudyConfig> {
        let orientation = match self
            .args
            .orientation
            .as_deref()
            .or_else(|| self.raw("orientation"))
        {
            None | Some("reflected") => Orientation::Reflected,
            Some("literal") => Orientation::Literal,
            Some(other) => {
                return Err(Error::Config(format!("unknown orientation `{other}`")));
            }
        };
        Ok(StudyConfig {
            grid_m: self.args.grid_m.or(self.parsed("grid-m")?),
            period: self.args.period.or(self.parsed("period")?),
            seed: self.args.seed.or(self.parsed("seed")?).unwrap_or(DEFAULT_SEED),
            refinement_level: 0,
            orientation,
        })
    }
}

fn pow2_sweep(lo: usize, hi: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        out.push(n as f64);
        n *= 2;
    }
    out
}

fn run_study(descriptor: &str, args: StudyArgs) -> Result<i32> {
    let merged = MergedArgs::new(args)?;
    let cfg = merged.study_config()?;
    let (params, norms) = match descriptor {
        "v2_blowup" | "v2res_bound" => {
            let n_max = merged.n_max(256)?;
            let p = merged.p()?.unwrap_or(4.0);
            (pow2_sweep(16, n_max), NormSpec::unary(p))
        }
        "tm3_blowup" => {
            let n_max = merged.n_max(256)?;
            let p1 = merged.p1()?.unwrap_or(4.0);
            let p2 = merged.p2()?.unwrap_or(4.0);
            let p_out = merged.p()?.unwrap_or(2.0);
            (pow2_sweep(16, n_max), NormSpec { p1, p2: Some(p2), p_out })
        }
        "v2res_l2fail" => {
            let t_max = merged.n_max(4096)?;
            let p = merged.p()?.unwrap_or(2.0);
            (pow2_sweep(16, t_max), NormSpec::unary(p))
        }
        "whitney_bound" => {
            let k_max = merged.k0(12)?;
            let p1 = merged.p1()?.unwrap_or(4.0);
            let p2 = merged.p2()?.unwrap_or(4.0);
            let p_out = merged.p()?.unwrap_or(2.0);
            (
                (4..=k_max).map(|k| k as f64).collect(),
                NormSpec { p1, p2: Some(p2), p_out },
            )
        }
        "badjoint_counter" => {
            let k_max = merged.k0(10)?;
            let p1 = merged.p()?.unwrap_or(4.0);
            (
                (4..=k_max).map(|k| k as f64).collect(),
                NormSpec { p1, p2: None, p_out: 1.0 },
            )
        }
        other => return Err(Error::UnknownDescriptor(other.to_string())),
    };
    let report = growth_study(descriptor, &params, &norms, &cfg)?;
    let text = match merged.format().as_str() {
        "json" => report_to_json(&report)?,
        _ => report_to_csv(&report),
    };
    write_out(&merged.args.out, &text)?;
    if let Some(bd) = band_descriptor(descriptor) {
        let band = parse_band(bd)?;
        let violations = check_band(&report, &band);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("band violation [{descriptor}]: {v}");
            }
            return Ok(2);
        }
    }
    Ok(0)
}

fn run_cover(args: CoverArgs, continuous: bool) -> Result<i32> {
    let (cover, recheck) = if continuous {
        let kset: Vec<f64> = (0..args.k0).map(|i| f64::powi(2.0, i as i32)).collect();
        let cover = greedy_cover_continuous(&kset, args.k0)?;
        let re = remeasure_cover_continuous(&cover, &kset);
        (cover, re)
    } else {
        let cover = greedy_cover(args.k0)?;
        let re = recount_cover(&cover)?;
        (cover, re)
    };
    let mut text = serde_json::to_string_pretty(&cover)?;
    text.push('\n');
    if args.verify {
        cover.verify()?;
        let ok = if continuous {
            (recheck - cover.covered_measure).abs() <= 1e-9 * cover.covered_measure.max(1.0)
        } else {
            recheck == cover.covered_measure
        };
        let _ = writeln!(
            text,
            "recheck: measured {} vs certified {} -> {}",
            recheck,
            cover.covered_measure,
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            write_out(&args.out, &text)?;
            return Ok(2);
        }
    }
    write_out(&args.out, &text)?;
    Ok(0)
}

fn run_theta(args: ThetaArgs) -> Result<i32> {
    let k = args.k0;
    let alphas: Vec<Dyadic> = (1..=k)
        .map(|j| Dyadic::pow2((j as i64) * (j as i64 - 1) / 2))
        .collect();
    let precision = (k * (k - 1) / 2 + 96).max(128);
    let cert = theta_construct(&alphas, k, precision)?;
    cert.verify()?;
    let mut text = serde_json::to_string_pretty(&cert)?;
    text.push('\n');
    write_out(&args.out, &text)?;
    Ok(0)
}

fn run_expsum(args: ExpsumArgs) -> Result<i32> {
    let mut n = 16usize;
    println!("n,norm,ratio_to_rate");
    while n <= args.n_max {
        let norm = exp_sum_norm(0.0, 1.0, n, args.p)?;
        let rate = (n as f64).powf(1.0 - 1.0 / args.p);
        println!("{n},{norm},{}", norm / rate);
        n *= 2;
    }
    Ok(0)
}

fn run_refine(args: RefineArgs) -> Result<i32> {
    let cfg = StudyConfig {
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        ..StudyConfig::default()
    };
    let norms = default_norms(&args.experiment);
    let report = refinement_study(&args.experiment, args.levels, &norms, &cfg)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_out(&args.out, &text)?;
    Ok(0)
}

/// Entry point: runs one subcommand. Exit code 0 on success, 2 when a
/// report lands outside its acceptance band, 1 on any error.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let outcome = match cli.cmd {
        Cmd::V2Blowup(a) => run_study("v2_blowup", a),
        Cmd::Tm3Blowup(a) => run_study("tm3_blowup", a),
        Cmd::V2resBound(a) => run_study("v2res_bound", a),
        Cmd::V2resL2fail(a) => run_study("v2res_l2fail", a),
        Cmd::WhitneyBound(a) => run_study("whitney_bound", a),
        Cmd::BadjointCounter(a) => run_study("badjoint_counter", a),
        Cmd::Cover(a) => run_cover(a, false),
        Cmd::CoverCont(a) => run_cover(a, true),
        Cmd::Orbit(a) => match orbit_distinct(a.m) {
            Ok((residues, distinct)) => {
                println!(
                    "modulus 5^{} -> {} residues, all distinct: {}",
                    a.m,
                    residues.len(),
                    distinct
                );
                let list: Vec<String> = residues.iter().map(u64::to_string).collect();
                println!("{}", list.join(" "));
                Ok(if distinct { 0 } else { 2 })
            }
            Err(e) => Err(e),
        },
        Cmd::Theta(a) => run_theta(a),
        Cmd::Expsum(a) => run_expsum(a),
        Cmd::Refine(a) => run_refine(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
