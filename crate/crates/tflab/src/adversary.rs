//! Deterministic extremizer generators and combinatorial certificates:
//! chirp trains, greedy shift covers, power-of-two orbits modulo 5^m,
//! high-precision equidistribution points, spike trains, and the assembled
//! maximal-adjoint counterexample pair.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{signal_from_spectrum, GridSignal};
#[cfg(test)]
use crate::grid::lp_norm;
use crate::varops::{maximal_adjoint, AdjointMethod, ScaleFamily};
use crate::windows::{build_profile, exp_sum_norm, WindowKind, WindowProfile};

/// Certificate of a greedy shift cover: the chosen shifts together with the
/// exactly recountable measure they cover inside `[1, 2^k0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCover {
    pub k0: u32,
    /// Chosen shifts; integer-valued for the discrete cover, arbitrary reals
    /// for the continuous variant. All are exactly representable.
    pub shifts: Vec<f64>,
    /// Measure (count, for the discrete cover) of `[1, 2^k0]` covered.
    pub covered_measure: f64,
    /// The measure the certificate promises: half of `2^k0`.
    pub target_measure: f64,
    /// Recorded constant `C` with `|shifts| <= C * 2^k0 / k0`.
    pub shift_constant: f64,
}

impl ShiftCover {
    /// Checks the certificate's structural invariants.
    pub fn verify(&self) -> Result<()> {
        if self.covered_measure < self.target_measure {
            return Err(Error::Certification(format!(
                "cover certifies {} but only reaches {}",
                self.target_measure, self.covered_measure
            )));
        }
        let budget = self.shift_constant * 2f64.powi(self.k0 as i32) / self.k0 as f64;
        if self.shifts.len() as f64 > budget + 1e-9 {
            return Err(Error::Certification(format!(
                "{} shifts exceed the recorded budget {budget}",
                self.shifts.len()
            )));
        }
        Ok(())
    }
}

/// The orbit `{2^k : 0 <= k < k0}` as exact integers.
pub fn power_orbit(k0: u32) -> Vec<i64> {
    (0..k0).map(|k| 1i64 << k).collect()
}

/// Finds the shift `n` in `[-2^k0, 2^k0]` maximizing `|{2^k + n} ∩ S|`
/// by exhaustive search. Ties break to the smallest `|n|`, then to the
/// negative one. The returned maximum count always meets the averaged
/// lower bound `ceil(k0 |S| / (2*2^k0 + 1))`.
pub fn greedy_shift(s: &[i64], k0: u32) -> Result<i64> {
    if s.is_empty() {
        return Err(Error::InvalidParam("shift search needs a nonempty set".into()));
    }
    if k0 == 0 || k0 > 24 {
        return Err(Error::InvalidParam(format!("k0 must be in [1, 24], got {k0}")));
    }
    let cap = 1i64 << k0;
    for &x in s {
        if x < 1 || x > cap {
            return Err(Error::InvalidParam(format!("set element {x} outside [1, 2^{k0}]")));
        }
    }
    let set: HashSet<i64> = s.iter().copied().collect();
    let orbit = power_orbit(k0);
    let mut best_n = 0i64;
    let mut best_count = -1i64;
    for n in -cap..=cap {
        let count = orbit.iter().filter(|&&p| set.contains(&(p + n))).count() as i64;
        let better = count > best_count
            || (count == best_count
                && (n.abs() < best_n.abs() || (n.abs() == best_n.abs() && n < best_n)));
        if better {
            best_count = count;
            best_n = n;
        }
    }
    let bound = (k0 as i64 * set.len() as i64 + 2 * cap) / (2 * cap + 1); // ceil
    debug_assert!(best_count >= bound, "greedy count {best_count} below averaged bound {bound}");
    Ok(best_n)
}

/// Greedy cover of `[1, 2^k0]` by shifted copies of the power orbit:
/// repeatedly applies [`greedy_shift`] to the uncovered residual until at
/// most half of the interval remains, and certifies the covered count.
pub fn greedy_cover(k0: u32) -> Result<ShiftCover> {
    if k0 == 0 || k0 > 24 {
        return Err(Error::InvalidParam(format!("k0 must be in [1, 24], got {k0}")));
    }
    let cap = 1i64 << k0;
    let orbit = power_orbit(k0);
    let mut residual: HashSet<i64> = (1..=cap).collect();
    for &p in &orbit {
        residual.remove(&p);
    }
    let mut shifts = vec![0i64];
    let half = cap / 2;
    while residual.len() as i64 > half {
        let mut sorted: Vec<i64> = residual.iter().copied().collect();
        sorted.sort_unstable();
        let n = greedy_shift(&sorted, k0)?;
        let before = residual.len();
        for &p in &orbit {
            residual.remove(&(p + n));
        }
        if residual.len() == before {
            return Err(Error::Certification(
                "greedy step failed to cover any new point".into(),
            ));
        }
        shifts.push(n);
    }
    let covered = (cap - residual.len() as i64) as f64;
    let constant = shifts.len() as f64 * k0 as f64 / cap as f64;
    let cover = ShiftCover {
        k0,
        shifts: shifts.iter().map(|&n| n as f64).collect(),
        covered_measure: covered,
        target_measure: (cap / 2) as f64,
        shift_constant: constant.max(1.0),
    };
    cover.verify()?;
    Ok(cover)
}

/// Independent recount oracle: recomputes the measure of
/// `∪_{n in shifts} (orbit + n) ∩ [1, 2^k0]` from scratch in exact integer
/// arithmetic. Only valid for integer-shift certificates.
pub fn recount_cover(cover: &ShiftCover) -> Result<f64> {
    let cap = 1i64 << cover.k0;
    let orbit = power_orbit(cover.k0);
    let mut covered: HashSet<i64> = HashSet::new();
    for &sf in &cover.shifts {
        if sf.fract() != 0.0 {
            return Err(Error::InvalidParam(
                "recount applies to integer shift certificates only".into(),
            ));
        }
        let n = sf as i64;
        for &p in &orbit {
            let q = p + n;
            if (1..=cap).contains(&q) {
                covered.insert(q);
            }
        }
    }
    Ok(covered.len() as f64)
}

/// Continuous greedy cover: covers `[1, 2^k0]` by unit neighborhoods of
/// translates of a `k0`-point set with unit separation, choosing each shift
/// by exact sweep-line measure maximization over the candidate breakpoints.
pub fn greedy_cover_continuous(kset: &[f64], k0: u32) -> Result<ShiftCover> {
    if k0 == 0 || k0 > 24 {
        return Err(Error::InvalidParam(format!("k0 must be in [1, 24], got {k0}")));
    }
    if kset.len() != k0 as usize {
        return Err(Error::InvalidParam(format!(
            "need exactly k0 = {k0} points, got {}",
            kset.len()
        )));
    }
    let cap = (1i64 << k0) as f64;
    let mut pts = kset.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in pts.windows(2) {
        if w[1] - w[0] < 1.0 - 1e-12 {
            return Err(Error::InvalidParam(format!(
                "points {} and {} are closer than 1",
                w[0], w[1]
            )));
        }
    }
    if pts[0] < 1.0 || pts[pts.len() - 1] > cap / 2.0 {
        return Err(Error::InvalidParam(
            "points must lie inside [1, 2^(k0-1)]".into(),
        ));
    }
    // Residual target, maintained as sorted disjoint intervals.
    let mut residual: Vec<(f64, f64)> = vec![(1.0, cap)];
    let mut shifts: Vec<f64> = Vec::new();
    let target = cap / 2.0;
    let measure = |iv: &[(f64, f64)]| iv.iter().map(|&(a, b)| b - a).sum::<f64>();
    // The target interval [1, 2^k0] has measure 2^k0 - 1.
    while (cap - 1.0) - measure(&residual) < target - 1e-9 {
        // Coverage of a shift t is sum over points of |[p+t-1/2, p+t+1/2] ∩ residual|,
        // piecewise linear in t with breakpoints where an atom edge meets a
        // residual endpoint; the max over [-2^k0, 2^k0] occurs at a breakpoint.
        let mut candidates: Vec<f64> = Vec::new();
        for &(a, b) in &residual {
            for &p in &pts {
                for c in [a - p - 0.5, a - p + 0.5, b - p - 0.5, b - p + 0.5] {
                    if c >= -cap - 1e-12 && c <= cap + 1e-12 {
                        candidates.push(c.clamp(-cap, cap));
                    }
                }
            }
        }
        candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        candidates.dedup();
        let gain_at = |t: f64| -> f64 {
            let mut gain = 0.0;
            for &p in &pts {
                let (lo, hi) = (p + t - 0.5, p + t + 0.5);
                for &(a, b) in &residual {
                    gain += (hi.min(b) - lo.max(a)).max(0.0);
                }
            }
            gain
        };
        let mut best_t = 0.0f64;
        let mut best_gain = -1.0;
        for &t in &candidates {
            let g = gain_at(t);
            let better = g > best_gain + 1e-12
                || ((g - best_gain).abs() <= 1e-12
                    && (t.abs() < best_t.abs() - 1e-12
                        || ((t.abs() - best_t.abs()).abs() <= 1e-12 && t < best_t)));
            if better {
                best_gain = g;
                best_t = t;
            }
        }
        if best_gain <= 1e-9 {
            return Err(Error::Certification(
                "continuous greedy step covers nothing new".into(),
            ));
        }
        // Subtract the chosen atoms from the residual.
        for &p in &pts {
            let (lo, hi) = (p + best_t - 0.5, p + best_t + 0.5);
            let mut next: Vec<(f64, f64)> = Vec::with_capacity(residual.len() + 1);
            for &(a, b) in &residual {
                if hi <= a || lo >= b {
                    next.push((a, b));
                    continue;
                }
                if a < lo {
                    next.push((a, lo));
                }
                if hi < b {
                    next.push((hi, b));
                }
            }
            residual = next;
        }
        shifts.push(best_t);
    }
    let covered = (cap - 1.0) - measure(&residual);
    let constant = shifts.len() as f64 * k0 as f64 / cap;
    let cover = ShiftCover {
        k0,
        shifts,
        covered_measure: covered,
        target_measure: target,
        shift_constant: constant.max(1.0),
    };
    cover.verify()?;
    Ok(cover)
}

/// Independent sweep-line oracle for continuous covers: measure of
/// `∪_{t in shifts} ∪_p [p+t-1/2, p+t+1/2] ∩ [1, 2^k0]`.
pub fn remeasure_cover_continuous(cover: &ShiftCover, kset: &[f64]) -> f64 {
    let cap = (1i64 << cover.k0) as f64;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for &t in &cover.shifts {
        for &p in kset {
            let (a, b) = ((p + t - 0.5).max(1.0), (p + t + 0.5).min(cap));
            if b > a {
                intervals.push((a, b));
            }
        }
    }
    intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in intervals {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    total
}

/// Enumerates `2^k mod 5^m` for `0 <= k < 4*5^(m-1)` and reports whether all
/// residues are distinct (they are: 2 generates the units modulo 5^m).
pub fn orbit_distinct(m: u32) -> Result<(Vec<u64>, bool)> {
    if m == 0 || m > 12 {
        return Err(Error::InvalidParam(format!(
            "modulus exponent must be in [1, 12], got {m}"
        )));
    }
    let modulus = 5u64.pow(m);
    let order = 4 * 5u64.pow(m - 1);
    let mut residues = Vec::with_capacity(order as usize);
    let mut seen = vec![false; modulus as usize];
    let mut all_distinct = true;
    let mut r = 1u64;
    for _ in 0..order {
        residues.push(r);
        if seen[r as usize] {
            all_distinct = false;
        }
        seen[r as usize] = true;
        r = (r * 2) % modulus;
    }
    Ok((residues, all_distinct))
}

/// An exact dyadic rational `mantissa * 2^exp2`, used for the rapidly
/// growing frequency gauges whose top elements exceed the f64 range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dyadic {
    pub mantissa: BigUint,
    pub exp2: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigUint, exp2: i64) -> Self {
        Dyadic { mantissa, exp2 }
    }

    pub fn from_u64(v: u64) -> Self {
        Dyadic { mantissa: BigUint::from(v), exp2: 0 }
    }

    pub fn pow2(e: i64) -> Self {
        Dyadic { mantissa: BigUint::one(), exp2: e }
    }

    /// Exact conversion of a positive finite f64.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParam(format!("{v} is not a positive real")));
        }
        let bits = v.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        Ok(Dyadic { mantissa: BigUint::from(mant), exp2: e })
    }

    /// Approximate base-2 logarithm of the value.
    pub fn log2(&self) -> f64 {
        if self.mantissa.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mantissa.bits() as i64;
        let top = (&self.mantissa >> (bits - bits.min(53)) as u64)
            .to_f64()
            .unwrap_or(1.0);
        top.log2() + (bits - bits.min(53) + self.exp2) as f64
    }

    pub fn to_f64(&self) -> f64 {
        2f64.powf(self.log2())
    }

    /// Compares `self` to `other * 2^shift` exactly.
    fn cmp_scaled(&self, other: &Dyadic, shift: i64) -> std::cmp::Ordering {
        let e1 = self.exp2;
        let e2 = other.exp2 + shift;
        let base = e1.min(e2);
        let a = &self.mantissa << (e1 - base) as u64;
        let b = &other.mantissa << (e2 - base) as u64;
        a.cmp(&b)
    }
}

/// One certified row of a [`ThetaCertificate`]: index into the gauge list,
/// step number within the certified range, the measured distance of
/// `alpha_j * theta` to the nearest integer, and its certified bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaBandEntry {
    pub j: u32,
    pub step: u32,
    pub distance: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Certificate that a single `theta ~ 1/k` places every gauge point
/// `alpha_j * theta` at a controlled distance from the integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    pub alphas: Vec<Dyadic>,
    pub k: u32,
    pub precision_bits: u32,
    /// Discovered constant: the certified range starts at `ceil(C log2 k)`.
    pub c_constant: u32,
    pub j_start: u32,
    pub theta: f64,
    /// Fixed-point theta: `theta_fixed.mantissa * 2^(-precision_bits)`.
    pub theta_fixed: Dyadic,
    pub slack: f64,
    pub c1: f64,
    pub c2: f64,
    pub band: Vec<ThetaBandEntry>,
}

impl ThetaCertificate {
    /// Checks the recorded invariants of the certificate.
    pub fn verify(&self) -> Result<()> {
        let k = self.k as f64;
        if !(self.theta >= 1.0 / k - 1e-12 && self.theta <= 1.0 / k + self.slack + 1e-12) {
            return Err(Error::Certification(format!(
                "theta {} outside [1/k, 1/k + slack]",
                self.theta
            )));
        }
        for e in &self.band {
            let lo = self.c1 * e.step as f64 / k;
            let hi = self.c2 * e.step as f64 / k;
            if (e.lower - lo).abs() > 1e-12 || (e.upper - hi).abs() > 1e-12 {
                return Err(Error::Certification(format!(
                    "band bounds at j={} disagree with c1, c2",
                    e.j
                )));
            }
            if !(e.distance >= e.lower && e.distance <= e.upper) {
                return Err(Error::Certification(format!(
                    "distance {} at j={} outside [{}, {}]",
                    e.distance, e.j, e.lower, e.upper
                )));
            }
        }
        Ok(())
    }
}

fn check_gauge_growth(alphas: &[Dyadic]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParam("gauge list is empty".into()));
    }
    if alphas[0].cmp_scaled(&Dyadic::from_u64(1), 0) != std::cmp::Ordering::Equal {
        return Err(Error::InvalidParam("first gauge element must equal 1".into()));
    }
    for (j, w) in alphas.windows(2).enumerate() {
        // alpha_{j+1} >= 2^j alpha_j with 1-based j
        if w[1].cmp_scaled(&w[0], (j + 1) as i64) == std::cmp::Ordering::Less {
            return Err(Error::InvalidParam(format!(
                "gauge growth violated between positions {} and {}",
                j + 1,
                j + 2
            )));
        }
    }
    Ok(())
}

/// Converts a fixed-point value `fp * 2^-p` to f64 via its top 53 bits
/// (direct conversion overflows for precisions beyond ~1000 bits).
fn fixed_to_f64(fp: &BigUint, p: u64) -> f64 {
    if fp.is_zero() {
        return 0.0;
    }
    let bits = fp.bits();
    let shift = bits.saturating_sub(53);
    let top = (fp >> shift).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi((shift as i64 - p as i64) as i32)
}

/// `alpha * theta` in fixed point: returns the product scaled by `2^p`.
/// Negative dyadic exponents truncate (error below one unit in `2^-p`).
fn fixed_mul(alpha: &Dyadic, theta_fp: &BigUint) -> BigUint {
    let t = &alpha.mantissa * theta_fp;
    if alpha.exp2 >= 0 {
        t << alpha.exp2 as u64
    } else {
        t >> (-alpha.exp2) as u64
    }
}

/// Constructs `theta ~ 1/k` so that the distance of `alpha_j * theta` to the
/// nearest integer follows the staircase `min(step/k, 1/2)` for
/// `j = j_start .. k`, using fixed-point arithmetic with `precision` bits.
/// The start `j_start = ceil(C log2 k)` uses the smallest constant `C` whose
/// drift budget passes; the certificate records measured distances.
pub fn theta_construct(alphas: &[Dyadic], k: u32, precision: u32) -> Result<ThetaCertificate> {
    check_gauge_growth(alphas)?;
    if k == 0 || (k as usize) > alphas.len() {
        return Err(Error::InvalidParam(format!(
            "k must be in [1, {}], got {k}",
            alphas.len()
        )));
    }
    if precision < 64 {
        return Err(Error::Precision("need at least 64 fixed-point bits".into()));
    }
    let p = precision as u64;
    let top_bits = alphas[k as usize - 1].log2();
    if (p as f64) < top_bits + 32.0 {
        return Err(Error::Precision(format!(
            "precision {precision} leaves fewer than 32 fractional bits at the top gauge (needs ~{})",
            (top_bits + 32.0).ceil()
        )));
    }
    let one_fp: BigUint = BigUint::one() << p;
    let kf = k as f64;
    let log2k = kf.log2();

    for c in 1..=64u32 {
        let j_start_f = (c as f64 * log2k).ceil();
        let j_start = (j_start_f.max(1.0)) as u32;
        if j_start > k {
            // Vacuous certified range: trivially valid.
            let theta_fp: BigUint = (&one_fp + BigUint::from(k - 1)) / k; // ceil(2^p / k)
            let theta = fixed_to_f64(&theta_fp, p);
            let cert = ThetaCertificate {
                alphas: alphas[..k as usize].to_vec(),
                k,
                precision_bits: precision,
                c_constant: c,
                j_start,
                theta,
                theta_fixed: Dyadic::new(theta_fp, -(precision as i64)),
                slack: 1.0 / kf,
                c1: 0.5,
                c2: 2.0,
                band: Vec::new(),
            };
            cert.verify()?;
            return Ok(cert);
        }
        // Drift budget: adjustments after step s move alpha_j*theta by at most
        // sum_{i>j} alpha_j/alpha_i <= 2^(1-j); it must stay below half the
        // narrowest band margin, 1/(2k). The initial slack sum must also fit.
        let alpha_start_log2 = alphas[j_start as usize - 1].log2();
        // A single-step range has no later adjustments, hence no drift.
        if j_start < k
            && (2f64.powi(1 - j_start as i32) > 1.0 / (4.0 * kf)
                || alpha_start_log2 < (16.0 * kf).log2())
        {
            continue;
        }
        // theta starts at ceil(2^p / k) and only increases.
        let mut theta_fp: BigUint = (&one_fp + BigUint::from(k - 1)) / k;
        for j in j_start..=k {
            let alpha = &alphas[j as usize - 1];
            let step = j - j_start + 1;
            // Target distance min(step/k, 1/2) in fixed point.
            let g: BigUint = if 2 * step >= k {
                BigUint::one() << (p - 1)
            } else {
                (BigUint::from(step) * &one_fp + BigUint::from(k / 2)) / k
            };
            let t = fixed_mul(alpha, &theta_fp);
            let f = &t % &one_fp;
            let mut best: Option<BigUint> = None;
            for target in [g.clone(), &one_fp - &g] {
                let delta_frac = (&target + &one_fp - &f) % &one_fp;
                // delta_theta = delta_frac / alpha, rounded to nearest.
                let (num, den) = if alpha.exp2 >= 0 {
                    (delta_frac, &alpha.mantissa << alpha.exp2 as u64)
                } else {
                    (delta_frac << (-alpha.exp2) as u64, alpha.mantissa.clone())
                };
                let d = (&num + (&den >> 1u64)) / &den;
                if best.as_ref().map_or(true, |b| d < *b) {
                    best = Some(d);
                }
            }
            theta_fp += best.unwrap();
        }
        let theta = fixed_to_f64(&theta_fp, p);
        // Certify measured distances.
        let (c1, c2) = (0.5, 2.0);
        let mut band = Vec::new();
        let mut ok = true;
        for j in j_start..=k {
            let step = j - j_start + 1;
            let t = fixed_mul(&alphas[j as usize - 1], &theta_fp);
            let f = &t % &one_fp;
            let dist_fp = if &f * 2u32 <= one_fp { f } else { &one_fp - &f };
            let distance = fixed_to_f64(&dist_fp, p);
            let lower = c1 * step as f64 / kf;
            let upper = c2 * step as f64 / kf;
            if !(distance >= lower && distance <= upper) {
                ok = false;
                break;
            }
            band.push(ThetaBandEntry { j, step, distance, lower, upper });
        }
        if !ok {
            continue;
        }
        let slack_budget = 2.0 * 2f64.powf(-alpha_start_log2) + 1.0 / (8.0 * kf);
        if theta - 1.0 / kf > slack_budget {
            continue;
        }
        let cert = ThetaCertificate {
            alphas: alphas[..k as usize].to_vec(),
            k,
            precision_bits: precision,
            c_constant: c,
            j_start,
            theta,
            theta_fixed: Dyadic::new(theta_fp, -(precision as i64)),
            slack: slack_budget,
            c1,
            c2,
            band,
        };
        cert.verify()?;
        return Ok(cert);
    }
    Err(Error::Certification(
        "no constant up to 64 satisfies the staircase error budget".into(),
    ))
}

fn check_plateau_kind(phi: &WindowProfile) -> Result<(f64, f64)> {
    let ph = *phi
        .certified_constants
        .get("plateau_halfwidth")
        .ok_or_else(|| Error::InvalidParam("window lacks a certified plateau".into()))?;
    let sh = *phi
        .certified_constants
        .get("support_halfwidth")
        .ok_or_else(|| Error::InvalidParam("window lacks a certified support".into()))?;
    Ok((ph, sh))
}

fn chirp_spectrum(
    n_max: usize,
    phi: &WindowProfile,
    sign: f64,
) -> impl Fn(f64) -> Complex64 + '_ {
    // sign = +1: n-th bump at +n with phase e^{-2 pi i (xi - n) n};
    // sign = -1: n-th bump at -n with phase e^{-2 pi i (xi + n) n}.
    move |xi: f64| {
        let center = (sign * xi).round() as i64;
        let mut total = Complex64::new(0.0, 0.0);
        for n in [center - 1, center, center + 1] {
            if n < 1 || n > n_max as i64 {
                continue;
            }
            let nf = n as f64;
            let off = xi - sign * nf;
            let v = phi.eval(off);
            if v != 0.0 {
                total += v * Complex64::from_polar(1.0, -2.0 * PI * off * nf);
            }
        }
        total
    }
}

/// Chirp train `f_N(x) = sum_{1<=n<=N} phi_time(x - n) e^{2 pi i n x}`, built
/// spectrally: the `n`-th summand occupies the frequency block
/// `[n - 1/2, n + 1/2]` with window `phi` and phase `e^{-2 pi i (xi-n) n}`.
pub fn chirp_train(
    n: usize,
    phi: &WindowProfile,
    m: usize,
    l: f64,
    origin: f64,
) -> Result<GridSignal> {
    if n == 0 {
        return Err(Error::InvalidParam("chirp train needs N >= 1".into()));
    }
    if phi.kind != WindowKind::PlateauPhi {
        return Err(Error::InvalidParam(
            "chirp train requires a plateau frequency window".into(),
        ));
    }
    if l < 8.0 * n as f64 {
        return Err(Error::InvalidParam(format!(
            "period {l} is below 8N = {}",
            8 * n
        )));
    }
    let proto = GridSignal::make_grid(m, l, origin)?;
    if proto.nyquist() < n as f64 + 1.0 {
        return Err(Error::BandOverflow(format!(
            "grid resolves frequencies up to {}, chirp train needs {}",
            proto.nyquist(),
            n + 1
        )));
    }
    signal_from_spectrum(m, l, origin, chirp_spectrum(n, phi, 1.0))
}

/// The bilinear counterexample pair: `f1` is the chirp train, `f2` carries
/// the conjugate modulation so that its spectrum sits in the reflected
/// blocks `[-n-1/2, -n+1/2]`. For a real-valued time window the two are
/// pointwise conjugates.
pub fn bichirp_pair(
    n: usize,
    phi: &WindowProfile,
    m: usize,
    l: f64,
    origin: f64,
) -> Result<(GridSignal, GridSignal)> {
    let (ph, sh) = check_plateau_kind(phi)?;
    if ph < 0.5 - 0.01 - 1e-12 || sh > 0.5 + 1e-12 {
        return Err(Error::InvalidParam(format!(
            "pair window must be 1 on [-0.49, 0.49] and supported in [-1/2, 1/2]; got plateau {ph}, support {sh}"
        )));
    }
    let f1 = chirp_train(n, phi, m, l, origin)?;
    let f2 = signal_from_spectrum(m, l, origin, chirp_spectrum(n, phi, -1.0))?;
    Ok((f1, f2))
}

/// Train of unit-height indicator atoms `1_{[s - width/2, s + width/2)}`
/// placed at the given shifts (wrapped periodically). Overlaps add.
pub fn spike_train(
    k0: u32,
    shifts: &[f64],
    width: f64,
    m: usize,
    l: f64,
    origin: f64,
) -> Result<GridSignal> {
    let _ = k0; // recorded by callers in certificates; the geometry is explicit
    let mut sig = GridSignal::make_grid(m, l, origin)?;
    let sp = sig.spacing();
    if !(width > 0.0) || width < 4.0 * sp - 1e-15 {
        return Err(Error::InvalidParam(format!(
            "width {width} is below four grid steps ({})",
            4.0 * sp
        )));
    }
    if width > l {
        return Err(Error::InvalidParam(format!(
            "width {width} exceeds the period {l}"
        )));
    }
    for &s in shifts {
        if !s.is_finite() {
            return Err(Error::InvalidParam("non-finite shift".into()));
        }
        let lo = ((s - width / 2.0 - origin) / sp).ceil() as i64;
        let hi = ((s + width / 2.0 - origin) / sp).ceil() as i64; // half-open
        for idx in lo..hi {
            let wrapped = idx.rem_euclid(m as i64) as usize;
            sig.samples_mut()[wrapped] += Complex64::new(1.0, 0.0);
        }
    }
    Ok(sig)
}

/// Certificate of the set where the maximal adjoint is large on the
/// assembled counterexample pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitSet {
    pub threshold: f64,
    pub measure: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

/// Thins a scale family to a subsequence with `sigma_{j+1} >= 2^j sigma_j`
/// (1-based j), keeping the first element and all scales `>= 2`.
pub fn thin_scales(sigmas: &ScaleFamily) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &s in sigmas.sigmas() {
        if s < 2.0 {
            continue;
        }
        match out.last() {
            None => out.push(s),
            Some(&prev) => {
                let j = out.len() as i32;
                if s >= 2f64.powi(j) * prev {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn theta_for_scales(thinned: &[f64], k0: usize, precision: u32) -> Result<ThetaCertificate> {
    let base = thinned[0];
    let alphas: Vec<Dyadic> = thinned[..k0]
        .iter()
        .map(|&s| Dyadic::from_f64(s / base))
        .collect::<Result<_>>()?;
    theta_construct(&alphas, k0 as u32, precision)
}

/// Smooth atom `(1 + x^2)^{-5}`, periodized over neighboring images.
fn decay_atom(x: f64, l: f64) -> f64 {
    let mut v = 0.0;
    for img in -2..=2 {
        let u = x + img as f64 * l;
        v += (1.0 + u * u).powi(-5);
    }
    v
}

/// Assembles the equidistribution counterexample pair for the maximal
/// adjoint over an arbitrary scale family: `g` is the smooth decay atom and
/// `f` is a train of `2*ceil(sigma*theta) + 1` compressed atoms at spacing
/// `1/(sigma*theta)`, where `theta` comes from [`theta_construct`] applied
/// to the thinned scale ratios. Returns the pair and the certified set
/// where the operator is large.
pub fn hl_counterexample(
    sigmas: &ScaleFamily,
    k0: usize,
    m: usize,
    l: f64,
    origin: f64,
) -> Result<(GridSignal, GridSignal, HitSet)> {
    let thinned = thin_scales(sigmas);
    if k0 == 0 || k0 > thinned.len() {
        return Err(Error::InvalidParam(format!(
            "thinning keeps {} scales, cannot take k0 = {k0}",
            thinned.len()
        )));
    }
    let sigma = thinned[k0 - 1];
    let proto = GridSignal::make_grid(m, l, origin)?;
    if sigma * proto.spacing() > 0.5 {
        return Err(Error::InvalidParam(format!(
            "grid spacing {} cannot resolve atoms compressed by {sigma}",
            proto.spacing()
        )));
    }
    let ratio_bits = (sigma / thinned[0]).log2();
    let precision = ((ratio_bits + 96.0).ceil() as u32).max(256);
    let cert = theta_for_scales(&thinned, k0, precision)?;
    let theta = cert.theta / thinned[0]; // gauge ratios were sigma_j / sigma_1
    let t_cap = (sigma * theta).ceil() as i64;
    let spacing_x = 1.0 / (sigma * theta);
    let f = GridSignal::from_fn(m, l, origin, |x| {
        let mut v = 0.0;
        for tau in -t_cap..=t_cap {
            v += decay_atom(sigma * (x - tau as f64 * spacing_x), sigma * l);
        }
        Complex64::new(v, 0.0)
    })?;
    let g = GridSignal::from_fn(m, l, origin, |x| Complex64::new(decay_atom(x, l), 0.0))?;
    let eta = build_profile(WindowKind::NonnegEta, 2048)?;
    let fam = ScaleFamily::new(thinned[..k0].to_vec())?;
    let mm = maximal_adjoint(&f, &g, &fam, &eta, AdjointMethod::FrequencySide)?;
    let mut peak = 0.0f64;
    for (i, z) in mm.samples().iter().enumerate() {
        let x = mm.x_at(i);
        if (0.0..=1.0).contains(&x) {
            peak = peak.max(z.norm());
        }
    }
    let threshold = 0.1 * peak;
    let count = mm
        .samples()
        .iter()
        .enumerate()
        .filter(|(i, z)| (0.0..=1.0).contains(&mm.x_at(*i)) && z.norm() >= threshold)
        .count();
    let hit = HitSet {
        threshold,
        measure: count as f64 * mm.spacing(),
        window_lo: 0.0,
        window_hi: 1.0,
    };
    Ok((f, g, hit))
}

/// Semi-analytic spectral-side norm of the ideal (non-periodized)
/// counterexample train: `||f_hat||_{p'} = sigma^{1/p'-1} * C_atom *
/// ||D_len||_{L^{p'}(T)}` with `len = 2 ceil(sigma theta) + 1`, where the
/// envelope constant is the `L^{p'}` norm of the atom's transform. The
/// scale-family constant cancels in ratio bands; it is included for honesty.
pub fn hl_wiener_norm(sigmas: &ScaleFamily, k0: usize, p1: f64) -> Result<f64> {
    if !(p1 >= 2.0) {
        return Err(Error::InvalidParam(format!("p1 must be >= 2, got {p1}")));
    }
    let p_prime = if p1.is_infinite() { 1.0 + 1e-9 } else { p1 / (p1 - 1.0) };
    let thinned = thin_scales(sigmas);
    if k0 == 0 || k0 > thinned.len() {
        return Err(Error::InvalidParam(format!(
            "thinning keeps {} scales, cannot take k0 = {k0}",
            thinned.len()
        )));
    }
    let sigma = thinned[k0 - 1];
    let ratio_bits = (sigma / thinned[0]).log2();
    let precision = ((ratio_bits + 96.0).ceil() as u32).max(256);
    let cert = theta_for_scales(&thinned, k0, precision)?;
    let theta = cert.theta / thinned[0];
    let len = (2 * (sigma * theta).ceil() as i64 + 1) as usize;
    let dirichlet = if len <= (1 << 17) {
        exp_sum_norm(0.0, 1.0, len, p_prime)?
    } else {
        // Quadrature over ~64*len points is infeasible here; for large trains
        // the kernel's L^{p'} mass concentrates at its singular point and
        // || D_len ||_{p'} = (len^{p'-1} K(p'))^{1/p'} (1 + O(len^{1-p'}))
        // with K(p') = integral over R of |sin(pi v) / (pi v)|^{p'} dv.
        (len as f64).powf(1.0 - 1.0 / p_prime) * dirichlet_singular_constant(p_prime).powf(1.0 / p_prime)
    };
    let c_atom = decay_atom_transform_norm(p_prime)?;
    Ok(sigma.powf(1.0 / p_prime - 1.0) * c_atom * dirichlet)
}

/// `K(p')`: the integral over the line of `|sin(pi v) / (pi v)|^{p'}`, by
/// fixed-step quadrature on `[0, 2048]` plus the analytic envelope tail.
fn dirichlet_singular_constant(p_prime: f64) -> f64 {
    let (cut, h) = (2048.0, 1.0 / 512.0);
    let n = (cut / h) as usize;
    let f = |v: f64| {
        if v.abs() < 1e-8 {
            1.0
        } else {
            ((PI * v).sin() / (PI * v)).abs().powf(p_prime)
        }
    };
    let mut s = 0.5 * (f(0.0) + f(cut));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    let body = 2.0 * s * h; // even integrand
    // Tail: sum over half-periods beyond the cut of avg |sin|^{p'} envelopes.
    let sin_avg = {
        let steps = 4096;
        (0..steps)
            .map(|i| ((i as f64 + 0.5) / steps as f64 * PI).sin().powf(p_prime))
            .sum::<f64>()
            / steps as f64
    };
    let tail = 2.0 * sin_avg / PI.powf(p_prime) * cut.powf(1.0 - p_prime) / (p_prime - 1.0);
    body + tail
}

/// `(integral of |atom_hat|^{p'})^{1/p'}` for the decay atom, by grid
/// quadrature on a wide, fine grid (the atom and its transform both decay
/// far below the quadrature error at the boundary).
fn decay_atom_transform_norm(p_prime: f64) -> Result<f64> {
    let (m, l) = (1 << 14, 64.0);
    let sig = GridSignal::from_fn(m, l, -l / 2.0, |x| Complex64::new((1.0 + x * x).powi(-5), 0.0))?;
    let dft = sig.dft();
    let mut total = 0.0;
    for (j, d) in dft.iter().enumerate() {
        let _ = j;
        let mag = (sig.spacing() * d).norm();
        total += mag.powf(p_prime);
    }
    Ok((total / l).powf(1.0 / p_prime) * l.powf(1.0 / p_prime))
}
