//! Randomized property tests for the library invariants: transform
//! identities, supremum monotonicity under family enlargement, oracle
//! agreement for the fast bilinear path, combinatorial bounds, and report
//! serialization round-trips.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use tflab::adversary::{bichirp_pair, greedy_shift, power_orbit};
use tflab::harness::{
    report_from_json, report_to_csv, report_to_json, rows_from_csv, Environment, FitModel,
    GrowthReport, GrowthRow, NormSpec,
};
use tflab::varops::{
    bilinear_scale_sup, bilinear_tm, bilinear_tm_direct, make_tiles, maximal_adjoint, v2res,
    v2_translation_square, AdjointMethod, Orientation, ScaleFamily, TileFamily, TmMode,
};
use tflab::{
    build_profile, exp_sum_norm, fejer, lp_norm, plateau_variant, wiener_norm, GridSignal,
    Interval, WindowKind,
};

fn rand_signal(m: usize, l: f64, seed: u64) -> GridSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = GridSignal::make_grid(m, l, 0.0).unwrap();
    for z in f.samples_mut() {
        *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    f
}

fn rand_bandlimited(m: usize, l: f64, band: f64, seed: u64) -> GridSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tflab::harness::random_band_signal(&mut rng, m, l, band).unwrap()
}

fn sup_diff(a: &GridSignal, b: &GridSignal) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn sup_abs(a: &GridSignal) -> f64 {
    a.samples().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pointwise `a <= b + tol` for real nonnegative outputs of sup-type
/// operators.
fn pointwise_le(a: &GridSignal, b: &GridSignal, tol: f64) -> bool {
    a.samples()
        .iter()
        .zip(b.samples())
        .all(|(x, y)| x.norm() <= y.norm() + tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Position-space L2 equals the spectrum's weighted l2 (Plancherel).
    #[test]
    fn plancherel(m_exp in 6u32..10, l in 4.0f64..64.0, seed in 0u64..1u64 << 32) {
        let f = rand_signal(1 << m_exp, l, seed);
        let pos = lp_norm(&f, 2.0).unwrap();
        let freq = wiener_norm(&f, 2.0).unwrap();
        prop_assert!((pos - freq).abs() <= 1e-10 * pos.max(1e-300));
    }

    /// Applying two multipliers in sequence equals applying their product.
    #[test]
    fn multiplier_composition(
        m_exp in 6u32..10,
        l in 4.0f64..32.0,
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        seed in 0u64..1u64 << 32,
    ) {
        let f = rand_signal(1 << m_exp, l, seed);
        let a = |xi: f64| Complex64::new(1.0 / (1.0 + xi * xi), (c1 * xi).sin());
        let b = |xi: f64| Complex64::new((c2 * xi).cos(), xi / (1.0 + xi.abs()));
        let seq = tflab::apply_multiplier(&tflab::apply_multiplier(&f, a).unwrap(), b).unwrap();
        let joint = tflab::apply_multiplier(&f, |xi| a(xi) * b(xi)).unwrap();
        let scale = sup_abs(&joint).max(1e-300);
        prop_assert!(sup_diff(&seq, &joint) <= 1e-10 * scale);
    }

    /// The projected signal's spectrum vanishes at every bin outside the
    /// window interval.
    #[test]
    fn projection_band_limits(
        m_exp in 7u32..10,
        l in 4.0f64..32.0,
        c_frac in -0.4f64..0.4,
        w_frac in 0.05f64..0.4,
        seed in 0u64..1u64 << 32,
    ) {
        let f = rand_signal(1 << m_exp, l, seed);
        let nyq = f.nyquist();
        let iv = Interval::new(c_frac * nyq, w_frac * nyq).unwrap();
        let w = build_profile(WindowKind::SmoothIndicator, 512).unwrap();
        let g = tflab::project_window(&f, &iv, &w).unwrap();
        let dft = g.dft();
        let scale = dft.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
        for (idx, z) in dft.iter().enumerate() {
            let xi = g.freq_at(idx);
            if xi < iv.lo() || xi > iv.hi() {
                prop_assert!(z.norm() <= 1e-12 * scale, "leak at xi = {xi}");
            }
        }
    }

    /// On a support of unit measure the Lp norms are non-decreasing in p.
    #[test]
    fn lp_monotone_on_unit_support(
        m_exp in 8u32..11,
        p in 1.0f64..8.0,
        dq in 0.0f64..8.0,
        seed in 0u64..1u64 << 32,
    ) {
        let l = 8.0;
        let mut f = rand_signal(1 << m_exp, l, seed);
        for i in 0..f.len() {
            let x = f.x_at(i);
            if !(2.0..3.0).contains(&x) {
                f.samples_mut()[i] = Complex64::new(0.0, 0.0);
            }
        }
        let lo = lp_norm(&f, p).unwrap();
        let hi = lp_norm(&f, p + dq).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert!(hi <= lp_norm(&f, f64::INFINITY).unwrap() * (1.0 + 1e-12));
    }

    /// The exponential-sum norm is modulation invariant: shifting the start
    /// frequency leaves it unchanged.
    #[test]
    fn exp_sum_start_invariance(
        start in -10.0f64..10.0,
        delta in -100.0f64..100.0,
        step in 0.1f64..4.0,
        len in 2usize..200,
        pp in 1.05f64..2.0,
    ) {
        let a = exp_sum_norm(start, step, len, pp).unwrap();
        let b = exp_sum_norm(start + delta, step, len, pp).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    /// Hausdorff-Young: the frequency-side norm dominates the Lp norm.
    #[test]
    fn hausdorff_young(
        m_exp in 6u32..10,
        l in 2.0f64..32.0,
        seed in 0u64..1u64 << 32,
    ) {
        let f = rand_signal(1 << m_exp, l, seed);
        for p in [2.0, 4.0, 8.0, f64::INFINITY] {
            prop_assert!(wiener_norm(&f, p).unwrap() >= lp_norm(&f, p).unwrap() - 1e-8);
        }
    }

    /// The Fejer kernel is nonnegative and 1-periodic.
    #[test]
    fn fejer_nonnegative_periodic(k in 1u32..10, t in -3.0f64..3.0) {
        let v = fejer(k, t);
        prop_assert!(v >= -1e-12);
        prop_assert!((v - fejer(k, t + 1.0)).abs() <= 1e-9 * (1.0 + v.abs()));
    }

    /// The single-shift greedy search achieves the exhaustive optimum and
    /// the averaged lower bound.
    #[test]
    fn shift_search_optimal_and_bounded(k0 in 2u32..9, seed in 0u64..1u64 << 32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = 1i64 << k0;
        let mut s: Vec<i64> = (1..=cap).filter(|_| rng.gen_bool(0.5)).collect();
        if s.is_empty() {
            s.push(rng.gen_range(1..=cap));
        }
        let set: HashSet<i64> = s.iter().copied().collect();
        let orbit = power_orbit(k0);
        let count_at = |n: i64| orbit.iter().filter(|&&p| set.contains(&(p + n))).count() as i64;
        let best = (-cap..=cap).map(count_at).max().unwrap();
        let got = count_at(greedy_shift(&s, k0).unwrap());
        prop_assert_eq!(got, best);
        let averaged = (k0 as i64 * set.len() as i64 + 2 * cap) / (2 * cap + 1);
        prop_assert!(got >= averaged);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Enlarging the translation family never decreases the variation
    /// square function pointwise.
    #[test]
    fn v2_monotone_in_translations(seed in 0u64..1u64 << 32, extra in 1usize..4) {
        let f = rand_bandlimited(2048, 32.0, 4.0, seed);
        let w = build_profile(WindowKind::SmoothIndicator, 512).unwrap();
        let small: Vec<f64> = (0..=2).map(|j| j as f64).collect();
        let mut large = small.clone();
        for j in 0..extra {
            large.push(2.0 + 0.5 * (j + 1) as f64);
        }
        let a = v2_translation_square(&f, 3, &small, &w).unwrap();
        let b = v2_translation_square(&f, 3, &large, &w).unwrap();
        prop_assert!(pointwise_le(&a, &b, 1e-12));
    }

    /// Enlarging the window-length set or doubling the offset sampling never
    /// decreases the restricted variation pointwise.
    #[test]
    fn v2res_monotone_in_family(seed in 0u64..1u64 << 32) {
        let f = rand_bandlimited(2048, 32.0, 4.0, seed);
        let w = build_profile(WindowKind::SmoothIndicator, 512).unwrap();
        // same maximum R so both calls share one output grid
        let r_small = [1.0, 4.0];
        let r_large = [0.5, 1.0, 2.0, 4.0];
        let a = v2res(&f, &r_small, 8, &w).unwrap();
        let b = v2res(&f, &r_large, 8, &w).unwrap();
        prop_assert!(pointwise_le(&a, &b, 1e-12));
        let c = v2res(&f, &r_small, 16, &w).unwrap();
        prop_assert!(pointwise_le(&a, &c, 1e-12));
    }

    /// Enlarging the scale family never decreases the maximal adjoint
    /// pointwise.
    #[test]
    fn adjoint_monotone_in_scales(seed in 0u64..1u64 << 32) {
        let f = rand_bandlimited(1024, 16.0, 4.0, seed);
        let g = rand_bandlimited(1024, 16.0, 4.0, seed.wrapping_add(1));
        let eta = build_profile(WindowKind::NonnegEta, 1024).unwrap();
        let small = ScaleFamily::new(vec![2.0, 4.0]).unwrap();
        let large = ScaleFamily::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        let a = maximal_adjoint(&f, &g, &small, &eta, AdjointMethod::FrequencySide).unwrap();
        let b = maximal_adjoint(&f, &g, &large, &eta, AdjointMethod::FrequencySide).unwrap();
        prop_assert!(pointwise_le(&a, &b, 1e-12));
    }

    /// Enlarging the scale range never decreases the bilinear scale
    /// supremum pointwise.
    #[test]
    fn scale_sup_monotone_in_range(seed in 0u64..1u64 << 32) {
        let f1 = rand_bandlimited(1024, 16.0, 6.0, seed);
        let f2 = rand_bandlimited(1024, 16.0, 6.0, seed.wrapping_add(7));
        let w = build_profile(WindowKind::SmoothIndicator, 512).unwrap();
        let a = bilinear_scale_sup(&f1, &f2, (0, 1), &w).unwrap();
        let b = bilinear_scale_sup(&f1, &f2, (-1, 2), &w).unwrap();
        prop_assert!(pointwise_le(&a, &b, 1e-12));
    }

    /// The fast spectral bilinear path agrees with the per-tile oracle, and
    /// its per-scale pieces add up to the full sum (jittered family with
    /// its packet phases, both orientations).
    #[test]
    fn bilinear_fast_direct_and_additivity(
        n in 2usize..6,
        k_hi in 8i32..10,
        reflected in any::<bool>(),
        seed in 0u64..1u64 << 32,
    ) {
        let phi = plateau_variant(0.49375, 0.00125, 4096).unwrap();
        let l = 256.0;
        let m = 1usize << 12; // nyquist 8 > n + 1
        let orientation = if reflected { Orientation::Reflected } else { Orientation::Literal };
        let (f1, f2) = bichirp_pair(n, &phi, m, l, 0.0).unwrap();
        let _ = seed;
        let tiles = make_tiles(
            TileFamily::IntegerJitter,
            100.0,
            (8, k_hi),
            (1, n as i64),
            orientation,
        ).unwrap();
        let fast = bilinear_tm(&f1, &f2, &tiles, &phi, &phi, TmMode::FullSum)
            .unwrap()
            .full_sum();
        let direct = bilinear_tm_direct(&f1, &f2, &tiles, &phi, &phi).unwrap();
        let scale = sup_abs(&direct).max(1e-300);
        prop_assert!(sup_diff(&fast, &direct) <= 1e-10 * scale);
        let summed = bilinear_tm(&f1, &f2, &tiles, &phi, &phi, TmMode::PerScale)
            .unwrap()
            .full_sum();
        prop_assert!(sup_diff(&summed, &fast) <= 1e-10 * scale);
    }
}

fn arb_positive() -> impl Strategy<Value = f64> {
    // log-uniform over ~12 decades, always finite and positive
    (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
}

fn arb_report() -> impl Strategy<Value = GrowthReport> {
    let row = (arb_positive(), arb_positive(), arb_positive()).prop_map(
        |(in1, in2, out)| GrowthRow {
            param: 0.0, // filled below
            input_norms: vec![in1, in2],
            output_norm: out,
            ratio: out / (in1 * in2),
        },
    );
    (
        proptest::collection::vec(row, 4..8),
        arb_positive(),
        prop_oneof![
            Just(FitModel::LogPower),
            Just(FitModel::PolyPower),
            Just(FitModel::Constant)
        ],
    )
        .prop_map(|(mut rows, res, model)| {
            for (i, r) in rows.iter_mut().enumerate() {
                r.param = f64::powi(2.0, i as i32 + 2);
            }
            GrowthReport {
                experiment_id: "tm3_blowup".into(),
                rows,
                norms: NormSpec { p1: 4.0, p2: Some(4.0), p_out: 2.0 },
                model,
                fitted_exponent: res.ln(),
                residual: res,
                environment: Environment {
                    grid_len: 4096,
                    period: 128.0,
                    profile_constants: Default::default(),
                    seed: 17,
                    refinement_level: 0,
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// JSON report round-trip is exact; the CSV round-trip reproduces every
    /// row bit-for-bit (shortest round-trip float formatting).
    #[test]
    fn report_round_trips(report in arb_report()) {
        let json = report_to_json(&report).unwrap();
        prop_assert_eq!(&report_from_json(&json).unwrap(), &report);
        let csv = report_to_csv(&report);
        let (id, rows) = rows_from_csv(&csv).unwrap();
        prop_assert_eq!(id, report.experiment_id.clone());
        prop_assert_eq!(rows, report.rows);
    }
}

/// Profile construction is deterministic: rebuilding a window yields a
/// bit-identical serialization, including all certified constants.
#[test]
fn profile_construction_deterministic() {
    for kind in [
        WindowKind::SmoothIndicator,
        WindowKind::PlateauPhi,
        WindowKind::PositivePhi,
        WindowKind::NonnegEta,
        WindowKind::PartitionBar1,
    ] {
        let a = build_profile(kind, 512).unwrap();
        let b = build_profile(kind, 512).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "{kind:?}");
    }
    let a = plateau_variant(0.49, 0.005, 1024).unwrap();
    let b = plateau_variant(0.49, 0.005, 1024).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
