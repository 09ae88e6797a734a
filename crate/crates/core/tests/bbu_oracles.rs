use nalgebra::DVector;
use proptest::prelude::*;
use splitmimo_core::bbu::{
    bbu_precode, build_ils, one_stage_precode, qrzf, receiver_gains, solve_at_lambda, SesdOptions,
};
use splitmimo_core::channel::{rayleigh_from_rng, rng_for};
use splitmimo_core::linalg::{embed_vector, frobenius_sq};
use splitmimo_core::quantizer::{calibrate_step, distortion_factor};
use splitmimo_core::{ChannelMatrix, EffectiveChannel, QuantizerSpec};

/// Minimum of `‖e − R x‖²` over every point of `levels^dim`.
fn brute_force(r: &nalgebra::DMatrix<f64>, e: &DVector<f64>, levels: &[f64]) -> f64 {
    let dim = e.len();
    let total = levels.len().pow(dim as u32);
    (0..total)
        .map(|mut code| {
            let x = DVector::from_fn(dim, |_, _| {
                let v = levels[code % levels.len()];
                code /= levels.len();
                v
            });
            (e - r * x).norm_squared()
        })
        .fold(f64::INFINITY, f64::min)
}

fn calibrated(h: &EffectiveChannel, bits: u32, sigma: f64) -> QuantizerSpec {
    let p = qrzf(&h.matrix, 1.0, sigma, distortion_factor(bits).unwrap(), h.dim()).unwrap();
    let samples: Vec<f64> = p.matrix.iter().flat_map(|z| [z.re, z.im]).collect();
    calibrate_step(&samples, bits).unwrap()
}

#[test]
fn one_stage_small_array_matches_exhaustive_search() {
    let mut rng = rng_for(21, 0);
    for _ in 0..20 {
        let h = ChannelMatrix::new(rayleigh_from_rng(&mut rng, 2, 4, 1.0)).unwrap();
        let full = EffectiveChannel::new(h.entries.clone()).unwrap();
        let spec = calibrated(&full, 1, 0.1);
        let out = one_stage_precode(&h, &spec, 1.0, 0.1).unwrap();
        let prob = build_ils(&full, &out.gains, out.lambda_star).unwrap();
        for col in 0..2 {
            let x = embed_vector(&out.matrix.column(col).iter().copied().collect::<Vec<_>>());
            let got = prob.residual(col, x.as_slice());
            let best = brute_force(&prob.r, &prob.targets[col], &spec.level_set());
            assert!((got - best).abs() < 1e-9, "{got} vs {best}");
        }
    }
}

#[test]
fn refinement_approaches_continuous_solution_with_resolution() {
    let mut rng = rng_for(22, 0);
    let h = EffectiveChannel::new(rayleigh_from_rng(&mut rng, 2, 3, 1.0)).unwrap();
    let init = qrzf(&h.matrix, 1.0, 0.1, 0.0, 3).unwrap();
    let gains = receiver_gains(&h, &init.matrix, 0.1).unwrap();
    let lambda = 0.5;
    let prob = build_ils(&h, &gains, lambda).unwrap();
    let continuous: Vec<DVector<f64>> = (0..2).map(|c| prob.unconstrained_solution(c)).collect();
    let range = continuous.iter().flat_map(|v| v.iter()).fold(0.0f64, |m, x| m.max(x.abs())) * 1.5;
    let mut last = f64::INFINITY;
    for bits in 2..=8 {
        let levels = 1usize << bits;
        let spec = QuantizerSpec::with_eta(2.0 * range / levels as f64, bits, 0.0).unwrap();
        let sol = solve_at_lambda(&h, &gains, &spec, lambda, SesdOptions::exact(), None).unwrap();
        let mut dist = 0.0f64;
        for (c, cont) in continuous.iter().enumerate() {
            let x = embed_vector(&sol.matrix.column(c).iter().copied().collect::<Vec<_>>());
            dist = dist.max((x - cont).amax());
        }
        assert!(dist <= last + 1e-12, "B = {bits}: {dist} > {last}");
        assert!(dist <= 3.0 * spec.delta, "B = {bits}: {dist} vs 3 delta = {}", 3.0 * spec.delta);
        last = dist;
    }
}

#[test]
fn bbu_output_entries_and_power() {
    let mut rng = rng_for(23, 0);
    for bits in 1..=3 {
        let h = EffectiveChannel::new(rayleigh_from_rng(&mut rng, 3, 3, 1.0)).unwrap();
        let spec = calibrated(&h, bits, 0.05);
        let out = bbu_precode(&h, &spec, 1.0, 0.05).unwrap();
        assert!(out.achieved_power <= 1.0);
        assert!((frobenius_sq(&out.matrix) - out.achieved_power).abs() < 1e-12);
        assert!(out.exact);
        for z in out.matrix.iter() {
            assert!(spec.contains_level(z.re) && spec.contains_level(z.im));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bbu_feasible_on_random_instances(seed in 0u64..10_000, k in 1usize..4, bits in 1u32..4, snr_db in -10.0f64..30.0) {
        let mut rng = rng_for(seed, 0);
        let h = EffectiveChannel::new(rayleigh_from_rng(&mut rng, k, k, 1.0)).unwrap();
        let sigma = 10f64.powf(-snr_db / 10.0);
        let spec = calibrated(&h, bits, sigma);
        let out = bbu_precode(&h, &spec, 1.0, sigma).unwrap();
        prop_assert!(out.achieved_power <= 1.0 + 1e-12);
        for z in out.matrix.iter() {
            prop_assert!(spec.contains_level(z.re) && spec.contains_level(z.im));
        }
    }
}
