use std::sync::Arc;

use farfield_core::grid::{build_grid, Stretching};
use farfield_core::hopf::*;
use farfield_core::profiles::*;
use farfield_core::solver::{run, SimState, SolverConfig};
use farfield_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest L φ over a uniform grid of the lens with about `n` points.
fn dense_grid_max(coeffs: &OperatorCoefficients<f64>, spec: &BarrierSpec<f64>, n: usize) -> (f64, usize) {
    let side = (n as f64).sqrt().ceil() as usize * 2;
    let d = spec.delta_star;
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for i in 0..side {
        for j in 0..side {
            let p = Point::new(
                spec.p_star.x - d + 2.0 * d * (i as f64 + 0.5) / side as f64,
                spec.p_star.t - d + 2.0 * d * (j as f64 + 0.5) / side as f64,
            );
            if spec.in_domain(&p) {
                count += 1;
                worst = worst.max(operator_on_barrier(coeffs, spec, &p));
            }
        }
    }
    (worst, count)
}

#[test]
fn unit_operator_passes_at_twice_zeta0() {
    let (c, s) = unit_preset::<f64>(2.0).unwrap();
    let v = verify_barrier(&c, &s, 4000).unwrap();
    assert!(v.pass);
    let (oracle, count) = dense_grid_max(&c, &s, 100_000);
    assert!(count > 10_000);
    assert!(oracle < 0.0);
}

#[test]
fn unit_operator_fails_at_small_zeta() {
    let (c, s) = unit_preset::<f64>(0.01).unwrap();
    let v = verify_barrier(&c, &s, 4000).unwrap();
    assert!(!v.pass);
    assert!(v.worst_value >= 0.0);
    let (oracle, _) = dense_grid_max(&c, &s, 100_000);
    assert!(oracle >= 0.0);
}

#[test]
fn reaction_outside_hypotheses_is_flagged() {
    let (_, s) = unit_preset::<f64>(2.0).unwrap();
    // c·|P − P*| ≤ C* = 1 needs c < 1/δ* = 10
    let c = OperatorCoefficients::constant(0.0, 1.0, 0.0, 50.0, 1.0, 1.0, 1.0).unwrap();
    match verify_barrier(&c, &s, 2000) {
        Err(Error::HypothesisViolated { which, .. }) => assert_eq!(which, "zeroth-order bound"),
        other => panic!("expected a hypothesis violation, got {other:?}"),
    }
    let c = OperatorCoefficients::constant(0.0, 1.0, -100.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    assert!(matches!(verify_barrier(&c, &s, 2000), Err(Error::HypothesisViolated { .. })));
}

#[test]
fn randomized_draws_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let (c, s) = random_barrier_case::<f64, _>(&mut rng, 2.0).unwrap();
        assert!(verify_barrier(&c, &s, 1000).unwrap().pass);
    }
}

#[test]
fn comparison_corpus_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let (c, f) = random_comparison_instance::<f64, _>(&mut rng, 20, 20).unwrap();
        let out = comparison_check(&c, &f);
        assert!(out.premise && out.holds, "{out:?}");
    }
}

#[test]
fn f32_barrier() {
    let (c, s) = unit_preset::<f32>(2.0).unwrap();
    assert!(verify_barrier(&c, &s, 1000).unwrap().pass);
}

#[test]
fn slope_examples() {
    let ls: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let est = |f: &dyn Fn(f64) -> f64| hopf_slope_estimate(0.0, &ls.iter().map(|&l| (l, f(l))).collect::<Vec<_>>()).unwrap();
    assert!((est(&|l| 3.0 * l).estimate + 3.0).abs() < 1e-12);
    assert!((est(&|l| l + l * l).estimate + 1.0).abs() < 1e-10);
    let cubic = est(&|l| l * l * l);
    assert!(cubic.confident && !cubic.strictly_negative());
}

#[test]
fn presets_pass_on_a_short_run() {
    let gas = GasConstants::default();
    for ell in [3.0, 4.0] {
        let prof = make_density_profile(DensityFamily::Algebraic, &[1.0, ell]).unwrap();
        let f = InitialFields::new(
            prof,
            VelocityField::GaussianOdd { amp: 1.0 },
            TemperatureField::Gaussian { amp: 1.0 },
            gas,
        )
        .unwrap();
        let ext = truncate_and_extend(&f, -20.0, 20.0).unwrap();
        let g = Arc::new(build_grid(-21.0, 21.0, 512, Stretching::Sinh { scale: 4.0 }).unwrap());
        let s0 = SimState::from_extended(g, &ext).unwrap();
        let out = run(s0, &SolverConfig::new(5e-3, gas), 0.1).unwrap();
        let sampler = StateSampler::new(out.state, prof);
        let (c, s) = scaling_preset(&sampler, &gas, ell, 0.1, 2.0, 1000).unwrap();
        assert!(verify_barrier(&c, &s, 1000).unwrap().pass);
        let (c, s) = kelvin_preset(&sampler, &gas, 0.1, 2.0, 1000).unwrap();
        assert!(verify_barrier(&c, &s, 1000).unwrap().pass);
    }
}

#[test]
fn preset_geometry_is_checked() {
    let gas = GasConstants::default();
    let prof = make_density_profile(DensityFamily::Algebraic, &[1.0, 4.0]).unwrap();
    let f = InitialFields::new(prof, VelocityField::Zero, TemperatureField::Gaussian { amp: 1.0 }, gas).unwrap();
    let ext = truncate_and_extend(&f, -10.0, 10.0).unwrap();
    let g = Arc::new(build_grid(-11.0, 11.0, 128, Stretching::Uniform).unwrap());
    let sampler = StateSampler::new(SimState::from_extended(g, &ext).unwrap(), prof);
    // t0 = 0 leaves no room for the ball
    assert!(kelvin_preset(&sampler, &gas, 0.1, 2.0, 1000).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta0_homogeneity(lam in 0.1f64..3.0, ratio in 1.0f64..4.0, cs in 0.0f64..5.0, r in 0.1f64..2.0, dist in 0.05f64..2.0, k in 0.2f64..5.0) {
        let z = zeta0(1, lam, lam * ratio, cs, r, dist).unwrap();
        let tol = 1e-12 * z;
        prop_assert!((zeta0(1, lam, k * lam * ratio, k * cs, r, dist).unwrap() - k * z).abs() < tol * k);
        prop_assert!((zeta0(1, k * lam, lam * ratio, cs, r, dist).unwrap() - z / k).abs() < tol / k);
        prop_assert!((zeta0(1, lam, lam * ratio, cs, r, k * dist).unwrap() - z / (k * k)).abs() < tol / (k * k));
    }

    #[test]
    fn barrier_is_radial(zeta in 0.1f64..50.0, rho in 0.0f64..0.6, a1 in 0.0f64..6.3, a2 in 0.0f64..6.3) {
        let s = BarrierSpec::from_offset(Point::new(0.0, 0.0), 1.0, 0.8, true, 0.1, zeta).unwrap();
        let at = |a: f64| barrier_value(&Point::new(s.p0_star.x + rho * a.cos(), s.p0_star.t + rho * a.sin()), &s);
        prop_assert!((at(a1) - at(a2)).abs() < 1e-14);
    }

    #[test]
    fn constant_coefficients_pass_at_twice_zeta0(
        lam in 0.1f64..2.0, ratio in 1.0f64..5.0, cs in 0.01f64..5.0, r in 0.1f64..2.0,
        frac in 0.05f64..1.0, dfrac in 0.05f64..0.95, s0 in -1.0f64..1.0, s1 in -1.0f64..1.0, s2 in 0.0f64..1.0,
    ) {
        let dist = r * frac;
        let delta = dist / 4.0 * dfrac;
        let z = 2.0 * zeta0(1, lam, lam * ratio, cs, r, dist).unwrap();
        let spec = BarrierSpec::from_offset(Point::new(0.0, 0.0), r, dist, true, delta, z).unwrap();
        let c = OperatorCoefficients::constant(s0 * cs / r, lam * ratio, s1 * cs / r, s2 * cs / delta, lam, lam * ratio, cs).unwrap();
        prop_assert!(verify_barrier(&c, &spec, 1000).unwrap().pass);
    }
}
