use std::sync::Arc;

use farfield_core::diagnostics::{energy_functional, entropy_field, farfield_growth_check, kelvin_diag};
use farfield_core::grid::{build_grid, Stretching};
use farfield_core::profiles::GasConstants;
use farfield_core::solver::{step, SimState, SolverConfig};
use proptest::prelude::*;

fn state(
    a: f64,
    b: f64,
    n: usize,
    stretching: Stretching,
    rho: impl Fn(f64) -> f64,
    v: impl Fn(f64) -> f64,
    th: impl Fn(f64) -> f64,
) -> SimState<f64> {
    let g = Arc::new(build_grid(a, b, n, stretching).unwrap());
    let ys = g.nodes().to_vec();
    let mut s = SimState::new(
        g,
        ys.iter().map(|&y| rho(y)).collect(),
        ys.iter().map(|&y| v(y)).collect(),
        vec![0.0; ys.len()],
    )
    .unwrap();
    s.theta = ys.iter().map(|&y| th(y)).collect();
    s
}

fn smooth(n: usize, stretching: Stretching) -> SimState<f64> {
    state(
        -10.0,
        10.0,
        n,
        stretching,
        |y| (1.0 + y * y).powi(-2),
        |y| y * (-y * y).exp(),
        |y| (-y * y).exp(),
    )
}

#[test]
fn energy_examples() {
    let gas = GasConstants::default();
    let s = state(0.0, 1.0, 8, Stretching::Uniform, |_| 1.0, |_| 0.0, |_| 0.0);
    assert_eq!(energy_functional(&s, &gas), 0.0);
    let s = state(0.0, 1.0, 8, Stretching::Uniform, |_| 1.0, |_| 2.0, |_| 3.0);
    assert!((energy_functional(&s, &gas) - 5.0).abs() < 1e-14);
}

#[test]
fn energy_quadrature_is_second_order() {
    let gas = GasConstants::default();
    let stretch = Stretching::Sinh { scale: 3.0 };
    let reference = energy_functional(&smooth(64 * 16, stretch), &gas);
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| (energy_functional(&smooth(n, stretch), &gas) - reference).abs())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] > 0.0 && (w[0] / w[1]).log2() >= 2.0 - 0.1, "{errs:?}");
    }
}

#[test]
fn kelvin_slope_vanishes_for_quadratic_decay() {
    let gas = GasConstants::default();
    let s = state(
        -2000.0,
        2000.0,
        4000,
        Stretching::Uniform,
        |_| 1.0,
        |_| 0.0,
        |yy| 1.0 / (1.0 + yy * yy),
    );
    let mut last = f64::INFINITY;
    for y_fit in [0.2, 0.05, 0.01, 0.002] {
        let k = kelvin_diag(&s, &gas, y_fit).unwrap();
        // symbolic h(y) = y³/(1 + y²) at the same sample abscissae
        let (sxy, sxx) = k
            .h_samples
            .iter()
            .fold((0.0, 0.0), |(a, b), &(y, _)| (a + y * y.powi(3) / (1.0 + y * y), b + y * y));
        assert!(
            (k.slope0 - sxy / sxx).abs() <= 1e-12 * (sxy / sxx).abs().max(1e-300),
            "{} vs {}",
            k.slope0,
            sxy / sxx
        );
        assert!(k.slope0 > 0.0 && k.slope0 < last);
        last = k.slope0;
    }
    assert!(last < 1e-5);
}

#[test]
fn growth_envelope_holds_after_100_steps() {
    let gas = GasConstants::default();
    let mut s = state(
        -20.0,
        20.0,
        400,
        Stretching::Uniform,
        |y| (1.0 + y * y).powi(-2),
        |y| y * (-y * y).exp(),
        |y| (-y * y).exp(),
    );
    s.theta[0] = 0.0;
    *s.theta.last_mut().unwrap() = 0.0;
    let cfg = SolverConfig::new(1e-3, gas);
    for _ in 0..100 {
        s = step(&s, &cfg, 1e-3).unwrap().0;
    }
    let g = farfield_growth_check(&s);
    // envelope recomputed with an independent trapezoid and difference quotient
    let ys = s.grid.nodes();
    let mut l2 = 0.0;
    let mut dl2 = 0.0;
    for i in 0..ys.len() - 1 {
        let h = ys[i + 1] - ys[i];
        l2 += 0.5 * h * (s.rho0[i] * s.theta[i].powi(2) + s.rho0[i + 1] * s.theta[i + 1].powi(2));
        dl2 += (s.theta[i + 1] - s.theta[i]).powi(2) / h;
    }
    let mut ratio: f64 = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let env = l2.sqrt() / g.delta0.sqrt() + (y.abs() + 1.0).sqrt() * dl2.sqrt();
        assert!((env - g.envelope[i]).abs() <= 1e-12 * env);
        ratio = ratio.max(s.theta[i] / env);
    }
    assert!((ratio - g.max_ratio).abs() <= 1e-12);
    assert!(g.max_ratio <= 1.05, "{}", g.max_ratio);
}

proptest! {
    #[test]
    fn multiplying_theta_by_e_adds_c_v(c_v in 0.2f64..5.0, r in 0.2f64..5.0, amp in 0.1f64..10.0) {
        let gas = GasConstants::new(1.0, 1.0, r, c_v, 1.0).unwrap();
        let s = state(-3.0, 3.0, 32, Stretching::Uniform, |y| 1.0 / (1.0 + y * y), |_| 0.0, |y| amp * (-y * y).exp());
        let mut se = s.clone();
        se.theta.iter_mut().for_each(|t| *t *= std::f64::consts::E);
        let a = entropy_field(&s, &gas, 1e-12);
        let b = entropy_field(&se, &gas, 1e-12);
        for (i, v) in a.masked() {
            prop_assert!((b.s[i] - v - c_v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn isentropic_state_has_zero_entropy(ell in 0.5f64..6.0, r in 0.2f64..3.0, c_v in 0.2f64..3.0) {
        let gas = GasConstants::new(1.0, 1.0, r, c_v, 1.0).unwrap();
        let gm1 = r / c_v;
        let rho = move |y: f64| (1.0 + y * y).powf(-ell / 2.0);
        let s = state(-5.0, 5.0, 40, Stretching::Uniform, rho, |_| 0.0, move |y| rho(y).powf(gm1) / r);
        for (_, v) in entropy_field(&s, &gas, 1e-300).masked() {
            prop_assert!(v.abs() < 1e-12);
        }
    }
}
