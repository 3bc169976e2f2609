use std::f64::consts::PI;

use noonbloch_core::correlation::{
    coincidence_trace, correlation_matrix, detection_probability, oscillation_period,
};
use noonbloch_core::propagator::{green_amplitude, transfer_matrix};
use noonbloch_core::state::build_noon;
use noonbloch_core::{LatticeParams, LatticeWindow, ZGrid};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = LatticeParams> {
    (0.3f64..2.0, 0.2f64..2.0).prop_map(|(c, b)| LatticeParams::new(c, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn revival_after_whole_periods(p in params(), k in 1u32..4) {
        let lam = p.bloch_period().unwrap();
        let window = LatticeWindow::new(8).unwrap();
        let u = transfer_matrix(&p, k as f64 * lam, &window).unwrap();
        prop_assert!(u.identity_deviation() < 1e-10);
    }

    #[test]
    fn columns_stay_orthonormal(p in params(), frac in 0.0f64..1.0) {
        let z = frac * p.bloch_period().unwrap();
        let window = LatticeWindow::minimal_for(&[0], 2 * p.required_margin(z));
        let u = transfer_matrix(&p, z, &window).unwrap();
        let m = p.required_margin(z) as i64 / 2;
        prop_assert!(u.unitarity_defect(-m..=m) < 1e-10);
    }

    #[test]
    fn amplitude_moduli_have_bessel_parity(p in params(), z in 0.0f64..20.0, mu in -12i64..12, nu in -12i64..12) {
        let a = green_amplitude(&p, z, mu, nu).unwrap().norm();
        let b = green_amplitude(&p, z, nu, mu).unwrap().norm();
        prop_assert!((a - b).abs() <= 1e-15 * a.max(1.0));
    }

    #[test]
    fn swapping_split_and_sites(p in params(), n in 1u32..7, split in 0u32..7, z in 0.0f64..15.0,
                                mu in -10i64..10, nu in -10i64..10, phi in -PI..PI) {
        let split = split.min(n);
        let s = build_noon(n, 0, 1, phi).unwrap();
        let a = detection_probability(&s, &p, z, split, mu, nu).unwrap();
        let b = detection_probability(&s, &p, z, n - split, nu, mu).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn balanced_matrix_is_symmetric(p in params(), half in 1u32..4, z in 0.0f64..15.0, phi in -PI..PI) {
        let s = build_noon(2 * half, 0, 1, phi).unwrap();
        let w = LatticeWindow::new(10).unwrap();
        let m = correlation_matrix(&s, &p, z, half, &w).unwrap();
        for mu in w.sites() {
            for nu in w.sites() {
                prop_assert_eq!(m.get(mu, nu), m.get(nu, mu));
            }
        }
    }

    #[test]
    fn correlation_repeats_each_period_for_even_phase_winding(
        p in params(), n in 1u32..6, sep in 1i64..3, z in 0.0f64..10.0,
        mu in -8i64..8, nu in -8i64..8, phi in -PI..PI,
    ) {
        prop_assume!((n as i64 * sep) % 2 == 0);
        let s = build_noon(n, 0, sep, phi).unwrap();
        let lam = p.bloch_period().unwrap();
        for split in 0..=n {
            let a = detection_probability(&s, &p, z, split, mu, nu).unwrap();
            let b = detection_probability(&s, &p, z + lam, split, mu, nu).unwrap();
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

/// γ itself is λ_B-periodic even when N·Δ is odd.
#[test]
fn gamma_trace_repeats_each_period() {
    let p = LatticeParams::new(1.0, 0.4).unwrap();
    let lam = p.bloch_period().unwrap();
    let w = LatticeWindow::new(25).unwrap();
    for (n, sep) in [(1u32, 1i64), (3, 1), (2, 1), (3, 2)] {
        let s = build_noon(n, 0, sep, 0.3).unwrap();
        let first = coincidence_trace(&s, &p, n / 2, &ZGrid::new(0.0, lam, 129).unwrap(), &w).unwrap();
        let second = coincidence_trace(&s, &p, n / 2, &ZGrid::new(lam, 2.0 * lam, 129).unwrap(), &w).unwrap();
        for (a, b) in first.points.iter().zip(&second.points) {
            assert_eq!(a.degenerate, b.degenerate);
            if let (Some(x), Some(y)) = (a.gamma, b.gamma) {
                assert!((x - y).abs() < 1e-9, "N={n} Δ={sep} z={}: {x} vs {y}", a.z);
            }
        }
    }
}

#[test]
fn period_does_not_depend_on_phase() {
    let p = LatticeParams::new(1.0, 4.0 / 15.0).unwrap();
    let lam = p.bloch_period().unwrap();
    let grid = ZGrid::new(0.0, 2.0 * lam, 512).unwrap();
    let w = LatticeWindow::new(30).unwrap();
    let periods: Vec<f64> = [0.0, PI / 2.0, PI]
        .iter()
        .map(|&phi| {
            let s = build_noon(2, 0, 1, phi).unwrap();
            oscillation_period(&coincidence_trace(&s, &p, 1, &grid, &w).unwrap())
                .unwrap()
                .period
        })
        .collect();
    for t in &periods {
        assert!((t - periods[0]).abs() <= grid.step(), "{periods:?}");
        assert!((t / lam - 1.0).abs() < 0.01);
    }
}
