use std::f64::consts::PI;

use nanospin::asymptotics::{poisson_theta, Side};
use nanospin::geometry::{forward_observables, shape_integral};
use nanospin::lineshape::fid;
use nanospin::noise::t_squared;
use nanospin::spectral_cg::p1_via_cg;
use nanospin::{
    coupling_g, invert_measurement, p1_noise_analytic, CavityGeometry, ExactPolarization, GasSpec, NoiseModel,
};
use proptest::prelude::*;

fn period(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        PI
    } else {
        2.0 * PI
    }
}

proptest! {
    #[test]
    fn p1_is_periodic(n in 2usize..2000, tau in -50.0f64..50.0) {
        let exact = ExactPolarization::new(n).unwrap();
        prop_assert!((exact.p1(tau + period(n)) - exact.p1(tau)).abs() < 1e-12);
    }

    #[test]
    fn p1_reflection_symmetry(n in 2usize..2000, x in 0.0f64..PI) {
        let exact = ExactPolarization::new(n).unwrap();
        if n % 2 == 1 {
            let p = exact.time_average();
            let defect = exact.p1(PI / 2.0 + x) - p + exact.p1(PI / 2.0 - x) - p;
            prop_assert!(defect.abs() < 1e-12);
        } else {
            prop_assert!((exact.p1(PI + x) - exact.p1(PI - x)).abs() < 1e-12);
        }
        prop_assert!((exact.p1(x) - exact.p1(-x)).abs() < 1e-12);
    }

    #[test]
    fn polarization_is_conserved(n in 2usize..5000, tau in 0.0f64..7.0) {
        let exact = ExactPolarization::new(n).unwrap();
        let total = exact.p1(tau) + (n - 1) as f64 * exact.p_other(tau);
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(exact.p1(tau).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn cg_route_matches_closed_form(n in 2usize..16, tau in 0.0f64..7.0) {
        let closed = ExactPolarization::new(n).unwrap().p1(tau);
        prop_assert!((p1_via_cg(n, tau).unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn damping_never_amplifies(n in 2usize..300, tau in 0.0f64..7.0, s in 0.0f64..10.0) {
        let exact = ExactPolarization::new(n).unwrap();
        let p = exact.time_average();
        let damped = exact.p1_damped(tau, s) - p;
        let bound: f64 = exact.oscillations().iter().map(|o| o.weight.abs()).sum();
        prop_assert!(damped.abs() <= bound + 1e-12);
    }

    #[test]
    fn t_squared_bounds(t in 0.0f64..1e4, t_c in 1e-3f64..1e3, dt in 0.0f64..10.0) {
        let model = NoiseModel::exponential(1.0, 1.0, t_c).unwrap();
        let a = t_squared(t, &model).unwrap();
        prop_assert!(t_squared(t + dt, &model).unwrap() >= a);
        prop_assert!(a <= 0.5 * t * t * (1.0 + 1e-12));
        prop_assert!(a <= t_c * t * (1.0 + 1e-12));
    }

    #[test]
    fn noiseless_average_is_exact(n in 2usize..400, t in 0.0f64..100.0) {
        let model = NoiseModel::exponential(1.0, 0.0, 1.0).unwrap();
        let exact = ExactPolarization::new(n).unwrap().p1(t / 2.0);
        prop_assert!((p1_noise_analytic(n, t, &model).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn theta_identity(eps in 0.0f64..1.0, log_a in -3.0f64..3.0) {
        let a = 10f64.powf(log_a);
        let l = poisson_theta(eps, a, Side::Left).unwrap();
        let r = poisson_theta(eps, a, Side::Right).unwrap();
        prop_assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));
    }

    #[test]
    fn shape_integral_decreases_in_b_over_a(log_r in -4.0f64..4.0, step in 1e-3f64..1.0) {
        // a/b = 10^{-log_r}: larger log_r means larger b/a
        let lo = shape_integral(10f64.powf(-log_r)).unwrap();
        let hi = shape_integral(10f64.powf(-(log_r + step))).unwrap();
        prop_assert!(hi < lo);
        prop_assert!(lo > -4.0 / 3.0 && lo <= 2.0 / 3.0);
    }

    #[test]
    fn inversion_round_trip(log_v in 2.0f64..4.0, log_aspect in -1.5f64..1.5, alpha in 0.0f64..0.9, n in 50usize..5000) {
        let aspect = 10f64.powf(log_aspect);
        prop_assume!((aspect - 1.0).abs() > 1e-3);
        let volume = 10f64.powf(log_v);
        let geom = CavityGeometry::from_volume(volume, aspect, alpha).unwrap();
        let gamma = nanospin::geometry::PROTON_GAMMA;
        let gas = GasSpec::filling(&geom, gamma, n).unwrap();
        let g = coupling_g(&geom, &gas);
        let (period_t, width_t) = forward_observables(g, n);
        let inv = invert_measurement(period_t, width_t, gas.concentration, alpha, gamma).unwrap();
        prop_assert!((inv.volume / volume - 1.0).abs() < 1e-9);
        let recovered = if g.signum() == inv.coupling_sign { inv.aspect } else { inv.mirror_aspect.unwrap() };
        prop_assert!((recovered / aspect - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fid_is_bounded_and_even(n in 2usize..500, t in 0.0f64..20.0) {
        let f = fid(t, n, 1.0, Some(3.0)).unwrap();
        prop_assert!(f.abs() <= 1.0);
        prop_assert_eq!(f, fid(-t, n, 1.0, Some(3.0)).unwrap());
    }
}
