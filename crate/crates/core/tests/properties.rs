use approx::assert_relative_eq;
use proptest::prelude::*;

use nonrecip::atomdata::{most_probable_speed, AtomSpecies, EnsembleConfig};
use nonrecip::doppler::{maxwell_density, rho55_avg, shifts_for, Direction, Geometry, QuadratureSpec};
use nonrecip::observables::{absorption, bandwidth, insertion_loss_from_alpha, Record};
use nonrecip::quadrature::{trapezoid, Interval};
use nonrecip::reduced::{reduced_steady_state_numeric, rho55_closed_form, DriveConfig, ReducedPoint};
use nonrecip::tradeoff::{tradeoff_search, Bound, Merit, SearchOptions};

fn weak_point(omega_ce: f64, ratio: f64, d12e: f64, d15e: f64, gamma_l: f64) -> ReducedPoint {
    let rb = AtomSpecies::rb87();
    let (eta53, eta54) = rb.eta();
    let (g51, g52) = rb.effective_decays();
    ReducedPoint {
        omega_pe: ratio * omega_ce,
        omega_ce,
        delta_2d: 0.0,
        delta_5d: 0.0,
        delta_12: d12e,
        delta_15: d15e,
        delta_12e: d12e,
        delta_15e: d15e,
        gamma_big: g51,
        gamma: 0.5 * (g51 + g52) + gamma_l,
        eta53,
        eta54,
        gamma51: g51,
        gamma52: g52,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_matches_reduced_steady_state(
        omega_ce in 0.2e6..3.0e6f64,
        ratio in 1e-5..1e-3f64,
        d12e in -2.4e6..2.4e6f64,
        d15e in -2.4e6..2.4e6f64,
        gamma_l in 0.0..0.1e6f64,
    ) {
        prop_assume!(d12e.abs() > 1e3);
        let pt = weak_point(omega_ce, ratio, d12e, d15e, gamma_l);
        let closed = rho55_closed_form(&pt).unwrap();
        let rho = reduced_steady_state_numeric(&pt, 0.0).unwrap();
        let numeric = rho.get(5, 5).re;
        prop_assert!((closed - numeric).abs() <= 1e-3 * numeric.abs(), "closed {closed:e} numeric {numeric:e}");
    }

    #[test]
    fn reduced_steady_state_is_hermitian_and_normalized(
        omega_ce in 0.2e6..10.0e6f64,
        ratio in 1e-4..0.5f64,
        d12e in -5e6..5e6f64,
        d15e in -5e6..5e6f64,
        gamma_21 in 0.0..1e4f64,
    ) {
        let pt = weak_point(omega_ce, ratio, d12e, d15e, 0.05e6);
        let rho = reduced_steady_state_numeric(&pt, gamma_21).unwrap();
        prop_assert!(rho.hermiticity_error() <= 1e-10);
        prop_assert!((rho.weighted_trace(pt.eta53, pt.eta54) - 1.0).abs() <= 1e-10);
        for k in [1, 2, 5] {
            let p = rho.get(k, k).re;
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn velocity_shifts_follow_sign_table(v in -1200.0..1200.0f64, theta in 90.5..180.0f64, forward in any::<bool>()) {
        let rb = AtomSpecies::rb87();
        let dir = if forward { Direction::Forward } else { Direction::Backward };
        let s = shifts_for(&Geometry::new(dir, theta).unwrap(), &rb, v).unwrap();
        let c = (180.0 - theta).to_radians().cos();
        let (kp, ka, kc1, kc2) = (1.0 / 795.0e-9, c / 728.7e-9, 1.0 / 795.0e-9, c / 728.7e-9);
        let expected = if forward {
            [kp * v, -ka * v, kc1 * v, -kc2 * v]
        } else {
            [-kp * v, ka * v, kc1 * v, -kc2 * v]
        };
        for (got, want) in [s.p, s.a, s.c1, s.c2].into_iter().zip(expected) {
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn forward_four_photon_detuning_is_velocity_independent(v in -2000.0..2000.0f64) {
        let rb = AtomSpecies::rb87();
        let s = shifts_for(&Geometry::new(Direction::Forward, 180.0).unwrap(), &rb, v).unwrap();
        let four_photon = s.p + s.a - s.c1 - s.c2;
        prop_assert!(four_photon.abs() <= 1e-9 * (s.p.abs() + 1.0));
    }

    #[test]
    fn isolation_ratio_is_the_scaled_absorption_difference(af in 0.0..2000.0f64, ab in 0.0..2000.0f64, l in 1e-3..0.05f64) {
        let r = Record::from_alphas(0.0, af, ab, l);
        let direct = (ab - af) * l * 10.0 / std::f64::consts::LN_10;
        prop_assert!((r.ir_db - direct).abs() <= 1e-9 * direct.abs().max(1e-300));
        prop_assert!((r.il_db - insertion_loss_from_alpha(af, l)).abs() == 0.0);
    }

    #[test]
    fn insertion_loss_is_monotone(a in 0.0..1000.0f64, d in 1e-6..10.0f64) {
        prop_assert!(insertion_loss_from_alpha(a, 0.01) < insertion_loss_from_alpha(a + d, 0.01));
    }

    #[test]
    fn bandwidth_survives_resampling(shift in -0.3..0.3f64, height in 21.0..40.0f64) {
        // Smooth resonance in IR; IL rises linearly.
        let ir = |x: f64| height / (1.0 + (x - shift).powi(2));
        let il = |x: f64| 0.2 + 0.1 * x.abs();
        let coarse: Vec<Record> = (0..=200).map(|i| rec(-5.0 + 0.05 * i as f64, ir, il)).collect();
        let fine: Vec<Record> = (0..=400).map(|i| rec(-5.0 + 0.025 * i as f64, ir, il)).collect();
        let a = bandwidth(&coarse, 20.0, 1.0);
        let b = bandwidth(&fine, 20.0, 1.0);
        prop_assert!((a.total_width - b.total_width).abs() <= 0.05);
    }

    #[test]
    fn tradeoff_result_respects_loss_ceiling(il_max in 0.2..2.0f64, slope in 0.5..3.0f64) {
        let eval = |x: &[f64]| Ok(Merit { ir_db: 10.0 + 20.0 * x[0] - 5.0 * x[1], il_db: slope * x[0] + 0.1 * x[1] });
        let bounds = [Bound::new("a", 0.0, 1.0, 1e-4), Bound::new("b", 0.0, 1.0, 1e-4)];
        let opts = SearchOptions { il_max, ..SearchOptions::default() };
        let r = tradeoff_search(&bounds, &opts, eval).unwrap();
        prop_assert!(r.feasible);
        prop_assert!(r.merit.il_db <= il_max);
    }
}

fn rec(x: f64, ir: impl Fn(f64) -> f64, il: impl Fn(f64) -> f64) -> Record {
    Record { x, alpha_fwd: 0.0, alpha_bwd: 0.0, t_fwd: 1.0, t_bwd: 1.0, ir_db: ir(x), il_db: il(x) }
}

#[test]
fn maxwell_density_is_normalized_over_five_speeds() {
    let rb = AtomSpecies::rb87();
    for t in [1e-3, 10.0, 300.0] {
        let vp = most_probable_speed(&rb, t).unwrap();
        let whole = [Interval { lo: -5.0 * vp, hi: 5.0 * vp }];
        let r = trapezoid(|v| Ok(maxwell_density(v, vp)), -5.0 * vp, 5.0 * vp, 20001, &whole).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "T = {t}: {}", r.value);
    }
}

fn fig3_drive(omega_p: f64) -> DriveConfig {
    DriveConfig {
        omega_p,
        omega_a: 50e6,
        omega_c1: 50e6,
        omega_c2: 50e6,
        delta_p: -1000e6 + 0.4e6,
        delta_a: 1000e6,
        delta_c1: 1000e6,
        delta_c2: -1002.5e6,
        gamma_l: 0.05e6,
        gamma_21: 2e3,
        validity_ratio: 10.0,
    }
}

#[test]
fn absorption_is_independent_of_weak_probe() {
    let rb = AtomSpecies::rb87();
    let ens = EnsembleConfig { temperature: 300.0, density: 2e18, length: 0.01 };
    let quad = QuadratureSpec { nodes: 4001, ..QuadratureSpec::default() };
    for dir in [Direction::Forward, Direction::Backward] {
        let geom = Geometry::new(dir, 180.0).unwrap();
        let alphas: Vec<f64> = [0.05e6, 0.1e6, 0.2e6]
            .iter()
            .map(|&op| {
                let avg = rho55_avg(&geom, &fig3_drive(op), &rb, &ens, &quad).unwrap();
                absorption(avg.value, op, &rb, ens.density).unwrap()
            })
            .collect();
        assert_relative_eq!(alphas[0], alphas[1], max_relative = 1e-6);
        assert_relative_eq!(alphas[2], alphas[1], max_relative = 1e-6);
    }
}
