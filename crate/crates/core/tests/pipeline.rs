use nonrecip::atomdata::{AtomSpecies, EnsembleConfig};
use nonrecip::doppler::{rho55_avg, Direction, Geometry, InvalidClassPolicy, QuadratureScheme, QuadratureSpec};
use nonrecip::error::Error;
use nonrecip::reduced::{DriveConfig, Rho55Form};
use nonrecip::scenario::{four_photon_locked_delta_c2, light_shift_locked_delta_c2, run_sweep, Scenario};

fn drive(delta_p: f64) -> DriveConfig {
    DriveConfig {
        omega_p: 0.1e6,
        omega_a: 50e6,
        omega_c1: 50e6,
        omega_c2: 50e6,
        delta_p,
        delta_a: 1000e6,
        delta_c1: 1000e6,
        delta_c2: -1002.5e6,
        gamma_l: 0.05e6,
        gamma_21: 2e3,
        validity_ratio: 10.0,
    }
}

fn scenario(delta_p: f64, temperature: f64, quadrature: QuadratureSpec) -> Scenario {
    Scenario {
        species: AtomSpecies::rb87(),
        drive: drive(delta_p),
        ensemble: EnsembleConfig { temperature, density: 2e18, length: 0.01 },
        theta_deg: 180.0,
        quadrature,
        form: Rho55Form::Derived,
    }
}

#[test]
fn doubling_nodes_is_stable_at_peak_isolation() {
    let base = scenario(-999.6e6, 300.0, QuadratureSpec::default());
    let fine = scenario(-999.6e6, 300.0, QuadratureSpec { nodes: 40001, ..QuadratureSpec::default() });
    let a = base.evaluate(0.0).unwrap().record;
    let b = fine.evaluate(0.0).unwrap().record;
    for (x, y) in [(a.alpha_fwd, b.alpha_fwd), (a.alpha_bwd, b.alpha_bwd), (a.ir_db, b.ir_db)] {
        assert!((x - y).abs() <= 1e-6 * y.abs(), "{x} vs {y}");
    }
}

#[test]
fn adaptive_rule_agrees_with_converged_trapezoid() {
    let dense = QuadratureSpec { nodes: 160001, ..QuadratureSpec::default() };
    let adaptive = QuadratureSpec { scheme: QuadratureScheme::Adaptive, tolerance: 1e-8, ..QuadratureSpec::default() };
    for dp in [-1010e6, -999.6e6, -997.5e6] {
        let a = scenario(dp, 300.0, dense).evaluate(dp).unwrap();
        let b = scenario(dp, 300.0, adaptive).evaluate(dp).unwrap();
        for (x, y) in [(a.record.alpha_fwd, b.record.alpha_fwd), (a.record.alpha_bwd, b.record.alpha_bwd)] {
            assert!((x - y).abs() <= 1e-8 * y.abs(), "Δp = {dp}: {x} vs {y}");
        }
        assert!(b.backward.error <= 1e-8 * b.backward.value.abs() * 1.0001);
    }
}

#[test]
fn cold_ensemble_is_reciprocal() {
    let records: Vec<_> = [-1100e6, -1002e6, -1000e6, -998.7e6, -900e6]
        .iter()
        .map(|&dp| scenario(dp, 1e-6, QuadratureSpec::default()).evaluate(dp).unwrap().record)
        .collect();
    let scale = records.iter().map(|r| r.alpha_fwd.max(r.alpha_bwd)).fold(0.0, f64::max);
    for r in &records {
        assert!((r.alpha_fwd - r.alpha_bwd).abs() <= 1e-4 * scale, "Δp = {}: {} vs {}", r.x, r.alpha_fwd, r.alpha_bwd);
    }
}

#[test]
fn hot_ensemble_excludes_probe_resonant_classes() {
    let quad = QuadratureSpec::default();
    let sc = scenario(-1000e6, 300.0, quad);
    let ev = sc.evaluate(0.0).unwrap();
    assert!(ev.forward.excluded_weight > 0.0 && ev.forward.excluded_weight < 0.05);
    assert!(ev.backward.excluded_weight > 0.0 && ev.backward.excluded_weight < 0.05);

    let strict = QuadratureSpec { invalid_classes: InvalidClassPolicy::Error, ..quad };
    let geom = Geometry::new(Direction::Forward, 180.0).unwrap();
    let err = rho55_avg(&geom, &sc.drive, &sc.species, &sc.ensemble, &strict).unwrap_err();
    match err {
        Error::Singularity { velocity: Some(v), .. } => assert!(v.abs() > 100.0, "{v}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn resonant_zero_velocity_class_is_rejected() {
    let sc = scenario(-10e6, 300.0, QuadratureSpec::default());
    assert!(matches!(sc.evaluate(0.0), Err(Error::Domain(_))));
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let points: Vec<(f64, Scenario)> = (0..24)
        .map(|i| {
            let dp = -1006e6 + 0.5e6 * i as f64;
            (dp, scenario(dp, 300.0, QuadratureSpec { nodes: 8001, ..QuadratureSpec::default() }))
        })
        .collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_sweep(&points).unwrap())
    };
    let one = run(1);
    let many = run(7);
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(a.record.alpha_fwd.to_bits(), b.record.alpha_fwd.to_bits());
        assert_eq!(a.record.alpha_bwd.to_bits(), b.record.alpha_bwd.to_bits());
    }
}

#[test]
fn locked_coupling_detuning_centres_the_dip() {
    let mut d = drive(-1000e6);
    d.omega_c1 = 40e6;
    d.omega_c2 = 40e6;
    d.delta_c2 = four_photon_locked_delta_c2(&d);
    let pt = nonrecip::reduced::reduce(&d, &AtomSpecies::rb87(), &Default::default()).unwrap();
    assert!(pt.delta_12e.abs() < 1.0);

    let mut d = drive(-1000e6);
    d.delta_c2 = light_shift_locked_delta_c2(&d).unwrap();
    let pt = nonrecip::reduced::reduce(&d, &AtomSpecies::rb87(), &Default::default()).unwrap();
    assert!((pt.delta_12e - pt.delta_15e).abs() < 1.0);
}

fn at_rest_deviation(ratio: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for i in 0..=800 {
        let mut sc = scenario(0.0, 300.0, QuadratureSpec::default());
        sc.drive.delta_a = ratio * 50e6;
        sc.drive.delta_c1 = ratio * 50e6;
        sc.drive.delta_c2 = light_shift_locked_delta_c2(&sc.drive).unwrap();
        sc.drive.delta_p = -sc.drive.delta_a - 20e6 + 0.05e6 * i as f64;
        let reduced = sc.alpha_at_rest_reduced().unwrap();
        let full = sc.alpha_at_rest_full().unwrap();
        worst = worst.max((reduced - full).abs());
        peak = peak.max(full);
    }
    worst / peak
}

#[test]
fn reduction_improves_with_detuning_ratio() {
    let loose = at_rest_deviation(20.0);
    let tight = at_rest_deviation(100.0);
    assert!(tight < loose, "{tight} vs {loose}");
    assert!(tight < 0.05, "{tight}");
}
