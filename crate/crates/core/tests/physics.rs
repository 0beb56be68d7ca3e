use nbody::validation::{cross_validate, energy_drift, system_diagnostics, ValidationCase};
use nbody::{init_system, simulate_any, AnySystem, Columns, KernelVariant, Layout, ParticleSystem, Precision, Seed, SimParams};

fn unit_pair() -> AnySystem {
    ParticleSystem::<f64>::from_soa(
        Columns {
            x: vec![0.0, 1.0],
            y: vec![0.0, 0.0],
            z: vec![0.0, 0.0],
        },
        Columns::zeros(2),
        vec![1.0, 1.0],
    )
    .unwrap()
    .into()
}

#[test]
fn momentum_stays_near_zero_from_rest() {
    let params = SimParams::default().with_steps(100);
    let start = init_system(256, Seed(42), Precision::Double, Layout::Soa).unwrap();
    let end = simulate_any(&start, &params, &KernelVariant::reference()).unwrap();
    let d = system_diagnostics(&end, &params);
    assert!(d.momentum_scale > 0.0);
    assert!(d.momentum_norm() <= 1e-9 * d.momentum_scale, "{} vs {}", d.momentum_norm(), d.momentum_scale);
}

#[test]
fn unit_pair_energy_drift_is_small() {
    let params = SimParams::default().with_dt(1e-3).with_steps(100);
    let d = energy_drift(&unit_pair(), &params, &KernelVariant::reference()).unwrap();
    assert!(d.ratio_defined);
    assert!(d.value <= 1e-4, "{:e}", d.value);
}

#[test]
fn energy_drift_shrinks_with_dt() {
    // Fixed horizon t = 0.25, well before the pair collides.
    let drifts: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let steps = (0.25f64 / dt).round() as usize;
            let params = SimParams::default().with_dt(dt).with_steps(steps);
            energy_drift(&unit_pair(), &params, &KernelVariant::reference()).unwrap().value
        })
        .collect();
    assert!(drifts[1] <= drifts[0] && drifts[2] <= drifts[1], "{drifts:?}");
}

#[test]
fn single_body_has_zero_drift() {
    let sys: AnySystem = ParticleSystem::<f64>::from_soa(
        Columns {
            x: vec![0.3],
            y: vec![0.1],
            z: vec![0.2],
        },
        Columns::zeros(1),
        vec![2.0],
    )
    .unwrap()
    .into();
    let d = energy_drift(&sys, &SimParams::default().with_steps(10), &KernelVariant::reference()).unwrap();
    assert_eq!(d.value, 0.0);
    assert!(!d.ratio_defined);
}

#[test]
fn self_comparison_passes_with_zero_deviation() {
    let case = ValidationCase::new(KernelVariant::reference(), Precision::Double);
    let report = cross_validate(128, 5, Seed(42), &SimParams::default(), &[case]).unwrap();
    assert!(report.passed());
    assert_eq!(report.cases[0].checksum_deviation, 0.0);
}

#[test]
fn blocked_variants_track_unblocked() {
    let cases: Vec<ValidationCase> = [8, 64, 256]
        .into_iter()
        .flat_map(|b| {
            Precision::ALL.map(move |p| ValidationCase::new(KernelVariant::reference().with_block(Some(b)), p))
        })
        .collect();
    let report = cross_validate(512, 5, Seed(11), &SimParams::default(), &cases).unwrap();
    assert!(report.passed(), "{}", report.render());
}
