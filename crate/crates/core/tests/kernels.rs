use nbody::kernels::MathForm;
use nbody::validation::{oracle_simulate, OracleState};
use nbody::{
    compute_accelerations, init_system, reference_accelerations, simulate_any, AccelerationBuffer, AnySystem, Columns,
    KernelVariant, Layout, ParticleSystem, Precision, Seed, SimParams,
};

/// Reference variant checksum after 10 steps, N = 256, seed 42, double.
const GOLDEN_REFERENCE_256: f64 = 382.17486805124184;
/// Same run in an independent numpy transcription (different summation order).
const NUMPY_REFERENCE_256: f64 = 382.1748680512412;

fn ulp_distance(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

fn double(sys: &AnySystem) -> &ParticleSystem<f64> {
    match sys {
        AnySystem::Double(s) => s,
        AnySystem::Single(_) => panic!("expected double"),
    }
}

#[test]
fn oracle_and_reference_kernel_agree_to_one_ulp() {
    let params = SimParams::default();
    for n in [1, 2, 3, 7, 8, 9, 17, 33, 64] {
        let sys = init_system(n, Seed(42), Precision::Double, Layout::Soa).unwrap();
        let oracle = reference_accelerations(&OracleState::from_system(&sys), &params);
        let mut acc = AccelerationBuffer::new(n);
        compute_accelerations(double(&sys), &params, &KernelVariant::reference(), &mut acc).unwrap();
        for (i, o) in oracle.iter().enumerate() {
            let a = acc.get(i);
            for c in 0..3 {
                assert!(ulp_distance(a[c], o[c]) <= 1, "n={n} body {i} component {c}: {} vs {}", a[c], o[c]);
            }
        }
    }
}

#[test]
fn oracle_unit_square_corner() {
    let state = OracleState {
        positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        velocities: vec![[0.0; 3]; 4],
        masses: vec![1.0; 4],
    };
    let params = SimParams::default().with_softening_sq(0.0);
    let a = reference_accelerations(&state, &params)[0];
    let expected = 1.0 + 2.0f64.powf(-1.5);
    assert!((a[0] - expected).abs() < 1e-15);
    assert!((a[1] - expected).abs() < 1e-15);
    assert_eq!(a[2], 0.0);
}

#[test]
fn golden_reference_checksum() {
    let sys = init_system(256, Seed(42), Precision::Double, Layout::Soa).unwrap();
    let params = SimParams::default().with_steps(10);
    let end = simulate_any(&sys, &params, &KernelVariant::reference()).unwrap();
    assert_eq!(end.checksum().to_bits(), GOLDEN_REFERENCE_256.to_bits());
    assert!((end.checksum() - NUMPY_REFERENCE_256).abs() / NUMPY_REFERENCE_256 < 1e-12);

    let oracle = oracle_simulate(&OracleState::from_system(&sys), &params);
    assert!((oracle.checksum() - GOLDEN_REFERENCE_256).abs() / GOLDEN_REFERENCE_256 < 1e-12);
}

#[test]
fn math_forms_agree_in_double() {
    let params = SimParams::default().with_steps(10);
    let sys = init_system(512, Seed(7), Precision::Double, Layout::Soa).unwrap();
    let pow = simulate_any(&sys, &params, &KernelVariant::soa(MathForm::PowThenDivide)).unwrap();
    let recip = simulate_any(&sys, &params, &KernelVariant::soa(MathForm::ReciprocalMultiply)).unwrap();
    let dev = (pow.checksum() - recip.checksum()).abs() / pow.checksum().abs();
    assert!(dev < 1e-12, "{dev:e}");
}

#[test]
fn layouts_blocks_and_threads_are_bitwise_identical() {
    let params = SimParams::default().with_steps(3);
    for precision in Precision::ALL {
        let soa = init_system(300, Seed(3), precision, Layout::Soa).unwrap();
        let base = simulate_any(&soa, &params, &KernelVariant::reference()).unwrap();
        let aos = simulate_any(&soa.to_layout(Layout::Aos), &params, &KernelVariant::aos()).unwrap();
        assert!(aos.to_layout(Layout::Soa).bitwise_eq(&base));
        for block in [Some(8), Some(64), Some(256), None] {
            for threads in [1, 2, 3, 4, 7] {
                let v = KernelVariant::reference().with_block(block).with_threads(threads);
                let out = simulate_any(&soa, &params, &v).unwrap();
                assert!(out.bitwise_eq(&base), "{} T={threads} {precision}", v.label());
            }
        }
    }
}

#[test]
fn more_threads_than_bodies() {
    let params = SimParams::default().with_steps(2);
    let sys = init_system(3, Seed(1), Precision::Double, Layout::Soa).unwrap();
    let base = simulate_any(&sys, &params, &KernelVariant::reference()).unwrap();
    let wide = simulate_any(&sys, &params, &KernelVariant::reference().with_threads(8)).unwrap();
    assert!(wide.bitwise_eq(&base));
}

#[test]
fn block_larger_than_n_is_rejected() {
    let params = SimParams::default().with_steps(1);
    let sys = init_system(16, Seed(1), Precision::Double, Layout::Soa).unwrap();
    let v = KernelVariant::reference().with_block(Some(64));
    assert!(simulate_any(&sys, &params, &v).is_err());
}

#[test]
fn steps_one_is_one_pass() {
    let sys = init_system(40, Seed(5), Precision::Double, Layout::Soa).unwrap();
    let params = SimParams::default().with_steps(1);
    let once = simulate_any(&sys, &params, &KernelVariant::reference()).unwrap();

    let mut acc = AccelerationBuffer::new(40);
    let s = double(&sys);
    compute_accelerations(s, &params, &KernelVariant::reference(), &mut acc).unwrap();
    let once = double(&once);
    for i in 0..40 {
        let (p0, v0, a) = (s.position(i), s.velocity(i), acc.get(i));
        for c in 0..3 {
            let dv = a[c] * params.dt;
            assert_eq!(once.velocity(i)[c], v0[c] + dv);
            assert_eq!(once.position(i)[c], p0[c] + (v0[c] + dv * 0.5) * params.dt);
        }
    }
}

#[test]
fn two_body_mirror_symmetry_each_step() {
    let mut sys: AnySystem = ParticleSystem::<f64>::from_soa(
        Columns {
            x: vec![0.0, 1.0],
            y: vec![0.0, 0.0],
            z: vec![0.0, 0.0],
        },
        Columns::zeros(2),
        vec![1.0, 1.0],
    )
    .unwrap()
    .into();
    let params = SimParams::default().with_dt(1e-3).with_steps(1);
    for _ in 0..50 {
        sys = simulate_any(&sys, &params, &KernelVariant::reference()).unwrap();
        let (a, b) = (sys.position_f64(0), sys.position_f64(1));
        assert!((a[0] + b[0] - 1.0).abs() < 1e-14);
        assert_eq!(a[1], 0.0);
        assert_eq!(b[1], 0.0);
    }
}
