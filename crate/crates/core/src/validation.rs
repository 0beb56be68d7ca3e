//! Independent oracle and physics diagnostics.
//!
//! Nothing here calls into [`crate::kernels`] for the reference path: the
//! oracle is a plain double-precision transcription of the force law and the
//! update rule, sequential, untiled, over `[f64; 3]` records.

use crate::error::{NbodyError, Result};
use crate::kernels::{simulate_any, KernelVariant};
use crate::params::SimParams;
use crate::real::{Precision, Real};
use crate::rng::Seed;
use crate::system::{init_system, AnySystem, ParticleSystem};

/// Relative checksum tolerance for double-precision variants.
pub const DOUBLE_TOLERANCE: f64 = 1e-9;
/// Relative checksum tolerance for single-precision variants.
pub const SINGLE_TOLERANCE: f64 = 5e-4;

pub fn tolerance(precision: Precision) -> f64 {
    match precision {
        Precision::Single => SINGLE_TOLERANCE,
        Precision::Double => DOUBLE_TOLERANCE,
    }
}

/// `|a - b| / |b|`, or `|a - b|` when `b` is zero.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if b == 0.0 {
        diff
    } else {
        diff / b.abs()
    }
}

/// Plain state used by the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleState {
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub masses: Vec<f64>,
}

impl OracleState {
    pub fn from_system(sys: &AnySystem) -> Self {
        let n = sys.len();
        OracleState {
            positions: (0..n).map(|i| sys.position_f64(i)).collect(),
            velocities: (0..n).map(|i| sys.velocity_f64(i)).collect(),
            masses: (0..n).map(|i| sys.mass_f64(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn checksum(&self) -> f64 {
        let mut sum = 0.0;
        for p in &self.positions {
            sum += p[0] + p[1] + p[2];
        }
        sum
    }
}

/// Brute-force accelerations in `f64`, skipping `j == i`.
pub fn reference_accelerations(state: &OracleState, params: &SimParams) -> Vec<[f64; 3]> {
    let n = state.len();
    let mut out = vec![[0.0; 3]; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let pi = state.positions[i];
        let (mut ax, mut ay, mut az) = (0.0, 0.0, 0.0);
        for j in 0..n {
            if j == i {
                continue;
            }
            let pj = state.positions[j];
            let dx = pj[0] - pi[0];
            let dy = pj[1] - pi[1];
            let dz = pj[2] - pi[2];
            let r2 = dx * dx + dy * dy + dz * dz + params.softening_sq;
            let denom = r2.powf(1.5);
            let m = state.masses[j];
            ax += m * dx / denom;
            ay += m * dy / denom;
            az += m * dz / denom;
        }
        let g = params.gravitational_constant;
        *slot = [g * ax, g * ay, g * az];
    }
    out
}

/// Oracle time stepping: `steps` rounds of brute-force accelerations then
/// `v += a dt`, `p += (v_old + a dt / 2) dt`.
pub fn oracle_simulate(state: &OracleState, params: &SimParams) -> OracleState {
    let mut s = state.clone();
    let dt = params.dt;
    for _ in 0..params.steps {
        let acc = reference_accelerations(&s, params);
        for ((p, v), a) in s.positions.iter_mut().zip(s.velocities.iter_mut()).zip(&acc) {
            for c in 0..3 {
                let dv = a[c] * dt;
                p[c] += (v[c] + dv / 2.0) * dt;
                v[c] += dv;
            }
        }
    }
    s
}

/// Physics observables of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub kinetic_energy: f64,
    pub potential_energy: f64,
    pub total_momentum: [f64; 3],
    /// `Σ m_i ‖v_i‖`, the scale against which momentum drift is judged.
    pub momentum_scale: f64,
    pub checksum: f64,
}

impl Diagnostics {
    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy + self.potential_energy
    }

    pub fn momentum_norm(&self) -> f64 {
        let [x, y, z] = self.total_momentum;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.kinetic_energy.is_finite()
            && self.potential_energy.is_finite()
            && self.total_momentum.iter().all(|c| c.is_finite())
            && self.checksum.is_finite()
    }
}

/// Energies use the same softening as the force law:
/// `U = −G Σ_{i<j} m_i m_j / sqrt(‖p_i − p_j‖² + ε²)`.
pub fn diagnostics(state: &OracleState, params: &SimParams) -> Diagnostics {
    let n = state.len();
    let mut kinetic = 0.0;
    let mut momentum = [0.0; 3];
    let mut scale = 0.0;
    for i in 0..n {
        let m = state.masses[i];
        let v = state.velocities[i];
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        kinetic += 0.5 * m * v2;
        scale += m * v2.sqrt();
        for c in 0..3 {
            momentum[c] += m * v[c];
        }
    }
    let mut potential = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let a = state.positions[i];
            let b = state.positions[j];
            let r2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2) + params.softening_sq;
            potential -= state.masses[i] * state.masses[j] / r2.sqrt();
        }
    }
    Diagnostics {
        kinetic_energy: kinetic,
        potential_energy: params.gravitational_constant * potential,
        total_momentum: momentum,
        momentum_scale: scale,
        checksum: state.checksum(),
    }
}

pub fn system_diagnostics(sys: &AnySystem, params: &SimParams) -> Diagnostics {
    diagnostics(&OracleState::from_system(sys), params)
}

/// Result of [`energy_drift`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyDrift {
    /// `|E_final − E_initial| / |E_initial|`, or the absolute drift when
    /// `E_initial = 0`.
    pub value: f64,
    /// False when `E_initial = 0` and `value` is an absolute drift.
    pub ratio_defined: bool,
    pub initial: f64,
    pub last: f64,
}

/// Total-energy drift over `params.steps` steps of `variant`.
pub fn energy_drift(sys0: &AnySystem, params: &SimParams, variant: &KernelVariant) -> Result<EnergyDrift> {
    let start = sys0.to_layout(variant.layout);
    let end = simulate_any(&start, params, variant)?;
    let initial = system_diagnostics(&start, params).total_energy();
    let last = system_diagnostics(&end, params).total_energy();
    let abs = (last - initial).abs();
    Ok(if initial == 0.0 {
        EnergyDrift {
            value: abs,
            ratio_defined: false,
            initial,
            last,
        }
    } else {
        EnergyDrift {
            value: abs / initial.abs(),
            ratio_defined: true,
            initial,
            last,
        }
    })
}

/// One (variant, precision) pair to check against the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationCase {
    pub variant: KernelVariant,
    pub precision: Precision,
}

impl ValidationCase {
    pub fn new(variant: KernelVariant, precision: Precision) -> Self {
        ValidationCase { variant, precision }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub case: ValidationCase,
    pub checksum: f64,
    pub checksum_deviation: f64,
    /// Largest `|p − p_ref|` over all final coordinates.
    pub max_position_deviation: f64,
    /// Largest first-step `|a_ic − r_ic| / ‖r_i‖` against the oracle.
    pub max_acceleration_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub steps: usize,
    pub seed: Seed,
    pub reference_checksum: f64,
    pub cases: Vec<CaseOutcome>,
    /// `‖Σ m v‖` of the oracle run's final state.
    pub momentum_drift: f64,
    pub momentum_scale: f64,
    pub energy_drift: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "validation: n={} steps={} seed={} reference checksum {}\n",
            self.n,
            self.steps,
            self.seed.0,
            crate::results::format_sig17(self.reference_checksum)
        );
        s.push_str(&format!(
            "momentum drift {:.3e} (scale {:.3e}), energy drift {:.3e}\n",
            self.momentum_drift, self.momentum_scale, self.energy_drift
        ));
        s.push_str("variant             T  precision  checksum_dev  accel_dev     pos_dev       tol      result\n");
        for c in &self.cases {
            let result = match (&c.failure, c.passed) {
                (Some(reason), _) => format!("FAIL ({reason})"),
                (None, true) => "ok".to_string(),
                (None, false) => "FAIL".to_string(),
            };
            s.push_str(&format!(
                "{:<18} {:>2}  {:<9}  {:<12.3e}  {:<12.3e}  {:<12.3e}  {:<7.0e}  {}\n",
                c.case.variant.label(),
                c.case.variant.threads,
                c.case.precision,
                c.checksum_deviation,
                c.max_acceleration_deviation,
                c.max_position_deviation,
                c.tolerance,
                result
            ));
        }
        s
    }
}

fn accel_deviation(sys: &AnySystem, params: &SimParams, variant: &KernelVariant, oracle: &[[f64; 3]]) -> Result<f64> {
    fn dev<T: Real>(
        sys: &ParticleSystem<T>,
        params: &SimParams,
        variant: &KernelVariant,
        oracle: &[[f64; 3]],
    ) -> Result<f64> {
        let mut acc = crate::kernels::AccelerationBuffer::new(sys.len());
        crate::kernels::compute_accelerations(sys, params, variant, &mut acc)?;
        let mut worst: f64 = 0.0;
        for (i, r) in oracle.iter().enumerate() {
            let a = acc.get(i).map(Real::to_f64);
            let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            for c in 0..3 {
                let diff = (a[c] - r[c]).abs();
                let d = if norm > 0.0 { diff / norm } else { diff };
                worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
            }
        }
        Ok(worst)
    }
    match sys {
        AnySystem::Single(s) => dev(s, params, variant, oracle),
        AnySystem::Double(s) => dev(s, params, variant, oracle),
    }
}

/// Runs every case from the same seeded initial conditions and compares it
/// with the oracle.
pub fn cross_validate(
    n: usize,
    steps: usize,
    seed: Seed,
    params: &SimParams,
    cases: &[ValidationCase],
) -> Result<ValidationReport> {
    let params = params.with_steps(steps);
    params.validate()?;
    let oracle_start = OracleState::from_system(&init_system(n, seed, Precision::Double, crate::Layout::Soa)?);
    check_cross_validate_start(&oracle_start)?;
    cross_validate_from(&oracle_start, &params, cases, seed)
}

fn check_cross_validate_start(state: &OracleState) -> Result<()> {
    if state.is_empty() {
        return Err(NbodyError::InvalidArgument("no bodies to validate".into()));
    }
    Ok(())
}

/// [`cross_validate`] from explicit initial conditions (double precision
/// values; single-precision cases round them).
pub fn cross_validate_from(
    start: &OracleState,
    params: &SimParams,
    cases: &[ValidationCase],
    seed: Seed,
) -> Result<ValidationReport> {
    let oracle_end = oracle_simulate(start, params);
    let oracle_acc = reference_accelerations(start, params);
    let reference_checksum = oracle_end.checksum();
    let start_diag = diagnostics(start, params);
    let end_diag = diagnostics(&oracle_end, params);
    let energy_drift = relative_deviation(end_diag.total_energy(), start_diag.total_energy());

    let mut outcomes = Vec::with_capacity(cases.len());
    for case in cases {
        outcomes.push(run_case(start, params, case, &oracle_end, &oracle_acc, reference_checksum)?);
    }

    Ok(ValidationReport {
        n: start.len(),
        steps: params.steps,
        seed,
        reference_checksum,
        cases: outcomes,
        momentum_drift: end_diag.momentum_norm(),
        momentum_scale: end_diag.momentum_scale,
        energy_drift,
    })
}

fn build_system(state: &OracleState, case: &ValidationCase) -> Result<AnySystem> {
    fn build<T: Real>(state: &OracleState) -> Result<ParticleSystem<T>> {
        let conv = |v: &[[f64; 3]]| -> Vec<[T; 3]> { v.iter().map(|p| p.map(T::from_f64)).collect() };
        ParticleSystem::from_aos(
            conv(&state.positions),
            conv(&state.velocities),
            state.masses.iter().map(|&m| T::from_f64(m)).collect(),
        )
    }
    let sys: AnySystem = match case.precision {
        Precision::Single => build::<f32>(state)?.into(),
        Precision::Double => build::<f64>(state)?.into(),
    };
    Ok(sys.to_layout(case.variant.layout))
}

fn run_case(
    start: &OracleState,
    params: &SimParams,
    case: &ValidationCase,
    oracle_end: &OracleState,
    oracle_acc: &[[f64; 3]],
    reference_checksum: f64,
) -> Result<CaseOutcome> {
    let tolerance = tolerance(case.precision);
    let failed = |reason: String| CaseOutcome {
        case: *case,
        checksum: f64::NAN,
        checksum_deviation: f64::INFINITY,
        max_position_deviation: f64::INFINITY,
        max_acceleration_deviation: f64::INFINITY,
        tolerance,
        passed: false,
        failure: Some(reason),
    };
    if let Err(e) = case.variant.validate(start.len()) {
        return Ok(failed(e.to_string()));
    }
    let sys = build_system(start, case)?;
    let accel_dev = accel_deviation(&sys, params, &case.variant, oracle_acc)?;
    let end = simulate_any(&sys, params, &case.variant)?;
    if end.has_non_finite() {
        return Ok(failed("non-finite state".into()));
    }
    let checksum = end.checksum();
    let deviation = relative_deviation(checksum, reference_checksum);
    let mut pos_dev: f64 = 0.0;
    for i in 0..end.len() {
        let p = end.position_f64(i);
        let r = oracle_end.positions[i];
        for c in 0..3 {
            pos_dev = pos_dev.max((p[c] - r[c]).abs());
        }
    }
    let passed = deviation.is_finite() && deviation <= tolerance;
    Ok(CaseOutcome {
        case: *case,
        checksum,
        checksum_deviation: deviation,
        max_position_deviation: pos_dev,
        max_acceleration_deviation: accel_dev,
        tolerance,
        passed,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MathForm;

    fn state(points: &[[f64; 3]], masses: &[f64]) -> OracleState {
        OracleState {
            positions: points.to_vec(),
            velocities: vec![[0.0; 3]; points.len()],
            masses: masses.to_vec(),
        }
    }

    #[test]
    fn oracle_two_body() {
        let s = state(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 1.0]);
        let a = reference_accelerations(&s, &SimParams::default().with_softening_sq(0.0));
        assert_eq!(a, vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
    }

    #[test]
    fn oracle_unit_square() {
        let s = state(
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            &[1.0; 4],
        );
        let a = reference_accelerations(&s, &SimParams::default().with_softening_sq(0.0));
        let expected = 1.0 + 2f64.powf(-1.5);
        assert!((a[0][0] - expected).abs() < 1e-15);
        assert!((a[0][1] - expected).abs() < 1e-15);
        assert_eq!(a[0][2], 0.0);
    }

    #[test]
    fn self_comparison_has_zero_deviation() {
        let cases = [ValidationCase::new(KernelVariant::reference(), Precision::Double)];
        let report = cross_validate(64, 3, Seed(42), &SimParams::default(), &cases).unwrap();
        assert!(report.passed());
        assert_eq!(report.cases[0].checksum_deviation, 0.0);
    }

    #[test]
    fn coincident_unsoftened_fails_non_finite() {
        let s = state(&[[0.2; 3], [0.2; 3], [0.7, 0.1, 0.4]], &[1.0; 3]);
        let params = SimParams::default().with_softening_sq(0.0).with_steps(2);
        let cases = [ValidationCase::new(KernelVariant::reference(), Precision::Double)];
        let report = cross_validate_from(&s, &params, &cases, Seed(0)).unwrap();
        assert!(!report.passed());
        assert!(report.cases[0].failure.as_deref().unwrap().contains("non-finite"));
    }

    #[test]
    fn single_body_energy_is_constant() {
        let sys = init_system(1, Seed(5), Precision::Double, crate::Layout::Soa).unwrap();
        let d = energy_drift(&sys, &SimParams::default().with_steps(10), &KernelVariant::reference()).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(!d.ratio_defined);
    }

    #[test]
    fn invalid_case_is_reported_not_raised() {
        let cases = [ValidationCase::new(
            KernelVariant::soa(MathForm::PowThenDivide).with_block(Some(128)),
            Precision::Double,
        )];
        let report = cross_validate(16, 1, Seed(1), &SimParams::default(), &cases).unwrap();
        assert!(!report.passed());
    }
}
