//! Force-and-integrate step for every rung of the optimization ladder.
//!
//! A step is two phases separated by a full barrier: every acceleration is
//! computed from one immutable position snapshot, then every body is moved.
//! No force symmetry is exploited; each body sums over all N sources.

mod aos;
mod schedule;
mod soa;

use std::fmt;
use std::str::FromStr;

use crate::error::{NbodyError, Result};
use crate::params::SimParams;
use crate::real::Real;
use crate::system::{AnySystem, Kinematics, Layout, ParticleSystem};

pub use schedule::partition;

/// Algebraic form of the `(d² + ε²)^{3/2}` denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MathForm {
    /// `powf(d², 1.5)`, then one division per component.
    PowThenDivide,
    /// `inv = 1 / (d² · sqrt(d²))` once per pair, then multiplications.
    ReciprocalMultiply,
}

impl MathForm {
    pub const ALL: [MathForm; 2] = [MathForm::PowThenDivide, MathForm::ReciprocalMultiply];

    pub fn as_str(self) -> &'static str {
        match self {
            MathForm::PowThenDivide => "pow_then_divide",
            MathForm::ReciprocalMultiply => "reciprocal_multiply",
        }
    }
}

impl fmt::Display for MathForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MathForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pow_then_divide" | "pow" => Ok(MathForm::PowThenDivide),
            "reciprocal_multiply" | "recip" => Ok(MathForm::ReciprocalMultiply),
            other => Err(format!("unknown math form `{other}` (expected pow or recip)")),
        }
    }
}

/// One point on the ladder: layout × math form × blocking × threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KernelVariant {
    pub layout: Layout,
    pub math_form: MathForm,
    /// Bodies per j-tile; `None` is unblocked.
    pub block: Option<usize>,
    pub threads: usize,
}

impl Default for KernelVariant {
    fn default() -> Self {
        KernelVariant::reference()
    }
}

impl KernelVariant {
    /// Unblocked, sequential, `pow_then_divide` on SoA.
    pub const fn reference() -> Self {
        KernelVariant {
            layout: Layout::Soa,
            math_form: MathForm::PowThenDivide,
            block: None,
            threads: 1,
        }
    }

    /// The pre-SoA rung; the only valid AoS variant.
    pub const fn aos() -> Self {
        KernelVariant {
            layout: Layout::Aos,
            math_form: MathForm::PowThenDivide,
            block: None,
            threads: 1,
        }
    }

    pub const fn soa(math_form: MathForm) -> Self {
        KernelVariant {
            layout: Layout::Soa,
            math_form,
            block: None,
            threads: 1,
        }
    }

    pub const fn with_threads(self, threads: usize) -> Self {
        KernelVariant { threads, ..self }
    }

    pub const fn with_block(self, block: Option<usize>) -> Self {
        KernelVariant { block, ..self }
    }

    pub const fn with_math(self, math_form: MathForm) -> Self {
        KernelVariant { math_form, ..self }
    }

    /// Invariants that do not depend on N.
    pub fn check(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(NbodyError::InvalidVariant("threads must be at least 1".into()));
        }
        if self.block == Some(0) {
            return Err(NbodyError::InvalidVariant("block size must be at least 1".into()));
        }
        if self.layout == Layout::Aos {
            if self.math_form != MathForm::PowThenDivide {
                return Err(NbodyError::InvalidVariant(
                    "aos layout only supports the pow_then_divide math form".into(),
                ));
            }
            if self.block.is_some() {
                return Err(NbodyError::InvalidVariant("aos layout cannot be blocked".into()));
            }
            if self.threads != 1 {
                return Err(NbodyError::InvalidVariant(format!(
                    "aos layout is sequential-only, got {} threads",
                    self.threads
                )));
            }
        }
        Ok(())
    }

    /// Full validation against a body count (`1 ≤ B ≤ N`).
    pub fn validate(&self, n: usize) -> Result<()> {
        self.check()?;
        if let Some(b) = self.block {
            if b > n {
                return Err(NbodyError::InvalidVariant(format!(
                    "block size {b} exceeds body count {n}"
                )));
            }
        }
        Ok(())
    }

    /// Name of the (layout, math form, block) rung, independent of threads:
    /// `aos`, `soa`, `soa-recip`, `soa-b64`, `soa-recip-b64`.
    pub fn label(&self) -> String {
        let mut s = self.layout.as_str().to_string();
        if self.math_form == MathForm::ReciprocalMultiply {
            s.push_str("-recip");
        }
        if let Some(b) = self.block {
            s.push_str(&format!("-b{b}"));
        }
        s
    }

    /// Inverse of [`label`](Self::label); threads default to 1.
    pub fn from_label(label: &str) -> Result<Self> {
        let bad = || NbodyError::InvalidVariant(format!("unrecognized variant label `{label}`"));
        let mut parts = label.split('-');
        let layout: Layout = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let mut v = KernelVariant {
            layout,
            math_form: MathForm::PowThenDivide,
            block: None,
            threads: 1,
        };
        for part in parts {
            match part {
                "recip" if v.math_form == MathForm::PowThenDivide && v.block.is_none() => {
                    v.math_form = MathForm::ReciprocalMultiply
                }
                p if p.starts_with('b') && v.block.is_none() => {
                    v.block = Some(p[1..].parse().map_err(|_| bad())?);
                }
                _ => return Err(bad()),
            }
        }
        v.check()?;
        Ok(v)
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (T={})", self.label(), self.threads)
    }
}

/// Per-body accelerations, one buffer per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AccelerationBuffer<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> AccelerationBuffer<T> {
    pub fn new(n: usize) -> Self {
        AccelerationBuffer {
            x: vec![T::zero(); n],
            y: vec![T::zero(); n],
            z: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> [T; 3] {
        [self.x[i], self.y[i], self.z[i]]
    }

    pub fn all_finite(&self) -> bool {
        self.x.iter().chain(&self.y).chain(&self.z).all(|v| v.is_finite())
    }
}

/// Per-pair denominator handling for the two math forms.
pub(crate) trait PairTerm<T: Real> {
    /// Factor derived from the softened squared distance.
    fn factor(d2: T) -> T;
    /// Applies the factor to `m_j · Δ`.
    fn apply(numerator: T, factor: T) -> T;
}

pub(crate) struct PowDivide;
pub(crate) struct RecipMultiply;

impl<T: Real> PairTerm<T> for PowDivide {
    #[inline(always)]
    fn factor(d2: T) -> T {
        d2.powf(T::three_halves())
    }

    #[inline(always)]
    fn apply(numerator: T, factor: T) -> T {
        numerator / factor
    }
}

impl<T: Real> PairTerm<T> for RecipMultiply {
    #[inline(always)]
    fn factor(d2: T) -> T {
        T::one() / (d2 * d2.sqrt())
    }

    #[inline(always)]
    fn apply(numerator: T, factor: T) -> T {
        numerator * factor
    }
}

fn check_inputs<T: Real>(sys: &ParticleSystem<T>, variant: &KernelVariant, out_len: usize) -> Result<()> {
    if sys.layout() != variant.layout {
        return Err(NbodyError::LayoutMismatch {
            expected: variant.layout,
            actual: sys.layout(),
        });
    }
    variant.validate(sys.len())?;
    if out_len != sys.len() {
        return Err(NbodyError::InvalidArgument(format!(
            "acceleration buffer has {} entries, system has {}",
            out_len,
            sys.len()
        )));
    }
    Ok(())
}

/// Phase 1: `out_i = G Σ_j m_j (p_j − p_i) / (‖p_j − p_i‖² + ε²)^{3/2}`, with
/// the `j = i` term contributing exactly zero.
///
/// With `softening_sq = 0` coincident bodies yield non-finite output; this is
/// not checked here.
pub fn compute_accelerations<T: Real>(
    sys: &ParticleSystem<T>,
    params: &SimParams,
    variant: &KernelVariant,
    out: &mut AccelerationBuffer<T>,
) -> Result<()> {
    check_inputs(sys, variant, out.len())?;
    let g = T::from_f64(params.gravitational_constant);
    let eps2 = T::from_f64(params.softening_sq);
    match &sys.kinematics {
        Kinematics::Aos { positions, .. } => {
            aos::accelerations(positions, &sys.masses, g, eps2, out);
        }
        Kinematics::Soa { positions, .. } => match variant.math_form {
            MathForm::PowThenDivide => {
                soa::accelerations::<T, PowDivide>(positions, &sys.masses, g, eps2, variant, out)
            }
            MathForm::ReciprocalMultiply => {
                soa::accelerations::<T, RecipMultiply>(positions, &sys.masses, g, eps2, variant, out)
            }
        },
    }
    Ok(())
}

/// Phase 2: `v ← v + a·dt`, `p ← p + (v_old + a·dt/2)·dt`.
///
/// `acc` must have been computed from the current positions.
pub fn integrate_step<T: Real>(
    sys: &mut ParticleSystem<T>,
    acc: &AccelerationBuffer<T>,
    params: &SimParams,
    variant: &KernelVariant,
) -> Result<()> {
    check_inputs(sys, variant, acc.len())?;
    let dt = T::from_f64(params.dt);
    match &mut sys.kinematics {
        Kinematics::Aos {
            positions,
            velocities,
        } => aos::integrate(positions, velocities, acc, dt),
        Kinematics::Soa {
            positions,
            velocities,
        } => soa::integrate(positions, velocities, acc, dt, variant.threads),
    }
    Ok(())
}

/// Runs `params.steps` compute/integrate iterations on a copy of `sys`.
pub fn simulate<T: Real>(
    sys: &ParticleSystem<T>,
    params: &SimParams,
    variant: &KernelVariant,
) -> Result<ParticleSystem<T>> {
    params.validate()?;
    check_inputs(sys, variant, sys.len())?;
    let mut state = sys.clone();
    let mut acc = AccelerationBuffer::new(sys.len());
    for _ in 0..params.steps {
        compute_accelerations(&state, params, variant, &mut acc)?;
        integrate_step(&mut state, &acc, params, variant)?;
    }
    Ok(state)
}

/// [`simulate`] over a system of either precision.
pub fn simulate_any(sys: &AnySystem, params: &SimParams, variant: &KernelVariant) -> Result<AnySystem> {
    Ok(match sys {
        AnySystem::Single(s) => AnySystem::Single(simulate(s, params, variant)?),
        AnySystem::Double(s) => AnySystem::Double(simulate(s, params, variant)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Columns;

    fn soa_system(points: &[[f64; 3]], masses: &[f64]) -> ParticleSystem<f64> {
        let n = points.len();
        ParticleSystem::from_soa(
            Columns {
                x: points.iter().map(|p| p[0]).collect(),
                y: points.iter().map(|p| p[1]).collect(),
                z: points.iter().map(|p| p[2]).collect(),
            },
            Columns::zeros(n),
            masses.to_vec(),
        )
        .unwrap()
    }

    fn unsoftened() -> SimParams {
        SimParams::default().with_softening_sq(0.0)
    }

    fn all_variants(n: usize) -> Vec<KernelVariant> {
        let mut out = vec![KernelVariant::aos()];
        for math in MathForm::ALL {
            for block in [None, Some(1), Some(n)] {
                for threads in [1, 2, 3] {
                    out.push(KernelVariant::soa(math).with_block(block).with_threads(threads));
                }
            }
        }
        out
    }

    fn accel(sys: &ParticleSystem<f64>, params: &SimParams, v: &KernelVariant) -> AccelerationBuffer<f64> {
        let sys = sys.to_layout(v.layout);
        let mut out = AccelerationBuffer::new(sys.len());
        compute_accelerations(&sys, params, v, &mut out).unwrap();
        out
    }

    #[test]
    fn single_body_feels_nothing() {
        let sys = soa_system(&[[0.3, 0.2, 0.1]], &[5.0]);
        for v in all_variants(1) {
            assert_eq!(accel(&sys, &unsoftened(), &v).get(0), [0.0; 3], "{v}");
        }
    }

    #[test]
    fn unit_two_body() {
        let sys = soa_system(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 1.0]);
        for v in all_variants(2) {
            let a = accel(&sys, &unsoftened(), &v);
            assert_eq!(a.get(0), [1.0, 0.0, 0.0], "{v}");
            assert_eq!(a.get(1), [-1.0, 0.0, 0.0], "{v}");
        }
    }

    #[test]
    fn unit_square_corner() {
        // Oracle: hand sum of the three sources seen from the origin.
        // (1,0,0) at distance 1, (0,1,0) at distance 1, (1,1,0) at √2.
        let diag = 1.0 / 2f64.powf(1.5);
        let expected = [1.0 + diag, 1.0 + diag, 0.0];
        assert!((expected[0] - 1.353553).abs() < 1e-6);
        let sys = soa_system(
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            &[1.0; 4],
        );
        for v in all_variants(4) {
            let a = accel(&sys, &unsoftened(), &v).get(0);
            for c in 0..3 {
                assert!((a[c] - expected[c]).abs() <= 1e-15, "{v}: {a:?}");
            }
        }
    }

    #[test]
    fn coincident_unsoftened_is_non_finite() {
        let sys = soa_system(&[[0.5; 3], [0.5; 3], [0.0; 3]], &[1.0; 3]);
        let a = accel(&sys, &unsoftened(), &KernelVariant::reference());
        assert!(!a.all_finite());
        let a = accel(&sys, &SimParams::default(), &KernelVariant::reference());
        assert!(a.all_finite());
    }

    #[test]
    fn force_free_drift() {
        let mut sys = ParticleSystem::<f64>::from_soa(
            Columns {
                x: vec![0.0],
                y: vec![1.0],
                z: vec![2.0],
            },
            Columns {
                x: vec![0.5],
                y: vec![-1.0],
                z: vec![0.25],
            },
            vec![1.0],
        )
        .unwrap();
        let acc = AccelerationBuffer::new(1);
        let params = SimParams::default().with_dt(0.5);
        integrate_step(&mut sys, &acc, &params, &KernelVariant::reference()).unwrap();
        assert_eq!(sys.position(0), [0.25, 0.5, 2.125]);
        assert_eq!(sys.velocity(0), [0.5, -1.0, 0.25]);
    }

    #[test]
    fn unit_acceleration_substitution() {
        let mut sys = soa_system(&[[0.0; 3]], &[1.0]);
        let mut acc = AccelerationBuffer::new(1);
        acc.x[0] = 1.0;
        let params = SimParams::default().with_dt(1.0);
        integrate_step(&mut sys, &acc, &params, &KernelVariant::reference()).unwrap();
        assert_eq!(sys.velocity(0), [1.0, 0.0, 0.0]);
        assert_eq!(sys.position(0), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn two_body_one_step() {
        // Hand evaluation: a = ±1, dt = 0.1 → |v| = 0.1, |Δp| = ½·1·0.01 = 0.005.
        let sys = soa_system(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 1.0]);
        let params = unsoftened().with_dt(0.1).with_steps(1);
        for v in all_variants(2) {
            let out = simulate(&sys.to_layout(v.layout), &params, &v).unwrap();
            assert!((out.velocity(0)[0] - 0.1).abs() < 1e-15);
            assert!((out.velocity(1)[0] + 0.1).abs() < 1e-15);
            assert!((out.position(0)[0] - 0.005).abs() < 1e-15);
            assert!((out.position(1)[0] - 0.995).abs() < 1e-15);
        }
    }

    #[test]
    fn mirror_symmetry_is_kept() {
        let sys = soa_system(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 1.0]);
        let params = SimParams::default().with_dt(0.01).with_steps(1);
        let mut state = sys;
        for _ in 0..50 {
            state = simulate(&state, &params, &KernelVariant::reference()).unwrap();
            let mid = 0.5 * (state.position(0)[0] + state.position(1)[0]);
            assert!((mid - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn variant_validation() {
        assert!(KernelVariant::aos().with_threads(4).validate(10).is_err());
        assert!(KernelVariant::aos()
            .with_math(MathForm::ReciprocalMultiply)
            .validate(10)
            .is_err());
        assert!(KernelVariant::aos().with_block(Some(2)).validate(10).is_err());
        assert!(KernelVariant::reference().with_block(Some(11)).validate(10).is_err());
        assert!(KernelVariant::reference().with_block(Some(0)).validate(10).is_err());
        assert!(KernelVariant::reference().with_threads(0).validate(10).is_err());
        assert!(KernelVariant::reference().with_block(Some(10)).with_threads(16).validate(10).is_ok());
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let sys = soa_system(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 1.0]);
        let mut out = AccelerationBuffer::new(2);
        let err = compute_accelerations(&sys, &SimParams::default(), &KernelVariant::aos(), &mut out).unwrap_err();
        assert!(matches!(err, NbodyError::LayoutMismatch { .. }));
    }

    #[test]
    fn labels_round_trip() {
        for v in all_variants(64) {
            let back = KernelVariant::from_label(&v.label()).unwrap();
            assert_eq!(back, v.with_threads(1));
        }
        assert_eq!(KernelVariant::reference().with_block(Some(64)).label(), "soa-b64");
        assert_eq!(
            KernelVariant::soa(MathForm::ReciprocalMultiply).with_block(Some(8)).label(),
            "soa-recip-b8"
        );
        assert!(KernelVariant::from_label("aos-recip").is_err());
        assert!(KernelVariant::from_label("soa-b").is_err());
        assert!(KernelVariant::from_label("py_naive").is_err());
    }
}
