//! Particle-system data model: positions, velocities and masses of N bodies
//! stored either as one record per body (AoS) or one contiguous buffer per
//! axis (SoA).

use std::fmt;
use std::str::FromStr;

use crate::error::{NbodyError, Result};
use crate::real::{Precision, Real};
use crate::rng::{Seed, SplitMix64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layout {
    /// Array of structures: `[x, y, z]` record per body.
    Aos,
    /// Structure of arrays: one buffer per axis.
    Soa,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Aos => "aos",
            Layout::Soa => "soa",
        }
    }

    pub fn other(self) -> Layout {
        match self {
            Layout::Aos => Layout::Soa,
            Layout::Soa => Layout::Aos,
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aos" => Ok(Layout::Aos),
            "soa" => Ok(Layout::Soa),
            other => Err(format!("unknown layout `{other}` (expected aos or soa)")),
        }
    }
}

/// Three contiguous per-axis buffers of equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Columns<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> Columns<T> {
    pub fn zeros(n: usize) -> Self {
        Columns {
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

    fn from_records(records: &[[T; 3]]) -> Self {
        Columns {
            x: records.iter().map(|r| r[0]).collect(),
            y: records.iter().map(|r| r[1]).collect(),
            z: records.iter().map(|r| r[2]).collect(),
        }
    }

    fn to_records(&self) -> Vec<[T; 3]> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    fn consistent(&self) -> bool {
        self.x.len() == self.y.len() && self.x.len() == self.z.len()
    }
}

/// Positions and velocities in one of the two layouts.
#[derive(Clone, Debug, PartialEq)]
pub enum Kinematics<T> {
    Aos {
        positions: Vec<[T; 3]>,
        velocities: Vec<[T; 3]>,
    },
    Soa {
        positions: Columns<T>,
        velocities: Columns<T>,
    },
}

/// State of N bodies at one precision and one layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem<T> {
    pub(crate) kinematics: Kinematics<T>,
    pub(crate) masses: Vec<T>,
}

impl<T: Real> ParticleSystem<T> {
    pub fn from_soa(positions: Columns<T>, velocities: Columns<T>, masses: Vec<T>) -> Result<Self> {
        let sys = ParticleSystem {
            kinematics: Kinematics::Soa {
                positions,
                velocities,
            },
            masses,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_aos(positions: Vec<[T; 3]>, velocities: Vec<[T; 3]>, masses: Vec<T>) -> Result<Self> {
        let sys = ParticleSystem {
            kinematics: Kinematics::Aos {
                positions,
                velocities,
            },
            masses,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Deterministic initial conditions from `seed`.
    ///
    /// Per body, in index order, four uniforms `u` are drawn: x, y, z in
    /// `[0, 1)` and mass `1 - u` in `(0, 1]`. Velocities start at zero. The
    /// stream is generated in double precision and rounded for `f32`.
    pub fn init(n: usize, seed: Seed, layout: Layout) -> Result<Self> {
        if n == 0 {
            return Err(NbodyError::InvalidArgument(
                "body count must be at least 1".into(),
            ));
        }
        let mut rng = SplitMix64::new(seed);
        let mut positions = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.next_unit();
            let y = rng.next_unit();
            let z = rng.next_unit();
            let m = 1.0 - rng.next_unit();
            positions.push([T::from_f64(x), T::from_f64(y), T::from_f64(z)]);
            masses.push(T::from_f64(m));
        }
        let velocities = vec![[T::zero(); 3]; n];
        let sys = ParticleSystem {
            kinematics: Kinematics::Aos {
                positions,
                velocities,
            },
            masses,
        };
        Ok(sys.to_layout(layout))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn layout(&self) -> Layout {
        match self.kinematics {
            Kinematics::Aos { .. } => Layout::Aos,
            Kinematics::Soa { .. } => Layout::Soa,
        }
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn kinematics(&self) -> &Kinematics<T> {
        &self.kinematics
    }

    #[inline]
    pub fn position(&self, i: usize) -> [T; 3] {
        match &self.kinematics {
            Kinematics::Aos { positions, .. } => positions[i],
            Kinematics::Soa { positions, .. } => positions.get(i),
        }
    }

    #[inline]
    pub fn velocity(&self, i: usize) -> [T; 3] {
        match &self.kinematics {
            Kinematics::Aos { velocities, .. } => velocities[i],
            Kinematics::Soa { velocities, .. } => velocities.get(i),
        }
    }

    /// Checks the structural and numeric invariants: N ≥ 1, equal lengths,
    /// finite values, strictly positive masses.
    pub fn validate(&self) -> Result<()> {
        let n = self.masses.len();
        if n == 0 {
            return Err(NbodyError::InvalidArgument("system has no bodies".into()));
        }
        let lengths_ok = match &self.kinematics {
            Kinematics::Aos {
                positions,
                velocities,
            } => positions.len() == n && velocities.len() == n,
            Kinematics::Soa {
                positions,
                velocities,
            } => {
                positions.consistent()
                    && velocities.consistent()
                    && positions.len() == n
                    && velocities.len() == n
            }
        };
        if !lengths_ok {
            return Err(NbodyError::InvalidArgument(format!(
                "position/velocity sequences must all have {n} elements"
            )));
        }
        if let Some(i) = self.masses.iter().position(|m| !(m.is_finite() && *m > T::zero())) {
            return Err(NbodyError::InvalidArgument(format!(
                "mass of body {i} must be finite and positive, got {}",
                self.masses[i]
            )));
        }
        if let Some(i) = (0..n).find(|&i| !self.body_is_finite(i)) {
            return Err(NbodyError::InvalidArgument(format!(
                "body {i} has a non-finite position or velocity"
            )));
        }
        Ok(())
    }

    pub(crate) fn body_is_finite(&self, i: usize) -> bool {
        self.position(i)
            .iter()
            .chain(self.velocity(i).iter())
            .all(|c| c.is_finite())
    }

    /// True if any coordinate, velocity, or mass is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        (0..self.len()).any(|i| !self.body_is_finite(i))
    }

    /// Copy in the requested layout; every scalar is carried over bit for bit.
    pub fn to_layout(&self, target: Layout) -> Self {
        let kinematics = match (&self.kinematics, target) {
            (k @ Kinematics::Aos { .. }, Layout::Aos) | (k @ Kinematics::Soa { .. }, Layout::Soa) => {
                k.clone()
            }
            (
                Kinematics::Aos {
                    positions,
                    velocities,
                },
                Layout::Soa,
            ) => Kinematics::Soa {
                positions: Columns::from_records(positions),
                velocities: Columns::from_records(velocities),
            },
            (
                Kinematics::Soa {
                    positions,
                    velocities,
                },
                Layout::Aos,
            ) => Kinematics::Aos {
                positions: positions.to_records(),
                velocities: velocities.to_records(),
            },
        };
        ParticleSystem {
            kinematics,
            masses: self.masses.clone(),
        }
    }

    /// Sum of `x + y + z` over all bodies, accumulated in `f64` in index
    /// order.
    pub fn checksum(&self) -> f64 {
        (0..self.len())
            .map(|i| self.position(i))
            .fold(0.0, |acc, [x, y, z]| acc + (x.to_f64() + y.to_f64() + z.to_f64()))
    }

    /// Layout-aware bitwise equality (distinguishes `-0.0`/`0.0` and NaN payloads).
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.layout() == other.layout()
            && self.len() == other.len()
            && self.masses.iter().zip(&other.masses).all(|(a, b)| a.bits() == b.bits())
            && (0..self.len()).all(|i| {
                let same = |a: [T; 3], b: [T; 3]| a.iter().zip(&b).all(|(p, q)| p.bits() == q.bits());
                same(self.position(i), other.position(i)) && same(self.velocity(i), other.velocity(i))
            })
    }
}

/// A particle system of either precision.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySystem {
    Single(ParticleSystem<f32>),
    Double(ParticleSystem<f64>),
}

macro_rules! dispatch {
    ($self:expr, $sys:ident => $body:expr) => {
        match $self {
            AnySystem::Single($sys) => $body,
            AnySystem::Double($sys) => $body,
        }
    };
}


impl AnySystem {
    pub fn len(&self) -> usize {
        dispatch!(self, s => s.len())
    }

    pub fn is_empty(&self) -> bool {
        dispatch!(self, s => s.is_empty())
    }

    pub fn layout(&self) -> Layout {
        dispatch!(self, s => s.layout())
    }

    pub fn precision(&self) -> Precision {
        match self {
            AnySystem::Single(_) => Precision::Single,
            AnySystem::Double(_) => Precision::Double,
        }
    }

    pub fn checksum(&self) -> f64 {
        dispatch!(self, s => s.checksum())
    }

    pub fn has_non_finite(&self) -> bool {
        dispatch!(self, s => s.has_non_finite())
    }

    pub fn to_layout(&self, target: Layout) -> AnySystem {
        match self {
            AnySystem::Single(s) => AnySystem::Single(s.to_layout(target)),
            AnySystem::Double(s) => AnySystem::Double(s.to_layout(target)),
        }
    }

    pub fn bitwise_eq(&self, other: &AnySystem) -> bool {
        match (self, other) {
            (AnySystem::Single(a), AnySystem::Single(b)) => a.bitwise_eq(b),
            (AnySystem::Double(a), AnySystem::Double(b)) => a.bitwise_eq(b),
            _ => false,
        }
    }

    /// Position of body `i` widened to `f64`.
    pub fn position_f64(&self, i: usize) -> [f64; 3] {
        dispatch!(self, s => s.position(i).map(Real::to_f64))
    }

    pub fn velocity_f64(&self, i: usize) -> [f64; 3] {
        dispatch!(self, s => s.velocity(i).map(Real::to_f64))
    }

    pub fn mass_f64(&self, i: usize) -> f64 {
        dispatch!(self, s => s.masses()[i].to_f64())
    }
}

impl From<ParticleSystem<f32>> for AnySystem {
    fn from(s: ParticleSystem<f32>) -> Self {
        AnySystem::Single(s)
    }
}

impl From<ParticleSystem<f64>> for AnySystem {
    fn from(s: ParticleSystem<f64>) -> Self {
        AnySystem::Double(s)
    }
}

pub fn init_system(n: usize, seed: Seed, precision: Precision, layout: Layout) -> Result<AnySystem> {
    Ok(match precision {
        Precision::Single => AnySystem::Single(ParticleSystem::init(n, seed, layout)?),
        Precision::Double => AnySystem::Double(ParticleSystem::init(n, seed, layout)?),
    })
}

pub fn convert_layout(sys: &AnySystem, target: Layout) -> AnySystem {
    sys.to_layout(target)
}

pub fn checksum(sys: &AnySystem) -> f64 {
    sys.checksum()
}
