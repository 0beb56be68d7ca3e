use crate::error::{NbodyError, Result};

/// Physics constants for one simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    pub gravitational_constant: f64,
    pub dt: f64,
    /// ε², added to the squared pair distance before exponentiation.
    pub softening_sq: f64,
    pub steps: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            gravitational_constant: 1.0,
            dt: 0.01,
            softening_sq: 1e-9,
            steps: 100,
        }
    }
}

impl SimParams {
    pub fn new(gravitational_constant: f64, dt: f64, softening_sq: f64, steps: usize) -> Result<Self> {
        let p = SimParams {
            gravitational_constant,
            dt,
            softening_sq,
            steps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_steps(self, steps: usize) -> Self {
        SimParams { steps, ..self }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        SimParams { dt, ..self }
    }

    pub fn with_softening_sq(self, softening_sq: f64) -> Self {
        SimParams { softening_sq, ..self }
    }

    /// Softening of zero is accepted; coincident bodies then produce
    /// non-finite accelerations.
    pub fn validate(&self) -> Result<()> {
        let g = self.gravitational_constant;
        if !(g.is_finite() && g > 0.0) {
            return Err(NbodyError::InvalidArgument(format!(
                "gravitational constant must be positive and finite, got {g}"
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(NbodyError::InvalidArgument(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        if !(self.softening_sq.is_finite() && self.softening_sq >= 0.0) {
            return Err(NbodyError::InvalidArgument(format!(
                "softening_sq must be non-negative and finite, got {}",
                self.softening_sq
            )));
        }
        if self.steps == 0 {
            return Err(NbodyError::InvalidArgument("steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SimParams::default();
        p.validate().unwrap();
        assert_eq!((p.gravitational_constant, p.dt, p.softening_sq, p.steps), (1.0, 0.01, 1e-9, 100));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SimParams::new(1.0, 0.01, 1e-9, 0).is_err());
        assert!(SimParams::new(1.0, 0.0, 1e-9, 1).is_err());
        assert!(SimParams::new(1.0, 0.01, -1.0, 1).is_err());
        assert!(SimParams::new(0.0, 0.01, 1e-9, 1).is_err());
        assert!(SimParams::new(1.0, 0.01, 0.0, 1).is_ok());
    }
}
