use std::fmt;
use std::str::FromStr;

use num_traits::Float;

/// Floating-point width of every buffer in a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub const ALL: [Precision; 2] = [Precision::Single, Precision::Double];

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" | "f32" | "float32" => Ok(Precision::Single),
            "double" | "f64" | "float64" => Ok(Precision::Double),
            other => Err(format!("unknown precision `{other}` (expected single or double)")),
        }
    }
}

/// Scalar type a kernel can be instantiated with.
///
/// Arithmetic stays in `Self` throughout; there is no mixed-precision
/// accumulation.
pub trait Real: Float + Default + Send + Sync + fmt::Debug + fmt::Display + 'static {
    const PRECISION: Precision;

    /// Rounds a double to this width (identity for `f64`).
    fn from_f64(v: f64) -> Self;

    fn to_f64(self) -> f64;

    /// Raw IEEE-754 bits, widened to 64 bits.
    fn bits(self) -> u64;

    fn three_halves() -> Self {
        Self::from_f64(1.5)
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::Single;

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline(always)]
    fn bits(self) -> u64 {
        self.to_bits() as u64
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline(always)]
    fn bits(self) -> u64 {
        self.to_bits()
    }
}
