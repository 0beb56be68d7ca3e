//! All-pairs gravitational N-body kernels arranged as an optimization
//! ladder (data layout, j-tiling, denominator math form, precision, static
//! multi-threading), a GFLOPS benchmark harness, and an independent oracle
//! for validating every rung.

pub mod cli;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod params;
pub mod real;
pub mod report;
pub mod results;
pub mod rng;
pub mod system;
pub mod validation;

pub use error::{NbodyError, Result};
pub use harness::{gflops, measure, run_sweep, BenchConfig, BenchResult, Status, SweepPlan};
pub use kernels::{
    compute_accelerations, integrate_step, simulate, simulate_any, AccelerationBuffer, KernelVariant, MathForm,
};
pub use params::SimParams;
pub use real::{Precision, Real};
pub use report::render_report;
pub use results::{emit_csv, format_sig17, read_csv};
pub use rng::{Seed, SplitMix64};
pub use system::{checksum, convert_layout, init_system, AnySystem, Columns, Kinematics, Layout, ParticleSystem};
pub use validation::{cross_validate, energy_drift, reference_accelerations, Diagnostics, ValidationReport};
