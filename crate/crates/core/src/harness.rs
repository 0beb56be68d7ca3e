//! Timing harness: warmup, best-of-R measurement, GFLOPS conversion, and
//! parameter sweeps.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use chrono::{DateTime, Utc};
use log::{info, warn};

use crate::error::{NbodyError, Result};
use crate::kernels::{simulate_any, KernelVariant};
use crate::params::SimParams;
use crate::real::Precision;
use crate::rng::Seed;
use crate::system::{init_system, AnySystem};

/// Floating-point operations credited to one pairwise interaction.
pub const FLOPS_PER_INTERACTION: f64 = 20.0;

/// `20 · n² · steps / (seconds · 10⁹)`.
pub fn gflops(n: usize, steps: usize, seconds: f64) -> Result<f64> {
    if n == 0 || steps == 0 {
        return Err(NbodyError::InvalidArgument(format!(
            "n and steps must be positive, got n={n} steps={steps}"
        )));
    }
    if seconds.is_nan() || seconds <= 0.0 {
        return Err(NbodyError::InvalidArgument(format!(
            "elapsed time must be positive, got {seconds}"
        )));
    }
    let n = n as f64;
    Ok(FLOPS_PER_INTERACTION * n * n * steps as f64 / (seconds * 1e9))
}

/// One benchmark configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_bodies: usize,
    /// Physics constants; `params.steps` is the step count I.
    pub params: SimParams,
    pub variant: KernelVariant,
    pub precision: Precision,
    pub seed: Seed,
    pub repetitions: usize,
    pub warmup_runs: usize,
}

impl BenchConfig {
    pub fn new(n_bodies: usize, variant: KernelVariant, precision: Precision) -> Self {
        BenchConfig {
            n_bodies,
            params: SimParams::default(),
            variant,
            precision,
            seed: Seed(42),
            repetitions: 5,
            warmup_runs: 1,
        }
    }

    pub fn steps(&self) -> usize {
        self.params.steps
    }

    pub fn key(&self) -> ResultKey {
        ResultKey {
            variant: self.variant.label(),
            n_bodies: self.n_bodies,
            threads: self.variant.threads,
            precision: self.precision,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bodies == 0 {
            return Err(NbodyError::InvalidArgument("n_bodies must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(NbodyError::InvalidArgument("repetitions must be at least 1".into()));
        }
        self.params.validate()?;
        self.variant.validate(self.n_bodies)
    }
}

/// Identity of a result row for resume purposes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResultKey {
    pub variant: String,
    pub n_bodies: usize,
    pub threads: usize,
    pub precision: Precision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Skipped,
    Error(String),
}

impl Status {
    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Skipped => f.write_str("skipped"),
            Status::Error(reason) => write!(f, "error:{reason}"),
        }
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "skipped" => Ok(Status::Skipped),
            _ => s
                .strip_prefix("error:")
                .map(|r| Status::Error(r.to_string()))
                .ok_or_else(|| format!("unknown status `{s}`")),
        }
    }
}

/// One measured configuration. Timing fields are NaN on error rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub times_s: Vec<f64>,
    pub gflops_each: Vec<f64>,
    pub best_time_s: f64,
    pub mean_time_s: f64,
    pub gflops_best: f64,
    pub gflops_mean: f64,
    pub checksum: f64,
    pub status: Status,
    pub timestamp: DateTime<Utc>,
    pub host_label: String,
}

impl BenchResult {
    pub fn error(config: BenchConfig, reason: impl Into<String>) -> Self {
        BenchResult {
            config,
            times_s: Vec::new(),
            gflops_each: Vec::new(),
            best_time_s: f64::NAN,
            mean_time_s: f64::NAN,
            gflops_best: f64::NAN,
            gflops_mean: f64::NAN,
            checksum: f64::NAN,
            status: Status::Error(reason.into()),
            timestamp: Utc::now(),
            host_label: host_label(),
        }
    }
}

/// Host name from the kernel, `HOSTNAME`, or `unknown`.
pub fn host_label() -> String {
    std::fs::read_to_string("/proc/sys/kernel/hostname")
        .ok()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .or_else(|| std::env::var("HOSTNAME").ok())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn measure(config: &BenchConfig) -> Result<BenchResult> {
    measure_with(config, |c| init_system(c.n_bodies, c.seed, c.precision, c.variant.layout))
}

/// [`measure`] with a caller-supplied initializer. Only `simulate` calls are
/// inside the timed region.
pub fn measure_with<F>(config: &BenchConfig, init: F) -> Result<BenchResult>
where
    F: FnOnce(&BenchConfig) -> Result<AnySystem>,
{
    config.validate()?;
    let start = init(config)?;
    let n = config.n_bodies;
    let steps = config.steps();

    for _ in 0..config.warmup_runs {
        std::hint::black_box(simulate_any(&start, &config.params, &config.variant)?);
    }

    let mut times = Vec::with_capacity(config.repetitions);
    let mut last = None;
    for _ in 0..config.repetitions {
        let t0 = Instant::now();
        let end = simulate_any(&start, &config.params, &config.variant)?;
        let elapsed = t0.elapsed().as_secs_f64();
        // Clock resolution floor; a zero reading cannot be converted to GFLOPS.
        times.push(elapsed.max(1e-9));
        last = Some(std::hint::black_box(end));
    }
    let last = last.expect("repetitions >= 1");

    let best = times.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let gflops_each = times.iter().map(|&t| gflops(n, steps, t)).collect::<Result<Vec<_>>>()?;
    let checksum = last.checksum();
    let status = if checksum.is_finite() {
        Status::Ok
    } else {
        Status::Error("non-finite checksum".into())
    };

    Ok(BenchResult {
        config: config.clone(),
        gflops_best: gflops(n, steps, best)?,
        gflops_mean: gflops(n, steps, mean)?,
        times_s: times,
        gflops_each,
        best_time_s: best,
        mean_time_s: mean,
        checksum,
        status,
        timestamp: Utc::now(),
        host_label: host_label(),
    })
}

/// Cross product of sweep axes sharing one set of physics and timing
/// settings. `variants` carry layout, math form and block; their thread
/// counts are replaced by each entry of `threads`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub n_values: Vec<usize>,
    pub threads: Vec<usize>,
    pub variants: Vec<KernelVariant>,
    pub precisions: Vec<Precision>,
    pub params: SimParams,
    pub seed: Seed,
    pub repetitions: usize,
    pub warmup_runs: usize,
    /// Keys already present in a results file; these are not re-run.
    pub completed: BTreeSet<ResultKey>,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            n_values: default_n_values(),
            threads: vec![1],
            variants: vec![KernelVariant::reference()],
            precisions: vec![Precision::Double],
            params: SimParams::default(),
            seed: Seed(42),
            repetitions: 5,
            warmup_runs: 1,
            completed: BTreeSet::new(),
        }
    }
}

/// Powers of two from 256 to 32768.
pub fn default_n_values() -> Vec<usize> {
    (8..=15).map(|p| 1usize << p).collect()
}

/// One cell of the sweep cross product.
#[derive(Clone, Debug, PartialEq)]
pub enum PlannedRun {
    Run(BenchConfig),
    /// Violates a variant invariant or was already completed.
    Skip { config: BenchConfig, reason: String },
}

impl SweepPlan {
    /// Every combination in execution order: variants, then precisions,
    /// then thread counts, then ascending n.
    pub fn combinations(&self) -> Vec<PlannedRun> {
        let mut n_values = self.n_values.clone();
        n_values.sort_unstable();
        n_values.dedup();
        let mut out = Vec::new();
        for template in &self.variants {
            for &precision in &self.precisions {
                for &threads in &self.threads {
                    for &n in &n_values {
                        let config = BenchConfig {
                            n_bodies: n,
                            params: self.params,
                            variant: template.with_threads(threads),
                            precision,
                            seed: self.seed,
                            repetitions: self.repetitions,
                            warmup_runs: self.warmup_runs,
                        };
                        if let Err(e) = config.variant.validate(n) {
                            out.push(PlannedRun::Skip {
                                config,
                                reason: e.to_string(),
                            });
                        } else if self.completed.contains(&config.key()) {
                            out.push(PlannedRun::Skip {
                                config,
                                reason: "already in results file".into(),
                            });
                        } else {
                            out.push(PlannedRun::Run(config));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn runnable(&self) -> Vec<BenchConfig> {
        self.combinations()
            .into_iter()
            .filter_map(|p| match p {
                PlannedRun::Run(c) => Some(c),
                PlannedRun::Skip { .. } => None,
            })
            .collect()
    }
}

/// Measures every runnable combination, handing each result to `sink` as
/// soon as it is available. A failing combination becomes an error row; a
/// failing sink aborts the sweep.
pub fn run_sweep<S>(plan: &SweepPlan, mut sink: S) -> Result<Vec<BenchResult>>
where
    S: FnMut(&BenchResult) -> Result<()>,
{
    run_sweep_with(plan, &mut sink, measure)
}

pub(crate) fn run_sweep_with<S, M>(plan: &SweepPlan, sink: &mut S, mut measure: M) -> Result<Vec<BenchResult>>
where
    S: FnMut(&BenchResult) -> Result<()>,
    M: FnMut(&BenchConfig) -> Result<BenchResult>,
{
    let mut results = Vec::new();
    for planned in plan.combinations() {
        let config = match planned {
            PlannedRun::Run(c) => c,
            PlannedRun::Skip { config, reason } => {
                info!(
                    "skipping {} n={} precision={}: {reason}",
                    config.variant, config.n_bodies, config.precision
                );
                continue;
            }
        };
        let result = match measure(&config) {
            Ok(r) => r,
            Err(e) => {
                warn!("{} n={} failed: {e}", config.variant, config.n_bodies);
                BenchResult::error(config, e.to_string())
            }
        };
        info!(
            "{} n={} {}: best {:.6}s, {:.3} GFLOPS, checksum {}",
            result.config.variant,
            result.config.n_bodies,
            result.config.precision,
            result.best_time_s,
            result.gflops_best,
            result.checksum
        );
        sink(&result)?;
        results.push(result);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MathForm;
    use crate::Layout;

    #[test]
    fn gflops_examples() {
        assert_eq!(gflops(1000, 100, 2.0).unwrap(), 1.0);
        let implied = gflops(524_288, 100, 360.7).unwrap();
        assert!((implied - 1524.0).abs() <= 1.0, "{implied}");
        assert!(gflops(10, 1, 0.0).is_err());
        assert!(gflops(10, 1, -1.0).is_err());
        assert!(gflops(10, 1, f64::NAN).is_err());
    }

    #[test]
    fn sweep_order() {
        let plan = SweepPlan {
            n_values: vec![64, 16, 32],
            variants: vec![KernelVariant::aos(), KernelVariant::soa(MathForm::ReciprocalMultiply)],
            ..SweepPlan::default()
        };
        let runs = plan.runnable();
        assert_eq!(runs.len(), 6);
        let got: Vec<_> = runs.iter().map(|c| (c.variant.layout, c.n_bodies)).collect();
        assert_eq!(
            got,
            vec![
                (Layout::Aos, 16),
                (Layout::Aos, 32),
                (Layout::Aos, 64),
                (Layout::Soa, 16),
                (Layout::Soa, 32),
                (Layout::Soa, 64)
            ]
        );
    }

    #[test]
    fn invalid_combinations_are_skipped() {
        let plan = SweepPlan {
            n_values: vec![16],
            threads: vec![1, 4],
            variants: vec![KernelVariant::aos()],
            ..SweepPlan::default()
        };
        let combos = plan.combinations();
        assert_eq!(combos.len(), 2);
        assert!(matches!(combos[0], PlannedRun::Run(_)));
        match &combos[1] {
            PlannedRun::Skip { reason, .. } => assert!(reason.contains("sequential")),
            other => panic!("expected skip, got {other:?}"),
        }
    }

    #[test]
    fn failing_combination_becomes_error_row() {
        let plan = SweepPlan {
            n_values: vec![8, 16],
            ..SweepPlan::default()
        };
        let mut seen = 0;
        let results = run_sweep_with(
            &plan,
            &mut |_: &BenchResult| {
                seen += 1;
                Ok(())
            },
            |c| {
                if c.n_bodies == 8 {
                    Err(NbodyError::InvalidArgument("boom".into()))
                } else {
                    measure(&BenchConfig { repetitions: 1, warmup_runs: 0, ..c.clone() })
                }
            },
        )
        .unwrap();
        assert_eq!(seen, 2);
        assert_eq!(results[0].status, Status::Error("invalid argument: boom".into()));
        assert!(results[1].status.is_ok());
    }

    #[test]
    fn status_round_trip() {
        for s in [Status::Ok, Status::Skipped, Status::Error("x y".into())] {
            assert_eq!(s.to_string().parse::<Status>().unwrap(), s);
        }
    }
}
