//! Command-line surface: `run`, `bench`, `validate`, `report`.
//!
//! Every option can also come from a `key = value` config file (`#`
//! comments, comma-separated lists); flags override the file, the file
//! overrides built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::error::NbodyError;
use crate::harness::{self, default_n_values, BenchResult, SweepPlan};
use crate::kernels::{simulate_any, KernelVariant, MathForm};
use crate::params::SimParams;
use crate::real::Precision;
use crate::report::render_report;
use crate::results::{completed_keys, format_sig17, CsvSink};
use crate::rng::Seed;
use crate::system::{init_system, Layout};
use crate::validation::{cross_validate, ValidationCase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "nbody", version, about = "All-pairs N-body kernels, benchmark sweeps, and validation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Simulate each selected configuration once and print its checksum.
    Run(Flags),
    /// Time a sweep and write results CSV.
    Bench(Flags),
    /// Compare variants against the brute-force oracle.
    Validate(Flags),
    /// Render markdown tables from a results CSV.
    Report {
        /// Results CSV (defaults to --out, then results.csv).
        csv: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// Body counts, comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Thread counts, comma-separated.
    #[arg(long)]
    threads: Option<String>,
    /// Layouts: aos, soa, or all.
    #[arg(long)]
    variant: Option<String>,
    /// single, double, or both.
    #[arg(long)]
    precision: Option<String>,
    /// j-tile sizes, comma-separated; `none` for unblocked.
    #[arg(long)]
    block: Option<String>,
    /// pow, recip, or both.
    #[arg(long)]
    math: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "softening-sq")]
    softening_sq: Option<String>,
    /// Gravitational constant.
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Measured repetitions per configuration.
    #[arg(long)]
    reps: Option<String>,
    /// Unmeasured warmup runs per configuration.
    #[arg(long)]
    warmup: Option<String>,
    /// Results CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip configurations already recorded as ok in --out.
    #[arg(long)]
    resume: bool,
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Bench,
    Validate,
    Report,
}

/// Fully resolved invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub plan: SweepPlan,
    pub out: PathBuf,
    pub resume: bool,
    /// Input CSV for `report`.
    pub report_input: Option<PathBuf>,
}

impl fmt::Display for CliConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.plan;
        let join = |v: Vec<String>| v.join(",");
        write!(
            f,
            "command={:?} n={} threads={} variants={} precision={} steps={} dt={} softening_sq={} g={} seed={} reps={} warmup={} out={} resume={}",
            self.command,
            join(p.n_values.iter().map(|n| n.to_string()).collect()),
            join(p.threads.iter().map(|t| t.to_string()).collect()),
            join(p.variants.iter().map(|v| v.label()).collect()),
            join(p.precisions.iter().map(|p| p.to_string()).collect()),
            p.params.steps,
            p.params.dt,
            p.params.softening_sq,
            p.params.gravitational_constant,
            p.seed.0,
            p.repetitions,
            p.warmup_runs,
            self.out.display(),
            self.resume,
        )
    }
}

/// Usage problem, or a help/version request (`exit_code` 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

impl UsageError {
    fn new(message: impl Into<String>) -> Self {
        UsageError {
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

const CONFIG_KEYS: [&str; 15] = [
    "n",
    "threads",
    "variant",
    "precision",
    "block",
    "math",
    "steps",
    "dt",
    "softening-sq",
    "g",
    "seed",
    "reps",
    "warmup",
    "out",
    "resume",
];

/// Parses a `key = value` config file. Underscores in keys are accepted in
/// place of dashes.
pub fn parse_config_file(text: &str, path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            UsageError::new(format!("{}:{}: expected `key = value`", path.display(), idx + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(UsageError::new(format!(
                "{}:{}: unknown config key `{key}`",
                path.display(),
                idx + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    flags: Flags,
    file: BTreeMap<String, String>,
}

impl Resolver {
    /// Raw text for `key` with its source label (for diagnostics).
    fn raw(&self, key: &str) -> Option<(String, String)> {
        let flag = match key {
            "n" => self.flags.n.clone(),
            "threads" => self.flags.threads.clone(),
            "variant" => self.flags.variant.clone(),
            "precision" => self.flags.precision.clone(),
            "block" => self.flags.block.clone(),
            "math" => self.flags.math.clone(),
            "steps" => self.flags.steps.clone(),
            "dt" => self.flags.dt.clone(),
            "softening-sq" => self.flags.softening_sq.clone(),
            "g" => self.flags.g.clone(),
            "seed" => self.flags.seed.clone(),
            "reps" => self.flags.reps.clone(),
            "warmup" => self.flags.warmup.clone(),
            _ => None,
        };
        flag.map(|v| (format!("--{key}"), v))
            .or_else(|| self.file.get(key).map(|v| (format!("config key `{key}`"), v.clone())))
    }

    fn scalar<T: FromStr>(&self, key: &str, default: T) -> Result<T, UsageError> {
        match self.raw(key) {
            None => Ok(default),
            Some((src, v)) => v
                .trim()
                .parse()
                .map_err(|_| UsageError::new(format!("{src}: cannot parse `{v}`"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, UsageError> {
        match self.raw(key) {
            None => Ok(default),
            Some((src, v)) => parse_list(&src, &v),
        }
    }
}

fn parse_list<T: FromStr>(src: &str, text: &str) -> Result<Vec<T>, UsageError> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(UsageError::new(format!("{src}: malformed list `{text}`")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse()
                .map_err(|_| UsageError::new(format!("{src}: invalid list element `{s}` in `{text}`")))
        })
        .collect()
}

fn positive(src: &str, values: &[usize]) -> Result<(), UsageError> {
    if values.contains(&0) {
        return Err(UsageError::new(format!("{src}: values must be at least 1")));
    }
    Ok(())
}

/// Parses `argv` (including the program name) into a fully resolved
/// configuration, or a diagnostic naming the offending flag.
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let exit_code = match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                EXIT_OK
            }
            _ => EXIT_USAGE,
        };
        UsageError {
            message: e.render().to_string(),
            exit_code,
        }
    })?;

    let (command, flags, report_csv) = match cli.command {
        Sub::Run(f) => (Command::Run, f, None),
        Sub::Bench(f) => (Command::Bench, f, None),
        Sub::Validate(f) => (Command::Validate, f, None),
        Sub::Report { csv, flags } => (Command::Report, flags, csv),
    };

    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError::new(format!("--config {}: {e}", path.display())))?;
            parse_config_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let r = Resolver { flags, file };
    resolve(command, &r, report_csv)
}

fn resolve(command: Command, r: &Resolver, report_csv: Option<PathBuf>) -> Result<CliConfig, UsageError> {
    let validating = command == Command::Validate;
    let defaults = SimParams::default();

    let n_default = match command {
        Command::Bench => default_n_values(),
        _ => vec![1024],
    };
    let n_values: Vec<usize> = r.list("n", n_default)?;
    positive("--n", &n_values)?;

    let threads: Vec<usize> = r.list("threads", if validating { vec![1, 2, 4] } else { vec![1] })?;
    positive("--threads", &threads)?;

    let layouts = match r.raw("variant") {
        None if validating => vec![Layout::Aos, Layout::Soa],
        None => vec![Layout::Soa],
        Some((_, v)) if v.trim() == "all" => vec![Layout::Aos, Layout::Soa],
        Some((src, v)) => parse_list::<Layout>(&src, &v)?,
    };
    let explicit_layouts = r.raw("variant").map(|(_, v)| v.trim() != "all").unwrap_or(false);

    let precisions = match r.raw("precision") {
        None if validating => Precision::ALL.to_vec(),
        None => vec![Precision::Double],
        Some((_, v)) if v.trim() == "both" => Precision::ALL.to_vec(),
        Some((src, v)) => vec![v
            .trim()
            .parse::<Precision>()
            .map_err(|e| UsageError::new(format!("{src}: {e}")))?],
    };

    let maths = match r.raw("math") {
        None if validating => MathForm::ALL.to_vec(),
        None => vec![MathForm::PowThenDivide],
        Some((_, v)) if v.trim() == "both" => MathForm::ALL.to_vec(),
        Some((src, v)) => vec![v
            .trim()
            .parse::<MathForm>()
            .map_err(|e| UsageError::new(format!("{src}: {e}")))?],
    };

    let blocks: Vec<Option<usize>> = match r.raw("block") {
        None if validating => vec![None, Some(8), Some(64), Some(256)],
        None => vec![None],
        Some((src, v)) => {
            let items: Vec<String> = parse_list(&src, &v)?;
            items
                .iter()
                .map(|s| match s.as_str() {
                    "none" | "0" => Ok(None),
                    s => s
                        .parse::<usize>()
                        .map(Some)
                        .map_err(|_| UsageError::new(format!("{src}: invalid block size `{s}`"))),
                })
                .collect::<Result<_, _>>()?
        }
    };

    // Expand the variant templates; a layout with no valid combination at
    // all is a usage error, otherwise invalid cells are skipped at sweep time.
    let mut variants = Vec::new();
    for &layout in &layouts {
        let mut any_valid = false;
        for &math in &maths {
            for &block in &blocks {
                let template = KernelVariant {
                    layout,
                    math_form: math,
                    block,
                    threads: 1,
                };
                let valid_somewhere = threads.iter().any(|&t| template.with_threads(t).check().is_ok());
                if valid_somewhere {
                    any_valid = true;
                    variants.push(template);
                } else if let Err(e) = template.with_threads(threads[0]).check() {
                    info!("dropping {}: {e}", template.label());
                }
            }
        }
        if !any_valid && (explicit_layouts || layouts.len() == 1) {
            let reason = maths
                .iter()
                .flat_map(|&m| blocks.iter().map(move |&b| (m, b)))
                .flat_map(|(m, b)| threads.iter().map(move |&t| (m, b, t)))
                .find_map(|(math_form, block, threads)| {
                    KernelVariant {
                        layout,
                        math_form,
                        block,
                        threads,
                    }
                    .check()
                    .err()
                })
                .map(|e| e.to_string())
                .unwrap_or_default();
            return Err(UsageError::new(format!(
                "--variant {layout}: no valid combination with the given --threads/--math/--block ({reason})"
            )));
        }
    }
    if variants.is_empty() {
        return Err(UsageError::new("--variant: no valid kernel variant selected"));
    }

    let steps_default = if validating { 10 } else { defaults.steps };
    let params = SimParams {
        gravitational_constant: r.scalar("g", defaults.gravitational_constant)?,
        dt: r.scalar("dt", defaults.dt)?,
        softening_sq: r.scalar("softening-sq", defaults.softening_sq)?,
        steps: r.scalar("steps", steps_default)?,
    };
    params.validate().map_err(|e| UsageError::new(e.to_string()))?;

    let repetitions: usize = r.scalar("reps", 5)?;
    positive("--reps", &[repetitions])?;
    let warmup_runs: usize = r.scalar("warmup", 1)?;
    let seed = Seed(r.scalar("seed", 42u64)?);

    let out = r
        .flags
        .out
        .clone()
        .or_else(|| r.file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let resume = r.flags.resume
        || match r.file.get("resume").map(|s| s.as_str()) {
            None | Some("false") | Some("0") | Some("no") => false,
            Some("true") | Some("1") | Some("yes") => true,
            Some(other) => {
                return Err(UsageError::new(format!("config key `resume`: cannot parse `{other}`")));
            }
        };

    let report_input = if command == Command::Report {
        Some(report_csv.unwrap_or_else(|| out.clone()))
    } else {
        None
    };

    Ok(CliConfig {
        command,
        plan: SweepPlan {
            n_values,
            threads,
            variants,
            precisions,
            params,
            seed,
            repetitions,
            warmup_runs,
            completed: Default::default(),
        },
        out,
        resume,
        report_input,
    })
}

/// Executes a parsed configuration and returns the process exit code.
pub fn execute(config: &CliConfig) -> i32 {
    info!("resolved configuration: {config}");
    let outcome = match config.command {
        Command::Run => cmd_run(config),
        Command::Bench => cmd_bench(config),
        Command::Validate => cmd_validate(config),
        Command::Report => cmd_report(config),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Parses and executes `argv`; what the binary's `main` calls.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => execute(&config),
        Err(e) => {
            if e.exit_code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprint!("{}", e.message);
                if !e.message.ends_with('\n') {
                    eprintln!();
                }
            }
            e.exit_code
        }
    }
}

fn cmd_run(config: &CliConfig) -> Result<i32, NbodyError> {
    println!("variant,threads,precision,n_bodies,steps,time_s,gflops,checksum");
    for c in config.plan.runnable() {
        let sys = init_system(c.n_bodies, c.seed, c.precision, c.variant.layout)?;
        let t0 = Instant::now();
        let end = simulate_any(&sys, &c.params, &c.variant)?;
        let secs = t0.elapsed().as_secs_f64().max(1e-9);
        println!(
            "{},{},{},{},{},{:.6},{:.3},{}",
            c.variant.label(),
            c.variant.threads,
            c.precision,
            c.n_bodies,
            c.steps(),
            secs,
            harness::gflops(c.n_bodies, c.steps(), secs)?,
            format_sig17(end.checksum())
        );
    }
    Ok(EXIT_OK)
}

fn cmd_bench(config: &CliConfig) -> Result<i32, NbodyError> {
    let mut plan = config.plan.clone();
    if config.resume {
        plan.completed = completed_keys(&config.out)?;
        info!("resume: {} completed configurations in {}", plan.completed.len(), config.out.display());
    }
    let mut sink = CsvSink::open(&config.out)?;
    let results = harness::run_sweep(&plan, |r: &BenchResult| sink.write(r))?;
    let errors = results.iter().filter(|r| !r.status.is_ok()).count();
    eprintln!(
        "{} rows written to {} ({} errors)",
        results.len(),
        config.out.display(),
        errors
    );
    Ok(if errors == 0 { EXIT_OK } else { EXIT_RUNTIME })
}

fn cmd_validate(config: &CliConfig) -> Result<i32, NbodyError> {
    let plan = &config.plan;
    let mut all_passed = true;
    let mut n_values = plan.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    for n in n_values {
        let cases: Vec<ValidationCase> = plan
            .runnable()
            .into_iter()
            .filter(|c| c.n_bodies == n)
            .map(|c| ValidationCase::new(c.variant, c.precision))
            .collect();
        let report = cross_validate(n, plan.params.steps, plan.seed, &plan.params, &cases)?;
        print!("{}", report.render());
        all_passed &= report.passed();
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_report(config: &CliConfig) -> Result<i32, NbodyError> {
    let path = config.report_input.as_ref().unwrap_or(&config.out);
    print!("{}", render_report(path)?);
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<CliConfig, UsageError> {
        parse_args(std::iter::once("nbody").chain(args.split_whitespace()))
    }

    #[test]
    fn bench_cross_product() {
        let c = parse("bench --n 256,512 --threads 1,4 --variant soa --precision double").unwrap();
        assert_eq!(c.plan.runnable().len(), 4);
    }

    #[test]
    fn aos_with_threads_is_usage_error() {
        let e = parse("bench --variant aos --threads 4").unwrap_err();
        assert_eq!(e.exit_code, EXIT_USAGE);
        assert!(e.message.contains("--variant"), "{}", e.message);
    }

    #[test]
    fn all_variants_skip_invalid_cells() {
        let c = parse("bench --n 64 --variant all --threads 1,4").unwrap();
        // aos at T=1 plus soa at T=1 and T=4.
        assert_eq!(c.plan.runnable().len(), 3);
    }

    #[test]
    fn unknown_flag_and_bad_lists() {
        assert_eq!(parse("bench --bogus 1").unwrap_err().exit_code, EXIT_USAGE);
        let e = parse("bench --n 256,,512").unwrap_err();
        assert!(e.message.contains("--n"));
        let e = parse("bench --threads 0").unwrap_err();
        assert!(e.message.contains("--threads"));
        let e = parse("bench --precision quad").unwrap_err();
        assert!(e.message.contains("--precision"));
        let e = parse("bench --steps 0").unwrap_err();
        assert!(e.message.contains("steps"));
    }

    #[test]
    fn help_is_not_an_error_exit() {
        assert_eq!(parse("--help").unwrap_err().exit_code, EXIT_OK);
    }

    #[test]
    fn defaults_resolve() {
        let c = parse("bench").unwrap();
        let p = &c.plan;
        assert_eq!(p.n_values, vec![256, 512, 1024, 2048, 4096, 8192, 16384, 32768]);
        assert_eq!(p.params, SimParams::default());
        assert_eq!((p.seed, p.repetitions, p.warmup_runs), (Seed(42), 5, 1));
        assert_eq!(p.precisions, vec![Precision::Double]);
        assert_eq!(c.out, PathBuf::from("results.csv"));
    }

    #[test]
    fn config_file_and_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.conf");
        std::fs::write(
            &path,
            "# sweep\nsteps = 100\nn = 128, 256\nsoftening_sq = 1e-6  # wider\nprecision = both\n",
        )
        .unwrap();
        let c = parse(&format!("bench --config {} --steps 10", path.display())).unwrap();
        assert_eq!(c.plan.params.steps, 10);
        assert_eq!(c.plan.n_values, vec![128, 256]);
        assert_eq!(c.plan.params.softening_sq, 1e-6);
        assert_eq!(c.plan.precisions, Precision::ALL.to_vec());

        std::fs::write(&path, "stepz = 3\n").unwrap();
        let e = parse(&format!("bench --config {}", path.display())).unwrap_err();
        assert!(e.message.contains("stepz"));
    }

    #[test]
    fn block_and_math_lists() {
        let c = parse("bench --n 512 --block none,64 --math both").unwrap();
        let labels: Vec<_> = c.plan.variants.iter().map(|v| v.label()).collect();
        assert_eq!(labels, vec!["soa", "soa-b64", "soa-recip", "soa-recip-b64"]);
    }
}
