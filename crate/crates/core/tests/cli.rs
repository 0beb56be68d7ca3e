use std::fs;
use std::process::{Command, Output};

use nbody::cli::{EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use nbody::{read_csv, Precision};

fn nbody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbody"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn nbody")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_prints_golden_checksum() {
    let o = nbody(&["run", "--n", "256", "--steps", "10", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let out = stdout(&o);
    let line = out.lines().nth(1).expect("data line");
    assert!(line.starts_with("soa,1,double,256,10,"), "{line}");
    assert!(line.ends_with(",382.17486805124184"), "{line}");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["bench", "--variant", "aos", "--threads", "4"][..],
        &["run", "--steps", "0"],
        &["run", "--precision", "quad"],
        &["run", "--n", "1,x"],
        &["frobnicate"],
    ] {
        let o = nbody(args);
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let o = nbody(&["--help"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(stdout(&o).contains("bench"));
}

#[test]
fn validate_passes_small_ladder() {
    let o = nbody(&["validate", "--n", "64", "--steps", "3", "--threads", "1,2"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
    assert!(stdout(&o).contains("soa-recip-b8"));
}

#[test]
fn bench_resume_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let out_s = out.to_str().unwrap();
    let args = [
        "bench", "--n", "32,64", "--threads", "1,2", "--variant", "soa", "--precision", "both", "--steps", "2", "--reps",
        "2", "--warmup", "0", "--out", out_s,
    ];
    assert_eq!(nbody(&args).status.code(), Some(EXIT_OK));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.status.is_ok()));
    assert_eq!(rows.iter().filter(|r| r.precision == Precision::Single).count(), 4);

    let mut resume = args.to_vec();
    resume.push("--resume");
    assert_eq!(nbody(&resume).status.code(), Some(EXIT_OK));
    assert_eq!(read_csv(&out).unwrap().len(), 8);

    let report = nbody(&["report", out_s]);
    assert_eq!(report.status.code(), Some(EXIT_OK));
    let md = stdout(&report);
    assert!(md.contains("## Speedup over T=1"));
    assert!(md.contains("## Single / double throughput"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# run settings\nsteps = 100\nn = 256\nseed = 42\n").unwrap();
    let o = nbody(&["run", "--config", cfg.to_str().unwrap(), "--steps", "10"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",382.17486805124184"));

    fs::write(&cfg, "stepz = 3\n").unwrap();
    assert_eq!(nbody(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn runtime_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(nbody(&["report", missing.to_str().unwrap()]).status.code(), Some(EXIT_RUNTIME));

    let foreign = dir.path().join("foreign.csv");
    fs::write(&foreign, "a,b,c\n1,2,3\n").unwrap();
    let o = nbody(&["bench", "--n", "16", "--steps", "1", "--out", foreign.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_RUNTIME));
    assert_eq!(fs::read_to_string(&foreign).unwrap(), "a,b,c\n1,2,3\n");
}
