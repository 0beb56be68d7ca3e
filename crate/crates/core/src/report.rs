//! Markdown tables from a results CSV: GFLOPS by N for every configuration,
//! plus SoA/AoS, single/double, and thread-speedup ratios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::real::Precision;
use crate::results::{read_csv, CsvRow};

/// Row identity shared by all tables: variant label, threads, precision.
pub type ConfigKey = (String, usize, Precision);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub n_values: Vec<usize>,
    /// Best-of-R GFLOPS per configuration and N.
    pub gflops: BTreeMap<ConfigKey, BTreeMap<usize, f64>>,
    /// `gflops(variant) / gflops(aos)` at T = 1, keyed by (variant, precision).
    pub soa_over_aos: BTreeMap<(String, Precision), BTreeMap<usize, f64>>,
    /// `gflops_single / gflops_double`, keyed by (variant, threads).
    pub single_over_double: BTreeMap<(String, usize), BTreeMap<usize, f64>>,
    /// `time(T = 1) / time(T)`, keyed by (variant, precision, T).
    pub speedup: BTreeMap<(String, Precision, usize), BTreeMap<usize, f64>>,
    /// `speedup / T`.
    pub efficiency: BTreeMap<(String, Precision, usize), BTreeMap<usize, f64>>,
}

/// Builds the ratio tables from `ok` rows; later rows for the same
/// configuration and N replace earlier ones.
pub fn build_report(rows: &[CsvRow]) -> Report {
    let mut best: BTreeMap<(ConfigKey, usize), &CsvRow> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status.is_ok()) {
        best.insert(((r.variant.clone(), r.threads, r.precision), r.n_bodies), r);
    }
    let n_values: Vec<usize> = best
        .keys()
        .map(|(_, n)| *n)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut report = Report {
        n_values,
        ..Report::default()
    };
    for ((cfg, n), r) in &best {
        report.gflops.entry(cfg.clone()).or_default().insert(*n, r.gflops_best);
    }

    for ((cfg, n), r) in &best {
        let (variant, threads, precision) = cfg;
        if *threads == 1 && variant != "aos" {
            if let Some(aos) = best.get(&(("aos".to_string(), 1, *precision), *n)) {
                report
                    .soa_over_aos
                    .entry((variant.clone(), *precision))
                    .or_default()
                    .insert(*n, r.gflops_best / aos.gflops_best);
            }
        }
        if *precision == Precision::Single {
            if let Some(d) = best.get(&((variant.clone(), *threads, Precision::Double), *n)) {
                report
                    .single_over_double
                    .entry((variant.clone(), *threads))
                    .or_default()
                    .insert(*n, r.gflops_best / d.gflops_best);
            }
        }
        if let Some(base) = best.get(&((variant.clone(), 1, *precision), *n)) {
            let s = base.best_time_s / r.best_time_s;
            let key = (variant.clone(), *precision, *threads);
            report.speedup.entry(key.clone()).or_default().insert(*n, s);
            report.efficiency.entry(key).or_default().insert(*n, s / *threads as f64);
        }
    }
    report
}

fn header(out: &mut String, lead: &[&str], n_values: &[usize]) {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    cols.extend(n_values.iter().map(|n| format!("N={n}")));
    let _ = writeln!(out, "| {} |", cols.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(cols.len()));
}

fn cells(values: &BTreeMap<usize, f64>, n_values: &[usize], decimals: usize) -> String {
    n_values
        .iter()
        .map(|n| match values.get(n) {
            Some(v) => format!("{v:.decimals$}"),
            None => "-".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

impl Report {
    pub fn to_markdown(&self) -> String {
        let ns = &self.n_values;
        let mut out = String::new();
        let _ = writeln!(out, "## GFLOPS (best of R)\n");
        header(&mut out, &["variant", "threads", "precision"], ns);
        for ((v, t, p), vals) in &self.gflops {
            let _ = writeln!(out, "| {v} | {t} | {p} | {} |", cells(vals, ns, 3));
        }

        let _ = writeln!(out, "\n## SoA / AoS throughput (T=1)\n");
        if self.soa_over_aos.is_empty() {
            let _ = writeln!(out, "_no aos baseline rows_");
        } else {
            header(&mut out, &["variant", "precision"], ns);
            for ((v, p), vals) in &self.soa_over_aos {
                let _ = writeln!(out, "| {v} | {p} | {} |", cells(vals, ns, 3));
            }
        }

        let _ = writeln!(out, "\n## Single / double throughput\n");
        if self.single_over_double.is_empty() {
            let _ = writeln!(out, "_no matching single/double rows_");
        } else {
            header(&mut out, &["variant", "threads"], ns);
            for ((v, t), vals) in &self.single_over_double {
                let _ = writeln!(out, "| {v} | {t} | {} |", cells(vals, ns, 3));
            }
        }

        let _ = writeln!(out, "\n## Speedup over T=1 (time ratio)\n");
        header(&mut out, &["variant", "precision", "threads"], ns);
        for ((v, p, t), vals) in &self.speedup {
            let _ = writeln!(out, "| {v} | {p} | {t} | {} |", cells(vals, ns, 3));
        }

        let _ = writeln!(out, "\n## Parallel efficiency (speedup / T)\n");
        header(&mut out, &["variant", "precision", "threads"], ns);
        for ((v, p, t), vals) in &self.efficiency {
            let _ = writeln!(out, "| {v} | {p} | {t} | {} |", cells(vals, ns, 3));
        }
        out
    }
}

pub fn render_report(csv_path: impl AsRef<Path>) -> Result<String> {
    let rows = read_csv(csv_path)?;
    Ok(build_report(&rows).to_markdown())
}
