//! Results CSV: exact header, one row per [`BenchResult`], append and resume
//! safe.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};

use crate::error::{NbodyError, Result};
use crate::harness::{BenchResult, ResultKey, Status};
use crate::real::Precision;

pub const CSV_HEADER: &str = "variant,layout,math_form,block_size,threads,precision,n_bodies,steps,seed,repetitions,best_time_s,mean_time_s,gflops_best,gflops_mean,checksum,status,host_label,timestamp_utc";

const COLUMNS: usize = 18;

/// `printf("%.17g")`: 17 significant digits, trailing zeros trimmed,
/// exponent form below 1e-4 and from 1e17.
pub fn format_sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest representation that parses back to the same `f64`; empty for NaN.
fn exact(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

fn sanitize(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn format_row(r: &BenchResult) -> String {
    let c = &r.config;
    let v = &c.variant;
    let checksum = if r.checksum.is_nan() && !r.status.is_ok() {
        String::new()
    } else {
        format_sig17(r.checksum)
    };
    [
        v.label(),
        v.layout.to_string(),
        v.math_form.to_string(),
        v.block.map(|b| b.to_string()).unwrap_or_default(),
        v.threads.to_string(),
        c.precision.to_string(),
        c.n_bodies.to_string(),
        c.steps().to_string(),
        c.seed.0.to_string(),
        c.repetitions.to_string(),
        exact(r.best_time_s),
        exact(r.mean_time_s),
        exact(r.gflops_best),
        exact(r.gflops_mean),
        checksum,
        sanitize(&r.status.to_string()),
        sanitize(&r.host_label),
        r.timestamp.to_rfc3339_opts(SecondsFormat::Micros, true),
    ]
    .join(",")
}

/// Appends rows to a results file, writing the header first when the file
/// is new or empty. An existing file must start with the exact header.
pub struct CsvSink {
    path: PathBuf,
    file: File,
}

impl CsvSink {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let has_content = match std::fs::metadata(&path) {
            Ok(m) => m.len() > 0,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => false,
            Err(e) => return Err(NbodyError::io(&path, e)),
        };
        if has_content {
            let f = File::open(&path).map_err(|e| NbodyError::io(&path, e))?;
            let mut first = String::new();
            BufReader::new(f)
                .read_line(&mut first)
                .map_err(|e| NbodyError::io(&path, e))?;
            if first.trim_end() != CSV_HEADER {
                return Err(NbodyError::Parse {
                    path,
                    line: 1,
                    message: "existing file does not start with the results header".into(),
                });
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| NbodyError::io(&path, e))?;
        if !has_content {
            writeln!(file, "{CSV_HEADER}").map_err(|e| NbodyError::io(&path, e))?;
        } else {
            ensure_trailing_newline(&path, &mut file)?;
        }
        Ok(CsvSink { path, file })
    }

    pub fn write(&mut self, result: &BenchResult) -> Result<()> {
        writeln!(self.file, "{}", format_row(result)).map_err(|e| NbodyError::io(&self.path, e))?;
        self.file.flush().map_err(|e| NbodyError::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn ensure_trailing_newline(path: &Path, file: &mut File) -> Result<()> {
    let content = std::fs::read(path).map_err(|e| NbodyError::io(path, e))?;
    if content.last() != Some(&b'\n') {
        writeln!(file).map_err(|e| NbodyError::io(path, e))?;
    }
    Ok(())
}

/// Writes `results` to `path` (header first if the file is new).
pub fn emit_csv(results: &[BenchResult], path: impl AsRef<Path>) -> Result<()> {
    let mut sink = CsvSink::open(path)?;
    for r in results {
        sink.write(r)?;
    }
    Ok(())
}

/// One parsed results row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub line: u64,
    pub variant: String,
    pub layout: String,
    pub math_form: String,
    pub block_size: Option<usize>,
    pub threads: usize,
    pub precision: Precision,
    pub n_bodies: usize,
    pub steps: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub best_time_s: f64,
    pub mean_time_s: f64,
    pub gflops_best: f64,
    pub gflops_mean: f64,
    pub checksum: f64,
    pub status: Status,
    pub host_label: String,
    pub timestamp_utc: Option<DateTime<Utc>>,
}

impl CsvRow {
    pub fn key(&self) -> ResultKey {
        ResultKey {
            variant: self.variant.clone(),
            n_bodies: self.n_bodies,
            threads: self.threads,
            precision: self.precision,
        }
    }
}

fn parse_float(s: &str) -> std::result::Result<f64, String> {
    match s {
        "" | "nan" | "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| format!("`{s}` is not a number")),
    }
}

fn parse_record(rec: &csv::StringRecord, line: u64) -> std::result::Result<CsvRow, String> {
    if rec.len() != COLUMNS {
        return Err(format!("expected {COLUMNS} fields, found {}", rec.len()));
    }
    let int = |i: usize, name: &str| -> std::result::Result<usize, String> {
        rec[i].parse().map_err(|_| format!("{name}: `{}` is not an integer", &rec[i]))
    };
    let float = |i: usize, name: &str| parse_float(&rec[i]).map_err(|e| format!("{name}: {e}"));
    Ok(CsvRow {
        line,
        variant: rec[0].to_string(),
        layout: rec[1].to_string(),
        math_form: rec[2].to_string(),
        block_size: if rec[3].is_empty() { None } else { Some(int(3, "block_size")?) },
        threads: int(4, "threads")?,
        precision: rec[5].parse()?,
        n_bodies: int(6, "n_bodies")?,
        steps: int(7, "steps")?,
        seed: rec[8].parse().map_err(|_| format!("seed: `{}` is not a u64", &rec[8]))?,
        repetitions: int(9, "repetitions")?,
        best_time_s: float(10, "best_time_s")?,
        mean_time_s: float(11, "mean_time_s")?,
        gflops_best: float(12, "gflops_best")?,
        gflops_mean: float(13, "gflops_mean")?,
        checksum: float(14, "checksum")?,
        status: rec[15].parse()?,
        host_label: rec[16].to_string(),
        timestamp_utc: if rec[17].is_empty() {
            None
        } else {
            Some(
                DateTime::parse_from_rfc3339(&rec[17])
                    .map_err(|e| format!("timestamp_utc: {e}"))?
                    .with_timezone(&Utc),
            )
        },
    })
}

/// Parses a results file; any malformed row is reported with its line.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| NbodyError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: u64, message: String| NbodyError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    let mut seen_header = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if !seen_header {
            let header = rec.iter().collect::<Vec<_>>().join(",");
            if header != CSV_HEADER {
                return Err(parse_err(line, "missing or unexpected header".into()));
            }
            seen_header = true;
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        rows.push(parse_record(&rec, line).map_err(|m| parse_err(line, m))?);
    }
    if !seen_header {
        return Err(parse_err(1, "empty file".into()));
    }
    Ok(rows)
}

/// Keys of `ok` rows in `path`; empty if the file does not exist.
pub fn completed_keys(path: impl AsRef<Path>) -> Result<BTreeSet<ResultKey>> {
    let path = path.as_ref();
    if !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(false) {
        return Ok(BTreeSet::new());
    }
    Ok(read_csv(path)?
        .into_iter()
        .filter(|r| r.status.is_ok())
        .map(|r| r.key())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_matches_printf() {
        // Expected strings from Python's '%.17g' % x.
        let cases: [(f64, &str); 9] = [
            (21.0, "21"),
            (0.1, "0.10000000000000001"),
            (1059.746972576692, "1059.7469725766921"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e17, "1.5e+17"),
            (123456789012345678.0, "1.2345678901234568e+17"),
            (0.0001, "0.0001"),
            (-2.5, "-2.5"),
            (0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_sig17(x), s, "{x}");
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_has_eighteen_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), COLUMNS);
    }
}
