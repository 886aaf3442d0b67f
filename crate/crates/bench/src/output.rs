use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::experiment::{NewtonRecord, ResultRow};
use crate::BenchError;

pub const CSV_HEADER: [&str; 12] = [
    "problem",
    "K",
    "k",
    "variant",
    "iter",
    "boundary",
    "rel_err",
    "theta",
    "t_seq_s",
    "t_par_s",
    "speedup_meas",
    "speedup_theory",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub workers: usize,
    pub config: BTreeMap<String, BTreeMap<String, String>>,
    pub newton: Vec<NewtonRecord>,
}

impl Metadata {
    pub fn new(
        workers: usize,
        config: BTreeMap<String, BTreeMap<String, String>>,
        newton: Vec<NewtonRecord>,
    ) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            workers,
            config,
            newton,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
}

fn io(path: &Path, e: impl std::fmt::Display) -> BenchError {
    BenchError::Io(format!("{}: {e}", path.display()))
}

/// 17 significant digits, enough to read back the same `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

pub fn csv_record(row: &ResultRow) -> [String; 12] {
    [
        row.problem.clone(),
        float(row.coarse_step),
        float(row.k),
        row.variant.clone(),
        row.iter.to_string(),
        opt(row.boundary, |b| b.to_string()),
        opt(row.rel_err, float),
        opt(row.theta, float),
        opt(row.t_seq_s, float),
        opt(row.t_par_s, float),
        opt(row.speedup_meas, float),
        opt(row.speedup_theory, float),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    write_csv(rows, BufWriter::new(file)).map_err(|e| io(path, e))
}

pub fn emit_json(rows: &[ResultRow], metadata: &Metadata, path: &Path) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    let mut w = BufWriter::new(file);
    let doc = ResultsFile {
        metadata: metadata.clone(),
        rows: rows.to_vec(),
    };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| io(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io(path, e))
}

pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Rows of a results file. Files ending in `.json` are read as JSON, all
/// others as CSV.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, BenchError> {
    let file = File::open(path).map_err(|e| io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let doc: ResultsFile = serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| io(path, e))?;
        Ok(doc.rows)
    } else {
        read_csv(file).map_err(|e| io(path, e))
    }
}
