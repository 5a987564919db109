//! CSV result tables.
//!
//! Floats are written with Rust's `Display`, which is the shortest decimal
//! string that parses back to the same value, so parse-then-write reproduces a
//! file byte for byte.

use std::io::{Read, Write};

use crate::simulation::RegretSummary;

pub const HEADER: [&str; 10] = [
    "experiment_id",
    "policy",
    "environment",
    "n",
    "t",
    "mean_cum_regret",
    "stderr",
    "ci95",
    "episodes",
    "master_seed",
];

/// One row per (experiment, checkpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub experiment_id: String,
    pub policy: String,
    pub environment: String,
    pub n: usize,
    pub t: usize,
    pub mean_cum_regret: f64,
    pub stderr: f64,
    pub ci95: f64,
    pub episodes: usize,
    pub master_seed: u64,
}

impl OutputRecord {
    pub fn from_summary(summary: &RegretSummary) -> Vec<Self> {
        summary
            .checkpoints
            .iter()
            .map(|c| OutputRecord {
                experiment_id: summary.experiment_id.clone(),
                policy: summary.policy.clone(),
                environment: summary.environment.clone(),
                n: summary.horizon,
                t: c.t,
                mean_cum_regret: c.mean,
                stderr: c.stderr,
                ci95: c.ci95,
                episodes: summary.episodes,
                master_seed: summary.master_seed,
            })
            .collect()
    }

    fn fields(&self) -> [String; 10] {
        [
            self.experiment_id.clone(),
            self.policy.clone(),
            self.environment.clone(),
            self.n.to_string(),
            self.t.to_string(),
            self.mean_cum_regret.to_string(),
            self.stderr.to_string(),
            self.ci95.to_string(),
            self.episodes.to_string(),
            self.master_seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsvError {
    /// The header is not the result-table schema.
    Schema(String),
    /// A row does not parse.
    Row(String),
    Io(String),
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Schema(m) => write!(f, "schema mismatch: {m}"),
            CsvError::Row(m) => write!(f, "bad row: {m}"),
            CsvError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CsvError {}

pub fn write_csv<W: Write>(out: W, records: &[OutputRecord]) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| CsvError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| CsvError::Io(e.to_string()))
}

pub fn to_csv_string(records: &[OutputRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("records are UTF-8")
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T, CsvError> {
    let raw = &row[i];
    raw.parse().map_err(|_| {
        CsvError::Row(format!("line {line}: column `{}` has invalid value {raw:?}", HEADER[i]))
    })
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<OutputRecord>, CsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| CsvError::Io(e.to_string()))?.clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CsvError::Schema(format!(
            "expected columns {}, found {}",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| CsvError::Row(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(OutputRecord {
            experiment_id: row[0].to_string(),
            policy: row[1].to_string(),
            environment: row[2].to_string(),
            n: parse_field(&row, 3, line)?,
            t: parse_field(&row, 4, line)?,
            mean_cum_regret: parse_field(&row, 5, line)?,
            stderr: parse_field(&row, 6, line)?,
            ci95: parse_field(&row, 7, line)?,
            episodes: parse_field(&row, 8, line)?,
            master_seed: parse_field(&row, 9, line)?,
        });
    }
    Ok(out)
}
