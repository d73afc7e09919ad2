//! Per-run CSV rows.

use std::fs::OpenOptions;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// One mapping run. Column order is the field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub n: u32,
    pub in_g: usize,
    pub in_d: usize,
    pub arch: String,
    pub strategy: String,
    pub seed: u64,
    pub out_g: usize,
    pub out_d: usize,
    pub runtime_s: f64,
    pub expanded_nodes: u64,
    /// `pass`, `fail` or `skipped`.
    pub verification: String,
}

pub const HEADER: [&str; 12] = [
    "benchmark",
    "n",
    "in_g",
    "in_d",
    "arch",
    "strategy",
    "seed",
    "out_g",
    "out_d",
    "runtime_s",
    "expanded_nodes",
    "verification",
];

/// Appends `record`, writing the header first if the file is new or empty.
pub fn append(path: &Path, record: &RunRecord) -> io::Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    writer.serialize(record)?;
    writer.flush()
}

/// Reads every row of a stats file.
pub fn read_all(path: &Path) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
