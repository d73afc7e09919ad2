//! Repeated mapping of a corpus directory, summarised per file and strategy.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use qxroute::mapper::{MapperConfig, Strategy};
use qxroute::verify::Status;
use qxroute::{Circuit, CouplingMap};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{load_arch, load_circuit, load_stdlib, route, BenchArgs, Failure, VerifyMode};

/// File name used for the aggregate rows.
pub const SUMMARY_FILE: &str = "ALL";

/// One CSV row. Per-file rows carry statistics over the repetitions; `ALL` rows average the
/// per-file averages. Reductions are relative to `baseline` on the same file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub file: String,
    pub n: Option<u32>,
    pub in_g: Option<usize>,
    pub in_d: Option<usize>,
    pub arch: String,
    pub strategy: String,
    pub reps: usize,
    pub seed: u64,
    pub ok_runs: usize,
    pub g_min: Option<usize>,
    pub g_avg: Option<f64>,
    pub g_std: Option<f64>,
    pub d_min: Option<usize>,
    pub d_avg: Option<f64>,
    pub d_std: Option<f64>,
    pub t_min: Option<f64>,
    pub t_avg: Option<f64>,
    pub t_std: Option<f64>,
    pub nodes_avg: Option<f64>,
    pub verification: String,
    pub g_red_pct: Option<f64>,
    pub d_red_pct: Option<f64>,
    pub error: String,
}

/// Columns whose values depend on wall-clock time.
pub const RUNTIME_COLUMNS: [&str; 3] = ["t_min", "t_avg", "t_std"];

fn round(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

/// Population mean and standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Entry {
    name: String,
    parsed: Result<(Circuit, Option<Vec<u32>>), Failure>,
}

pub struct BenchSettings<'a> {
    pub map: &'a CouplingMap,
    pub arch: &'a str,
    pub repetitions: usize,
    pub seed: u64,
    pub verify: VerifyMode,
    pub timeout: Option<f64>,
    pub node_budget: Option<u64>,
}

fn bench_one(entry: &Entry, strategy: Strategy, s: &BenchSettings) -> BenchRow {
    let mut row = BenchRow {
        file: entry.name.clone(),
        arch: s.arch.to_string(),
        strategy: strategy.name().to_string(),
        reps: s.repetitions,
        seed: s.seed,
        ..Default::default()
    };
    let (circuit, header) = match &entry.parsed {
        Ok(p) => p,
        Err(e) => {
            row.error = e.kind().to_string();
            return row;
        }
    };
    row.n = Some(circuit.num_qubits);
    row.in_g = Some(circuit.gate_count());
    row.in_d = Some(circuit.depth());

    let (mut gs, mut ds, mut ts, mut nodes) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut verdicts = Vec::new();
    for rep in 0..s.repetitions {
        let mut config = MapperConfig::new(strategy).with_seed(s.seed.wrapping_add(rep as u64));
        config.initial = header.clone();
        if let Some(budget) = s.node_budget {
            config.node_budget = budget;
        }
        match route(circuit, s.map, config, s.timeout, s.verify) {
            Ok(r) => {
                gs.push(r.circuit.gate_count() as f64);
                ds.push(r.circuit.depth() as f64);
                ts.push(r.elapsed.as_secs_f64());
                nodes.push(r.expanded as f64);
                verdicts.push(r.verdict);
            }
            Err(e) => {
                if row.error.is_empty() {
                    row.error = e.kind().to_string();
                }
            }
        }
    }
    row.ok_runs = gs.len();
    if gs.is_empty() {
        return row;
    }
    let (g_avg, g_std) = mean_std(&gs);
    let (d_avg, d_std) = mean_std(&ds);
    let (t_avg, t_std) = mean_std(&ts);
    row.g_min = Some(gs.iter().copied().fold(f64::INFINITY, f64::min) as usize);
    row.g_avg = Some(round(g_avg, 4));
    row.g_std = Some(round(g_std, 4));
    row.d_min = Some(ds.iter().copied().fold(f64::INFINITY, f64::min) as usize);
    row.d_avg = Some(round(d_avg, 4));
    row.d_std = Some(round(d_std, 4));
    row.t_min = Some(round(ts.iter().copied().fold(f64::INFINITY, f64::min), 6));
    row.t_avg = Some(round(t_avg, 6));
    row.t_std = Some(round(t_std, 6));
    row.nodes_avg = Some(round(mean_std(&nodes).0, 4));
    row.verification = if verdicts.contains(&Status::Fail) {
        "fail"
    } else if verdicts.iter().all(|&v| v == Status::Pass) {
        "pass"
    } else {
        "skipped"
    }
    .to_string();
    row
}

fn reduction(base: Option<f64>, value: Option<f64>) -> Option<f64> {
    match (base, value) {
        (Some(b), Some(v)) if b > 0.0 => Some(100.0 * (b - v) / b),
        _ => None,
    }
}

/// Fills per-file reductions and appends one `ALL` row per strategy.
fn summarise(rows: &mut Vec<BenchRow>, strategies: &[Strategy], s: &BenchSettings) {
    let baseline: Vec<(String, Option<f64>, Option<f64>)> = rows
        .iter()
        .filter(|r| r.strategy == Strategy::Baseline.name())
        .map(|r| (r.file.clone(), r.g_avg, r.d_avg))
        .collect();
    let has_baseline = strategies.contains(&Strategy::Baseline);
    for row in rows.iter_mut() {
        if !has_baseline || row.strategy == Strategy::Baseline.name() {
            continue;
        }
        if let Some((_, bg, bd)) = baseline.iter().find(|(f, _, _)| *f == row.file) {
            row.g_red_pct = reduction(*bg, row.g_avg).map(|x| round(x, 4));
            row.d_red_pct = reduction(*bd, row.d_avg).map(|x| round(x, 4));
        }
    }

    let mut summary = Vec::new();
    for &strategy in strategies {
        let mine: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.strategy == strategy.name() && r.ok_runs > 0)
            .collect();
        let avg = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Option<f64> {
            let xs: Vec<f64> = mine.iter().filter_map(|r| f(r)).collect();
            (!xs.is_empty()).then(|| round(mean_std(&xs).0, 4))
        };
        let verification = if mine.iter().any(|r| r.verification == "fail") {
            "fail"
        } else if !mine.is_empty() && mine.iter().all(|r| r.verification == "pass") {
            "pass"
        } else {
            "skipped"
        };
        summary.push(BenchRow {
            file: SUMMARY_FILE.to_string(),
            arch: s.arch.to_string(),
            strategy: strategy.name().to_string(),
            reps: s.repetitions,
            seed: s.seed,
            ok_runs: mine.len(),
            g_avg: avg(&|r| r.g_avg),
            d_avg: avg(&|r| r.d_avg),
            t_avg: avg(&|r| r.t_avg).map(|t| round(t, 6)),
            nodes_avg: avg(&|r| r.nodes_avg),
            verification: verification.to_string(),
            g_red_pct: if strategy == Strategy::Baseline { None } else { avg(&|r| r.g_red_pct) },
            d_red_pct: if strategy == Strategy::Baseline { None } else { avg(&|r| r.d_red_pct) },
            ..Default::default()
        });
    }
    rows.extend(summary);
}

/// The `.qasm` files of `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "qasm"));
    files.sort();
    Ok(files)
}

/// Runs every (file, strategy) pair in parallel and returns rows in corpus order.
pub fn run_bench(
    files: &[PathBuf],
    strategies: &[Strategy],
    stdlib: &str,
    settings: &BenchSettings,
) -> Vec<BenchRow> {
    let entries: Vec<Entry> = files
        .iter()
        .map(|path| Entry {
            name: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            parsed: load_circuit(path, stdlib),
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..entries.len())
        .flat_map(|f| (0..strategies.len()).map(move |s| (f, s)))
        .collect();
    let mut rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(f, s)| bench_one(&entries[f], strategies[s], settings))
        .collect();
    summarise(&mut rows, strategies, settings);
    rows
}

pub fn write_rows<W: io::Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn bench_command(args: &BenchArgs) -> Result<(), Failure> {
    let map = load_arch(&args.arch)?;
    let stdlib = load_stdlib(args.stdlib.as_deref())?;
    let files = corpus_files(&args.corpus).map_err(|e| Failure::Parse(format!("{}: {e}", args.corpus.display())))?;
    if args.repetitions == 0 {
        return Err(Failure::Parse("--repetitions must be at least 1".into()));
    }
    let settings = BenchSettings {
        map: &map,
        arch: &args.arch,
        repetitions: args.repetitions,
        seed: args.seed,
        verify: args.verify,
        timeout: args.timeout,
        node_budget: args.node_budget,
    };
    let rows = run_bench(&files, &args.strategies, &stdlib, &settings);
    let written = match &args.out {
        Some(path) => fs::File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| write_rows(f, &rows)),
        None => write_rows(io::stdout().lock(), &rows),
    };
    written.map_err(|e| Failure::Parse(format!("writing results: {e}")))?;
    for row in rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!("qxroute: {} ({}): {}", row.file, row.strategy, row.error);
    }
    Ok(())
}
