//! Command-line front end: route one QASM file, or benchmark a directory of them.

pub mod bench;
pub mod record;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qxroute::emit::{assemble, parse_initial_header, to_qasm, MappedCircuit};
use qxroute::mapper::{map_circuit, MapError, MapperConfig, Strategy};
use qxroute::qasm::{parse_circuit_with_stdlib, STDLIB};
use qxroute::verify::{constraint_report, perm_report, sim_report, CheckReport, Status, DEFAULT_TRIALS};
use qxroute::{Circuit, CouplingMap};

pub use bench::{run_bench, BenchRow, BenchSettings};
pub use record::RunRecord;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Malformed input, bad flags or unreadable files.
    pub const PARSE: i32 = 1;
    pub const UNMAPPABLE: i32 = 2;
    /// Deadline or node budget hit.
    pub const TIMEOUT: i32 = 3;
    pub const VERIFY: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "qxroute", version, about = "Route OpenQASM 2.0 circuits onto IBM QX coupling maps")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub map: MapArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map every .qasm file of a directory under several strategies and tabulate the results.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Perm,
    Sim,
    Both,
    Off,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// qx2, qx3, qx4, qx5 or file:PATH
    #[arg(long, default_value = "qx5")]
    pub arch: String,
    #[arg(long, default_value = "full", value_parser = parse_strategy)]
    pub strategy: Strategy,
    #[arg(long = "in", required = true)]
    pub input: Option<PathBuf>,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    pub verify: VerifyMode,
    /// CSV file to append a result row to.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Replacement for the built-in qelib1.inc.
    #[arg(long)]
    pub stdlib: Option<PathBuf>,
    /// Starting positions as a comma-separated list of physical qubits, one per logical qubit.
    /// Without it, an `// initial:` comment in the input is used.
    #[arg(long, value_delimiter = ',')]
    pub initial: Option<Vec<u32>>,
    /// Expanded-node limit per layer.
    #[arg(long)]
    pub node_budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub lookahead_window: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "baseline,lookahead,full", value_parser = parse_strategy)]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "qx5")]
    pub arch: String,
    #[arg(long, value_enum, default_value = "both")]
    pub verify: VerifyMode,
    /// Wall-clock limit per mapping run, in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub node_budget: Option<u64>,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stdlib: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

/// A failed run, classified by exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Parse(String),
    Unmappable(String),
    Timeout(String),
    Verify(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) => exit::PARSE,
            Failure::Unmappable(_) => exit::UNMAPPABLE,
            Failure::Timeout(_) => exit::TIMEOUT,
            Failure::Verify(_) => exit::VERIFY,
        }
    }

    /// Short label used in CSV output.
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse-error",
            Failure::Unmappable(_) => "unmappable",
            Failure::Timeout(_) => "timeout",
            Failure::Verify(_) => "fail",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "error: {m}"),
            Failure::Unmappable(m) => write!(f, "unmappable: {m}"),
            Failure::Timeout(m) => write!(f, "timeout: {m}"),
            Failure::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        match e {
            MapError::BudgetExhausted { .. } | MapError::Timeout { .. } => Failure::Timeout(e.to_string()),
            MapError::InvalidInitial(_) => Failure::Parse(e.to_string()),
            MapError::Unmappable { .. } | MapError::TooManyPhysical | MapError::Internal(_) => {
                Failure::Unmappable(e.to_string())
            }
        }
    }
}

/// Resolves `qx2`..`qx5` or `file:PATH`.
pub fn load_arch(spec: &str) -> Result<CouplingMap, Failure> {
    let result = match spec.strip_prefix("file:") {
        Some(path) => CouplingMap::load(path),
        None => CouplingMap::builtin(spec),
    };
    result.map_err(|e| Failure::Parse(format!("architecture '{spec}': {e}")))
}

pub fn load_stdlib(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        None => Ok(STDLIB.to_string()),
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Parse(format!("{}: {e}", p.display()))),
    }
}

/// Reads and flattens a QASM file, also returning its starting-position comment if any.
pub fn load_circuit(path: &Path, stdlib: &str) -> Result<(Circuit, Option<Vec<u32>>), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let circuit =
        parse_circuit_with_stdlib(&text, stdlib).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok((circuit, parse_initial_header(&text)))
}

/// Overall verification verdict: any failing check fails, otherwise any passing check passes.
pub fn verify(
    original: &Circuit,
    mc: &MappedCircuit,
    map: &CouplingMap,
    mode: VerifyMode,
    seed: u64,
) -> (Status, Vec<CheckReport>) {
    if mode == VerifyMode::Off {
        return (Status::Skipped, Vec::new());
    }
    let mut reports = vec![constraint_report(mc, map)];
    if matches!(mode, VerifyMode::Perm | VerifyMode::Both) {
        reports.push(perm_report(original, mc));
    }
    let perm_settled = reports.iter().any(|r| r.check == "perm" && r.status != Status::Inconclusive);
    // An inconclusive replay falls back to simulation.
    if mode != VerifyMode::Perm || !perm_settled {
        reports.push(sim_report(original, mc, DEFAULT_TRIALS, seed));
    }
    let statuses: Vec<Status> = reports.iter().map(|r| r.status).collect();
    let verdict = if statuses.contains(&Status::Fail) {
        Status::Fail
    } else if statuses[1..].contains(&Status::Pass) {
        Status::Pass
    } else {
        Status::Skipped
    };
    (verdict, reports)
}

/// One routed circuit with its measurements.
pub struct Routed {
    pub circuit: MappedCircuit,
    pub elapsed: Duration,
    pub expanded: u64,
    pub verdict: Status,
    pub reports: Vec<CheckReport>,
}

/// Maps, assembles and verifies. The deadline covers mapping only.
pub fn route(
    circuit: &Circuit,
    map: &CouplingMap,
    mut config: MapperConfig,
    timeout: Option<f64>,
    mode: VerifyMode,
) -> Result<Routed, Failure> {
    if let Some(secs) = timeout {
        let limit = Duration::try_from_secs_f64(secs)
            .map_err(|_| Failure::Parse(format!("invalid timeout {secs}")))?;
        config.deadline = Some(Instant::now() + limit);
    }
    let seed = config.seed;
    let start = Instant::now();
    let plan = map_circuit(circuit, map, &config)?;
    let mc = assemble(&plan, circuit, map).map_err(|e| Failure::Unmappable(format!("internal error: {e}")))?;
    let elapsed = start.elapsed();
    let (verdict, reports) = verify(circuit, &mc, map, mode, seed);
    Ok(Routed {
        circuit: mc,
        elapsed,
        expanded: plan.expanded_nodes(),
        verdict,
        reports,
    })
}

fn benchmark_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_map(args: &MapArgs) -> Result<(), Failure> {
    let map = load_arch(&args.arch)?;
    let stdlib = load_stdlib(args.stdlib.as_deref())?;
    let input = args.input.as_deref().expect("--in is required");
    let (circuit, header) = load_circuit(input, &stdlib)?;

    let mut config = MapperConfig::new(args.strategy).with_seed(args.seed);
    config.lookahead_window = args.lookahead_window;
    if let Some(budget) = args.node_budget {
        config.node_budget = budget;
    }
    config.initial = args.initial.clone().or(header);

    let routed = route(&circuit, &map, config, args.timeout, args.verify)?;
    for report in &routed.reports {
        eprintln!("{}", report.to_json_line());
    }

    let text = to_qasm(&routed.circuit);
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }

    if let Some(stats) = &args.stats {
        let record = RunRecord {
            benchmark: benchmark_name(input),
            n: circuit.num_qubits,
            in_g: circuit.gate_count(),
            in_d: circuit.depth(),
            arch: args.arch.clone(),
            strategy: args.strategy.name().to_string(),
            seed: args.seed,
            out_g: routed.circuit.gate_count(),
            out_d: routed.circuit.depth(),
            runtime_s: routed.elapsed.as_secs_f64(),
            expanded_nodes: routed.expanded,
            verification: routed.verdict.as_str().to_string(),
        };
        record::append(stats, &record).map_err(|e| Failure::Parse(format!("{}: {e}", stats.display())))?;
    }

    if routed.verdict == Status::Fail {
        let failed: Vec<&str> = routed
            .reports
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.check)
            .collect();
        return Err(Failure::Verify(failed.join(", ")));
    }
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::PARSE } else { exit::OK };
        }
    };
    let result = match &cli.command {
        Some(Command::Bench(b)) => bench::bench_command(b),
        None => run_map(&cli.map),
    };
    match result {
        Ok(()) => exit::OK,
        Err(failure) => {
            eprintln!("qxroute: {failure}");
            failure.exit_code()
        }
    }
}
