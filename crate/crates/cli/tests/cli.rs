use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qxroute::emit::parse_mapping_header;
use qxroute::verify::Status;
use qxroute::{Circuit, CouplingMap, Gate};
use qxroute_cli::record::{read_all, HEADER};
use qxroute_cli::{exit, verify, Failure, VerifyMode};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> PathBuf {
    workspace().join("corpus").join(name)
}

fn qxroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qxroute")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_strategy_on_qx3_writes_verified_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.qasm");
    let stats = dir.path().join("stats.csv");
    let five_cnot = corpus("five_cnot_6.qasm");
    let o = qxroute(&[
        "--in", s(&five_cnot), "--arch", "qx3", "--strategy", "full", "--verify", "both",
        "--out", s(&out), "--stats", s(&stats),
    ]);
    assert_eq!(o.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_all(&stats).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!((r.benchmark.as_str(), r.n, r.in_g, r.out_g, r.out_d), ("five_cnot_6", 6, 5, 23, 10));
    assert_eq!(r.verification, "pass");
    assert!(r.out_g >= r.in_g);
    let text = std::fs::read_to_string(&out).unwrap();
    let (initial, _) = parse_mapping_header(&text).unwrap();
    assert_eq!(initial, vec![3, 2, 0, 1, 4, 15]);
    // One JSON line per check.
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().filter(|l| l.contains("\"status\":\"pass\"")).count(), 3);
}

#[test]
fn stats_file_accumulates_rows_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    for strategy in ["baseline", "lookahead", "full", "naive"] {
        let o = qxroute(&[
            "--in", s(&corpus("ghz_5.qasm")), "--arch", "qx4", "--strategy", strategy,
            "--out", s(&dir.path().join("o.qasm")), "--stats", s(&stats), "--seed", "3",
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&stats).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
    let rows = read_all(&stats).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.seed == 3 && r.verification == "pass" && r.out_g >= r.in_g));
}

#[test]
fn initial_header_in_input_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    let o = qxroute(&[
        "--in", s(&corpus("five_cnot_6.qasm")), "--arch", "qx3", "--strategy", "baseline",
        "--out", s(&dir.path().join("o.qasm")), "--stats", s(&stats),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = &read_all(&stats).unwrap()[0];
    assert_eq!((r.out_g, r.out_d), (37, 15));
}

#[test]
fn initial_flag_overrides_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.qasm");
    let o = qxroute(&[
        "--in", s(&corpus("five_cnot_6.qasm")), "--arch", "qx3", "--strategy", "naive",
        "--initial", "5,4,3,2,1,0", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (initial, _) = parse_mapping_header(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(initial, vec![5, 4, 3, 2, 1, 0]);

    let bad = qxroute(&["--in", s(&corpus("five_cnot_6.qasm")), "--arch", "qx3", "--initial", "0,0,1,2,3,4", "--strategy", "naive"]);
    assert_eq!(bad.status.code(), Some(exit::PARSE));
}

#[test]
fn too_many_qubits_is_unmappable() {
    let o = qxroute(&["--in", s(&corpus("five_cnot_6.qasm")), "--arch", "qx2"]);
    assert_eq!(o.status.code(), Some(exit::UNMAPPABLE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unmappable"));
}

#[test]
fn timeout_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.qasm");
    let large = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/large_random_16.qasm");
    let o = qxroute(&[
        "--in", s(&large), "--arch", "qx5", "--strategy", "baseline", "--timeout", "1", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(exit::TIMEOUT));
    assert!(!out.exists());
}

#[test]
fn node_budget_counts_as_timeout() {
    let large = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/large_random_16.qasm");
    let o = qxroute(&["--in", s(&large), "--strategy", "baseline", "--node-budget", "50"]);
    assert_eq!(o.status.code(), Some(exit::TIMEOUT));
}

#[test]
fn bad_inputs_exit_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.qasm");
    std::fs::write(&broken, "OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];\n").unwrap();
    let o = qxroute(&["--in", s(&broken)]);
    assert_eq!(o.status.code(), Some(exit::PARSE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let missing = dir.path().join("missing.qasm");
    assert_eq!(qxroute(&["--in", s(&missing)]).status.code(), Some(exit::PARSE));
    assert_eq!(qxroute(&["--in", s(&corpus("ghz_5.qasm")), "--arch", "qx9"]).status.code(), Some(exit::PARSE));
    assert_eq!(qxroute(&["--in", s(&corpus("ghz_5.qasm")), "--strategy", "greedy"]).status.code(), Some(exit::PARSE));
    assert_eq!(qxroute(&[]).status.code(), Some(exit::PARSE));
    assert_eq!(qxroute(&["--help"]).status.code(), Some(exit::OK));
}

#[test]
fn architecture_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let arch = dir.path().join("line.txt");
    std::fs::write(&arch, "# four in a row\nm 4\n0 1\n1 2\n3 2\n").unwrap();
    let o = qxroute(&["--in", s(&corpus("qft_4.qasm")), "--arch", &format!("file:{}", s(&arch))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("qreg q[4];"));
    assert!(!text.contains("CX q[1],q[0]"));
}

#[test]
fn failed_check_gives_verify_verdict() {
    let map = CouplingMap::builtin("qx2").unwrap();
    let original = Circuit::with_gates(2, vec![Gate::cx(0, 1)]);
    let mc = qxroute::MappedCircuit {
        num_physical: 5,
        num_logical: 2,
        gates: vec![Gate::cx(0, 1), Gate::h(1)],
        initial: vec![0, 1],
        output: vec![0, 1],
        cregs: vec![],
        measurements: vec![],
    };
    for mode in [VerifyMode::Perm, VerifyMode::Sim, VerifyMode::Both] {
        assert_eq!(verify(&original, &mc, &map, mode, 0).0, Status::Fail);
    }
    assert_eq!(verify(&original, &mc, &map, VerifyMode::Off, 0).0, Status::Skipped);
    assert_eq!(Failure::Verify(String::new()).exit_code(), exit::VERIFY);
}

fn bench(dir: &Path, extra: &[&str]) -> String {
    let out = dir.join(format!("bench{}.csv", extra.len()));
    let mut args = vec!["bench", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = qxroute(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(&out).unwrap()
}

fn column<'a>(header: &str, row: &'a str, name: &str) -> &'a str {
    let i = header.split(',').position(|h| h == name).unwrap();
    row.split(',').nth(i).unwrap()
}

#[test]
fn bench_on_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("corpus");
    std::fs::create_dir(&single).unwrap();
    std::fs::copy(corpus("five_cnot_6.qasm"), single.join("five_cnot_6.qasm")).unwrap();
    let text = bench(dir.path(), &["--corpus", s(&single), "--arch", "qx3", "--repetitions", "1"]);
    let lines: Vec<&str> = text.lines().collect();
    let header = lines[0];
    let g = |row: &str| column(header, row, "g_min").parse::<usize>().unwrap();
    assert_eq!(lines.len(), 1 + 3 + 3);
    assert_eq!(g(lines[1]), 37);
    assert!(g(lines[2]) <= 33);
    assert_eq!(g(lines[3]), 23);
    for row in &lines[1..4] {
        for sigma in ["g_std", "d_std", "t_std"] {
            assert_eq!(column(header, row, sigma).parse::<f64>().unwrap(), 0.0);
        }
        assert_eq!(column(header, row, "verification"), "pass");
    }
    assert_eq!(column(header, lines[4], "file"), "ALL");
}

#[test]
fn bench_records_per_file_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("corpus");
    std::fs::create_dir(&c).unwrap();
    std::fs::copy(corpus("ghz_5.qasm"), c.join("a.qasm")).unwrap();
    std::fs::write(c.join("b.qasm"), "OPENQASM 2.0;\nqreg q[;\n").unwrap();
    std::fs::copy(corpus("five_cnot_6.qasm"), c.join("c.qasm")).unwrap();
    let text = bench(dir.path(), &["--corpus", s(&c), "--arch", "qx2", "--strategies", "full", "--repetitions", "2"]);
    let lines: Vec<&str> = text.lines().collect();
    let header = lines[0];
    assert_eq!(column(header, lines[1], "ok_runs"), "2");
    assert_eq!(column(header, lines[2], "error"), "parse-error");
    assert_eq!(column(header, lines[3], "error"), "unmappable");
    assert_eq!(column(header, lines[4], "ok_runs"), "1");
}

#[test]
fn bench_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("corpus");
    std::fs::create_dir(&c).unwrap();
    for name in ["qft_4.qasm", "ghz_8.qasm", "clifford_t_6.qasm"] {
        std::fs::copy(corpus(name), c.join(name)).unwrap();
    }
    let args = ["--corpus", s(&c), "--seed", "9", "--repetitions", "3"];
    let strip = |text: &str| -> Vec<String> {
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        text.lines()
            .map(|l| {
                l.split(',')
                    .zip(&header)
                    .filter(|(_, h)| !h.starts_with("t_"))
                    .map(|(v, _)| v)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    let a = bench(dir.path(), &args);
    let b = bench(&dir.path().join("corpus"), &args);
    assert_eq!(strip(&a), strip(&b));
}
