use kmsat::formula::{parse, FormulaStore};
use kmsat::satsolver::read_dimacs;
use kmsat::semantics::KripkeModel;
use kmsat_cli::bench::{BenchReport, Record};
use kmsat_cli::{ReportVerdict, RunReport};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kmsat")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn kmsat(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("KMSAT_WORKERS").output().expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().expect("a report line")).expect("report parses")
}

#[test]
fn encode_writes_dimacs_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("worked.cnf");
    let input = data("worked_bnf.km");
    let out =
        kmsat(&["encode", input.to_str().unwrap(), "-o", cnf.to_str().unwrap(), "--format", "bnf", "--lift", "no"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = read_dimacs(&std::fs::read_to_string(&cnf).unwrap()).unwrap();
    assert_eq!(parsed.num_clauses(), 14);
    let map = std::fs::read_to_string(dir.path().join("worked.cnf.map")).unwrap();
    assert_eq!(map.lines().count(), parsed.num_vars as usize);
    assert!(map.lines().any(|l| l.ends_with(" 1.2 p3")));
    let r = report(&out);
    assert_eq!((r.vars, r.clauses, r.labels, r.verdict), (parsed.num_vars, 14, 3, None));
}

#[test]
fn branch_p_encodes_to_the_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bp3.km");
    let out = kmsat(&["gen", "branch-p", "--h", "3", "-o", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&f).unwrap();
    assert!(text.starts_with("; kmsat-gen branch-p h=3\n"));
    let out = kmsat(&["encode", f.to_str().unwrap(), "-o", "-", "--bcp"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "p cnf 1 2\n1 0\n-1 0\n");
}

#[test]
fn malformed_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty_and.km");
    std::fs::write(&f, "(&)").unwrap();
    for cmd in ["encode", "solve"] {
        let mut args = vec![cmd, f.to_str().unwrap()];
        if cmd == "encode" {
            args.extend(["-o", "-"]);
        }
        let out = kmsat(&args);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("1:"));
    }
    assert_eq!(kmsat(&["solve", "/nonexistent/x.km"]).status.code(), Some(2));
    assert_eq!(kmsat(&["solve", f.to_str().unwrap(), "--solver", "picosat"]).status.code(), Some(2));
}

#[test]
fn solve_verdicts_and_models() {
    let input = data("worked_nnf.km");
    let out = kmsat(&["solve", input.to_str().unwrap(), "--format", "nnf"]);
    assert_eq!(out.status.code(), Some(20));
    assert_eq!(report(&out).verdict, Some(ReportVerdict::Unsat));

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("dia.km");
    std::fs::write(&f, "(dia 1 true)").unwrap();
    let model = dir.path().join("dia.model");
    let out = kmsat(&["solve", f.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!((r.verdict, r.model_check), (Some(ReportVerdict::Sat), Some(true)));
    let m = KripkeModel::from_dump(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let mut s = FormulaStore::new();
    let g = parse(&mut s, "(dia 1 true)").unwrap();
    assert!(m.eval(&s, &"1".parse().unwrap(), g).unwrap());
}

#[test]
fn timeout_and_size_limits() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bn4.km");
    kmsat(&["gen", "branch-n", "--h", "4", "-o", f.to_str().unwrap()]);
    let out = kmsat(&["solve", f.to_str().unwrap(), "--timeout", "0"]);
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(report(&out).verdict, Some(ReportVerdict::Timeout));
    let out = kmsat(&["solve", f.to_str().unwrap(), "--bcp", "--max-bytes", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r.verdict, Some(ReportVerdict::Budget));
    assert!(r.clauses > 0, "sizes are still reported");
}

#[test]
fn external_solver_agrees_with_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let external = format!("external:{} dimacs", bin());
    let mut verdicts = std::collections::HashSet::new();
    for seed in 0..12 {
        let f = dir.path().join(format!("r{seed}.km"));
        let seed = seed.to_string();
        let args = ["gen", "random", "--d", "1", "--l", "48", "--n", "3", "--seed", &seed, "-o", f.to_str().unwrap()];
        assert_eq!(kmsat(&args).status.code(), Some(0));
        let embedded = kmsat(&["solve", f.to_str().unwrap()]);
        let ext = kmsat(&["solve", f.to_str().unwrap(), "--solver", &external]);
        assert_eq!(embedded.status.code(), ext.status.code());
        let (a, b) = (report(&embedded), report(&ext));
        assert_eq!(a.without_timings(), b.without_timings());
        verdicts.insert(a.verdict);
    }
    assert_eq!(verdicts.len(), 2, "both verdicts exercised");
}

#[test]
fn gen_is_deterministic_and_parseable() {
    let args = ["gen", "random", "--d", "2", "--l", "12", "--n", "4", "--m", "2", "--seed", "42"];
    let a = kmsat(&args);
    let b = kmsat(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("; kmsat-gen random d=2 L=12 k=3 N=4 m=2 p=0.5 seed=42\n"));
    let mut s = FormulaStore::new();
    let f = parse(&mut s, &text).unwrap();
    assert!(s.depth(f) <= 2);
    let c = kmsat(&["gen", "random", "--d", "2", "--l", "12", "--n", "4", "--m", "2", "--seed", "43"]);
    assert_ne!(text.as_bytes(), &c.stdout[..]);
    assert_eq!(kmsat(&["gen", "random", "--d", "1", "--l", "3", "--k", "4", "--n", "3"]).status.code(), Some(2));
}

fn bench(suite: &str, workers: &str) -> (Output, Vec<Record>) {
    let out = Command::new(bin())
        .args(["bench", data(suite).to_str().unwrap()])
        .env("KMSAT_WORKERS", workers)
        .output()
        .unwrap();
    let records =
        BenchReport::from_jsonl(&String::from_utf8_lossy(&out.stdout)).expect("every line matches the schema");
    (out, records)
}

#[test]
fn bench_transition_suite() {
    let (out, records) = bench("transition.toml", "4");
    assert_eq!(out.status.code(), Some(0));
    let points: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            Record::Point(p) => Some(p.clone()),
            _ => None,
        })
        .collect();
    assert_eq!(points.len(), 5);
    assert!(points.iter().all(|p| p.instances == 20 && p.solved == 20));
    assert_eq!(points[0].point, "d1/LN=10");
    assert!(points[0].sat_fraction > points[4].sat_fraction);
    let instances: Vec<RunReport> = records
        .into_iter()
        .filter_map(|r| match r {
            Record::Instance(i) => Some(i),
            _ => None,
        })
        .collect();
    assert_eq!(instances.len(), 100);
    for r in &instances {
        assert_eq!(r.model_check.is_some(), r.verdict == Some(ReportVerdict::Sat));
        assert_ne!(r.model_check, Some(false));
    }

    // a single worker yields the same verdicts in the same order
    let (_, serial) = bench("transition.toml", "1");
    let strip = |rs: &[Record]| -> Vec<(String, Option<ReportVerdict>)> {
        rs.iter()
            .filter_map(|r| match r {
                Record::Instance(i) => Some((i.id.clone(), i.verdict)),
                _ => None,
            })
            .collect()
    };
    let parallel: Vec<Record> = instances.into_iter().map(Record::Instance).collect();
    assert_eq!(strip(&parallel), strip(&serial));
}

#[test]
fn bench_small_suites() {
    let (out, records) = bench("empty.toml", "2");
    assert_eq!(out.status.code(), Some(0));
    assert!(records.is_empty());

    let (_, records) = bench("worked.toml", "2");
    let verdicts: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            Record::Instance(i) => Some(i.verdict),
            _ => None,
        })
        .collect();
    assert_eq!(verdicts, vec![Some(ReportVerdict::Unsat); 4]);
    assert!(matches!(&records[4], Record::Point(p) if p.point == "worked" && p.sat_fraction == Some(0.0)));
}

#[test]
fn report_schema_rejects_unknown_fields() {
    let ok = r#"{"kind":"point","point":"x","instances":1,"solved":1,"solved_fraction":1.0,"sat":0,"sat_fraction":0.0,"p50_ms":1.0,"p90_ms":1.0}"#;
    assert!(BenchReport::from_jsonl(ok).is_ok());
    let extra = ok.replace("\"sat\":0", "\"sat\":0,\"colour\":1");
    assert!(BenchReport::from_jsonl(&extra).is_err());
    assert!(BenchReport::from_jsonl(r#"{"kind":"instance","id":"x"}"#).is_err());
}

#[test]
fn dimacs_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.cnf");
    std::fs::write(&f, "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    let out = kmsat(&["dimacs", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "s SATISFIABLE\nv -1 2\nv 0\n");
    std::fs::write(&f, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    assert_eq!(kmsat(&["dimacs", f.to_str().unwrap()]).status.code(), Some(20));
    std::fs::write(&f, "p cnf 1 2\n1 0\n").unwrap();
    assert_eq!(kmsat(&["dimacs", f.to_str().unwrap()]).status.code(), Some(2));
}
