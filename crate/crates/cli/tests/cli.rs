use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn fdcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdcc"))
        .args(args)
        .env_remove("FDCC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn same_index_reads_are_unsat() {
    let o = fdcc(&["solve", data("prog1.fdcc").to_str().unwrap()]);
    assert_eq!(stdout(&o), "unsat\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_formula_is_sat() {
    let o = fdcc(&["solve", data("empty.fdcc").to_str().unwrap()]);
    assert_eq!(stdout(&o), "sat\n(model)\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn timeout_gives_unknown() {
    let o = fdcc(&["solve", "--solver", "fd", "--timeout", "1", data("hard.fdcc").to_str().unwrap()]);
    assert_eq!(stdout(&o), "unknown\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sat_models_are_printed_on_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.fdcc");
    fs::write(&path, "(declare-int x 1 2) (distinct x 1)").unwrap();
    for cmd in ["solve", "oracle"] {
        let o = fdcc(&[cmd, path.to_str().unwrap()]);
        assert_eq!(stdout(&o), "sat\n(model (x 2))\n", "{cmd}");
        assert_eq!(o.status.code(), Some(0));
    }
}

#[test]
fn usage_and_parse_errors_exit_with_three() {
    assert_eq!(fdcc(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(fdcc(&["solve", "--solver", "magic", "x"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fdcc");
    fs::write(&path, "(= x y)").unwrap();
    let o = fdcc(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert_eq!(fdcc(&["solve", "/nonexistent/f.fdcc"]).status.code(), Some(3));
}

#[test]
fn trace_goes_to_its_file_only() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = fdcc(&["solve", "--trace", trace.to_str().unwrap(), data("prog2.fdcc").to_str().unwrap()]);
    assert_eq!(stdout(&o), "unsat\n");
    let log = fs::read_to_string(&trace).unwrap();
    assert_eq!(log.lines().filter(|l| l.contains("PostAllDiff")).count(), 2);
    assert!(log.lines().last().unwrap().contains("VerdictUnsat"));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.fdcc");
    let gen = fdcc(&["gen", "--class", "AEUF-II", "--length", "15", "--seed", "4", "--hi", "20"]);
    assert_eq!(gen.status.code(), Some(0));
    fs::write(&f, &gen.stdout).unwrap();
    let run = |k: usize| {
        let trace = dir.path().join(format!("t{k}.jsonl"));
        let o = fdcc(&["solve", "--trace", trace.to_str().unwrap(), f.to_str().unwrap()]);
        (o.stdout, o.status.code(), fs::read(&trace).unwrap())
    };
    assert_eq!(run(0), run(1));
}

#[test]
fn gen_reads_the_seed_from_the_environment() {
    let args = ["gen", "--class", "AEUF+LIA-I", "--length", "12"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_fdcc"))
        .args(args)
        .env("FDCC_SEED", "9")
        .output()
        .unwrap();
    let with_flag = fdcc(&[&args[..], &["--seed", "9"]].concat());
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(fdcc(&args).stdout, with_flag.stdout);
}

#[test]
fn bench_writes_identical_csv_on_the_work_clock() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = fdcc(&[
            "bench", "--class", "AEUF-I", "--count", "4", "--lengths", "5..10", "--timeout", "20000",
            "--clock", "work", "--seed", "2", "--hi", "10", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("BEST"));
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some("formula_id,class,length,seed,solver,verdict,time_ms,decisions,messages")
    );
}
