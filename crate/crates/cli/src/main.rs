//! `fdcc` command line.
//!
//! Exit status: 0 sat, 1 unsat, 2 unknown, 3 usage or parse error,
//! 4 any other failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use fdcc::bench::{self, Class, Clock, GenConfig, SuiteConfig};
use fdcc::fd::AllDiffStrength;
use fdcc::formula::{self, DiffArrayMode, Formula};
use fdcc::oracle::{self, OracleOptions};
use fdcc::supervisor::{self, Config, Limit, SolverKind, Verdict};

#[derive(Parser)]
#[command(name = "fdcc", version, about = "Decide conjunctions over integer arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a formula file.
    Solve(SolveArgs),
    /// Decide a small formula by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Print a random formula.
    Gen(GenArgs),
    /// Run a random suite through several solvers.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Fdcc,
    Cc,
    Fd,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Fdcc => SolverKind::Fdcc,
            SolverArg::Cc => SolverKind::Cc,
            SolverArg::Fd => SolverKind::Fd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DiffArrayArg {
    Witness,
    Propagator,
}

#[derive(Clone, Copy, ValueEnum)]
enum AllDiffArg {
    Basic,
    Matching,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Wall,
    Work,
}

impl From<ClockArg> for Clock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::Wall => Clock::Wall,
            ClockArg::Work => Clock::Work,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "fdcc")]
    solver: SolverArg,
    /// Seconds, or work units with `--clock work`.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value = "wall")]
    clock: ClockArg,
    /// Also answer difference queries by trial propagation.
    #[arg(long)]
    probe: bool,
    #[arg(long, value_enum, default_value = "witness")]
    diff_array: DiffArrayArg,
    #[arg(long, value_enum, default_value = "basic")]
    alldiff: AllDiffArg,
    /// Write the message log to FILE as JSON lines.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Print both engines' state before labelling to stderr.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    /// Maximum number of search nodes.
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
    /// Shuffle the enumeration order.
    #[arg(long, env = "FDCC_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_class)]
    class: Class,
    #[arg(long)]
    length: usize,
    #[arg(long, env = "FDCC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    vars: usize,
    #[arg(long, default_value_t = 20)]
    size: u32,
    /// Upper bound of every domain.
    #[arg(long, default_value_t = 1000)]
    hi: i64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_class)]
    class: Class,
    /// Inclusive length range, `LO..HI`.
    #[arg(long, default_value = "10..60", value_parser = parse_range)]
    lengths: (usize, usize),
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Seconds per run, or work units with `--clock work`.
    #[arg(long, default_value_t = 5.0)]
    timeout: f64,
    #[arg(long, value_enum, default_value = "wall")]
    clock: ClockArg,
    #[arg(long, env = "FDCC_SEED", default_value_t = 0)]
    seed: u64,
    /// CSV file; an existing file from the same suite is resumed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fdcc,cc,fd")]
    solvers: Vec<SolverArg>,
    #[arg(long, default_value_t = 40)]
    vars: usize,
    #[arg(long, default_value_t = 20)]
    size: u32,
    #[arg(long, default_value_t = 50)]
    hi: i64,
}

fn parse_class(s: &str) -> Result<Class, String> {
    s.parse()
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("empty range".into());
    }
    Ok((lo, hi))
}

const SAT: u8 = 0;
const UNSAT: u8 = 1;
const UNKNOWN: u8 = 2;
const USAGE: u8 = 3;
const FAILURE: u8 = 4;

enum Failure {
    Usage(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { SAT });
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Oracle(a) => run_oracle(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}

fn read_formula(path: &PathBuf) -> Result<Formula, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)?;
    formula::parse(&text).map_err(|e| Failure::Usage(anyhow::anyhow!("{}:{e}", path.display())))
}

fn solve(a: SolveArgs) -> Result<u8, Failure> {
    let f = read_formula(&a.file)?;
    let limit = match (a.timeout, a.clock) {
        (None, _) => Limit::None,
        (Some(t), ClockArg::Wall) => Limit::Time(Duration::from_secs_f64(t.max(0.0))),
        (Some(t), ClockArg::Work) => Limit::Work(t.max(0.0) as u64),
    };
    let cfg = Config {
        solver: a.solver.into(),
        probe: a.probe,
        diff_array: match a.diff_array {
            DiffArrayArg::Witness => DiffArrayMode::Witness,
            DiffArrayArg::Propagator => DiffArrayMode::Propagator,
        },
        alldiff: match a.alldiff {
            AllDiffArg::Basic => AllDiffStrength::Basic,
            AllDiffArg::Matching => AllDiffStrength::Matching,
        },
        trace: a.trace.is_some(),
        dump: a.dump,
        limit,
        ..Config::default()
    };
    let r = supervisor::solve(&f, &cfg);
    if let Some(path) = &a.trace {
        fs::write(path, supervisor::to_jsonl(&r.log)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(dump) = &r.dump {
        eprint!("{dump}");
    }
    Ok(match r.verdict {
        Verdict::Sat(m) => {
            println!("sat\n{m}");
            SAT
        }
        Verdict::Unsat(_) => {
            println!("unsat");
            UNSAT
        }
        Verdict::Unknown => {
            println!("unknown");
            UNKNOWN
        }
    })
}

fn run_oracle(a: OracleArgs) -> Result<u8, Failure> {
    let f = read_formula(&a.file)?;
    let opts = OracleOptions {
        cap: a.cap,
        shuffle: a.seed,
    };
    match oracle::solve(&f, &opts).map_err(anyhow::Error::from)? {
        oracle::Verdict::Sat(m) => {
            println!("sat\n{m}");
            Ok(SAT)
        }
        oracle::Verdict::Unsat => {
            println!("unsat");
            Ok(UNSAT)
        }
    }
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    let cfg = GenConfig {
        class: a.class,
        length: a.length,
        seed: a.seed,
        num_vars: a.vars,
        array_size: a.size,
        domain_hi: a.hi,
    };
    print!("{}", formula::print(&bench::generate(&cfg)));
    Ok(SAT)
}

fn run_bench(a: BenchArgs) -> Result<u8, Failure> {
    let clock: Clock = a.clock.into();
    let timeout = match clock {
        Clock::Wall => (a.timeout * 1000.0).round().max(0.0) as u64,
        Clock::Work => a.timeout.max(0.0) as u64,
    };
    let cfg = SuiteConfig {
        class: a.class,
        lengths: a.lengths,
        count: a.count,
        seed: a.seed,
        timeout,
        clock,
        solvers: a.solvers.into_iter().map(SolverKind::from).collect(),
        num_vars: a.vars,
        array_size: a.size,
        domain_hi: a.hi,
    };
    let report = bench::run_suite(&cfg, a.out.as_deref()).map_err(anyhow::Error::from)?;
    print!("{report}");
    Ok(SAT)
}
