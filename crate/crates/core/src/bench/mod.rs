//! Random suites run through several solver configurations.

mod gen;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

pub use gen::{generate, Class, GenConfig};

use crate::formula::Formula;
use crate::supervisor::{self, Config, Limit, SolverKind, Stats, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Sat,
    Unsat,
    Timeout,
}

impl Outcome {
    pub fn code(self) -> &'static str {
        match self {
            Outcome::Sat => "S",
            Outcome::Unsat => "U",
            Outcome::Timeout => "TO",
        }
    }

    pub fn solved(self) -> bool {
        self != Outcome::Timeout
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "S" => Some(Outcome::Sat),
            "U" => Some(Outcome::Unsat),
            "TO" => Some(Outcome::Timeout),
            _ => None,
        }
    }
}

/// What `timeout` and `time_ms` measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Milliseconds of wall time.
    #[default]
    Wall,
    /// Solver work units; results do not depend on the machine.
    Work,
}

impl Clock {
    pub fn name(self) -> &'static str {
        match self {
            Clock::Wall => "wall",
            Clock::Work => "work",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub formula_id: String,
    pub class: Class,
    pub length: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub verdict: Outcome,
    pub time_ms: f64,
    pub decisions: u64,
    pub messages: u64,
}

impl RunRecord {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{},{}\n",
            self.formula_id,
            self.class,
            self.length,
            self.seed,
            self.solver.name(),
            self.verdict.code(),
            self.time_ms,
            self.decisions,
            self.messages
        )
    }

    fn from_csv(line: &str) -> Option<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        let [id, class, length, seed, solver, verdict, time, decisions, messages] = cols[..] else {
            return None;
        };
        Some(RunRecord {
            formula_id: id.to_string(),
            class: class.parse().ok()?,
            length: length.parse().ok()?,
            seed: seed.parse().ok()?,
            solver: solver_from_name(solver)?,
            verdict: Outcome::parse(verdict)?,
            time_ms: time.parse().ok()?,
            decisions: decisions.parse().ok()?,
            messages: messages.parse().ok()?,
        })
    }
}

pub fn solver_from_name(s: &str) -> Option<SolverKind> {
    [SolverKind::Fdcc, SolverKind::Cc, SolverKind::Fd]
        .into_iter()
        .find(|k| k.name() == s)
}

pub const CSV_COLUMNS: &str = "formula_id,class,length,seed,solver,verdict,time_ms,decisions,messages";

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub class: Class,
    /// Inclusive range of formula lengths, walked cyclically.
    pub lengths: (usize, usize),
    pub count: usize,
    pub seed: u64,
    /// Milliseconds on the wall clock, work units on the work clock.
    pub timeout: u64,
    pub clock: Clock,
    pub solvers: Vec<SolverKind>,
    pub num_vars: usize,
    pub array_size: u32,
    pub domain_hi: i64,
}

impl SuiteConfig {
    /// Desk-sized defaults: 5 s timeout, domains 0..50, lengths 10..60.
    pub fn desk(class: Class, count: usize, seed: u64) -> Self {
        SuiteConfig {
            class,
            lengths: (10, 60),
            count,
            seed,
            timeout: 5_000,
            clock: Clock::Wall,
            solvers: vec![SolverKind::Fdcc, SolverKind::Cc, SolverKind::Fd],
            num_vars: 40,
            array_size: 20,
            domain_hi: 50,
        }
    }

    pub fn formulas(&self) -> Vec<(String, GenConfig)> {
        let (lo, hi) = self.lengths;
        let span = hi.saturating_sub(lo) + 1;
        (0..self.count)
            .map(|k| {
                let gen = GenConfig {
                    class: self.class,
                    length: lo + k % span,
                    seed: self.seed.wrapping_add(k as u64),
                    num_vars: self.num_vars,
                    array_size: self.array_size,
                    domain_hi: self.domain_hi,
                };
                (format!("{}-{k:04}", self.class), gen)
            })
            .collect()
    }

    /// Digest of every setting that influences the rows.
    pub fn checksum(&self) -> String {
        let solvers: Vec<&str> = self.solvers.iter().map(|s| s.name()).collect();
        let text = format!(
            "class={} lengths={}..{} count={} seed={} timeout={} clock={} solvers={} vars={} size={} hi={}",
            self.class,
            self.lengths.0,
            self.lengths.1,
            self.count,
            self.seed,
            self.timeout,
            self.clock.name(),
            solvers.join("/"),
            self.num_vars,
            self.array_size,
            self.domain_hi
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Solves `f` once. Runs that give up, or that overrun the timeout, are
/// reported as `Timeout` with the time clamped up to the timeout.
pub fn run_one(f: &Formula, solver: SolverKind, timeout: u64, clock: Clock) -> (Outcome, f64, Stats) {
    let limit = match clock {
        Clock::Wall => Limit::Time(Duration::from_millis(timeout)),
        Clock::Work => Limit::Work(timeout),
    };
    let cfg = Config {
        solver,
        limit,
        ..Config::default()
    };
    let start = Instant::now();
    let r = supervisor::solve(f, &cfg);
    let time = match clock {
        Clock::Wall => start.elapsed().as_secs_f64() * 1000.0,
        Clock::Work => r.stats.work as f64,
    };
    let outcome = match r.verdict {
        Verdict::Sat(_) => Outcome::Sat,
        Verdict::Unsat(_) => Outcome::Unsat,
        Verdict::Unknown => Outcome::Timeout,
    };
    if outcome == Outcome::Timeout || time >= timeout as f64 {
        (Outcome::Timeout, time.max(timeout as f64), r.stats)
    } else {
        (outcome, time, r.stats)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0} was written by a different suite configuration")]
    Checksum(String),
    #[error("{path}:{line}: malformed row")]
    Row { path: String, line: usize },
}

/// Runs every formula of the suite through every solver.
///
/// With `out`, rows are appended to a CSV file as they complete and rows
/// already present there are reused, so an interrupted suite resumes where
/// it stopped.
pub fn run_suite(cfg: &SuiteConfig, out: Option<&Path>) -> Result<Report, BenchError> {
    let header = format!("# fdcc-bench {}\n{CSV_COLUMNS}\n", cfg.checksum());
    let (mut records, mut file) = match out {
        Some(path) => {
            let (records, file) = open_csv(path, &header)?;
            (records, Some(file))
        }
        None => (Vec::new(), None),
    };
    let done: HashSet<(String, SolverKind)> = records
        .iter()
        .map(|r| (r.formula_id.clone(), r.solver))
        .collect();

    for (id, gen) in cfg.formulas() {
        let mut f = None;
        for &solver in &cfg.solvers {
            if done.contains(&(id.clone(), solver)) {
                continue;
            }
            let f = f.get_or_insert_with(|| generate(&gen));
            let (verdict, time_ms, stats) = run_one(f, solver, cfg.timeout, cfg.clock);
            let rec = RunRecord {
                formula_id: id.clone(),
                class: gen.class,
                length: gen.length,
                seed: gen.seed,
                solver,
                verdict,
                time_ms,
                decisions: stats.decisions,
                messages: stats.messages(),
            };
            if let Some(file) = file.as_mut() {
                file.write_all(rec.csv_line().as_bytes())?;
                file.flush()?;
            }
            records.push(rec);
        }
    }
    Ok(Report::new(records, cfg.timeout as f64))
}

/// Opens or creates the CSV, returning the rows already present. A torn
/// last row, left by an interrupted run, is cut off.
fn open_csv(path: &Path, header: &str) -> Result<(Vec<RunRecord>, File), BenchError> {
    let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    if text.is_empty() {
        file.write_all(header.as_bytes())?;
        return Ok((Vec::new(), file));
    }
    if !text.starts_with(header) {
        return Err(BenchError::Checksum(path.display().to_string()));
    }
    let complete = text.rfind('\n').map_or(0, |k| k + 1);
    if complete < text.len() {
        file.set_len(complete as u64)?;
        file.seek(SeekFrom::End(0))?;
    }
    let mut records = Vec::new();
    for (k, line) in text[..complete].lines().enumerate().skip(2) {
        let rec = RunRecord::from_csv(line).ok_or_else(|| BenchError::Row {
            path: path.display().to_string(),
            line: k + 1,
        })?;
        records.push(rec);
    }
    Ok((records, file))
}

/// One line of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Row {
    pub sat: usize,
    pub unsat: usize,
    pub timeout: usize,
    /// Total time, timeouts counted at the timeout.
    pub time: f64,
}

impl Row {
    pub fn solved(&self) -> usize {
        self.sat + self.unsat
    }

    fn add(&mut self, outcome: Outcome, time: f64) {
        match outcome {
            Outcome::Sat => self.sat += 1,
            Outcome::Unsat => self.unsat += 1,
            Outcome::Timeout => self.timeout += 1,
        }
        self.time += time;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub records: Vec<RunRecord>,
    pub rows: BTreeMap<String, Row>,
    pub gain: Option<(i64, u64)>,
}

impl Report {
    pub fn new(records: Vec<RunRecord>, timeout: f64) -> Self {
        let mut rows: BTreeMap<String, Row> = BTreeMap::new();
        for r in &records {
            rows.entry(r.solver.name().to_string())
                .or_default()
                .add(r.verdict, r.time_ms);
        }
        let by_formula = by_formula(&records);
        if rows.contains_key("cc") && rows.contains_key("fd") {
            let mut best = Row::default();
            let mut hybrid = Row::default();
            for runs in by_formula.values() {
                if let (Some(cc), Some(fd)) = (runs.get(&SolverKind::Cc), runs.get(&SolverKind::Fd)) {
                    let (outcome, time) = portfolio(*cc, *fd, timeout);
                    best.add(outcome, time);
                    hybrid.add(outcome, time);
                }
            }
            rows.insert("BEST".into(), best);
            rows.insert("HYBRID".into(), hybrid);
        }
        let gain = ["fdcc", "cc", "fd"]
            .iter()
            .all(|s| rows.contains_key(*s))
            .then(|| gain_miracle(&records));
        Report { records, rows, gain }
    }
}

impl Report {
    /// Solved formulas per solver, with lengths grouped in buckets of
    /// `width` starting at multiples of `width`.
    pub fn solved_by_length(&self, width: usize) -> BTreeMap<usize, BTreeMap<&'static str, usize>> {
        let mut out: BTreeMap<usize, BTreeMap<&'static str, usize>> = BTreeMap::new();
        for r in &self.records {
            let n = out
                .entry(r.length / width * width)
                .or_default()
                .entry(r.solver.name())
                .or_default();
            *n += r.verdict.solved() as usize;
        }
        out
    }
}

type Runs = BTreeMap<SolverKind, (Outcome, f64)>;

fn by_formula(records: &[RunRecord]) -> BTreeMap<&str, Runs> {
    let mut out: BTreeMap<&str, Runs> = BTreeMap::new();
    for r in records {
        out.entry(r.formula_id.as_str())
            .or_default()
            .insert(r.solver, (r.verdict, r.time_ms));
    }
    out
}

/// Best of two runs on one formula: the faster answer if either answers.
/// Racing both and stopping at the first answer gives the same outcome
/// and wall time.
pub fn portfolio(a: (Outcome, f64), b: (Outcome, f64), timeout: f64) -> (Outcome, f64) {
    match (a.0.solved(), b.0.solved()) {
        (true, true) => {
            if b.1 < a.1 {
                b
            } else {
                a
            }
        }
        (true, false) => a,
        (false, true) => b,
        (false, false) => (Outcome::Timeout, timeout),
    }
}

/// Scores fdcc against cc and fd alone: +2 when it alone answers, +1 when
/// one of them also does, -1 and -2 when it misses formulas they answer.
/// The second component counts the +2 cases.
pub fn gain_miracle(records: &[RunRecord]) -> (i64, u64) {
    let mut gain = 0;
    let mut miracle = 0;
    for runs in by_formula(records).values() {
        let solved = |k| runs.get(&k).is_some_and(|&(o, _)| o.solved());
        let others = solved(SolverKind::Cc) as i64 + solved(SolverKind::Fd) as i64;
        if solved(SolverKind::Fdcc) {
            match others {
                0 => {
                    gain += 2;
                    miracle += 1;
                }
                1 => gain += 1,
                _ => {}
            }
        } else {
            gain -= others;
        }
    }
    (gain, miracle)
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>5} {:>5} {:>5} {:>12}", "solver", "S", "U", "TO", "T")?;
        let order = ["fdcc", "cc", "fd", "BEST", "HYBRID"];
        for name in order {
            if let Some(r) = self.rows.get(name) {
                writeln!(
                    f,
                    "{name:<8} {:>5} {:>5} {:>5} {:>12.1}",
                    r.sat, r.unsat, r.timeout, r.time
                )?;
            }
        }
        if let Some((gain, miracle)) = self.gain {
            writeln!(f, "gain {gain} miracle {miracle}")?;
        }
        let curve = self.solved_by_length(10);
        if curve.len() > 1 {
            writeln!(f, "solved by length")?;
            for (lo, counts) in curve {
                let cols: Vec<String> = counts.iter().map(|(s, n)| format!("{s} {n}")).collect();
                writeln!(f, "  {lo:>3}..{:<3} {}", lo + 9, cols.join("  "))?;
            }
        }
        Ok(())
    }
}
