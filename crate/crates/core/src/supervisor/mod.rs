//! Drives congruence closure and the finite-domain store together: cheap
//! deductions flow from cc to fd as constraints, fd answers (dis)equality
//! queries on critical pairs back to cc, and labelling happens on the fd
//! side only.

mod log;

use std::collections::BTreeMap;
use std::time::Duration;

use crate::cc::{Cc, Deduction, Lit, Truth};
use crate::ext::{encode_maps, map_array_names};
use crate::fd::{
    self, label, AllDiffStrength, Array, Budget, Encoding, Fail, Hook, Outcome, SearchStats, Store, VarId,
};
use crate::formula::{
    desugar_extensionality, dispatch, print_term, Atom, DiffArrayMode, Formula, Sort, TermId, TermKind,
};
use crate::oracle::GroundModel;

pub use log::{from_jsonl, to_jsonl, Dir, Kind, Message};

/// Which engines take part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// Both engines cooperating.
    #[default]
    Fdcc,
    /// Congruence closure, fed with every labelling choice; the fd store
    /// only checks complete assignments.
    Cc,
    /// Propagation and labelling alone.
    Fd,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fdcc => "fdcc",
            SolverKind::Cc => "cc",
            SolverKind::Fd => "fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    None,
    Time(Duration),
    /// Propagator executions plus congruence-closure steps.
    Work(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub solver: SolverKind,
    /// Answer `is_fd_diff` queries by trial propagation too.
    pub probe: bool,
    pub diff_array: DiffArrayMode,
    pub alldiff: AllDiffStrength,
    /// Record every message, not just the counters.
    pub trace: bool,
    /// Keep a snapshot of both engines taken just before labelling.
    pub dump: bool,
    pub limit: Limit,
    /// Exchange rounds allowed between two labelling steps.
    pub max_rounds: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            solver: SolverKind::Fdcc,
            probe: false,
            diff_array: DiffArrayMode::Witness,
            alldiff: AllDiffStrength::Basic,
            trace: false,
            dump: false,
            limit: Limit::None,
            max_rounds: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Preprocess,
    Cc,
    Fd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(GroundModel),
    Unsat(Source),
    Unknown,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat(_))
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub failures: u64,
    pub rounds: u64,
    pub fd_to_cc: u64,
    pub cc_to_fd: u64,
    /// Rounds whose message counts exceeded the termination bounds.
    pub bound_violations: u64,
    /// Largest number of rounds between two labelling steps.
    pub max_rounds_seen: u64,
    pub round_cap_hit: bool,
    pub work: u64,
}

impl Stats {
    pub fn messages(&self) -> u64 {
        self.fd_to_cc + self.cc_to_fd
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: Stats,
    pub log: Vec<Message>,
    pub dump: Option<String>,
}

/// Which rule a critical pair feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// `(i, j)` of `t = select(store(A, i, e), j)`.
    Index,
    /// `(t, e)`.
    Elem,
    /// `(t, select(A, j))`, once that read exists.
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CriticalPair {
    pub a: TermId,
    pub b: TermId,
    pub origin: Origin,
}

/// Pairs whose (dis)equality some read-over-write watch waits for.
pub fn critical_pairs(f: &Formula, cc: &Cc) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    for &t in cc.row_terms() {
        let (a, i, e, j) = f.terms.as_read_over_write(t).expect("read over write");
        out.push(CriticalPair {
            a: i,
            b: j,
            origin: Origin::Index,
        });
        out.push(CriticalPair {
            a: t,
            b: e,
            origin: Origin::Elem,
        });
        if let Some(base) = f.terms.lookup(&TermKind::Select(a, j)) {
            if cc.is_registered(base) {
                out.push(CriticalPair {
                    a: t,
                    b: base,
                    origin: Origin::Base,
                });
            }
        }
    }
    out
}

/// Critical pairs of a formula once its atoms are loaded into cc.
pub fn formula_critical_pairs(f: &Formula) -> Vec<CriticalPair> {
    let Ok(mut g) = desugar_extensionality(&encode_maps(f), DiffArrayMode::Witness) else {
        return Vec::new();
    };
    let d = dispatch(&mut g);
    let mut cc = Cc::new();
    for atom in &d.cc {
        if let Some(lit) = cc_lit(atom) {
            if cc.assert_lit(&mut g.terms, lit).is_err() {
                break;
            }
        }
    }
    register_array_terms(&mut cc, &mut g, &d.fd);
    critical_pairs(&g, &cc)
}

fn cc_lit(atom: &Atom) -> Option<Lit> {
    match *atom {
        Atom::Eq(a, b) | Atom::ArrayEq(a, b) => Some(Lit::Eq(a, b)),
        Atom::Diff(a, b) => Some(Lit::Diff(a, b)),
        _ => None,
    }
}

/// Makes every read and write of the formula known to cc, including those
/// occurring only in arithmetic atoms.
fn register_array_terms(cc: &mut Cc, g: &mut Formula, atoms: &[Atom]) -> Vec<Deduction> {
    let roots: Vec<TermId> = atoms.iter().filter(|a| !a.is_decl()).flat_map(Atom::terms).collect();
    let mut out = Vec::new();
    for t in g.terms.closure(roots) {
        if matches!(g.terms.kind(t), TermKind::Select(..) | TermKind::Store(..)) && !cc.is_registered(t) {
            match cc.create(&mut g.terms, t) {
                Ok(d) => out.extend(d),
                Err(_) => break,
            }
        }
    }
    out
}

/// Congruence closure with copy-on-write snapshots, one per decision level.
struct Checkpointed {
    cc: Cc,
    saved: Vec<Option<Cc>>,
}

impl Checkpointed {
    fn touch(&mut self) -> &mut Cc {
        if let Some(top @ None) = self.saved.last_mut() {
            *top = Some(self.cc.clone());
        }
        &mut self.cc
    }
    fn push(&mut self) {
        self.saved.push(None);
    }
    fn pop(&mut self) {
        if let Some(Some(cc)) = self.saved.pop() {
            self.cc = cc;
        }
    }
}

struct Session<'a> {
    g: &'a mut Formula,
    enc: Encoding,
    cc: Checkpointed,
    cfg: Config,
    stats: Stats,
    log: Vec<Message>,
    round: u64,
    rounds_here: u64,
    /// cc reported a contradiction at the current node.
    cc_failed: bool,
}

impl Session<'_> {
    fn record(&mut self, dir: Dir, kind: Kind, terms: &[TermId]) {
        if self.cfg.trace {
            let terms = terms.iter().map(|&t| print_term(self.g, t)).collect();
            self.log.push(Message {
                round: self.round,
                dir,
                kind,
                terms,
            });
        }
    }

    fn var(&mut self, s: &mut Store, t: TermId) -> VarId {
        self.enc.int_term(self.g, s, t)
    }

    /// Posts cc deductions as fd constraints. Returns the message count.
    fn forward(&mut self, s: &mut Store, deds: Vec<Deduction>) -> u64 {
        let mut sent = 0;
        for d in deds {
            sent += 1;
            match d {
                Deduction::NewEq(a, b) => {
                    self.record(Dir::CcToFd, Kind::AssertEq, &[a, b]);
                    if self.g.terms.sort(a) == Sort::Int {
                        let (x, y) = (self.var(s, a), self.var(s, b));
                        s.post(fd::props::Eq(x, y));
                    } else {
                        let x = self.enc.array_term(self.g, s, a);
                        let y = self.enc.array_term(self.g, s, b);
                        s.post(fd::props::ArrayEq(x, y));
                    }
                }
                Deduction::NewDiff(a, b) => {
                    self.record(Dir::CcToFd, Kind::AssertDiff, &[a, b]);
                    if self.g.terms.sort(a) == Sort::Int {
                        let (x, y) = (self.var(s, a), self.var(s, b));
                        s.post(fd::props::Diff(x, y));
                    }
                }
                Deduction::Clique3(tri) => {
                    self.record(Dir::CcToFd, Kind::PostAllDiff, &tri);
                    if tri.iter().all(|&t| self.g.terms.sort(t) == Sort::Int) {
                        self.enc.post_alldiff(self.g, s, &tri);
                    }
                }
                Deduction::NewTerm(t) => {
                    self.record(Dir::CcToFd, Kind::NewTerm, &[t]);
                    self.var(s, t);
                }
            }
        }
        sent
    }

    /// Asserts a literal into cc and forwards what follows from it.
    fn tell_cc(&mut self, s: &mut Store, lit: Lit) -> Result<u64, Fail> {
        s.add_work(1);
        let res = self.cc.touch().assert_lit(&mut self.g.terms, lit);
        match res {
            Ok(deds) => Ok(self.forward(s, deds)),
            Err(_) => {
                self.cc_failed = true;
                Err(Fail)
            }
        }
    }

    fn cc_to_fd_bound(&self) -> u64 {
        let (mut stores, mut selects) = (0u64, 0u64);
        for t in self.g.terms.ids() {
            if !self.cc.cc.is_registered(t) {
                continue;
            }
            match self.g.terms.kind(t) {
                TermKind::Store(..) => stores += 1,
                TermKind::Select(..) => selects += 1,
                _ => {}
            }
        }
        stores + selects * selects
    }

    fn check_bounds(&mut self, fd_to_cc: u64, pairs: u64, cc_to_fd: u64) {
        self.stats.fd_to_cc += fd_to_cc;
        self.stats.cc_to_fd += cc_to_fd;
        if fd_to_cc > pairs || (cc_to_fd > 0 && cc_to_fd > self.cc_to_fd_bound()) {
            self.stats.bound_violations += 1;
        }
    }

    /// One exchange round: every unresolved critical pair is put to fd and
    /// the answers go to cc.
    fn exchange(&mut self, s: &mut Store) -> Result<(), Fail> {
        self.round += 1;
        self.rounds_here += 1;
        self.stats.rounds += 1;
        self.stats.max_rounds_seen = self.stats.max_rounds_seen.max(self.rounds_here);
        if self.rounds_here > self.cfg.max_rounds {
            self.stats.round_cap_hit = true;
            return Err(Fail);
        }
        let pairs = critical_pairs(self.g, &self.cc.cc);
        let (mut answers, mut sent) = (0u64, 0u64);
        for p in &pairs {
            let lit = Lit::Eq(p.a, p.b);
            if self.cc.cc.partial_eval(lit) != Truth::Unknown {
                continue;
            }
            let (x, y) = (self.var(s, p.a), self.var(s, p.b));
            let answer = if fd::is_fd_eq(s, x, y) {
                Some(Lit::Eq(p.a, p.b))
            } else if fd::is_fd_diff(s, x, y, self.cfg.probe) {
                Some(Lit::Diff(p.a, p.b))
            } else {
                None
            };
            let Some(answer) = answer else { continue };
            answers += 1;
            let kind = if matches!(answer, Lit::Eq(..)) { Kind::PairEq } else { Kind::PairDiff };
            self.record(Dir::FdToCc, kind, &[p.a, p.b]);
            match self.tell_cc(s, answer) {
                Ok(n) => sent += n,
                Err(f) => {
                    self.check_bounds(answers, pairs.len() as u64, sent);
                    return Err(f);
                }
            }
        }
        self.check_bounds(answers, pairs.len() as u64, sent);
        Ok(())
    }
}

impl Hook for Session<'_> {
    fn fixpoint(&mut self, s: &mut Store) -> Result<(), Fail> {
        if self.cfg.solver != SolverKind::Fdcc {
            return Ok(());
        }
        self.exchange(s)
    }

    fn push(&mut self) {
        self.cc.push();
        self.rounds_here = 0;
    }

    fn pop(&mut self) {
        self.cc.pop();
        self.rounds_here = 0;
        self.cc_failed = false;
        if self.cfg.trace {
            self.log.push(Message {
                round: self.round,
                dir: Dir::Supervisor,
                kind: Kind::Backtrack,
                terms: Vec::new(),
            });
        }
    }

    fn decision(&mut self, s: &mut Store, x: VarId, k: i64, positive: bool) -> Result<(), Fail> {
        if self.cfg.trace {
            let name = s.name(x).map_or_else(|| format!("_v{x}"), str::to_string);
            let op = if positive { "=" } else { "!=" };
            self.log.push(Message {
                round: self.round,
                dir: Dir::Supervisor,
                kind: Kind::Decision,
                terms: vec![format!("{name} {op} {k}")],
            });
        }
        if self.cfg.solver != SolverKind::Cc {
            return Ok(());
        }
        let Some(t) = self.enc.term_of(x) else { return Ok(()) };
        if !self.cc.cc.is_registered(t) {
            return Ok(());
        }
        let c = self.g.terms.constant(k);
        let lit = if positive { Lit::Eq(t, c) } else { Lit::Diff(t, c) };
        self.tell_cc(s, lit).map(|n| self.stats.cc_to_fd += n)
    }

    fn labelable(&self, x: VarId) -> bool {
        self.enc.term_of(x).is_some_and(|t| self.cc.cc.is_registered(t))
    }
}

fn budget(limit: Limit) -> Budget {
    match limit {
        Limit::None => Budget::Unlimited,
        Limit::Time(d) => Budget::wall(d),
        Limit::Work(w) => Budget::Work(w),
    }
}

/// Reads the values of the original formula's symbols out of a solution.
fn extract_model(f: &Formula, g: &Formula, enc: &Encoding, s: &Store, values: &[i64]) -> GroundModel {
    let mut m = GroundModel::default();
    let val = |v: VarId| values[v];
    let array_cells = |name: &str| -> Vec<i64> {
        let t = g.symbol(name).expect("array kept by preprocessing");
        let a = enc.array_of(t).expect("array encoded");
        match s.array(a) {
            Array::Fixed(cells) => cells.iter().map(|&c| val(c)).collect(),
            Array::Unclosed { cells, size, elems } => (0..val(*size))
                .map(|k| cells.get(&k).map_or(elems.min(), |&c| val(c)))
                .collect(),
            Array::Uniform { .. } => unreachable!("uniform arrays are not declared arrays"),
        }
    };
    for (t, _) in f.int_vars() {
        let name = f.name_of(t).expect("named");
        let v = g.symbol(name).and_then(|u| enc.var_of(u)).expect("int encoded");
        m.ints.insert(name.to_string(), val(v));
    }
    for (_, info) in f.declared_arrays() {
        m.arrays.insert(info.name.clone(), array_cells(&info.name));
    }
    for (_, info) in f.declared_maps() {
        let (en, kn) = map_array_names(f, &info.name);
        let (vals, flags) = (array_cells(&en), array_cells(&kn));
        let entries: BTreeMap<i64, i64> = (info.keys.0..=info.keys.1)
            .filter(|&k| flags[k as usize] == 1)
            .map(|k| (k, vals[k as usize]))
            .collect();
        m.maps.insert(info.name.clone(), entries);
    }
    m
}

/// Decides a formula.
pub fn solve(f: &Formula, cfg: &Config) -> SolveResult {
    let mut log = Vec::new();
    let stats = Stats::default();
    let unsat = |log: &mut Vec<Message>, stats: Stats, src: Source| {
        if cfg.trace {
            log.push(Message {
                round: 0,
                dir: Dir::Supervisor,
                kind: Kind::VerdictUnsat,
                terms: vec![format!("{src:?}").to_lowercase()],
            });
        }
        SolveResult {
            verdict: Verdict::Unsat(src),
            stats,
            log: std::mem::take(log),
            dump: None,
        }
    };

    let encoded = encode_maps(f);
    let mut g = match desugar_extensionality(&encoded, cfg.diff_array) {
        Ok(g) => g,
        Err(_) => return unsat(&mut log, stats, Source::Preprocess),
    };
    let d = dispatch(&mut g);
    let budget = budget(cfg.limit);

    let mut s = Store::new();
    let mut enc = Encoding::new(cfg.alldiff);
    enc.post_atoms(&g, &d.fd, &mut s)
        .expect("map atoms are encoded before reaching the store");

    let mut session = Session {
        g: &mut g,
        enc,
        cc: Checkpointed {
            cc: Cc::new(),
            saved: Vec::new(),
        },
        cfg: *cfg,
        stats,
        log,
        round: 0,
        rounds_here: 0,
        cc_failed: false,
    };

    if cfg.solver != SolverKind::Fd {
        let mut failed = false;
        let mut sent = 0;
        for atom in &d.cc {
            let Some(lit) = cc_lit(atom) else { continue };
            match session.tell_cc(&mut s, lit) {
                Ok(n) => sent += n,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            let deds = register_array_terms(&mut session.cc.cc, session.g, &d.fd);
            sent += session.forward(&mut s, deds);
            failed = session.cc.cc.is_inconsistent();
        }
        session.stats.cc_to_fd += sent;
        if failed {
            let (mut log, stats) = (std::mem::take(&mut session.log), session.stats);
            return unsat(&mut log, stats, Source::Cc);
        }
        // make every cc term visible to fd so that cc-only labelling sees it
        let terms: Vec<TermId> = session
            .g
            .terms
            .ids()
            .filter(|&t| session.cc.cc.is_registered(t) && session.g.terms.sort(t) == Sort::Int)
            .collect();
        for t in terms {
            session.var(&mut s, t);
        }
    }
    if cfg.solver == SolverKind::Cc {
        s.set_filtering(false);
    }

    let dump = cfg.dump.then(|| {
        format!(
            "; congruence closure\n{}; domains\n{}",
            session.cc.cc.dump(&session.g.terms),
            s.dump()
        )
    });

    let mut search = SearchStats::default();
    let outcome = label(&mut s, &mut session, &budget, &mut search);
    let mut stats = session.stats;
    stats.decisions = search.decisions;
    stats.failures = search.failures;
    stats.work = s.work();
    let cc_failed = session.cc_failed;
    let enc = session.enc;
    let mut log = session.log;
    let verdict = match outcome {
        Outcome::Sat(values) => {
            let m = extract_model(f, &g, &enc, &s, &values);
            debug_assert!(crate::oracle::eval(f, &m), "model rejected: {m}");
            Verdict::Sat(m)
        }
        Outcome::Unsat if stats.round_cap_hit => Verdict::Unknown,
        Outcome::Unsat => Verdict::Unsat(if cc_failed && stats.decisions == 0 {
            Source::Cc
        } else {
            Source::Fd
        }),
        Outcome::Unknown => Verdict::Unknown,
    };
    if cfg.trace {
        let (kind, terms) = match &verdict {
            Verdict::Sat(m) => (Kind::VerdictSat, vec![m.to_string()]),
            Verdict::Unsat(src) => (Kind::VerdictUnsat, vec![format!("{src:?}").to_lowercase()]),
            Verdict::Unknown => (Kind::VerdictUnknown, Vec::new()),
        };
        log.push(Message {
            round: 0,
            dir: Dir::Supervisor,
            kind,
            terms,
        });
    }
    SolveResult {
        verdict,
        stats,
        log,
        dump,
    }
}

/// Re-runs a solve and reports whether it produces exactly the recorded
/// messages and verdict.
pub fn replay(f: &Formula, cfg: &Config, recorded: &[Message]) -> bool {
    let cfg = Config { trace: true, ..*cfg };
    solve(f, &cfg).log == recorded
}
