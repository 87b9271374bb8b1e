//! Depth-first labelling with binary `X = k` / `X != k` branching.

use std::time::{Duration, Instant};

use super::store::{Fail, Store, VarId};

/// Resource limit for a search: wall-clock or deterministic work units.
#[derive(Debug, Clone, Copy)]
pub enum Budget {
    Unlimited,
    Deadline(Instant),
    Work(u64),
}

impl Budget {
    pub fn wall(timeout: Duration) -> Self {
        Budget::Deadline(Instant::now() + timeout)
    }

    pub fn exhausted(&self, store: &Store) -> bool {
        match *self {
            Budget::Unlimited => false,
            Budget::Deadline(t) => Instant::now() >= t,
            Budget::Work(w) => store.work() >= w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Value of every variable, indexed by `VarId`.
    Sat(Vec<i64>),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Left branches taken.
    pub decisions: u64,
    pub failures: u64,
}

/// Callbacks through which a cooperating engine observes the search.
pub trait Hook {
    /// Called at every node once propagation is at a fixpoint. May post
    /// constraints; the search propagates again until neither side has
    /// anything left to say.
    fn fixpoint(&mut self, _s: &mut Store) -> Result<(), Fail> {
        Ok(())
    }
    fn push(&mut self) {}
    fn pop(&mut self) {}
    /// A labelling choice `x = k` (`positive`) or `x != k` has been applied.
    fn decision(&mut self, _s: &mut Store, _x: VarId, _k: i64, _positive: bool) -> Result<(), Fail> {
        Ok(())
    }
    /// Whether `x` may be labelled while the store is in check-only mode.
    fn labelable(&self, _x: VarId) -> bool {
        true
    }
}

pub struct NoHook;

impl Hook for NoHook {}

/// Propagates and lets the hook speak until neither adds anything.
pub fn settle(s: &mut Store, hook: &mut dyn Hook) -> Result<(), Fail> {
    loop {
        s.propagate()?;
        hook.fixpoint(s)?;
        if s.queue_is_empty() {
            return Ok(());
        }
    }
}

/// Next variable to label: lowest tier, then smallest domain, then lowest id.
pub fn select_var(s: &Store, only: impl Fn(VarId) -> bool) -> Option<VarId> {
    let mut best: Option<(u8, u64, VarId)> = None;
    for v in 0..s.num_vars() {
        if s.is_dead(v) || s.dom(v).is_fixed() || !only(v) {
            continue;
        }
        let key = (s.tier(v), s.dom(v).size(), v);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, v)| v)
}

/// Labels every live variable. On `Sat` the store is left at the leaf.
pub fn label(s: &mut Store, hook: &mut dyn Hook, budget: &Budget, stats: &mut SearchStats) -> Outcome {
    let mut path: Vec<(VarId, i64)> = Vec::new();
    let mut status = settle(s, hook);
    loop {
        if budget.exhausted(s) {
            return Outcome::Unknown;
        }
        match status {
            Ok(()) => {
                let next = if s.filtering() {
                    select_var(s, |_| true)
                } else {
                    match select_var(s, |v| hook.labelable(v)) {
                        Some(v) => Some(v),
                        None => {
                            s.set_filtering(true);
                            status = settle(s, hook);
                            continue;
                        }
                    }
                };
                match next {
                    None => {
                        if s.verify() {
                            let model = (0..s.num_vars()).map(|v| s.dom(v).min()).collect();
                            return Outcome::Sat(model);
                        }
                        debug_assert!(false, "total assignment rejected by a propagator");
                        status = Err(Fail);
                    }
                    Some(x) => {
                        let k = s.dom(x).min();
                        stats.decisions += 1;
                        s.push();
                        hook.push();
                        path.push((x, k));
                        status = s
                            .assign(x, k)
                            .map(|_| ())
                            .and_then(|_| hook.decision(s, x, k, true))
                            .and_then(|_| settle(s, hook));
                    }
                }
            }
            Err(Fail) => {
                stats.failures += 1;
                let Some((x, k)) = path.pop() else {
                    return Outcome::Unsat;
                };
                s.pop();
                hook.pop();
                status = s
                    .remove(x, k)
                    .map(|_| ())
                    .and_then(|_| hook.decision(s, x, k, false))
                    .and_then(|_| settle(s, hook));
            }
        }
    }
}

/// `x` and `y` are known equal: same variable or the same single value.
pub fn is_fd_eq(s: &Store, x: VarId, y: VarId) -> bool {
    s.is_eq(x, y)
}

/// `x` and `y` are known different: disjoint domains, or, when `probe` is
/// set, posting `x = y` fails. The store is left unchanged.
pub fn is_fd_diff(s: &mut Store, x: VarId, y: VarId, probe: bool) -> bool {
    if s.disjoint(x, y) {
        return true;
    }
    if !probe || x == y || !s.queue_is_empty() {
        return false;
    }
    s.push();
    s.post(super::props::Eq(x, y));
    let failed = s.propagate().is_err();
    s.pop();
    failed
}
