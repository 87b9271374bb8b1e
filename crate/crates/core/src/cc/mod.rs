//! Congruence closure for arrays: union-find with disequality sets,
//! functional-consistency rules and read-over-write rules evaluated lazily
//! through per-class watch lists.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write};
use std::mem;

use thiserror::Error;

use crate::formula::{TermId, TermKind, TermTable};

/// An equality or disequality between two integer (or array) terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Eq(TermId, TermId),
    Diff(TermId, TermId),
}

impl Lit {
    pub fn terms(self) -> (TermId, TermId) {
        match self {
            Lit::Eq(a, b) | Lit::Diff(a, b) => (a, b),
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Eq(a, b) => write!(f, "{a} = {b}"),
            Lit::Diff(a, b) => write!(f, "{a} != {b}"),
        }
    }
}

/// Facts derived by the rules, reported to whoever drives the closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deduction {
    NewEq(TermId, TermId),
    NewDiff(TermId, TermId),
    /// Three pairwise different classes, by representative, sorted.
    Clique3([TermId; 3]),
    /// A term introduced by a read-over-write rule.
    NewTerm(TermId),
}

/// Some class ended up different from itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("congruence closure found a contradiction")]
pub struct Inconsistent;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone, Copy)]
enum Consequence {
    Lit(Lit),
    /// `t = select(array, index)`, creating the read if needed.
    ReadBase { t: TermId, array: TermId, index: TermId },
}

#[derive(Debug, Clone)]
struct Watch {
    guard: Lit,
    then: Consequence,
    done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sig {
    Select(TermId, TermId),
    Store(TermId, TermId, TermId),
    Size(TermId),
    Delete(TermId, TermId),
    Uniform(TermId, Option<u32>),
}

#[derive(Debug, Clone, Default)]
pub struct Cc {
    registered: Vec<bool>,
    parent: Vec<TermId>,
    rank: Vec<u8>,
    diff: Vec<BTreeSet<TermId>>,
    /// Compound terms with a direct argument in the class.
    uses: Vec<Vec<TermId>>,
    /// Select terms belonging to the class.
    sels: Vec<Vec<TermId>>,
    is_const: Vec<bool>,
    watch_of: Vec<Vec<u32>>,
    watches: Vec<Watch>,
    sigs: HashMap<Sig, TermId>,
    /// Read-over-write terms waiting for `select(A, j)` to appear.
    row_wait: HashMap<(TermId, TermId), Vec<TermId>>,
    row_terms: Vec<TermId>,
    consts: Vec<TermId>,
    cliques: HashSet<[TermId; 3]>,
    todo: VecDeque<(Lit, bool)>,
    out: Vec<Deduction>,
    inconsistent: bool,
}

impl Cc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_registered(&self, t: TermId) -> bool {
        self.registered.get(t.index()).copied().unwrap_or(false)
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// Registered terms of the form `select(store(A, i, e), j)`.
    pub fn row_terms(&self) -> &[TermId] {
        &self.row_terms
    }

    pub fn find(&self, t: TermId) -> TermId {
        if !self.is_registered(t) {
            return t;
        }
        let mut x = t;
        while self.parent[x.index()] != x {
            x = self.parent[x.index()];
        }
        x
    }

    fn find_mut(&mut self, t: TermId) -> TermId {
        let root = self.find(t);
        let mut x = t;
        while self.parent[x.index()] != root {
            let next = self.parent[x.index()];
            self.parent[x.index()] = root;
            x = next;
        }
        root
    }

    pub fn equal(&self, a: TermId, b: TermId) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn diff(&self, a: TermId, b: TermId) -> bool {
        if !self.is_registered(a) || !self.is_registered(b) {
            return false;
        }
        let (ra, rb) = (self.find(a), self.find(b));
        self.diff[ra.index()].contains(&rb)
    }

    pub fn partial_eval(&self, lit: Lit) -> Truth {
        let (a, b) = lit.terms();
        let holds = match lit {
            Lit::Eq(..) => self.equal(a, b),
            Lit::Diff(..) => self.diff(a, b),
        };
        let fails = match lit {
            Lit::Eq(..) => self.diff(a, b),
            Lit::Diff(..) => self.equal(a, b),
        };
        if holds {
            Truth::True
        } else if fails {
            Truth::False
        } else {
            Truth::Unknown
        }
    }

    /// Registers `t` and its sub-terms.
    pub fn create(&mut self, tt: &mut TermTable, t: TermId) -> Result<Vec<Deduction>, Inconsistent> {
        self.register(tt, t);
        self.run(tt)
    }

    /// Asserts a literal and closes under the rules.
    pub fn assert_lit(&mut self, tt: &mut TermTable, lit: Lit) -> Result<Vec<Deduction>, Inconsistent> {
        if self.inconsistent {
            return Err(Inconsistent);
        }
        let (a, b) = lit.terms();
        self.register(tt, a);
        self.register(tt, b);
        self.todo.push_back((lit, false));
        self.run(tt)
    }

    /// Three-cliques through the (new) disequality between the classes of
    /// `a` and `b` that were not reported before.
    pub fn find_3cliques(&mut self, a: TermId, b: TermId) -> Vec<[TermId; 3]> {
        let (ra, rb) = (self.find(a), self.find(b));
        let common: Vec<TermId> = self.diff[ra.index()]
            .intersection(&self.diff[rb.index()])
            .copied()
            .collect();
        let mut found = Vec::new();
        for w in common {
            let mut tri = [ra, rb, w];
            tri.sort();
            let consts = tri.iter().filter(|t| self.is_const[t.index()]).count();
            if consts >= 2 {
                continue;
            }
            if self.cliques.insert(tri) {
                found.push(tri);
            }
        }
        found
    }

    /// Number of live watches whose guard is already decided. Zero whenever
    /// the closure is at rest.
    pub fn stale_watches(&self) -> usize {
        self.watch_of
            .iter()
            .flatten()
            .filter(|&&w| {
                let w = &self.watches[w as usize];
                !w.done && self.partial_eval(w.guard) != Truth::Unknown
            })
            .count()
    }

    /// Direct super-terms of the class of `t`.
    pub fn super_terms(&self, t: TermId) -> Vec<TermId> {
        let mut v = self.uses[self.find(t).index()].clone();
        v.sort();
        v.dedup();
        v
    }

    /// `(index, array)` of every read in the class of `t`.
    pub fn sub_terms(&self, tt: &TermTable, t: TermId) -> Vec<(TermId, TermId)> {
        self.sels[self.find(t).index()]
            .iter()
            .filter_map(|&s| match *tt.kind(s) {
                TermKind::Select(a, i) => Some((i, a)),
                _ => None,
            })
            .collect()
    }

    pub fn live_watches(&self) -> usize {
        self.watches.iter().filter(|w| !w.done).count()
    }

    fn grow(&mut self, n: usize) {
        if self.registered.len() < n {
            self.registered.resize(n, false);
            self.parent.resize(n, TermId(0));
            self.rank.resize(n, 0);
            self.diff.resize_with(n, BTreeSet::new);
            self.uses.resize_with(n, Vec::new);
            self.sels.resize_with(n, Vec::new);
            self.is_const.resize(n, false);
            self.watch_of.resize_with(n, Vec::new);
        }
    }

    fn sig(&self, tt: &TermTable, t: TermId) -> Option<Sig> {
        let f = |x| self.find(x);
        Some(match *tt.kind(t) {
            TermKind::Select(a, i) => Sig::Select(f(a), f(i)),
            TermKind::Store(a, i, e) => Sig::Store(f(a), f(i), f(e)),
            TermKind::Size(a) => Sig::Size(f(a)),
            TermKind::Delete(m, k) => Sig::Delete(f(m), f(k)),
            TermKind::Uniform { elem, size } => Sig::Uniform(f(elem), size),
            TermKind::Var(_) | TermKind::Const(_) => return None,
        })
    }

    /// Looks `p` up in the signature table, queueing a congruence if a
    /// different class already has the same signature.
    fn congruence(&mut self, tt: &TermTable, p: TermId) {
        let Some(sig) = self.sig(tt, p) else { return };
        match self.sigs.get(&sig).copied() {
            Some(q) if q != p && self.sig(tt, q) == Some(sig) => {
                if self.find(q) != self.find(p) {
                    self.todo.push_back((Lit::Eq(p, q), true));
                }
            }
            _ => {
                self.sigs.insert(sig, p);
            }
        }
    }

    fn register(&mut self, tt: &mut TermTable, t: TermId) {
        if self.is_registered(t) {
            return;
        }
        for c in tt.children(t) {
            self.register(tt, c);
        }
        self.grow(tt.len());
        let ix = t.index();
        self.registered[ix] = true;
        self.parent[ix] = t;
        for c in tt.children(t) {
            let rc = self.find(c);
            self.uses[rc.index()].push(t);
        }
        self.congruence(tt, t);

        match *tt.kind(t) {
            TermKind::Const(_) => {
                self.is_const[ix] = true;
                for k in 0..self.consts.len() {
                    let other = self.consts[k];
                    self.todo.push_back((Lit::Diff(t, other), false));
                }
                self.consts.push(t);
            }
            TermKind::Select(a, j) => {
                self.sels[ix].push(t);
                if let TermKind::Uniform { elem, .. } = *tt.kind(a) {
                    self.todo.push_back((Lit::Eq(t, elem), true));
                }
                if let Some(waiting) = self.row_wait.remove(&(a, j)) {
                    for r in waiting {
                        self.watch_base_read(tt, r, t);
                    }
                }
                if let Some((a, i, e, j)) = tt.as_read_over_write(t) {
                    self.row_terms.push(t);
                    self.install(tt, Lit::Eq(i, j), Consequence::Lit(Lit::Eq(t, e)));
                    self.install(tt, Lit::Diff(t, e), Consequence::Lit(Lit::Diff(i, j)));
                    self.install(
                        tt,
                        Lit::Diff(i, j),
                        Consequence::ReadBase { t, array: a, index: j },
                    );
                    match tt.lookup(&TermKind::Select(a, j)) {
                        Some(base) if self.is_registered(base) => self.watch_base_read(tt, t, base),
                        _ => self.row_wait.entry((a, j)).or_default().push(t),
                    }
                }
            }
            _ => {}
        }
    }

    /// `t != select(A, j)  ▷  i = j` for `t = select(store(A, i, e), j)`.
    fn watch_base_read(&mut self, tt: &mut TermTable, t: TermId, base: TermId) {
        let (_, i, _, j) = tt.as_read_over_write(t).expect("not a read over write");
        self.install(tt, Lit::Diff(t, base), Consequence::Lit(Lit::Eq(i, j)));
    }

    fn install(&mut self, tt: &mut TermTable, guard: Lit, then: Consequence) {
        let id = self.watches.len() as u32;
        self.watches.push(Watch {
            guard,
            then,
            done: false,
        });
        if !self.check_one(tt, id) {
            let (a, b) = guard.terms();
            let (ra, rb) = (self.find(a), self.find(b));
            self.watch_of[ra.index()].push(id);
            if rb != ra {
                self.watch_of[rb.index()].push(id);
            }
        }
    }

    /// Evaluates one watch, firing it if its guard holds. Returns whether the
    /// watch is finished.
    fn check_one(&mut self, tt: &mut TermTable, id: u32) -> bool {
        let w = &self.watches[id as usize];
        if w.done {
            return true;
        }
        match self.partial_eval(w.guard) {
            Truth::Unknown => false,
            Truth::False => {
                self.watches[id as usize].done = true;
                true
            }
            Truth::True => {
                self.watches[id as usize].done = true;
                match self.watches[id as usize].then {
                    Consequence::Lit(lit) => self.todo.push_back((lit, true)),
                    Consequence::ReadBase { t, array, index } => {
                        let read = tt.select(array, index);
                        if !self.is_registered(read) {
                            self.register(tt, read);
                            self.out.push(Deduction::NewTerm(read));
                        }
                        self.todo.push_back((Lit::Eq(t, read), true));
                    }
                }
                true
            }
        }
    }

    fn check_class(&mut self, tt: &mut TermTable, r: TermId) {
        let ids = mem::take(&mut self.watch_of[r.index()]);
        let mut keep = Vec::with_capacity(ids.len());
        for id in ids {
            if !self.check_one(tt, id) {
                keep.push(id);
            }
        }
        let r = self.find(r);
        let added = mem::take(&mut self.watch_of[r.index()]);
        keep.extend(added);
        self.watch_of[r.index()] = keep;
    }

    fn run(&mut self, tt: &mut TermTable) -> Result<Vec<Deduction>, Inconsistent> {
        while let Some((lit, derived)) = self.todo.pop_front() {
            let step = match lit {
                Lit::Eq(a, b) => self.merge(tt, a, b, derived),
                Lit::Diff(a, b) => self.separate(tt, a, b, derived),
            };
            if step.is_err() {
                self.inconsistent = true;
                self.todo.clear();
                self.out.clear();
                return Err(Inconsistent);
            }
        }
        Ok(mem::take(&mut self.out))
    }

    /// FC-2 between two different classes: reads of the same array at
    /// different values have different indexes.
    fn close_diff(&mut self, tt: &TermTable, r1: TermId, r2: TermId) {
        for k in 0..self.sels[r1.index()].len() {
            let s1 = self.sels[r1.index()][k];
            let TermKind::Select(a, i) = *tt.kind(s1) else { continue };
            for m in 0..self.sels[r2.index()].len() {
                let s2 = self.sels[r2.index()][m];
                let TermKind::Select(b, j) = *tt.kind(s2) else { continue };
                if self.find(a) == self.find(b) && !self.diff(i, j) {
                    self.todo.push_back((Lit::Diff(i, j), true));
                }
            }
        }
    }

    fn merge(&mut self, tt: &mut TermTable, a: TermId, b: TermId, derived: bool) -> Result<(), Inconsistent> {
        let (ra, rb) = (self.find_mut(a), self.find_mut(b));
        if ra == rb {
            return Ok(());
        }
        if self.diff[ra.index()].contains(&rb) {
            return Err(Inconsistent);
        }
        if derived {
            self.out.push(Deduction::NewEq(a, b));
        }
        let (w, l) = if self.rank[ra.index()] >= self.rank[rb.index()] {
            (ra, rb)
        } else {
            (rb, ra)
        };

        // Reads of the merged arrays that now compare across a disequality.
        let reads = |cc: &Self, r: TermId| -> Vec<TermId> {
            cc.uses[r.index()]
                .iter()
                .copied()
                .filter(|&u| matches!(*tt.kind(u), TermKind::Select(x, _) if cc.find(x) == r))
                .collect()
        };
        let (rl, rw) = (reads(self, l), reads(self, w));
        for &s1 in &rl {
            for &s2 in &rw {
                if self.diff(s1, s2) {
                    let (TermKind::Select(_, i), TermKind::Select(_, j)) = (tt.kind(s1), tt.kind(s2)) else {
                        unreachable!()
                    };
                    if !self.diff(*i, *j) {
                        self.todo.push_back((Lit::Diff(*i, *j), true));
                    }
                }
            }
        }

        self.parent[l.index()] = w;
        if self.rank[w.index()] == self.rank[l.index()] {
            self.rank[w.index()] += 1;
        }
        self.is_const[w.index()] |= self.is_const[l.index()];

        for d in mem::take(&mut self.diff[l.index()]) {
            self.diff[d.index()].remove(&l);
            self.diff[d.index()].insert(w);
            self.diff[w.index()].insert(d);
        }

        let moved = mem::take(&mut self.uses[l.index()]);
        for &p in &moved {
            self.congruence(tt, p);
        }
        self.uses[w.index()].extend(moved);

        let sels = mem::take(&mut self.sels[l.index()]);
        self.sels[w.index()].extend(sels);
        if !self.sels[w.index()].is_empty() {
            let others: Vec<TermId> = self.diff[w.index()].iter().copied().collect();
            for d in others {
                self.close_diff(tt, w, d);
            }
        }

        let watches = mem::take(&mut self.watch_of[l.index()]);
        self.watch_of[w.index()].extend(watches);
        self.check_class(tt, w);
        Ok(())
    }

    fn separate(&mut self, tt: &mut TermTable, a: TermId, b: TermId, derived: bool) -> Result<(), Inconsistent> {
        let (ra, rb) = (self.find_mut(a), self.find_mut(b));
        if ra == rb {
            return Err(Inconsistent);
        }
        if self.diff[ra.index()].contains(&rb) {
            return Ok(());
        }
        self.diff[ra.index()].insert(rb);
        self.diff[rb.index()].insert(ra);
        if derived && !(self.is_const[ra.index()] && self.is_const[rb.index()]) {
            self.out.push(Deduction::NewDiff(a, b));
        }
        self.close_diff(tt, ra, rb);
        for tri in self.find_3cliques(ra, rb) {
            self.out.push(Deduction::Clique3(tri));
        }
        self.check_class(tt, ra);
        self.check_class(tt, rb);
        Ok(())
    }

    /// Human-readable state: classes, disequalities and live watches.
    pub fn dump(&self, tt: &TermTable) -> String {
        let mut classes: std::collections::BTreeMap<TermId, Vec<TermId>> = Default::default();
        for t in tt.ids().filter(|&t| self.is_registered(t)) {
            classes.entry(self.find(t)).or_default().push(t);
        }
        let mut out = String::new();
        for (r, members) in &classes {
            let names: Vec<String> = members.iter().map(|m| m.to_string()).collect();
            let _ = write!(out, "class {r}: {{{}}}", names.join(", "));
            let diffs = &self.diff[r.index()];
            if !diffs.is_empty() {
                let d: Vec<String> = diffs.iter().map(|m| m.to_string()).collect();
                let _ = write!(out, " diff {{{}}}", d.join(", "));
            }
            out.push('\n');
        }
        for w in self.watches.iter().filter(|w| !w.done) {
            let then = match w.then {
                Consequence::Lit(l) => l.to_string(),
                Consequence::ReadBase { t, array, index } => format!("{t} = select({array}, {index})"),
            };
            let _ = writeln!(out, "watch {} => {then}", w.guard);
        }
        out
    }
}

#[cfg(test)]
mod tests;
