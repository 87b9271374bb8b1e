use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write};
use std::rc::Rc;

use super::domain::Domain;

pub type VarId = usize;
pub type PropId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayId(pub usize);

/// Propagation failed: some domain became empty or a constraint is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fail;

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("propagation failure")
    }
}

/// A filtering algorithm. Propagators keep no state of their own; they
/// re-enqueue themselves through the domain changes they make.
pub trait Propagator: fmt::Debug {
    fn name(&self) -> &'static str;
    /// Variables whose changes wake the propagator.
    fn vars(&self, s: &Store) -> Vec<VarId>;
    /// Arrays of unknown size whose new cells wake the propagator.
    fn arrays(&self) -> Vec<ArrayId> {
        Vec::new()
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail>;
    /// Truth value once every relevant variable is fixed, `None` before.
    fn check(&self, s: &Store) -> Option<bool>;
}

#[derive(Debug, Clone)]
pub enum Array {
    Fixed(Vec<VarId>),
    /// Every cell is `elem`; `size` is `None` for a read-only array of
    /// unbounded length.
    Uniform { elem: VarId, size: Option<u32> },
    /// Size given by a variable; only some cells are represented.
    Unclosed {
        cells: BTreeMap<i64, VarId>,
        size: VarId,
        elems: Domain,
    },
}

#[derive(Debug)]
enum Entry {
    Dom(VarId, Domain),
    Posted(PropId),
    Watch(VarId, PropId),
    Listen(ArrayId, PropId),
    Cell(ArrayId, i64),
    NewVar(VarId),
    Filtering(bool),
}

/// Labelling tiers: smaller tiers are labelled first.
pub const TIER_INDEX: u8 = 0;
pub const TIER_ELEM: u8 = 1;
pub const TIER_OTHER: u8 = 2;

#[derive(Debug)]
pub struct Store {
    doms: Vec<Domain>,
    stamp: Vec<u32>,
    tier: Vec<u8>,
    dead: Vec<bool>,
    names: Vec<Option<String>>,
    watchers: Vec<Vec<PropId>>,
    props: Vec<Rc<dyn Propagator>>,
    active: Vec<bool>,
    arrays: Vec<Array>,
    listeners: Vec<Vec<PropId>>,
    queue: VecDeque<PropId>,
    in_queue: Vec<bool>,
    trail: Vec<Entry>,
    marks: Vec<usize>,
    stamps: Vec<u32>,
    next_stamp: u32,
    filtering: bool,
    work: u64,
}

impl Default for Store {
    fn default() -> Self {
        Self::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Store {
            doms: Vec::new(),
            stamp: Vec::new(),
            tier: Vec::new(),
            dead: Vec::new(),
            names: Vec::new(),
            watchers: Vec::new(),
            props: Vec::new(),
            active: Vec::new(),
            arrays: Vec::new(),
            listeners: Vec::new(),
            queue: VecDeque::new(),
            in_queue: Vec::new(),
            trail: Vec::new(),
            marks: Vec::new(),
            stamps: vec![0],
            next_stamp: 1,
            filtering: true,
            work: 0,
        }
    }

    pub fn level(&self) -> usize {
        self.marks.len()
    }

    /// Deterministic measure of effort: propagator executions so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn add_work(&mut self, w: u64) {
        self.work += w;
    }

    pub fn num_vars(&self) -> usize {
        self.doms.len()
    }

    pub fn num_props(&self) -> usize {
        self.props.len()
    }

    // ---- variables -------------------------------------------------------

    fn alloc(&mut self, d: Domain, tier: u8) -> VarId {
        assert!(!d.is_empty(), "variable created with an empty domain");
        let v = self.doms.len();
        self.doms.push(d);
        self.stamp.push(0);
        self.tier.push(tier);
        self.dead.push(false);
        self.names.push(None);
        self.watchers.push(Vec::new());
        v
    }

    /// A variable that survives backtracking.
    pub fn new_var(&mut self, d: Domain, tier: u8) -> VarId {
        self.alloc(d, tier)
    }

    /// A variable that is discarded when the current level is popped.
    pub fn new_var_trailed(&mut self, d: Domain, tier: u8) -> VarId {
        let v = self.alloc(d, tier);
        if self.level() > 0 {
            self.trail.push(Entry::NewVar(v));
        }
        v
    }

    pub fn set_name(&mut self, v: VarId, name: impl Into<String>) {
        self.names[v] = Some(name.into());
    }

    pub fn name(&self, v: VarId) -> Option<&str> {
        self.names[v].as_deref()
    }

    pub fn tier(&self, v: VarId) -> u8 {
        self.tier[v]
    }

    pub fn set_tier(&mut self, v: VarId, tier: u8) {
        self.tier[v] = self.tier[v].min(tier);
    }

    pub fn is_dead(&self, v: VarId) -> bool {
        self.dead[v]
    }

    pub fn dom(&self, v: VarId) -> &Domain {
        &self.doms[v]
    }

    /// Domain of `v` before the first decision still on the trail.
    pub fn root_dom(&self, v: VarId) -> &Domain {
        self.trail
            .iter()
            .find_map(|e| match e {
                Entry::Dom(w, d) if *w == v => Some(d),
                _ => None,
            })
            .unwrap_or(&self.doms[v])
    }

    pub fn value(&self, v: VarId) -> Option<i64> {
        self.doms[v].value()
    }

    pub fn min(&self, v: VarId) -> i64 {
        self.doms[v].min()
    }

    pub fn max(&self, v: VarId) -> i64 {
        self.doms[v].max()
    }

    /// Snapshot of every domain, for comparisons in tests and probes.
    pub fn domains(&self) -> Vec<Domain> {
        self.doms.clone()
    }

    /// Replaces the domain of `v` by a subset. Returns whether it changed.
    pub fn set_dom(&mut self, v: VarId, d: Domain) -> Result<bool, Fail> {
        if d.is_empty() {
            return Err(Fail);
        }
        if d == self.doms[v] {
            return Ok(false);
        }
        debug_assert!(d.is_subset(&self.doms[v]), "domain widened for var {v}");
        let cur = self.stamps[self.stamps.len() - 1];
        if self.level() > 0 && self.stamp[v] != cur {
            self.stamp[v] = cur;
            let old = std::mem::replace(&mut self.doms[v], d);
            self.trail.push(Entry::Dom(v, old));
        } else {
            self.doms[v] = d;
        }
        for k in 0..self.watchers[v].len() {
            let p = self.watchers[v][k];
            self.schedule(p);
        }
        Ok(true)
    }

    pub fn intersect(&mut self, v: VarId, d: &Domain) -> Result<bool, Fail> {
        let nd = self.doms[v].intersect(d);
        self.set_dom(v, nd)
    }

    pub fn remove(&mut self, v: VarId, val: i64) -> Result<bool, Fail> {
        if !self.doms[v].contains(val) {
            return Ok(false);
        }
        let nd = self.doms[v].without(val);
        self.set_dom(v, nd)
    }

    pub fn assign(&mut self, v: VarId, val: i64) -> Result<bool, Fail> {
        if !self.doms[v].contains(val) {
            return Err(Fail);
        }
        self.set_dom(v, Domain::singleton(val))
    }

    pub fn set_bounds(&mut self, v: VarId, lo: i64, hi: i64) -> Result<bool, Fail> {
        let d = &self.doms[v];
        if d.min() >= lo && d.max() <= hi {
            return Ok(false);
        }
        let nd = d.clamp(lo, hi);
        self.set_dom(v, nd)
    }

    /// Makes two variables' domains equal to their intersection.
    pub fn unify(&mut self, x: VarId, y: VarId) -> Result<(), Fail> {
        if x == y {
            return Ok(());
        }
        let d = self.doms[x].intersect(&self.doms[y]);
        self.set_dom(x, d.clone())?;
        self.set_dom(y, d)?;
        Ok(())
    }

    pub fn is_eq(&self, x: VarId, y: VarId) -> bool {
        x == y || matches!((self.value(x), self.value(y)), (Some(a), Some(b)) if a == b)
    }

    pub fn disjoint(&self, x: VarId, y: VarId) -> bool {
        x != y && self.doms[x].is_disjoint(&self.doms[y])
    }

    // ---- arrays ----------------------------------------------------------

    pub fn new_array(&mut self, a: Array) -> ArrayId {
        self.arrays.push(a);
        self.listeners.push(Vec::new());
        ArrayId(self.arrays.len() - 1)
    }

    pub fn array(&self, a: ArrayId) -> &Array {
        &self.arrays[a.0]
    }

    pub fn num_arrays(&self) -> usize {
        self.arrays.len()
    }

    /// Largest admissible length of the array.
    pub fn max_len(&self, a: ArrayId) -> i64 {
        match &self.arrays[a.0] {
            Array::Fixed(v) => v.len() as i64,
            Array::Uniform { size: Some(n), .. } => *n as i64,
            Array::Uniform { size: None, .. } => i64::MAX,
            Array::Unclosed { size, .. } => self.max(*size),
        }
    }

    /// Explicit cell variable at index `k`, if any.
    pub fn cell(&self, a: ArrayId, k: i64) -> Option<VarId> {
        if k < 0 {
            return None;
        }
        match &self.arrays[a.0] {
            Array::Fixed(v) => v.get(k as usize).copied(),
            Array::Uniform { elem, size } => match size {
                Some(n) if k >= *n as i64 => None,
                _ => Some(*elem),
            },
            Array::Unclosed { cells, .. } => cells.get(&k).copied(),
        }
    }

    /// Domain of the cell at `k`, or the whole element range when the cell
    /// is not represented.
    pub fn cell_dom(&self, a: ArrayId, k: i64) -> Domain {
        match self.cell(a, k) {
            Some(v) => self.doms[v].clone(),
            None => match &self.arrays[a.0] {
                Array::Unclosed { elems, .. } => elems.clone(),
                _ => Domain::empty(),
            },
        }
    }

    /// Cell variables of an array whose length is known.
    pub fn closed_cells(&self, a: ArrayId) -> Option<Vec<VarId>> {
        match &self.arrays[a.0] {
            Array::Fixed(v) => Some(v.clone()),
            Array::Uniform { elem, size: Some(n) } => Some(vec![*elem; *n as usize]),
            Array::Uniform { size: None, .. } => None,
            Array::Unclosed { cells, size, .. } => {
                let n = self.value(*size)?;
                let v: Vec<VarId> = (0..n).filter_map(|k| cells.get(&k).copied()).collect();
                (v.len() as i64 == n).then_some(v)
            }
        }
    }

    pub fn size_var(&self, a: ArrayId) -> Option<VarId> {
        match &self.arrays[a.0] {
            Array::Unclosed { size, .. } => Some(*size),
            _ => None,
        }
    }

    /// Every variable currently representing a cell.
    pub fn array_vars(&self, a: ArrayId) -> Vec<VarId> {
        match &self.arrays[a.0] {
            Array::Fixed(v) => v.clone(),
            Array::Uniform { elem, .. } => vec![*elem],
            Array::Unclosed { cells, size, .. } => {
                let mut v: Vec<VarId> = cells.values().copied().collect();
                v.push(*size);
                v
            }
        }
    }

    /// `A[k] == x`: unifies with the existing cell, or records `x` as the
    /// cell of an unclosed array.
    pub fn merge(&mut self, a: ArrayId, k: i64, x: VarId) -> Result<(), Fail> {
        if let Some(c) = self.cell(a, k) {
            return self.unify(c, x);
        }
        let (size, elems) = match &self.arrays[a.0] {
            Array::Unclosed { size, elems, .. } => (*size, elems.clone()),
            _ => return Err(Fail),
        };
        if k < 0 || k >= self.max(size) {
            return Err(Fail);
        }
        if let Array::Unclosed { cells, .. } = &mut self.arrays[a.0] {
            cells.insert(k, x);
        }
        if self.level() > 0 {
            self.trail.push(Entry::Cell(a, k));
        }
        self.intersect(x, &elems)?;
        self.set_bounds(size, k + 1, i64::MAX)?;
        for m in 0..self.listeners[a.0].len() {
            let p = self.listeners[a.0][m];
            self.add_watch(x, p);
            self.schedule(p);
        }
        Ok(())
    }

    /// Gives every unrepresented cell below the (fixed) size a fresh variable.
    pub fn fill(&mut self, a: ArrayId) -> Result<(), Fail> {
        let Array::Unclosed { size, elems, .. } = &self.arrays[a.0] else {
            return Ok(());
        };
        let (size, elems) = (*size, elems.clone());
        let Some(n) = self.value(size) else { return Ok(()) };
        for k in 0..n {
            if self.cell(a, k).is_none() {
                let v = self.new_var_trailed(elems.clone(), TIER_ELEM);
                self.merge(a, k, v)?;
            }
        }
        Ok(())
    }

    pub fn is_closed(&self, a: ArrayId) -> bool {
        self.closed_cells(a).is_some()
    }

    // ---- propagators ----------------------------------------------------

    fn add_watch(&mut self, v: VarId, p: PropId) {
        self.watchers[v].push(p);
        if self.level() > 0 {
            self.trail.push(Entry::Watch(v, p));
        }
    }

    fn install(&mut self, p: Rc<dyn Propagator>, trailed: bool) -> PropId {
        let id = self.props.len();
        let mut vars = p.vars(self);
        vars.sort_unstable();
        vars.dedup();
        let arrays = p.arrays();
        self.props.push(p);
        self.active.push(true);
        self.in_queue.push(false);
        for v in vars {
            self.watchers[v].push(id);
            if trailed {
                self.trail.push(Entry::Watch(v, id));
            }
        }
        for a in arrays {
            self.listeners[a.0].push(id);
            if trailed {
                self.trail.push(Entry::Listen(a, id));
            }
        }
        if trailed {
            self.trail.push(Entry::Posted(id));
        }
        self.schedule(id);
        id
    }

    /// Posts a propagator that is removed when the current level is popped.
    pub fn post(&mut self, p: impl Propagator + 'static) -> PropId {
        let trailed = self.level() > 0;
        self.install(Rc::new(p), trailed)
    }

    /// Posts a propagator that stays across backtracking. Only valid for
    /// constraints that hold regardless of the decisions taken so far.
    pub fn post_permanent(&mut self, p: impl Propagator + 'static) -> PropId {
        self.install(Rc::new(p), false)
    }

    pub fn schedule(&mut self, p: PropId) {
        if self.active[p] && !self.in_queue[p] {
            self.in_queue[p] = true;
            self.queue.push_back(p);
        }
    }

    pub fn schedule_all(&mut self) {
        for p in 0..self.props.len() {
            self.schedule(p);
        }
    }

    pub fn queue_is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn filtering(&self) -> bool {
        self.filtering
    }

    /// Switches between full filtering and check-only mode, in which
    /// propagators only verify fully instantiated constraints.
    pub fn set_filtering(&mut self, on: bool) {
        if self.filtering == on {
            return;
        }
        if self.level() > 0 {
            self.trail.push(Entry::Filtering(self.filtering));
        }
        self.filtering = on;
        self.schedule_all();
    }

    fn clear_queue(&mut self) {
        for p in self.queue.drain(..) {
            self.in_queue[p] = false;
        }
    }

    /// Runs scheduled propagators to a fixpoint.
    pub fn propagate(&mut self) -> Result<(), Fail> {
        while let Some(p) = self.queue.pop_front() {
            self.in_queue[p] = false;
            if !self.active[p] {
                continue;
            }
            self.work += 1;
            let prop = Rc::clone(&self.props[p]);
            let r = if self.filtering {
                prop.propagate(self)
            } else if prop.check(self) == Some(false) {
                Err(Fail)
            } else {
                Ok(())
            };
            if r.is_err() {
                self.clear_queue();
                return Err(Fail);
            }
        }
        Ok(())
    }

    /// Live propagators, for final model verification.
    pub fn active_props(&self) -> impl Iterator<Item = &Rc<dyn Propagator>> + '_ {
        self.props.iter().zip(&self.active).filter(|(_, &a)| a).map(|(p, _)| p)
    }

    /// Whether every live propagator accepts the current (total) assignment.
    pub fn verify(&self) -> bool {
        self.active_props().all(|p| p.check(self) == Some(true))
    }

    // ---- trail ----------------------------------------------------------

    pub fn push(&mut self) {
        self.marks.push(self.trail.len());
        self.stamps.push(self.next_stamp);
        self.next_stamp += 1;
    }

    pub fn pop(&mut self) {
        let mark = self.marks.pop().expect("pop on empty trail");
        self.stamps.pop();
        self.clear_queue();
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Entry::Dom(v, d) => self.doms[v] = d,
                Entry::Posted(p) => self.active[p] = false,
                Entry::Watch(v, p) => {
                    if let Some(k) = self.watchers[v].iter().rposition(|&q| q == p) {
                        self.watchers[v].remove(k);
                    }
                }
                Entry::Listen(a, p) => {
                    if let Some(k) = self.listeners[a.0].iter().rposition(|&q| q == p) {
                        self.listeners[a.0].remove(k);
                    }
                }
                Entry::Cell(a, k) => {
                    if let Array::Unclosed { cells, .. } = &mut self.arrays[a.0] {
                        cells.remove(&k);
                    }
                }
                Entry::NewVar(v) => self.dead[v] = true,
                Entry::Filtering(f) => self.filtering = f,
            }
        }
    }

    /// Readable listing of domains and propagators.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in 0..self.doms.len() {
            if self.dead[v] {
                continue;
            }
            let name = self.names[v].clone().unwrap_or_else(|| format!("_v{v}"));
            let _ = writeln!(out, "{name} in {}", self.doms[v]);
        }
        for (p, prop) in self.props.iter().enumerate() {
            if self.active[p] {
                let _ = writeln!(out, "{} {:?}", prop.name(), prop);
            }
        }
        out
    }
}
