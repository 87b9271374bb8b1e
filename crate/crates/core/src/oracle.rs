//! Reference semantics: direct evaluation of atoms under a ground model and
//! an exhaustive search for models. Shares nothing with the engines beyond
//! the formula type.
//!
//! Reads and writes outside an array, map operations on keys outside the
//! declared key range and reads of unmapped keys are undefined; an atom
//! containing an undefined term is false.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{ArraySize, Atom, Formula, Sort, TermId, TermKind};

/// Values of the declared symbols, by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundModel {
    pub ints: BTreeMap<String, i64>,
    /// Array contents; the length is the array's size.
    pub arrays: BTreeMap<String, Vec<i64>>,
    /// Mapped keys of each map.
    pub maps: BTreeMap<String, BTreeMap<i64, i64>>,
}

impl fmt::Display for GroundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<(&str, String)> = Vec::new();
        for (n, v) in &self.ints {
            entries.push((n, v.to_string()));
        }
        for (n, cells) in &self.arrays {
            let cells: Vec<String> = cells.iter().map(i64::to_string).collect();
            entries.push((n, format!("(array {})", cells.join(" "))));
        }
        for (n, m) in &self.maps {
            let kv: Vec<String> = m.iter().map(|(k, v)| format!(" ({k} {v})")).collect();
            entries.push((n, format!("(map{})", kv.concat())));
        }
        entries.sort();
        f.write_str("(model")?;
        for (n, v) in entries {
            write!(f, " ({n} {v})")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(GroundModel),
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space cap of {0} nodes exceeded")]
    Cap(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Maximum number of search nodes.
    pub cap: u64,
    /// Shuffles value and variable order with this seed.
    pub shuffle: Option<u64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cap: 10_000_000,
            shuffle: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Slot {
    Int(TermId),
    Size(TermId),
    Cell(TermId, i64),
    /// 1 if the key is mapped in the declared map.
    Flag(TermId, i64),
    Val(TermId, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Len {
    Finite(i64),
    Unbounded,
}

/// Undefined value, or a missing slot the value depends on.
type Ev<T> = Result<Option<T>, Slot>;

trait Values {
    fn get(&self, s: Slot) -> Result<i64, Slot>;
}

struct Partial<'a>(&'a HashMap<Slot, i64>);

impl Values for Partial<'_> {
    fn get(&self, s: Slot) -> Result<i64, Slot> {
        self.0.get(&s).copied().ok_or(s)
    }
}

struct Total<'a> {
    f: &'a Formula,
    m: &'a GroundModel,
}

impl Values for Total<'_> {
    fn get(&self, s: Slot) -> Result<i64, Slot> {
        let name = |t: TermId| self.f.name_of(t).unwrap_or_default();
        let v = match s {
            Slot::Int(t) => self.m.ints.get(name(t)).copied(),
            Slot::Size(a) => self.m.arrays.get(name(a)).map(|c| c.len() as i64),
            Slot::Cell(a, k) => self.m.arrays.get(name(a)).and_then(|c| c.get(k as usize).copied()),
            Slot::Flag(h, k) => self.m.maps.get(name(h)).map(|m| m.contains_key(&k) as i64),
            Slot::Val(h, k) => self.m.maps.get(name(h)).and_then(|m| m.get(&k).copied()),
        };
        v.ok_or(s)
    }
}

struct Eval<'a, V> {
    f: &'a Formula,
    v: V,
}

impl<V: Values> Eval<'_, V> {
    fn int(&self, t: TermId) -> Ev<i64> {
        match *self.f.terms.kind(t) {
            TermKind::Var(_) => self.v.get(Slot::Int(t)).map(Some),
            TermKind::Const(c) => Ok(Some(c)),
            TermKind::Select(a, i) => {
                let Some(i) = self.int(i)? else { return Ok(None) };
                if self.f.terms.sort(a) == Sort::Map {
                    Ok(self.map_entry(a, i)?.flatten())
                } else {
                    self.read(a, i)
                }
            }
            TermKind::Size(a) => match self.len(a)? {
                Some(Len::Finite(n)) => Ok(Some(n)),
                _ => Ok(None),
            },
            _ => unreachable!("integer term expected"),
        }
    }

    /// Length of a defined array term.
    fn len(&self, t: TermId) -> Ev<Len> {
        if !self.defined(t)? {
            return Ok(None);
        }
        self.len_unchecked(t).map(Some)
    }

    fn len_unchecked(&self, t: TermId) -> Result<Len, Slot> {
        match *self.f.terms.kind(t) {
            TermKind::Var(_) => match self.f.array_info(t).expect("declared array").size {
                ArraySize::Fixed(n) => Ok(Len::Finite(n as i64)),
                ArraySize::Bounded(_) => self.v.get(Slot::Size(t)).map(Len::Finite),
            },
            TermKind::Uniform { size, .. } => Ok(size.map_or(Len::Unbounded, |n| Len::Finite(n as i64))),
            TermKind::Store(a, _, _) => self.len_unchecked(a),
            _ => unreachable!("array term expected"),
        }
    }

    fn in_bounds(len: Len, k: i64) -> bool {
        k >= 0
            && match len {
                Len::Finite(n) => k < n,
                Len::Unbounded => true,
            }
    }

    /// Every store in the term writes a defined element inside the array.
    fn defined(&self, t: TermId) -> Result<bool, Slot> {
        match *self.f.terms.kind(t) {
            TermKind::Store(a, i, e) => {
                if !self.defined(a)? {
                    return Ok(false);
                }
                let Some(i) = self.int(i)? else { return Ok(false) };
                if !Self::in_bounds(self.len_unchecked(a)?, i) {
                    return Ok(false);
                }
                Ok(self.int(e)?.is_some())
            }
            TermKind::Uniform { elem, .. } => Ok(self.int(elem)?.is_some()),
            _ => Ok(true),
        }
    }

    fn read(&self, t: TermId, k: i64) -> Ev<i64> {
        match self.len(t)? {
            Some(len) if Self::in_bounds(len, k) => self.read_unchecked(t, k).map(Some),
            _ => Ok(None),
        }
    }

    fn read_unchecked(&self, t: TermId, k: i64) -> Result<i64, Slot> {
        match *self.f.terms.kind(t) {
            TermKind::Var(_) => self.v.get(Slot::Cell(t, k)),
            TermKind::Uniform { elem, .. } => Ok(self.int(elem)?.expect("defined")),
            TermKind::Store(a, i, e) => {
                if self.int(i)? == Some(k) {
                    Ok(self.int(e)?.expect("defined"))
                } else {
                    self.read_unchecked(a, k)
                }
            }
            _ => unreachable!("array term expected"),
        }
    }

    fn key_range(&self, h: TermId) -> (i64, i64) {
        match *self.f.terms.kind(h) {
            TermKind::Store(m, _, _) | TermKind::Delete(m, _) => self.key_range(m),
            _ => self.f.map_info(h).expect("declared map").keys,
        }
    }

    /// `None` if undefined, `Some(None)` for an unmapped key.
    fn map_entry(&self, h: TermId, k: i64) -> Ev<Option<i64>> {
        let (lo, hi) = self.key_range(h);
        if k < lo || k > hi {
            return Ok(None);
        }
        match *self.f.terms.kind(h) {
            TermKind::Var(_) => {
                if self.v.get(Slot::Flag(h, k))? == 0 {
                    Ok(Some(None))
                } else {
                    Ok(Some(Some(self.v.get(Slot::Val(h, k))?)))
                }
            }
            TermKind::Store(m, i, e) => {
                let Some(i) = self.int(i)? else { return Ok(None) };
                let Some(e) = self.int(e)? else { return Ok(None) };
                if i < lo || i > hi {
                    return Ok(None);
                }
                if i == k {
                    // the rest of the chain must still be defined
                    return Ok(self.map_entry(m, k)?.map(|_| Some(e)));
                }
                self.map_entry(m, k)
            }
            TermKind::Delete(m, i) => {
                let Some(i) = self.int(i)? else { return Ok(None) };
                if i < lo || i > hi {
                    return Ok(None);
                }
                let inner = self.map_entry(m, k)?;
                Ok(if i == k { inner.map(|_| None) } else { inner })
            }
            _ => unreachable!("map term expected"),
        }
    }

    fn same_cells(&self, a: TermId, b: TermId) -> Ev<bool> {
        let (Some(la), Some(lb)) = (self.len(a)?, self.len(b)?) else {
            return Ok(None);
        };
        let (Len::Finite(n), Len::Finite(m)) = (la, lb) else {
            return Ok(None);
        };
        if n != m {
            return Ok(Some(false));
        }
        for k in 0..n {
            if self.read_unchecked(a, k)? != self.read_unchecked(b, k)? {
                return Ok(Some(false));
            }
        }
        Ok(Some(true))
    }

    fn atom(&self, atom: &Atom) -> Result<bool, Slot> {
        let both = |a: TermId, b: TermId| -> Result<Option<(i64, i64)>, Slot> {
            let Some(x) = self.int(a)? else { return Ok(None) };
            let Some(y) = self.int(b)? else { return Ok(None) };
            Ok(Some((x, y)))
        };
        Ok(match *atom {
            Atom::DeclInt { .. } | Atom::DeclArray { .. } | Atom::DeclUniform { .. } | Atom::DeclMap { .. } => true,
            Atom::Eq(a, b) => both(a, b)?.is_some_and(|(x, y)| x == y),
            Atom::Diff(a, b) | Atom::DiffArray { lhs: a, rhs: b, .. } => both(a, b)?.is_some_and(|(x, y)| x != y),
            Atom::ArrayEq(a, b) => self.same_cells(a, b)? == Some(true),
            Atom::ArrayDiff(a, b) => {
                // different sizes do not make arrays different: they are
                // not comparable at all
                let (Some(Len::Finite(n)), Some(Len::Finite(m))) = (self.len(a)?, self.len(b)?) else {
                    return Ok(false);
                };
                n == m && self.same_cells(a, b)? == Some(false)
            }
            Atom::LinearLeq { ref coeffs, bound } => {
                let mut sum: i128 = 0;
                for &(c, t) in coeffs {
                    let Some(x) = self.int(t)? else { return Ok(false) };
                    sum += c as i128 * x as i128;
                }
                sum <= bound as i128
            }
            Atom::Mul { x, y, z } => {
                let (Some(x), Some(y), Some(z)) = (self.int(x)?, self.int(y)?, self.int(z)?) else {
                    return Ok(false);
                };
                x as i128 * y as i128 == z as i128
            }
            Atom::Keys { map, key, present } => {
                let Some(k) = self.int(key)? else { return Ok(false) };
                match self.map_entry(map, k)? {
                    None => false,
                    Some(e) => e.is_some() == present,
                }
            }
        })
    }
}

/// Truth value of every atom of `f` under a total model. Symbols missing
/// from the model make the formula false.
pub fn eval(f: &Formula, m: &GroundModel) -> bool {
    if !respects_declarations(f, m) {
        return false;
    }
    let ev = Eval { f, v: Total { f, m } };
    f.atoms().iter().all(|a| ev.atom(a) == Ok(true))
}

fn respects_declarations(f: &Formula, m: &GroundModel) -> bool {
    for atom in f.atoms() {
        match *atom {
            Atom::DeclInt { var, lo, hi } => match f.name_of(var).and_then(|n| m.ints.get(n)) {
                Some(&v) if lo <= v && v <= hi => {}
                _ => return false,
            },
            Atom::DeclArray { array, size, .. } => {
                let (lo, hi) = f.elem_range(array).expect("declared array");
                let Some(cells) = f.name_of(array).and_then(|n| m.arrays.get(n)) else {
                    return false;
                };
                let ok_len = match size {
                    ArraySize::Fixed(n) => cells.len() == n as usize,
                    ArraySize::Bounded(n) => (1..=n as usize).contains(&cells.len()),
                };
                if !ok_len || cells.iter().any(|&c| c < lo || c > hi) {
                    return false;
                }
            }
            Atom::DeclMap { map, keys, values } => {
                let Some(entries) = f.name_of(map).and_then(|n| m.maps.get(n)) else {
                    return false;
                };
                let bad = |(&k, &v): (&i64, &i64)| k < keys.0 || k > keys.1 || v < values.0 || v > values.1;
                if entries.iter().any(bad) {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

struct Search<'a> {
    f: &'a Formula,
    atoms: Vec<&'a Atom>,
    assigned: HashMap<Slot, i64>,
    nodes: u64,
    cap: u64,
    rng: Option<ChaCha8Rng>,
}

impl Search<'_> {
    fn domain(&self, s: Slot) -> Vec<i64> {
        let range = |(lo, hi): (i64, i64)| (lo..=hi).collect::<Vec<_>>();
        match s {
            Slot::Int(t) => range(self.f.int_range(t).unwrap_or_else(|| self.f.default_elems())),
            Slot::Size(a) => range((1, self.f.array_info(a).expect("declared array").size.max() as i64)),
            Slot::Cell(a, _) => range(self.f.elem_range(a).expect("declared array")),
            Slot::Flag(..) => vec![0, 1],
            Slot::Val(h, _) => range(self.f.map_info(h).expect("declared map").values),
        }
    }

    /// `Ok(true)`: every atom holds. `Ok(false)`: some atom fails.
    /// `Err(slot)`: undecided until `slot` is assigned.
    fn status(&mut self) -> Result<bool, Slot> {
        let ev = Eval {
            f: self.f,
            v: Partial(&self.assigned),
        };
        let mut pending = Vec::new();
        for a in &self.atoms {
            match ev.atom(a) {
                Ok(true) => {}
                Ok(false) => return Ok(false),
                Err(s) => pending.push(s),
            }
        }
        match (pending.first(), &mut self.rng) {
            (None, _) => Ok(true),
            (Some(&s), None) => Err(s),
            (Some(_), Some(rng)) => Err(*pending.choose(rng).expect("non-empty")),
        }
    }

    fn dfs(&mut self) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(OracleError::Cap(self.cap));
        }
        let slot = match self.status() {
            Ok(done) => return Ok(done),
            Err(s) => s,
        };
        let mut values = self.domain(slot);
        if let Some(rng) = &mut self.rng {
            values.shuffle(rng);
        }
        for v in values {
            self.assigned.insert(slot, v);
            if self.dfs()? {
                return Ok(true);
            }
        }
        self.assigned.remove(&slot);
        Ok(false)
    }

    /// Completes the assignment with minimum values and reads it out.
    fn model(&self) -> GroundModel {
        let get = |s: Slot| self.assigned.get(&s).copied().unwrap_or_else(|| self.domain(s)[0]);
        let mut m = GroundModel::default();
        for (t, _) in self.f.int_vars() {
            m.ints.insert(self.f.name_of(t).expect("named").to_string(), get(Slot::Int(t)));
        }
        for (a, info) in self.f.declared_arrays() {
            let n = match info.size {
                ArraySize::Fixed(n) => n as i64,
                ArraySize::Bounded(_) => get(Slot::Size(a)),
            };
            let cells = (0..n).map(|k| get(Slot::Cell(a, k))).collect();
            m.arrays.insert(info.name.clone(), cells);
        }
        for (h, info) in self.f.declared_maps() {
            let mut entries = BTreeMap::new();
            for k in info.keys.0..=info.keys.1 {
                if self.assigned.get(&Slot::Flag(h, k)) == Some(&1) {
                    entries.insert(k, get(Slot::Val(h, k)));
                }
            }
            m.maps.insert(info.name.clone(), entries);
        }
        m
    }
}

/// Exhaustive search for a model. Only the cells and keys the atoms
/// actually read are enumerated.
pub fn solve(f: &Formula, opts: &OracleOptions) -> Result<Verdict, OracleError> {
    let mut search = Search {
        f,
        atoms: f.atoms().iter().filter(|a| !a.is_decl()).collect(),
        assigned: HashMap::new(),
        nodes: 0,
        cap: opts.cap,
        rng: opts.shuffle.map(ChaCha8Rng::seed_from_u64),
    };
    if search.dfs()? {
        let m = search.model();
        debug_assert!(eval(f, &m), "oracle model rejected by its own evaluator");
        Ok(Verdict::Sat(m))
    } else {
        Ok(Verdict::Unsat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn verdict(src: &str) -> Verdict {
        solve(&parse(src).unwrap(), &OracleOptions::default()).unwrap()
    }

    fn model(pairs: &[(&str, i64)], arrays: &[(&str, &[i64])]) -> GroundModel {
        GroundModel {
            ints: pairs.iter().map(|&(n, v)| (n.to_string(), v)).collect(),
            arrays: arrays.iter().map(|&(n, c)| (n.to_string(), c.to_vec())).collect(),
            maps: BTreeMap::new(),
        }
    }

    #[test]
    fn read_over_write() {
        let src = "(declare-array A 6 0 9) (declare-int x 0 9)
                   (= x (select (store A 2 7) 2)) (= x 7)";
        let f = parse(src).unwrap();
        let m = model(&[("x", 7)], &[("A", &[0, 1, 2, 3, 4, 5])]);
        assert!(eval(&f, &m));
        let src = "(declare-array A 6 0 9) (declare-int x 0 9) (= x (select (store A 2 7) 5))";
        let f = parse(src).unwrap();
        assert!(eval(&f, &model(&[("x", 5)], &[("A", &[0, 1, 2, 3, 4, 5])])));
        assert!(!eval(&f, &model(&[("x", 7)], &[("A", &[0, 1, 2, 3, 4, 5])])));
    }

    #[test]
    fn reflexive_equality_holds() {
        let f = parse("(declare-int x 0 3) (= x x)").unwrap();
        assert!(eval(&f, &model(&[("x", 2)], &[])));
    }

    #[test]
    fn out_of_bounds_read_is_false() {
        let f = parse("(declare-array A 2 0 3) (declare-int x 0 3) (= x (select A 2))").unwrap();
        assert!(!eval(&f, &model(&[("x", 0)], &[("A", &[0, 0])])));
        assert_eq!(
            verdict("(declare-array A 2 0 3) (declare-int x 0 3) (= x (select A 2))"),
            Verdict::Unsat
        );
    }

    #[test]
    fn single_var_disequality() {
        let Verdict::Sat(m) = verdict("(declare-int x 1 2) (distinct x 1)") else {
            panic!("expected sat")
        };
        assert_eq!(m.ints["x"], 2);
    }

    #[test]
    fn three_reads_of_a_pair_array() {
        let src = "(declare-array A 2 0 3) (declare-int i 0 3) (declare-int j 0 3) (declare-int k 0 3)
                   (declare-int e 0 3) (declare-int f 0 3) (declare-int g 0 3)
                   (= e (select A i)) (= f (select A j)) (= g (select A k))
                   (distinct e f) (distinct e g) (distinct f g)";
        assert_eq!(verdict(src), Verdict::Unsat);
    }

    #[test]
    fn same_index_different_reads() {
        let src = "(declare-array A 4 0 3) (declare-int i 0 3) (declare-int j 0 3)
                   (declare-int e 0 3) (declare-int f 0 3)
                   (= e (select A i)) (= f (select A j)) (distinct e f) (= i j)";
        assert_eq!(verdict(src), Verdict::Unsat);
    }

    #[test]
    fn map_semantics() {
        assert!(matches!(
            verdict("(declare-map H 0 3 0 5) (declare-int i 0 3) (declare-int e 0 5) (keys (store H i e) i)"),
            Verdict::Sat(_)
        ));
        assert_eq!(
            verdict("(declare-map H 0 3 0 5) (declare-int i 0 3) (keys (delete H i) i)"),
            Verdict::Unsat
        );
        assert_eq!(
            verdict("(declare-map H 0 3 0 5) (declare-int i 0 3) (not-keys H i) (= (select H i) 2)"),
            Verdict::Unsat
        );
        let Verdict::Sat(m) = verdict("(declare-map H 1 2 0 5) (= (select H 2) 4)") else {
            panic!("expected sat")
        };
        assert_eq!(m.maps["H"].get(&2), Some(&4));
    }

    #[test]
    fn bounded_size_is_enumerated() {
        let src = "(declare-array B (bounded 3) 0 3) (declare-int n 0 9) (= n (size B)) (distinct n 1) (distinct n 2)";
        let Verdict::Sat(m) = verdict(src) else { panic!("expected sat") };
        assert_eq!(m.arrays["B"].len(), 3);
    }

    #[test]
    fn cap_is_reported() {
        let src = "(declare-int a 0 9) (declare-int b 0 9) (declare-int c 0 9) (leq (+ a b c) -1)";
        let opts = OracleOptions {
            cap: 50,
            shuffle: None,
        };
        assert_eq!(solve(&parse(src).unwrap(), &opts), Err(OracleError::Cap(50)));
    }
}
