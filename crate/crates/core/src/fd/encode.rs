//! Translation of terms and atoms into store variables and propagators.

use std::collections::HashMap;

use thiserror::Error;

use super::domain::Domain;
use super::props::{self, AllDiffStrength};
use super::store::{Array, ArrayId, Store, VarId, TIER_ELEM, TIER_INDEX, TIER_OTHER};
use crate::ext::{AccessUnclosed, DiffArray, UpdateUnclosed};
use crate::formula::{print_term, ArraySize, Atom, Formula, Sort, TermId, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("atom not supported by the finite-domain engine: {0}")]
    Unsupported(String),
}

/// Term to variable (and array) correspondence for one store.
#[derive(Debug, Default, Clone)]
pub struct Encoding {
    vars: HashMap<TermId, VarId>,
    arrays: HashMap<TermId, ArrayId>,
    terms: HashMap<VarId, TermId>,
    pub alldiff: AllDiffStrength,
}

fn hull(d: &Domain) -> Domain {
    if d.is_empty() {
        d.clone()
    } else {
        Domain::range(d.min(), d.max())
    }
}

impl Encoding {
    pub fn new(alldiff: AllDiffStrength) -> Self {
        Encoding {
            alldiff,
            ..Default::default()
        }
    }

    pub fn var_of(&self, t: TermId) -> Option<VarId> {
        self.vars.get(&t).copied()
    }

    pub fn array_of(&self, t: TermId) -> Option<ArrayId> {
        self.arrays.get(&t).copied()
    }

    pub fn term_of(&self, v: VarId) -> Option<TermId> {
        self.terms.get(&v).copied()
    }

    /// Integer terms with a variable, sorted by term id.
    pub fn int_terms(&self) -> Vec<(TermId, VarId)> {
        let mut v: Vec<_> = self.vars.iter().map(|(&t, &x)| (t, x)).collect();
        v.sort();
        v
    }

    fn bind(&mut self, f: &Formula, s: &mut Store, t: TermId, v: VarId) {
        self.vars.insert(t, v);
        self.terms.entry(v).or_insert(t);
        if s.name(v).is_none() {
            s.set_name(v, print_term(f, t));
        }
    }

    /// Hull of the values a cell of `a` can take. Root domains are used so
    /// that variables created under a decision stay valid after it is undone.
    fn elem_hull(&self, s: &Store, a: ArrayId) -> Domain {
        let d = match s.array(a) {
            Array::Fixed(cells) => cells
                .iter()
                .fold(Domain::empty(), |acc, &c| acc.union(s.root_dom(c))),
            Array::Uniform { elem, .. } => s.root_dom(*elem).clone(),
            Array::Unclosed { cells, elems, .. } => cells
                .values()
                .fold(elems.clone(), |acc, &c| acc.union(s.root_dom(c))),
        };
        hull(&d)
    }

    /// Variable of an integer term, created with its defining propagators
    /// if needed. Those propagators survive backtracking.
    pub fn int_term(&mut self, f: &Formula, s: &mut Store, t: TermId) -> VarId {
        if let Some(v) = self.var_of(t) {
            return v;
        }
        debug_assert_eq!(f.terms.sort(t), Sort::Int);
        let v = match *f.terms.kind(t) {
            TermKind::Var(_) => {
                let (lo, hi) = f.int_range(t).unwrap_or_else(|| f.default_elems());
                s.new_var(Domain::range(lo, hi), TIER_OTHER)
            }
            TermKind::Const(c) => s.new_var(Domain::singleton(c), TIER_OTHER),
            TermKind::Select(a, i) => {
                let arr = self.array_term(f, s, a);
                let iv = self.int_term(f, s, i);
                s.set_tier(iv, TIER_INDEX);
                let v = s.new_var(self.elem_hull(s, arr), TIER_ELEM);
                if s.size_var(arr).is_some() {
                    s.post_permanent(AccessUnclosed {
                        array: arr,
                        index: iv,
                        elem: v,
                    });
                } else {
                    s.post_permanent(props::Access {
                        array: arr,
                        index: iv,
                        elem: v,
                    });
                }
                v
            }
            TermKind::Size(a) => {
                let arr = self.array_term(f, s, a);
                match s.size_var(arr) {
                    Some(v) => v,
                    None => s.new_var(Domain::singleton(s.max_len(arr)), TIER_OTHER),
                }
            }
            _ => unreachable!("integer term expected"),
        };
        self.bind(f, s, t, v);
        v
    }

    /// Array of an array term, created (with its stores) if needed.
    pub fn array_term(&mut self, f: &Formula, s: &mut Store, t: TermId) -> ArrayId {
        if let Some(a) = self.array_of(t) {
            return a;
        }
        let a = match *f.terms.kind(t) {
            TermKind::Var(ref name) => {
                let info = f
                    .array_info(t)
                    .unwrap_or_else(|| panic!("array {name} used without declaration"));
                let (lo, hi) = f.elem_range(t).expect("declared array");
                let elems = Domain::range(lo, hi);
                match info.size {
                    ArraySize::Fixed(n) => {
                        let cells: Vec<VarId> = (0..n)
                            .map(|k| {
                                let v = s.new_var(elems.clone(), TIER_ELEM);
                                s.set_name(v, format!("{name}[{k}]"));
                                v
                            })
                            .collect();
                        s.new_array(Array::Fixed(cells))
                    }
                    ArraySize::Bounded(max) => {
                        let size = s.new_var(Domain::range(1, max as i64), TIER_INDEX);
                        let size_term = f.terms.lookup(&TermKind::Size(t));
                        s.set_name(size, format!("(size {name})"));
                        let a = s.new_array(Array::Unclosed {
                            cells: Default::default(),
                            size,
                            elems,
                        });
                        if let Some(st) = size_term {
                            self.vars.insert(st, size);
                            self.terms.entry(size).or_insert(st);
                        }
                        a
                    }
                }
            }
            TermKind::Uniform { elem, size } => {
                let ev = self.int_term(f, s, elem);
                s.set_tier(ev, TIER_ELEM);
                s.new_array(Array::Uniform { elem: ev, size })
            }
            TermKind::Store(base, i, e) => {
                let from = self.array_term(f, s, base);
                let iv = self.int_term(f, s, i);
                let ev = self.int_term(f, s, e);
                s.set_tier(iv, TIER_INDEX);
                s.set_tier(ev, TIER_ELEM);
                let name = print_term(f, t);
                if let Some(size) = s.size_var(from) {
                    let elems = match s.array(from) {
                        Array::Unclosed { elems, .. } => hull(&elems.union(s.root_dom(ev))),
                        _ => unreachable!(),
                    };
                    let to = s.new_array(Array::Unclosed {
                        cells: Default::default(),
                        size,
                        elems,
                    });
                    s.post_permanent(UpdateUnclosed {
                        from,
                        index: iv,
                        elem: ev,
                        to,
                    });
                    to
                } else {
                    let cells = s.closed_cells(from).expect("store into an unsized uniform array");
                    let new: Vec<VarId> = cells
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| {
                            let v = s.new_var(hull(&s.root_dom(c).union(s.root_dom(ev))), TIER_ELEM);
                            s.set_name(v, format!("{name}[{k}]"));
                            v
                        })
                        .collect();
                    let to = s.new_array(Array::Fixed(new));
                    s.post_permanent(props::Update {
                        from,
                        index: iv,
                        elem: ev,
                        to,
                    });
                    to
                }
            }
            _ => unreachable!("array term expected"),
        };
        self.arrays.insert(t, a);
        a
    }

    /// Posts the finite-domain reading of the given atoms.
    pub fn post_atoms(&mut self, f: &Formula, atoms: &[Atom], s: &mut Store) -> Result<(), EncodeError> {
        for atom in atoms {
            self.post_atom(f, atom, s)?;
        }
        Ok(())
    }

    pub fn post_atom(&mut self, f: &Formula, atom: &Atom, s: &mut Store) -> Result<(), EncodeError> {
        match *atom {
            Atom::DeclInt { var, .. } => {
                self.int_term(f, s, var);
            }
            Atom::DeclArray { array, .. } | Atom::DeclUniform { array, .. } => {
                self.array_term(f, s, array);
            }
            Atom::Eq(a, b) => {
                let (x, y) = (self.int_term(f, s, a), self.int_term(f, s, b));
                s.post(props::Eq(x, y));
            }
            Atom::Diff(a, b) => {
                let (x, y) = (self.int_term(f, s, a), self.int_term(f, s, b));
                s.post(props::Diff(x, y));
            }
            Atom::ArrayEq(a, b) => {
                let (x, y) = (self.array_term(f, s, a), self.array_term(f, s, b));
                s.post(props::ArrayEq(x, y));
            }
            Atom::LinearLeq { ref coeffs, bound } => {
                let terms: Vec<(i64, VarId)> = coeffs.iter().map(|&(c, t)| (c, self.int_term(f, s, t))).collect();
                s.post(props::LinearLeq::new(&terms, bound));
            }
            Atom::Mul { x, y, z } => {
                let (x, y, z) = (self.int_term(f, s, x), self.int_term(f, s, y), self.int_term(f, s, z));
                s.post(props::Mul { x, y, z });
            }
            Atom::DiffArray {
                a,
                b,
                witness,
                lhs,
                rhs,
            } => {
                let (x, y) = (self.array_term(f, s, a), self.array_term(f, s, b));
                let w = self.int_term(f, s, witness);
                s.set_tier(w, TIER_INDEX);
                self.int_term(f, s, lhs);
                self.int_term(f, s, rhs);
                s.post(DiffArray { a: x, index: w, b: y });
            }
            Atom::DeclMap { .. } | Atom::Keys { .. } | Atom::ArrayDiff(..) => {
                return Err(EncodeError::Unsupported(crate::formula::print_atom(f, atom)));
            }
        }
        Ok(())
    }

    /// `Alldifferent` over the variables of the given terms.
    pub fn post_alldiff(&mut self, f: &Formula, s: &mut Store, terms: &[TermId]) {
        let vars: Vec<VarId> = terms.iter().map(|&t| self.int_term(f, s, t)).collect();
        s.post(props::AllDiff {
            vars,
            strength: self.alldiff,
        });
    }
}
