//! Formula representation: hash-consed terms, atoms, the textual front end
//! and the preprocessing that splits a formula between the two engines.

mod dispatch;
mod extensionality;
mod parse;
mod print;
mod term;

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

pub use dispatch::{dispatch, Dispatched};
pub use extensionality::{desugar_extensionality, DiffArrayMode, Refuted};
pub use parse::parse;
pub use print::{print, print_atom, print_term};
pub use term::{Sort, TermId, TermKind, TermTable};

/// Size information attached to a declared array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArraySize {
    Fixed(u32),
    /// Unknown size in `1..=max`.
    Bounded(u32),
}

impl ArraySize {
    pub fn max(self) -> u32 {
        match self {
            ArraySize::Fixed(n) | ArraySize::Bounded(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    DeclInt {
        var: TermId,
        lo: i64,
        hi: i64,
    },
    DeclArray {
        array: TermId,
        size: ArraySize,
        elems: Option<(i64, i64)>,
    },
    /// Binds `name` to a uniform array term.
    DeclUniform {
        name: String,
        array: TermId,
    },
    DeclMap {
        map: TermId,
        keys: (i64, i64),
        values: (i64, i64),
    },
    Eq(TermId, TermId),
    Diff(TermId, TermId),
    ArrayEq(TermId, TermId),
    ArrayDiff(TermId, TermId),
    /// `sum(c * t) <= bound`
    LinearLeq {
        coeffs: Vec<(i64, TermId)>,
        bound: i64,
    },
    /// `z = x * y`
    Mul {
        x: TermId,
        y: TermId,
        z: TermId,
    },
    Keys {
        map: TermId,
        key: TermId,
        present: bool,
    },
    /// Array disequality witnessed by `witness`: `lhs = select(a, witness)`
    /// and `rhs = select(b, witness)` must differ.
    DiffArray {
        a: TermId,
        b: TermId,
        witness: TermId,
        lhs: TermId,
        rhs: TermId,
    },
}

impl Atom {
    pub fn is_decl(&self) -> bool {
        matches!(
            self,
            Atom::DeclInt { .. } | Atom::DeclArray { .. } | Atom::DeclUniform { .. } | Atom::DeclMap { .. }
        )
    }

    /// Terms occurring directly in the atom.
    pub fn terms(&self) -> Vec<TermId> {
        match self {
            Atom::DeclInt { var, .. } => vec![*var],
            Atom::DeclArray { array, .. } | Atom::DeclUniform { array, .. } => vec![*array],
            Atom::DeclMap { map, .. } => vec![*map],
            Atom::Eq(a, b) | Atom::Diff(a, b) | Atom::ArrayEq(a, b) | Atom::ArrayDiff(a, b) => {
                vec![*a, *b]
            }
            Atom::LinearLeq { coeffs, .. } => coeffs.iter().map(|&(_, t)| t).collect(),
            Atom::Mul { x, y, z } => vec![*x, *y, *z],
            Atom::Keys { map, key, .. } => vec![*map, *key],
            Atom::DiffArray {
                a,
                b,
                witness,
                lhs,
                rhs,
            } => vec![*a, *b, *witness, *lhs, *rhs],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayInfo {
    pub name: String,
    pub size: ArraySize,
    pub elems: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapInfo {
    pub name: String,
    pub keys: (i64, i64),
    pub values: (i64, i64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: sort error: {msg}")]
    Sort { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared {what} {name}")]
    Undeclared {
        line: usize,
        col: usize,
        what: &'static str,
        name: String,
    },
    #[error("{line}:{col}: invalid declaration: {msg}")]
    Declaration { line: usize, col: usize, msg: String },
}

/// A conjunction of atoms over a shared term table.
#[derive(Debug, Clone, Default)]
pub struct Formula {
    pub terms: TermTable,
    atoms: Vec<Atom>,
    seen: HashSet<Atom>,
    symbols: BTreeMap<String, TermId>,
    ints: HashMap<TermId, (i64, i64)>,
    arrays: HashMap<TermId, ArrayInfo>,
    maps: HashMap<TermId, MapInfo>,
    names: HashMap<TermId, String>,
    default_elems: Option<(i64, i64)>,
}

impl Formula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Appends an atom unless an identical one is already present.
    pub fn push(&mut self, atom: Atom) -> bool {
        if !self.seen.insert(atom.clone()) {
            return false;
        }
        match &atom {
            Atom::DeclInt { var, lo, hi } => {
                self.ints.insert(*var, (*lo, *hi));
            }
            Atom::DeclArray { array, size, elems } => {
                let name = self.names[array].clone();
                self.arrays.insert(
                    *array,
                    ArrayInfo {
                        name,
                        size: *size,
                        elems: *elems,
                    },
                );
            }
            Atom::DeclMap { map, keys, values } => {
                let name = self.names[map].clone();
                self.maps.insert(
                    *map,
                    MapInfo {
                        name,
                        keys: *keys,
                        values: *values,
                    },
                );
            }
            _ => {}
        }
        self.atoms.push(atom);
        true
    }

    pub fn symbol(&self, name: &str) -> Option<TermId> {
        self.symbols.get(name).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, TermId)> {
        self.symbols.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn name_of(&self, t: TermId) -> Option<&str> {
        self.names.get(&t).map(String::as_str)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    /// Registers a symbol name without emitting a declaration atom.
    fn bind(&mut self, name: &str, t: TermId) {
        self.symbols.insert(name.to_string(), t);
        self.names.entry(t).or_insert_with(|| name.to_string());
    }

    pub fn declare_int(&mut self, name: &str, lo: i64, hi: i64) -> TermId {
        let t = self.terms.var(name, Sort::Int);
        self.bind(name, t);
        self.push(Atom::DeclInt { var: t, lo, hi });
        t
    }

    pub fn declare_array(&mut self, name: &str, size: ArraySize, elems: Option<(i64, i64)>) -> TermId {
        let t = self.terms.var(name, Sort::Array);
        self.bind(name, t);
        self.push(Atom::DeclArray { array: t, size, elems });
        t
    }

    pub fn declare_uniform(&mut self, name: &str, elem: TermId, size: Option<u32>) -> TermId {
        let t = self.terms.uniform(elem, size);
        self.bind(name, t);
        self.push(Atom::DeclUniform {
            name: name.to_string(),
            array: t,
        });
        t
    }

    pub fn declare_map(&mut self, name: &str, keys: (i64, i64), values: (i64, i64)) -> TermId {
        let t = self.terms.var(name, Sort::Map);
        self.bind(name, t);
        self.push(Atom::DeclMap { map: t, keys, values });
        t
    }

    /// A name derived from `base` that is not yet bound.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.symbols.contains_key(base) {
            return base.to_string();
        }
        (0..)
            .map(|k| format!("{base}#{k}"))
            .find(|n| !self.symbols.contains_key(n))
            .expect("unbounded name supply")
    }

    pub fn int_range(&self, var: TermId) -> Option<(i64, i64)> {
        self.ints.get(&var).copied()
    }

    pub fn array_info(&self, array: TermId) -> Option<&ArrayInfo> {
        self.arrays.get(&array)
    }

    pub fn map_info(&self, map: TermId) -> Option<&MapInfo> {
        self.maps.get(&map)
    }

    pub fn int_vars(&self) -> impl Iterator<Item = (TermId, (i64, i64))> + '_ {
        self.atoms.iter().filter_map(|a| match a {
            Atom::DeclInt { var, lo, hi } => Some((*var, (*lo, *hi))),
            _ => None,
        })
    }

    pub fn declared_arrays(&self) -> impl Iterator<Item = (TermId, &ArrayInfo)> + '_ {
        self.atoms.iter().filter_map(|a| match a {
            Atom::DeclArray { array, .. } => Some((*array, &self.arrays[array])),
            _ => None,
        })
    }

    pub fn declared_maps(&self) -> impl Iterator<Item = (TermId, &MapInfo)> + '_ {
        self.atoms.iter().filter_map(|a| match a {
            Atom::DeclMap { map, .. } => Some((*map, &self.maps[map])),
            _ => None,
        })
    }

    /// Element range used for arrays declared without explicit bounds: the
    /// smallest interval covering every declared integer range, every
    /// explicit element range and every integer literal. Frozen once set so
    /// that preprocessing cannot widen it.
    pub fn default_elems(&self) -> (i64, i64) {
        if let Some(r) = self.default_elems {
            return r;
        }
        let mut hull: Option<(i64, i64)> = None;
        let mut widen = |lo: i64, hi: i64| {
            hull = Some(match hull {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        };
        for atom in &self.atoms {
            match atom {
                Atom::DeclInt { lo, hi, .. } => widen(*lo, *hi),
                Atom::DeclArray { elems: Some((lo, hi)), .. } => widen(*lo, *hi),
                Atom::DeclMap { values, .. } => widen(values.0, values.1),
                _ => {}
            }
        }
        for t in self.terms.ids() {
            if let Some(c) = self.terms.as_const(t) {
                widen(c, c);
            }
        }
        hull.unwrap_or((0, 0))
    }

    pub fn freeze_default_elems(&mut self) {
        self.default_elems = Some(self.default_elems());
    }

    pub fn set_default_elems(&mut self, range: (i64, i64)) {
        self.default_elems = Some(range);
    }

    /// Element range of a declared array.
    pub fn elem_range(&self, array: TermId) -> Option<(i64, i64)> {
        self.arrays
            .get(&array)
            .map(|info| info.elems.unwrap_or_else(|| self.default_elems()))
    }

    /// Statically known size of an array term: `Some(Fixed(n))` or
    /// `Some(Bounded(max))` for the term's size variable. `None` for unsized
    /// uniform arrays.
    pub fn array_size(&self, array: TermId) -> Option<ArraySize> {
        match *self.terms.kind(array) {
            TermKind::Var(_) => self.arrays.get(&array).map(|i| i.size),
            TermKind::Store(a, _, _) => self.array_size(a),
            TermKind::Uniform { size, .. } => size.map(ArraySize::Fixed),
            _ => None,
        }
    }

    /// The declared array whose size a (possibly stored-into) array term shares.
    pub fn base_array(&self, array: TermId) -> TermId {
        match *self.terms.kind(array) {
            TermKind::Store(a, _, _) => self.base_array(a),
            _ => array,
        }
    }
}
