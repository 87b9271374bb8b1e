//! Hash-consed terms shared by every solver component.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a hash-consed term. Structurally equal terms share an id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Array,
    Map,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("int"),
            Sort::Array => f.write_str("array"),
            Sort::Map => f.write_str("map"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    /// A named symbol; its sort is fixed by its declaration.
    Var(String),
    Const(i64),
    Select(TermId, TermId),
    Store(TermId, TermId, TermId),
    /// `K<e>`: every cell holds `elem`. `size` is `None` for an unsized
    /// uniform array, which may only be read.
    Uniform { elem: TermId, size: Option<u32> },
    Size(TermId),
    /// Map key removal.
    Delete(TermId, TermId),
}

/// Arena of hash-consed terms.
#[derive(Debug, Clone, Default)]
pub struct TermTable {
    kinds: Vec<TermKind>,
    sorts: Vec<Sort>,
    index: HashMap<TermKind, TermId>,
}

impl TermTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, t: TermId) -> &TermKind {
        &self.kinds[t.index()]
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.sorts[t.index()]
    }

    pub fn lookup(&self, kind: &TermKind) -> Option<TermId> {
        self.index.get(kind).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.kinds.len() as u32).map(TermId)
    }

    fn intern(&mut self, kind: TermKind, sort: Sort) -> TermId {
        if let Some(&id) = self.index.get(&kind) {
            return id;
        }
        let id = TermId(self.kinds.len() as u32);
        self.kinds.push(kind.clone());
        self.sorts.push(sort);
        self.index.insert(kind, id);
        id
    }

    pub fn var(&mut self, name: &str, sort: Sort) -> TermId {
        let id = self.intern(TermKind::Var(name.to_string()), sort);
        debug_assert_eq!(self.sort(id), sort, "symbol {name} re-sorted");
        id
    }

    pub fn constant(&mut self, value: i64) -> TermId {
        self.intern(TermKind::Const(value), Sort::Int)
    }

    pub fn select(&mut self, array: TermId, index: TermId) -> TermId {
        debug_assert_ne!(self.sort(array), Sort::Int);
        self.intern(TermKind::Select(array, index), Sort::Int)
    }

    pub fn store(&mut self, array: TermId, index: TermId, elem: TermId) -> TermId {
        let sort = self.sort(array);
        self.intern(TermKind::Store(array, index, elem), sort)
    }

    pub fn uniform(&mut self, elem: TermId, size: Option<u32>) -> TermId {
        self.intern(TermKind::Uniform { elem, size }, Sort::Array)
    }

    pub fn size_of(&mut self, array: TermId) -> TermId {
        self.intern(TermKind::Size(array), Sort::Int)
    }

    pub fn delete(&mut self, map: TermId, key: TermId) -> TermId {
        self.intern(TermKind::Delete(map, key), Sort::Map)
    }

    /// Direct sub-terms in argument order.
    pub fn children(&self, t: TermId) -> Vec<TermId> {
        match *self.kind(t) {
            TermKind::Var(_) | TermKind::Const(_) => vec![],
            TermKind::Select(a, i) => vec![a, i],
            TermKind::Store(a, i, e) => vec![a, i, e],
            TermKind::Uniform { elem, .. } => vec![elem],
            TermKind::Size(a) => vec![a],
            TermKind::Delete(m, k) => vec![m, k],
        }
    }

    /// `t` and all of its sub-terms, children before parents, no duplicates.
    pub fn closure(&self, roots: impl IntoIterator<Item = TermId>) -> Vec<TermId> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for r in roots {
            self.collect(r, &mut seen, &mut out);
        }
        out
    }

    fn collect(&self, t: TermId, seen: &mut [bool], out: &mut Vec<TermId>) {
        if seen[t.index()] {
            return;
        }
        seen[t.index()] = true;
        for c in self.children(t) {
            self.collect(c, seen, out);
        }
        out.push(t);
    }

    pub fn as_const(&self, t: TermId) -> Option<i64> {
        match self.kind(t) {
            TermKind::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// `(array, index, elem, j)` when `t` is `select(store(array, index, elem), j)`.
    pub fn as_read_over_write(&self, t: TermId) -> Option<(TermId, TermId, TermId, TermId)> {
        if let TermKind::Select(s, j) = *self.kind(t) {
            if let TermKind::Store(a, i, e) = *self.kind(s) {
                if self.sort(s) == Sort::Array {
                    return Some((a, i, e, j));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_ids() {
        let mut t = TermTable::new();
        let a = t.var("A", Sort::Array);
        let i = t.var("i", Sort::Int);
        let s1 = t.select(a, i);
        let s2 = t.select(a, i);
        assert_eq!(s1, s2);
        assert_eq!(t.var("i", Sort::Int), i);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn closure_orders_children_first() {
        let mut t = TermTable::new();
        let a = t.var("A", Sort::Array);
        let i = t.var("i", Sort::Int);
        let e = t.constant(3);
        let s = t.store(a, i, e);
        let r = t.select(s, i);
        let c = t.closure([r]);
        assert_eq!(c.last(), Some(&r));
        let pos = |x| c.iter().position(|&y| y == x).unwrap();
        assert!(pos(s) < pos(r));
        assert!(pos(a) < pos(s));
        assert_eq!(t.as_read_over_write(r), Some((a, i, e, i)));
    }
}
