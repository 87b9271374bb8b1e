//! Element constraints over arrays whose size is a bounded variable. Only
//! some cells are represented; `?D` of a missing cell is the whole element
//! range, and fixing the size fills in the missing cells.

use crate::fd::props::{access_check, access_closed, update_check, update_closed};
use crate::fd::{ArrayId, Domain, Fail, Propagator, Store, VarId};

/// `?D(A[k])`.
fn maybe_dom(s: &Store, a: ArrayId, k: i64) -> Domain {
    s.cell_dom(a, k)
}

/// Fills the array when its size is fixed; returns its cells once closed.
pub(crate) fn close(s: &mut Store, a: ArrayId) -> Result<Option<Vec<VarId>>, Fail> {
    if s.size_var(a).and_then(|v| s.value(v)).is_some() {
        s.fill(a)?;
    }
    Ok(s.closed_cells(a))
}

/// Indexes range over `0..size`: `I <= S_A - 1` and `S_A >= I + 1`.
fn bound_index(s: &mut Store, a: ArrayId, i: VarId) -> Result<(), Fail> {
    let size = s.size_var(a).expect("unclosed array without a size variable");
    s.set_bounds(i, 0, s.max(size) - 1)?;
    s.set_bounds(size, s.min(i) + 1, i64::MAX)?;
    Ok(())
}

#[derive(Debug)]
pub struct AccessUnclosed {
    pub array: ArrayId,
    pub index: VarId,
    pub elem: VarId,
}

impl Propagator for AccessUnclosed {
    fn name(&self) -> &'static str {
        "access-unclosed"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.array);
        v.extend([self.index, self.elem]);
        v
    }
    fn arrays(&self) -> Vec<ArrayId> {
        vec![self.array]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let (a, i, e) = (self.array, self.index, self.elem);
        bound_index(s, a, i)?;
        if let Some(cells) = close(s, a)? {
            return access_closed(s, &cells, i, e);
        }
        if let Some(k) = s.value(i) {
            return s.merge(a, k, e);
        }
        let de = s.dom(e).clone();
        let mut union = Domain::empty();
        for k in s.dom(i).iter() {
            union = union.union(&maybe_dom(s, a, k));
            if de.is_subset(&union) {
                break;
            }
        }
        s.intersect(e, &union)?;
        let de = s.dom(e).clone();
        let keep: Vec<i64> = s
            .dom(i)
            .iter()
            .filter(|&k| !maybe_dom(s, a, k).is_disjoint(&de))
            .collect();
        s.set_dom(i, Domain::from_values(keep))?;
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let cells = s.closed_cells(self.array)?;
        access_check(s, &cells, self.index, self.elem)
    }
}

/// `B = store(A, I, E)` where `A` and `B` share their size variable, so
/// `S_A == S_B` holds by construction.
#[derive(Debug)]
pub struct UpdateUnclosed {
    pub from: ArrayId,
    pub index: VarId,
    pub elem: VarId,
    pub to: ArrayId,
}

impl Propagator for UpdateUnclosed {
    fn name(&self) -> &'static str {
        "update-unclosed"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.from);
        v.extend(s.array_vars(self.to));
        v.extend([self.index, self.elem]);
        v
    }
    fn arrays(&self) -> Vec<ArrayId> {
        vec![self.from, self.to]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let (a, i, e, b) = (self.from, self.index, self.elem, self.to);
        bound_index(s, a, i)?;
        bound_index(s, b, i)?;
        let ca = close(s, a)?;
        let cb = close(s, b)?;
        if let (Some(ca), Some(cb)) = (ca, cb) {
            return update_closed(s, &ca, i, e, &cb);
        }
        if let Some(k) = s.value(i) {
            s.merge(b, k, e)?;
        }
        let de = s.dom(e).clone();
        let mut union = Domain::empty();
        for k in s.dom(i).iter() {
            union = union.union(&maybe_dom(s, b, k));
            if de.is_subset(&union) {
                break;
            }
        }
        s.intersect(e, &union)?;
        let de = s.dom(e).clone();
        let keep: Vec<i64> = s
            .dom(i)
            .iter()
            .filter(|&k| !maybe_dom(s, b, k).is_disjoint(&de))
            .collect();
        s.set_dom(i, Domain::from_values(keep))?;

        let n = s.max_len(a);
        for k in 0..n {
            if s.dom(i).contains(k) {
                continue;
            }
            if let Some(x) = s.cell(a, k) {
                s.merge(b, k, x)?;
            }
            if let Some(y) = s.cell(b, k) {
                s.merge(a, k, y)?;
            }
        }
        let idx: Vec<i64> = s.dom(i).iter().collect();
        for &k in &idx {
            if let Some(y) = s.cell(b, k) {
                let allowed = maybe_dom(s, a, k).union(s.dom(e));
                s.intersect(y, &allowed)?;
            }
        }
        for &k in &idx {
            if maybe_dom(s, a, k).is_disjoint(&maybe_dom(s, b, k)) {
                s.assign(i, k)?;
                break;
            }
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let a = s.closed_cells(self.from)?;
        let b = s.closed_cells(self.to)?;
        update_check(s, &a, self.index, self.elem, &b)
    }
}
