use super::unclosed::close;
use crate::fd::{ArrayId, Domain, Fail, Propagator, Store, VarId};

/// `A != B` witnessed by index `I`: once `I` is fixed the two cells differ;
/// before that, indexes where both cells are known equal leave `D(I)`.
/// Cells count as known equal when they are the same variable or fixed to
/// the same value.
#[derive(Debug)]
pub struct DiffArray {
    pub a: ArrayId,
    pub index: VarId,
    pub b: ArrayId,
}

impl DiffArray {
    /// Keeps the witness below both sizes; unclosed sizes stay above it.
    fn bound_index(&self, s: &mut Store) -> Result<(), Fail> {
        let n = s.max_len(self.a).min(s.max_len(self.b));
        s.set_bounds(self.index, 0, n.saturating_sub(1))?;
        for a in [self.a, self.b] {
            if let Some(size) = s.size_var(a) {
                s.set_bounds(size, s.min(self.index) + 1, i64::MAX)?;
            }
        }
        Ok(())
    }
}

impl Propagator for DiffArray {
    fn name(&self) -> &'static str {
        "diff-array"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.a);
        v.extend(s.array_vars(self.b));
        v.push(self.index);
        v
    }
    fn arrays(&self) -> Vec<ArrayId> {
        vec![self.a, self.b]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        self.bound_index(s)?;
        let (Some(a), Some(b)) = (close(s, self.a)?, close(s, self.b)?) else {
            return Ok(());
        };
        let n = a.len().min(b.len());
        s.set_bounds(self.index, 0, n as i64 - 1)?;
        if let Some(k) = s.value(self.index) {
            let (x, y) = (a[k as usize], b[k as usize]);
            if x == y {
                return Err(Fail);
            }
            if let Some(v) = s.value(x) {
                s.remove(y, v)?;
            }
            if let Some(v) = s.value(y) {
                s.remove(x, v)?;
            }
            return Ok(());
        }
        let keep: Vec<i64> = s
            .dom(self.index)
            .iter()
            .filter(|&k| !s.is_eq(a[k as usize], b[k as usize]))
            .collect();
        s.set_dom(self.index, Domain::from_values(keep))?;
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let a = s.closed_cells(self.a)?;
        let b = s.closed_cells(self.b)?;
        let k = s.value(self.index)?;
        if k < 0 || k as usize >= a.len().min(b.len()) {
            return Some(false);
        }
        Some(s.value(a[k as usize])? != s.value(b[k as usize])?)
    }
}
