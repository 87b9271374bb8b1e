use crate::formula::{TermId, TermKind, TermTable};

/// Replaces every read of a uniform array by the array's element.
pub fn uniform_rewrite_cc(tt: &mut TermTable, t: TermId) -> TermId {
    match *tt.kind(t) {
        TermKind::Var(_) | TermKind::Const(_) => t,
        TermKind::Select(a, i) => {
            let a = uniform_rewrite_cc(tt, a);
            if let TermKind::Uniform { elem, .. } = *tt.kind(a) {
                return elem;
            }
            let i = uniform_rewrite_cc(tt, i);
            tt.select(a, i)
        }
        TermKind::Store(a, i, e) => {
            let a = uniform_rewrite_cc(tt, a);
            let i = uniform_rewrite_cc(tt, i);
            let e = uniform_rewrite_cc(tt, e);
            tt.store(a, i, e)
        }
        TermKind::Uniform { elem, size } => {
            let elem = uniform_rewrite_cc(tt, elem);
            tt.uniform(elem, size)
        }
        TermKind::Size(a) => {
            let a = uniform_rewrite_cc(tt, a);
            tt.size_of(a)
        }
        TermKind::Delete(m, k) => {
            let m = uniform_rewrite_cc(tt, m);
            let k = uniform_rewrite_cc(tt, k);
            tt.delete(m, k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Sort;

    #[test]
    fn read_of_uniform_becomes_element() {
        let mut tt = TermTable::new();
        let e = tt.var("e", Sort::Int);
        let i = tt.var("i", Sort::Int);
        let k = tt.uniform(e, None);
        let s = tt.select(k, i);
        assert_eq!(uniform_rewrite_cc(&mut tt, s), e);
    }

    #[test]
    fn reads_through_stores_are_kept() {
        let mut tt = TermTable::new();
        let e = tt.var("e", Sort::Int);
        let i = tt.var("i", Sort::Int);
        let k = tt.uniform(e, Some(3));
        let st = tt.store(k, i, i);
        let s = tt.select(st, i);
        assert_eq!(uniform_rewrite_cc(&mut tt, s), s);
    }
}
