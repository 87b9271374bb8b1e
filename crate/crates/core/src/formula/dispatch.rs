use std::collections::BTreeMap;

use super::{Atom, Formula, TermKind};
use crate::ext::uniform_rewrite_cc;

/// Atoms routed to each engine.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dispatched {
    pub cc: Vec<Atom>,
    pub fd: Vec<Atom>,
}

/// Splits a preprocessed (map-free) formula between the engines.
///
/// Everything goes to the finite-domain side. Equalities, disequalities and
/// array equalities also go to congruence closure, with reads of uniform
/// arrays rewritten to their element and pairwise disequalities between the
/// integer constants that occur there.
pub fn dispatch(f: &mut Formula) -> Dispatched {
    let mut out = Dispatched::default();
    for atom in f.atoms().to_vec() {
        let cc = match atom {
            Atom::Eq(a, b) => Some(Atom::Eq(
                uniform_rewrite_cc(&mut f.terms, a),
                uniform_rewrite_cc(&mut f.terms, b),
            )),
            Atom::Diff(a, b) => Some(Atom::Diff(
                uniform_rewrite_cc(&mut f.terms, a),
                uniform_rewrite_cc(&mut f.terms, b),
            )),
            Atom::ArrayEq(a, b) => Some(Atom::ArrayEq(
                uniform_rewrite_cc(&mut f.terms, a),
                uniform_rewrite_cc(&mut f.terms, b),
            )),
            Atom::DiffArray { lhs, rhs, .. } => Some(Atom::Diff(
                uniform_rewrite_cc(&mut f.terms, lhs),
                uniform_rewrite_cc(&mut f.terms, rhs),
            )),
            _ => None,
        };
        if let Some(cc) = cc {
            out.cc.push(cc);
        }
        out.fd.push(atom);
    }

    let roots: Vec<_> = out.cc.iter().flat_map(Atom::terms).collect();
    let consts: BTreeMap<i64, _> = f
        .terms
        .closure(roots)
        .into_iter()
        .filter_map(|t| match f.terms.kind(t) {
            TermKind::Const(c) => Some((*c, t)),
            _ => None,
        })
        .collect();
    let consts: Vec<_> = consts.into_values().collect();
    for (k, &a) in consts.iter().enumerate() {
        for &b in &consts[k + 1..] {
            out.cc.push(Atom::Diff(a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn motivating_formula_goes_to_both_engines() {
        let mut f = parse(
            "(declare-array A 100) (declare-int i 0 1000) (declare-int j 0 1000)
             (declare-int e 0 1000) (declare-int f 0 1000)
             (= e (select A i)) (= f (select A j)) (distinct e f) (= i j)",
        )
        .unwrap();
        let d = dispatch(&mut f);
        assert_eq!(d.cc.len(), 4);
        assert_eq!(d.fd.len(), f.atoms().len());
        assert!(d.fd.iter().any(|a| matches!(a, Atom::DeclArray { .. })));
    }

    #[test]
    fn arithmetic_only_stays_in_fd() {
        let mut f = parse("(declare-int x 0 9) (declare-int y 0 9) (leq (+ x y) 5)").unwrap();
        let d = dispatch(&mut f);
        assert!(d.cc.is_empty());
        assert_eq!(d.fd.len(), 3);
    }

    #[test]
    fn constants_get_pairwise_disequalities() {
        let mut f = parse("(declare-int x 0 9) (declare-int y 0 9) (= x 2) (= y 3)").unwrap();
        let d = dispatch(&mut f);
        let two = f.terms.constant(2);
        let three = f.terms.constant(3);
        assert!(d.cc.contains(&Atom::Diff(two, three)));
    }

    #[test]
    fn uniform_reads_are_rewritten_for_cc() {
        let mut f = parse("(declare-int e 0 9) (declare-int i 0 9) (declare-uniform-array K e) (distinct (select K i) e)")
            .unwrap();
        let d = dispatch(&mut f);
        let e = f.symbol("e").unwrap();
        assert_eq!(d.cc, vec![Atom::Diff(e, e)]);
    }
}
