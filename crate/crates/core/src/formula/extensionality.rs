use thiserror::Error;

use super::{ArraySize, Atom, Formula, TermId, TermKind};

/// How an array disequality reaches the finite-domain side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffArrayMode {
    /// `select(A, w) != select(B, w)` for a fresh witness `w`.
    #[default]
    Witness,
    /// A dedicated propagator over the witness domain.
    Propagator,
}

/// The formula was found unsatisfiable while rewriting array (dis)equalities.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("refuted: {0}")]
pub struct Refuted(pub String);

fn sizes(f: &Formula, a: TermId, b: TermId) -> (ArraySize, ArraySize) {
    let sa = f.array_size(a).expect("array comparison on an unsized array");
    let sb = f.array_size(b).expect("array comparison on an unsized array");
    (sa, sb)
}

/// Rewrites `=a` and `distinct-a` atoms. Array equalities stay (both engines
/// handle them directly) with an extra size equality for bounded arrays;
/// disequalities become a witness index plus either an element disequality
/// or a [`Atom::DiffArray`].
pub fn desugar_extensionality(f: &Formula, mode: DiffArrayMode) -> Result<Formula, Refuted> {
    let mut out = f.clone();
    out.default_elems = Some(f.default_elems());
    out.atoms.clear();
    out.seen.clear();

    for atom in f.atoms() {
        match *atom {
            Atom::ArrayEq(a, b) => {
                // a reflexive store equality still requires its indexes in range
                if a == b && !matches!(f.terms.kind(a), TermKind::Store(..)) {
                    continue;
                }
                match sizes(f, a, b) {
                    (ArraySize::Fixed(n), ArraySize::Fixed(m)) if n != m => {
                        return Err(Refuted(format!("arrays of sizes {n} and {m} compared equal")));
                    }
                    (ArraySize::Fixed(_), ArraySize::Fixed(_)) => {}
                    _ => {
                        let sa = out.terms.size_of(f.base_array(a));
                        let sb = out.terms.size_of(f.base_array(b));
                        out.push(Atom::Eq(sa, sb));
                    }
                }
                out.push(atom.clone());
            }
            Atom::ArrayDiff(a, b) => {
                if a == b {
                    return Err(Refuted("array compared different from itself".into()));
                }
                let (sa, sb) = sizes(f, a, b);
                if let (ArraySize::Fixed(n), ArraySize::Fixed(m)) = (sa, sb) {
                    if n != m {
                        return Err(Refuted(format!("arrays of sizes {n} and {m} compared different")));
                    }
                }
                let bounded = matches!(sa, ArraySize::Bounded(_)) || matches!(sb, ArraySize::Bounded(_));
                let n = sa.max().min(sb.max());
                let name = out.fresh_name("w");
                let w = out.declare_int(&name, 0, n as i64 - 1);
                if bounded {
                    let s_a = out.terms.size_of(f.base_array(a));
                    let s_b = out.terms.size_of(f.base_array(b));
                    out.push(Atom::Eq(s_a, s_b));
                    out.push(Atom::LinearLeq {
                        coeffs: vec![(1, w), (-1, s_a)],
                        bound: -1,
                    });
                }
                let lhs = out.terms.select(a, w);
                let rhs = out.terms.select(b, w);
                if mode == DiffArrayMode::Propagator && !bounded {
                    out.push(Atom::DiffArray {
                        a,
                        b,
                        witness: w,
                        lhs,
                        rhs,
                    });
                } else {
                    out.push(Atom::Diff(lhs, rhs));
                }
            }
            _ => {
                out.push(atom.clone());
            }
        }
    }
    Ok(out)
}
