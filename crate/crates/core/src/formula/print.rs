use std::fmt::Write;

use super::{ArraySize, Atom, Formula, TermId, TermKind};

/// Renders a term in the input syntax. Uniform arrays print as their
/// declared name.
pub fn print_term(f: &Formula, t: TermId) -> String {
    let mut out = String::new();
    write_term(f, t, &mut out);
    out
}

fn write_term(f: &Formula, t: TermId, out: &mut String) {
    match f.terms.kind(t) {
        TermKind::Var(name) => out.push_str(name),
        TermKind::Const(c) => {
            let _ = write!(out, "{c}");
        }
        TermKind::Uniform { .. } => match f.name_of(t) {
            Some(name) => out.push_str(name),
            None => {
                let _ = write!(out, "uniform#{}", t.0);
            }
        },
        &TermKind::Select(a, i) => {
            out.push_str("(select ");
            write_term(f, a, out);
            out.push(' ');
            write_term(f, i, out);
            out.push(')');
        }
        &TermKind::Store(a, i, e) => {
            out.push_str("(store ");
            write_term(f, a, out);
            out.push(' ');
            write_term(f, i, out);
            out.push(' ');
            write_term(f, e, out);
            out.push(')');
        }
        &TermKind::Size(a) => {
            out.push_str("(size ");
            write_term(f, a, out);
            out.push(')');
        }
        &TermKind::Delete(m, k) => {
            out.push_str("(delete ");
            write_term(f, m, out);
            out.push(' ');
            write_term(f, k, out);
            out.push(')');
        }
    }
}

pub fn print_atom(f: &Formula, atom: &Atom) -> String {
    let p = |t: TermId| print_term(f, t);
    match atom {
        Atom::DeclInt { var, lo, hi } => format!("(declare-int {} {lo} {hi})", p(*var)),
        Atom::DeclArray { array, size, elems } => {
            let size = match size {
                ArraySize::Fixed(n) => n.to_string(),
                ArraySize::Bounded(n) => format!("(bounded {n})"),
            };
            match elems {
                Some((lo, hi)) => format!("(declare-array {} {size} {lo} {hi})", p(*array)),
                None => format!("(declare-array {} {size})", p(*array)),
            }
        }
        Atom::DeclUniform { name, array } => match *f.terms.kind(*array) {
            TermKind::Uniform { elem, size: Some(n) } => {
                format!("(declare-uniform-array {name} {} {n})", p(elem))
            }
            TermKind::Uniform { elem, size: None } => {
                format!("(declare-uniform-array {name} {})", p(elem))
            }
            _ => unreachable!("uniform declaration of a non-uniform term"),
        },
        Atom::DeclMap { map, keys, values } => format!(
            "(declare-map {} {} {} {} {})",
            p(*map),
            keys.0,
            keys.1,
            values.0,
            values.1
        ),
        Atom::Eq(a, b) => format!("(= {} {})", p(*a), p(*b)),
        Atom::Diff(a, b) => format!("(distinct {} {})", p(*a), p(*b)),
        Atom::ArrayEq(a, b) => format!("(=a {} {})", p(*a), p(*b)),
        Atom::ArrayDiff(a, b) => format!("(distinct-a {} {})", p(*a), p(*b)),
        Atom::LinearLeq { coeffs, bound } => {
            let sum: Vec<String> = coeffs.iter().map(|&(c, t)| format!("(* {c} {})", p(t))).collect();
            format!("(leq (+ {}) {bound})", sum.join(" "))
        }
        Atom::Mul { x, y, z } => format!("(mul {} {} {})", p(*x), p(*y), p(*z)),
        Atom::Keys { map, key, present } => {
            let head = if *present { "keys" } else { "not-keys" };
            format!("({head} {} {})", p(*map), p(*key))
        }
        Atom::DiffArray { a, b, witness, .. } => {
            format!("(diff-array {} {} {})", p(*a), p(*b), p(*witness))
        }
    }
}

/// Renders a whole formula, one atom per line, in a form [`super::parse`]
/// reads back to the same atoms.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    for atom in f.atoms() {
        out.push_str(&print_atom(f, atom));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn round_trip_keeps_atoms() {
        let src = "(declare-array A 3 0 5) (declare-int i 0 2) (declare-int e 0 5)
                   (declare-uniform-array K e 3)
                   (= e (select (store A i 4) 1)) (leq (+ (* 2 i) e) 7) (=a A K) (mul i e e)";
        let f = parse(src).unwrap();
        let once = print(&f);
        let g = parse(&once).unwrap();
        assert_eq!(print(&g), once);
        assert_eq!(f.atoms(), g.atoms());
    }
}
