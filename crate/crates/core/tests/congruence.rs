//! Congruence closure against the oracle, and under reordering.

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fdcc::cc::{Cc, Lit};
use fdcc::formula::{dispatch, parse, Atom, Formula, Sort, TermId};

const INTS: [&str; 5] = ["x", "y", "z", "0", "1"];
const ARRAYS: [&str; 4] = ["A", "B", "(store A x y)", "(store B y z)"];

fn int_term(k: usize) -> String {
    let n = INTS.len();
    if k < n {
        INTS[k].to_string()
    } else {
        let k = k - n;
        format!("(select {} {})", ARRAYS[k % ARRAYS.len()], INTS[(k / ARRAYS.len()) % 3])
    }
}

fn atom_text(kind: u8, a: usize, b: usize) -> String {
    match kind % 5 {
        0 | 1 => format!("(= {} {})", int_term(a), int_term(b)),
        2 | 3 => format!("(distinct {} {})", int_term(a), int_term(b)),
        _ => format!("(=a {} {})", ARRAYS[a % ARRAYS.len()], ARRAYS[b % ARRAYS.len()]),
    }
}

fn formula(atoms: &[(u8, usize, usize)]) -> Formula {
    let mut text = String::from(
        "(declare-int x 0 3) (declare-int y 0 3) (declare-int z 0 3)
         (declare-array A 3 0 3) (declare-array B 3 0 3)\n",
    );
    for &(k, a, b) in atoms {
        text += &atom_text(k, a, b);
        text.push('\n');
    }
    parse(&text).unwrap()
}

fn lit(atom: &Atom) -> Option<Lit> {
    match *atom {
        Atom::Eq(a, b) | Atom::ArrayEq(a, b) => Some(Lit::Eq(a, b)),
        Atom::Diff(a, b) => Some(Lit::Diff(a, b)),
        _ => None,
    }
}

/// Asserts the cc part of `f` in the given order; `None` when inconsistent.
fn close(f: &Formula, order: &[usize]) -> Option<(Cc, Formula)> {
    let mut g = f.clone();
    let cc_atoms = dispatch(&mut g).cc;
    let mut cc = Cc::new();
    for &k in order {
        if let Some(l) = cc_atoms.get(k).and_then(lit) {
            cc.assert_lit(&mut g.terms, l).ok()?;
        }
    }
    Some((cc, g))
}

fn cc_len(f: &Formula) -> usize {
    dispatch(&mut f.clone()).cc.len()
}

fn atoms_strategy() -> impl Strategy<Value = Vec<(u8, usize, usize)>> {
    proptest::collection::vec((0u8..5, 0usize..17, 0usize..17), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn refutations_are_sound(atoms in atoms_strategy()) {
        let f = formula(&atoms);
        let order: Vec<usize> = (0..cc_len(&f)).collect();
        if close(&f, &order).is_none() {
            prop_assert_eq!(common::oracle_sat(&f), Some(false));
        }
    }

    #[test]
    fn assertion_order_does_not_matter(atoms in atoms_strategy(), seed in any::<u64>()) {
        let f = formula(&atoms);
        let order: Vec<usize> = (0..cc_len(&f)).collect();
        let mut shuffled = order.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = close(&f, &order);
        let b = close(&f, &shuffled);
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some((ca, ga)), Some((cb, _))) = (a, b) {
            let ints: Vec<TermId> = f.terms.ids().filter(|&t| f.terms.sort(t) == Sort::Int).collect();
            for &s in &ints {
                for &t in &ints {
                    if ca.is_registered(s) && ca.is_registered(t) {
                        prop_assert_eq!(ca.equal(s, t), cb.equal(s, t), "{:?} {:?}", ga.name_of(s), ga.name_of(t));
                    }
                }
            }
        }
    }
}
