use super::*;
use crate::formula::Sort;

struct Fx {
    tt: TermTable,
    cc: Cc,
}

impl Fx {
    fn new() -> Self {
        Fx {
            tt: TermTable::new(),
            cc: Cc::new(),
        }
    }
    fn int(&mut self, n: &str) -> TermId {
        self.tt.var(n, Sort::Int)
    }
    fn arr(&mut self, n: &str) -> TermId {
        self.tt.var(n, Sort::Array)
    }
    fn eq(&mut self, a: TermId, b: TermId) -> Result<Vec<Deduction>, Inconsistent> {
        self.cc.assert_lit(&mut self.tt, Lit::Eq(a, b))
    }
    fn ne(&mut self, a: TermId, b: TermId) -> Result<Vec<Deduction>, Inconsistent> {
        self.cc.assert_lit(&mut self.tt, Lit::Diff(a, b))
    }
    fn create(&mut self, t: TermId) -> Vec<Deduction> {
        self.cc.create(&mut self.tt, t).unwrap()
    }
}

#[test]
fn fresh_term_is_its_own_class() {
    let mut fx = Fx::new();
    let x = fx.int("x");
    fx.create(x);
    assert_eq!(fx.cc.find(x), x);
}

#[test]
fn select_records_super_and_sub_terms() {
    let mut fx = Fx::new();
    let (a, i) = (fx.arr("A"), fx.int("i"));
    let s = fx.tt.select(a, i);
    fx.create(s);
    assert_eq!(fx.cc.super_terms(a), vec![s]);
    assert_eq!(fx.cc.super_terms(i), vec![s]);
    assert_eq!(fx.cc.sub_terms(&fx.tt, s), vec![(i, a)]);
}

#[test]
fn read_over_write_installs_three_watches() {
    let mut fx = Fx::new();
    let (a, i, e, j) = (fx.arr("A"), fx.int("i"), fx.int("e"), fx.int("j"));
    let st = fx.tt.store(a, i, e);
    let t = fx.tt.select(st, j);
    fx.create(t);
    assert_eq!(fx.cc.live_watches(), 3);
    assert_eq!(fx.cc.row_terms(), &[t]);
}

#[test]
fn first_motivating_formula_is_refuted() {
    let mut fx = Fx::new();
    let (a, i, j, e, f) = (fx.arr("A"), fx.int("i"), fx.int("j"), fx.int("e"), fx.int("f"));
    let si = fx.tt.select(a, i);
    let sj = fx.tt.select(a, j);
    fx.eq(e, si).unwrap();
    fx.eq(f, sj).unwrap();
    fx.ne(e, f).unwrap();
    assert_eq!(fx.eq(i, j), Err(Inconsistent));
    assert!(fx.cc.is_inconsistent());
}

#[test]
fn different_reads_give_different_indexes() {
    let mut fx = Fx::new();
    let (a, i, j, e, f) = (fx.arr("A"), fx.int("i"), fx.int("j"), fx.int("e"), fx.int("f"));
    let si = fx.tt.select(a, i);
    let sj = fx.tt.select(a, j);
    fx.eq(e, si).unwrap();
    fx.eq(f, sj).unwrap();
    let out = fx.ne(e, f).unwrap();
    assert!(out.contains(&Deduction::NewDiff(i, j)), "{out:?}");
    assert!(fx.cc.diff(i, j));
}

#[test]
fn equal_indexes_read_the_written_element() {
    let mut fx = Fx::new();
    let (a, i, e, j) = (fx.arr("A"), fx.int("i"), fx.int("e"), fx.int("j"));
    let st = fx.tt.store(a, i, e);
    let t = fx.tt.select(st, j);
    fx.create(t);
    let out = fx.eq(i, j).unwrap();
    assert!(out.contains(&Deduction::NewEq(t, e)), "{out:?}");
    assert_eq!(fx.cc.stale_watches(), 0);
}

#[test]
fn different_indexes_read_the_base_array() {
    let mut fx = Fx::new();
    let (a, i, e, j) = (fx.arr("A"), fx.int("i"), fx.int("e"), fx.int("j"));
    let st = fx.tt.store(a, i, e);
    let t = fx.tt.select(st, j);
    fx.create(t);
    assert!(fx.tt.lookup(&TermKind::Select(a, j)).is_none());
    let out = fx.ne(i, j).unwrap();
    let base = fx.tt.lookup(&TermKind::Select(a, j)).expect("read created");
    assert_eq!(out[0], Deduction::NewTerm(base));
    assert!(out.contains(&Deduction::NewEq(t, base)), "{out:?}");
    assert!(fx.cc.equal(t, base));
}

#[test]
fn read_differs_from_written_element_gives_different_indexes() {
    let mut fx = Fx::new();
    let (a, i, e, j) = (fx.arr("A"), fx.int("i"), fx.int("e"), fx.int("j"));
    let st = fx.tt.store(a, i, e);
    let t = fx.tt.select(st, j);
    fx.create(t);
    let out = fx.ne(t, e).unwrap();
    assert!(out.contains(&Deduction::NewDiff(i, j)), "{out:?}");
}

#[test]
fn base_read_watch_only_when_read_exists() {
    let mut fx = Fx::new();
    let (a, i, e, j) = (fx.arr("A"), fx.int("i"), fx.int("e"), fx.int("j"));
    let st = fx.tt.store(a, i, e);
    let t = fx.tt.select(st, j);
    let base = fx.tt.select(a, j);
    fx.create(base);
    fx.create(t);
    assert_eq!(fx.cc.live_watches(), 4);
    let out = fx.ne(t, base).unwrap();
    assert!(out.contains(&Deduction::NewEq(i, j)), "{out:?}");
}

#[test]
fn partial_evaluation() {
    let mut fx = Fx::new();
    let (x, y, z) = (fx.int("x"), fx.int("y"), fx.int("z"));
    fx.create(z);
    fx.eq(x, y).unwrap();
    assert_eq!(fx.cc.partial_eval(Lit::Eq(x, y)), Truth::True);
    assert_eq!(fx.cc.partial_eval(Lit::Eq(x, z)), Truth::Unknown);
    let w = fx.int("w");
    fx.ne(x, w).unwrap();
    assert_eq!(fx.cc.partial_eval(Lit::Eq(x, w)), Truth::False);
    assert_eq!(fx.cc.partial_eval(Lit::Diff(y, w)), Truth::True);
}

#[test]
fn union_is_transitive() {
    let mut fx = Fx::new();
    let (x, y, z) = (fx.int("x"), fx.int("y"), fx.int("z"));
    assert!(fx.cc.equal(x, x));
    fx.eq(x, y).unwrap();
    fx.eq(y, z).unwrap();
    assert!(fx.cc.equal(x, z));
}

#[test]
fn triangle_is_reported_once() {
    let mut fx = Fx::new();
    let (e, f, g) = (fx.int("e"), fx.int("f"), fx.int("g"));
    assert!(fx.ne(e, f).unwrap().is_empty());
    fx.ne(e, g).unwrap();
    let out = fx.ne(f, g).unwrap();
    let mut tri = [e, f, g];
    tri.sort();
    assert_eq!(out, vec![Deduction::Clique3(tri)]);
    assert!(fx.ne(g, f).unwrap().is_empty());
}

#[test]
fn single_disequality_has_no_clique() {
    let mut fx = Fx::new();
    let (a, b) = (fx.int("a"), fx.int("b"));
    assert!(fx.ne(a, b).unwrap().is_empty());
}

#[test]
fn complete_graph_on_four_vertices_has_four_triangles() {
    let mut fx = Fx::new();
    let v: Vec<TermId> = ["a", "b", "c", "d"].iter().map(|n| fx.int(n)).collect();
    let mut reported = Vec::new();
    for x in 0..4 {
        for y in x + 1..4 {
            for d in fx.ne(v[x], v[y]).unwrap() {
                if let Deduction::Clique3(t) = d {
                    reported.push(t);
                }
            }
        }
    }
    let mut expected = Vec::new();
    for x in 0..4 {
        for y in x + 1..4 {
            for z in y + 1..4 {
                let mut t = [v[x], v[y], v[z]];
                t.sort();
                expected.push(t);
            }
        }
    }
    reported.sort();
    expected.sort();
    assert_eq!(reported, expected);
}

#[test]
fn constants_are_pairwise_different() {
    let mut fx = Fx::new();
    let two = fx.tt.constant(2);
    let three = fx.tt.constant(3);
    let x = fx.int("x");
    fx.eq(x, two).unwrap();
    fx.create(three);
    assert!(fx.cc.diff(two, three));
    assert_eq!(fx.eq(x, three), Err(Inconsistent));
}

#[test]
fn congruence_on_array_arguments() {
    let mut fx = Fx::new();
    let (a, b, i) = (fx.arr("A"), fx.arr("B"), fx.int("i"));
    let sa = fx.tt.select(a, i);
    let sb = fx.tt.select(b, i);
    fx.create(sa);
    fx.create(sb);
    let out = fx.eq(a, b).unwrap();
    assert!(out.contains(&Deduction::NewEq(sb, sa)) || out.contains(&Deduction::NewEq(sa, sb)));
    assert!(fx.cc.equal(sa, sb));
}

#[test]
fn reads_of_uniform_arrays_equal_the_element() {
    let mut fx = Fx::new();
    let (e, j) = (fx.int("e"), fx.int("j"));
    let k = fx.tt.uniform(e, Some(4));
    let s = fx.tt.select(k, j);
    fx.create(s);
    assert!(fx.cc.equal(s, e));
    assert_eq!(fx.ne(s, e), Err(Inconsistent));
}

#[test]
fn merging_arrays_propagates_index_disequality() {
    let mut fx = Fx::new();
    let (a, b, i, j) = (fx.arr("A"), fx.arr("B"), fx.int("i"), fx.int("j"));
    let sa = fx.tt.select(a, i);
    let sb = fx.tt.select(b, j);
    fx.ne(sa, sb).unwrap();
    assert!(!fx.cc.diff(i, j));
    let out = fx.eq(a, b).unwrap();
    assert!(
        out.contains(&Deduction::NewDiff(i, j)) || out.contains(&Deduction::NewDiff(j, i)),
        "{out:?}"
    );
}

#[test]
fn dump_lists_classes() {
    let mut fx = Fx::new();
    let (x, y) = (fx.int("x"), fx.int("y"));
    fx.ne(x, y).unwrap();
    let d = fx.cc.dump(&fx.tt);
    assert!(d.contains("diff"), "{d}");
}
