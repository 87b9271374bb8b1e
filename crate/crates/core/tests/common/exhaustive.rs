//! Exhaustive checks of single propagators on tiny instances.
//!
//! For every combination of small domains, the values that take part in
//! some solution (found by enumeration) must survive propagation, and
//! labelling must find a solution exactly when one exists. Ground
//! instances are also checked through `Propagator::check`.

use std::collections::BTreeMap;

use fdcc::ext::{AccessUnclosed, DiffArray, UpdateUnclosed};
use fdcc::fd::props::{Access, AllDiff, Update};
use fdcc::fd::{label, AllDiffStrength, Array, Budget, Domain, NoHook, Outcome, SearchStats, Store, VarId, TIER_OTHER};

#[derive(Debug, Default)]
pub struct Tally {
    pub instances: u64,
    pub violations: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }
}

const CELL: &[&[i64]] = &[&[0], &[1], &[3], &[0, 1], &[1, 2], &[0, 2, 3], &[0, 1, 2, 3]];
const CELL_SMALL: &[&[i64]] = &[&[0], &[1], &[0, 1], &[0, 1, 2, 3]];
const INDEX: &[&[i64]] = &[&[0], &[2], &[0, 1], &[1, 2], &[-1, 0, 1, 2, 3], &[-1, 0]];
const INDEX_SMALL: &[&[i64]] = &[&[0], &[1], &[0, 1], &[-1, 0, 1, 2]];
const SIZE: &[&[i64]] = &[&[1], &[2], &[3], &[1, 2], &[2, 3], &[1, 2, 3]];

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn reps(set: &[&[i64]]) -> Vec<Vec<i64>> {
    set.iter().map(|d| d.to_vec()).collect()
}

fn instances(shape: &[&[&[i64]]]) -> Vec<Vec<Vec<i64>>> {
    let choices: Vec<Vec<Vec<i64>>> = shape.iter().map(|s| reps(s)).collect();
    product(&choices)
}

fn label_sat(s: &mut Store) -> bool {
    let mut stats = SearchStats::default();
    matches!(label(s, &mut NoHook, &Budget::Unlimited, &mut stats), Outcome::Sat(_))
}

fn check_one(
    name: &str,
    doms: &[Vec<i64>],
    post: &dyn Fn(&mut Store, &[VarId]),
    holds: &dyn Fn(&[i64]) -> bool,
    t: &mut Tally,
) {
    t.instances += 1;
    let mut support: Vec<Vec<i64>> = vec![Vec::new(); doms.len()];
    let mut any = false;
    for vals in product(doms) {
        if holds(&vals) {
            any = true;
            for (k, &v) in vals.iter().enumerate() {
                if !support[k].contains(&v) {
                    support[k].push(v);
                }
            }
        }
    }
    let mut s = Store::new();
    let vars: Vec<VarId> = doms
        .iter()
        .map(|d| s.new_var(Domain::from_values(d.iter().copied()), TIER_OTHER))
        .collect();
    post(&mut s, &vars);
    if s.propagate().is_err() {
        if any {
            t.fail(format!("{name}: failed on {doms:?} which has solutions"));
        }
        return;
    }
    for (k, sup) in support.iter().enumerate() {
        for &v in sup {
            if !s.dom(vars[k]).contains(v) {
                t.fail(format!("{name}: pruned supported value {v} of var {k} in {doms:?}"));
            }
        }
    }
    if label_sat(&mut s) != any {
        t.fail(format!("{name}: labelling disagrees with enumeration on {doms:?}"));
    }
}

fn check_ground(
    name: &str,
    ranges: &[Vec<i64>],
    post: &dyn Fn(&mut Store, &[VarId]),
    holds: &dyn Fn(&[i64]) -> bool,
    t: &mut Tally,
) {
    if ranges.is_empty() {
        return;
    }
    for vals in product(ranges) {
        t.instances += 1;
        let expected = holds(&vals);
        let mut s = Store::new();
        let vars: Vec<VarId> = vals
            .iter()
            .map(|&v| s.new_var(Domain::singleton(v), TIER_OTHER))
            .collect();
        post(&mut s, &vars);
        let checks: Vec<Option<bool>> = s.active_props().map(|p| p.check(&s)).collect();
        if checks.contains(&Some(!expected)) {
            t.fail(format!("{name}: check() wrong on ground {vals:?}"));
        }
        let decided = s.propagate().is_ok() && label_sat(&mut s);
        if decided != expected {
            t.fail(format!("{name}: ground {vals:?} decided {decided}, expected {expected}"));
        }
    }
}

fn family(
    name: &str,
    shape: &[&[&[i64]]],
    ground: &[Vec<i64>],
    post: impl Fn(&mut Store, &[VarId]),
    holds: impl Fn(&[i64]) -> bool,
    t: &mut Tally,
) {
    for doms in instances(shape) {
        check_one(name, &doms, &post, &holds, t);
    }
    check_ground(name, ground, &post, &holds, t);
}

fn vals(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).collect()
}

pub fn access(t: &mut Tally) {
    // A[0..n], I, E
    for n in 1..=3usize {
        let mut shape: Vec<&[&[i64]]> = vec![CELL; n];
        shape.extend([INDEX, CELL]);
        let mut ground = vec![vals(0, 3); n];
        ground.extend([vals(-1, 3), vals(0, 3)]);
        family(
            "access",
            &shape,
            &ground,
            |s, v| {
                let a = s.new_array(Array::Fixed(v[..n].to_vec()));
                s.post(Access {
                    array: a,
                    index: v[n],
                    elem: v[n + 1],
                });
            },
            |x| (0..n as i64).contains(&x[n]) && x[x[n] as usize] == x[n + 1],
            t,
        );
    }
}

pub fn update(t: &mut Tally) {
    // A[0..n], B[0..n], I, E
    for n in 1..=2usize {
        let mut shape: Vec<&[&[i64]]> = vec![CELL_SMALL; 2 * n];
        shape.extend([INDEX, CELL]);
        let mut ground = vec![vals(0, 2); 2 * n];
        ground.extend([vals(-1, 2), vals(0, 2)]);
        family(
            "update",
            &shape,
            &ground,
            |s, v| {
                let from = s.new_array(Array::Fixed(v[..n].to_vec()));
                let to = s.new_array(Array::Fixed(v[n..2 * n].to_vec()));
                s.post(Update {
                    from,
                    index: v[2 * n],
                    elem: v[2 * n + 1],
                    to,
                });
            },
            |x| {
                let (i, e) = (x[2 * n], x[2 * n + 1]);
                (0..n as i64).contains(&i)
                    && (0..n).all(|k| x[n + k] == if k as i64 == i { e } else { x[k] })
            },
            t,
        );
    }
}

pub fn diff_array(t: &mut Tally) {
    // A[0..n], B[0..n], I
    for n in 1..=2usize {
        let mut shape: Vec<&[&[i64]]> = vec![CELL; 2 * n];
        shape.push(INDEX);
        let mut ground = vec![vals(0, 3); 2 * n];
        ground.push(vals(-1, 2));
        family(
            "diff-array",
            &shape,
            &ground,
            |s, v| {
                let a = s.new_array(Array::Fixed(v[..n].to_vec()));
                let b = s.new_array(Array::Fixed(v[n..2 * n].to_vec()));
                s.post(DiffArray {
                    a,
                    index: v[2 * n],
                    b,
                });
            },
            |x| {
                let i = x[2 * n];
                (0..n as i64).contains(&i) && x[i as usize] != x[n + i as usize]
            },
            t,
        );
    }
    // three cells with coarser domains
    let mut shape: Vec<&[&[i64]]> = vec![CELL_SMALL; 6];
    shape.push(INDEX_SMALL);
    family(
        "diff-array",
        &shape,
        &[],
        |s, v| {
            let a = s.new_array(Array::Fixed(v[..3].to_vec()));
            let b = s.new_array(Array::Fixed(v[3..6].to_vec()));
            s.post(DiffArray { a, index: v[6], b });
        },
        |x| (0..3).contains(&x[6]) && x[x[6] as usize] != x[3 + x[6] as usize],
        t,
    );
}

pub fn alldiff(t: &mut Tally) {
    for strength in [AllDiffStrength::Basic, AllDiffStrength::Matching] {
        for n in 2..=4usize {
            let shape: Vec<&[&[i64]]> = vec![CELL; n];
            let ground = vec![vals(0, 3); n];
            family(
                "alldiff",
                &shape,
                &ground,
                |s, v| {
                    s.post(AllDiff {
                        vars: v.to_vec(),
                        strength,
                    });
                },
                |x| (0..x.len()).all(|a| (a + 1..x.len()).all(|b| x[a] != x[b])),
                t,
            );
        }
    }
}

fn unclosed(s: &mut Store, cells: &[VarId], size: VarId) -> fdcc::fd::ArrayId {
    let cells: BTreeMap<i64, VarId> = cells.iter().enumerate().map(|(k, &c)| (k as i64, c)).collect();
    s.new_array(Array::Unclosed {
        cells,
        size,
        elems: Domain::range(0, 3),
    })
}

/// Size domains compatible with `r` represented cells: a cell is only ever
/// represented below every admissible size.
fn sizes_above(r: usize, max: i64) -> Vec<&'static [i64]> {
    SIZE.iter()
        .copied()
        .filter(|d| d[0] >= r.max(1) as i64 && *d.last().unwrap() <= max)
        .collect()
}

pub fn access_unclosed(t: &mut Tally) {
    // A[0..r] represented, S, I, E; missing cells hold anything in 0..3
    for r in 0..=3usize {
        let sizes = sizes_above(r, 3);
        let mut shape: Vec<&[&[i64]]> = vec![CELL_SMALL; r];
        shape.extend([&sizes[..], INDEX, CELL]);
        let mut ground = vec![vals(0, 2); r];
        ground.extend([vals(r.max(1) as i64, 3), vals(-1, 3), vals(0, 4)]);
        family(
            "access-unclosed",
            &shape,
            &ground,
            |s, v| {
                let a = unclosed(s, &v[..r], v[r]);
                s.post(AccessUnclosed {
                    array: a,
                    index: v[r + 1],
                    elem: v[r + 2],
                });
            },
            |x| {
                let (n, i, e) = (x[r], x[r + 1], x[r + 2]);
                (0..n).contains(&i) && if (i as usize) < r { x[i as usize] == e } else { (0..=3).contains(&e) }
            },
            t,
        );
    }
}

pub fn update_unclosed(t: &mut Tally) {
    // A[0..r], B[0..r] sharing size S, I, E
    for r in 0..=2usize {
        let sizes = sizes_above(r, 3);
        let mut shape: Vec<&[&[i64]]> = vec![CELL_SMALL; 2 * r];
        shape.extend([&sizes[..], INDEX_SMALL, CELL_SMALL]);
        let mut ground = vec![vals(0, 2); 2 * r];
        ground.extend([vals(r.max(1) as i64, 3), vals(-1, 2), vals(0, 2)]);
        family(
            "update-unclosed",
            &shape,
            &ground,
            |s, v| {
                let from = unclosed(s, &v[..r], v[2 * r]);
                let to = unclosed(s, &v[r..2 * r], v[2 * r]);
                s.post(UpdateUnclosed {
                    from,
                    index: v[2 * r + 1],
                    elem: v[2 * r + 2],
                    to,
                });
            },
            |x| {
                let (n, i, e) = (x[2 * r], x[2 * r + 1], x[2 * r + 2]);
                (0..n).contains(&i) && (0..r).all(|k| x[r + k] == if k as i64 == i { e } else { x[k] })
            },
            t,
        );
    }
}

/// Runs every family, returning the tallies by propagator name.
pub fn all() -> Vec<(&'static str, Tally)> {
    type Family = (&'static str, fn(&mut Tally));
    let runs: [Family; 6] = [
        ("Access", access),
        ("Update", update),
        ("DiffArray", diff_array),
        ("AllDiff", alldiff),
        ("AccessUnclosed", access_unclosed),
        ("UpdateUnclosed", update_unclosed),
    ];
    runs.into_iter()
        .map(|(name, run)| {
            let mut t = Tally::default();
            run(&mut t);
            (name, t)
        })
        .collect()
}
