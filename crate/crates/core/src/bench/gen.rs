//! Seeded random formulas over a handful of arrays.
//!
//! Atom kinds are drawn uniformly among those admissible for the class.
//! Every index or element position reuses an already used variable with
//! probability 0.8 and opens a fresh one otherwise.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{ArraySize, Atom, Formula, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    AeufI,
    AeufII,
    AeufLiaI,
    AeufLiaII,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::AeufI, Class::AeufII, Class::AeufLiaI, Class::AeufLiaII];

    pub fn name(self) -> &'static str {
        match self {
            Class::AeufI => "AEUF-I",
            Class::AeufII => "AEUF-II",
            Class::AeufLiaI => "AEUF+LIA-I",
            Class::AeufLiaII => "AEUF+LIA-II",
        }
    }

    pub fn hard(self) -> bool {
        matches!(self, Class::AeufII | Class::AeufLiaII)
    }

    pub fn linear(self) -> bool {
        matches!(self, Class::AeufLiaI | Class::AeufLiaII)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Class::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown class `{s}` (expected AEUF-I, AEUF-II, AEUF+LIA-I or AEUF+LIA-II)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub class: Class,
    /// Number of atoms, declarations excluded.
    pub length: usize,
    pub seed: u64,
    pub num_vars: usize,
    pub array_size: u32,
    pub domain_hi: i64,
}

impl GenConfig {
    pub fn new(class: Class, length: usize, seed: u64) -> Self {
        GenConfig {
            class,
            length,
            seed,
            num_vars: 40,
            array_size: 20,
            domain_hi: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Read,
    ReadDiff,
    ReadRead,
    Eq,
    Diff,
    Leq,
}

const AEUF_PURE: &[Kind] = &[Kind::Read, Kind::ReadDiff, Kind::ReadRead, Kind::Eq, Kind::Diff];
const AEUF_LIA: &[Kind] = &[
    Kind::Read,
    Kind::ReadDiff,
    Kind::ReadRead,
    Kind::Eq,
    Kind::Diff,
    Kind::Leq,
];

struct Vars {
    used: usize,
    cap: usize,
}

impl Vars {
    fn pick(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let fresh = self.used == 0 || (self.used < self.cap && !rng.gen_bool(0.8));
        if fresh {
            self.used += 1;
            self.used - 1
        } else {
            rng.gen_range(0..self.used)
        }
    }
}

/// Store chain `store(...store(base, i1, e1)..., ik, ek)` over variable indexes.
struct Chain {
    base: usize,
    writes: Vec<(usize, usize)>,
}

enum Planned {
    Read(usize, usize, usize),
    ReadDiff(usize, usize, usize),
    ReadRead(bool, (usize, usize), (usize, usize)),
    Eq(usize, usize),
    Diff(usize, usize),
    Leq(Vec<(i64, usize)>, i64),
}

/// Builds the formula described by `cfg`. Equal configurations give
/// identical formulas.
pub fn generate(cfg: &GenConfig) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ class_salt(cfg.class));
    let mut vars = Vars {
        used: 0,
        cap: cfg.num_vars.max(1),
    };

    let (bases, chain_lens) = if cfg.class.hard() {
        let mut lens: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=8)).collect();
        if lens.iter().all(|&l| l < 3) {
            lens[0] = rng.gen_range(3..=8);
        }
        (3, lens)
    } else {
        (2, vec![2])
    };
    let chains: Vec<Chain> = chain_lens
        .iter()
        .map(|&len| Chain {
            base: rng.gen_range(0..bases),
            writes: (0..len).map(|_| (vars.pick(&mut rng), vars.pick(&mut rng))).collect(),
        })
        .collect();
    let arrays = bases + chains.len();

    let kinds = if cfg.class.linear() { AEUF_LIA } else { AEUF_PURE };
    let mut plan: Vec<Planned> = (0..cfg.length)
        .map(|_| {
            let kind = *kinds.choose(&mut rng).expect("kinds are not empty");
            plan_atom(kind, cfg, arrays, &mut vars, &mut rng)
        })
        .collect();
    // a linear class always carries some arithmetic
    if cfg.class.linear() && !plan.is_empty() && !plan.iter().any(|p| matches!(p, Planned::Leq(..))) {
        let k = rng.gen_range(0..plan.len());
        plan[k] = plan_atom(Kind::Leq, cfg, arrays, &mut vars, &mut rng);
    }

    build(cfg, bases, &chains, vars.used, &plan)
}

fn plan_atom(kind: Kind, cfg: &GenConfig, arrays: usize, vars: &mut Vars, rng: &mut ChaCha8Rng) -> Planned {
    match kind {
        Kind::Read => {
            let a = rng.gen_range(0..arrays);
            Planned::Read(vars.pick(rng), a, vars.pick(rng))
        }
        Kind::ReadDiff => {
            let a = rng.gen_range(0..arrays);
            Planned::ReadDiff(vars.pick(rng), a, vars.pick(rng))
        }
        Kind::ReadRead => {
            let eq = rng.gen_bool(0.5);
            let (a, b) = (rng.gen_range(0..arrays), rng.gen_range(0..arrays));
            Planned::ReadRead(eq, (a, vars.pick(rng)), (b, vars.pick(rng)))
        }
        Kind::Eq => Planned::Eq(vars.pick(rng), vars.pick(rng)),
        Kind::Diff => Planned::Diff(vars.pick(rng), vars.pick(rng)),
        Kind::Leq => {
            let n = rng.gen_range(2..=3);
            let coeffs: Vec<(i64, usize)> = (0..n)
                .map(|_| {
                    let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    (c, vars.pick(rng))
                })
                .collect();
            Planned::Leq(coeffs, rng.gen_range(0..=cfg.domain_hi))
        }
    }
}

fn class_salt(class: Class) -> u64 {
    match class {
        Class::AeufI => 0x1u64,
        Class::AeufII => 0x2,
        Class::AeufLiaI => 0x3,
        Class::AeufLiaII => 0x4,
    }
    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

const ARRAY_NAMES: [&str; 3] = ["A", "B", "C"];
const CHAIN_NAMES: [&str; 3] = ["D", "E", "F"];

fn build(cfg: &GenConfig, bases: usize, chains: &[Chain], used: usize, plan: &[Planned]) -> Formula {
    let mut f = Formula::new();
    let x: Vec<TermId> = (0..used).map(|k| f.declare_int(&format!("x{k}"), 0, cfg.domain_hi)).collect();
    let mut arrays: Vec<TermId> = ARRAY_NAMES[..bases]
        .iter()
        .map(|name| f.declare_array(name, ArraySize::Fixed(cfg.array_size), Some((0, cfg.domain_hi))))
        .collect();
    // A chained array is a named copy of its store term, which keeps reads
    // short when printed.
    for (chain, name) in chains.iter().zip(CHAIN_NAMES) {
        let mut t = arrays[chain.base];
        for &(i, e) in &chain.writes {
            t = f.terms.store(t, x[i], x[e]);
        }
        let named = f.declare_array(name, ArraySize::Fixed(cfg.array_size), Some((0, cfg.domain_hi)));
        f.push(Atom::ArrayEq(named, t));
        arrays.push(named);
    }
    for p in plan {
        let atom = match *p {
            Planned::Read(v, a, i) => {
                let s = f.terms.select(arrays[a], x[i]);
                Atom::Eq(x[v], s)
            }
            Planned::ReadDiff(v, a, i) => {
                let s = f.terms.select(arrays[a], x[i]);
                Atom::Diff(x[v], s)
            }
            Planned::ReadRead(eq, (a, i), (b, j)) => {
                let s = f.terms.select(arrays[a], x[i]);
                let t = f.terms.select(arrays[b], x[j]);
                if eq {
                    Atom::Eq(s, t)
                } else {
                    Atom::Diff(s, t)
                }
            }
            Planned::Eq(u, v) => Atom::Eq(x[u], x[v]),
            Planned::Diff(u, v) => Atom::Diff(x[u], x[v]),
            Planned::Leq(ref coeffs, bound) => Atom::LinearLeq {
                coeffs: coeffs.iter().map(|&(c, v)| (c, x[v])).collect(),
                bound,
            },
        };
        f.push(atom);
    }
    f.freeze_default_elems();
    f
}
