#![allow(dead_code)]
pub mod exhaustive;


use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdcc::oracle::{self, OracleOptions};
use fdcc::supervisor::{self, Config, Verdict};
use fdcc::formula::Formula;

/// `Some(true)` for sat, `Some(false)` for unsat.
pub fn oracle_sat(f: &Formula) -> Option<bool> {
    match oracle::solve(f, &OracleOptions::default()).ok()? {
        oracle::Verdict::Sat(m) => {
            assert!(oracle::eval(f, &m), "oracle model rejected by eval: {m}");
            Some(true)
        }
        oracle::Verdict::Unsat => Some(false),
    }
}

pub fn solver_sat(f: &Formula, cfg: &Config) -> Option<bool> {
    match supervisor::solve(f, cfg).verdict {
        Verdict::Sat(m) => {
            assert!(oracle::eval(f, &m), "solver model rejected: {m}");
            Some(true)
        }
        Verdict::Unsat(_) => Some(false),
        Verdict::Unknown => None,
    }
}

struct Gen {
    rng: ChaCha8Rng,
    ints: Vec<String>,
    arrays: Vec<String>,
}

impl Gen {
    fn int(&mut self, depth: u32) -> String {
        let r = self.rng.gen_range(0..10);
        if depth == 0 || r < 5 {
            return self.ints.choose(&mut self.rng).unwrap().clone();
        }
        if r < 7 {
            return self.rng.gen_range(0..=3).to_string();
        }
        let a = self.array(depth - 1);
        let i = self.int(depth - 1);
        format!("(select {a} {i})")
    }

    fn array(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.6) {
            return self.arrays.choose(&mut self.rng).unwrap().clone();
        }
        let a = self.array(depth - 1);
        let i = self.int(depth - 1);
        let e = self.int(depth - 1);
        format!("(store {a} {i} {e})")
    }
}

/// Small formulas over two or three arrays of size at most 3 and domains
/// inside 0..3, using every atom kind of the array language.
pub fn random_formula(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut ints = Vec::new();
    for name in ["x", "y", "z"] {
        let lo = rng.gen_range(0..=2);
        let hi = rng.gen_range(lo..=3);
        out += &format!("(declare-int {name} {lo} {hi})\n");
        ints.push(name.to_string());
    }
    let n = rng.gen_range(1..=3);
    out += &format!("(declare-array A {n} 0 3)\n");
    let mut arrays = vec!["A".to_string()];
    match rng.gen_range(0..3) {
        0 => out += &format!("(declare-array B {n} 0 3)\n"),
        1 => out += "(declare-array B (bounded 3) 0 3)\n",
        _ => out += &format!("(declare-uniform-array B x {n})\n"),
    }
    arrays.push("B".into());
    let mut g = Gen { rng, ints, arrays };
    let len = g.rng.gen_range(1..=6);
    for _ in 0..len {
        let atom = match g.rng.gen_range(0..20) {
            0..=5 => format!("(= {} {})", g.int(2), g.int(2)),
            6..=10 => format!("(distinct {} {})", g.int(2), g.int(2)),
            11..=12 => format!("(=a {} {})", g.array(1), g.array(1)),
            13 => format!("(distinct-a {} {})", g.array(1), g.array(1)),
            14..=16 => {
                let k = g.rng.gen_range(1..=3);
                let terms: Vec<String> = (0..k)
                    .map(|_| format!("(* {} {})", g.rng.gen_range(-2..=2), g.int(1)))
                    .collect();
                format!("(leq (+ {}) {})", terms.join(" "), g.rng.gen_range(-2..=4))
            }
            17 => format!("(mul {} {} {})", g.int(1), g.int(1), g.int(1)),
            18 => {
                let w = g.int(0);
                format!("(diff-array A B {w})")
            }
            _ => format!("(= (size A) {})", g.int(0)),
        };
        out += &atom;
        out.push('\n');
    }
    out
}

/// Small formulas over one or two maps with keys and values inside 0..3.
pub fn random_map_formula(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let ints = ["i", "j", "v"];
    for name in ints {
        out += &format!("(declare-int {name} 0 3)\n");
    }
    let klo = rng.gen_range(0..=1);
    let khi = rng.gen_range(klo..=2);
    out += &format!("(declare-map H {klo} {khi} 0 3)\n");
    out += &format!("(declare-map G {klo} {khi} 0 3)\n");
    let pick = |rng: &mut ChaCha8Rng| -> String {
        if rng.gen_bool(0.8) {
            ints.choose(rng).unwrap().to_string()
        } else {
            rng.gen_range(0..=3).to_string()
        }
    };
    let map = |rng: &mut ChaCha8Rng| -> String {
        let base = if rng.gen_bool(0.5) { "H" } else { "G" };
        match rng.gen_range(0..4) {
            0 | 1 => base.to_string(),
            2 => format!("(store {base} {} {})", pick(rng), pick(rng)),
            _ => format!("(delete {base} {})", pick(rng)),
        }
    };
    let len = rng.gen_range(1..=5);
    for _ in 0..len {
        let atom = match rng.gen_range(0..6) {
            0 => format!("(keys {} {})", map(&mut rng), pick(&mut rng)),
            1 => format!("(not-keys {} {})", map(&mut rng), pick(&mut rng)),
            2 => format!("(= (select {} {}) {})", map(&mut rng), pick(&mut rng), pick(&mut rng)),
            3 => format!("(distinct (select {} {}) {})", map(&mut rng), pick(&mut rng), pick(&mut rng)),
            4 => format!("(= {} {})", pick(&mut rng), pick(&mut rng)),
            _ => format!("(distinct {} {})", pick(&mut rng), pick(&mut rng)),
        };
        out += &atom;
        out.push('\n');
    }
    out
}
