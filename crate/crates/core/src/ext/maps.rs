//! Maps encoded as a pair of arrays: `E` holds the values and `K` holds a
//! 0/1 flag telling whether the key is mapped.

use std::collections::HashMap;

use crate::formula::{ArraySize, Atom, Formula, Sort, TermId, TermKind};

struct Encoder<'a> {
    f: &'a Formula,
    g: Formula,
    ints: HashMap<TermId, TermId>,
    arrays: HashMap<TermId, TermId>,
    maps: HashMap<TermId, (TermId, TermId)>,
    /// Key range of the map each map term is built on.
    key_range: HashMap<TermId, (i64, i64)>,
    side: Vec<Atom>,
}

impl Encoder<'_> {
    fn base_keys(&self, m: TermId) -> (i64, i64) {
        self.key_range[&m]
    }

    fn key(&mut self, map: TermId, k: TermId) -> TermId {
        let key = self.int(k);
        let (lo, _) = self.base_keys(map);
        if lo > 0 {
            self.side.push(Atom::LinearLeq {
                coeffs: vec![(-1, key)],
                bound: -lo,
            });
        }
        key
    }

    fn int(&mut self, t: TermId) -> TermId {
        if let Some(&u) = self.ints.get(&t) {
            return u;
        }
        let u = match *self.f.terms.kind(t) {
            TermKind::Var(ref name) => self.g.symbol(name).expect("integer declared before use"),
            TermKind::Const(c) => self.g.terms.constant(c),
            TermKind::Select(a, i) if self.f.terms.sort(a) == Sort::Map => {
                let (e, k) = self.map(a);
                let j = self.key(a, i);
                let flag = self.g.terms.select(k, j);
                let one = self.g.terms.constant(1);
                self.side.push(Atom::Eq(flag, one));
                self.g.terms.select(e, j)
            }
            TermKind::Select(a, i) => {
                let (a, i) = (self.array(a), self.int(i));
                self.g.terms.select(a, i)
            }
            TermKind::Size(a) => {
                let a = self.array(a);
                self.g.terms.size_of(a)
            }
            _ => unreachable!("integer term expected"),
        };
        self.ints.insert(t, u);
        u
    }

    fn array(&mut self, t: TermId) -> TermId {
        if let Some(&u) = self.arrays.get(&t) {
            return u;
        }
        let u = match *self.f.terms.kind(t) {
            TermKind::Var(ref name) => self.g.symbol(name).expect("array declared before use"),
            TermKind::Uniform { elem, size } => {
                let e = self.int(elem);
                self.g.terms.uniform(e, size)
            }
            TermKind::Store(a, i, e) => {
                let (a, i, e) = (self.array(a), self.int(i), self.int(e));
                self.g.terms.store(a, i, e)
            }
            _ => unreachable!("array term expected"),
        };
        self.arrays.insert(t, u);
        u
    }

    fn map(&mut self, t: TermId) -> (TermId, TermId) {
        if let Some(&p) = self.maps.get(&t) {
            return p;
        }
        let p = match *self.f.terms.kind(t) {
            TermKind::Store(h, i, v) => {
                let (e, k) = self.map(h);
                self.key_range.insert(t, self.base_keys(h));
                let i = self.key(t, i);
                let v = self.int(v);
                let one = self.g.terms.constant(1);
                (self.g.terms.store(e, i, v), self.g.terms.store(k, i, one))
            }
            TermKind::Delete(h, i) => {
                let (e, k) = self.map(h);
                self.key_range.insert(t, self.base_keys(h));
                let i = self.key(t, i);
                let zero = self.g.terms.constant(0);
                (e, self.g.terms.store(k, i, zero))
            }
            _ => unreachable!("map {t} used before its declaration"),
        };
        self.maps.insert(t, p);
        p
    }

    fn atom(&mut self, atom: &Atom) {
        let out = match *atom {
            Atom::DeclInt { var, lo, hi } => {
                let name = self.f.name_of(var).expect("declared int has a name").to_string();
                let u = self.g.declare_int(&name, lo, hi);
                self.ints.insert(var, u);
                return;
            }
            Atom::DeclArray { array, size, elems } => {
                let name = self.f.name_of(array).expect("declared array has a name").to_string();
                let u = self.g.declare_array(&name, size, elems);
                self.arrays.insert(array, u);
                return;
            }
            Atom::DeclUniform { ref name, array } => {
                let TermKind::Uniform { elem, size } = *self.f.terms.kind(array) else {
                    unreachable!("uniform declaration of a non-uniform term")
                };
                let e = self.int(elem);
                let u = self.g.declare_uniform(name, e, size);
                self.arrays.insert(array, u);
                return;
            }
            Atom::DeclMap { map, keys, values } => {
                let name = self.f.name_of(map).expect("declared map has a name").to_string();
                let n = keys.1 as u32 + 1;
                let (en, kn) = map_array_names(self.f, &name);
                let e = self.g.declare_array(&en, ArraySize::Fixed(n), Some(values));
                let k = self.g.declare_array(&kn, ArraySize::Fixed(n), Some((0, 1)));
                self.maps.insert(map, (e, k));
                self.key_range.insert(map, keys);
                return;
            }
            Atom::Eq(a, b) | Atom::Diff(a, b) => {
                let (x, y) = (self.int(a), self.int(b));
                if matches!(atom, Atom::Eq(..)) {
                    Atom::Eq(x, y)
                } else {
                    Atom::Diff(x, y)
                }
            }
            Atom::ArrayEq(a, b) => Atom::ArrayEq(self.array(a), self.array(b)),
            Atom::ArrayDiff(a, b) => Atom::ArrayDiff(self.array(a), self.array(b)),
            Atom::LinearLeq { ref coeffs, bound } => Atom::LinearLeq {
                coeffs: coeffs.iter().map(|&(c, t)| (c, self.int(t))).collect(),
                bound,
            },
            Atom::Mul { x, y, z } => Atom::Mul {
                x: self.int(x),
                y: self.int(y),
                z: self.int(z),
            },
            Atom::Keys { map, key, present } => {
                let (_, k) = self.map(map);
                let j = self.key(map, key);
                let flag = self.g.terms.select(k, j);
                let v = self.g.terms.constant(present as i64);
                Atom::Eq(flag, v)
            }
            Atom::DiffArray {
                a,
                b,
                witness,
                lhs,
                rhs,
            } => Atom::DiffArray {
                a: self.array(a),
                b: self.array(b),
                witness: self.int(witness),
                lhs: self.int(lhs),
                rhs: self.int(rhs),
            },
        };
        self.g.push(out);
        for side in std::mem::take(&mut self.side) {
            self.g.push(side);
        }
    }
}

/// Names of the value and key-flag arrays standing for map `name`.
pub fn map_array_names(f: &Formula, name: &str) -> (String, String) {
    (f.fresh_name(&format!("{name}#E")), f.fresh_name(&format!("{name}#K")))
}

/// Rewrites every map operation into operations over two arrays per map.
/// Keys outside the declared key range make the formula false. A formula
/// without maps comes back unchanged.
pub fn encode_maps(f: &Formula) -> Formula {
    if f.declared_maps().next().is_none() {
        return f.clone();
    }
    let mut enc = Encoder {
        f,
        g: Formula::new(),
        ints: HashMap::new(),
        arrays: HashMap::new(),
        maps: HashMap::new(),
        key_range: HashMap::new(),
        side: Vec::new(),
    };
    enc.g.set_default_elems(f.default_elems());
    for atom in f.atoms() {
        enc.atom(atom);
    }
    enc.g
}
