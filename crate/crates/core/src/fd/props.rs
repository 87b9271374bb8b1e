//! Propagators over fixed-size arrays and integers.

use super::domain::Domain;
use super::store::{ArrayId, Fail, Propagator, Store, VarId};

fn fixed(s: &Store, vs: &[VarId]) -> Option<Vec<i64>> {
    vs.iter().map(|&v| s.value(v)).collect()
}

#[derive(Debug)]
pub struct Eq(pub VarId, pub VarId);

impl Propagator for Eq {
    fn name(&self) -> &'static str {
        "eq"
    }
    fn vars(&self, _: &Store) -> Vec<VarId> {
        vec![self.0, self.1]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        s.unify(self.0, self.1)
    }
    fn check(&self, s: &Store) -> Option<bool> {
        Some(s.value(self.0)? == s.value(self.1)?)
    }
}

#[derive(Debug)]
pub struct Diff(pub VarId, pub VarId);

impl Propagator for Diff {
    fn name(&self) -> &'static str {
        "diff"
    }
    fn vars(&self, _: &Store) -> Vec<VarId> {
        vec![self.0, self.1]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        if self.0 == self.1 {
            return Err(Fail);
        }
        if let Some(v) = s.value(self.0) {
            s.remove(self.1, v)?;
        }
        if let Some(v) = s.value(self.1) {
            s.remove(self.0, v)?;
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        Some(s.value(self.0)? != s.value(self.1)?)
    }
}

/// Filtering strength of [`AllDiff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AllDiffStrength {
    /// Value elimination plus the pigeonhole test on the union of domains.
    #[default]
    Basic,
    /// Additionally fails when no matching covers every variable.
    Matching,
}

#[derive(Debug)]
pub struct AllDiff {
    pub vars: Vec<VarId>,
    pub strength: AllDiffStrength,
}

impl AllDiff {
    fn has_matching(&self, s: &Store) -> bool {
        // Augmenting paths over variable -> value edges.
        let mut owner: std::collections::HashMap<i64, usize> = Default::default();
        fn augment(
            s: &Store,
            vars: &[VarId],
            x: usize,
            seen: &mut std::collections::HashSet<i64>,
            owner: &mut std::collections::HashMap<i64, usize>,
        ) -> bool {
            for v in s.dom(vars[x]).iter() {
                if !seen.insert(v) {
                    continue;
                }
                let free = match owner.get(&v) {
                    None => true,
                    Some(&y) => augment(s, vars, y, seen, owner),
                };
                if free {
                    owner.insert(v, x);
                    return true;
                }
            }
            false
        }
        (0..self.vars.len()).all(|x| augment(s, &self.vars, x, &mut Default::default(), &mut owner))
    }
}

impl Propagator for AllDiff {
    fn name(&self) -> &'static str {
        "alldifferent"
    }
    fn vars(&self, _: &Store) -> Vec<VarId> {
        self.vars.clone()
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        for (k, &x) in self.vars.iter().enumerate() {
            if let Some(v) = s.value(x) {
                for (m, &y) in self.vars.iter().enumerate() {
                    if m != k {
                        if y == x {
                            return Err(Fail);
                        }
                        s.remove(y, v)?;
                    }
                }
            }
        }
        let union = self
            .vars
            .iter()
            .fold(Domain::empty(), |acc, &x| acc.union(s.dom(x)));
        if union.size() < self.vars.len() as u64 {
            return Err(Fail);
        }
        if self.strength == AllDiffStrength::Matching && !self.has_matching(s) {
            return Err(Fail);
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let mut vals = fixed(s, &self.vars)?;
        vals.sort_unstable();
        Some(vals.windows(2).all(|w| w[0] != w[1]))
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

fn clamp64(x: i128) -> i64 {
    x.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// `sum(c * x) <= bound`, bounds consistency.
#[derive(Debug)]
pub struct LinearLeq {
    terms: Vec<(i64, VarId)>,
    bound: i64,
}

impl LinearLeq {
    pub fn new(terms: &[(i64, VarId)], bound: i64) -> Self {
        let mut merged: Vec<(i64, VarId)> = Vec::new();
        for &(c, x) in terms {
            match merged.iter_mut().find(|(_, y)| *y == x) {
                Some(e) => e.0 += c,
                None => merged.push((c, x)),
            }
        }
        merged.retain(|&(c, _)| c != 0);
        LinearLeq { terms: merged, bound }
    }

    fn term_min(s: &Store, c: i64, x: VarId) -> i128 {
        let c = c as i128;
        if c > 0 {
            c * s.min(x) as i128
        } else {
            c * s.max(x) as i128
        }
    }
}

impl Propagator for LinearLeq {
    fn name(&self) -> &'static str {
        "linear-leq"
    }
    fn vars(&self, _: &Store) -> Vec<VarId> {
        self.terms.iter().map(|&(_, x)| x).collect()
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let total: i128 = self.terms.iter().map(|&(c, x)| Self::term_min(s, c, x)).sum();
        let slack = self.bound as i128 - total;
        if slack < 0 {
            return Err(Fail);
        }
        for &(c, x) in &self.terms {
            let rest = slack + Self::term_min(s, c, x);
            let c = c as i128;
            if c > 0 {
                s.set_bounds(x, i64::MIN, clamp64(div_floor(rest, c)))?;
            } else {
                s.set_bounds(x, clamp64(div_ceil(rest, c)), i64::MAX)?;
            }
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let mut sum: i128 = 0;
        for &(c, x) in &self.terms {
            sum += c as i128 * s.value(x)? as i128;
        }
        Some(sum <= self.bound as i128)
    }
}

/// `z = x * y`, interval reasoning.
#[derive(Debug)]
pub struct Mul {
    pub x: VarId,
    pub y: VarId,
    pub z: VarId,
}

impl Mul {
    /// Bounds of `num / den` over the boxes, valid when `den` excludes 0.
    fn quotient(s: &Store, num: VarId, den: VarId) -> Option<(i64, i64)> {
        let (dl, dh) = (s.min(den) as i128, s.max(den) as i128);
        if dl <= 0 && dh >= 0 {
            return None;
        }
        let (nl, nh) = (s.min(num) as i128, s.max(num) as i128);
        // ceil and floor are monotone, so they commute with min and max.
        let mut lo = i128::MAX;
        let mut hi = i128::MIN;
        for n in [nl, nh] {
            for d in [dl, dh] {
                lo = lo.min(div_ceil(n, d));
                hi = hi.max(div_floor(n, d));
            }
        }
        Some((clamp64(lo), clamp64(hi)))
    }
}

impl Propagator for Mul {
    fn name(&self) -> &'static str {
        "mul"
    }
    fn vars(&self, _: &Store) -> Vec<VarId> {
        vec![self.x, self.y, self.z]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let (xl, xh) = (s.min(self.x) as i128, s.max(self.x) as i128);
        let (yl, yh) = (s.min(self.y) as i128, s.max(self.y) as i128);
        let corners = [xl * yl, xl * yh, xh * yl, xh * yh];
        let lo = *corners.iter().min().unwrap();
        let hi = *corners.iter().max().unwrap();
        s.set_bounds(self.z, clamp64(lo), clamp64(hi))?;
        if let Some((lo, hi)) = Self::quotient(s, self.z, self.y) {
            s.set_bounds(self.x, lo, hi)?;
        }
        if let Some((lo, hi)) = Self::quotient(s, self.z, self.x) {
            s.set_bounds(self.y, lo, hi)?;
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let (x, y, z) = (s.value(self.x)?, s.value(self.y)?, s.value(self.z)?);
        Some(x as i128 * y as i128 == z as i128)
    }
}

/// `E = A[I]` on an array of known length: the element rules of the
/// standard `element` constraint.
pub fn access_closed(s: &mut Store, cells: &[VarId], i: VarId, e: VarId) -> Result<(), Fail> {
    s.set_bounds(i, 0, cells.len() as i64 - 1)?;
    if let Some(k) = s.value(i) {
        return s.unify(cells[k as usize], e);
    }
    let de = s.dom(e).clone();
    let mut union = Domain::empty();
    for k in s.dom(i).iter() {
        union = union.union(s.dom(cells[k as usize]));
        if de.is_subset(&union) {
            break;
        }
    }
    s.intersect(e, &union)?;
    let de = s.dom(e).clone();
    let keep: Vec<i64> = s
        .dom(i)
        .iter()
        .filter(|&k| !s.dom(cells[k as usize]).is_disjoint(&de))
        .collect();
    s.set_dom(i, Domain::from_values(keep))?;
    Ok(())
}

pub fn access_check(s: &Store, cells: &[VarId], i: VarId, e: VarId) -> Option<bool> {
    let k = s.value(i)?;
    let e = s.value(e)?;
    if k < 0 || k >= cells.len() as i64 {
        return Some(false);
    }
    Some(s.value(cells[k as usize])? == e)
}

#[derive(Debug)]
pub struct Access {
    pub array: ArrayId,
    pub index: VarId,
    pub elem: VarId,
}

impl Propagator for Access {
    fn name(&self) -> &'static str {
        "access"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.array);
        v.extend([self.index, self.elem]);
        v
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        match s.closed_cells(self.array) {
            Some(cells) => access_closed(s, &cells, self.index, self.elem),
            None => {
                // Read-only uniform array of unbounded length.
                let elem = s.array_vars(self.array)[0];
                s.set_bounds(self.index, 0, i64::MAX)?;
                s.unify(elem, self.elem)
            }
        }
    }
    fn check(&self, s: &Store) -> Option<bool> {
        match s.closed_cells(self.array) {
            Some(cells) => access_check(s, &cells, self.index, self.elem),
            None => {
                let elem = s.array_vars(self.array)[0];
                Some(s.value(self.index)? >= 0 && s.value(elem)? == s.value(self.elem)?)
            }
        }
    }
}

/// `B = store(A, I, E)` on arrays of the same known length.
pub fn update_closed(s: &mut Store, a: &[VarId], i: VarId, e: VarId, b: &[VarId]) -> Result<(), Fail> {
    let n = a.len();
    s.set_bounds(i, 0, n as i64 - 1)?;
    if let Some(k) = s.value(i) {
        let k = k as usize;
        s.unify(b[k], e)?;
        for m in (0..n).filter(|&m| m != k) {
            s.unify(b[m], a[m])?;
        }
        return Ok(());
    }
    let de = s.dom(e).clone();
    let mut union = Domain::empty();
    for k in s.dom(i).iter() {
        union = union.union(s.dom(b[k as usize]));
        if de.is_subset(&union) {
            break;
        }
    }
    s.intersect(e, &union)?;
    let de = s.dom(e).clone();
    let keep: Vec<i64> = s
        .dom(i)
        .iter()
        .filter(|&k| !s.dom(b[k as usize]).is_disjoint(&de))
        .collect();
    s.set_dom(i, Domain::from_values(keep))?;
    for k in 0..n {
        if !s.dom(i).contains(k as i64) {
            s.unify(b[k], a[k])?;
        }
    }
    let idx: Vec<i64> = s.dom(i).iter().collect();
    for &k in &idx {
        let k = k as usize;
        let allowed = s.dom(a[k]).union(s.dom(e));
        s.intersect(b[k], &allowed)?;
    }
    for &k in &idx {
        let k = k as usize;
        if s.dom(a[k]).is_disjoint(s.dom(b[k])) {
            s.assign(i, k as i64)?;
            break;
        }
    }
    Ok(())
}

pub fn update_check(s: &Store, a: &[VarId], i: VarId, e: VarId, b: &[VarId]) -> Option<bool> {
    let k = s.value(i)?;
    let e = s.value(e)?;
    let av = fixed(s, a)?;
    let bv = fixed(s, b)?;
    if k < 0 || k >= a.len() as i64 || a.len() != b.len() {
        return Some(false);
    }
    Some((0..a.len()).all(|m| if m == k as usize { bv[m] == e } else { bv[m] == av[m] }))
}

#[derive(Debug)]
pub struct Update {
    pub from: ArrayId,
    pub index: VarId,
    pub elem: VarId,
    pub to: ArrayId,
}

impl Propagator for Update {
    fn name(&self) -> &'static str {
        "update"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.from);
        v.extend(s.array_vars(self.to));
        v.extend([self.index, self.elem]);
        v
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let a = s.closed_cells(self.from).ok_or(Fail)?;
        let b = s.closed_cells(self.to).ok_or(Fail)?;
        update_closed(s, &a, self.index, self.elem, &b)
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let a = s.closed_cells(self.from)?;
        let b = s.closed_cells(self.to)?;
        update_check(s, &a, self.index, self.elem, &b)
    }
}

/// Index-wise equality of two arrays, including their sizes.
#[derive(Debug)]
pub struct ArrayEq(pub ArrayId, pub ArrayId);

impl Propagator for ArrayEq {
    fn name(&self) -> &'static str {
        "array-eq"
    }
    fn vars(&self, s: &Store) -> Vec<VarId> {
        let mut v = s.array_vars(self.0);
        v.extend(s.array_vars(self.1));
        v
    }
    fn arrays(&self) -> Vec<ArrayId> {
        vec![self.0, self.1]
    }
    fn propagate(&self, s: &mut Store) -> Result<(), Fail> {
        let (a, b) = (self.0, self.1);
        match (s.size_var(a), s.size_var(b)) {
            (Some(x), Some(y)) => s.unify(x, y)?,
            (Some(x), None) => {
                let n = s.max_len(b);
                s.assign(x, n)?;
            }
            (None, Some(y)) => {
                let n = s.max_len(a);
                s.assign(y, n)?;
            }
            (None, None) => {
                if s.max_len(a) != s.max_len(b) {
                    return Err(Fail);
                }
            }
        }
        let n = s.max_len(a).min(s.max_len(b));
        for k in 0..n {
            match (s.cell(a, k), s.cell(b, k)) {
                (Some(x), Some(y)) => s.unify(x, y)?,
                (Some(x), None) => s.merge(b, k, x)?,
                (None, Some(y)) => s.merge(a, k, y)?,
                (None, None) => {}
            }
        }
        Ok(())
    }
    fn check(&self, s: &Store) -> Option<bool> {
        let a = fixed(s, &s.closed_cells(self.0)?)?;
        let b = fixed(s, &s.closed_cells(self.1)?)?;
        Some(a == b)
    }
}
