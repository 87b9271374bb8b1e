use std::fmt;

/// A finite set of integers kept as sorted, disjoint, non-adjacent closed
/// intervals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Domain {
    ivs: Vec<(i64, i64)>,
}

impl Domain {
    pub fn empty() -> Self {
        Domain { ivs: Vec::new() }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        if lo > hi {
            return Self::empty();
        }
        Domain { ivs: vec![(lo, hi)] }
    }

    pub fn singleton(v: i64) -> Self {
        Self::range(v, v)
    }

    pub fn from_values(values: impl IntoIterator<Item = i64>) -> Self {
        let mut v: Vec<i64> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let mut ivs: Vec<(i64, i64)> = Vec::new();
        for x in v {
            match ivs.last_mut() {
                Some(last) if last.1 + 1 == x => last.1 = x,
                _ => ivs.push((x, x)),
            }
        }
        Domain { ivs }
    }

    fn from_intervals(mut ivs: Vec<(i64, i64)>) -> Self {
        ivs.retain(|&(a, b)| a <= b);
        ivs.sort_unstable();
        let mut out: Vec<(i64, i64)> = Vec::with_capacity(ivs.len());
        for (a, b) in ivs {
            match out.last_mut() {
                Some(last) if a <= last.1.saturating_add(1) => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Domain { ivs: out }
    }

    pub fn intervals(&self) -> &[(i64, i64)] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn min(&self) -> i64 {
        self.ivs[0].0
    }

    pub fn max(&self) -> i64 {
        self.ivs[self.ivs.len() - 1].1
    }

    pub fn size(&self) -> u64 {
        self.ivs.iter().map(|&(a, b)| (b - a) as u64 + 1).sum()
    }

    pub fn value(&self) -> Option<i64> {
        match self.ivs.as_slice() {
            [(a, b)] if a == b => Some(*a),
            _ => None,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.value().is_some()
    }

    pub fn contains(&self, v: i64) -> bool {
        match self.ivs.binary_search_by(|&(a, _)| a.cmp(&v)) {
            Ok(_) => true,
            Err(0) => false,
            Err(k) => self.ivs[k - 1].1 >= v,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.ivs.iter().flat_map(|&(a, b)| a..=b)
    }

    pub fn intersect(&self, other: &Domain) -> Domain {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ivs.len() && j < other.ivs.len() {
            let (a1, b1) = self.ivs[i];
            let (a2, b2) = other.ivs[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Domain { ivs: out }
    }

    pub fn union(&self, other: &Domain) -> Domain {
        let mut ivs = self.ivs.clone();
        ivs.extend_from_slice(&other.ivs);
        Self::from_intervals(ivs)
    }

    pub fn is_disjoint(&self, other: &Domain) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.ivs.len() && j < other.ivs.len() {
            let (a1, b1) = self.ivs[i];
            let (a2, b2) = other.ivs[j];
            if a1.max(a2) <= b1.min(b2) {
                return false;
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Domain) -> bool {
        self.intersect(other) == *self
    }

    pub fn without(&self, v: i64) -> Domain {
        if !self.contains(v) {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.ivs.len() + 1);
        for &(a, b) in &self.ivs {
            if v < a || v > b {
                out.push((a, b));
            } else {
                if a < v {
                    out.push((a, v - 1));
                }
                if v < b {
                    out.push((v + 1, b));
                }
            }
        }
        Domain { ivs: out }
    }

    /// Values of `self` not in `other`.
    pub fn minus(&self, other: &Domain) -> Domain {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a, b) in &self.ivs {
            let mut lo = a;
            while j < other.ivs.len() && other.ivs[j].1 < lo {
                j += 1;
            }
            let mut k = j;
            while lo <= b {
                if k >= other.ivs.len() || other.ivs[k].0 > b {
                    out.push((lo, b));
                    break;
                }
                let (c, d) = other.ivs[k];
                if c > lo {
                    out.push((lo, c - 1));
                }
                if d >= b {
                    break;
                }
                lo = d + 1;
                k += 1;
            }
        }
        Domain { ivs: out }
    }

    pub fn clamp(&self, lo: i64, hi: i64) -> Domain {
        self.intersect(&Domain::range(lo, hi))
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ivs
            .iter()
            .map(|&(a, b)| if a == b { a.to_string() } else { format!("{a}..{b}") })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
