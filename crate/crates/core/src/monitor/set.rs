//! Finite unions of half-open time intervals `[lo, hi)`.

use crate::interval::round;

/// Sorted, disjoint, non-touching, non-empty half-open intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSet(Vec<(f64, f64)>);

impl TimeSet {
    pub fn empty() -> Self {
        TimeSet(Vec::new())
    }

    /// `[lo, hi)`, empty unless `lo < hi`.
    pub fn span(lo: f64, hi: f64) -> Self {
        Self::from_intervals([(lo, hi)])
    }

    pub fn from_intervals(items: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut v: Vec<(f64, f64)> = items.into_iter().filter(|&(a, b)| a < b).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        TimeSet(out)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        let i = self.0.partition_point(|&(_, b)| b <= t);
        self.0.get(i).is_some_and(|&(a, _)| a <= t)
    }

    pub fn union(&self, other: &TimeSet) -> TimeSet {
        TimeSet::from_intervals(self.0.iter().chain(&other.0).copied())
    }

    pub fn intersect(&self, other: &TimeSet) -> TimeSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = self.0[i];
            let (c, d) = other.0[j];
            let (lo, hi) = (a.max(c), b.min(d));
            if lo < hi {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        TimeSet(out)
    }

    /// Complement within `[lo, hi)`.
    pub fn complement(&self, lo: f64, hi: f64) -> TimeSet {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.0 {
            if a > cursor {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
        }
        out.push((cursor, hi));
        TimeSet::from_intervals(out)
    }

    pub fn clip(&self, lo: f64, hi: f64) -> TimeSet {
        self.intersect(&TimeSet::span(lo, hi))
    }

    /// The times `t` with some `t' ∈ [t + a, t + b]` in a component `J` of
    /// `psi` and `[t, t']` inside one component of `phi`. `outer` rounds the
    /// shifted endpoints outward, otherwise inward.
    pub fn until(phi: &TimeSet, psi: &TimeSet, a: f64, b: f64, outer: bool) -> TimeSet {
        let mut out = Vec::new();
        for &(i0, i1) in &phi.0 {
            let first = psi.0.partition_point(|&(_, q)| q <= i0);
            for &(j0, j1) in psi.0[first..].iter().take_while(|&&(p, _)| p < i1) {
                let (p, q) = (i0.max(j0), i1.min(j1));
                if p >= q {
                    continue;
                }
                let (lo, hi) = if outer {
                    (round::sub_down(p, b), round::sub_up(q, a))
                } else {
                    (round::sub_up(p, b), round::sub_down(q, a))
                };
                out.push((lo.max(i0), hi.min(i1)));
            }
        }
        TimeSet::from_intervals(out)
    }
}
