use std::fmt;
use std::ops::{Index, IndexMut};

use super::Interval;

/// An interval vector (axis-aligned box).
#[derive(Clone, PartialEq)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        IntervalBox(components)
    }

    pub fn from_points(x: &[f64]) -> Self {
        IntervalBox(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        IntervalBox(vec![Interval::ZERO; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Interval> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    /// Largest component width.
    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn mag(&self) -> f64 {
        self.0.iter().map(Interval::mag).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.0.len() == x.len() && self.0.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.subset_of(b))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        self.zip_with(other, |a, b| a.hull(b))
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalBox)
    }

    /// Component-wise intersection, keeping `self`'s component where the two
    /// are disjoint.
    pub fn refine(&self, other: &IntervalBox) -> IntervalBox {
        self.zip_with(other, |a, b| a.refine(b))
    }

    pub fn add(&self, other: &IntervalBox) -> IntervalBox {
        self.zip_with(other, |a, b| *a + *b)
    }

    pub fn sub(&self, other: &IntervalBox) -> IntervalBox {
        self.zip_with(other, |a, b| *a - *b)
    }

    pub fn sub_point(&self, x: &[f64]) -> IntervalBox {
        IntervalBox(self.0.iter().zip(x).map(|(a, &b)| *a - b).collect())
    }

    pub fn scale(&self, s: Interval) -> IntervalBox {
        IntervalBox(self.0.iter().map(|a| *a * s).collect())
    }

    pub fn dot(&self, other: &IntervalBox) -> Interval {
        self.0.iter().zip(&other.0).map(|(a, b)| *a * *b).sum()
    }

    fn zip_with(
        &self,
        other: &IntervalBox,
        f: impl Fn(&Interval, &Interval) -> Interval,
    ) -> IntervalBox {
        debug_assert_eq!(self.dim(), other.dim());
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalBox {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalBox(iter.into_iter().collect())
    }
}
