use std::fmt;

use nalgebra::DMatrix;

use super::round;
use super::{Interval, IntervalBox};

/// Dense interval matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct IMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols);
        IMatrix { rows, cols, data }
    }

    pub fn from_f64(m: &DMatrix<f64>) -> Self {
        let mut out = IMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = Interval::point(m[(i, j)]);
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mid())
    }

    pub fn mul(&self, other: &IMatrix) -> IMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Interval::ZERO;
                for k in 0..self.cols {
                    acc = acc + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `self * m` for a floating-point `m`.
    pub fn mul_f(&self, m: &DMatrix<f64>) -> IMatrix {
        assert_eq!(self.cols, m.nrows());
        let mut out = IMatrix::zeros(self.rows, m.ncols());
        for i in 0..self.rows {
            for j in 0..m.ncols() {
                let mut acc = Interval::ZERO;
                for k in 0..self.cols {
                    acc = acc + self[(i, k)] * m[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &IntervalBox) -> IntervalBox {
        assert_eq!(self.cols, v.dim());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// Row vector times matrix: `vᵀ · self`.
    pub fn left_mul_vec(&self, v: &[Interval]) -> Vec<Interval> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| v[i] * self[(i, j)]).sum())
            .collect()
    }

    /// Outer product `col · rowᵀ`.
    pub fn outer(col: &[Interval], row: &[Interval]) -> IMatrix {
        let mut out = IMatrix::zeros(col.len(), row.len());
        for (i, c) in col.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                out[(i, j)] = *c * *r;
            }
        }
        out
    }

    pub fn add(&self, other: &IMatrix) -> IMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Interval) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| *a * s).collect(),
        }
    }

    /// Upper bound of the infinity norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(0.0, |acc, a| round::add_up(acc, a.mag())))
            .fold(0.0, f64::max)
    }

    pub fn hull(&self, other: &IMatrix) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.hull(b))
                .collect(),
        }
    }

    pub fn refine(&self, other: &IMatrix) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.refine(b))
                .collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for IMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Interval]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Float matrix `m` times interval vector.
pub fn f_mul_vec(m: &DMatrix<f64>, v: &IntervalBox) -> IntervalBox {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| v[j] * m[(i, j)]).sum())
        .collect()
}

/// Float matrix `m` times interval matrix.
pub fn f_mul(m: &DMatrix<f64>, b: &IMatrix) -> IMatrix {
    IMatrix::from_f64(m).mul(b)
}
