//! Parallelotopes `⟨A, u, x̃⟩ = { x̃ + A·v | v ∈ u }`.

use nalgebra::DMatrix;
use thiserror::Error;

use super::matrix::f_mul_vec;
use super::{round, IMatrix, Interval, IntervalBox};

/// Condition number beyond which a matrix is treated as singular.
pub const COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("matrix is singular or too ill-conditioned (estimated condition {cond:e})")]
pub struct DegenerateMatrix {
    pub cond: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parallelotope {
    pub a: DMatrix<f64>,
    pub u: IntervalBox,
    pub center: Vec<f64>,
}

/// How a new parallelotope's matrix is chosen after a linear map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Orthogonalised image of the old matrix (QR re-conditioning).
    Qr,
    /// Identity matrix: plain boxes.
    Box,
}

impl Parallelotope {
    /// Parallelotope denoting exactly the box `b`.
    pub fn from_box(b: &IntervalBox) -> Self {
        let center = b.mid();
        let u = b.sub_point(&center);
        Parallelotope {
            a: DMatrix::identity(b.dim(), b.dim()),
            u,
            center,
        }
    }

    pub fn from_point(x: &[f64]) -> Self {
        Parallelotope::from_box(&IntervalBox::from_points(x))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Outward-rounded bounding box `x̃ + A·u`.
    pub fn to_box(&self) -> IntervalBox {
        IntervalBox::from_points(&self.center).add(&f_mul_vec(&self.a, &self.u))
    }

    /// Membership test: `Some(true)` if `x` is provably inside, `Some(false)`
    /// if provably outside, `None` when rounding makes it undecidable.
    pub fn contains_point(&self, x: &[f64]) -> Option<bool> {
        let inv = verified_inverse(&self.a).ok()?;
        let d = IntervalBox::from_points(x).sub_point(&self.center);
        let v = inv.mul_vec(&d);
        if v.subset_of(&self.u) {
            Some(true)
        } else if v
            .iter()
            .zip(self.u.iter())
            .any(|(vi, ui)| vi.intersect(ui).is_none())
        {
            Some(false)
        } else {
            None
        }
    }

    /// Checks that the center lies in the set, i.e. `0 ∈ u`.
    pub fn is_centered(&self) -> bool {
        self.u.iter().all(Interval::contains_zero)
    }

    /// Re-expresses the set `center_enc + m·u` as a parallelotope.
    ///
    /// `center_enc` encloses the image of the old center and `m` the linear
    /// part applied to the old `u`. The product `B·m` is formed before it
    /// touches `u`, so the wrapping happens once per call.
    pub fn recondition(
        center_enc: &IntervalBox,
        m: &IMatrix,
        u: &IntervalBox,
        shape: Shape,
    ) -> (Parallelotope, bool) {
        let n = center_enc.dim();
        let center = center_enc.mid();
        let offset = center_enc.sub_point(&center);
        if shape == Shape::Qr {
            let a = orthonormal_basis(&m.mid(), u);
            if let Ok(b) = verified_inverse(&a) {
                let bm = b.mul(m);
                let new_u = bm.mul_vec(u).add(&b.mul_vec(&offset));
                return (Parallelotope { a, u: new_u, center }, false);
            }
        }
        let new_u = m.mul_vec(u).add(&offset);
        let degraded = shape == Shape::Qr;
        (
            Parallelotope {
                a: DMatrix::identity(n, n),
                u: new_u,
                center,
            },
            degraded,
        )
    }

    /// Re-expresses `center_enc + m·u` over the prescribed matrix `a`.
    pub fn with_matrix(
        center_enc: &IntervalBox,
        m: &IMatrix,
        u: &IntervalBox,
        a: DMatrix<f64>,
    ) -> Result<Parallelotope, DegenerateMatrix> {
        let center = center_enc.mid();
        let offset = center_enc.sub_point(&center);
        let b = verified_inverse(&a)?;
        let new_u = b.mul(m).mul_vec(u).add(&b.mul_vec(&offset));
        Ok(Parallelotope { a, u: new_u, center })
    }

    /// Same set with an identity matrix.
    pub fn boxed(&self) -> Parallelotope {
        Parallelotope::from_box(&self.to_box())
    }
}

/// Orthonormal basis from the QR factorization of `m`, with columns sorted
/// by how much they stretch `u` so the dominant direction is kept exactly.
fn orthonormal_basis(m: &DMatrix<f64>, u: &IntervalBox) -> DMatrix<f64> {
    let n = m.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    let weight = |j: usize| m.column(j).norm() * u[j].width().max(f64::MIN_POSITIVE);
    order.sort_by(|&i, &j| weight(j).total_cmp(&weight(i)));
    let permuted = DMatrix::from_fn(n, n, |i, j| m[(i, order[j])]);
    let q = permuted.qr().q();
    // guard against a degenerate factorization producing NaNs
    if q.iter().all(|v| v.is_finite()) {
        q
    } else {
        DMatrix::identity(n, n)
    }
}

/// Interval matrix enclosing the exact inverse of `a`.
///
/// A floating-point inverse `B₀` is refined into `B₀ ± r` with
/// `r = ‖E‖/(1-‖E‖)·‖B₀‖`, `E = I - B₀A` evaluated in interval arithmetic.
pub fn verified_inverse(a: &DMatrix<f64>) -> Result<IMatrix, DegenerateMatrix> {
    let n = a.nrows();
    let b0 = a
        .clone()
        .try_inverse()
        .ok_or(DegenerateMatrix { cond: f64::INFINITY })?;
    let norm = |m: &DMatrix<f64>| {
        (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let cond = norm(a) * norm(&b0);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(DegenerateMatrix { cond });
    }
    let ib0 = IMatrix::from_f64(&b0);
    let e = IMatrix::identity(n).add(&ib0.mul_f(a).scale(-Interval::ONE));
    let e_norm = e.norm_inf();
    if e_norm >= 0.5 {
        return Err(DegenerateMatrix { cond });
    }
    let r = round::mul_up(
        round::div_up(e_norm, round::sub_down(1.0, e_norm)),
        ib0.norm_inf(),
    );
    let mut out = ib0;
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = out[(i, j)].inflate(r);
        }
    }
    Ok(out)
}
