//! Discrete transitions: the reset map and the composite flow–jump–flow map
//!
//! `ω(x, t) = φ₂(δ(φ₁(x, τ(x))), t − τ(x))`
//!
//! evaluated at the synchronization time `t = hi(τ)` as one mean-value form
//! over the incoming parallelotope, so a jump costs a single re-conditioning.

use thiserror::Error;

use crate::expr::{Expr, ExprError, VectorField};
use crate::interval::{IMatrix, Interval, IntervalBox, Parallelotope, Shape};
use crate::model::Transition;
use crate::ode::{FlowSegment, Integrator, OdeError};

use super::event::GuardPlan;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JumpError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("guard slope {0:?} contains zero on the crossing states")]
    Tangential(Interval),
}

/// A reset map with its symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct ResetPlan {
    pub exprs: Vec<Expr>,
    /// Row `i` holds `∂δᵢ/∂xⱼ`.
    pub jac: Vec<Vec<Expr>>,
}

impl ResetPlan {
    pub fn new(tr: &Transition) -> Self {
        let n = tr.reset.len();
        ResetPlan {
            exprs: tr.reset.clone(),
            jac: tr.reset.iter().map(|e| e.gradient(n)).collect(),
        }
    }

    pub fn eval_box(&self, b: &IntervalBox) -> Result<IntervalBox, ExprError> {
        self.exprs.iter().map(|e| e.eval_box(b)).collect()
    }

    pub fn jacobian(&self, b: &IntervalBox) -> Result<IMatrix, ExprError> {
        let n = self.exprs.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &self.jac {
            for e in row {
                data.push(e.eval_box(b)?);
            }
        }
        Ok(IMatrix::from_rows(n, n, data))
    }
}

/// Mean-value image of `p` under a reset: the new matrix is the midpoint of
/// `Dδ·A`, and everything else is absorbed into `u`.
pub fn apply_jump(reset: &ResetPlan, p: &Parallelotope) -> Result<Parallelotope, ExprError> {
    let center = reset.eval_box(&IntervalBox::from_points(&p.center))?;
    let m = reset.jacobian(&p.to_box())?.mul_f(&p.a);
    match Parallelotope::with_matrix(&center, &m, &p.u, m.mid()) {
        Ok(q) => Ok(q),
        // singular resets (e.g. constant assignments) fall back to QR
        Err(_) => Ok(Parallelotope::recondition(&center, &m, &p.u, Shape::Qr).0),
    }
}

/// Everything a jump produces.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpImage {
    /// Encloses `φ₁(x, τ(x))` for every incoming `x`.
    pub state_at_tau: Parallelotope,
    /// Encloses `ω(x, hi(τ))`: the initial set of the next run.
    pub post_jump: Parallelotope,
    /// Pre-jump states over `τ`.
    pub pre_hull: IntervalBox,
    /// Post-jump states between each `τ(x)` and `hi(τ)`.
    pub post_hull: IntervalBox,
}

pub struct JumpContext<'a> {
    /// Pre-jump flow step, ending at `hi(τ)`.
    pub seg: &'a FlowSegment,
    pub field: &'a VectorField,
    pub guard: &'a GuardPlan,
    pub reset: &'a ResetPlan,
    pub post: &'a Integrator,
    pub tau: Interval,
}

fn residual(tau: Interval) -> f64 {
    (Interval::point(tau.hi()) - Interval::point(tau.lo())).hi()
}

/// Post-jump flow from `z` over residual times `r ⊆ [0, r_max]`.
fn flow_residual(post: &Integrator, z: &IntervalBox, r_max: f64) -> Result<Option<FlowSegment>, OdeError> {
    if r_max <= 0.0 {
        return Ok(None);
    }
    post.step_to(&Parallelotope::from_box(z), 0.0, r_max).map(Some)
}

/// Naive baseline: every stage is hulled into a box.
pub fn box_jump(cx: &JumpContext) -> Result<JumpImage, JumpError> {
    let y = cx.seg.eval_flow_at(cx.tau);
    let z = cx.reset.eval_box(&y)?;
    let r = residual(cx.tau);
    let w = match flow_residual(cx.post, &z, r)? {
        Some(s) => s.eval_flow_at(Interval::span(0.0, r)),
        None => z,
    };
    Ok(JumpImage {
        state_at_tau: Parallelotope::from_box(&y),
        post_jump: Parallelotope::from_box(&w),
        pre_hull: y,
        post_hull: w,
    })
}

/// Crossing time of the center trajectory alone, narrowed inside `tau`.
fn center_tau(cx: &JumpContext) -> Interval {
    let value = |t: Interval| cx.guard.g.eval_box(&cx.seg.center_at(t)).unwrap_or(Interval::ENTIRE);
    let slope = |t: Interval| cx.guard.lie.eval_box(&cx.seg.center_at(t)).unwrap_or(Interval::ENTIRE);
    let mut t = cx.tau;
    for _ in 0..50 {
        let d = slope(t);
        let m = Interval::point(t.mid());
        let Ok(q) = value(m).checked_div(&d) else { break };
        match t.intersect(&(m - q)) {
            Some(next) if next != t => t = next,
            _ => break,
        }
    }
    t
}

/// Parallelotope extension of `ω` at `hi(τ)`.
///
/// With `M₁ = Dφ₁·A` over the incoming set and `y = φ₁(x, τ(x))`:
///
/// - `∇τ = −(∇g(y)ᵀ·M₁) / (∇g·f₁)(y)` by implicit differentiation;
/// - `Dy = M₁ + f₁(y)·∇τ`;
/// - `Dw = Dφ₂·Dδ(y)·Dy − f₂(w)·∇τ`, evaluated in the equivalent form
///   `Dφ₂·Dδ·M₁ + (Dφ₂·Dδ·f₁ − f₂)·∇τ`.
///
/// All factors are interval matrices over the whole set, multiplied before
/// they meet `u`, and the center is carried separately through its own
/// crossing time.
pub fn composite_jump(cx: &JumpContext, shape: Shape) -> Result<JumpImage, JumpError> {
    let aff = cx.seg.affine_at(cx.tau);
    let y = aff.hull.clone();
    let f1 = cx.field.eval_box(&y)?;
    let grad_g = cx.guard.g.gradient_at(&y)?;
    let dot: Interval = grad_g.iter().zip(f1.iter()).map(|(a, b)| *a * *b).sum();
    let denom = aff.eval(&cx.guard.lie)?.refine(&dot);
    if denom.contains_zero() {
        return Err(JumpError::Tangential(denom));
    }
    let gm = aff.m.left_mul_vec(&grad_g);
    let grad_tau = gm
        .iter()
        .map(|v| (-*v).checked_div(&denom))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ExprError::from)?;
    let dy = aff.m.add(&IMatrix::outer(f1.components(), &grad_tau));

    let z = cx.reset.eval_box(&y)?;
    let dd = cx.reset.jacobian(&y)?;
    let r = residual(cx.tau);
    let (jac2, w) = match flow_residual(cx.post, &z, r)? {
        Some(s) => {
            let span = Interval::span(0.0, r);
            (s.jacobian_at(span), s.eval_flow_at(span))
        }
        None => (IMatrix::identity(z.dim()), z.clone()),
    };
    let f2 = cx.post.field().eval_box(&w)?;
    // saltation form: Dw = Dφ₂·Dδ·M₁ + (Dφ₂·Dδ·f₁ − f₂)·∇τ keeps components
    // on which the jump does not act free of the wide ∇τ factor
    let jd = jac2.mul(&dd);
    let q = jd.mul_vec(&f1).sub(&f2);
    let dw = jd.mul(&aff.m).add(&IMatrix::outer(q.components(), &grad_tau));

    let tau_c = center_tau(cx);
    let y_c = cx.seg.center_at(tau_c).refine(&y);
    let z_c = cx.reset.eval_box(&y_c)?.refine(&z);
    let r_c = (Interval::point(cx.tau.hi()) - tau_c).refine(&Interval::span(0.0, r));
    let w_c = match flow_residual(cx.post, &z_c, r_c.hi())? {
        Some(s) => s.eval_flow_at(r_c).refine(&w),
        None => z_c,
    };

    let u = &cx.seg.x_start.u;
    let (state_at_tau, _) = Parallelotope::recondition(&y_c, &dy, u, shape);
    let (post_jump, _) = Parallelotope::recondition(&w_c, &dw, u, shape);
    Ok(JumpImage {
        state_at_tau,
        post_jump,
        pre_hull: y,
        post_hull: w,
    })
}
