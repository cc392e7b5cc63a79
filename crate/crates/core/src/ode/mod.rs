//! Validated integration of `x' = f(x)` by interval Taylor series.
//!
//! Each step computes
//!
//! 1. an a-priori enclosure `Y` of the flow over `[0, h]` (first-order
//!    Picard iteration), jointly for the state and its Jacobian;
//! 2. the Taylor coefficients of the flow of the center `x̃` up to order `k`,
//!    with the Lagrange remainder evaluated over `Y`;
//! 3. the Jacobian `J(h)` of the flow over the whole initial set, from the
//!    variational equations `V' = Df(x)·V`.
//!
//! The image of `⟨A, u, x̃⟩` is then enclosed by `Φ(x̃, h) + (J(h)·A)·u` and
//! re-expressed as a parallelotope (Lohner's method).

use thiserror::Error;

use crate::expr::taylor::Tape;
use crate::expr::{ExprError, MeanValueForm, VectorField};
use crate::interval::{round, IMatrix, Interval, IntervalBox, Parallelotope, Shape};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size fell below {h_min:e} at t = {t}")]
    StepTooSmall { t: f64, h_min: f64 },
    #[error("no a-priori enclosure over a step of {h:e} at t = {t}")]
    AprioriFailed { t: f64, h: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    /// Taylor order `k`.
    pub order: usize,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Local truncation target, relative to the state magnitude.
    pub tol_step: f64,
    pub max_inflate: usize,
    /// `Shape::Box` propagates plain boxes.
    pub shape: Shape,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            order: 10,
            h0: 0.05,
            h_min: 1e-12,
            h_max: 1.0,
            tol_step: 1e-10,
            max_inflate: 20,
            shape: Shape::Qr,
        }
    }
}

impl IntegratorOptions {
    pub fn box_mode() -> Self {
        IntegratorOptions {
            shape: Shape::Box,
            ..Default::default()
        }
    }
}

/// One validated step from `t_start` to `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: Parallelotope,
    /// Taylor coefficients of the flow of `x_start.center`, orders `0..=k`.
    pub coeffs: Vec<IntervalBox>,
    /// Order `k+1` coefficient over `apriori`.
    pub remainder: IntervalBox,
    /// Taylor coefficients of the flow Jacobian over the initial box.
    pub jac_coeffs: Vec<IMatrix>,
    pub jac_remainder: IMatrix,
    /// Encloses every state reached from `x_start` during the step.
    pub apriori: IntervalBox,
    /// Encloses every flow Jacobian during the step.
    pub apriori_jac: IMatrix,
    /// Encloses the linear part `J·A·u` of the affine form over the step.
    pub linear_hull: IntervalBox,
    pub x_end: Parallelotope,
    /// The parallelotope could not be re-conditioned and fell back to a box.
    pub degraded: bool,
}

/// The affine form `center + m·u` of the flow at some time.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineState {
    pub center: IntervalBox,
    pub m: IMatrix,
    pub u: IntervalBox,
    /// Box hull of the set, already intersected with the a-priori enclosure.
    pub hull: IntervalBox,
}

impl AffineState {
    /// Mean-value evaluation of a scalar function over the set.
    pub fn eval(&self, g: &MeanValueForm) -> Result<Interval, ExprError> {
        g.eval_affine(&self.center, &self.m, &self.u, &self.hull)
    }
}

fn horner_box(coeffs: &[IntervalBox], rem: &IntervalBox, d: Interval) -> IntervalBox {
    let mut acc = rem.clone();
    for c in coeffs.iter().rev() {
        for i in 0..acc.dim() {
            acc[i] = acc[i] * d + c[i];
        }
    }
    acc
}

fn horner_mat(coeffs: &[IMatrix], rem: &IMatrix, d: Interval) -> IMatrix {
    let mut acc = rem.clone();
    let (r, k) = (acc.nrows(), acc.ncols());
    for c in coeffs.iter().rev() {
        for i in 0..r {
            for j in 0..k {
                acc[(i, j)] = acc[(i, j)] * d + c[(i, j)];
            }
        }
    }
    acc
}

impl FlowSegment {
    /// Elapsed-time interval of the whole step.
    pub fn duration(&self) -> Interval {
        Interval::point(self.t_end) - Interval::point(self.t_start)
    }

    /// Offset `t - t_start` clipped to the step.
    fn offset(&self, t: Interval) -> Interval {
        let d = t - Interval::point(self.t_start);
        let full = Interval::span(0.0, self.duration().hi());
        d.intersect(&full).unwrap_or(full)
    }

    /// Flow of the initial set at times `t ⊆ [t_start, t_end]` in affine form.
    pub fn affine_at(&self, t: Interval) -> AffineState {
        let d = self.offset(t);
        let center = horner_box(&self.coeffs, &self.remainder, d);
        let jac = horner_mat(&self.jac_coeffs, &self.jac_remainder, d);
        let m = jac.mul_f(&self.x_start.a);
        let linear = m.mul_vec(&self.x_start.u);
        let hull = center.add(&linear).refine(&self.apriori);
        AffineState {
            center,
            m,
            u: self.x_start.u.clone(),
            hull,
        }
    }

    /// Flow of the center `x̃` alone at times `t`.
    pub fn center_at(&self, t: Interval) -> IntervalBox {
        horner_box(&self.coeffs, &self.remainder, self.offset(t))
    }

    /// The same step cut off at `t_end ≤ self.t_end`.
    pub fn truncated(&self, t_end: f64, shape: Shape) -> FlowSegment {
        let end = self.affine_at(Interval::point(t_end));
        let (x_end, degraded) = Parallelotope::recondition(&end.center, &end.m, &end.u, shape);
        FlowSegment {
            t_end,
            x_end,
            degraded,
            ..self.clone()
        }
    }

    /// Cheaper, looser box than [`Self::eval_flow_at`]: the linear part is
    /// bounded over the whole step.
    pub fn quick_flow_at(&self, t: Interval) -> IntervalBox {
        let center = horner_box(&self.coeffs, &self.remainder, self.offset(t));
        center.add(&self.linear_hull).refine(&self.apriori)
    }

    /// Box enclosing every state of the flow at times in `t`.
    pub fn eval_flow_at(&self, t: Interval) -> IntervalBox {
        self.affine_at(t).hull
    }

    /// Encloses the flow Jacobian (w.r.t. the initial state) at times `t`.
    pub fn jacobian_at(&self, t: Interval) -> IMatrix {
        let d = self.offset(t);
        horner_mat(&self.jac_coeffs, &self.jac_remainder, d).refine(&self.apriori_jac)
    }
}

/// A vector field compiled for integration.
#[derive(Debug, Clone)]
pub struct Integrator {
    field: VectorField,
    tape: Tape,
    aug_tape: Tape,
    pub opts: IntegratorOptions,
}

impl Integrator {
    pub fn new(field: &VectorField, opts: IntegratorOptions) -> Result<Self, ExprError> {
        let n = field.dim();
        let aug = field.augmented();
        Ok(Integrator {
            field: field.clone(),
            tape: Tape::compile(field.components(), n)?,
            aug_tape: Tape::compile(aug.components(), n + n * n)?,
            opts,
        })
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Step size from the last two Taylor coefficients of the center flow.
    fn suggest_h(&self, coeffs: &[Vec<Interval>], scale: f64) -> f64 {
        let k = self.opts.order;
        let tol = self.opts.tol_step * scale.max(1.0);
        let mut h = self.opts.h_max;
        for i in [k - 1, k] {
            if i == 0 {
                continue;
            }
            let norm = coeffs.iter().map(|c| c[i].mag()).fold(0.0, f64::max);
            if norm > 0.0 {
                h = h.min((tol / norm).powf(1.0 / i as f64));
            }
        }
        h.max(self.opts.h_min)
    }

    /// Advances `p` from `t_start` by at most `h_hint`, never past `t_limit`.
    /// Returns the segment and a step size suggestion for the next step.
    pub fn step(
        &self,
        p: &Parallelotope,
        t_start: f64,
        h_hint: f64,
        t_limit: f64,
    ) -> Result<(FlowSegment, f64), OdeError> {
        let (point_series, aug0) = self.prepare(p)?;
        let suggested = self.suggest_h(&point_series, p.to_box().mag());
        let mut h = suggested.min(h_hint).min(self.opts.h_max);

        loop {
            let (t_end, last) = if t_start + h >= t_limit {
                (t_limit, true)
            } else {
                (t_start + h, false)
            };
            let span = (Interval::point(t_end) - Interval::point(t_start)).hi();
            if span < self.opts.h_min && !last {
                return Err(OdeError::StepTooSmall {
                    t: t_start,
                    h_min: self.opts.h_min,
                });
            }
            let y = match apriori_tape(&self.aug_tape, &aug0, span, self.opts.max_inflate) {
                Ok(y) => y,
                Err(ExprOrFail::Fail) => {
                    if last && span < self.opts.h_min {
                        return Err(OdeError::StepTooSmall {
                            t: t_start,
                            h_min: self.opts.h_min,
                        });
                    }
                    h = span / 2.0;
                    continue;
                }
                Err(ExprOrFail::Expr(e)) => return Err(e.into()),
            };
            let seg = self.build_segment(p, t_start, t_end, &point_series, &aug0, y)?;
            let next = (4.0 * h).min(suggested.max(h));
            return Ok((seg, next));
        }
    }

    /// One step over exactly `[t_start, t_end]`, without step-size control.
    pub fn step_to(&self, p: &Parallelotope, t_start: f64, t_end: f64) -> Result<FlowSegment, OdeError> {
        let (point_series, aug0) = self.prepare(p)?;
        let span = (Interval::point(t_end) - Interval::point(t_start)).hi();
        match apriori_tape(&self.aug_tape, &aug0, span, self.opts.max_inflate) {
            Ok(y) => self.build_segment(p, t_start, t_end, &point_series, &aug0, y),
            Err(ExprOrFail::Fail) => Err(OdeError::AprioriFailed { t: t_start, h: span }),
            Err(ExprOrFail::Expr(e)) => Err(e.into()),
        }
    }

    /// Center series and the augmented initial value `(box, I)`.
    fn prepare(&self, p: &Parallelotope) -> Result<(Vec<Vec<Interval>>, IntervalBox), OdeError> {
        let n = self.dim();
        let center = IntervalBox::from_points(&p.center);
        let point_series = self.tape.ode_series(center.components(), self.opts.order)?;
        let mut aug0: Vec<Interval> = p.to_box().components().to_vec();
        aug0.extend_from_slice(IMatrix::identity(n).as_slice());
        Ok((point_series, IntervalBox::new(aug0)))
    }

    fn build_segment(
        &self,
        p: &Parallelotope,
        t_start: f64,
        t_end: f64,
        point_series: &[Vec<Interval>],
        aug0: &IntervalBox,
        y_aug: IntervalBox,
    ) -> Result<FlowSegment, OdeError> {
        let n = self.dim();
        let k = self.opts.order;
        let transpose = |series: &[Vec<Interval>], order: usize| -> IntervalBox {
            series.iter().map(|s| s[order]).collect()
        };
        let coeffs: Vec<IntervalBox> = (0..=k).map(|i| transpose(point_series, i)).collect();

        let apriori = IntervalBox::new(y_aug.components()[..n].to_vec());
        let apriori_jac = IMatrix::from_rows(n, n, y_aug.components()[n..].to_vec());
        let rem_series = self.tape.ode_series(apriori.components(), k + 1)?;
        let remainder = transpose(&rem_series, k + 1);

        let box_series = self.aug_tape.ode_series(aug0.components(), k)?;
        let aug_rem_series = self.aug_tape.ode_series(y_aug.components(), k + 1)?;
        let jac_of = |series: &[Vec<Interval>], i: usize| {
            IMatrix::from_rows(n, n, series[n..].iter().map(|s| s[i]).collect())
        };
        let jac_coeffs: Vec<IMatrix> = (0..=k).map(|i| jac_of(&box_series, i)).collect();
        let jac_remainder = jac_of(&aug_rem_series, k + 1);

        let mut seg = FlowSegment {
            t_start,
            t_end,
            x_start: p.clone(),
            coeffs,
            remainder,
            jac_coeffs,
            jac_remainder,
            apriori,
            apriori_jac,
            linear_hull: IntervalBox::zeros(p.dim()),
            x_end: p.clone(),
            degraded: false,
        };
        seg.linear_hull = seg.jacobian_at(Interval::span(t_start, t_end)).mul_f(&p.a).mul_vec(&p.u);
        let end = seg.affine_at(Interval::point(t_end));
        let (x_end, degraded) = Parallelotope::recondition(&end.center, &end.m, &end.u, self.opts.shape);
        seg.x_end = x_end;
        seg.degraded = degraded;
        Ok(seg)
    }

    /// Integrates from `p0` at `t0` until `t0 + duration`.
    pub fn flow(&self, p0: &Parallelotope, t0: f64, duration: f64) -> Result<Vec<FlowSegment>, OdeError> {
        let t_limit = t0 + duration;
        let mut segs = Vec::new();
        let mut p = p0.clone();
        let mut t = t0;
        let mut h = self.opts.h0;
        while t < t_limit {
            let (seg, next) = self.step(&p, t, h, t_limit)?;
            t = seg.t_end;
            p = seg.x_end.clone();
            h = next;
            segs.push(seg);
        }
        Ok(segs)
    }
}

enum ExprOrFail {
    Fail,
    Expr(ExprError),
}

/// Picard iteration: finds `Y` with `x0 + [0, h]·f(Y) ⊆ Y`.
/// Only the increment `[0, h]·f` is inflated, so wide `x0` components do not
/// feed their own width back through the field.
fn apriori_tape(tape: &Tape, x0: &IntervalBox, h: f64, max_inflate: usize) -> Result<IntervalBox, ExprOrFail> {
    let hspan = Interval::span(0.0, h);
    let f0 = tape.eval(x0.components()).map_err(ExprOrFail::Expr)?;
    let mut d = inflate(&IntervalBox::new(f0).scale(hspan));
    for _ in 0..max_inflate {
        let y = x0.add(&d);
        let fy = match tape.eval(y.components()) {
            Ok(v) => IntervalBox::new(v),
            Err(_) => return Err(ExprOrFail::Fail),
        };
        let z = x0.add(&fy.scale(hspan));
        if z.subset_of(&y) {
            return Ok(z);
        }
        d = inflate(&d.hull(&fy.scale(hspan)));
    }
    Err(ExprOrFail::Fail)
}

fn inflate(b: &IntervalBox) -> IntervalBox {
    b.iter()
        .map(|c| {
            let eps = round::add_up(0.05 * c.width(), 1e-15 * c.mag().max(1e-3));
            c.inflate(eps)
        })
        .collect()
}

/// A-priori enclosure of the flow of `field` from `x0` over `[0, h]`.
/// The step is halved until the Picard check succeeds; the accepted step
/// is returned with the enclosure.
pub fn apriori_enclosure(
    field: &VectorField,
    x0: &IntervalBox,
    h: f64,
    opts: &IntegratorOptions,
) -> Result<(IntervalBox, f64), OdeError> {
    let tape = Tape::compile(field.components(), field.dim())?;
    let mut h = h;
    while h >= opts.h_min {
        match apriori_tape(&tape, x0, h, opts.max_inflate) {
            Ok(y) => return Ok((y, h)),
            Err(ExprOrFail::Expr(e)) => return Err(e.into()),
            Err(ExprOrFail::Fail) => h /= 2.0,
        }
    }
    Err(OdeError::StepTooSmall {
        t: 0.0,
        h_min: opts.h_min,
    })
}

/// Enclosures of the Taylor coefficients `x⁽ⁱ⁾(0)/i!` for `i ≤ order`.
pub fn taylor_coefficients(
    field: &VectorField,
    x0: &IntervalBox,
    order: usize,
) -> Result<Vec<IntervalBox>, ExprError> {
    let tape = Tape::compile(field.components(), field.dim())?;
    let series = tape.ode_series(x0.components(), order)?;
    Ok((0..=order)
        .map(|i| series.iter().map(|s| s[i]).collect())
        .collect())
}
