use ivsim::interval::Parallelotope;
use ivsim::{Interval, IntervalBox};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

/// An interval with bounds in `[-r, r]`.
fn interval(r: f64) -> impl Strategy<Value = Interval> {
    (-r..r, -r..r).prop_map(|(a, b)| iv(a.min(b), a.max(b)))
}

/// `(inner, outer)` with `inner ⊆ outer`.
fn nested(r: f64) -> impl Strategy<Value = (Interval, Interval)> {
    (interval(r), 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(outer, s, t)| {
        let (s, t) = (s.min(t), s.max(t));
        let at = |f: f64| (outer.lo() + f * (outer.hi() - outer.lo())).clamp(outer.lo(), outer.hi());
        (iv(at(s), at(t)), outer)
    })
}

fn point_in(x: Interval, f: f64) -> f64 {
    (x.lo() + f * (x.hi() - x.lo())).clamp(x.lo(), x.hi())
}

fn binary(op: usize, a: Interval, b: Interval) -> Option<Interval> {
    match op {
        0 => Some(a + b),
        1 => Some(a - b),
        2 => Some(a * b),
        _ => a.checked_div(&b).ok(),
    }
}

fn binary_f(op: usize, a: f64, b: f64) -> f64 {
    match op {
        0 => a + b,
        1 => a - b,
        2 => a * b,
        _ => a / b,
    }
}

fn unary(op: usize, a: Interval) -> Option<Interval> {
    match op {
        0 => Some(a.sqr()),
        1 => Some(a.exp()),
        2 => Some(a.sin()),
        3 => Some(a.cos()),
        4 => a.sqrt().ok(),
        _ => a.ln().ok(),
    }
}

fn unary_f(op: usize, a: f64) -> f64 {
    match op {
        0 => a * a,
        1 => a.exp(),
        2 => a.sin(),
        3 => a.cos(),
        4 => a.sqrt(),
        _ => a.ln(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn binary_ops_are_inclusion_isotone(op in 0..4usize, (a, a2) in nested(50.0), (b, b2) in nested(50.0)) {
        if let Some(wide) = binary(op, a2, b2) {
            let narrow = binary(op, a, b).expect("the narrower divisor excludes zero too");
            prop_assert!(narrow.subset_of(&wide), "{narrow:?} ⊄ {wide:?}");
        }
    }

    #[test]
    fn unary_ops_are_inclusion_isotone(op in 0..6usize, (a, a2) in nested(20.0)) {
        if let Some(wide) = unary(op, a2) {
            let narrow = unary(op, a).expect("the narrower argument is in the domain too");
            prop_assert!(narrow.subset_of(&wide), "{narrow:?} ⊄ {wide:?}");
        }
    }

    #[test]
    fn binary_ops_contain_point_results(op in 0..4usize, a in interval(50.0), b in interval(50.0), s in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        // nearest rounding of the exact result cannot leave float bounds that enclose it
        let (x, y) = (point_in(a, s), point_in(b, t));
        if let Some(r) = binary(op, a, b) {
            let v = binary_f(op, x, y);
            prop_assert!(r.contains(v), "{x} op{op} {y} = {v} not in {r:?}");
        }
    }

    #[test]
    fn unary_ops_contain_point_results(op in 0..6usize, a in interval(20.0), s in 0.0..=1.0f64) {
        let x = point_in(a, s);
        if let Some(r) = unary(op, a) {
            let v = unary_f(op, x);
            prop_assert!(r.contains(v), "op{op}({x}) = {v} not in {r:?}");
        }
    }

    #[test]
    fn parallelotope_membership_agrees_with_a_linear_solve(
        theta in 0.0..std::f64::consts::TAU,
        scale in (0.2..5.0f64, 0.2..5.0f64),
        shear in -2.0..2.0f64,
        radii in (0.01..2.0f64, 0.01..2.0f64),
        center in (-10.0..10.0f64, -10.0..10.0f64),
        probe in (-1.5..1.5f64, -1.5..1.5f64),
    ) {
        let (c, s) = (theta.cos(), theta.sin());
        let a = DMatrix::from_row_slice(2, 2, &[c * scale.0, -s * scale.1 + shear, s * scale.0, c * scale.1]);
        prop_assume!(a.determinant().abs() > 1e-3);
        let p = Parallelotope {
            a: a.clone(),
            u: IntervalBox::new(vec![Interval::symmetric(radii.0), Interval::symmetric(radii.1)]),
            center: vec![center.0, center.1],
        };
        let x = [center.0 + probe.0 * 3.0, center.1 + probe.1 * 3.0];
        let d = DVector::from_vec(vec![x[0] - center.0, x[1] - center.1]);
        let u = a.lu().solve(&d).unwrap();
        let slack = [(u[0].abs() - radii.0).abs(), (u[1].abs() - radii.1).abs()];
        // points within rounding distance of a face may go either way
        prop_assume!(slack.iter().all(|s| *s > 1e-9));
        let inside = u[0].abs() < radii.0 && u[1].abs() < radii.1;
        match p.contains_point(&x) {
            Some(got) => prop_assert_eq!(got, inside),
            None => prop_assert!(false, "undecided at {x:?} with slack {slack:?}"),
        }
        if inside {
            prop_assert!(p.to_box().contains(&x));
        }
    }
}
