mod common;

use std::f64::consts::PI;

use common::{load, reference, BbSin};
use ivsim::monitor::{
    atomic_robustness, atomic_signal, combine, evaluate, formula_signal, robustness, until_timed, Connective,
    Monotone, RobustnessError, Signal, Span, Truth, UnknownReason, Verdict,
};
use ivsim::simulate::{simulate, Limits, SimOptions, Trajectory};
use ivsim::stl::TimeBound;
use ivsim::{parse_model, parse_property, Interval, Model, StlFormula};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn run(m: &Model, t: f64) -> Trajectory {
    let limits = Limits {
        max_jumps: 100_000,
        max_time: t,
    };
    simulate(m, &limits, &SimOptions::default())
}

fn prop(m: &Model, text: &str) -> StlFormula {
    parse_property(text, &m.variables).unwrap()
}

fn constant() -> Model {
    parse_model("var x\ninit Still, 1\nat Still wait 0\nend\n", 0).unwrap()
}

fn clock() -> Model {
    parse_model("var t\ninit Tick, 0\nat Tick wait 1\nend\n", 0).unwrap()
}

fn bb_sin(x0: f64) -> Model {
    load("bb-sin", 0).with_initial(1, Interval::point(2.0 + x0))
}

#[test]
fn constant_atom_never_holds() {
    let m = constant();
    let t = run(&m, 10.0);
    let s = atomic_signal(&t, &parse_property("(x - 2)", &m.variables).map(atom).unwrap());
    assert!(s.spans().is_empty());
    assert_eq!(evaluate(&t, &prop(&m, "F[0,5] (x - 2)")), Verdict::Unsat);
}

fn atom(f: StlFormula) -> ivsim::Expr {
    match f {
        StlFormula::Atom(e) => e,
        other => panic!("not an atom: {other:?}"),
    }
}

#[test]
fn clock_atom_switches_once() {
    let m = clock();
    let t = run(&m, 10.0);
    let s = atomic_signal(&t, &atom(prop(&m, "(t - 3)")));
    let spans = s.spans();
    assert_eq!(spans.len(), 1);
    assert!(spans[0].onset.contains(3.0) && spans[0].onset.width() <= 1e-9);
    assert_eq!(spans[0].offset, Interval::point(10.0));
    assert_eq!(evaluate(&t, &prop(&m, "F[0,5] (t - 3)")), Verdict::Valid);
}

#[test]
fn rotation_atom_brackets_the_arcsine_crossings() {
    let m = load("rotation", 0);
    let t = run(&m, 2.0 * PI);
    let s = atomic_signal(&t, &atom(prop(&m, "(x2 - 0.5)")));
    let spans = s.spans();
    assert_eq!(spans.len(), 1, "{spans:?}");
    // two ulps cover the error of the rounded π and of one division
    let bracket = |x: f64| iv(x.next_down().next_down(), x.next_up().next_up());
    let (up, down) = (bracket(PI / 6.0), bracket(5.0 * PI / 6.0));
    let Span { onset, offset } = spans[0];
    assert!(onset.lo() <= up.lo() && up.hi() <= onset.hi(), "{onset:?}");
    assert!(offset.lo() <= down.lo() && down.hi() <= offset.hi(), "{offset:?}");
    assert!(onset.width() <= 1e-8 && offset.width() <= 1e-8);
}

#[test]
fn bounce_makes_a_boundary_at_the_jump() {
    // v + 0.5 turns positive only through the jump
    let m = load("flat-ball", 0);
    let t = run(&m, 2.0);
    let tau = t.events[0].tau;
    let s = atomic_signal(&t, &atom(prop(&m, "(v + 0.5)")));
    let spans = s.spans();
    assert_eq!(spans.len(), 2, "{spans:?}");
    assert_eq!(spans[0].onset, Interval::point(0.0));
    assert!(spans[0].offset.contains(0.5) && spans[0].offset.width() <= 1e-9);
    let jump = spans[1].onset;
    assert!(jump.lo() <= tau.lo() && tau.hi() <= jump.hi() && jump.width() <= 1e-9);
    assert_eq!(s.truth_at(tau.hi() + 0.1), Truth::True);
    assert_eq!(s.truth_at(tau.lo() - 0.1), Truth::False);
}

#[test]
fn double_negation_is_identity() {
    let s = Signal::from_spans(10.0, &[Span { onset: iv(1.0, 1.5), offset: iv(4.0, 4.25) }]);
    assert_eq!(s.not().not(), s);
    assert_eq!(combine(Connective::And, &[&s, &Signal::constant(10.0, Truth::True)]), s);
}

#[test]
fn eventually_back_shifts_a_sharp_interval() {
    let all = Signal::constant(10.0, Truth::True);
    let s = Signal::from_spans(10.0, &[Span { onset: Interval::point(3.0), offset: Interval::point(4.0) }]);
    let f = until_timed(&all, &s, TimeBound { lo: 0.0, hi: 5.0 });
    // windows reaching past the horizon see an unknown future
    assert_eq!(
        f.pieces(),
        vec![(0.0, 4.0, Truth::True), (4.0, 5.0, Truth::False), (5.0, 10.0, Truth::Unknown)]
    );
}

#[test]
fn false_left_side_blocks_delayed_until() {
    let never = Signal::constant(10.0, Truth::False);
    let always = Signal::constant(10.0, Truth::True);
    let u = until_timed(&never, &always, TimeBound { lo: 1.0, hi: 2.0 });
    assert_eq!(u.pieces(), vec![(0.0, 10.0, Truth::False)]);
}

#[test]
fn short_trajectory_cannot_decide_a_long_window() {
    let m = clock();
    let t = run(&m, 8.0);
    let v = evaluate(&t, &prop(&m, "G[0,5] F[0,5] (t - 3)"));
    assert_eq!(v, Verdict::Unknown(UnknownReason::HorizonTooShort));
    assert_eq!(v.to_string(), "unknown(horizon-too-short)");
}

#[test]
fn grazing_atom_at_time_zero_is_unknown() {
    let m = clock();
    let t = run(&m, 10.0);
    assert_eq!(evaluate(&t, &prop(&m, "(t)")), Verdict::Unknown(UnknownReason::BoundaryAtZero));
}

#[test]
fn failed_verification_is_reported() {
    // x' = x² blows up at t = 1
    let m = parse_model("var x\ninit Up, 1\nat Up wait x^2\nend\n", 0).unwrap();
    let t = run(&m, 3.0);
    assert!(!t.status.is_completed());
    let v = evaluate(&t, &prop(&m, "G[0,2] (x)"));
    assert_eq!(v, Verdict::Unknown(UnknownReason::VerificationFailed));
}

/// Boolean monitor of `G[0,g] F[0,f] p` on a sampled trace.
fn grid_g_f(samples: &[(f64, bool)], g: f64, f: f64) -> bool {
    let mut next_true = vec![f64::INFINITY; samples.len() + 1];
    for i in (0..samples.len()).rev() {
        next_true[i] = if samples[i].1 { samples[i].0 } else { next_true[i + 1] };
    }
    samples.iter().enumerate().filter(|(_, s)| s.0 <= g).all(|(i, s)| next_true[i] <= s.0 + f)
}

#[test]
fn bb_sin_verdicts_agree_with_a_sampled_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut conclusive = 0;
    for _ in 0..30 {
        let x0: f64 = rng.random_range(0.0..5.0);
        let m = bb_sin(x0);
        let t = run(&m, 15.0);
        let phi = m.property.clone().unwrap();
        let v = evaluate(&t, &phi);
        assert_eq!(evaluate(&t, &StlFormula::not(phi)), v.flip());
        if !v.is_conclusive() {
            continue;
        }
        conclusive += 1;
        let r = reference(&BbSin, 0, &[0.0, 2.0 + x0, 0.0], 1e-4, 15.0, 10_000, 1);
        let samples: Vec<(f64, bool)> = r.samples.iter().map(|(t, _, x)| (*t, x[1] - 2.0 > 0.0)).collect();
        assert_eq!(grid_g_f(&samples, 10.0, 5.0), v == Verdict::Valid, "x0 = {x0}: {v}");
    }
    assert!(conclusive >= 10, "{conclusive} conclusive");
}

#[test]
fn rotation_robustness_contains_the_sampled_reference() {
    let m = load("rotation", 0);
    let h = 4.0 * PI;
    let t = run(&m, h);
    let phi = m.property.clone().unwrap();
    let r = robustness(&t, &phi).unwrap();
    let n = 1000;
    let grid: Vec<f64> = (0..=20 * n).map(|i| h * i as f64 / (20 * n) as f64).collect();
    for k in 0..n {
        let tk = h * k as f64 / n as f64;
        let want = grid.iter().filter(|&&s| s >= tk).map(|s| s.sin() - 0.5).fold(f64::NEG_INFINITY, f64::max);
        let got = r.value_at(tk).unwrap();
        // the sampled maximum undershoots the true one by at most the grid gap
        assert!(got.lo() - 1e-9 <= want && want <= got.hi() + 1e-6, "t = {tk}: {want} outside {got:?}");
    }
    // plateau at 0.5 until the last peak, then descent
    assert!(r.value_at(0.0).unwrap().lo() > 0.49);
    assert!(r.value_at(h - 0.1).unwrap().hi() < 0.0);
    assert!(r.segments.iter().all(|s| s.monotone == Monotone::Dec));
    let at0 = r.value_at(0.0).unwrap();
    assert!(at0.lo() > 0.0);
    assert_eq!(evaluate(&t, &phi), Verdict::Valid);
}

#[test]
fn robustness_of_a_constant_atom_is_one_point_segment() {
    let m = constant();
    let t = run(&m, 10.0);
    let r = atomic_robustness(&t, &atom(prop(&m, "(x - 2)")));
    assert_eq!(r.segments.len(), 1);
    assert_eq!(r.segments[0].value, Interval::point(-1.0));
    assert_eq!(r.segments[0].time, iv(0.0, 10.0));
}

#[test]
fn always_is_dual_to_eventually() {
    let m = load("rotation", 0);
    let t = run(&m, 4.0 * PI);
    let g = robustness(&t, &prop(&m, "G (x1 - 0.2)")).unwrap();
    let f = robustness(&t, &prop(&m, "F (0.2 - x1)")).unwrap();
    assert_eq!(g.segments.len(), f.segments.len());
    for (a, b) in g.segments.iter().zip(&f.segments) {
        assert_eq!(a.time, b.time);
        assert_eq!(a.value, -b.value);
    }
}

#[test]
fn timed_robustness_is_refused() {
    let m = clock();
    let t = run(&m, 10.0);
    assert_eq!(
        robustness(&t, &prop(&m, "F[0,5] (t - 3)")),
        Err(RobustnessError::UnsupportedTimedRobustness)
    );
}

#[test]
fn robustness_sign_matches_the_verdict() {
    let m = load("rotation", 0);
    let t = run(&m, 4.0 * PI);
    for text in ["F (x2 - 0.5)", "G (x1 + 1.5)", "G (x2 - 0.5)", "(x1 - 0.5) U (x2 - 0.9)", "F (x1 - 2) || G (x2 + 2)"] {
        let phi = prop(&m, text);
        let v = evaluate(&t, &phi);
        let r = robustness(&t, &phi).unwrap().value_at(0.0).unwrap();
        if r.lo() > 0.0 {
            assert_eq!(v, Verdict::Valid, "{text}");
        }
        if r.hi() < 0.0 {
            assert_eq!(v, Verdict::Unsat, "{text}");
        }
        assert!(r.lo() > 0.0 || r.hi() < 0.0, "{text}: {r:?}");
    }
}

// ---- grid oracles over random piecewise signals ----

const H: f64 = 10.0;

fn truth_of(pieces: &[(f64, f64, Truth)], t: f64) -> Truth {
    pieces.iter().find(|p| p.0 <= t && t < p.1).map_or(Truth::False, |p| p.2)
}

/// Three-valued `phi U[a,b] psi` at `t` by exhaustive candidate witnesses:
/// piecewise-constant signals only change at breakpoints, so the earliest
/// witness in each piece of the window suffices.
fn oracle_until(phi: &[(f64, f64, Truth)], psi: &[(f64, f64, Truth)], bound: Option<(f64, f64)>, t: f64) -> Truth {
    let (a, b) = bound.unwrap_or((0.0, f64::INFINITY));
    let timed = bound.is_some();
    let at = |p: &[(f64, f64, Truth)], s: f64| if s >= H { Truth::Unknown } else { truth_of(p, s) };
    let cuts: Vec<f64> = phi.iter().chain(psi).flat_map(|p| [p.0, p.1]).chain([H]).collect();
    let mut cands: Vec<f64> = cuts.iter().copied().filter(|&c| c >= t + a && c <= t + b).collect();
    cands.push(t + a);
    let mut out = Truth::False;
    for w in cands {
        if w > t + b || (!timed && w >= H) {
            continue;
        }
        let mut hold = at(phi, t);
        for &c in cuts.iter().filter(|&&c| c > t && c <= w) {
            hold = hold.and(at(phi, c));
        }
        hold = hold.and(at(phi, w));
        out = out.or(hold.and(at(psi, w)));
    }
    out
}

fn pieces_strategy() -> impl Strategy<Value = Vec<(f64, f64, Truth)>> {
    prop::collection::vec((0.0..H, 0u8..3), 1..10).prop_map(|mut cuts| {
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        let mut lo = 0.0;
        for (c, v) in cuts.iter().chain(&[(H, 0)]) {
            let v = [Truth::True, Truth::False, Truth::Unknown][*v as usize];
            if *c > lo {
                out.push((lo, *c, v));
                lo = *c;
            }
        }
        out
    })
}

fn sound(ours: Truth, oracle: Truth) -> bool {
    ours == Truth::Unknown || ours == oracle
}

fn grid() -> impl Iterator<Item = f64> {
    (0..10_000).map(|i| H * i as f64 / 10_000.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connectives_match_the_grid(p in pieces_strategy(), q in pieces_strategy()) {
        let (s, r) = (Signal::from_pieces(H, p.clone()), Signal::from_pieces(H, q.clone()));
        let (and, or, not) = (s.and(&r), s.or(&r), s.not());
        for t in grid() {
            let (a, b) = (truth_of(&p, t), truth_of(&q, t));
            prop_assert_eq!(and.truth_at(t), a.and(b));
            prop_assert_eq!(or.truth_at(t), a.or(b));
            prop_assert_eq!(not.truth_at(t), a.not());
        }
    }

    #[test]
    fn until_never_contradicts_the_grid(
        p in pieces_strategy(),
        q in pieces_strategy(),
        a in 0.0..3.0f64,
        len in 0.0..4.0f64,
        timed in any::<bool>(),
    ) {
        let bound = timed.then_some((a, a + len));
        let s = Signal::from_pieces(H, p.clone())
            .until(&Signal::from_pieces(H, q.clone()), bound.map(|(lo, hi)| TimeBound { lo, hi }));
        for t in grid() {
            let ours = s.truth_at(t);
            let want = oracle_until(&p, &q, bound, t);
            prop_assert!(sound(ours, want), "t = {}: ours {:?}, oracle {:?}", t, ours, want);
        }
    }

    #[test]
    fn widening_boundaries_only_loses_verdicts(
        spans in prop::collection::vec((0.0..H, 0.0..0.5f64, 0.0..3.0f64, 0.0..0.5f64), 1..5),
        other in prop::collection::vec((0.0..H, 0.0..0.5f64, 0.0..3.0f64, 0.0..0.5f64), 1..5),
        delta in 0.0..0.5f64,
        t in 0.0..H,
    ) {
        let build = |raw: &[(f64, f64, f64, f64)], d: f64| {
            let spans: Vec<Span> = raw.iter().map(|&(on, w1, core, w2)| {
                let off = on + w1 + core;
                Span { onset: iv((on - d).max(0.0), on + w1 + d), offset: iv(off - d, off + w2 + d) }
            }).collect();
            Signal::from_spans(H, &spans)
        };
        let formulas = |s: &Signal, r: &Signal| {
            let top = Signal::constant(H, Truth::True);
            let f = |x: &Signal| top.until(x, Some(TimeBound { lo: 0.0, hi: 1.5 }));
            let g = |x: &Signal| top.until(&x.not(), Some(TimeBound { lo: 0.0, hi: 2.0 })).not();
            vec![
                g(&f(s)),
                s.until(r, Some(TimeBound { lo: 0.5, hi: 3.0 })).and(&r.not()),
                s.not().until(r, None).or(&g(r)),
            ]
        };
        let sharp = formulas(&build(&spans, 0.0), &build(&other, 0.0));
        let wide = formulas(&build(&spans, delta), &build(&other, delta));
        for (x, y) in sharp.iter().zip(&wide) {
            let (a, b) = (x.truth_at(t), y.truth_at(t));
            prop_assert!(b == Truth::Unknown || a == b, "{:?} widened to {:?}", a, b);
        }
    }
}

#[test]
fn negation_flips_verdicts_on_random_bounces() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let m = bb_sin(rng.random_range(0.0..5.0));
        let t = run(&m, 12.0);
        for text in ["G[0,5] F[0,3] (x - 2)", "F[0,4] (vx) && G[0,2] (x - 1)", "(x - 1.5) U[0,6] (vx - 0.5)"] {
            let phi = prop(&m, text);
            assert_eq!(evaluate(&t, &StlFormula::not(phi.clone())), evaluate(&t, &phi).flip(), "{text}");
        }
    }
}

#[test]
fn formula_signal_of_the_spec_property_is_defined_on_the_horizon() {
    let m = bb_sin(1.0);
    let t = run(&m, 15.0);
    let s = formula_signal(&t, m.property.as_ref().unwrap());
    assert_eq!(s.horizon(), t.horizon);
    let covered: f64 = s.pieces().iter().map(|p| p.1 - p.0).sum();
    assert!((covered - t.horizon).abs() < 1e-9);
}
