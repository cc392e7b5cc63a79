mod common;

use common::{flat_ball_bounce_times, load, near, reference, BbSin};
use ivsim::interval::Parallelotope;
use ivsim::simulate::{
    apply_jump, simulate, verification_certificate, FailureKind, Limits, ResetPlan, SimOptions, Status, Trajectory,
};
use ivsim::{parse_model, Interval, IntervalBox, Model};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn jumps(n: usize) -> Limits {
    Limits {
        max_jumps: n,
        max_time: 1e6,
    }
}

fn until(t: f64) -> Limits {
    Limits {
        max_jumps: 100_000,
        max_time: t,
    }
}

fn bb_sin(x0: Interval) -> Model {
    // x0 enters the initial state as x = 2 + x0
    load("bb-sin", 0).with_initial(1, Interval::point(2.0) + x0)
}

fn failure_kind(t: &Trajectory) -> Option<FailureKind> {
    match &t.status {
        Status::VerificationFailed(f) => Some(f.kind),
        _ => None,
    }
}

/// Every reference sample lies in the enclosure at its time; samples within
/// `eps` of a crossing time are skipped since the reference's own crossing
/// time is only accurate to about `eps`.
fn assert_contains_reference(traj: &Trajectory, samples: &[(f64, usize, Vec<f64>)], slack: f64, eps: f64) {
    let crossings: Vec<Interval> = traj.events.iter().map(|e| e.tau).collect();
    for (t, _, x) in samples.iter().filter(|s| s.0 <= traj.horizon) {
        if crossings.iter().any(|c| c.lo() - eps <= *t && *t <= c.hi() + eps) {
            continue;
        }
        let b = traj.enclosure_at(*t).unwrap_or_else(|| panic!("no enclosure at {t}"));
        assert!(near(&b, x, slack), "reference {x:?} at t = {t} outside {b:?}");
    }
}

#[test]
fn first_bounce_time_encloses_sqrt2() {
    let t = simulate(&load("flat-ball", 0), &jumps(1), &SimOptions::default());
    let tau = t.events[0].tau;
    assert!(tau.contains(std::f64::consts::SQRT_2), "{tau:?}");
    assert!(tau.width() <= 1e-9, "{tau:?}");
    assert!(t.events[0].verified);
}

#[test]
fn fifty_bounces_contain_closed_form_times() {
    let t = simulate(&load("flat-ball", 0), &jumps(50), &SimOptions::default());
    assert_eq!(t.jumps(), 50, "{}", t.status);
    let exact = flat_ball_bounce_times(50);
    for (k, (e, (lo, hi))) in t.events.iter().zip(&exact).enumerate() {
        assert!(e.tau.lo() <= *lo && *hi <= e.tau.hi(), "bounce {k}: {:?} vs [{lo}, {hi}]", e.tau);
        if k < 20 {
            assert!(e.tau.width() <= 1e-6, "bounce {k}: {:?}", e.tau);
        }
        assert!(e.post_jump.to_box().max_width() <= 1e-4, "bounce {k}");
    }
}

#[test]
fn clock_guard_fires_at_one() {
    let src = "var t, y\ninit A, 0, 0\nat A wait 1, 0\n    once (t - 1, true) goto B then t, y + 1\nend\nat B wait 1, 0\nend\n";
    let m = parse_model(src, 0).unwrap();
    let t = simulate(&m, &until(2.0), &SimOptions::default());
    assert!(t.status.is_completed());
    assert_eq!(t.events.len(), 1);
    let e = &t.events[0];
    assert!(e.tau.contains(1.0) && e.tau.width() <= 1e-12, "{:?}", e.tau);
    let post = e.post_jump.to_box();
    assert!(post[1].contains(1.0) && post[1].width() <= 1e-12, "{post:?}");
    assert!(post[0].contains(e.tau.hi()), "{post:?}");
    let end = t.enclosure_at(2.0).unwrap();
    assert!(end[0].contains(2.0) && end[1].contains(1.0), "{end:?}");
}

#[test]
fn unreachable_guard_runs_to_the_horizon() {
    let src = "var x, v\ninit Fall, 1, 0\nat Fall wait v, -1\n    once (x - 5, true) goto Fall then x, v\nend\n";
    let m = parse_model(src, 0).unwrap();
    let t = simulate(&m, &until(3.0), &SimOptions::default());
    assert!(t.status.is_completed(), "{}", t.status);
    assert!(t.events.is_empty());
    assert_eq!(t.horizon, 3.0);
}

#[test]
fn model_without_transitions_is_one_run() {
    let t = simulate(&load("rotation", 0), &until(10.0), &SimOptions::default());
    assert!(t.status.is_completed());
    assert_eq!(t.runs.len(), 1);
    assert!(t.events.is_empty());
    assert_eq!(t.horizon, 10.0);
    let end = t.enclosure_at(10.0).unwrap();
    assert!(end[0].contains(10f64.cos()) && end[1].contains(10f64.sin()), "{end:?}");
}

fn ball(c: &str) -> Model {
    let src = format!("var x, v\ninit Fall, 1, 0\nat Fall wait v, -1\n    once (x, -v) goto Fall then x, -{c}*v\nend\n");
    parse_model(&src, 0).unwrap()
}

fn reset_of(m: &Model) -> ResetPlan {
    ResetPlan::new(&m.locations[0].transitions[0])
}

#[test]
fn identity_reset_keeps_the_set() {
    let src = "var x, y\ninit A, 0, 0\nat A wait 1, 1\n    once (x - 1, true) goto A then x, y\nend\n";
    let m = parse_model(src, 0).unwrap();
    let p = Parallelotope::from_box(&IntervalBox::new(vec![iv(1.0, 2.0), iv(-1.0, 0.5)]));
    let q = apply_jump(&reset_of(&m), &p).unwrap();
    let (a, b) = (p.to_box(), q.to_box());
    for i in 0..2 {
        assert!(a[i].subset_of(&b[i]));
        assert!((b[i].width() - a[i].width()).abs() <= 1e-12, "{a:?} {b:?}");
    }
}

#[test]
fn elastic_reset_flips_the_impact_velocity() {
    let r2 = Interval::point(2.0).sqrt().unwrap();
    let p = Parallelotope::from_box(&IntervalBox::new(vec![Interval::point(0.0), -r2]));
    let q = apply_jump(&reset_of(&ball("1")), &p).unwrap().to_box();
    assert!(q[1].contains(std::f64::consts::SQRT_2) && q[1].width() <= 1e-15, "{q:?}");
}

#[test]
fn table_reset_matches_direct_evaluation() {
    let m = load("bb-sin", 0);
    let x = [1.25, 0.5, -0.75];
    let p = Parallelotope::from_box(&IntervalBox::from_points(&x));
    let q = apply_jump(&reset_of(&m), &p).unwrap().to_box();
    let direct = -0.9 * x[2] + 1.9 * x[0].cos();
    assert!(q[0].contains(x[0]) && q[1].contains(x[1]));
    assert!((q[2].mid() - direct).abs() <= 1e-14 && q[2].width() <= 1e-14, "{q:?} vs {direct}");
}

#[test]
fn elastic_bounce_composite_at_sync_time() {
    let t = simulate(&ball("1"), &jumps(1), &SimOptions::default());
    let e = &t.events[0];
    let post = e.post_jump.to_box();
    // at hi(tau) the ball has risen for hi(tau) − √2 at speed about √2
    let dt = e.tau.hi() - std::f64::consts::SQRT_2;
    let x = std::f64::consts::SQRT_2 * dt - dt * dt / 2.0;
    let v = std::f64::consts::SQRT_2 - dt;
    assert!(near(&post, &[x, v], 1e-15), "{post:?}");
    assert!(post.max_width() <= 1e-8, "{post:?}");
}

#[test]
fn identity_jump_agrees_with_plain_flow() {
    let switched = load("rotation-switch", 0);
    let plain = load("rotation", 0);
    let a = simulate(&switched, &until(10.0), &SimOptions::default());
    let b = simulate(&plain, &until(10.0), &SimOptions::default());
    assert!(a.status.is_completed(), "{}", a.status);
    assert_eq!(a.jumps(), 3);
    for e in &a.events {
        let s = e.tau.hi();
        assert!(near(&e.post_jump.to_box(), &[s.cos(), s.sin()], 0.0), "{:?}", e.post_jump.to_box());
    }
    for k in 0..=100 {
        let s = 0.1 * k as f64;
        let (x, y) = (a.enclosure_at(s).unwrap(), b.enclosure_at(s).unwrap());
        assert!(near(&x, &[s.cos(), s.sin()], 0.0) && near(&y, &[s.cos(), s.sin()], 0.0));
        assert!(x.max_width() <= 1e-8, "t = {s}: {x:?}");
    }
}

#[test]
fn flat_ball_contains_reference() {
    let m = load("flat-ball", 0);
    let t = simulate(&m, &jumps(30), &SimOptions::default());
    let r = reference(&m, 0, &[1.0, 0.0], 1e-3, t.horizon + 1e-6, 30, 7);
    assert_eq!(r.events.len(), 30);
    for (e, re) in t.events.iter().zip(&r.events) {
        assert!(e.tau.lo() - 1e-9 <= re.t && re.t <= e.tau.hi() + 1e-9, "{:?} vs {}", e.tau, re.t);
    }
    assert_contains_reference(&t, &r.samples, 1e-9, 1e-9);
}

#[test]
fn bb_sin_contains_reference_for_random_heights() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = SimOptions::default();
    for _ in 0..100 {
        let x0: f64 = rng.random_range(0.0..5.0);
        let t = simulate(&bb_sin(Interval::point(x0)), &until(40.0), &opts);
        let r = reference(&BbSin, 0, &[0.0, 2.0 + x0, 0.0], 1e-4, t.horizon, t.jumps() + 1, 50);
        for (e, re) in t.events.iter().zip(&r.events) {
            assert_eq!((e.from, e.to), (re.from, re.to), "x0 = {x0}");
            assert!(e.tau.lo() - 1e-9 <= re.t && re.t <= e.tau.hi() + 1e-9, "x0 = {x0}: {:?} vs {}", e.tau, re.t);
        }
        assert_contains_reference(&t, &r.samples, 1e-8, 1e-8);
    }
}

#[test]
fn interval_initial_set_contains_sampled_runs() {
    let x0 = iv(2.995, 3.005);
    let t = simulate(&bb_sin(x0), &until(40.0), &SimOptions::default());
    assert!(t.horizon > 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..50 {
        let s = match k {
            0 => x0.lo(),
            1 => x0.hi(),
            _ => rng.random_range(x0.lo()..x0.hi()),
        };
        let r = reference(&BbSin, 0, &[0.0, 2.0 + s, 0.0], 1e-4, t.horizon, t.jumps() + 1, 50);
        for (e, re) in t.events.iter().zip(&r.events) {
            assert!(e.tau.lo() - 1e-9 <= re.t && re.t <= e.tau.hi() + 1e-9, "{:?} vs {}", e.tau, re.t);
        }
        assert_contains_reference(&t, &r.samples, 1e-8, 1e-8);
    }
}

#[test]
fn same_inputs_same_trajectory() {
    let m = bb_sin(Interval::point(3.0));
    let a = simulate(&m, &jumps(20), &SimOptions::default());
    let b = simulate(&m, &jumps(20), &SimOptions::default());
    assert_eq!(a, b);
}

fn grazing() -> Model {
    // thrown up at unit speed, the ball peaks at exactly 1/2
    let src = "var x, v\ninit Up, 0, 1\nat Up wait v, -1\n    once (x - 0.5, true) goto Up then x, v\nend\n";
    parse_model(src, 0).unwrap()
}

#[test]
fn grazing_guard_is_never_decided() {
    let t = simulate(&grazing(), &until(3.0), &SimOptions::default());
    let kind = failure_kind(&t).unwrap_or_else(|| panic!("{}", t.status));
    assert!(matches!(kind, FailureKind::TangentialCrossing | FailureKind::UndecidedGuard), "{kind:?}");
    assert!(t.events.is_empty());
    assert!(t.horizon < 1.0);
    let cert = verification_certificate(&t);
    assert_eq!(cert.failure.map(|(i, f)| (i, f.kind)), Some((0, kind)));
    assert!(!cert.all_verified());
}

#[test]
fn certificate_of_a_verified_run() {
    let t = simulate(&load("flat-ball", 0), &jumps(10), &SimOptions::default());
    let cert = verification_certificate(&t);
    assert!(cert.all_verified());
    assert_eq!(cert.entries.len(), 10);
    assert!(cert.entries.iter().all(|e| e.verified && e.contraction <= 1.0 && !e.slope.contains_zero()));
    assert!(cert.entries.iter().all(|e| e.min_margin.is_some_and(|m| m > 0.0)));
    let text = cert.to_string();
    assert_eq!(text.matches("exists-unique verified").count(), 10);
}

#[test]
fn certificate_names_the_first_failing_event() {
    let t = simulate(&bb_sin(iv(2.995, 3.005)), &until(60.0), &SimOptions::default());
    let Status::VerificationFailed(f) = t.status else { panic!("{}", t.status) };
    let cert = verification_certificate(&t);
    assert_eq!(cert.failure, Some((t.events.len(), f)));
    assert!(cert.to_string().contains(f.kind.name()));
}

#[test]
fn parallelotopes_never_lose_jumps_to_boxes() {
    let cases = [
        (bb_sin(Interval::point(3.0)), until(40.0)),
        (load("flat-ball", 0), jumps(60)),
        (load("rotation-switch", 0), until(30.0)),
    ];
    for (m, lim) in cases {
        let p = simulate(&m, &lim, &SimOptions::default());
        let b = simulate(&m, &lim, &SimOptions::box_mode());
        assert!(p.jumps() >= b.jumps(), "{} < {}", p.jumps(), b.jumps());
    }
}

#[test]
fn wider_initial_sets_verify_fewer_jumps() {
    let point = simulate(&bb_sin(Interval::point(3.0)), &until(60.0), &SimOptions::default());
    let wide = simulate(&bb_sin(iv(2.995, 3.005)), &until(60.0), &SimOptions::default());
    assert!(wide.jumps() < point.jumps(), "{} vs {}", wide.jumps(), point.jumps());
}

fn check_shape(t: &Trajectory) {
    // a run follows every event unless the jump limit stopped the simulation
    assert!(t.runs.len() == t.events.len() + 1 || t.runs.len() == t.events.len());
    for (k, e) in t.events.iter().enumerate() {
        let before = &t.runs[k];
        assert_eq!(before.t_end, e.tau.hi());
        assert_eq!(before.location, e.from);
        let Some(after) = t.runs.get(k + 1) else { continue };
        assert_eq!(after.t_start, e.tau.hi());
        assert_eq!(after.location, e.to);
        assert_eq!(after.segments[0].x_start, e.post_jump);
    }
    let mut clock = 0.0;
    for r in &t.runs {
        assert!(r.t_start >= clock && r.t_end >= r.t_start);
        for s in &r.segments {
            assert!(s.t_start >= clock && s.t_end >= s.t_start);
            clock = s.t_end;
        }
        assert_eq!(clock, r.t_end);
    }
    assert_eq!(clock, t.horizon);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_and_events_interleave(h in 0.2f64..3.0, c in 0.5f64..0.95, n in 1usize..12) {
        let src = format!("var x, v\ninit Fall, {h}, 0\nat Fall wait v, -1\n    once (x, -v) goto Fall then x, -{c}*v\nend\n");
        let m = parse_model(&src, 0).unwrap();
        let t = simulate(&m, &jumps(n), &SimOptions::default());
        prop_assert_eq!(t.jumps(), n);
        check_shape(&t);
    }

    #[test]
    fn bb_sin_interleaves(x0 in 0.0f64..5.0) {
        let t = simulate(&bb_sin(Interval::point(x0)), &until(20.0), &SimOptions::default());
        check_shape(&t);
    }
}
