//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use ivsim::{parse_model, Model};
use num_bigint::BigUint;

pub fn model_source(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.ha"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(name: &str, seed: u64) -> Model {
    parse_model(&model_source(name), seed).unwrap()
}

/// Correctly rounded `n · 10^-scale`, widened by one ulp on each side.
fn scaled_bracket(lo: &BigUint, hi: &BigUint, scale: u32) -> (f64, f64) {
    let lo: f64 = format!("{lo}e-{scale}").parse().unwrap();
    let hi: f64 = format!("{hi}e-{scale}").parse().unwrap();
    (lo.next_down(), hi.next_up())
}

/// Bounce times of a ball dropped from height 1 under unit gravity with
/// restitution 9/10: `t₁ = √2`, `tₖ₊₁ = tₖ + 2·0.9ᵏ·√2`.
///
/// Exact rational arithmetic around a 40-digit bracket of `√2`.
pub fn flat_ball_bounce_times(n: usize) -> Vec<(f64, f64)> {
    const SCALE: u32 = 40;
    let ten = BigUint::from(10u32);
    let r = (BigUint::from(2u32) * ten.pow(2 * SCALE)).sqrt();
    let mut out = Vec::with_capacity(n);
    // tₖ/√2 = num / 10^(k-1)
    let mut num = BigUint::from(1u32);
    let mut pow9 = BigUint::from(1u32);
    for k in 1..=n as u32 {
        let den = ten.pow(k - 1);
        let lo = &r * &num / &den;
        let hi = (&r + 1u32) * &num / &den + 1u32;
        out.push(scaled_bracket(&lo, &hi, SCALE));
        // num/10^(k-1) + 2·9^k/10^k = (10·num + 2·9^k) / 10^k
        pow9 *= 9u32;
        num = &num * 10u32 + &pow9 * 2u32;
    }
    out
}

/// A point hybrid system for non-validated reference runs.
pub trait System {
    fn field(&self, loc: usize, x: &[f64]) -> Vec<f64>;
    fn transitions(&self, loc: usize) -> usize;
    fn guard(&self, loc: usize, i: usize, x: &[f64]) -> f64;
    /// The guard inequalities hold strictly.
    fn enabled(&self, loc: usize, i: usize, x: &[f64]) -> bool;
    fn jump(&self, loc: usize, i: usize, x: &[f64]) -> (usize, Vec<f64>);
}

impl System for Model {
    fn field(&self, loc: usize, x: &[f64]) -> Vec<f64> {
        self.locations[loc].field.eval_point(x)
    }

    fn transitions(&self, loc: usize) -> usize {
        self.locations[loc].transitions.len()
    }

    fn guard(&self, loc: usize, i: usize, x: &[f64]) -> f64 {
        self.locations[loc].transitions[i].guard_eq.eval_point(x)
    }

    fn enabled(&self, loc: usize, i: usize, x: &[f64]) -> bool {
        self.locations[loc].transitions[i].guard_ineqs.iter().all(|q| q.eval_point(x) > 0.0)
    }

    fn jump(&self, loc: usize, i: usize, x: &[f64]) -> (usize, Vec<f64>) {
        let tr = &self.locations[loc].transitions[i];
        (tr.target, tr.reset.iter().map(|e| e.eval_point(x)).collect())
    }
}

/// The ball on a sinusoidal table, transcribed by hand: state `(t, x, vx)`,
/// location 0 falling and 1 rising, `g = 1`, `c = 0.9`, `f = 0.05`.
pub struct BbSin;

const C: f64 = 0.9;
const F: f64 = 0.05;

impl System for BbSin {
    fn field(&self, loc: usize, x: &[f64]) -> Vec<f64> {
        let drag = if loc == 0 { F } else { -F };
        vec![1.0, x[2], -1.0 + drag * x[2] * x[2]]
    }

    fn transitions(&self, _loc: usize) -> usize {
        2
    }

    fn guard(&self, loc: usize, i: usize, x: &[f64]) -> f64 {
        if loc == 1 && i == 0 {
            x[2]
        } else {
            x[0].sin() - x[1]
        }
    }

    fn enabled(&self, loc: usize, i: usize, x: &[f64]) -> bool {
        let approach = x[0].cos() - x[2] > 0.0;
        let after = -C * x[2] + (C + 1.0) * x[0].cos();
        match (loc, i) {
            (0, 0) => approach && -after > 0.0,
            (0, 1) => approach && after > 0.0,
            (1, 0) => true,
            _ => approach,
        }
    }

    fn jump(&self, loc: usize, i: usize, x: &[f64]) -> (usize, Vec<f64>) {
        let bounce = vec![x[0], x[1], -C * x[2] + (C + 1.0) * x[0].cos()];
        match (loc, i) {
            (0, 0) => (0, bounce),
            (0, 1) => (1, bounce),
            (1, 0) => (0, x.to_vec()),
            _ => (1, bounce),
        }
    }
}

/// A crossing seen by a reference run.
#[derive(Debug, Clone)]
pub struct RefEvent {
    pub t: f64,
    pub from: usize,
    pub to: usize,
    pub post: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RefTrace {
    /// `(t, location, state)` every `every` steps, and at both sides of
    /// every jump.
    pub samples: Vec<(f64, usize, Vec<f64>)>,
    pub events: Vec<RefEvent>,
    /// Final global time.
    pub t_end: f64,
}

fn rk4(sys: &impl System, loc: usize, x: &[f64], dt: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
    let k1 = sys.field(loc, x);
    let k2 = sys.field(loc, &add(x, &k1, dt / 2.0));
    let k3 = sys.field(loc, &add(x, &k2, dt / 2.0));
    let k4 = sys.field(loc, &add(x, &k3, dt));
    (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Classical RK4 with fixed step `h` in plain floating point; crossings are
/// strict sign changes of a guard between steps, located by bisection on
/// the RK4 substep. Stops at `t_end` or after `max_events` jumps.
pub fn reference(sys: &impl System, loc0: usize, x0: &[f64], h: f64, t_end: f64, max_events: usize, every: usize) -> RefTrace {
    let mut loc = loc0;
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut samples = vec![(t, loc, x.clone())];
    let mut events = Vec::new();
    while t < t_end && events.len() < max_events {
        let dt = h.min(t_end - t);
        let next = rk4(sys, loc, &x, dt);
        let mut hit: Option<(f64, usize)> = None;
        for i in 0..sys.transitions(loc) {
            let g0 = sys.guard(loc, i, &x);
            let g1 = sys.guard(loc, i, &next);
            if !(g0 < 0.0 && g1 > 0.0 || g0 > 0.0 && g1 < 0.0) {
                continue;
            }
            let (mut a, mut b) = (0.0, dt);
            for _ in 0..80 {
                let c = 0.5 * (a + b);
                if c <= a || c >= b {
                    break;
                }
                let gc = sys.guard(loc, i, &rk4(sys, loc, &x, c));
                if (gc < 0.0) == (g0 < 0.0) {
                    a = c;
                } else {
                    b = c;
                }
            }
            let y = rk4(sys, loc, &x, b);
            if sys.enabled(loc, i, &y) && hit.is_none_or(|(s, _)| b < s) {
                hit = Some((b, i));
            }
        }
        match hit {
            Some((s, i)) => {
                let y = rk4(sys, loc, &x, s);
                t += s;
                samples.push((t, loc, y.clone()));
                let (to, post) = sys.jump(loc, i, &y);
                events.push(RefEvent {
                    t,
                    from: loc,
                    to,
                    post: post.clone(),
                });
                loc = to;
                x = post;
                samples.push((t, loc, x.clone()));
            }
            None => {
                t += dt;
                x = next;
                steps += 1;
                if steps % every == 0 {
                    samples.push((t, loc, x.clone()));
                }
            }
        }
    }
    RefTrace { samples, events, t_end: t }
}

/// Whether `x` lies in `b` up to an absolute slack covering the
/// reference's own error.
pub fn near(b: &ivsim::IntervalBox, x: &[f64], slack: f64) -> bool {
    b.iter().zip(x).all(|(i, &v)| i.lo() - slack <= v && v <= i.hi() + slack)
}

/// Times at which `x > 2` changes truth on a hand-coded RK4 run of
/// [`BbSin`] from `(0, x_start, 0)` with step `h`, starting with the truth
/// at time 0. `sin t` and `cos t` advance by rotation and are resynced
/// from the exact time every 1024 steps.
///
/// `settled(initial, switches, now)` is polled after every switch and
/// every resync; the run stops early once it returns `true`.
///
/// Returns `None` when more than `max_events` jumps occur before `t_end`.
pub fn bb_sin_above_two(
    x_start: f64,
    h: f64,
    t_end: f64,
    max_events: usize,
    settled: impl Fn(bool, &[f64], f64) -> bool,
) -> Option<(bool, Vec<f64>)> {
    let field = |loc: usize, _x: f64, v: f64| -> (f64, f64) {
        let drag = if loc == 0 { F } else { -F };
        (v, -1.0 + drag * v * v)
    };
    let rk4 = |loc: usize, x: f64, v: f64, dt: f64| -> (f64, f64) {
        let (a1, b1) = field(loc, x, v);
        let (a2, b2) = field(loc, x + 0.5 * dt * a1, v + 0.5 * dt * b1);
        let (a3, b3) = field(loc, x + 0.5 * dt * a2, v + 0.5 * dt * b2);
        let (a4, b4) = field(loc, x + dt * a3, v + dt * b3);
        (
            x + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
            v + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        )
    };
    let (ch, sh) = (h.cos(), h.sin());
    let (mut loc, mut x, mut v) = (0usize, x_start, 0.0);
    let (mut t0, mut k) = (0.0f64, 0u64);
    let (mut s, mut c) = (0.0f64, 1.0f64);
    let above0 = x > 2.0;
    let mut above = above0;
    let mut switches = Vec::new();
    let mut events = 0;
    loop {
        let t = t0 + k as f64 * h;
        if t >= t_end || k % 1024 == 0 && settled(above0, &switches, t) {
            return Some((above0, switches));
        }
        let (x1, v1) = rk4(loc, x, v, h);
        let (s1, c1) = if (k + 1) % 1024 == 0 {
            let t1 = t0 + (k + 1) as f64 * h;
            (t1.sin(), t1.cos())
        } else {
            (s * ch + c * sh, c * ch - s * sh)
        };
        let table0 = s - x;
        let table1 = s1 - x1;
        let crossed = |g0: f64, g1: f64| g0 < 0.0 && g1 > 0.0 || g0 > 0.0 && g1 < 0.0;
        let mut hit: Option<(f64, usize)> = None;
        let candidates: &[(usize, f64, f64)] = if loc == 0 {
            &[(0, table0, table1), (1, table0, table1)]
        } else {
            &[(0, v, v1), (1, table0, table1)]
        };
        for &(i, g0, g1) in candidates {
            if !crossed(g0, g1) {
                continue;
            }
            let state = [t, x, v];
            let (mut a, mut b) = (0.0, h);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let (xm, vm) = rk4(loc, x, v, m);
                let gm = BbSin.guard(loc, i, &[t + m, xm, vm]);
                if (gm < 0.0) == (g0 < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            let (xb, vb) = rk4(loc, state[1], state[2], b);
            if BbSin.enabled(loc, i, &[t + b, xb, vb]) && hit.is_none_or(|(s, _)| b < s) {
                hit = Some((b, i));
            }
        }
        match hit {
            Some((dt, i)) => {
                let (xb, vb) = rk4(loc, x, v, dt);
                let te = t + dt;
                let (to, post) = BbSin.jump(loc, i, &[te, xb, vb]);
                events += 1;
                if events > max_events {
                    return None;
                }
                if (post[1] > 2.0) != above {
                    above = !above;
                    switches.push(te);
                    if settled(above0, &switches, te) {
                        return Some((above0, switches));
                    }
                }
                (loc, x, v) = (to, post[1], post[2]);
                (t0, k) = (te, 0);
                (s, c) = (te.sin(), te.cos());
            }
            None => {
                if (x1 > 2.0) != above {
                    above = !above;
                    switches.push(t + h);
                    if settled(above0, &switches, t + h) {
                        return Some((above0, switches));
                    }
                }
                (x, v, s, c) = (x1, v1, s1, c1);
                k += 1;
            }
        }
    }
}

/// Whether a trace observed up to `now` already fixes the value of
/// [`always_eventually`] on every extension of it.
pub fn always_eventually_settled(initial: bool, switches: &[f64], now: f64, g: f64, f: f64) -> bool {
    let above = initial == (switches.len() % 2 == 0);
    if above {
        // every false stretch so far is closed
        return now >= g || !always_eventually(initial, switches, g, f);
    }
    let a = switches.last().copied().unwrap_or(0.0);
    a <= g && now - a >= f || !always_eventually(initial, &switches[..switches.len().saturating_sub(1)], g, f)
}

/// `G[0,g] F[0,f] p` at time 0 on a trace of `p` given by its initial
/// truth and switch times, observed over `[0, t_end]` with `g + f <= t_end`.
pub fn always_eventually(initial: bool, switches: &[f64], g: f64, f: f64) -> bool {
    // maximal stretches where p is false, clipped to the window
    let mut start = (!initial).then_some(0.0);
    for &s in switches {
        match start.take() {
            Some(a) if s - a >= f && a <= g => return false,
            Some(_) => {}
            None => start = Some(s),
        }
    }
    !matches!(start, Some(a) if a <= g)
}
