//! Exact conversions between decimal strings and interval bounds.
//!
//! Parsing produces the tightest `f64` interval containing the decimal
//! value (a point when the decimal is exactly representable). Formatting
//! rounds the lower bound down and the upper bound up at a chosen number of
//! significant digits.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};

use super::Interval;

pub const DEFAULT_DIGITS: usize = 17;

/// A decimal `mantissa * 10^exp10`.
#[derive(Debug, Clone)]
struct Decimal {
    mantissa: BigInt,
    exp10: i64,
}

fn parse_decimal(text: &str) -> Option<Decimal> {
    let text = text.trim();
    let (neg, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (num, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match num.find('.') {
        Some(i) => (&num[..i], &num[i + 1..]),
        None => (num, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut mantissa: BigInt = digits.parse().ok()?;
    if neg {
        mantissa = -mantissa;
    }
    Some(Decimal {
        mantissa,
        exp10: exp - frac_part.len() as i64,
    })
}

/// Exact `(m, e)` with `v = m * 2^e`.
fn decompose(v: f64) -> (BigInt, i64) {
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    (BigInt::from(m) * sign, e)
}

/// Compares the decimal against the finite double `v` exactly.
fn cmp_decimal(d: &Decimal, v: f64) -> Ordering {
    let (m2, e2) = decompose(v);
    // d = M * 10^a, v = m2 * 2^e2; scale both to integers.
    let a = d.exp10;
    let mut left = d.mantissa.clone();
    let mut right = m2;
    if a >= 0 {
        left *= BigInt::from(10u32).pow(a as u32);
    } else {
        right *= BigInt::from(10u32).pow((-a) as u32);
    }
    if e2 >= 0 {
        right *= BigInt::from(2u32).pow(e2 as u32);
    } else {
        left *= BigInt::from(2u32).pow((-e2) as u32);
    }
    left.cmp(&right)
}

/// Tightest interval containing the decimal number written in `text`.
pub fn parse_enclosure(text: &str) -> Option<Interval> {
    let d = parse_decimal(text)?;
    let v: f64 = text.trim().parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    Some(match cmp_decimal(&d, v) {
        Ordering::Equal => Interval::point(v),
        Ordering::Greater => Interval::raw(v, v.next_up()),
        Ordering::Less => Interval::raw(v.next_down(), v),
    })
}

/// Largest double not above the decimal in `text`.
pub fn parse_down(text: &str) -> Option<f64> {
    parse_enclosure(text).map(|i| i.lo())
}

/// Smallest double not below the decimal in `text`.
pub fn parse_up(text: &str) -> Option<f64> {
    parse_enclosure(text).map(|i| i.hi())
}

fn render(mantissa: &BigInt, exp10: i64) -> String {
    let (sign, mag) = mantissa.to_u32_digits();
    let neg = sign == Sign::Minus;
    let mut digits = BigInt::from_slice(Sign::Plus, &mag).to_string();
    if digits == "0" {
        return "0".into();
    }
    // drop trailing zeros into the exponent
    let mut exp = exp10;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        exp += 1;
    }
    let sci_exp = exp + digits.len() as i64 - 1;
    let (head, tail) = digits.split_at(1);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    if sci_exp != 0 {
        out.push_str(&format!("e{sci_exp}"));
    }
    out
}

fn format_directed(x: f64, digits: usize, up: bool) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let s = format!("{:.*e}", digits - 1, x);
    let mut d = parse_decimal(&s).expect("formatter output is a decimal");
    match (cmp_decimal(&d, x), up) {
        (Ordering::Greater, false) => d.mantissa -= 1,
        (Ordering::Less, true) => d.mantissa += 1,
        _ => {}
    }
    render(&d.mantissa, d.exp10)
}

/// `x` rounded down to `digits` significant decimal digits.
pub fn format_down(x: f64, digits: usize) -> String {
    format_directed(x, digits, false)
}

/// `x` rounded up to `digits` significant decimal digits.
pub fn format_up(x: f64, digits: usize) -> String {
    format_directed(x, digits, true)
}

/// Exact decimal expansion of a finite double.
pub fn format_exact(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let (m, e) = decompose(x);
    if e >= 0 {
        return render(&(m * BigInt::from(2u32).pow(e as u32)), 0);
    }
    // m * 2^e = m * 5^-e * 10^e
    let k = (-e) as u32;
    render(&(m * BigInt::from(5u32).pow(k)), e)
}
