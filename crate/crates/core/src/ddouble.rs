//! Double-double arithmetic (about 32 significant digits).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DD { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 { -self } else { self }
    }

    pub fn signum(self) -> f64 {
        if self.hi > 0.0 {
            1.0
        } else if self.hi < 0.0 {
            -1.0
        } else {
            self.lo.signum() * (self.lo != 0.0) as i32 as f64
        }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut out = DD::ONE;
        for _ in 0..n {
            out = out * self;
        }
        out
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        // one Newton step from the double approximation
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        DD::new(x, r)
    }
}

impl From<f64> for DD {
    fn from(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::from(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from(q3)
    }
}

impl Add<f64> for DD {
    type Output = DD;
    fn add(self, b: f64) -> DD {
        self + DD::from(b)
    }
}

impl Sub<f64> for DD {
    type Output = DD;
    fn sub(self, b: f64) -> DD {
        self - DD::from(b)
    }
}

impl Mul<f64> for DD {
    type Output = DD;
    fn mul(self, b: f64) -> DD {
        self * DD::from(b)
    }
}

impl Div<f64> for DD {
    type Output = DD;
    fn div(self, b: f64) -> DD {
        self / DD::from(b)
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.hi, self.lo).partial_cmp(&(other.hi, other.lo))
    }
}

/// Parses a decimal literal exactly enough for double-double use.
pub fn parse_dd(s: &str) -> Option<DD> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let mut v = DD::ZERO;
    for ch in int.chars().chain(frac.chars()) {
        let dgt = ch.to_digit(10)? as f64;
        v = v * 10.0 + dgt;
    }
    let e = exp - frac.len() as i32;
    let ten = DD::from(10.0);
    if e >= 0 {
        v = v * ten.powi(e as u32);
    } else {
        v = v / ten.powi((-e) as u32);
    }
    Some(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        let a = DD::from(1.0) + DD::from(1e-20);
        let b = a - DD::from(1.0);
        assert_eq!(b.to_f64(), 1e-20);
    }

    #[test]
    fn division_round_trip() {
        let x = DD::from(1.0) / DD::from(3.0);
        let y = x * 3.0 - 1.0;
        assert!(y.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_two() {
        let r = DD::from(2.0).sqrt();
        assert!((r * r - 2.0).to_f64().abs() < 1e-31);
    }

    #[test]
    fn parses_decimal() {
        let x = parse_dd("71.75583310").unwrap();
        let y = (x * DD::from(1e8) - 7175583310.0).to_f64();
        assert!(y.abs() < 1e-20);
        assert_eq!(parse_dd("-2.5e-3").unwrap().to_f64(), -0.0025);
    }
}
