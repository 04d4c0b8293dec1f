//! Truncated univariate power series.
//!
//! A series of order `N` stores the coefficients `c_0..=c_N` densely. Every
//! binary operation requires equal orders and truncates its result to `N`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a series of the given order; missing coefficients are zero and
    /// coefficients beyond `order` are dropped.
    pub fn new(mut coeffs: Vec<f64>, order: usize) -> Self {
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![0.0; order + 1] }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The identity `x0 + t`, i.e. the independent variable expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut s = Self::constant(x0, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.coeffs[k] = v;
    }

    /// `k`-th derivative at the expansion point, `k! c_k`.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.clone(), order)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() })
    }

    /// Cauchy product truncated to the common order.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(Error::ZeroConstant);
        }
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0 / c0;
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * out[k - j]).sum();
            out[k] = -s / c0;
        }
        Ok(Self { coeffs: out })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }

    /// `ln(f)` for a series with positive constant term.
    pub fn ln(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 <= 0.0 {
            return Err(Error::Domain(format!("log of series with constant term {c0}")));
        }
        let n = self.order();
        let q = self.scale(1.0 / c0);
        // (ln q)' = q'/q, integrated termwise
        let mut dq = vec![0.0; n + 1];
        for k in 1..=n {
            dq[k - 1] = k as f64 * q.coeffs[k];
        }
        let ratio = Self { coeffs: dq }.try_div(&q)?;
        let mut out = vec![0.0; n + 1];
        out[0] = c0.ln();
        for k in 1..=n {
            out[k] = ratio.coeffs[k - 1] / k as f64;
        }
        Ok(Self { coeffs: out })
    }

    /// Composition `self ∘ g` by Horner's scheme; `g` must vanish at 0.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_order(g)?;
        if g.coeffs[0] != 0.0 {
            return Err(Error::NonZeroConstant(g.coeffs[0]));
        }
        let n = self.order();
        let mut acc = Self::constant(self.coeffs[n], n);
        for k in (0..n).rev() {
            acc = acc.try_mul(g)?;
            acc.coeffs[0] += self.coeffs[k];
        }
        Ok(acc)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("series order mismatch")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("series order mismatch")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("series order mismatch")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

pub fn series_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.try_mul(g)
}

pub fn series_compose(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.compose(g)
}

/// Solves `H(θ(x)) = H(x)` for the involution `θ(x) = -x + O(x²)`.
///
/// The degree `k+1` coefficient of `H∘θ` is linear in `θ_k` with slope
/// `-2 H_2`, which determines `θ_2..θ_{N-1}` from `H` of order `N`. The last
/// coefficient is not fixed by `H` at this order: for odd `N` it follows from
/// `θ∘θ = x`, for even `N` that relation leaves it free and it is set to zero.
/// Callers needing an exact `θ_N` should pass `H` of order `N+1` and truncate.
pub fn involution_solve(h: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = h.order();
    let h2 = h.coeff(2);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    if h.coeff(0).abs() > 1e-10 * scale || h.coeff(1).abs() > 1e-10 * scale {
        return Err(Error::DegenerateMinimum(format!(
            "H0 = {:e}, H1 = {:e} must vanish",
            h.coeff(0),
            h.coeff(1)
        )));
    }
    if !(h2 > 0.0) {
        return Err(Error::DegenerateMinimum(format!("H2 = {h2:e} is not positive")));
    }
    let mut theta = TruncatedSeries::zero(n);
    if n >= 1 {
        theta.coeffs[1] = -1.0;
    }
    if n < 2 {
        return Ok(theta);
    }
    let mut h0 = h.clone();
    h0.coeffs[0] = 0.0;
    h0.coeffs[1] = 0.0;
    for k in 2..n {
        let c = h0.compose(&theta)?.coeff(k + 1);
        theta.coeffs[k] = (c - h.coeff(k + 1)) / (2.0 * h2);
    }
    if n % 2 == 1 {
        let tt = theta.compose(&theta)?;
        theta.coeffs[n] = tt.coeff(n) / 2.0;
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(c.to_vec())
    }

    #[test]
    fn mul_identity_and_square() {
        assert_eq!(s(&[1.0, 1.0]).try_mul(&s(&[1.0, 0.0])).unwrap(), s(&[1.0, 1.0]));
        let sq = s(&[1.0, 1.0, 0.0]).try_mul(&s(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(sq, s(&[1.0, 2.0, 1.0]));
    }

    #[test]
    fn mul_order_mismatch() {
        let e = s(&[1.0, 1.0]).try_mul(&s(&[1.0, 1.0, 0.0])).unwrap_err();
        assert!(matches!(e, Error::OrderMismatch { .. }));
    }

    #[test]
    fn compose_examples() {
        let f = s(&[0.0, 0.0, 1.0]);
        assert_eq!(f.compose(&s(&[0.0, -1.0, 0.0])).unwrap(), f);
        let exp = s(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        let out = exp.compose(&s(&[0.0, 2.0, 0.0, 0.0])).unwrap();
        let want = [1.0, 2.0, 2.0, 4.0 / 3.0];
        for (a, b) in out.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let e = exp.compose(&s(&[0.5, 1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(e, Error::NonZeroConstant(_)));
    }

    #[test]
    fn recip_and_ln() {
        let f = s(&[2.0, 1.0, 0.0, 0.0, 0.0]);
        let r = f.recip().unwrap();
        let one = f.try_mul(&r).unwrap();
        assert!((one.coeff(0) - 1.0).abs() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
        // ln(1 + x) = x - x²/2 + x³/3 - x⁴/4
        let l = s(&[1.0, 1.0, 0.0, 0.0, 0.0]).ln().unwrap();
        let want = [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25];
        for (a, b) in l.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(s(&[0.0, 1.0]).recip().is_err());
    }

    #[test]
    fn involution_of_even_potential() {
        let th = involution_solve(&TruncatedSeries::new(vec![0.0, 0.0, 1.0], 8)).unwrap();
        assert_eq!(th, TruncatedSeries::new(vec![0.0, -1.0], 8));
    }

    #[test]
    fn involution_rejects_flat_minimum() {
        let h = TruncatedSeries::new(vec![0.0, 0.0, -1.0, 1.0], 8);
        assert!(matches!(involution_solve(&h), Err(Error::DegenerateMinimum(_))));
        let h = TruncatedSeries::new(vec![0.0, 0.5, 1.0], 8);
        assert!(matches!(involution_solve(&h), Err(Error::DegenerateMinimum(_))));
    }

    #[test]
    fn involution_recovers_cubic_potential() {
        // H = x² + x³: θ₂ = -1, θ₃ = -1 (from H∘θ = H by hand)
        let h = TruncatedSeries::new(vec![0.0, 0.0, 1.0, 1.0], 9);
        let th = involution_solve(&h).unwrap();
        assert!((th.coeff(2) + 1.0).abs() < 1e-14);
        assert!((th.coeff(3) + 1.0).abs() < 1e-14);
        let diff = h.compose(&th).unwrap().try_sub(&h).unwrap();
        assert!(diff.max_abs() < 1e-13);
    }
}
