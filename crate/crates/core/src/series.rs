//! Formal power series truncated at a fixed order.
//!
//! A [`TruncatedSeries`] of order `M` stores `c₀ … c_M`; every operation is
//! exact up to that order (modulo rounding) and never reads beyond it.

use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Default cap on the order of series built by the photon-statistics code.
pub const MAX_ORDER: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Series of order `coeffs.len() − 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![0.0; order + 1])
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(1.0, order)
    }

    /// `a + b·x`, truncated.
    pub fn linear(a: f64, b: f64, order: usize) -> Self {
        let mut s = Self::constant(a, order);
        if order >= 1 {
            s.coeffs[1] = b;
        }
        s
    }

    /// Coefficients of `1/(1 − c·x)`.
    pub fn geometric(c: f64, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut p = 1.0;
        for _ in 0..=order {
            coeffs.push(p);
            p *= c;
        }
        Self::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs[n]
    }

    /// Keeps coefficients up to `order` (or pads with zeros).
    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self::new(coeffs)
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let m = self.order();
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=m)
            .map(|n| (0..=n).map(|j| a[j] * b[n - j]).sum())
            .collect();
        Ok(Self::new(coeffs))
    }

    /// `a · x` truncated (coefficients shift up by one).
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs[..self.order()]);
        Self::new(coeffs)
    }

    /// `a / (1 − c·x)` in `O(M)`.
    pub fn div_one_minus(&self, c: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut prev = 0.0;
        for &a in &self.coeffs {
            prev = a + c * prev;
            coeffs.push(prev);
        }
        Self::new(coeffs)
    }

    /// Series quotient; requires a non-zero constant term in the divisor.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(Error::Domain("division by a series with zero constant term".into()));
        }
        let m = self.order();
        let mut q = vec![0.0; m + 1];
        for n in 0..=m {
            let s: f64 = (1..=n).map(|j| other.coeffs[j] * q[n - j]).sum();
            q[n] = (self.coeffs[n] - s) / b0;
        }
        Ok(Self::new(q))
    }

    /// Formal derivative; the result has order `M − 1` (order 0 stays 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::new((1..=self.order()).map(|n| n as f64 * self.coeffs[n]).collect())
    }

    /// `exp(a(x))` via `n bₙ = Σⱼ j aⱼ b_{n−j}`.
    pub fn exp(&self) -> Result<Self> {
        let m = self.order();
        let b0 = self.coeffs[0].exp();
        if !b0.is_finite() {
            return Err(Error::Range(format!("exp of constant term {} overflows", self.coeffs[0])));
        }
        let mut b = vec![0.0; m + 1];
        b[0] = b0;
        for n in 1..=m {
            let s: f64 = (1..=n).map(|j| j as f64 * self.coeffs[j] * b[n - j]).sum();
            b[n] = s / n as f64;
            if !b[n].is_finite() {
                return Err(Error::Range(format!("coefficient {n} of exp overflows")));
            }
        }
        Ok(Self::new(b))
    }

    /// Principal logarithm; requires a positive constant term.
    pub fn ln(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Branch(format!("logarithm needs a positive constant term, got {a0}")));
        }
        let m = self.order();
        let mut l = vec![0.0; m + 1];
        l[0] = a0.ln();
        // a·l' = a'  ⇒  n a₀ lₙ = n aₙ − Σ_{j=1}^{n−1} j lⱼ a_{n−j}
        for n in 1..=m {
            let s: f64 = (1..n).map(|j| j as f64 * l[j] * self.coeffs[n - j]).sum();
            l[n] = (n as f64 * self.coeffs[n] - s) / (n as f64 * a0);
        }
        Ok(Self::new(l))
    }

    /// Square root with positive constant term.
    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Branch(format!("square root needs a positive constant term, got {a0}")));
        }
        let m = self.order();
        let mut b = vec![0.0; m + 1];
        b[0] = a0.sqrt();
        for n in 1..=m {
            let s: f64 = (1..n).map(|j| b[j] * b[n - j]).sum();
            b[n] = (self.coeffs[n] - s) / (2.0 * b[0]);
        }
        Ok(Self::new(b))
    }

    /// Non-negative integer power by repeated squaring.
    pub fn powi(&self, k: u32) -> Result<Self> {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `a^{k/2}` as `(√a)^k`.
    pub fn pow_half_integer(&self, k: u32) -> Result<Self> {
        if k % 2 == 0 {
            if !(self.coeffs[0] > 0.0) {
                return Err(Error::Branch(format!("a^(k/2) needs a positive constant term, got {}", self.coeffs[0])));
            }
            return self.powi(k / 2);
        }
        self.sqrt()?.powi(k)
    }

    /// `a′/a`, of order `M − 1`.
    pub fn log_derivative(&self) -> Result<Self> {
        if self.coeffs[0] == 0.0 {
            return Err(Error::Domain("log-derivative of a series with zero constant term".into()));
        }
        if self.order() == 0 {
            return Ok(Self::zero(0));
        }
        let d = self.derivative();
        d.div(&self.truncate(d.order()))
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("series orders must match")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("series orders must match")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec())
    }

    fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
        a.order() == b.order() && a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
    }

    #[test]
    fn products() {
        assert_eq!(s(&[1.0, 1.0, 0.0]).mul(&s(&[1.0, -1.0, 0.0])).unwrap(), s(&[1.0, 0.0, -1.0]));
        let a = s(&[0.3, -1.2, 4.0, 2.5]);
        assert_eq!(a.mul(&TruncatedSeries::one(3)).unwrap(), a);
        assert!(matches!(a.mul(&TruncatedSeries::one(2)), Err(Error::OrderMismatch(3, 2))));
    }

    #[test]
    fn geometric_series() {
        assert_eq!(TruncatedSeries::geometric(0.0, 3), s(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(TruncatedSeries::geometric(0.5, 3), s(&[1.0, 0.5, 0.25, 0.125]));
        for c in [-0.9, -0.3, 0.7, 1.5] {
            let g = TruncatedSeries::geometric(c, 30);
            let p = g.mul(&TruncatedSeries::linear(1.0, -c, 30)).unwrap();
            assert!(close(&p, &TruncatedSeries::one(30), 1e-12));
        }
    }

    #[test]
    fn exponential() {
        assert_eq!(TruncatedSeries::zero(4).exp().unwrap(), TruncatedSeries::one(4));
        let e = TruncatedSeries::linear(0.0, 1.0, 10).exp().unwrap();
        let mut fact = 1.0;
        for n in 0..=10 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((e.coeff(n) - 1.0 / fact).abs() < 1e-16);
        }
        let a = s(&[0.2, -0.7, 0.4, 0.9, -0.1]);
        let back = a.exp().unwrap().ln().unwrap();
        assert!(close(&back, &a, 1e-12));
        assert!(matches!(TruncatedSeries::constant(1000.0, 3).exp(), Err(Error::Range(_))));
    }

    #[test]
    fn square_roots() {
        assert_eq!(TruncatedSeries::one(3).sqrt().unwrap(), TruncatedSeries::one(3));
        assert_eq!(s(&[1.0, 2.0, 1.0, 0.0]).sqrt().unwrap(), s(&[1.0, 1.0, 0.0, 0.0]));
        assert!(matches!(s(&[0.0, 1.0]).sqrt(), Err(Error::Branch(_))));
        assert!(matches!(s(&[-1.0, 1.0]).sqrt(), Err(Error::Branch(_))));
        let a = s(&[2.0, 1.0, -3.0, 0.5]);
        let cube_halves = a.pow_half_integer(3).unwrap();
        let direct = a.mul(&a.sqrt().unwrap()).unwrap();
        assert!(close(&cube_halves, &direct, 1e-13));
    }

    #[test]
    fn log_derivatives() {
        assert_eq!(TruncatedSeries::one(5).log_derivative().unwrap(), TruncatedSeries::zero(4));
        let c = 0.6;
        let g = TruncatedSeries::geometric(c, 12);
        let l = g.log_derivative().unwrap();
        let expected = TruncatedSeries::geometric(c, 11).scale(c);
        assert!(close(&l, &expected, 1e-13));

        let a = s(&[0.0, 0.5, -0.25, 0.1, 0.3]);
        let l = a.exp().unwrap().log_derivative().unwrap();
        assert!(close(&l, &a.derivative(), 1e-13));
        assert!(s(&[0.0, 1.0]).log_derivative().is_err());
    }

    #[test]
    fn cheap_rational_helpers() {
        let a = s(&[1.0, 2.0, 3.0, 4.0]);
        let c = -0.4;
        let slow = a.mul(&TruncatedSeries::geometric(c, 3)).unwrap();
        assert!(close(&a.div_one_minus(c), &slow, 1e-15));
        assert_eq!(a.shift_up(), s(&[0.0, 1.0, 2.0, 3.0]));
        let q = a.div(&TruncatedSeries::linear(1.0, -c, 3)).unwrap();
        assert!(close(&q, &slow, 1e-15));
    }

    #[test]
    fn horner() {
        assert_eq!(s(&[1.0, 2.0, 3.0]).eval(2.0), 17.0);
    }
}
