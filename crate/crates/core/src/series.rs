//! Truncated power series `Σ_{n=0..N} a_n x^n`.
//!
//! Coefficients are either exact rationals or [`BigComplex`]; every instance
//! is homogeneous. Coefficients past `N` are never materialized.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, structural, Result};
use crate::numeric::BigComplex;

/// Coefficient ring for [`TruncatedSeries`].
pub trait Scalar: Clone + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn recip(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
}

impl Scalar for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(num_traits::Inv::inv(self.clone()))
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
}

impl Scalar for BigComplex {
    fn zero_like(&self) -> Self {
        BigComplex::zero(self.precision())
    }
    fn one_like(&self) -> Self {
        BigComplex::one(self.precision())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigComplex::from_i64(n, self.precision())
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn recip(&self) -> Option<Self> {
        BigComplex::recip(self).ok()
    }
    fn is_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.rel_diff(&self.one_like(), 0.0) == 0.0
    }
}

pub const DEFAULT_VAR: &str = "x";

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    var: String,
    coeffs: Vec<C>,
}

/// Exact-rational series, the common case.
pub type RatSeries = TruncatedSeries<BigRational>;

impl<C: Scalar> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[{}; O({}^{})]{:?}", self.var, self.var, self.order() + 1, self.coeffs)
    }
}

impl<C: Scalar> TruncatedSeries<C> {
    /// Builds a series from explicit coefficients `a_0..a_N`.
    pub fn from_coeffs(var: &str, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(structural("a series needs at least the constant coefficient"));
        }
        Ok(TruncatedSeries { var: var.to_string(), coeffs })
    }

    /// The constant `c` at order `n`.
    pub fn constant(var: &str, c: C, order: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); order + 1];
        coeffs[0] = c;
        TruncatedSeries { var: var.to_string(), coeffs }
    }

    /// `Σ terms[k] x^k`, padded with zeros or truncated to `order`.
    pub fn from_terms(var: &str, like: &C, terms: &[C], order: usize) -> Self {
        let mut coeffs = vec![like.zero_like(); order + 1];
        for (slot, t) in coeffs.iter_mut().zip(terms) {
            *slot = t.clone();
        }
        TruncatedSeries { var: var.to_string(), coeffs }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    fn check_compat(&self, rhs: &Self) -> Result<()> {
        if self.var != rhs.var {
            return Err(structural(format!("series variables differ: {} vs {}", self.var, rhs.var)));
        }
        if self.order() != rhs.order() {
            return Err(structural(format!("series orders differ: {} vs {}", self.order(), rhs.order())));
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<C>) -> Self {
        TruncatedSeries { var: self.var.clone(), coeffs }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.add(b)).collect()))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.sub(b)).collect()))
    }

    pub fn scale(&self, k: &C) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|a| a.mul(k)).collect())
    }

    /// Cauchy product, tail past `N` discarded.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let n = self.order();
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(self.with_coeffs(out))
    }

    pub fn invert(&self) -> Result<Self> {
        let g0 = self.coeffs[0].recip().ok_or_else(|| domain("series inverse needs a nonzero constant term"))?;
        let n = self.order();
        let mut g = Vec::with_capacity(n + 1);
        g.push(g0.clone());
        for m in 1..=n {
            let mut acc = g0.zero_like();
            for k in 1..=m {
                acc = acc.add(&self.coeffs[k].mul(&g[m - k]));
            }
            g.push(g0.zero_like().sub(&g0.mul(&acc)));
        }
        Ok(self.with_coeffs(g))
    }

    /// `exp(f)` for `f(0) = 0`, via `n g_n = Σ_k k f_k g_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(domain("series exp needs a zero constant term"));
        }
        let n = self.order();
        let one = self.coeffs[0].one_like();
        let mut g = Vec::with_capacity(n + 1);
        g.push(one.clone());
        for m in 1..=n {
            let mut acc = one.zero_like();
            for k in 1..=m {
                acc = acc.add(&self.coeffs[k].from_i64_like(k as i64).mul(&self.coeffs[k]).mul(&g[m - k]));
            }
            let inv_m = one.from_i64_like(m as i64).recip().expect("m > 0");
            g.push(acc.mul(&inv_m));
        }
        Ok(self.with_coeffs(g))
    }

    /// `log(f)` for `f(0) = 1`, via `n g_n = n f_n - Σ_{k<n} k g_k f_{n-k}`.
    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(domain("series log needs constant term 1"));
        }
        let n = self.order();
        let zero = self.coeffs[0].zero_like();
        let mut g = vec![zero.clone(); n + 1];
        for m in 1..=n {
            let mut acc = zero.from_i64_like(m as i64).mul(&self.coeffs[m]);
            for k in 1..m {
                acc = acc.sub(&zero.from_i64_like(k as i64).mul(&g[k]).mul(&self.coeffs[m - k]));
            }
            let inv_m = zero.from_i64_like(m as i64).recip().expect("m > 0");
            g[m] = acc.mul(&inv_m);
        }
        Ok(self.with_coeffs(g))
    }

    /// Integer power; negative exponents go through [`Self::invert`].
    pub fn powi(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::constant(&self.var, self.coeffs[0].one_like(), self.order());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, x: &C) -> C {
        let mut acc = self.coeffs[0].zero_like();
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }
}

/// Integer numerators over one shared denominator.
fn common_denominator(s: &RatSeries) -> (Vec<BigInt>, BigInt) {
    use num_integer::Integer;
    let d = s.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = s.coeffs.iter().map(|c| c.numer() * (&d / c.denom())).collect();
    (nums, d)
}

impl RatSeries {
    /// Product of many series. Convolves integer numerators and reduces
    /// once at the end, which avoids a gcd per partial sum.
    pub fn product_of(var: &str, factors: &[RatSeries], order: usize) -> Result<RatSeries> {
        let mut nums = vec![BigInt::zero(); order + 1];
        nums[0] = BigInt::one();
        let mut den = BigInt::one();
        for f in factors {
            if f.var != var || f.order() != order {
                return Err(structural("product_of: factor variable or order mismatch"));
            }
            let (b, db) = common_denominator(f);
            let mut out = vec![BigInt::zero(); order + 1];
            for (i, a) in nums.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, bj) in b[..=order - i].iter().enumerate() {
                    if !bj.is_zero() {
                        out[i + j] += a * bj;
                    }
                }
            }
            nums = out;
            den *= db;
        }
        let coeffs = nums.into_iter().map(|n| BigRational::new(n, den.clone())).collect();
        RatSeries::from_coeffs(var, coeffs)
    }

    /// `1 - c x` style linear series.
    pub fn linear(var: &str, a0: BigRational, a1: BigRational, order: usize) -> Self {
        Self::from_terms(var, &a0.clone(), &[a0, a1], order)
    }

    /// Multiplies by `(1 - a·x)` in linear time.
    pub fn mul_one_minus(&self, a: &BigRational) -> RatSeries {
        let mut out = self.coeffs.clone();
        for k in (1..out.len()).rev() {
            let t = a * &self.coeffs[k - 1];
            out[k] -= t;
        }
        self.with_coeffs(out)
    }

    /// Exact division by `(1 - x)`; `None` when `(1 - x)` does not divide
    /// the truncated polynomial, i.e. the coefficients do not sum to zero.
    pub fn divide_one_minus_x(&self) -> Option<RatSeries> {
        // f = (1 - x) g  <=>  g_n = Σ_{k<=n} f_k
        let mut running = BigRational::zero();
        let mut g = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            running += a;
            g.push(running.clone());
        }
        if !Zero::is_zero(g.last().expect("nonempty")) {
            return None;
        }
        Some(self.with_coeffs(g))
    }

    /// `num/den` strings, one per coefficient.
    pub fn render_coeffs(&self, count: usize) -> Vec<String> {
        self.coeffs.iter().take(count).map(render_rational).collect()
    }

    /// Largest absolute coefficient, useful for sanity bounds.
    pub fn max_abs(&self) -> BigRational {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
    }
}

/// Canonical `num/den` rendering (`num` alone when the denominator is 1).
pub fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shorthand for an exact rational `n/d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(terms: &[(i64, i64)], n: usize) -> RatSeries {
        let t: Vec<_> = terms.iter().map(|&(a, b)| rat(a, b)).collect();
        RatSeries::from_terms("x", &rat(0, 1), &t, n)
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = s(&[], 8);
        assert_eq!(z.exp().unwrap(), RatSeries::constant("x", rat(1, 1), 8));
    }

    #[test]
    fn geometric_inverse() {
        let inv = s(&[(1, 1), (-1, 1)], 3).invert().unwrap();
        assert_eq!(inv, s(&[(1, 1), (1, 1), (1, 1), (1, 1)], 3));
    }

    #[test]
    fn log_exp_round_trip() {
        let f = s(&[(0, 1), (1, 1), (2, 1)], 10);
        assert_eq!(f.exp().unwrap().log().unwrap(), f);
    }

    #[test]
    fn exp_coefficients_of_x() {
        // e^x = Σ x^n / n!
        let e = s(&[(0, 1), (1, 1)], 6).exp().unwrap();
        let mut fact = 1i64;
        for n in 0..=6 {
            if n > 0 {
                fact *= n;
            }
            assert_eq!(e.coeff(n as usize), &rat(1, fact));
        }
    }

    #[test]
    fn structural_errors() {
        let a = s(&[(1, 1)], 3);
        let b = s(&[(1, 1)], 4);
        assert!(matches!(a.add(&b), Err(crate::Error::Structural(_))));
        let c = RatSeries::from_terms("y", &rat(0, 1), &[rat(1, 1)], 3);
        assert!(matches!(a.mul(&c), Err(crate::Error::Structural(_))));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(s(&[(0, 1), (1, 1)], 3).invert(), Err(crate::Error::Domain(_))));
        assert!(matches!(s(&[(1, 1)], 3).exp(), Err(crate::Error::Domain(_))));
        assert!(matches!(s(&[(2, 1)], 3).log(), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn one_minus_x_division() {
        let f = s(&[(1, 1), (-1, 1)], 5).mul(&s(&[(3, 1), (0, 1), (2, 7)], 5)).unwrap();
        // the product has degree 3 < 5, so the division is exact
        assert_eq!(f.divide_one_minus_x().unwrap(), s(&[(3, 1), (0, 1), (2, 7)], 5));
        assert!(s(&[(1, 1)], 5).divide_one_minus_x().is_none());
    }

    #[test]
    fn complex_series_exp() {
        let p = crate::numeric::Precision::digits(40);
        let one = BigComplex::one(p);
        let f = TruncatedSeries::from_terms("x", &one, &[one.zero_like(), one.clone()], 5);
        let e = f.exp().unwrap();
        assert!(e.coeff(5).rel_diff(&BigComplex::from_f64(1.0 / 120.0, 0.0, p), 0.0) < 1e-15);
        let l = e.log().unwrap();
        assert!(l.coeff(1).rel_diff(&one, 0.0) < 1e-38);
    }
}
