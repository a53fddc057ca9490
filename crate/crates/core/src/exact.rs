//! Exact Laurent polynomials and rational functions in one symbol.
//!
//! Used with the symbol `s = p^{1/2}`, so every p-power with a half-integer
//! exponent is a monomial.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};
use crate::series::render_rational;

/// `Σ c_k s^k` with finitely many nonzero `c_k`, `k ∈ Z`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Laurent {
    terms: BTreeMap<i64, BigRational>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Laurent { terms }
    }

    /// `s^k` with coefficient 1.
    pub fn s_pow(k: i64) -> Self {
        Self::monomial(BigRational::one(), k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    fn push(&mut self, k: i64, c: BigRational) {
        let e = self.terms.entry(k).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.push(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Laurent {
        Laurent { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, rhs: &Laurent) -> Laurent {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.push(a + b, ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, s: &BigRational) -> Result<BigRational> {
        if s.is_zero() && self.terms.keys().any(|k| *k < 0) {
            return Err(domain("negative power evaluated at s = 0"));
        }
        let mut acc = BigRational::zero();
        for (k, c) in &self.terms {
            acc += c * pow_rat(s, *k);
        }
        Ok(acc)
    }
}

/// `s^k` for rational `s` and any integer `k` (`s ≠ 0` when `k < 0`).
pub fn pow_rat(s: &BigRational, k: i64) -> BigRational {
    let base = if k < 0 { num_traits::Inv::inv(s.clone()) } else { s.clone() };
    num_traits::pow::pow(base, k.unsigned_abs() as usize)
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_c = !mag.is_one() || *k == 0;
            if show_c {
                write!(f, "{}", render_rational(&mag))?;
            }
            if *k != 0 {
                if show_c {
                    write!(f, "*")?;
                }
                if *k == 1 {
                    write!(f, "s")?;
                } else {
                    write!(f, "s^{}", k)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `num / den` with `den ≠ 0`; equality is by cross-multiplication.
#[derive(Clone)]
pub struct RatFn {
    pub num: Laurent,
    pub den: Laurent,
}

impl RatFn {
    pub fn new(num: Laurent, den: Laurent) -> Result<Self> {
        if den.is_zero() {
            return Err(domain("rational function with zero denominator"));
        }
        Ok(RatFn { num, den })
    }

    pub fn from_laurent(num: Laurent) -> Self {
        RatFn { num, den: Laurent::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_laurent(Laurent::constant(c))
    }

    pub fn s_pow(k: i64) -> Self {
        Self::from_laurent(Laurent::s_pow(k))
    }

    pub fn add(&self, rhs: &RatFn) -> RatFn {
        RatFn {
            num: self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            den: self.den.mul(&rhs.den),
        }
    }

    pub fn sub(&self, rhs: &RatFn) -> RatFn {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &RatFn) -> RatFn {
        RatFn { num: self.num.mul(&rhs.num), den: self.den.mul(&rhs.den) }
    }

    pub fn div(&self, rhs: &RatFn) -> Result<RatFn> {
        if rhs.num.is_zero() {
            return Err(domain("division by the zero rational function"));
        }
        Ok(RatFn { num: self.num.mul(&rhs.den), den: self.den.mul(&rhs.num) })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact identity of rational functions.
    pub fn equals(&self, rhs: &RatFn) -> bool {
        self.num.mul(&rhs.den) == rhs.num.mul(&self.den)
    }

    pub fn eval(&self, s: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(s)?;
        if d.is_zero() {
            return Err(crate::Error::Pole(format!("denominator {} vanishes", self.den)));
        }
        Ok(self.num.eval(s)? / d)
    }
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Laurent::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integer-valued rational.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn laurent_arith() {
        // (s + 1/s)^2 = s^2 + 2 + s^-2
        let a = Laurent::s_pow(1).add(&Laurent::s_pow(-1));
        let sq = a.mul(&a);
        let want = Laurent::s_pow(2).add(&Laurent::constant(int(2))).add(&Laurent::s_pow(-2));
        assert_eq!(sq, want);
        assert_eq!(a.sub(&a), Laurent::zero());
        assert_eq!(sq.eval(&rat(1, 2)).unwrap(), rat(25, 4));
    }

    #[test]
    fn ratfn_equality_cross_multiplies() {
        // s/(s^2 + 1) == 1/(s + 1/s)
        let a = RatFn::new(Laurent::s_pow(1), Laurent::s_pow(2).add(&Laurent::one())).unwrap();
        let b = RatFn::new(Laurent::one(), Laurent::s_pow(1).add(&Laurent::s_pow(-1))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, RatFn::constant(rat(1, 2)));
        assert_eq!(a.eval(&int(1)).unwrap(), rat(1, 2));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RatFn::new(Laurent::one(), Laurent::zero()).is_err());
        let f = RatFn::new(Laurent::one(), Laurent::s_pow(1).sub(&Laurent::one())).unwrap();
        assert!(matches!(f.eval(&int(1)), Err(crate::Error::Pole(_))));
    }

    #[test]
    fn display_is_stable() {
        let a = Laurent::s_pow(1).add(&Laurent::s_pow(-1)).add(&Laurent::constant(rat(-3, 2)));
        assert_eq!(a.to_string(), "s - 3/2 + s^-1");
    }
}
