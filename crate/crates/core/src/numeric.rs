//! Multiprecision complex numbers on top of `astro-float`.
//!
//! Every [`BigComplex`] carries the [`Precision`] it was created with. Binary
//! operations run at the larger of the two operand precisions, so a value is
//! never silently rounded below what its producer asked for.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    // Memo cache for pi/ln2 etc. Values depend only on the requested precision.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_cc<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub fn digits(digits: u32) -> Self {
        assert!(digits > 0, "precision must be positive");
        Precision { digits }
    }

    pub fn decimal_digits(self) -> u32 {
        self.digits
    }

    /// Mantissa bits, with 64 guard bits on top of the decimal request.
    pub fn bits(self) -> usize {
        ((self.digits as f64) * LOG2_10).ceil() as usize + 64
    }

    /// `10^-digits`, the unit roundoff in decimal terms.
    pub fn epsilon(self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }
}

/// Real helpers shared by the complex type and the theta evaluators.
pub mod real {
    use super::*;

    pub fn from_f64(x: f64, prec: Precision) -> BigFloat {
        BigFloat::from_f64(x, prec.bits())
    }

    pub fn from_i64(x: i64, prec: Precision) -> BigFloat {
        BigFloat::from_i64(x, prec.bits())
    }

    pub fn from_rational(r: &BigRational, prec: Precision) -> BigFloat {
        let p = prec.bits();
        with_cc(|cc| {
            let n = BigFloat::parse(&r.numer().to_string(), Radix::Dec, p, RM, cc);
            let d = BigFloat::parse(&r.denom().to_string(), Radix::Dec, p, RM, cc);
            n.div(&d, p, RM)
        })
    }

    pub fn parse(s: &str, prec: Precision) -> BigFloat {
        with_cc(|cc| BigFloat::parse(s, Radix::Dec, prec.bits(), RM, cc))
    }

    pub fn pi(prec: Precision) -> BigFloat {
        with_cc(|cc| cc.pi(prec.bits(), RM))
    }

    pub fn to_f64(x: &BigFloat) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match x.as_raw_parts() {
            None => f64::NAN,
            Some((words, _, sign, exp, _)) => {
                let top = match words.last() {
                    Some(w) if *w != 0 => *w as f64,
                    _ => return 0.0,
                };
                // value = 0.mantissa * 2^exp
                let mag = top * 2f64.powi(-64) * 2f64.powi(exp.clamp(-2000, 2000));
                if sign == Sign::Neg {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    pub fn format(x: &BigFloat, digits: usize) -> String {
        let s = with_cc(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        trim_digits(&s, digits)
    }

    /// Shortens astro-float's `d.ddddde±x` output to `digits` significant digits.
    fn trim_digits(s: &str, digits: usize) -> String {
        let (mant, exp) = match s.find('e') {
            Some(i) => (&s[..i], &s[i..]),
            None => (s, ""),
        };
        let (sign, body) = match mant.strip_prefix('-') {
            Some(rest) => ("-", rest),
            None => ("", mant),
        };
        let mut out = String::from(sign);
        let mut count = 0;
        for ch in body.chars() {
            if ch.is_ascii_digit() {
                if count == digits {
                    break;
                }
                count += 1;
            }
            out.push(ch);
        }
        out.push_str(exp);
        out
    }

    pub fn sqrt(x: &BigFloat, prec: Precision) -> BigFloat {
        x.sqrt(prec.bits(), RM)
    }

    pub fn exp(x: &BigFloat, prec: Precision) -> BigFloat {
        with_cc(|cc| x.exp(prec.bits(), RM, cc))
    }

    pub fn ln(x: &BigFloat, prec: Precision) -> BigFloat {
        with_cc(|cc| x.ln(prec.bits(), RM, cc))
    }

    pub fn sin(x: &BigFloat, prec: Precision) -> BigFloat {
        with_cc(|cc| x.sin(prec.bits(), RM, cc))
    }

    pub fn cos(x: &BigFloat, prec: Precision) -> BigFloat {
        with_cc(|cc| x.cos(prec.bits(), RM, cc))
    }

    /// Four-quadrant arctangent of `y/x`.
    pub fn atan2(y: &BigFloat, x: &BigFloat, prec: Precision) -> BigFloat {
        let p = prec.bits();
        let pi = pi(prec);
        if x.is_zero() {
            let half = pi.div(&from_i64(2, prec), p, RM);
            return if y.is_negative() { half.clone().neg() } else if y.is_zero() { from_i64(0, prec) } else { half };
        }
        let base = with_cc(|cc| y.div(x, p, RM).atan(p, RM, cc));
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base.sub(&pi, p, RM)
        } else {
            base.add(&pi, p, RM)
        }
    }

    /// Nearest integer, ties away from zero.
    pub fn round_to_i64(x: &BigFloat) -> i64 {
        to_f64(x).round() as i64
    }
}

/// A complex number with multiprecision real and imaginary parts.
#[derive(Clone)]
pub struct BigComplex {
    re: BigFloat,
    im: BigFloat,
    prec: Precision,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", real::format(&self.re, 20), real::format(&self.im, 20))
    }
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat, prec: Precision) -> Self {
        BigComplex { re, im, prec }
    }

    pub fn zero(prec: Precision) -> Self {
        Self::from_f64(0.0, 0.0, prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_f64(1.0, 0.0, prec)
    }

    pub fn i(prec: Precision) -> Self {
        Self::from_f64(0.0, 1.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        BigComplex { re: real::from_f64(re, prec), im: real::from_f64(im, prec), prec }
    }

    pub fn from_i64(re: i64, prec: Precision) -> Self {
        BigComplex { re: real::from_i64(re, prec), im: real::from_i64(0, prec), prec }
    }

    pub fn from_real(re: BigFloat, prec: Precision) -> Self {
        BigComplex { re, im: real::from_i64(0, prec), prec }
    }

    pub fn from_rational(r: &BigRational, prec: Precision) -> Self {
        Self::from_real(real::from_rational(r, prec), prec)
    }

    /// Parses decimal strings for both parts, e.g. `("0.3", "0.1")`.
    pub fn parse(re: &str, im: &str, prec: Precision) -> Self {
        BigComplex { re: real::parse(re, prec), im: real::parse(im, prec), prec }
    }

    pub fn pi(prec: Precision) -> Self {
        Self::from_real(real::pi(prec), prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn re_f64(&self) -> f64 {
        real::to_f64(&self.re)
    }

    pub fn im_f64(&self) -> f64 {
        real::to_f64(&self.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    fn bits(&self) -> usize {
        self.prec.bits()
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: self.im.clone().neg(), prec: self.prec }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.bits();
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn abs(&self) -> BigFloat {
        real::sqrt(&self.norm_sqr(), self.prec)
    }

    pub fn abs_f64(&self) -> f64 {
        real::to_f64(&self.abs())
    }

    pub fn arg(&self) -> BigFloat {
        real::atan2(&self.im, &self.re, self.prec)
    }

    pub fn scale(&self, k: &BigFloat) -> Self {
        let p = self.bits();
        BigComplex { re: self.re.mul(k, p, RM), im: self.im.mul(k, p, RM), prec: self.prec }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self.scale(&real::from_i64(k, self.prec))
    }

    pub fn mul_i(&self) -> Self {
        BigComplex { re: self.im.clone().neg(), im: self.re.clone(), prec: self.prec }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(domain("reciprocal of zero"));
        }
        let p = self.bits();
        let n = self.norm_sqr();
        Ok(BigComplex { re: self.re.div(&n, p, RM), im: self.im.clone().neg().div(&n, p, RM), prec: self.prec })
    }

    pub fn exp(&self) -> Self {
        let m = real::exp(&self.re, self.prec);
        let p = self.bits();
        BigComplex {
            re: m.mul(&real::cos(&self.im, self.prec), p, RM),
            im: m.mul(&real::sin(&self.im, self.prec), p, RM),
            prec: self.prec,
        }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(domain("logarithm of zero"));
        }
        Ok(BigComplex { re: real::ln(&self.abs(), self.prec), im: self.arg(), prec: self.prec })
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.bits();
        let r = self.abs();
        let two = real::from_i64(2, self.prec);
        let a = real::sqrt(&r.add(&self.re, p, RM).div(&two, p, RM), self.prec);
        let b = real::sqrt(&r.sub(&self.re, p, RM).div(&two, p, RM), self.prec);
        let b = if self.im.is_negative() { b.neg() } else { b };
        BigComplex { re: a, im: b, prec: self.prec }
    }

    pub fn powi(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Self::one(self.prec);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Ok(acc)
    }

    /// `self^e` on the principal branch.
    pub fn pow(&self, e: &BigComplex) -> Result<Self> {
        Ok((&self.ln()? * e).exp())
    }

    pub fn sin(&self) -> Self {
        // sin z = (e^{iz} - e^{-iz}) / 2i
        let iz = self.mul_i();
        let a = iz.exp();
        let b = (-&iz).exp();
        let two_i = BigComplex::from_f64(0.0, 2.0, self.prec);
        (&a - &b).checked_div(&two_i).expect("2i is nonzero")
    }

    pub fn cos(&self) -> Self {
        let iz = self.mul_i();
        let a = iz.exp();
        let b = (-&iz).exp();
        (&a + &b).scale(&real::from_f64(0.5, self.prec))
    }

    pub fn checked_div(&self, rhs: &BigComplex) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    /// `|self - other| / max(|self|, |other|)`, or the absolute difference when
    /// both are below `floor`.
    pub fn rel_diff(&self, other: &BigComplex, floor: f64) -> f64 {
        let d = (self - other).abs_f64();
        let scale = self.abs_f64().max(other.abs_f64());
        if scale < floor {
            d
        } else {
            d / scale
        }
    }

    /// Re-rounds to a new precision (up or down, explicitly).
    pub fn with_precision(&self, prec: Precision) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        let _ = re.set_precision(prec.bits(), RM);
        let _ = im.set_precision(prec.bits(), RM);
        BigComplex { re, im, prec }
    }

    /// Fixed-digit decimal rendering of both parts.
    pub fn to_decimal_pair(&self, digits: usize) -> (String, String) {
        (real::format(&self.re, digits), real::format(&self.im, digits))
    }
}

fn max_prec(a: &BigComplex, b: &BigComplex) -> Precision {
    a.prec.max(b.prec)
}

impl Add for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let prec = max_prec(self, rhs);
        let p = prec.bits();
        BigComplex { re: self.re.add(&rhs.re, p, RM), im: self.im.add(&rhs.im, p, RM), prec }
    }
}

impl Sub for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let prec = max_prec(self, rhs);
        let p = prec.bits();
        BigComplex { re: self.re.sub(&rhs.re, p, RM), im: self.im.sub(&rhs.im, p, RM), prec }
    }
}

impl Mul for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let prec = max_prec(self, rhs);
        let p = prec.bits();
        let re = self.re.mul(&rhs.re, p, RM).sub(&self.im.mul(&rhs.im, p, RM), p, RM);
        let im = self.re.mul(&rhs.im, p, RM).add(&self.im.mul(&rhs.re, p, RM), p, RM);
        BigComplex { re, im, prec }
    }
}

impl Div for &BigComplex {
    type Output = BigComplex;
    /// Panics on division by zero; use [`BigComplex::checked_div`] where the
    /// divisor may vanish.
    fn div(self, rhs: &BigComplex) -> BigComplex {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: self.re.clone().neg(), im: self.im.clone().neg(), prec: self.prec }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p50() -> Precision {
        Precision::digits(50)
    }

    #[test]
    fn exp_ln_round_trip() {
        let z = BigComplex::from_f64(0.3, -1.7, p50());
        let back = z.ln().unwrap().exp();
        assert!(back.rel_diff(&z, 1e-300) < 1e-48);
    }

    #[test]
    fn sqrt_squares_back() {
        for (a, b) in [(2.0, 0.0), (-3.0, 0.5), (-1.0, -1e-3), (0.1, 7.0)] {
            let z = BigComplex::from_f64(a, b, p50());
            let s = z.sqrt();
            assert!(s.re_f64() >= 0.0);
            assert!((&s * &s).rel_diff(&z, 1e-300) < 1e-48);
        }
    }

    #[test]
    fn euler_identity() {
        let ipi = BigComplex::pi(p50()).mul_i();
        let v = &ipi.exp() + &BigComplex::one(p50());
        assert!(v.abs_f64() < 1e-48);
    }

    #[test]
    fn sin_cos_pythagoras() {
        let z = BigComplex::from_f64(0.7, 0.2, p50());
        let s = z.sin();
        let c = z.cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!(one.rel_diff(&BigComplex::one(p50()), 1e-300) < 1e-48);
    }

    #[test]
    fn to_f64_matches() {
        for x in [0.75, -3.25e-40, 123456.789, 1e300, 0.0] {
            assert_eq!(real::to_f64(&real::from_f64(x, p50())), x);
        }
    }

    #[test]
    fn rational_conversion_is_accurate() {
        let r = BigRational::new(1.into(), 3.into());
        let x = BigComplex::from_rational(&r, p50());
        let three = BigComplex::from_i64(3, p50());
        assert!((&x * &three).rel_diff(&BigComplex::one(p50()), 1e-300) < 1e-49);
    }

    #[test]
    fn atan2_quadrants() {
        let p = p50();
        for (y, x) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, 0.0)] {
            let a = real::to_f64(&real::atan2(&real::from_f64(y, p), &real::from_f64(x, p), p));
            assert!((a - f64::atan2(y, x)).abs() < 1e-15);
        }
    }

    #[test]
    fn format_trims() {
        let x = real::parse("3.14159265358979", p50());
        assert!(real::format(&x, 5).starts_with("3.1415"));
    }
}
