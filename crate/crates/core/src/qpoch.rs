//! q-Pochhammer factors `(c·x | b)_∞^{±1}`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};
use crate::numeric::{BigComplex, Precision};
use crate::series::{render_rational, RatSeries};

/// `(coef·x | base)_∞^power`. A zero base gives the single factor `1 - coef·x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QPochFactor {
    pub coef: BigRational,
    pub base: BigRational,
    pub power: i8,
}

impl QPochFactor {
    pub fn new(coef: BigRational, base: BigRational, power: i8) -> Result<Self> {
        if power != 1 && power != -1 {
            return Err(domain(format!("q-Pochhammer power must be ±1, got {power}")));
        }
        if base.is_negative() || base >= BigRational::one() {
            return Err(domain(format!("q-Pochhammer base {} outside [0, 1)", render_rational(&base))));
        }
        Ok(QPochFactor { coef, base, power })
    }

    pub fn numerator(coef: BigRational, base: BigRational) -> Result<Self> {
        Self::new(coef, base, 1)
    }

    pub fn denominator(coef: BigRational, base: BigRational) -> Result<Self> {
        Self::new(coef, base, -1)
    }

    /// Number of product factors needed so that `|coef·x|·|base|^t` is below
    /// `10^-(digits+10)` for `|x| ≤ xmax`.
    pub fn terms_for(&self, xmax: f64, prec: Precision) -> usize {
        let b = num_traits::ToPrimitive::to_f64(&self.base).unwrap_or(0.0);
        if b == 0.0 {
            return 1;
        }
        let c = num_traits::ToPrimitive::to_f64(&self.coef.abs()).unwrap_or(1.0) * xmax;
        let target = -((prec.decimal_digits() + 10) as f64) * std::f64::consts::LN_10;
        let extra = c.max(1.0).ln();
        ((target - extra) / b.ln()).ceil().max(1.0) as usize + 1
    }

    /// Numeric value at complex `x`.
    pub fn eval(&self, x: &BigComplex) -> Result<BigComplex> {
        let prec = x.precision();
        let terms = self.terms_for(x.abs_f64(), prec);
        let cx = &BigComplex::from_rational(&self.coef, prec) * x;
        let v = qpoch_eval(&cx, &BigComplex::from_rational(&self.base, prec), terms);
        if self.power == 1 {
            Ok(v)
        } else {
            v.recip().map_err(|_| crate::Error::Pole(format!("zero of {}", self)))
        }
    }
}

impl fmt::Display for QPochFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = if self.base.is_zero() {
            format!("(1 - {}x)", render_rational(&self.coef))
        } else {
            format!("({}x | {})", render_rational(&self.coef), render_rational(&self.base))
        };
        if self.power == 1 {
            write!(f, "{body}")
        } else {
            write!(f, "{body}^-1")
        }
    }
}

/// Truncated expansion of a single factor, exact in every coefficient.
///
/// Uses Euler's expansions
/// `(z|b)_∞ = Σ_k (-1)^k b^{k(k-1)/2} z^k / (b|b)_k` and
/// `1/(z|b)_∞ = Σ_k z^k / (b|b)_k` with `z = c·x`. Every factor `1 - c bⁿ x`
/// contributes to every coefficient, so a product cut at `n ≤ N` is only an
/// approximation; see [`qpoch_partial_product`].
pub fn qpoch_series(f: &QPochFactor, order: usize) -> Result<RatSeries> {
    if f.base.is_negative() || f.base >= BigRational::one() {
        return Err(domain("q-Pochhammer base outside [0, 1)"));
    }
    let one = BigRational::one();
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut bb = one.clone(); // (b|b)_k
    let mut ck = one.clone(); // c^k
    let mut bk = one.clone(); // b^k
    let mut tri = one.clone(); // b^{k(k-1)/2}
    for k in 0..=order {
        if k > 0 {
            bb *= &one - &bk * &f.base;
            ck *= &f.coef;
            tri *= &bk;
            bk *= &f.base;
        }
        let c = if f.power == 1 {
            let t = &ck * &tri / &bb;
            if k % 2 == 1 {
                -t
            } else {
                t
            }
        } else {
            &ck / &bb
        };
        coeffs.push(c);
    }
    RatSeries::from_coeffs("x", coeffs)
}

/// `Π_{n<factors} (1 - c bⁿ x)^{±1}` truncated at order `N`: the finite
/// product, which differs from [`qpoch_series`] by `O(b^factors)` per coefficient.
pub fn qpoch_partial_product(f: &QPochFactor, factors: usize, order: usize) -> Result<RatSeries> {
    let one = BigRational::one();
    let mut acc = RatSeries::constant("x", one.clone(), order);
    let mut bn = one;
    for _ in 0..factors {
        acc = acc.mul_one_minus(&(&f.coef * &bn));
        if f.base.is_zero() {
            break;
        }
        bn *= &f.base;
    }
    if f.power == -1 {
        acc = acc.invert()?;
    }
    Ok(acc)
}

/// Product of several factors as one series.
pub fn product_series(factors: &[QPochFactor], order: usize) -> Result<RatSeries> {
    let parts = factors.iter().map(|f| qpoch_series(f, order)).collect::<Result<Vec<_>>>()?;
    RatSeries::product_of("x", &parts, order)
}

/// Numeric value of a product of factors at `x`.
pub fn product_eval(factors: &[QPochFactor], x: &BigComplex) -> Result<BigComplex> {
    let mut acc = BigComplex::one(x.precision());
    for f in factors {
        acc = &acc * &f.eval(x)?;
    }
    Ok(acc)
}

/// `Π_{n<terms} (1 - z qⁿ)`.
pub fn qpoch_eval(z: &BigComplex, q: &BigComplex, terms: usize) -> BigComplex {
    let prec = z.precision().max(q.precision());
    let one = BigComplex::one(prec);
    let mut acc = one.clone();
    let mut zq = z.clone();
    for _ in 0..terms {
        acc = &acc * &(&one - &zq);
        zq = &zq * q;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn zero_coef_is_one() {
        let f = QPochFactor::numerator(rat(0, 1), rat(1, 3)).unwrap();
        assert_eq!(qpoch_series(&f, 6).unwrap(), RatSeries::constant("x", rat(1, 1), 6));
    }

    #[test]
    fn zero_base_is_linear() {
        let f = QPochFactor::numerator(rat(5, 2), rat(0, 1)).unwrap();
        assert_eq!(qpoch_series(&f, 4).unwrap(), RatSeries::linear("x", rat(1, 1), rat(-5, 2), 4));
    }

    #[test]
    fn bad_base_rejected() {
        assert!(QPochFactor::numerator(rat(1, 1), rat(1, 1)).is_err());
        assert!(QPochFactor::numerator(rat(1, 1), rat(-1, 2)).is_err());
        let raw = QPochFactor { coef: rat(1, 1), base: rat(3, 2), power: 1 };
        assert!(matches!(qpoch_series(&raw, 3), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn inverse_pair_cancels() {
        let a = QPochFactor::numerator(rat(2, 3), rat(1, 4)).unwrap();
        let b = QPochFactor::denominator(rat(2, 3), rat(1, 4)).unwrap();
        let prod = product_series(&[a, b], 12).unwrap();
        assert_eq!(prod, RatSeries::constant("x", rat(1, 1), 12));
    }

    #[test]
    fn euler_matches_long_partial_product() {
        // c = 1, b = 1/2: the finite product over n = 0..4 and the exact
        // expansion agree only up to b^5-sized corrections.
        let f = QPochFactor::numerator(rat(1, 1), rat(1, 2)).unwrap();
        let exact = qpoch_series(&f, 4).unwrap();
        let short = qpoch_partial_product(&f, 5, 4).unwrap();
        assert_eq!(short.coeff(1), &rat(-31, 16));
        assert_eq!(exact.coeff(1), &rat(-2, 1));
        let long = qpoch_partial_product(&f, 200, 4).unwrap();
        for n in 0..=4 {
            let d = (exact.coeff(n) - long.coeff(n)).abs();
            assert!(d < rat(1, 1_000_000_000), "coefficient {n}");
        }
    }

    #[test]
    fn numeric_matches_series_inside_disc() {
        let prec = Precision::digits(40);
        let f = QPochFactor::numerator(rat(1, 2), rat(1, 3)).unwrap();
        let s = qpoch_series(&f, 80).unwrap();
        let x = rat(1, 5);
        let series_val = s.eval(&x);
        let num = f.eval(&BigComplex::from_rational(&x, prec)).unwrap();
        assert!(num.rel_diff(&BigComplex::from_rational(&series_val, prec), 0.0) < 1e-35);
    }
}
