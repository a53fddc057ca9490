//! Theta functions `θ_q(z) = (z|q)_∞ (q/z|q)_∞ (q|q)_∞`.
//!
//! Two evaluators: the raw triple product, and a path through Jacobi's
//! `θ₁(u|τ)` that reduces `τ` to the fundamental domain first. With
//! `z = e^{2πiu}` and `q = e^{2πiτ}` the triple product identity gives
//!
//! ```text
//! θ_q(z) = -i q^{-1/8} z^{1/2} θ₁(u|τ)
//! ```
//!
//! where the half-powers are `e^{-iπτ/4}` and `e^{iπu}`.

use crate::error::{domain, Result};
use crate::numeric::{real, BigComplex, Precision};
use crate::qpoch::qpoch_eval;

/// Nome magnitude above which [`theta`] switches to the modular path.
pub const MODULAR_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct ThetaSpec {
    base: BigComplex,
}

impl ThetaSpec {
    pub fn new(base: BigComplex) -> Result<Self> {
        let m = base.abs_f64();
        if !(m > 0.0 && m < 1.0) {
            return Err(domain(format!("theta base must satisfy 0 < |q| < 1, got |q| = {m}")));
        }
        Ok(ThetaSpec { base })
    }

    pub fn base(&self) -> &BigComplex {
        &self.base
    }
}

/// Factor count per q-Pochhammer piece such that the neglected tail is
/// below `10^-(digits+10)` relative, for arguments of magnitude `zmag`.
pub fn product_terms(qmag: f64, zmag: f64, prec: Precision) -> usize {
    let target = (prec.decimal_digits() + 10) as f64 * std::f64::consts::LN_10;
    let spread = zmag.ln().abs();
    ((target + spread) / -qmag.ln()).ceil() as usize + 2
}

/// Triple-product evaluation with `terms` factors per piece. The relative
/// truncation error is `O(|q|^terms · max(|z|, 1/|z|))`.
pub fn theta_eval(z: &BigComplex, spec: &ThetaSpec, terms: usize) -> Result<BigComplex> {
    if z.is_zero() {
        return Err(domain("theta argument must be nonzero"));
    }
    let q = &spec.base;
    let a = qpoch_eval(z, q, terms);
    let b = qpoch_eval(&(q / z), q, terms);
    let c = qpoch_eval(q, q, terms);
    Ok(&(&a * &b) * &c)
}

/// [`theta_eval`] with the term count picked by [`product_terms`].
pub fn theta_eval_auto(z: &BigComplex, spec: &ThetaSpec) -> Result<BigComplex> {
    let terms = product_terms(spec.base.abs_f64(), z.abs_f64(), z.precision().max(spec.base.precision()));
    theta_eval(z, spec, terms)
}

/// `θ_q(z)` for `z = e^{2πiu}`, `q = e^{2πiτ}` via `θ₁` and modular reduction.
pub fn theta_eval_modular(u: &BigComplex, tau: &BigComplex) -> Result<BigComplex> {
    if tau.im_f64() <= 0.0 {
        return Err(domain("modular theta needs Im(tau) > 0"));
    }
    let prec = u.precision().max(tau.precision());
    let ipi = BigComplex::pi(prec).mul_i();
    let th1 = theta1(u, tau)?;
    // -i e^{-iπτ/4} e^{iπu} θ₁
    let quarter = BigComplex::from_f64(0.25, 0.0, prec);
    let phase = (&ipi * &(u - &(tau * &quarter))).exp();
    Ok((&phase * &th1).mul_i().scale_i64(-1))
}

/// Jacobi `θ₁(u|τ) = 2 Σ_{n≥0} (-1)^n Q^{(n+1/2)²} sin((2n+1)πu)`, `Q = e^{iπτ}`.
pub fn theta1(u: &BigComplex, tau: &BigComplex) -> Result<BigComplex> {
    if tau.im_f64() <= 0.0 {
        return Err(domain("theta1 needs Im(tau) > 0"));
    }
    let prec = u.precision().max(tau.precision());
    let mut u = u.clone();
    let mut tau = tau.clone();
    let mut factor = BigComplex::one(prec);
    let ipi = BigComplex::pi(prec).mul_i();
    let one = BigComplex::one(prec);

    for _ in 0..64 {
        // T: θ₁(u|τ) = e^{iπn/4} θ₁(u|τ-n)
        let n = real::round_to_i64(tau.re());
        if n != 0 {
            tau = &tau - &BigComplex::from_i64(n, prec);
            let ph = ipi.scale(&real::from_f64(n as f64 / 4.0, prec)).exp();
            factor = &factor * &ph;
        }
        if tau.abs_f64() >= 0.999 {
            break;
        }
        // S: θ₁(u|τ) = i (-iτ)^{-1/2} e^{-iπu²/τ} θ₁(u/τ | -1/τ)
        let minus_i_tau = tau.mul_i().scale_i64(-1);
        let root = minus_i_tau.sqrt().recip()?;
        let gauss = (&(&(&ipi * &u) * &u) / &tau).scale_i64(-1).exp();
        factor = &(&factor * &root).mul_i() * &gauss;
        u = &u / &tau;
        tau = (&one / &tau).scale_i64(-1);
    }

    // Quasi-periodicity: θ₁(v + kτ) = (-1)^k Q^{-k²} e^{-2πikv} θ₁(v).
    let k = (u.im_f64() / tau.im_f64()).round() as i64;
    if k != 0 {
        let v = &u - &tau.scale_i64(k);
        // (-1)^k Q^{-k²} e^{-2πikv} = (-1)^k exp(-iπτk² - 2πikv)
        let expo = &(&ipi * &tau).scale_i64(-k * k) - &(&ipi * &v).scale_i64(2 * k);
        let mut f = expo.exp();
        if k % 2 != 0 {
            f = -&f;
        }
        factor = &factor * &f;
        u = v;
    }
    let m = real::round_to_i64(u.re());
    if m != 0 {
        u = &u - &BigComplex::from_i64(m, prec);
        if m % 2 != 0 {
            factor = -&factor;
        }
    }
    Ok(&factor * &theta1_series(&u, &tau, prec))
}

fn theta1_series(u: &BigComplex, tau: &BigComplex, prec: Precision) -> BigComplex {
    let ipi = BigComplex::pi(prec).mul_i();
    let pi_f = std::f64::consts::PI;
    let qmag_log = -pi_f * tau.im_f64(); // ln|Q|
    let growth = pi_f * u.im_f64().abs();
    let eps_log = -((prec.decimal_digits() + 20) as f64) * std::f64::consts::LN_10;
    let mut acc = BigComplex::zero(prec);
    let mut n = 0i64;
    loop {
        let h = n as f64 + 0.5;
        let mag_log = qmag_log * h * h + growth * (2 * n + 1) as f64;
        if n > 2 && mag_log < eps_log {
            break;
        }
        let qpow = (&ipi * tau).scale(&real::from_f64(h * h, prec)).exp();
        let arg = (&BigComplex::pi(prec) * u).scale_i64(2 * n + 1);
        let term = &qpow * &arg.sin();
        acc = if n % 2 == 0 { &acc + &term } else { &acc - &term };
        n += 1;
        if n > 10_000 {
            break;
        }
    }
    acc.scale_i64(2)
}

/// Maps `(z, q)` to `(u, τ)` with `z = e^{2πiu}`, `q = e^{2πiτ}`.
pub fn to_modular(z: &BigComplex, q: &BigComplex) -> Result<(BigComplex, BigComplex)> {
    let prec = z.precision().max(q.precision());
    let two_pi_i = BigComplex::pi(prec).mul_i().scale_i64(2);
    Ok((&z.ln()? / &two_pi_i, &q.ln()? / &two_pi_i))
}

/// Dispatching evaluator: the product for `|q| ≤ 0.9`, the modular path above.
pub fn theta(z: &BigComplex, q: &BigComplex) -> Result<BigComplex> {
    let spec = ThetaSpec::new(q.clone())?;
    if z.is_zero() {
        return Err(domain("theta argument must be nonzero"));
    }
    if q.abs_f64() > MODULAR_THRESHOLD {
        let (u, tau) = to_modular(z, q)?;
        theta_eval_modular(&u, &tau)
    } else {
        theta_eval_auto(z, &spec)
    }
}

/// Modular path regardless of `|q|`.
pub fn theta_modular(z: &BigComplex, q: &BigComplex) -> Result<BigComplex> {
    ThetaSpec::new(q.clone())?;
    if z.is_zero() {
        return Err(domain("theta argument must be nonzero"));
    }
    let (u, tau) = to_modular(z, q)?;
    theta_eval_modular(&u, &tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::digits(50)
    }

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(re, im, p())
    }

    #[test]
    fn zero_at_one() {
        let spec = ThetaSpec::new(c(0.3, 0.1)).unwrap();
        assert!(theta_eval_auto(&c(1.0, 0.0), &spec).unwrap().abs_f64() < 1e-60);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ThetaSpec::new(c(1.0, 0.0)).is_err());
        assert!(ThetaSpec::new(c(0.0, 0.0)).is_err());
        let spec = ThetaSpec::new(c(0.5, 0.0)).unwrap();
        assert!(matches!(theta_eval(&c(0.0, 0.0), &spec, 10), Err(crate::Error::Domain(_))));
        assert!(theta_eval_modular(&c(0.1, 0.0), &c(0.3, 0.0)).is_err());
    }

    #[test]
    fn quasi_periodic_and_inversion() {
        let q = c(0.45, -0.2);
        let spec = ThetaSpec::new(q.clone()).unwrap();
        let z = c(0.7, 0.9);
        let t = theta_eval_auto(&z, &spec).unwrap();
        let tq = theta_eval_auto(&(&q * &z), &spec).unwrap();
        let resid = &tq + &(&t / &z);
        assert!(resid.abs_f64() / t.abs_f64() < 1e-45);
        let inv = theta_eval_auto(&(&q / &z), &spec).unwrap();
        assert!(inv.rel_diff(&t, 0.0) < 1e-45);
    }

    #[test]
    fn modular_matches_product() {
        for (qr, zr, zi) in [(0.5, 0.3, 0.4), (0.95, -1.2, 0.5), (0.2, 2.0, -3.0)] {
            let q = c(qr, 0.0);
            let z = c(zr, zi);
            let prod = theta_eval_auto(&z, &ThetaSpec::new(q.clone()).unwrap()).unwrap();
            let modular = theta_modular(&z, &q).unwrap();
            assert!(prod.rel_diff(&modular, 0.0) < 1e-35, "q={qr}: {prod:?} vs {modular:?}");
        }
    }

    #[test]
    fn theta1_zero_and_odd() {
        let tau = c(0.1, 0.8);
        assert!(theta1(&c(0.0, 0.0), &tau).unwrap().abs_f64() < 1e-50);
        let u = c(0.23, 0.11);
        let a = theta1(&u, &tau).unwrap();
        let b = theta1(&-&u, &tau).unwrap();
        assert!((&a + &b).abs_f64() < 1e-45 * a.abs_f64());
    }
}
