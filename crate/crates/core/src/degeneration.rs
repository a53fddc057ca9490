//! Trigonometric and rational degenerations of the elliptic structure
//! functions, and numeric limit checks.
//!
//! Nome convention: for a scaling parameter `ε > 0` the elliptic side is
//! evaluated at
//!
//! ```text
//! q = e^{-ε/η},  p = e^{-4εħ},  x = w/z = e^{4ε(u-v)}
//! ```
//!
//! so `|q|, |p| < 1` and `θ_{q²}(x p^{k/2}) ~ sin 2πη(u - v - kħ/2)` as
//! `ε → 0`. The nome tends to 1, so every theta goes through the modular
//! evaluator.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::{real, BigComplex, Precision};
use crate::relations::{relation_catalog, Mode, NumParams, RelationId, StructureFunction, ThetaArg, ThetaBase};
use crate::sampling::{rng, stream};

/// `η′` from `1/η′ - 1/η = ħc`.
pub fn eta_prime(eta: f64, hbar: f64, c: i64) -> Result<f64> {
    eta_prime_scaled(eta, hbar, c, 1.0)
}

/// `η′` from `1/η′ - 1/η = k·ħc`.
pub fn eta_prime_scaled(eta: f64, hbar: f64, c: i64, k: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(domain("eta must be nonzero"));
    }
    let inv = 1.0 / eta + k * hbar * c as f64;
    if inv == 0.0 {
        return Err(domain("1/eta + hbar c vanishes"));
    }
    Ok(1.0 / inv)
}

/// Spectral and deformation data for one limit evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingParams {
    pub epsilon: f64,
    pub hbar: f64,
    pub eta: f64,
    /// `u - v` as (re, im).
    pub u_minus_v: (f64, f64),
    pub level: i64,
}

impl ScalingParams {
    pub fn eta_prime(&self) -> Result<f64> {
        eta_prime(self.eta, self.hbar, self.level)
    }

    /// Elliptic parameters at this `ε`, always on the modular path.
    pub fn elliptic(&self, prec: Precision) -> NumParams {
        let r = |v: f64| BigComplex::from_real(real::from_f64(v, prec), prec).exp();
        let q = r(-self.epsilon / self.eta);
        let p = r(-4.0 * self.epsilon * self.hbar);
        let mut np = NumParams::new(q, p, self.level);
        np.force_modular = true;
        np
    }

    pub fn x(&self, prec: Precision) -> BigComplex {
        let a = BigComplex::from_f64(self.u_minus_v.0, self.u_minus_v.1, prec);
        let four_eps = BigComplex::from_f64(4.0 * self.epsilon, 0.0, prec);
        (&a * &four_eps).exp()
    }
}

/// `sin(scale·π·η_*·(orient·(u-v) + shift·ħ))`, with `η_* = η` or `η′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SineFactor {
    pub prime: bool,
    pub orient: i8,
    pub shift: f64,
    pub scale: f64,
}

impl SineFactor {
    fn plain(prime: bool, shift: f64) -> Self {
        SineFactor { prime, orient: 1, shift, scale: 2.0 }
    }

    fn arg(&self, a: &BigComplex, hbar: f64) -> BigComplex {
        let prec = a.precision();
        let oa = if self.orient == 1 { a.clone() } else { -a };
        &oa + &BigComplex::from_f64(self.shift * hbar, 0.0, prec)
    }

    fn sin(&self, a: &BigComplex, eta: f64, eta_p: f64, hbar: f64) -> BigComplex {
        let prec = a.precision();
        let e = if self.prime { eta_p } else { eta };
        let k = BigComplex::from_real(real::pi(prec), prec).scale(&real::from_f64(self.scale * e, prec));
        (&k * &self.arg(a, hbar)).sin()
    }
}

impl fmt::Display for SineFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = if self.prime { "eta'" } else { "eta" };
        let k = if self.scale == 2.0 { "2pi".to_string() } else { format!("{}pi", self.scale) };
        let a = if self.orient == 1 { "u-v" } else { "v-u" };
        if self.shift == 0.0 {
            write!(f, "sin {k} {e} ({a})")
        } else {
            write!(f, "sin {k} {e} ({a}{:+}hbar)", self.shift)
        }
    }
}

/// A ratio of sines, or of their affine arguments in the rational limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigStructureFunction {
    pub name: String,
    pub sign: i8,
    pub numerator: Vec<SineFactor>,
    pub denominator: Vec<SineFactor>,
}

/// Sign applied to the second delta term of `{E, F}` in the rational
/// limit; the displayed trigonometric relation has `Plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RationalSign {
    Plus,
    Minus,
}

/// `(support shift of u - v in units of ħc, coefficient)` for `{E(u), F(v)}`:
/// `1/(2ħ)` on `u - v = ħc` with `H⁺`, and `±1/(2ħ)` on `u - v = -ħc` with `H⁻`.
pub fn ef_trig_terms(hbar: f64, sign: RationalSign) -> Result<[(i64, f64); 2]> {
    if hbar == 0.0 {
        return Err(domain("hbar must be nonzero"));
    }
    let c = 1.0 / (2.0 * hbar);
    Ok([(1, c), (-1, if sign == RationalSign::Plus { c } else { -c })])
}

fn r_pattern(prime: bool, s: f64) -> (Vec<SineFactor>, Vec<SineFactor>) {
    let f = |k: f64| SineFactor::plain(prime, k + s);
    (vec![f(2.0), f(-1.0)], vec![f(-2.0), f(1.0)])
}

impl TrigStructureFunction {
    /// The ε → 0 image of an elliptic structure function under the nome
    /// convention of this module: `θ_B(x^o p^{k/2}) ↦ sin 2πη_B(o(u-v) - kħ/2)`.
    pub fn from_elliptic(name: &str, sf: &StructureFunction, c: i64) -> Self {
        let conv = |a: &ThetaArg| SineFactor {
            prime: a.base == ThetaBase::QTilde2,
            orient: a.orient,
            shift: -((a.p_half + a.c_half * c) as f64) / 2.0,
            scale: 2.0,
        };
        TrigStructureFunction {
            name: name.to_string(),
            sign: sf.sign,
            numerator: sf.numerator.iter().map(conv).collect(),
            denominator: sf.denominator.iter().map(conv).collect(),
        }
    }

    /// The displayed sine ratios, including the `sin πη` factor in the
    /// `H^±E` denominator.
    pub fn printed(id: RelationId, c: i64) -> Result<Self> {
        let h = c as f64 / 2.0;
        let hc = c as f64;
        let mul = |a: (Vec<SineFactor>, Vec<SineFactor>), b: (Vec<SineFactor>, Vec<SineFactor>)| {
            let (mut n, mut d) = a;
            n.extend(b.0);
            d.extend(b.1);
            (n, d)
        };
        let inv = |a: (Vec<SineFactor>, Vec<SineFactor>)| (a.1, a.0);
        let (sign, (numerator, denominator)) = match id {
            RelationId::HpE | RelationId::HmE => {
                let s = if id == RelationId::HpE { h } else { -h };
                let (n, mut d) = r_pattern(false, s);
                d[0].scale = 1.0;
                (1, (n, d))
            }
            RelationId::HpF => (1, r_pattern(true, -h)),
            RelationId::HmF => (1, r_pattern(true, h)),
            RelationId::HpHp | RelationId::HmHm => (1, mul(r_pattern(false, 0.0), inv(r_pattern(true, 0.0)))),
            RelationId::HpHm => (1, mul(r_pattern(false, hc), inv(r_pattern(true, -hc)))),
            RelationId::EE => (-1, r_pattern(false, 0.0)),
            RelationId::FF => (-1, r_pattern(true, 0.0)),
            RelationId::EF => return Err(Error::Usage("EF has no sine-ratio structure function".into())),
        };
        Ok(TrigStructureFunction { name: id.name().to_string(), sign, numerator, denominator })
    }

    /// The degeneration target for `id` in `mode`.
    pub fn target(id: RelationId, mode: Mode, c: i64) -> Result<Self> {
        match mode {
            Mode::StrictText => Self::printed(id, c),
            Mode::Corrected => {
                let cat = relation_catalog(c, Mode::Corrected);
                let sf = cat
                    .get(id)
                    .structure
                    .as_ref()
                    .ok_or_else(|| Error::Usage(format!("{} has no structure function", id.name())))?;
                Ok(Self::from_elliptic(id.name(), sf, c))
            }
        }
    }

    pub fn eval(&self, a: &BigComplex, eta: f64, eta_p: f64, hbar: f64) -> Result<BigComplex> {
        let prec = a.precision();
        let mut v = BigComplex::from_i64(self.sign as i64, prec);
        for f in &self.numerator {
            v = &v * &f.sin(a, eta, eta_p, hbar);
        }
        for f in &self.denominator {
            let s = f.sin(a, eta, eta_p, hbar);
            if s.abs_f64() < 1e-30 {
                return Err(Error::Pole(format!("{f} vanishes")));
            }
            v = &v / &s;
        }
        Ok(v)
    }

    /// Every sine replaced by its argument `orient·(u-v) + shift·ħ`.
    pub fn eval_rational(&self, a: &BigComplex, hbar: f64) -> Result<BigComplex> {
        let prec = a.precision();
        let mut v = BigComplex::from_i64(self.sign as i64, prec);
        for f in &self.numerator {
            v = &v * &f.arg(a, hbar);
        }
        for f in &self.denominator {
            let s = f.arg(a, hbar);
            if s.abs_f64() < 1e-30 {
                return Err(Error::Pole(format!("rational factor of {f} vanishes")));
            }
            v = &v / &s;
        }
        Ok(v)
    }

    /// Smallest `|sin|` over all factors, for pole avoidance.
    pub fn min_factor(&self, a: &BigComplex, eta: f64, eta_p: f64, hbar: f64) -> f64 {
        self.numerator
            .iter()
            .chain(&self.denominator)
            .map(|f| f.sin(a, eta, eta_p, hbar).abs_f64())
            .fold(f64::INFINITY, f64::min)
    }

    /// `(prime, sign)` with `f(a + 1/(2η_*)) = sign·f(a)` when every factor
    /// uses the same `η_*` at the standard frequency.
    pub fn antiperiod(&self) -> Option<(bool, i8)> {
        let all: Vec<&SineFactor> = self.numerator.iter().chain(&self.denominator).collect();
        let prime = all.first()?.prime;
        if all.iter().any(|f| f.prime != prime || f.scale != 2.0) {
            return None;
        }
        // each factor flips sign, whatever its orientation
        Some((prime, if all.len().is_multiple_of(2) { 1 } else { -1 }))
    }

    pub fn render(&self) -> String {
        let j = |v: &[SineFactor]| v.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" * ");
        format!("{}[{}] / [{}]", if self.sign < 0 { "-" } else { "" }, j(&self.numerator), j(&self.denominator))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitParams {
    pub u_minus_v: (f64, f64),
    pub eta: f64,
    pub hbar: f64,
    pub level: i64,
    pub eta_prime: f64,
    /// `k` in `1/η′ - 1/η = k·ħc`.
    pub eta_prime_factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub params: LimitParams,
    pub epsilons: Vec<f64>,
    pub errors: Vec<f64>,
    pub empirical_orders: Vec<f64>,
    pub prefactor_log: Vec<String>,
    pub verdict: crate::report::Verdict,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// Minimum empirical order accepted.
pub const MIN_ORDER: f64 = 0.8;

/// Default `ε` ladder.
pub const EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Compares the elliptic structure function `elliptic` against `target`
/// along the `ε` ladder. Errors are absolute.
#[allow(clippy::too_many_arguments)]
pub fn limit_check(
    elliptic: &StructureFunction,
    target: &TrigStructureFunction,
    u_minus_v: (f64, f64),
    eta: f64,
    hbar: f64,
    level: i64,
    epsilons: &[f64],
    eta_prime_factor: f64,
    digits: u32,
) -> Result<ConvergenceReport> {
    if epsilons.len() < 3 {
        return Err(Error::Usage("limit_check needs at least 3 epsilon values".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) || epsilons.iter().any(|e| *e <= 0.0) {
        return Err(Error::Usage("epsilons must be positive and strictly decreasing".into()));
    }
    let prec = Precision::digits(digits);
    let eta_p = eta_prime_scaled(eta, hbar, level, eta_prime_factor)?;
    let a = BigComplex::from_f64(u_minus_v.0, u_minus_v.1, prec);
    let limit = target.eval(&a, eta, eta_p, hbar)?;
    let values: Vec<Result<BigComplex>> = epsilons
        .par_iter()
        .map(|&epsilon| {
            let sp = ScalingParams { epsilon, hbar, eta, u_minus_v, level };
            let np = sp.elliptic(prec);
            elliptic.eval(&sp.x(prec), &np).map_err(|e| match e {
                Error::Pole(m) => Error::Pole(m),
                other => Error::Domain(format!(
                    "modular theta evaluation failed at eps = {epsilon} (nome e^(-2eps/eta) = {:e}): {other}",
                    (-2.0 * epsilon / eta).exp()
                )),
            })
        })
        .collect();
    let mut errors = Vec::new();
    let mut prefactor_log = Vec::new();
    for (eps, v) in epsilons.iter().zip(values) {
        let v = v?;
        errors.push((&v - &limit).abs_f64());
        let ratio = &v / &limit;
        prefactor_log.push(format!("eps={eps}: elliptic/limit = {:.6e}{:+.6e}i", ratio.re_f64(), ratio.im_f64()));
    }
    let empirical_orders: Vec<f64> =
        (0..errors.len() - 1).map(|i| (errors[i] / errors[i + 1]).ln() / (epsilons[i] / epsilons[i + 1]).ln()).collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let ok = decreasing && empirical_orders.iter().all(|o| *o >= MIN_ORDER);
    Ok(ConvergenceReport {
        name: target.name.clone(),
        params: LimitParams { u_minus_v, eta, hbar, level, eta_prime: eta_p, eta_prime_factor },
        epsilons: epsilons.to_vec(),
        errors,
        empirical_orders,
        prefactor_log,
        verdict: crate::report::Verdict::from_bool(ok),
    })
}

/// The six named structure functions, with `H^±` sign variants separate.
pub const LIMIT_IDS: [RelationId; 8] = [
    RelationId::HpE,
    RelationId::HmE,
    RelationId::HpF,
    RelationId::HmF,
    RelationId::HpHp,
    RelationId::HpHm,
    RelationId::EE,
    RelationId::FF,
];

/// A seeded `(u - v, η, ħ)` sample away from every sine zero of every target.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitSample {
    pub u_minus_v: (f64, f64),
    pub eta: f64,
    pub hbar: f64,
}

pub fn limit_samples(seed: u64, count: usize, level: i64, digits: u32) -> Result<Vec<LimitSample>> {
    use rand::Rng;
    let prec = Precision::digits(digits);
    let mut r = rng(seed, stream::LIMITS);
    let mut targets = Vec::new();
    for id in LIMIT_IDS {
        targets.push(TrigStructureFunction::target(id, Mode::Corrected, level)?);
        targets.push(TrigStructureFunction::printed(id, level)?);
    }
    let mut out = Vec::new();
    while out.len() < count {
        let s = LimitSample {
            u_minus_v: (r.gen_range(0.2..0.6), r.gen_range(-0.1..0.1)),
            eta: r.gen_range(0.15..0.35),
            hbar: r.gen_range(0.1..0.3),
        };
        let a = BigComplex::from_f64(s.u_minus_v.0, s.u_minus_v.1, prec);
        let mut ok = true;
        for k in [1.0, 4.0] {
            let ep = eta_prime_scaled(s.eta, s.hbar, level, k)?;
            ok &= targets.iter().all(|t| t.min_factor(&a, s.eta, ep, s.hbar) > 0.05);
        }
        if ok {
            out.push(s);
        }
    }
    Ok(out)
}

/// `K(η) = |trig(η) - rational| / η²` at each `η` in `etas`.
pub fn trig_rational_constants(
    f: &TrigStructureFunction,
    u_minus_v: (f64, f64),
    hbar: f64,
    level: i64,
    etas: &[f64],
    digits: u32,
) -> Result<Vec<f64>> {
    let prec = Precision::digits(digits);
    let a = BigComplex::from_f64(u_minus_v.0, u_minus_v.1, prec);
    let rat = f.eval_rational(&a, hbar)?;
    etas.iter()
        .map(|&eta| {
            let ep = eta_prime(eta, hbar, level)?;
            let t = f.eval(&a, eta, ep, hbar)?;
            Ok((&t - &rat).abs_f64() / (eta * eta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_prime_examples() {
        assert_eq!(eta_prime(0.7, 0.3, 0).unwrap(), 0.7);
        assert_eq!(eta_prime(1.0, 1.0, 1).unwrap(), 0.5);
        assert_eq!(eta_prime(0.5, 2.0, 1).unwrap(), 0.25);
        assert!(eta_prime(0.0, 1.0, 1).is_err());
        assert!(eta_prime(-1.0, 1.0, 1).is_err());
        let ep = eta_prime(0.37, 0.21, 1).unwrap();
        assert!((1.0 / ep - 1.0 / 0.37 - 0.21).abs() < 1e-14);
    }

    #[test]
    fn ee_collapses_at_zero_hbar() {
        let prec = Precision::digits(30);
        let a = BigComplex::from_f64(0.31, 0.05, prec);
        let f = TrigStructureFunction::printed(RelationId::EE, 1).unwrap();
        let v = f.eval(&a, 0.3, 0.3, 0.0).unwrap();
        assert!(v.rel_diff(&BigComplex::from_i64(-1, prec), 0.0) < 1e-25);
        let r = f.eval_rational(&a, 0.0).unwrap();
        assert!(r.rel_diff(&BigComplex::from_i64(-1, prec), 0.0) < 1e-25);
    }

    #[test]
    fn corrected_matches_printed_on_e_side_except_typo() {
        let ee_c = TrigStructureFunction::target(RelationId::EE, Mode::Corrected, 1).unwrap();
        let ee_p = TrigStructureFunction::printed(RelationId::EE, 1).unwrap();
        let prec = Precision::digits(30);
        let a = BigComplex::from_f64(0.41, 0.02, prec);
        let x = ee_c.eval(&a, 0.3, 0.2, 0.2).unwrap();
        let y = ee_p.eval(&a, 0.3, 0.2, 0.2).unwrap();
        assert!(x.rel_diff(&y, 0.0) < 1e-25);
        // F side is the reciprocal pattern
        let ff_c = TrigStructureFunction::target(RelationId::FF, Mode::Corrected, 1).unwrap();
        let ff_p = TrigStructureFunction::printed(RelationId::FF, 1).unwrap();
        let x = ff_c.eval(&a, 0.3, 0.2, 0.2).unwrap();
        let y = ff_p.eval(&a, 0.3, 0.2, 0.2).unwrap();
        let prod = &x * &y;
        assert!(prod.rel_diff(&BigComplex::from_i64(1, prec), 0.0) < 1e-25);
        assert!(x.rel_diff(&y, 0.0) > 1e-3);
        let flipped = ff_p.eval(&(-&a), 0.3, 0.2, 0.2).unwrap();
        assert!(x.rel_diff(&flipped, 0.0) < 1e-25);
    }

    #[test]
    fn antiperiodicity() {
        let prec = Precision::digits(30);
        let (eta, hbar) = (0.27, 0.13);
        for id in [RelationId::EE, RelationId::HpE, RelationId::FF, RelationId::HmF] {
            let f = TrigStructureFunction::target(id, Mode::Corrected, 1).unwrap();
            let ep = eta_prime(eta, hbar, 1).unwrap();
            let (prime, sign) = f.antiperiod().unwrap();
            let period = 1.0 / (2.0 * if prime { ep } else { eta });
            let a = BigComplex::from_f64(0.33, 0.04, prec);
            let b = &a + &BigComplex::from_f64(period, 0.0, prec);
            let want = &f.eval(&a, eta, ep, hbar).unwrap() * &BigComplex::from_i64(sign as i64, prec);
            // the period itself is an f64
            assert!(f.eval(&b, eta, ep, hbar).unwrap().rel_diff(&want, 0.0) < 1e-12, "{id:?}");
        }
        assert!(TrigStructureFunction::target(RelationId::HpHp, Mode::Corrected, 1).unwrap().antiperiod().is_none());
    }

    #[test]
    fn ee_limit_converges() {
        let cat = relation_catalog(1, Mode::Corrected);
        let sf = cat.get(RelationId::EE).structure.clone().unwrap();
        let t = TrigStructureFunction::target(RelationId::EE, Mode::Corrected, 1).unwrap();
        let r = limit_check(&sf, &t, (0.4, 0.0), 0.25, 0.3, 1, &[0.1, 0.05, 0.025], 1.0, 30).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.empirical_orders.iter().all(|o| (o - 1.0).abs() < 0.1));
    }

    #[test]
    fn ef_terms() {
        let t = ef_trig_terms(0.25, RationalSign::Plus).unwrap();
        assert_eq!(t, [(1, 2.0), (-1, 2.0)]);
        assert_eq!(ef_trig_terms(0.25, RationalSign::Minus).unwrap()[1].1, -2.0);
    }

    #[test]
    fn bad_ladder_rejected() {
        let sf = StructureFunction::ee_at(0, 0);
        let t = TrigStructureFunction::printed(RelationId::EE, 1).unwrap();
        assert!(limit_check(&sf, &t, (0.4, 0.0), 0.25, 0.3, 1, &[0.1, 0.05], 1.0, 30).is_err());
        assert!(limit_check(&sf, &t, (0.4, 0.0), 0.25, 0.3, 1, &[0.1, 0.2, 0.05], 1.0, 30).is_err());
    }
}
