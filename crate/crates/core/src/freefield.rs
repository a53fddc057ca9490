//! Free boson realization at level one.
//!
//! Heisenberg modes `a_n` with
//! `[a_n, a_m] = (1/n)(qⁿ-q⁻ⁿ)((qp)ⁿ-(qp)⁻ⁿ)(pⁿ+p⁻ⁿ-1) δ_{n+m,0}`, fields
//! `φ(z) = Σ a_n z⁻ⁿ/(qⁿ-q⁻ⁿ)` and `ψ(z) = Σ a_n z⁻ⁿ/((qp)ⁿ-(qp)⁻ⁿ)`, and
//! vertex operators built from exponentials of them with the zero modes
//! `e^{kQ} z^{mP}`, `[P, Q] = 1`.
//!
//! Normal ordering puts positive modes to the right, `e^Q` to the left of
//! `z^P`. Commuting a zero-mode factor past a charge uses
//! `z^P e^{εQ} = e^{εQ} z^{P+ε}`.
//!
//! All argument shifts are integer powers of `s = p^{1/2}`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, structural, Error, Result};
use crate::exact::{pow_rat, Laurent, RatFn};
use crate::numeric::BigComplex;
use crate::qpoch::{product_eval, product_series, QPochFactor};
use crate::series::{render_rational, RatSeries};

/// Exact parameter values. `s = p^{1/2}` is carried explicitly so half-integer
/// p-powers stay rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationParams {
    q: BigRational,
    p: BigRational,
    s: Option<BigRational>,
    c: i64,
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl DeformationParams {
    /// Requires `0 < q < 1`, `0 < p < 1`. When `p` is a rational square its
    /// root is kept for half-integer shifts.
    pub fn new(q: BigRational, p: BigRational, c: i64) -> Result<Self> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if !(q > zero && q < one) {
            return Err(domain(format!("q = {} outside (0, 1)", render_rational(&q))));
        }
        if !(p > zero && p < one) {
            return Err(domain(format!("p = {} outside (0, 1)", render_rational(&p))));
        }
        let s = exact_sqrt(&p);
        Ok(DeformationParams { q, p, s, c })
    }

    /// Parameters from `q` and `s = p^{1/2}`.
    pub fn from_sqrt_p(q: BigRational, s: BigRational, c: i64) -> Result<Self> {
        Self::new(q, &s * &s, c)
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn level(&self) -> i64 {
        self.c
    }

    /// `p^{1/2}`, if rational.
    pub fn sqrt_p(&self) -> Result<&BigRational> {
        self.s.as_ref().ok_or_else(|| Error::Unsupported("p is not a rational square".into()))
    }

    /// `q̃ = q p^c`.
    pub fn qtilde(&self) -> BigRational {
        &self.q * pow_rat(&self.p, self.c)
    }

    /// `p^{k/2}`.
    pub fn p_half_pow(&self, k: i64) -> Result<BigRational> {
        if k % 2 == 0 {
            Ok(pow_rat(&self.p, k / 2))
        } else {
            Ok(pow_rat(self.sqrt_p()?, k))
        }
    }

    /// Evaluates a [`PMono`].
    pub fn mono(&self, m: PMono) -> Result<BigRational> {
        Ok(pow_rat(&self.q, m.q) * self.p_half_pow(m.p_half)?)
    }

    pub fn with_level(&self, c: i64) -> Self {
        DeformationParams { c, ..self.clone() }
    }
}

/// `q^q · p^{p_half/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PMono {
    pub q: i64,
    pub p_half: i64,
}

impl PMono {
    pub const ONE: PMono = PMono { q: 0, p_half: 0 };

    pub fn new(q: i64, p_half: i64) -> Self {
        PMono { q, p_half }
    }

    pub fn mul(self, o: PMono) -> PMono {
        PMono { q: self.q + o.q, p_half: self.p_half + o.p_half }
    }

    pub fn pow(self, k: i64) -> PMono {
        PMono { q: self.q * k, p_half: self.p_half * k }
    }
}

impl fmt::Display for PMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.q != 0 {
            parts.push(if self.q == 1 { "q".to_string() } else { format!("q^{}", self.q) });
        }
        if self.p_half != 0 {
            let e = if self.p_half % 2 == 0 {
                (self.p_half / 2).to_string()
            } else {
                format!("{}/2", self.p_half)
            };
            parts.push(if e == "1" { "p".to_string() } else { format!("p^{e}") });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FieldKind {
    Phi,
    Psi,
}

impl FieldKind {
    /// Mode normalization: `qⁿ - q⁻ⁿ` for φ, `(qp)ⁿ - (qp)⁻ⁿ` for ψ.
    pub fn norm(self, n: i64, params: &DeformationParams) -> BigRational {
        let base = match self {
            FieldKind::Phi => params.q.clone(),
            FieldKind::Psi => &params.q * &params.p,
        };
        pow_rat(&base, n) - pow_rat(&base, -n)
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Phi => "phi",
            FieldKind::Psi => "psi",
        }
    }
}

/// `[a_n, a_m]`.
pub fn mode_bracket(n: i64, m: i64, params: &DeformationParams) -> Result<BigRational> {
    if n == 0 {
        return Err(domain("mode_bracket: n = 0 is the zero mode"));
    }
    if n + m != 0 {
        return Ok(BigRational::zero());
    }
    let q = &params.q;
    let qp = &params.q * &params.p;
    let p = &params.p;
    let a = pow_rat(q, n) - pow_rat(q, -n);
    let b = pow_rat(&qp, n) - pow_rat(&qp, -n);
    let c = pow_rat(p, n) + pow_rat(p, -n) - BigRational::one();
    Ok(a * b * c / BigRational::from_integer(BigInt::from(n)))
}

/// Coefficient of `xⁿ` in `⟨A(z)B(w)⟩ = Σ_{n>0} [s^A_n, s^B_{-n}] (w/z)ⁿ`.
pub fn contraction_coeff(a: FieldKind, b: FieldKind, n: i64, params: &DeformationParams) -> Result<BigRational> {
    let br = mode_bracket(n, -n, params)?;
    Ok(br / (a.norm(n, params) * b.norm(-n, params)))
}

/// `⟨A(z)B(w)⟩` through order `N`, with `x` rescaled by `r`.
pub fn contraction_series_scaled(
    a: FieldKind,
    b: FieldKind,
    r: &BigRational,
    order: usize,
    params: &DeformationParams,
) -> Result<RatSeries> {
    let mut terms = vec![BigRational::zero()];
    let mut rn = BigRational::one();
    for n in 1..=order as i64 {
        rn *= r;
        terms.push(contraction_coeff(a, b, n, params)? * &rn);
    }
    Ok(RatSeries::from_terms("x", &BigRational::zero(), &terms, order))
}

pub fn contraction_series(a: FieldKind, b: FieldKind, order: usize, params: &DeformationParams) -> Result<RatSeries> {
    if order < 1 {
        return Err(domain("contraction series needs N ≥ 1"));
    }
    contraction_series_scaled(a, b, &BigRational::one(), order, params)
}

/// Symbolic `(coef·x | base)^power`; a base of `None` means the single
/// factor `1 - coef·x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SymFactor {
    pub coef: PMono,
    pub base: Option<PMono>,
    pub power: i8,
}

impl SymFactor {
    fn num(coef: PMono, base: PMono) -> Self {
        SymFactor { coef, base: Some(base), power: 1 }
    }
    fn den(coef: PMono, base: PMono) -> Self {
        SymFactor { coef, base: Some(base), power: -1 }
    }
    fn lin(coef: PMono, power: i8) -> Self {
        SymFactor { coef, base: None, power }
    }

    pub fn at(&self, params: &DeformationParams) -> Result<QPochFactor> {
        let base = match self.base {
            Some(b) => params.mono(b)?,
            None => BigRational::zero(),
        };
        QPochFactor::new(params.mono(self.coef)?, base, self.power)
    }

    fn scaled(self, r: PMono) -> Self {
        SymFactor { coef: self.coef.mul(r), ..self }
    }

    fn inverted(self) -> Self {
        SymFactor { power: -self.power, ..self }
    }
}

impl fmt::Display for SymFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = if self.coef == PMono::ONE { "x".to_string() } else { format!("x {}", self.coef) };
        let body = match self.base {
            Some(b) => format!("({x} | {b})"),
            None => format!("(1 - {x})"),
        };
        if self.power == 1 {
            write!(f, "{body}")
        } else {
            write!(f, "{body}^-1")
        }
    }
}

/// Closed form of `exp⟨A(z)B(w)⟩` as written for the three field pairs.
pub fn closed_form_symbolic(a: FieldKind, b: FieldKind) -> Vec<SymFactor> {
    use FieldKind::*;
    let p = |k: i64| PMono::new(0, 2 * k);
    match (a, b) {
        (Phi, Phi) => {
            let base = PMono::new(2, 0);
            vec![
                SymFactor::num(p(-2), base),
                SymFactor::num(PMono::new(2, 2), base),
                SymFactor::num(PMono::ONE, base),
                SymFactor::den(PMono::new(2, 4), base),
                SymFactor::den(p(-1), base),
                SymFactor::den(base, base),
            ]
        }
        (Psi, Psi) => {
            let base = PMono::new(2, 4);
            vec![
                SymFactor::num(p(2), base),
                SymFactor::num(base.mul(p(-1)), base),
                SymFactor::num(PMono::ONE, base),
                SymFactor::den(base.mul(p(-2)), base),
                SymFactor::den(p(1), base),
                SymFactor::den(base, base),
            ]
        }
        _ => vec![SymFactor::lin(p(1), 1), SymFactor::lin(p(-1), 1), SymFactor::lin(PMono::ONE, -1)],
    }
}

/// The closed form evaluated at exact parameters.
pub fn exp_contraction_closed(a: FieldKind, b: FieldKind, params: &DeformationParams) -> Result<Vec<QPochFactor>> {
    closed_form_symbolic(a, b).iter().map(|f| f.at(params)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum OpLabel {
    Splus,
    Sminus,
    E,
    F,
    Hplus,
    Hminus,
    Custom(String),
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpLabel::Splus => write!(f, "S+"),
            OpLabel::Sminus => write!(f, "S-"),
            OpLabel::E => write!(f, "E"),
            OpLabel::F => write!(f, "F"),
            OpLabel::Hplus => write!(f, "H+"),
            OpLabel::Hminus => write!(f, "H-"),
            OpLabel::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// `±field(z·s^shift)` inside the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FieldTerm {
    pub kind: FieldKind,
    pub sign: i8,
    pub shift: i64,
}

/// `(z·s^shift)^{power·P}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MomentumFactor {
    pub shift: i64,
    pub power: i64,
}

/// A normal-ordered exponential
/// `s^const_spow · z^z_power · e^{charge·Q} Π (z s^a)^{m P} :exp(Σ ±field(z s^b)):`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexOperatorSpec {
    pub label: OpLabel,
    pub charge: i64,
    pub momentum: Vec<MomentumFactor>,
    pub field_terms: Vec<FieldTerm>,
    pub z_power: i64,
    pub const_spow: i64,
}

impl VertexOperatorSpec {
    pub fn s_plus() -> Self {
        VertexOperatorSpec {
            label: OpLabel::Splus,
            charge: 0,
            momentum: vec![],
            field_terms: vec![FieldTerm { kind: FieldKind::Phi, sign: 1, shift: 0 }],
            z_power: 0,
            const_spow: 0,
        }
    }

    pub fn s_minus() -> Self {
        VertexOperatorSpec {
            label: OpLabel::Sminus,
            charge: 0,
            momentum: vec![],
            field_terms: vec![FieldTerm { kind: FieldKind::Psi, sign: -1, shift: 0 }],
            z_power: 0,
            const_spow: 0,
        }
    }

    /// `E(z) = e^Q z^P S⁺(z)`.
    pub fn e() -> Self {
        VertexOperatorSpec {
            label: OpLabel::E,
            charge: 1,
            momentum: vec![MomentumFactor { shift: 0, power: 1 }],
            ..Self::s_plus()
        }
    }

    /// `F(z) = e^{-Q} z^{-P} S⁻(z)`.
    pub fn f() -> Self {
        VertexOperatorSpec {
            label: OpLabel::F,
            charge: -1,
            momentum: vec![MomentumFactor { shift: 0, power: -1 }],
            ..Self::s_minus()
        }
    }

    /// Net power of `P`.
    pub fn momentum(&self) -> i64 {
        self.momentum.iter().map(|m| m.power).sum()
    }

    /// Grassmann parity.
    pub fn parity(&self) -> u8 {
        self.charge.rem_euclid(2) as u8
    }

    /// The operator at argument `z·s^k`.
    pub fn at(&self, k: i64) -> Self {
        VertexOperatorSpec {
            label: self.label.clone(),
            charge: self.charge,
            momentum: self.momentum.iter().map(|m| MomentumFactor { shift: m.shift + k, ..*m }).collect(),
            field_terms: self.field_terms.iter().map(|t| FieldTerm { shift: t.shift + k, ..*t }).collect(),
            z_power: self.z_power,
            const_spow: self.const_spow + k * self.z_power,
        }
    }

    /// `:a b:` with both at the same variable; scalar prefactors multiply.
    pub fn normal_product(&self, other: &Self, label: OpLabel) -> Self {
        let mut momentum = self.momentum.clone();
        momentum.extend(other.momentum.iter().copied());
        let mut field_terms = self.field_terms.clone();
        field_terms.extend(other.field_terms.iter().copied());
        VertexOperatorSpec {
            label,
            charge: self.charge + other.charge,
            momentum,
            field_terms,
            z_power: self.z_power + other.z_power,
            const_spow: self.const_spow + other.const_spow,
        }
    }

    /// Canonical operator content: everything that determines the operator,
    /// with the label dropped and equal factors merged.
    pub fn content(&self) -> OperatorContent {
        let mut fields: Vec<(FieldKind, i64, i64)> = Vec::new();
        let mut sorted = self.field_terms.clone();
        sorted.sort();
        for t in sorted {
            match fields.last_mut() {
                Some(last) if last.0 == t.kind && last.1 == t.shift => last.2 += t.sign as i64,
                _ => fields.push((t.kind, t.shift, t.sign as i64)),
            }
        }
        fields.retain(|f| f.2 != 0);
        OperatorContent {
            charge: self.charge,
            p_power_z: self.momentum.iter().map(|m| m.power).sum(),
            p_power_s: self.momentum.iter().map(|m| m.power * m.shift).sum(),
            fields,
            z_power: self.z_power,
            const_spow: self.const_spow,
        }
    }
}

/// See [`VertexOperatorSpec::content`]. The momentum part
/// `Π (z s^a)^{mP}` is stored as `z^{(Σm)P} s^{(Σam)P}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperatorContent {
    pub charge: i64,
    pub p_power_z: i64,
    pub p_power_s: i64,
    pub fields: Vec<(FieldKind, i64, i64)>,
    pub z_power: i64,
    pub const_spow: i64,
}

impl OperatorContent {
    /// Equality of the operator parts, ignoring the scalar `s^k z^m` prefactor.
    pub fn same_operator(&self, other: &Self) -> bool {
        self.charge == other.charge
            && self.p_power_z == other.p_power_z
            && self.p_power_s == other.p_power_s
            && self.fields == other.fields
    }
}

/// `H^±(z) = z⁻¹ :E(z p^{±1/2}) F(z p^{∓1/2}):`.
pub fn build_h(sign: i8) -> VertexOperatorSpec {
    let (label, k) = if sign >= 0 { (OpLabel::Hplus, 1) } else { (OpLabel::Hminus, -1) };
    let mut h = VertexOperatorSpec::e().at(k).normal_product(&VertexOperatorSpec::f().at(-k), label);
    h.z_power -= 1;
    h
}

/// `G_{ab}(x·s^shift)^exponent`, one field-pair contraction factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairFactor {
    pub a: FieldKind,
    pub b: FieldKind,
    pub shift: i64,
    pub exponent: i8,
}

/// Scalar factor in `a(z) b(w) = K(z, w) :a(z) b(w):`, namely
/// `s^spow · z^z_power · Π G(x s^k)^{±1}` with `x = w/z`.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub z_power: i64,
    pub spow: i64,
    pub pairs: Vec<PairFactor>,
    pub series: RatSeries,
    pub closed_form: Vec<QPochFactor>,
    pub symbolic: Vec<SymFactor>,
}

impl Kernel {
    /// Numeric value at `(z, w)` from the closed form.
    pub fn eval(&self, z: &BigComplex, w: &BigComplex, params: &DeformationParams) -> Result<BigComplex> {
        let prec = z.precision();
        let x = w / z;
        let pre = BigComplex::from_rational(&params.p_half_pow(self.spow)?, prec);
        let mono = z.powi(self.z_power)?;
        Ok(&(&pre * &mono) * &product_eval(&self.closed_form, &x)?)
    }

    /// The closed form expanded to the kernel's order.
    pub fn closed_series(&self) -> Result<RatSeries> {
        product_series(&self.closed_form, self.series.order())
    }

    /// Symbolic factors with `(c x | b)/(c b x | b)` pairs collapsed to `(1 - c x)`.
    pub fn simplified_symbolic(&self) -> Vec<SymFactor> {
        simplify(&self.symbolic)
    }

    /// Stable multi-line text rendering.
    pub fn render(&self, coeffs: usize) -> String {
        let mut factors = self.simplified_symbolic();
        let mut z_power = self.z_power;
        let mut mono = String::new();
        // z·(1 - x) = (z - w)
        if z_power >= 1 {
            if let Some(i) = factors.iter().position(|f| f.base.is_none() && f.coef == PMono::ONE && f.power == 1) {
                factors.remove(i);
                z_power -= 1;
                mono.push_str("(z-w)");
            }
        }
        if z_power != 0 {
            if !mono.is_empty() {
                mono.push(' ');
            }
            mono.push_str(&format!("z^{}", z_power));
        }
        if self.spow != 0 {
            if !mono.is_empty() {
                mono.push(' ');
            }
            mono.push_str(&PMono::new(0, self.spow).to_string());
        }
        if mono.is_empty() {
            mono.push('1');
        }
        let num: Vec<String> = factors.iter().filter(|f| f.power == 1).map(|f| SymFactor { power: 1, ..*f }.to_string()).collect();
        let den: Vec<String> = factors.iter().filter(|f| f.power == -1).map(|f| SymFactor { power: 1, ..*f }.to_string()).collect();
        let mut out = String::new();
        out.push_str(&format!("monomial: {mono}\n"));
        out.push_str(&format!("numerator: {}\n", if num.is_empty() { "1".into() } else { num.join(" ") }));
        out.push_str(&format!("denominator: {}\n", if den.is_empty() { "1".into() } else { den.join(" ") }));
        for (n, c) in self.series.render_coeffs(coeffs).iter().enumerate() {
            out.push_str(&format!("x^{n}: {c}\n"));
        }
        out
    }
}

/// Cancels inverse pairs and collapses `(c x | b)(c b x | b)⁻¹ = (1 - c x)`.
pub fn simplify(factors: &[SymFactor]) -> Vec<SymFactor> {
    let mut fs: Vec<SymFactor> = factors.to_vec();
    loop {
        let mut changed = false;
        'outer: for i in 0..fs.len() {
            for j in 0..fs.len() {
                if i == j {
                    continue;
                }
                let (a, b) = (fs[i], fs[j]);
                if a.base == b.base && a.coef == b.coef && a.power == -b.power {
                    let (hi, lo) = (i.max(j), i.min(j));
                    fs.remove(hi);
                    fs.remove(lo);
                    changed = true;
                    break 'outer;
                }
                if let (Some(ba), Some(bb)) = (a.base, b.base) {
                    if ba == bb && b.coef == a.coef.mul(ba) && a.power == -b.power {
                        let lin = SymFactor::lin(a.coef, a.power);
                        let (hi, lo) = (i.max(j), i.min(j));
                        fs.remove(hi);
                        fs.remove(lo);
                        fs.push(lin);
                        changed = true;
                        break 'outer;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    fs.sort_by_key(|f| (-f.power, f.base.is_none(), f.base, f.coef));
    fs
}

/// `a(z) b(w) = K :a(z) b(w):`, with `a` at `z` and `b` at `w`.
pub fn ope_kernel(
    a: &VertexOperatorSpec,
    b: &VertexOperatorSpec,
    order: usize,
    params: &DeformationParams,
) -> Result<Kernel> {
    let mut pairs = Vec::new();
    for ta in &a.field_terms {
        for tb in &b.field_terms {
            let e = ta.sign * tb.sign;
            if e != 1 && e != -1 {
                return Err(structural("field term signs must be ±1"));
            }
            pairs.push(PairFactor { a: ta.kind, b: tb.kind, shift: tb.shift - ta.shift, exponent: e });
        }
    }
    // (z s^k)^{mP} e^{cQ} = e^{cQ} (z s^k)^{m(P + c)}
    let z_power = a.momentum.iter().map(|m| m.power * b.charge).sum();
    let spow = a.momentum.iter().map(|m| m.power * m.shift * b.charge).sum();

    // Π exp(±C) = exp(Σ ±C)
    let mut log_series = RatSeries::constant("x", BigRational::zero(), order);
    let mut symbolic = Vec::new();
    for pf in &pairs {
        let r = params.p_half_pow(pf.shift)?;
        let c = contraction_series_scaled(pf.a, pf.b, &r, order, params)?;
        log_series = if pf.exponent == 1 { log_series.add(&c)? } else { log_series.sub(&c)? };
        for f in closed_form_symbolic(pf.a, pf.b) {
            let f = f.scaled(PMono::new(0, pf.shift));
            symbolic.push(if pf.exponent == 1 { f } else { f.inverted() });
        }
    }
    let series = log_series.exp()?;
    let closed_form = symbolic.iter().map(|f| f.at(params)).collect::<Result<Vec<_>>>()?;
    Ok(Kernel { z_power, spow, pairs, series, closed_form, symbolic })
}

/// Rational kernel `prefactor · z^z_power · Π(1 - s^a x) / Π(1 - s^b x)`.
#[derive(Debug, Clone)]
pub struct RationalKernel {
    pub z_power: i64,
    pub prefactor: RatFn,
    pub num_roots: Vec<i64>,
    pub den_roots: Vec<i64>,
}

impl RationalKernel {
    /// Rational kernel of an OPE whose pairs are all mixed φψ contractions.
    pub fn from_kernel(k: &Kernel) -> Option<RationalKernel> {
        let mut num = Vec::new();
        let mut den = Vec::new();
        for f in simplify(&k.symbolic) {
            if f.base.is_some() || f.coef.q != 0 {
                return None;
            }
            if f.power == 1 {
                num.push(f.coef.p_half);
            } else {
                den.push(f.coef.p_half);
            }
        }
        Some(RationalKernel { z_power: k.z_power, prefactor: RatFn::s_pow(k.spow), num_roots: num, den_roots: den })
    }

    /// Value of `Π(1 - s^a x)/Π(1 - s^b x)` at exact `s`, `x`.
    pub fn eval_ratio(&self, s: &BigRational, x: &BigRational) -> Result<BigRational> {
        let mut v = BigRational::one();
        for a in &self.num_roots {
            v *= BigRational::one() - pow_rat(s, *a) * x;
        }
        for b in &self.den_roots {
            let d = BigRational::one() - pow_rat(s, *b) * x;
            if d.is_zero() {
                return Err(Error::Pole(format!("x = s^{}", -b)));
            }
            v /= d;
        }
        Ok(v)
    }
}

/// Which variable sits in the numerator of the delta argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Var {
    Z,
    W,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", match self { Var::Z => "z", Var::W => "w" })
    }
}

/// `coefficient · var^var_power · δ(num/(other·s^shift))`, where `num` is the
/// variable not equal to `var` when `shift > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    /// The variable in the numerator of the delta argument.
    pub numerator: Var,
    /// Argument shift exponent: `δ(numerator / (other · s^shift))`.
    pub shift: i64,
    pub coefficient: RatFn,
    /// The coefficient's remaining variable and its power.
    pub var: Var,
    pub var_power: i64,
}

impl fmt::Display for DeltaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let other = if self.numerator == Var::Z { Var::W } else { Var::Z };
        write!(
            f,
            "[{}] {}^{} delta({}/({} {}))",
            self.coefficient,
            self.var,
            self.var_power,
            self.numerator,
            other,
            PMono::new(0, self.shift)
        )
    }
}

/// Partial-fraction extraction of the delta terms in
/// `k(|x|<1) - k(|x|>1)`: a simple pole at `x = s^{-b}` contributes its
/// residue coefficient times `δ(s^b x)`. On the support the remaining
/// monomial `z^m` is rewritten in the variable not fixed by the delta.
pub fn delta_decompose(k: &RationalKernel) -> Result<Vec<DeltaTerm>> {
    let mut out = Vec::new();
    for (b, r) in pole_residues(k)? {
        // δ(s^b w/z): b ≥ 0 reads as δ(z/(w s^b)) with z = w s^b,
        // b < 0 as δ(w/(z s^{-b})) with z kept.
        let term = if b >= 0 {
            DeltaTerm {
                numerator: Var::Z,
                shift: b,
                coefficient: r.mul(&RatFn::s_pow(b * k.z_power)),
                var: Var::W,
                var_power: k.z_power,
            }
        } else {
            DeltaTerm { numerator: Var::W, shift: -b, coefficient: r, var: Var::Z, var_power: k.z_power }
        };
        out.push(term);
    }
    Ok(out)
}

/// Pairs `(b, r)`: the simple pole at `x = s^{-b}` contributes `r·δ(s^b x)`,
/// `r` including the prefactor but not `z^z_power`.
pub fn pole_residues(k: &RationalKernel) -> Result<Vec<(i64, RatFn)>> {
    let (num, den) = cancel_roots(&k.num_roots, &k.den_roots);
    let mut sorted = den.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Unsupported("higher-order pole in delta_decompose".into()));
    }
    let mut out = Vec::new();
    for (j, b) in den.iter().enumerate() {
        // residue of 1/(1 - s^b x): Π(1 - s^{a-b}) / Π_{k≠j}(1 - s^{c-b})
        let mut r = k.prefactor.clone();
        for a in &num {
            r = r.mul(&RatFn::from_laurent(Laurent::one().sub(&Laurent::s_pow(a - b))));
        }
        for (i, c) in den.iter().enumerate() {
            if i != j {
                r = r.div(&RatFn::from_laurent(Laurent::one().sub(&Laurent::s_pow(c - b))))?;
            }
        }
        out.push((*b, r));
    }
    Ok(out)
}

fn cancel_roots(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut num = num.to_vec();
    let mut den_out = Vec::new();
    for d in den {
        if let Some(i) = num.iter().position(|a| a == d) {
            num.remove(i);
        } else {
            den_out.push(*d);
        }
    }
    (num, den_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn params() -> DeformationParams {
        DeformationParams::from_sqrt_p(rat(1, 2), rat(1, 3), 1).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let pp = DeformationParams::new(rat(1, 2), rat(1, 3), 1).unwrap();
        assert_eq!(mode_bracket(1, 1, &pp).unwrap(), rat(0, 1));
        assert_eq!(mode_bracket(1, -1, &pp).unwrap(), rat(245, 12));
        assert!(matches!(mode_bracket(0, 0, &pp), Err(Error::Domain(_))));
    }

    #[test]
    fn params_validation() {
        assert!(DeformationParams::new(rat(3, 2), rat(1, 3), 1).is_err());
        assert!(DeformationParams::new(rat(1, 2), rat(0, 1), 1).is_err());
        let pp = DeformationParams::new(rat(1, 2), rat(1, 3), 1).unwrap();
        assert!(pp.sqrt_p().is_err());
        assert_eq!(params().qtilde(), rat(1, 18));
    }

    #[test]
    fn mixed_contraction_first_coeff() {
        let pp = params();
        let c = contraction_series(FieldKind::Phi, FieldKind::Psi, 3, &pp).unwrap();
        let p = pp.p().clone();
        assert_eq!(c.coeff(1), &-(&p + num_traits::Inv::inv(p.clone()) - BigRational::one()));
        assert!(c.coeff(0).is_zero());
    }

    #[test]
    fn parities_and_shapes() {
        assert_eq!(VertexOperatorSpec::e().parity(), 1);
        assert_eq!(VertexOperatorSpec::f().parity(), 1);
        assert_eq!(build_h(1).parity(), 0);
        assert_eq!(build_h(-1).parity(), 0);
        assert_eq!(VertexOperatorSpec::e().momentum(), 1);
        assert_eq!(VertexOperatorSpec::f().momentum(), -1);
        let h = build_h(1);
        let shifts: Vec<_> = h.field_terms.iter().map(|t| (t.kind, t.shift)).collect();
        assert_eq!(shifts, vec![(FieldKind::Phi, 1), (FieldKind::Psi, -1)]);
    }

    #[test]
    fn simplify_collapses_pairs() {
        let fs = closed_form_symbolic(FieldKind::Phi, FieldKind::Phi);
        let s = simplify(&fs);
        assert_eq!(s.len(), 5);
        assert!(s.contains(&SymFactor::lin(PMono::ONE, 1)));
    }

    #[test]
    fn ef_kernel_is_rational() {
        let k = ope_kernel(&VertexOperatorSpec::e(), &VertexOperatorSpec::f(), 6, &params()).unwrap();
        assert_eq!(k.z_power, -1);
        let r = RationalKernel::from_kernel(&k).unwrap();
        assert_eq!(r.num_roots, vec![0]);
        let mut d = r.den_roots.clone();
        d.sort();
        assert_eq!(d, vec![-2, 2]);
    }

    #[test]
    fn polynomial_kernel_has_no_deltas() {
        let k = RationalKernel { z_power: 0, prefactor: RatFn::s_pow(0), num_roots: vec![1, 3], den_roots: vec![] };
        assert!(delta_decompose(&k).unwrap().is_empty());
        let dbl = RationalKernel { z_power: 0, prefactor: RatFn::s_pow(0), num_roots: vec![], den_roots: vec![1, 1] };
        assert!(matches!(delta_decompose(&dbl), Err(Error::Unsupported(_))));
    }
}
