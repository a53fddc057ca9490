//! Exchange-relation catalog with elliptic structure functions, and the
//! checks that the level-one free boson currents satisfy it.
//!
//! A relation `A(z) B(w) = f(w/z) B'(w) A'(z)` is checked as the scalar
//! identity `K_{AB}(z, w) = f(x) K_{B'A'}(w, z)` between OPE kernels. That is
//! sufficient when the normal-ordered parts `:A(z)B(w):` and `:B'(w)A'(z):`
//! coincide, which is checked separately on operator content.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{pow_rat, Laurent, RatFn};
use crate::freefield::{
    build_h, delta_decompose, ope_kernel, pole_residues, DeformationParams, DeltaTerm, Kernel, OperatorContent,
    RationalKernel, Var, VertexOperatorSpec,
};
use crate::numeric::{BigComplex, Precision};
use crate::qpoch::QPochFactor;
use crate::report::{SamplePoint, VerificationReport};
use crate::sampling::{annulus_point, rng, stream};
use crate::series::render_rational;
use crate::theta::{theta, theta_modular};

/// Distance below which a point counts as sitting on a zero or pole.
pub const ZERO_GUARD: f64 = 1e-6;
const MAX_RESAMPLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Current {
    Hplus,
    Hminus,
    E,
    F,
}

impl Current {
    pub fn spec(self) -> VertexOperatorSpec {
        match self {
            Current::Hplus => build_h(1),
            Current::Hminus => build_h(-1),
            Current::E => VertexOperatorSpec::e(),
            Current::F => VertexOperatorSpec::f(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Current::Hplus => "H+",
            Current::Hminus => "H-",
            Current::E => "E",
            Current::F => "F",
        }
    }
}

/// Numeric parameter values for structure-function evaluation.
#[derive(Debug, Clone)]
pub struct NumParams {
    pub q: BigComplex,
    pub p: BigComplex,
    pub sqrt_p: BigComplex,
    pub c: i64,
    /// Route every theta through the modular evaluator.
    pub force_modular: bool,
}

impl NumParams {
    pub fn new(q: BigComplex, p: BigComplex, c: i64) -> Self {
        let sqrt_p = p.sqrt();
        NumParams { q, p, sqrt_p, c, force_modular: false }
    }

    pub fn from_exact(dp: &DeformationParams, prec: Precision) -> Self {
        let mut n = Self::new(BigComplex::from_rational(dp.q(), prec), BigComplex::from_rational(dp.p(), prec), dp.level());
        if let Ok(s) = dp.sqrt_p() {
            n.sqrt_p = BigComplex::from_rational(s, prec);
        }
        n
    }

    pub fn from_f64(q: f64, p: f64, c: i64, prec: Precision) -> Self {
        Self::new(BigComplex::from_f64(q, 0.0, prec), BigComplex::from_f64(p, 0.0, prec), c)
    }

    /// `p^{k/2}`.
    pub fn p_half_pow(&self, k: i64) -> Result<BigComplex> {
        self.sqrt_p.powi(k)
    }

    pub fn base(&self, b: ThetaBase) -> Result<BigComplex> {
        match b {
            ThetaBase::Q2 => self.q.powi(2),
            ThetaBase::QTilde2 => {
                let qt = &self.q * &self.p.powi(self.c)?;
                qt.powi(2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ThetaBase {
    /// `q²`
    Q2,
    /// `q̃² = (q p^c)²`
    QTilde2,
}

impl fmt::Display for ThetaBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaBase::Q2 => write!(f, "q^2"),
            ThetaBase::QTilde2 => write!(f, "qt^2"),
        }
    }
}

/// `θ_base(x^orient · p^{(p_half + c_half·c)/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ThetaArg {
    pub base: ThetaBase,
    pub orient: i8,
    pub p_half: i64,
    pub c_half: i64,
}

impl ThetaArg {
    pub fn x(base: ThetaBase, p_half: i64, c_half: i64) -> Self {
        ThetaArg { base, orient: 1, p_half, c_half }
    }

    pub fn inv_x(base: ThetaBase, p_half: i64, c_half: i64) -> Self {
        ThetaArg { base, orient: -1, p_half, c_half }
    }

    pub fn argument(&self, x: &BigComplex, np: &NumParams) -> Result<BigComplex> {
        let xo = if self.orient == 1 { x.clone() } else { x.recip()? };
        Ok(&xo * &np.p_half_pow(self.p_half + self.c_half * np.c)?)
    }

    fn shifted(self, p_half: i64, c_half: i64) -> Self {
        ThetaArg { p_half: self.p_half + p_half, c_half: self.c_half + c_half, ..self }
    }
}

fn render_p_exponent(p_half: i64, c_half: i64) -> String {
    let mut s = String::new();
    if p_half != 0 {
        s.push_str(&if p_half % 2 == 0 { (p_half / 2).to_string() } else { format!("{}/2", p_half) });
    }
    if c_half != 0 {
        let mag = c_half.abs();
        let term = match mag {
            1 => "c/2".to_string(),
            2 => "c".to_string(),
            m if m % 2 == 0 => format!("{}c", m / 2),
            m => format!("{}c/2", m),
        };
        if s.is_empty() {
            if c_half < 0 {
                s.push('-');
            }
        } else {
            s.push(if c_half < 0 { '-' } else { '+' });
        }
        s.push_str(&term);
    }
    s
}

impl fmt::Display for ThetaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = if self.orient == 1 { "x" } else { "x^-1" };
        let e = render_p_exponent(self.p_half, self.c_half);
        if e.is_empty() {
            write!(f, "theta_{}({})", self.base, x)
        } else {
            write!(f, "theta_{}({} p^({}))", self.base, x, e)
        }
    }
}

/// `sign · p^{(pref_p_half + pref_c_half·c)/2} · Π θ(num) / Π θ(den)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureFunction {
    pub sign: i8,
    pub pref_p_half: i64,
    pub pref_c_half: i64,
    pub numerator: Vec<ThetaArg>,
    pub denominator: Vec<ThetaArg>,
}

/// Orientation-normalized form used for exact comparison of two displays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub sign: i8,
    pub pref_p_half: i64,
    pub pref_c_half: i64,
    pub x_power: i64,
    pub numerator: Vec<ThetaArg>,
    pub denominator: Vec<ThetaArg>,
}

impl StructureFunction {
    pub fn unit() -> Self {
        StructureFunction { sign: 1, pref_p_half: 0, pref_c_half: 0, numerator: vec![], denominator: vec![] }
    }

    /// `f_EE(y) = -p θ(y p⁻²) θ(y p) / (θ(y p²) θ(y p⁻¹))`, base `q²`, at `y = x p^{shift}`.
    pub fn ee_at(p_half: i64, c_half: i64) -> Self {
        let b = ThetaBase::Q2;
        let a = |k: i64| ThetaArg::x(b, 2 * k + p_half, c_half);
        StructureFunction {
            sign: -1,
            pref_p_half: 2,
            pref_c_half: 0,
            numerator: vec![a(-2), a(1)],
            denominator: vec![a(2), a(-1)],
        }
    }

    /// `f_FF(y) = -p⁻¹ θ(y p²) θ(y p⁻¹) / (θ(y p⁻²) θ(y p))`, base `q̃²`.
    pub fn ff_at(p_half: i64, c_half: i64) -> Self {
        let b = ThetaBase::QTilde2;
        let a = |k: i64| ThetaArg::x(b, 2 * k + p_half, c_half);
        StructureFunction {
            sign: -1,
            pref_p_half: -2,
            pref_c_half: 0,
            numerator: vec![a(2), a(-1)],
            denominator: vec![a(-2), a(1)],
        }
    }

    pub fn neg(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut numerator = self.numerator.clone();
        numerator.extend(o.numerator.iter().copied());
        let mut denominator = self.denominator.clone();
        denominator.extend(o.denominator.iter().copied());
        StructureFunction {
            sign: self.sign * o.sign,
            pref_p_half: self.pref_p_half + o.pref_p_half,
            pref_c_half: self.pref_c_half + o.pref_c_half,
            numerator,
            denominator,
        }
    }

    /// `y ↦ 1/f(1/y)`, the structure function of the swapped relation.
    pub fn inverse_swap(&self) -> Self {
        let flip = |a: &ThetaArg| ThetaArg { orient: -a.orient, ..*a };
        StructureFunction {
            sign: self.sign,
            pref_p_half: -self.pref_p_half,
            pref_c_half: -self.pref_c_half,
            numerator: self.denominator.iter().map(flip).collect(),
            denominator: self.numerator.iter().map(flip).collect(),
        }
    }

    /// Rewrites every `θ_B(x⁻¹ a)` as `-(a/x) θ_B(x/a)`, using
    /// `θ_B(B/y) = θ_B(y)` and `θ_B(B y) = -y⁻¹ θ_B(y)`, then cancels
    /// common factors.
    pub fn normal_form(&self) -> NormalForm {
        let mut nf = NormalForm {
            sign: self.sign,
            pref_p_half: self.pref_p_half,
            pref_c_half: self.pref_c_half,
            x_power: 0,
            numerator: vec![],
            denominator: vec![],
        };
        for (list, dir) in [(&self.numerator, 1i64), (&self.denominator, -1i64)] {
            for a in list {
                let a = if a.orient == -1 {
                    nf.sign = -nf.sign;
                    nf.pref_p_half += dir * a.p_half;
                    nf.pref_c_half += dir * a.c_half;
                    nf.x_power -= dir;
                    ThetaArg::x(a.base, -a.p_half, -a.c_half)
                } else {
                    *a
                };
                if dir == 1 {
                    nf.numerator.push(a);
                } else {
                    nf.denominator.push(a);
                }
            }
        }
        let mut i = 0;
        while i < nf.numerator.len() {
            if let Some(j) = nf.denominator.iter().position(|d| *d == nf.numerator[i]) {
                nf.numerator.remove(i);
                nf.denominator.remove(j);
            } else {
                i += 1;
            }
        }
        nf.numerator.sort();
        nf.denominator.sort();
        nf
    }

    /// Shifts every argument by `p^{(p_half + c_half c)/2}` (x-oriented
    /// factors only) as in `f(x p^k)`.
    pub fn shifted(&self, p_half: i64, c_half: i64) -> Self {
        let sh = |a: &ThetaArg| if a.orient == 1 { a.shifted(p_half, c_half) } else { a.shifted(-p_half, -c_half) };
        StructureFunction {
            numerator: self.numerator.iter().map(sh).collect(),
            denominator: self.denominator.iter().map(sh).collect(),
            ..self.clone()
        }
    }

    /// Numeric value at `x`.
    pub fn eval(&self, x: &BigComplex, np: &NumParams) -> Result<BigComplex> {
        let th = |a: &ThetaArg| -> Result<BigComplex> {
            let y = a.argument(x, np)?;
            let b = np.base(a.base)?;
            if np.force_modular {
                theta_modular(&y, &b)
            } else {
                theta(&y, &b)
            }
        };
        let mut v = np.p_half_pow(self.pref_p_half + self.pref_c_half * np.c)?;
        if self.sign < 0 {
            v = -&v;
        }
        for a in &self.numerator {
            v = &v * &th(a)?;
        }
        for a in &self.denominator {
            let y = a.argument(x, np)?;
            if near_theta_zero(&y, &np.base(a.base)?) {
                return Err(Error::Pole(format!("denominator factor {a} vanishes")));
            }
            v = &v / &th(a)?;
        }
        Ok(v)
    }

    /// Whether any theta factor is within [`ZERO_GUARD`] of a zero at `x`.
    pub fn near_singular(&self, x: &BigComplex, np: &NumParams) -> bool {
        self.numerator.iter().chain(&self.denominator).any(|a| match (a.argument(x, np), np.base(a.base)) {
            (Ok(y), Ok(b)) => near_theta_zero(&y, &b),
            _ => true,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push(if self.sign < 0 { '-' } else { '+' });
        let e = render_p_exponent(self.pref_p_half, self.pref_c_half);
        s.push_str(&if e.is_empty() { "1".to_string() } else { format!("p^({e})") });
        let join = |v: &[ThetaArg]| {
            if v.is_empty() {
                "1".to_string()
            } else {
                v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
            }
        };
        format!("{s} * [{}] / [{}]", join(&self.numerator), join(&self.denominator))
    }
}

impl NormalForm {
    pub fn render(&self) -> String {
        let sf = StructureFunction {
            sign: self.sign,
            pref_p_half: self.pref_p_half,
            pref_c_half: self.pref_c_half,
            numerator: self.numerator.clone(),
            denominator: self.denominator.clone(),
        };
        match self.x_power {
            0 => sf.render(),
            k => format!("x^({k}) {}", sf.render()),
        }
    }
}

/// `θ_B(y) = 0` iff `y ∈ B^Z`.
pub fn near_theta_zero(y: &BigComplex, base: &BigComplex) -> bool {
    let ly = y.abs_f64().ln();
    let lb = base.abs_f64().ln();
    if !ly.is_finite() || !lb.is_finite() || lb == 0.0 {
        return true;
    }
    let k = (ly / lb).round() as i64;
    match base.powi(k) {
        Ok(bk) => (&(y / &bk) - &BigComplex::one(y.precision())).abs_f64() < ZERO_GUARD,
        Err(_) => true,
    }
}

fn near_qpoch_zero(f: &QPochFactor, x: &BigComplex) -> bool {
    let prec = x.precision();
    let one = BigComplex::one(prec);
    let mut t = &BigComplex::from_rational(&f.coef, prec) * x;
    let b = BigComplex::from_rational(&f.base, prec);
    for _ in 0..400 {
        if (&one - &t).abs_f64() < ZERO_GUARD {
            return true;
        }
        if t.abs_f64() < 0.5 || f.base.is_zero() {
            return false;
        }
        t = &t * &b;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    Exchange,
    AnticommutatorDelta,
}

/// Which rendering of the catalog is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Self-consistent catalog: the forms the level-one currents satisfy.
    Corrected,
    /// The displayed relations, character for character.
    StrictText,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", match self { Mode::Corrected => "corrected", Mode::StrictText => "strict-text" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RelationId {
    HpE,
    HmE,
    HpF,
    HmF,
    HpHp,
    HmHm,
    HpHm,
    EE,
    FF,
    EF,
}

impl RelationId {
    pub const ALL: [RelationId; 10] = [
        RelationId::HpE,
        RelationId::HmE,
        RelationId::HpF,
        RelationId::HmF,
        RelationId::HpHp,
        RelationId::HmHm,
        RelationId::HpHm,
        RelationId::EE,
        RelationId::FF,
        RelationId::EF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationId::HpE => "HpE",
            RelationId::HmE => "HmE",
            RelationId::HpF => "HpF",
            RelationId::HmF => "HmF",
            RelationId::HpHp => "HpHp",
            RelationId::HmHm => "HmHm",
            RelationId::HpHm => "HpHm",
            RelationId::EE => "EE",
            RelationId::FF => "FF",
            RelationId::EF => "EF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.name().eq_ignore_ascii_case(s))
    }
}

/// An expected delta term `coefficient · δ(num/(other p^{c})) · op(var p^{c/2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDelta {
    pub numerator: Var,
    /// Support shift in powers of `s = p^{1/2}`.
    pub shift: i64,
    pub coefficient: RatFn,
    pub op: Current,
    pub op_var: Var,
    pub op_shift: i64,
}

#[derive(Debug, Clone)]
pub struct RelationSpec {
    pub id: RelationId,
    pub kind: RelationKind,
    pub left: (Current, Current),
    /// Right-hand order `B'(w) A'(z)`.
    pub right: (Current, Current),
    pub structure: Option<StructureFunction>,
    pub delta_terms: Vec<ExpectedDelta>,
}

impl RelationSpec {
    pub fn render(&self) -> String {
        let (a, b) = self.left;
        let (rb, ra) = self.right;
        match &self.structure {
            Some(sf) => format!(
                "{}(z){}(w) = {} {}(w){}(z)",
                a.symbol(),
                b.symbol(),
                sf.render(),
                rb.symbol(),
                ra.symbol()
            ),
            None => {
                let terms: Vec<String> = self
                    .delta_terms
                    .iter()
                    .map(|d| {
                        let other = if d.numerator == Var::Z { Var::W } else { Var::Z };
                        format!(
                            "[{}] delta({}/({} s^{})) {}({} s^{})",
                            d.coefficient,
                            d.numerator,
                            other,
                            d.shift,
                            d.op.symbol(),
                            d.op_var,
                            d.op_shift
                        )
                    })
                    .collect();
                format!("{{E(z),F(w)}} = {}", terms.join(" + "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub mode: Mode,
    pub level: i64,
    pub relations: Vec<RelationSpec>,
    /// `H^±` are declared invertible.
    pub h_invertible: bool,
}

impl Catalog {
    pub fn get(&self, id: RelationId) -> &RelationSpec {
        self.relations.iter().find(|r| r.id == id).expect("catalog is complete")
    }
}

/// The ten relations at level `c`.
pub fn relation_catalog(level: i64, mode: Mode) -> Catalog {
    use Current::*;
    let strict = mode == Mode::StrictText;
    let ee = StructureFunction::ee_at;
    let ff = StructureFunction::ff_at;
    let exch = |id, left: (Current, Current), right, sf| RelationSpec {
        id,
        kind: RelationKind::Exchange,
        left,
        right,
        structure: Some(sf),
        delta_terms: vec![],
    };

    let hh_corrected = ee(0, 0).mul(&ff(0, 0));
    // θ_{q²}(xp⁻²)θ_{q²}(xp)/(θ_{q²}(xp²)θ_{q²}(xp⁻¹)) · θ_{q̃²}(xp²)θ_{q̃²}(x⁻¹p)/(θ_{q̃²}(x⁻¹p²)θ_{q̃²}(xp))
    let hh_text = |c_half: i64| {
        let q = ThetaBase::Q2;
        let t = ThetaBase::QTilde2;
        StructureFunction {
            sign: 1,
            pref_p_half: 0,
            pref_c_half: 0,
            numerator: vec![
                ThetaArg::x(q, -4, -c_half),
                ThetaArg::x(q, 2, -c_half),
                ThetaArg::x(t, 4, c_half),
                ThetaArg::inv_x(t, 2, c_half),
            ],
            denominator: vec![
                ThetaArg::x(q, 4, -c_half),
                ThetaArg::x(q, -2, -c_half),
                ThetaArg::inv_x(t, 4, c_half),
                ThetaArg::x(t, 2, c_half),
            ],
        }
    };

    let relations = vec![
        exch(RelationId::HpE, (Hplus, E), (E, Hplus), ee(0, -1).neg()),
        exch(RelationId::HmE, (Hminus, E), (E, if strict { Hplus } else { Hminus }), ee(0, 1).neg()),
        exch(RelationId::HpF, (Hplus, F), (F, Hplus), ff(0, if strict { -1 } else { 1 }).neg()),
        exch(RelationId::HmF, (Hminus, F), (F, Hminus), ff(0, if strict { 1 } else { -1 }).neg()),
        exch(RelationId::HpHp, (Hplus, Hplus), (Hplus, Hplus), if strict { hh_text(0) } else { hh_corrected.clone() }),
        exch(RelationId::HmHm, (Hminus, Hminus), (Hminus, Hminus), if strict { hh_text(0) } else { hh_corrected }),
        exch(
            RelationId::HpHm,
            (Hplus, Hminus),
            (Hminus, Hplus),
            if strict { hh_text(2) } else { ee(0, -2).mul(&ff(0, 2)) },
        ),
        exch(RelationId::EE, (E, E), (E, E), ee(0, 0)),
        exch(RelationId::FF, (F, F), (F, F), ff(0, 0)),
        RelationSpec {
            id: RelationId::EF,
            kind: RelationKind::AnticommutatorDelta,
            left: (E, F),
            right: (F, E),
            structure: None,
            delta_terms: expected_ef_terms(level),
        },
    ];
    Catalog { mode, level, relations, h_invertible: true }
}

/// `1/(p^{1/2} + p^{-1/2})`.
pub fn ef_coefficient() -> RatFn {
    RatFn::new(Laurent::one(), Laurent::s_pow(1).add(&Laurent::s_pow(-1))).expect("nonzero")
}

fn expected_ef_terms(level: i64) -> Vec<ExpectedDelta> {
    vec![
        ExpectedDelta {
            numerator: Var::Z,
            shift: 2 * level,
            coefficient: ef_coefficient(),
            op: Current::Hplus,
            op_var: Var::W,
            op_shift: level,
        },
        ExpectedDelta {
            numerator: Var::W,
            shift: 2 * level,
            coefficient: ef_coefficient(),
            op: Current::Hminus,
            op_var: Var::Z,
            op_shift: level,
        },
    ]
}

/// Settings shared by the numeric relation checks.
#[derive(Debug, Clone)]
pub struct ExchangeConfig {
    pub order: usize,
    pub samples: usize,
    pub digits: u32,
    pub tolerance: f64,
    pub seed: u64,
    pub params: Vec<DeformationParams>,
}

fn placed(a: &VertexOperatorSpec, b: &VertexOperatorSpec) -> Vec<(Var, OperatorContent)> {
    vec![(Var::Z, a.content()), (Var::W, b.content())]
}

struct PreparedPair {
    lhs: Kernel,
    rhs: Kernel,
    params: DeformationParams,
}

/// Checks `K_{AB}(z,w) = f(x) K_{B'A'}(w,z)` at `samples` seeded points,
/// with `f` from the relation unless `override_sf` is given.
pub fn verify_exchange(
    rel: &RelationSpec,
    mode: Mode,
    cfg: &ExchangeConfig,
    override_sf: Option<&StructureFunction>,
) -> Result<VerificationReport> {
    if rel.kind != RelationKind::Exchange {
        return Err(Error::Usage(format!("{} is not an exchange relation", rel.id.name())));
    }
    let sf = override_sf.or(rel.structure.as_ref()).expect("exchange relations carry a structure function");
    let prec = Precision::digits(cfg.digits);
    let (a, b) = (rel.left.0.spec(), rel.left.1.spec());
    let (rb, ra) = (rel.right.0.spec(), rel.right.1.spec());

    let mut report = VerificationReport::new(rel.id.name(), mode.to_string());
    report.seed = cfg.seed;
    report.order = cfg.order;
    report.digits = cfg.digits;

    let lhs_content = placed(&a, &b);
    let mut rhs_content = vec![(Var::W, rb.content()), (Var::Z, ra.content())];
    rhs_content.sort_by_key(|(v, _)| *v == Var::W);
    let ops_match = lhs_content.len() == rhs_content.len()
        && lhs_content.iter().zip(&rhs_content).all(|(l, r)| l.0 == r.0 && l.1.same_operator(&r.1));
    report.notes.push(
        "obligation: scalar kernel identity; normal-ordered parts compared on operator content".to_string(),
    );
    if !ops_match {
        report.notes.push(format!(
            "normal-ordered parts differ: :{}(z){}(w): vs :{}(w){}(z):",
            rel.left.0.symbol(),
            rel.left.1.symbol(),
            rel.right.0.symbol(),
            rel.right.1.symbol()
        ));
    }

    let prepared: Vec<PreparedPair> = cfg
        .params
        .iter()
        .map(|dp| {
            Ok(PreparedPair {
                lhs: ope_kernel(&a, &b, cfg.order, dp)?,
                rhs: ope_kernel(&rb, &ra, cfg.order, dp)?,
                params: dp.clone(),
            })
        })
        .collect::<Result<_>>()?;

    // Points are drawn sequentially, evaluated in parallel.
    let mut r = rng(cfg.seed, stream::EXCHANGE + rel.id as u64);
    let mut draws = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let pp = &prepared[i % prepared.len()];
        let np = NumParams::from_exact(&pp.params, prec);
        let mut tries = 0;
        let (x, z, clean) = loop {
            let x = annulus_point(&mut r, 0.1, 0.9, prec);
            let z = annulus_point(&mut r, 0.8, 1.25, prec);
            tries += 1;
            let xinv = x.recip()?;
            let bad = sf.near_singular(&x, &np)
                || pp.lhs.closed_form.iter().any(|f| near_qpoch_zero(f, &x))
                || pp.rhs.closed_form.iter().any(|f| near_qpoch_zero(f, &xinv));
            if !bad || tries >= MAX_RESAMPLE {
                break (x, z, !bad);
            }
        };
        draws.push((i, x, z, clean));
    }

    let evaluated: Vec<Result<(f64, SamplePoint)>> = draws
        .par_iter()
        .map(|(i, x, z, _)| {
            let pp = &prepared[i % prepared.len()];
            let np = NumParams::from_exact(&pp.params, prec);
            let w = z * x;
            let lhs = pp.lhs.eval(z, &w, &pp.params)?;
            let rhs = &sf.eval(x, &np)? * &pp.rhs.eval(&w, z, &pp.params)?;
            Ok((lhs.rel_diff(&rhs, 0.0), SamplePoint::new(x, z, pp.params.q(), pp.params.p())))
        })
        .collect();

    let mut residuals = Vec::new();
    for (e, d) in evaluated.into_iter().zip(&draws) {
        match e {
            Ok((res, pt)) => {
                residuals.push(res);
                report.points.push(pt);
            }
            Err(err) => {
                residuals.push(f64::NAN);
                report.witness = Some(format!("point {}: {err}", d.0));
            }
        }
        if !d.3 {
            report.notes.push(format!("point {} kept after {MAX_RESAMPLE} resamples", d.0));
        }
    }
    let mut report = report.with_residuals(&residuals, cfg.tolerance);
    if !ops_match {
        report.verdict = crate::report::Verdict::Fail;
    }
    if !report.passed() && report.witness.is_none() {
        if let Some((k, _)) = residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_nan())
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        {
            if let Some(pt) = report.points.get(k) {
                report.witness = Some(format!("x = {} + {}i, residual {:e}", pt.x[0], pt.x[1], residuals[k]));
            }
        }
    }
    Ok(report)
}

/// Runs [`verify_exchange`] for the swapped relation `B(w)A(z) = f̃(z/w) A(z)B(w)`
/// with `f̃(y) = 1/f(1/y)`.
pub fn verify_exchange_swapped(rel: &RelationSpec, mode: Mode, cfg: &ExchangeConfig) -> Result<VerificationReport> {
    let sf = rel.structure.as_ref().ok_or_else(|| Error::Usage("no structure function".into()))?;
    let swapped = RelationSpec {
        id: rel.id,
        kind: rel.kind,
        left: (rel.right.0, rel.right.1),
        right: (rel.left.0, rel.left.1),
        structure: Some(sf.inverse_swap()),
        delta_terms: vec![],
    };
    let mut r = verify_exchange(&swapped, mode, cfg, None)?;
    r.relation = format!("{}-swapped", rel.id.name());
    Ok(r)
}

/// The three displayed forms of the `{E, F}` delta expansion, each as a
/// list of delta terms with coefficients restricted to the support.
pub fn printed_ef_forms() -> Vec<(String, Vec<DeltaTerm>)> {
    let s = |k| RatFn::s_pow(k);
    let one = RatFn::constant(BigRational::one());
    // p - p⁻¹
    let pm = RatFn::from_laurent(Laurent::s_pow(2).sub(&Laurent::s_pow(-2)));
    let inv_pm = one.div(&pm).expect("nonzero");
    // Form 1: (z-w)/((p-p⁻¹) z w) [δ(z/(wp)) - δ(w/(zp))], restricted.
    // On z = w p: (p - 1)/(p w). On w = z p: -(1 - p)/(p z).
    let p_minus_1 = RatFn::from_laurent(Laurent::s_pow(2).sub(&Laurent::one()));
    let f1 = vec![
        DeltaTerm {
            numerator: Var::Z,
            shift: 2,
            coefficient: inv_pm.mul(&p_minus_1).mul(&s(-2)),
            var: Var::W,
            var_power: -1,
        },
        DeltaTerm {
            numerator: Var::W,
            shift: 2,
            coefficient: inv_pm.mul(&RatFn::from_laurent(Laurent::one().sub(&Laurent::s_pow(2)))).mul(&s(-2)).neg(),
            var: Var::Z,
            var_power: -1,
        },
    ];
    // Form 2: (1/(p-p⁻¹)) [(p-1)/(wp) δ(z/(wp)) + (p-1)/(zp) δ(w/(zp))]
    let c2 = inv_pm.mul(&p_minus_1).mul(&s(-2));
    let f2 = vec![
        DeltaTerm { numerator: Var::Z, shift: 2, coefficient: c2.clone(), var: Var::W, var_power: -1 },
        DeltaTerm { numerator: Var::W, shift: 2, coefficient: c2, var: Var::Z, var_power: -1 },
    ];
    // Form 3: 1/(p^{1/2}+p^{-1/2}) [(w p^{1/2})⁻¹ δ(z/(wp)) + (z p^{1/2})⁻¹ δ(w/(zp))]
    let c3 = ef_coefficient().mul(&s(-1));
    let f3 = vec![
        DeltaTerm { numerator: Var::Z, shift: 2, coefficient: c3.clone(), var: Var::W, var_power: -1 },
        DeltaTerm { numerator: Var::W, shift: 2, coefficient: c3, var: Var::Z, var_power: -1 },
    ];
    vec![("difference form".into(), f1), ("(p-1) form".into(), f2), ("symmetric form".into(), f3)]
}

fn same_terms(a: &[DeltaTerm], b: &[DeltaTerm]) -> bool {
    a.len() == b.len()
        && a.iter().all(|t| {
            b.iter().any(|u| {
                u.numerator == t.numerator
                    && u.shift == t.shift
                    && u.var == t.var
                    && u.var_power == t.var_power
                    && u.coefficient == t.coefficient
            })
        })
}

/// Exact check of the `{E(z), F(w)}` relation.
pub fn verify_ef(rel: &RelationSpec, mode: Mode, order: usize, params: &[DeformationParams], seed: u64) -> Result<VerificationReport> {
    if rel.kind != RelationKind::AnticommutatorDelta {
        return Err(Error::Usage(format!("{} is not the delta relation", rel.id.name())));
    }
    let mut report = VerificationReport::new(rel.id.name(), mode.to_string());
    report.seed = seed;
    report.order = order;
    let mut failures: Vec<String> = Vec::new();
    let e = VertexOperatorSpec::e();
    let f = VertexOperatorSpec::f();
    let dp0 = params.first().ok_or_else(|| Error::Usage("verify_ef needs a parameter sample".into()))?;

    let k_ef = ope_kernel(&e, &f, order, dp0)?;
    let k_fe = ope_kernel(&f, &e, order, dp0)?;
    let rk_ef = RationalKernel::from_kernel(&k_ef).ok_or_else(|| Error::Unsupported("E F kernel not rational".into()))?;
    let rk_fe = RationalKernel::from_kernel(&k_fe).ok_or_else(|| Error::Unsupported("F E kernel not rational".into()))?;
    if rk_ef.z_power != rk_fe.z_power {
        failures.push("zero-mode powers of the two orderings differ".into());
    }

    // K_FE(w, z) = -K_EF(z, w) at exact points.
    for dp in params {
        let s = dp.sqrt_p()?.clone();
        for (zn, wn) in [(3i64, 1i64), (2, 7), (5, 3), (11, 13)] {
            let z = BigRational::from_integer(BigInt::from(zn));
            let w = BigRational::from_integer(BigInt::from(wn)) / BigRational::from_integer(BigInt::from(4));
            let lhs = rk_ef.prefactor.eval(&s)? * pow_rat(&z, rk_ef.z_power) * rk_ef.eval_ratio(&s, &(&w / &z))?;
            let rhs = rk_fe.prefactor.eval(&s)? * pow_rat(&w, rk_fe.z_power) * rk_fe.eval_ratio(&s, &(&z / &w))?;
            if lhs != -rhs.clone() {
                failures.push(format!(
                    "K_FE(w,z) != -K_EF(z,w) at z={}, w={}",
                    render_rational(&z),
                    render_rational(&w)
                ));
            }
        }
    }

    let terms = delta_decompose(&rk_ef)?;
    for t in &terms {
        report.trace.push(format!("extracted: {t}"));
    }

    // Operator identification on each support.
    let mut identified = Vec::new();
    for t in &terms {
        // numerator Z, shift k: z = w s^k, everything in w; else w = z s^k.
        let (e_at, f_at) = if t.numerator == Var::Z { (t.shift, 0) } else { (0, t.shift) };
        let ef = e.at(e_at).normal_product(&f.at(f_at), crate::freefield::OpLabel::Custom(":EF:".into()));
        let Some(exp) = rel.delta_terms.iter().find(|d| d.numerator == t.numerator && d.shift == t.shift) else {
            failures.push(format!("unexpected delta support in {t}"));
            continue;
        };
        let h = exp.op.spec().at(exp.op_shift);
        let (ce, ch) = (ef.content(), h.content());
        if !ce.same_operator(&ch) {
            failures.push(format!("operator on support of {t} is not {}", exp.op.symbol()));
            continue;
        }
        // :EF: = s^{Δk} var^{Δm} H
        let coef = t.coefficient.mul(&RatFn::s_pow(ce.const_spow - ch.const_spow));
        let var_power = t.var_power + ce.z_power - ch.z_power;
        if var_power != 0 || !coef.equals(&exp.coefficient) || t.var != exp.op_var {
            failures.push(format!(
                "coefficient mismatch on {}: got [{}] {}^{}, expected [{}]",
                exp.op.symbol(),
                coef,
                t.var,
                var_power,
                exp.coefficient
            ));
        }
        report.trace.push(format!(
            "support {}/({} s^{}): [{}] {}({} s^{})",
            t.numerator,
            if t.numerator == Var::Z { "w" } else { "z" },
            t.shift,
            coef,
            exp.op.symbol(),
            exp.op_var,
            exp.op_shift
        ));
        identified.push(exp.op);
    }
    if identified.len() != rel.delta_terms.len() {
        failures.push(format!("identified {} of {} delta terms", identified.len(), rel.delta_terms.len()));
    }

    // The displayed intermediate forms agree with the extracted terms.
    for (name, form) in printed_ef_forms() {
        if same_terms(&form, &terms) {
            report.notes.push(format!("{name} agrees with the extraction"));
        } else {
            failures.push(format!("{name} disagrees with the extraction"));
        }
    }

    // Brute-force bilateral sum: coefficients of x^n, |n| ≤ N.
    let residues = pole_residues(&rk_ef)?;
    for dp in params {
        let s = dp.sqrt_p()?.clone();
        let ke = ope_kernel(&e, &f, order, dp)?;
        let kf = ope_kernel(&f, &e, order, dp)?;
        let pre_e = dp.p_half_pow(ke.spow)?;
        let pre_f = dp.p_half_pow(kf.spow)?;
        let n_max = order as i64;
        for n in -n_max..=n_max {
            let mut got = BigRational::zero();
            if n >= 0 {
                got += &pre_e * ke.series.coeff(n as usize);
            }
            // w^{m} y^j with y = z/w: w^m = z^m x^m, y^j = x^{-j}
            let j = kf.z_power - n;
            if j >= 0 && (j as usize) <= order {
                got += &pre_f * kf.series.coeff(j as usize);
            }
            let mut want = BigRational::zero();
            for (b, r) in &residues {
                want += r.eval(&s)? * pow_rat(&pow_rat(&s, *b), n);
            }
            let in_range = n >= kf.z_power - n_max;
            if in_range && got != want {
                failures.push(format!("bilateral coefficient x^{n} differs"));
                break;
            }
        }
    }
    report.notes.push(format!("p = 1 coefficient: {}", render_rational(&ef_coefficient().eval(&BigRational::one())?)));
    report.witness = failures.first().cloned();
    report.notes.extend(failures.iter().skip(1).cloned());
    let residual = if failures.is_empty() { 0.0 } else { 1.0 };
    Ok(report.with_residuals(&[residual], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn cfg(samples: usize, digits: u32) -> ExchangeConfig {
        ExchangeConfig {
            order: 8,
            samples,
            digits,
            tolerance: 1e-20,
            seed: 11,
            params: vec![
                DeformationParams::from_sqrt_p(rat(1, 2), rat(2, 3), 1).unwrap(),
                DeformationParams::from_sqrt_p(rat(3, 5), rat(4, 5), 1).unwrap(),
            ],
        }
    }

    #[test]
    fn catalog_has_ten_relations_over_all_pairs() {
        let cat = relation_catalog(1, Mode::Corrected);
        assert_eq!(cat.relations.len(), 10);
        assert!(cat.h_invertible);
        let mut pairs: Vec<_> = cat
            .relations
            .iter()
            .map(|r| {
                let (a, b) = r.left;
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 10);
    }

    #[test]
    fn ee_and_ff_shapes() {
        let cat = relation_catalog(1, Mode::Corrected);
        let ee = cat.get(RelationId::EE).structure.clone().unwrap();
        assert_eq!((ee.sign, ee.pref_p_half), (-1, 2));
        assert!(ee.numerator.iter().chain(&ee.denominator).all(|a| a.base == ThetaBase::Q2 && a.orient == 1));
        let nums: Vec<_> = ee.numerator.iter().map(|a| a.p_half).collect();
        assert_eq!(nums, vec![-4, 2]);
        let ff = cat.get(RelationId::FF).structure.clone().unwrap();
        assert_eq!((ff.sign, ff.pref_p_half), (-1, -2));
        assert!(ff.numerator.iter().all(|a| a.base == ThetaBase::QTilde2));
    }

    #[test]
    fn level_zero_collapses_hpm_onto_hh() {
        let cat = relation_catalog(0, Mode::Corrected);
        let np = NumParams::from_f64(0.4, 0.6, 0, Precision::digits(30));
        let x = BigComplex::from_f64(0.3, 0.2, Precision::digits(30));
        let a = cat.get(RelationId::HpHm).structure.as_ref().unwrap().eval(&x, &np).unwrap();
        let b = cat.get(RelationId::HpHp).structure.as_ref().unwrap().eval(&x, &np).unwrap();
        assert!(a.rel_diff(&b, 0.0) < 1e-28);
    }

    #[test]
    fn p_one_gives_prefactor() {
        let np = NumParams::from_f64(0.4, 1.0, 1, Precision::digits(30));
        let x = BigComplex::from_f64(0.3, 0.2, Precision::digits(30));
        for r in relation_catalog(1, Mode::Corrected).relations {
            if let Some(sf) = r.structure {
                let v = sf.eval(&x, &np).unwrap();
                let want = BigComplex::from_i64(sf.sign as i64, Precision::digits(30));
                assert!(v.rel_diff(&want, 0.0) < 1e-25, "{:?}", r.id);
            }
        }
    }

    #[test]
    fn golden_structure_values() {
        // independent mpmath triple products, 40 digits
        let prec = Precision::digits(40);
        let np = NumParams::new(BigComplex::parse("0.4", "0", prec), BigComplex::parse("0.5", "0", prec), 1);
        let x = BigComplex::parse("0.3", "0.1", prec);
        let ee = StructureFunction::ee_at(0, 0).eval(&x, &np).unwrap();
        let want = BigComplex::parse("0.1644289536052305626567415789699493135561", "0.03894978707985448901757645405187037551331", prec);
        assert!(ee.rel_diff(&want, 0.0) < 1e-35);
        let ff = StructureFunction::ff_at(0, 0).eval(&x, &np).unwrap();
        let want = BigComplex::parse("0.3778639576322161250010310168703941606137", "-1.478840518368105771286980846954525092721", prec);
        assert!(ff.rel_diff(&want, 0.0) < 1e-35);
    }

    #[test]
    fn mixed_ee_display_normalizes_to_pure_form() {
        // -θ(x p⁻²) θ(x⁻¹ p⁻¹) / (θ(x⁻¹ p⁻²) θ(x p⁻¹))
        let b = ThetaBase::Q2;
        let mixed = StructureFunction {
            sign: -1,
            pref_p_half: 0,
            pref_c_half: 0,
            numerator: vec![ThetaArg::x(b, -4, 0), ThetaArg::inv_x(b, -2, 0)],
            denominator: vec![ThetaArg::inv_x(b, -4, 0), ThetaArg::x(b, -2, 0)],
        };
        assert_eq!(mixed.normal_form(), StructureFunction::ee_at(0, 0).normal_form());
    }

    #[test]
    fn inverse_swap_is_involution() {
        let sf = StructureFunction::ee_at(0, -1).mul(&StructureFunction::ff_at(0, 2));
        assert_eq!(sf.inverse_swap().inverse_swap(), sf);
    }

    #[test]
    fn pole_is_reported() {
        let np = NumParams::from_f64(0.4, 0.25, 1, Precision::digits(30));
        // denominator θ_{q²}(x p²) vanishes at x = p⁻² q² = 2.56
        let x = BigComplex::from_f64(2.56, 0.0, Precision::digits(30));
        let err = StructureFunction::ee_at(0, 0).eval(&x, &np).unwrap_err();
        assert!(matches!(err, Error::Pole(_)));
    }

    #[test]
    fn ee_exchange_passes_and_control_fails() {
        let cat = relation_catalog(1, Mode::Corrected);
        let rel = cat.get(RelationId::EE);
        let r = verify_exchange(rel, Mode::Corrected, &cfg(4, 40), None).unwrap();
        assert!(r.passed(), "{r:?}");
        let bad = verify_exchange(rel, Mode::Corrected, &cfg(4, 40), Some(&StructureFunction::unit())).unwrap();
        assert!(!bad.passed() && bad.residual_max > 1e-2);
    }

    #[test]
    fn strict_hme_fails_on_operator_content() {
        let cat = relation_catalog(1, Mode::StrictText);
        let r = verify_exchange(cat.get(RelationId::HmE), Mode::StrictText, &cfg(3, 40), None).unwrap();
        assert!(!r.passed());
        assert!(r.notes.iter().any(|n| n.contains("differ")));
    }

    #[test]
    fn ef_relation_exact() {
        let cat = relation_catalog(1, Mode::Corrected);
        let c = cfg(1, 30);
        let r = verify_ef(cat.get(RelationId::EF), Mode::Corrected, 10, &c.params, 0).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(ef_coefficient().eval(&BigRational::one()).unwrap(), rat(1, 2));
    }
}
