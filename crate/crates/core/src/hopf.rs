//! The infinite Hopf family: graded tensor expressions over the algebras
//! `A_n`, the maps `Δ^±`, `ε`, `S^±`, `τ^±`, and exact checks of the
//! family axioms.
//!
//! Central elements live inside argument shifts as formal symbols `c_k`,
//! one per algebra index. A symbol `c_k` always means the central element of
//! the slot carrying index `k`. Applying a map to slot `n` therefore rewrites
//! `c_n` in every slot of the term.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{structural, Result};
use crate::report::{Verdict, VerificationReport};
use crate::series::render_rational;

fn ri(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

/// Exponent `a + Σ b_k c_k` in an argument `z·p^{…}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ShiftForm {
    pub constant: BigRational,
    pub central: BTreeMap<i64, BigRational>,
}

impl ShiftForm {
    pub fn zero() -> Self {
        ShiftForm { constant: BigRational::zero(), central: BTreeMap::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        ShiftForm { constant: c, central: BTreeMap::new() }
    }

    /// `coef · c_k`.
    pub fn c(k: i64, coef: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_c(k, coef);
        s
    }

    fn add_c(&mut self, k: i64, coef: BigRational) {
        let e = self.central.entry(k).or_insert_with(BigRational::zero);
        *e += coef;
        if e.is_zero() {
            self.central.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.central.is_empty()
    }

    pub fn add(&self, o: &ShiftForm) -> ShiftForm {
        let mut out = self.clone();
        out.constant += &o.constant;
        for (k, v) in &o.central {
            out.add_c(*k, v.clone());
        }
        out
    }

    pub fn scale(&self, f: &BigRational) -> ShiftForm {
        let mut out = ShiftForm::constant(&self.constant * f);
        for (k, v) in &self.central {
            out.add_c(*k, v * f);
        }
        out
    }

    /// Replaces `c_k` by the shift `by`.
    pub fn substitute(&self, k: i64, by: &ShiftForm) -> ShiftForm {
        match self.central.get(&k) {
            None => self.clone(),
            Some(coef) => {
                let mut rest = self.clone();
                rest.central.remove(&k);
                rest.add(&by.scale(coef))
            }
        }
    }

    /// Relabels every `c_k` to `c_{k+d}`.
    pub fn relabel(&self, d: i64) -> ShiftForm {
        ShiftForm {
            constant: self.constant.clone(),
            central: self.central.iter().map(|(k, v)| (k + d, v.clone())).collect(),
        }
    }
}

impl fmt::Display for ShiftForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (k, v) in &self.central {
            let mag = v.abs();
            let body = if mag.is_one() {
                format!("c_{k}")
            } else if mag.denom() == &BigInt::from(1) {
                format!("{}c_{k}", mag.numer())
            } else if mag.numer() == &BigInt::from(1) {
                format!("c_{k}/{}", mag.denom())
            } else {
                format!("{}c_{k}/{}", mag.numer(), mag.denom())
            };
            parts.push((v.is_negative(), body));
        }
        if !self.constant.is_zero() {
            parts.push((self.constant.is_negative(), render_rational(&self.constant.abs())));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        for (i, (neg, body)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, "+{body}")?,
            }
        }
        Ok(())
    }
}

/// `q^{(n)} = q·p^{nome_shift(n)}` with `q^{(0)} = q` and `q^{(n+1)} = q^{(n)} p^{c_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyIndex {
    pub n: i64,
}

impl FamilyIndex {
    pub fn new(n: i64) -> Self {
        FamilyIndex { n }
    }

    pub fn nome_shift(&self) -> ShiftForm {
        let mut s = ShiftForm::zero();
        if self.n >= 0 {
            for k in 0..self.n {
                s.add_c(k, BigRational::one());
            }
        } else {
            for k in self.n..0 {
                s.add_c(k, -BigRational::one());
            }
        }
        s
    }

    pub fn next(&self) -> Self {
        FamilyIndex { n: self.n + 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gen {
    Central,
    Hplus,
    Hminus,
    E,
    F,
}

impl Gen {
    pub fn parity(self) -> u8 {
        match self {
            Gen::E | Gen::F => 1,
            _ => 0,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Gen::Central => "c",
            Gen::Hplus => "H+",
            Gen::Hminus => "H-",
            Gen::E => "E",
            Gen::F => "F",
        }
    }
}

/// One generator factor `X(z p^shift; q^{(index)})`, possibly inverted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub gen: Gen,
    pub index: i64,
    pub shift: ShiftForm,
    pub inverted: bool,
}

impl Factor {
    pub fn new(gen: Gen, index: i64, shift: ShiftForm) -> Self {
        Factor { gen, index, shift, inverted: false }
    }

    pub fn inv(mut self) -> Self {
        self.inverted = !self.inverted;
        self
    }

    pub fn central(index: i64) -> Self {
        Factor::new(Gen::Central, index, ShiftForm::zero())
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gen == Gen::Central {
            return write!(f, "c_{}", self.index);
        }
        let arg = if self.shift.is_zero() { "z".to_string() } else { format!("z p^({})", self.shift) };
        write!(f, "{}({}; q^({}))", self.gen.symbol(), arg, self.index)?;
        if self.inverted {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

/// An ordered product of factors inside one slot.
pub type Word = Vec<Factor>;

pub fn word_parity(w: &[Factor]) -> u8 {
    (w.iter().map(|f| f.gen.parity() as u32).sum::<u32>() % 2) as u8
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub words: Vec<Word>,
    pub coef: BigRational,
}

/// `Σ coef · w_1 ⊗ … ⊗ w_k` over `A_{indices[0]} ⊗ … ⊗ A_{indices[k-1]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorExpr {
    pub indices: Vec<i64>,
    pub terms: Vec<Term>,
}

impl TensorExpr {
    pub fn zero(indices: Vec<i64>) -> Self {
        TensorExpr { indices, terms: vec![] }
    }

    pub fn scalar(indices: Vec<i64>, c: BigRational) -> Self {
        let words = vec![Vec::new(); indices.len()];
        TensorExpr { indices, terms: vec![Term { words, coef: c }] }.canonical()
    }

    pub fn unit(n: i64) -> Self {
        Self::scalar(vec![n], BigRational::one())
    }

    pub fn word(n: i64, w: Word) -> Self {
        TensorExpr { indices: vec![n], terms: vec![Term { words: vec![w], coef: BigRational::one() }] }
    }

    /// A generator at `z` in `A_n`; `Central` is the central element `c_n`.
    pub fn generator(gen: Gen, n: i64) -> Self {
        let f = if gen == Gen::Central { Factor::central(n) } else { Factor::new(gen, n, ShiftForm::zero()) };
        Self::word(n, vec![f])
    }

    pub fn slots(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().terms.is_empty()
    }

    pub fn add(&self, o: &TensorExpr) -> Result<TensorExpr> {
        if self.indices != o.indices {
            return Err(structural(format!("adding expressions over {:?} and {:?}", self.indices, o.indices)));
        }
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Ok(TensorExpr { indices: self.indices.clone(), terms }.canonical())
    }

    pub fn scale(&self, c: &BigRational) -> TensorExpr {
        TensorExpr {
            indices: self.indices.clone(),
            terms: self.terms.iter().map(|t| Term { words: t.words.clone(), coef: &t.coef * c }).collect(),
        }
        .canonical()
    }

    pub fn sub(&self, o: &TensorExpr) -> Result<TensorExpr> {
        self.add(&o.scale(&-BigRational::one()))
    }

    /// Graded product: `(a_1⊗…⊗a_k)(b_1⊗…⊗b_k)` picks up
    /// `(-1)^{π(a_j)π(b_i)}` for every `i < j`.
    pub fn mul(&self, o: &TensorExpr) -> Result<TensorExpr> {
        if self.indices != o.indices {
            return Err(structural(format!("multiplying expressions over {:?} and {:?}", self.indices, o.indices)));
        }
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                let mut sign = 0u32;
                for i in 0..b.words.len() {
                    let pb = word_parity(&b.words[i]) as u32;
                    for j in (i + 1)..a.words.len() {
                        sign += pb * word_parity(&a.words[j]) as u32;
                    }
                }
                let words = a
                    .words
                    .iter()
                    .zip(&b.words)
                    .map(|(x, y)| {
                        let mut w = x.clone();
                        w.extend(y.iter().cloned());
                        w
                    })
                    .collect();
                let mut coef = &a.coef * &b.coef;
                if sign % 2 == 1 {
                    coef = -coef;
                }
                terms.push(Term { words, coef });
            }
        }
        Ok(TensorExpr { indices: self.indices.clone(), terms }.canonical())
    }

    /// Graded tensor product of two expressions.
    pub fn tensor(&self, o: &TensorExpr) -> TensorExpr {
        let mut indices = self.indices.clone();
        indices.extend(o.indices.iter().copied());
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                let mut words = a.words.clone();
                words.extend(b.words.iter().cloned());
                terms.push(Term { words, coef: &a.coef * &b.coef });
            }
        }
        TensorExpr { indices, terms }.canonical()
    }

    fn map_shifts(&self, f: impl Fn(&ShiftForm) -> ShiftForm) -> TensorExpr {
        TensorExpr {
            indices: self.indices.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    words: t
                        .words
                        .iter()
                        .map(|w| w.iter().map(|x| Factor { shift: f(&x.shift), ..x.clone() }).collect())
                        .collect(),
                    coef: t.coef.clone(),
                })
                .collect(),
        }
    }

    /// Replaces `c_k` by `by` in every shift.
    pub fn substitute(&self, k: i64, by: &ShiftForm) -> TensorExpr {
        self.map_shifts(|s| s.substitute(k, by))
    }

    /// Confluent normal form: adjacent `X X⁻¹` pairs with equal shift and
    /// index cancel, equal tensor words merge, zero terms drop, terms sort.
    pub fn canonical(&self) -> TensorExpr {
        let mut merged: BTreeMap<Vec<Word>, BigRational> = BTreeMap::new();
        for t in &self.terms {
            let words: Vec<Word> = t.words.iter().map(|w| cancel_inverses(w)).collect();
            *merged.entry(words).or_insert_with(BigRational::zero) += &t.coef;
        }
        let mut terms: Vec<Term> =
            merged.into_iter().filter(|(_, c)| !c.is_zero()).map(|(words, coef)| Term { words, coef }).collect();
        terms.sort_by(|a, b| {
            let ka: Vec<u8> = a.words.iter().map(|w| word_parity(w)).collect();
            let kb: Vec<u8> = b.words.iter().map(|w| word_parity(w)).collect();
            kb.cmp(&ka).then_with(|| b.words.cmp(&a.words))
        });
        TensorExpr { indices: self.indices.clone(), terms }
    }

    pub fn render(&self) -> String {
        let c = self.canonical();
        if c.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, t) in c.terms.iter().enumerate() {
            let neg = t.coef.is_negative();
            let mag = t.coef.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let body: Vec<String> = t
                .words
                .iter()
                .map(|w| {
                    if w.is_empty() {
                        "1".to_string()
                    } else {
                        w.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")
                    }
                })
                .collect();
            let body = if body.is_empty() { "1".to_string() } else { body.join(" ⊗ ") };
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{} {}", render_rational(&mag), body));
            }
        }
        out
    }
}

impl fmt::Display for TensorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn cancel_inverses(w: &[Factor]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for f in w {
        if let Some(last) = out.last() {
            if last.gen == f.gen
                && last.gen != Gen::Central
                && last.index == f.index
                && last.shift == f.shift
                && last.inverted != f.inverted
            {
                out.pop();
                continue;
            }
        }
        out.push(f.clone());
    }
    out
}

/// The `H⁻ ↦ σH⁻` toggle on the coproduct and antipode formulas, and the
/// counit value on `H⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SignConvention {
    pub sigma_hminus: i8,
    pub counit_hminus: i8,
}

impl Default for SignConvention {
    fn default() -> Self {
        SignConvention { sigma_hminus: 1, counit_hminus: 1 }
    }
}

impl SignConvention {
    pub const ALL: [SignConvention; 4] = [
        SignConvention { sigma_hminus: 1, counit_hminus: 1 },
        SignConvention { sigma_hminus: 1, counit_hminus: -1 },
        SignConvention { sigma_hminus: -1, counit_hminus: 1 },
        SignConvention { sigma_hminus: -1, counit_hminus: -1 },
    ];

    pub fn new(sigma_hminus: i8, counit_hminus: i8) -> Result<Self> {
        if sigma_hminus.abs() != 1 || counit_hminus.abs() != 1 {
            return Err(structural("sign convention entries must be ±1"));
        }
        Ok(SignConvention { sigma_hminus, counit_hminus })
    }

    pub fn name(&self) -> String {
        format!("sigma={:+},counit={:+}", self.sigma_hminus, self.counit_hminus)
    }
}

fn check_slot(e: &TensorExpr, slot: usize) -> Result<i64> {
    e.indices.get(slot).copied().ok_or_else(|| structural(format!("slot {slot} out of range for {} slots", e.slots())))
}

fn check_dir(dir: i8) -> Result<()> {
    if dir == 1 || dir == -1 {
        Ok(())
    } else {
        Err(structural("direction must be ±1"))
    }
}

/// `Δ_n^±` of one factor over `A_L ⊗ A_R`, shifts already re-expanded.
fn coproduct_factor(f: &Factor, l: i64, r: i64, conv: SignConvention) -> Result<TensorExpr> {
    let s = &f.shift;
    let at = |g: Gen, idx: i64, extra: ShiftForm| Factor::new(g, idx, s.add(&extra));
    let one = BigRational::one();
    let cl = |k: BigRational| ShiftForm::c(l, k);
    let cr = |k: BigRational| ShiftForm::c(r, k);
    let pair = |a: Word, b: Word, c: BigRational| TensorExpr {
        indices: vec![l, r],
        terms: vec![Term { words: vec![a, b], coef: c }],
    };
    let sigma = ri(conv.sigma_hminus as i64);
    let out = match f.gen {
        Gen::Central => pair(vec![Factor::central(l)], vec![], one.clone())
            .add(&pair(vec![], vec![Factor::central(r)], one))?,
        Gen::Hplus => pair(vec![at(Gen::Hplus, l, cr(half()))], vec![at(Gen::Hplus, r, cl(-half()))], one),
        Gen::Hminus => {
            pair(vec![at(Gen::Hminus, l, cr(-half()))], vec![at(Gen::Hminus, r, cl(half()))], -sigma.clone())
        }
        Gen::E => pair(vec![at(Gen::E, l, ShiftForm::zero())], vec![], one).add(&pair(
            vec![at(Gen::Hminus, l, cl(half()))],
            vec![at(Gen::E, r, cl(BigRational::one()))],
            -sigma,
        ))?,
        Gen::F => pair(vec![], vec![at(Gen::F, r, ShiftForm::zero())], one.clone()).add(&pair(
            vec![at(Gen::F, l, cr(BigRational::one()))],
            vec![at(Gen::Hplus, r, cr(half()))],
            one,
        ))?,
    };
    if f.inverted {
        if !matches!(f.gen, Gen::Hplus | Gen::Hminus) {
            return Err(structural(format!("inverse of {} requested", f.gen.symbol())));
        }
        // (a ⊗ b)⁻¹ = a⁻¹ ⊗ b⁻¹ for even a, b
        let t = &out.terms[0];
        let words = t.words.iter().map(|w| w.iter().cloned().map(Factor::inv).collect()).collect();
        return Ok(TensorExpr { indices: out.indices, terms: vec![Term { words, coef: t.coef.recip() }] });
    }
    Ok(out)
}

/// Applies `Δ^±` to `slot`. The slot's central symbol `c_n` is re-expanded
/// to `c_L + c_R` throughout the term before the generator formulas act.
pub fn coproduct(e: &TensorExpr, slot: usize, dir: i8, conv: SignConvention) -> Result<TensorExpr> {
    check_dir(dir)?;
    let n = check_slot(e, slot)?;
    let (l, r) = if dir == 1 { (n, n + 1) } else { (n - 1, n) };
    let mut indices = e.indices.clone();
    indices.splice(slot..=slot, [l, r]);
    let mut seen = indices.clone();
    seen.sort();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(structural(format!("coproduct would repeat family index in {:?}", indices)));
    }
    let e = e.substitute(n, &ShiftForm::c(l, BigRational::one()).add(&ShiftForm::c(r, BigRational::one())));
    let mut acc = TensorExpr::zero(indices.clone());
    for t in &e.terms {
        // Δ(w) = Π Δ(f_i), multiplied in A_L ⊗ A_R
        let mut img = TensorExpr::scalar(vec![l, r], BigRational::one());
        for f in &t.words[slot] {
            if f.index != n {
                return Err(structural(format!("factor {f} in slot over A_{n}")));
            }
            img = img.mul(&coproduct_factor(f, l, r, conv)?)?;
        }
        for it in img.terms {
            let mut words = t.words.clone();
            words.splice(slot..=slot, it.words);
            acc.terms.push(Term { words, coef: &t.coef * &it.coef });
        }
    }
    Ok(acc.canonical())
}

/// Applies `ε_n` to `slot`, removing it; `c_n ↦ 0` throughout.
pub fn counit(e: &TensorExpr, slot: usize, conv: SignConvention) -> Result<TensorExpr> {
    let n = check_slot(e, slot)?;
    let e = e.substitute(n, &ShiftForm::zero());
    let mut indices = e.indices.clone();
    indices.remove(slot);
    let mut terms = Vec::new();
    'terms: for t in &e.terms {
        let mut v = t.coef.clone();
        for f in &t.words[slot] {
            match f.gen {
                Gen::Central | Gen::E | Gen::F => continue 'terms,
                Gen::Hplus => {}
                Gen::Hminus => {
                    if conv.counit_hminus < 0 {
                        v = -v;
                    }
                }
            }
        }
        let mut words = t.words.clone();
        words.remove(slot);
        terms.push(Term { words, coef: v });
    }
    Ok(TensorExpr { indices, terms }.canonical())
}

/// `S^±_n` on one factor into `A_T`, shifts already re-expanded.
fn antipode_factor(f: &Factor, t: i64, conv: SignConvention) -> Result<(BigRational, Word)> {
    let s = &f.shift;
    let at = |g: Gen, extra: ShiftForm| Factor::new(g, t, s.add(&extra));
    let ct = |k: BigRational| ShiftForm::c(t, k);
    let one = BigRational::one();
    if f.inverted {
        return match f.gen {
            Gen::Hplus | Gen::Hminus => Ok((one, vec![at(f.gen, ShiftForm::zero())])),
            _ => Err(structural(format!("antipode of a non-invertible inverse {}", f.gen.symbol()))),
        };
    }
    Ok(match f.gen {
        Gen::Central => (-one, vec![Factor::central(t)]),
        Gen::Hplus | Gen::Hminus => (one, vec![at(f.gen, ShiftForm::zero()).inv()]),
        Gen::E => (
            -ri(conv.sigma_hminus as i64),
            vec![at(Gen::Hminus, ct(-half())).inv(), at(Gen::E, ct(-BigRational::one()))],
        ),
        Gen::F => (one, vec![at(Gen::F, ct(-BigRational::one())), at(Gen::Hplus, ct(-half())).inv()]),
    })
}

/// Applies the antimorphism `S^±` to `slot`: `c_n ↦ -c_{n±1}` throughout,
/// factor order reversed with Koszul signs.
pub fn antipode(e: &TensorExpr, slot: usize, dir: i8, conv: SignConvention) -> Result<TensorExpr> {
    check_dir(dir)?;
    let n = check_slot(e, slot)?;
    let t_idx = n + dir as i64;
    let e = e.substitute(n, &ShiftForm::c(t_idx, -BigRational::one()));
    let mut indices = e.indices.clone();
    indices[slot] = t_idx;
    let mut terms = Vec::new();
    for t in &e.terms {
        let w = &t.words[slot];
        let mut coef = t.coef.clone();
        // reversing a graded word
        let odd = w.iter().filter(|f| f.gen.parity() == 1).count();
        if (odd * odd.saturating_sub(1) / 2) % 2 == 1 {
            coef = -coef;
        }
        let mut img = Word::new();
        for f in w.iter().rev() {
            if f.index != n {
                return Err(structural(format!("factor {f} in slot over A_{n}")));
            }
            let (c, part) = antipode_factor(f, t_idx, conv)?;
            coef *= c;
            img.extend(part);
        }
        let mut words = t.words.clone();
        words[slot] = img;
        terms.push(Term { words, coef });
    }
    Ok(TensorExpr { indices, terms }.canonical())
}

/// Super-multiplication of `slot` with `slot + 1` (same algebra).
pub fn multiply(e: &TensorExpr, slot: usize) -> Result<TensorExpr> {
    let a = check_slot(e, slot)?;
    let b = check_slot(e, slot + 1)?;
    if a != b {
        return Err(structural(format!("multiplying slots over A_{a} and A_{b}")));
    }
    let mut indices = e.indices.clone();
    indices.remove(slot + 1);
    let terms = e
        .terms
        .iter()
        .map(|t| {
            let mut words = t.words.clone();
            let tail = words.remove(slot + 1);
            words[slot].extend(tail);
            Term { words, coef: t.coef.clone() }
        })
        .collect();
    Ok(TensorExpr { indices, terms }.canonical())
}

/// `τ^±`: relabels a single-slot expression from `A_n` to `A_{n±1}`,
/// shifting every central label with it.
pub fn tau(e: &TensorExpr, dir: i8) -> Result<TensorExpr> {
    check_dir(dir)?;
    if e.slots() != 1 {
        return Err(structural("tau acts on single-slot expressions"));
    }
    let n = e.indices[0];
    let d = dir as i64;
    let mut terms = Vec::new();
    for t in &e.terms {
        let mut w = Word::new();
        for f in &t.words[0] {
            if f.index != n {
                return Err(structural(format!("mixed family indices: {f} in A_{n}")));
            }
            w.push(Factor { gen: f.gen, index: n + d, shift: f.shift.relabel(d), inverted: f.inverted });
        }
        terms.push(Term { words: vec![w], coef: t.coef.clone() });
    }
    Ok(TensorExpr { indices: vec![n + d], terms }.canonical())
}

/// `τ^{(m,n)}`: `A_n → A_m` as a chain of unit steps.
pub fn tau_to(e: &TensorExpr, m: i64) -> Result<TensorExpr> {
    let mut out = e.clone();
    while out.indices.first().copied().ok_or_else(|| structural("empty expression"))? != m {
        let dir = if out.indices[0] < m { 1 } else { -1 };
        out = tau(&out, dir)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    A1,
    A2,
    A3,
}

impl Axiom {
    pub const ALL: [Axiom; 3] = [Axiom::A1, Axiom::A2, Axiom::A3];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::A1 => "a1",
            Axiom::A2 => "a2",
            Axiom::A3 => "a3",
        }
    }
}

/// Inputs for the axiom checks: the unit plus the five generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AxiomInput {
    Unit,
    Gen(Gen),
}

impl AxiomInput {
    pub const ALL: [AxiomInput; 6] = [
        AxiomInput::Gen(Gen::Central),
        AxiomInput::Unit,
        AxiomInput::Gen(Gen::Hplus),
        AxiomInput::Gen(Gen::Hminus),
        AxiomInput::Gen(Gen::E),
        AxiomInput::Gen(Gen::F),
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomInput::Unit => "1",
            AxiomInput::Gen(g) => g.symbol(),
        }
    }

    pub fn expr(self, n: i64) -> TensorExpr {
        match self {
            AxiomInput::Unit => TensorExpr::unit(n),
            AxiomInput::Gen(g) => TensorExpr::generator(g, n),
        }
    }
}

/// Both sides of an axiom with the derivation steps.
#[derive(Debug, Clone)]
pub struct AxiomSides {
    pub lhs: TensorExpr,
    pub rhs: TensorExpr,
    pub trace: Vec<String>,
}

/// Builds both sides of `axiom` in its `variant` (`+1` or `-1`) on input `x ∈ A_n`.
///
/// For (a3) the variants are the bare generator and the generator at the
/// centrally shifted argument `z p^{c_n/2}`.
pub fn axiom_sides(axiom: Axiom, variant: i8, x: AxiomInput, n: i64, conv: SignConvention) -> Result<AxiomSides> {
    check_dir(variant)?;
    let mut trace = Vec::new();
    let mut input = x.expr(n);
    if axiom == Axiom::A3 && variant == -1 {
        input = input.map_shifts(|s| s.add(&ShiftForm::c(n, half())));
    }
    trace.push(format!("input: {input}"));
    let d = variant;
    let (lhs, rhs) = match axiom {
        Axiom::A1 => {
            let delta = coproduct(&input, 0, d, conv)?;
            trace.push(format!("Δ{}: {delta}", if d > 0 { "+" } else { "-" }));
            let eps_slot = if d > 0 { 0 } else { 1 };
            let lhs = counit(&delta, eps_slot, conv)?;
            trace.push(format!("ε on slot {}: {lhs}", eps_slot + 1));
            let rhs = tau(&input, d)?;
            trace.push(format!("τ: {rhs}"));
            (lhs, rhs)
        }
        Axiom::A2 => {
            let delta = coproduct(&input, 0, d, conv)?;
            trace.push(format!("Δ{}: {delta}", if d > 0 { "+" } else { "-" }));
            let s_slot = if d > 0 { 0 } else { 1 };
            let anti = antipode(&delta, s_slot, d, conv)?;
            trace.push(format!("S on slot {}: {anti}", s_slot + 1));
            let lhs = multiply(&anti, 0)?;
            trace.push(format!("m: {lhs}"));
            let moved = tau(&input, d)?;
            let eps = counit(&moved, 0, conv)?;
            let value = eps.terms.first().map(|t| t.coef.clone()).unwrap_or_else(BigRational::zero);
            let rhs = TensorExpr::scalar(vec![n + d as i64], value);
            trace.push(format!("ε∘τ: {rhs}"));
            (lhs, rhs)
        }
        Axiom::A3 => {
            let dp = coproduct(&input, 0, 1, conv)?;
            let lhs = coproduct(&dp, 0, -1, conv)?;
            trace.push(format!("Δ+: {dp}"));
            trace.push(format!("(Δ- ⊗ id)Δ+: {lhs}"));
            let dm = coproduct(&input, 0, -1, conv)?;
            let rhs = coproduct(&dm, 1, 1, conv)?;
            trace.push(format!("Δ-: {dm}"));
            trace.push(format!("(id ⊗ Δ+)Δ-: {rhs}"));
            (lhs, rhs)
        }
    };
    Ok(AxiomSides { lhs: lhs.canonical(), rhs: rhs.canonical(), trace })
}

/// Exact verification of one axiom instance over the family indices `ns`.
pub fn verify_axiom(
    axiom: Axiom,
    variant: i8,
    x: AxiomInput,
    conv: SignConvention,
    ns: &[i64],
) -> Result<VerificationReport> {
    let label = format!("{}{}:{}", axiom.name(), if variant > 0 { "+" } else { "-" }, x.name());
    let mut report = VerificationReport::new(label, conv.name());
    let mut residuals = Vec::new();
    for &n in ns {
        let sides = axiom_sides(axiom, variant, x, n, conv)?;
        let equal = sides.lhs.indices == sides.rhs.indices && sides.lhs == sides.rhs;
        if n == ns[0] {
            report.trace = sides.trace.clone();
        }
        if !equal && report.witness.is_none() {
            report.witness = Some(format!("n = {n}: {}  ≠  {}", sides.lhs, sides.rhs));
        }
        residuals.push(if equal { 0.0 } else { 1.0 });
    }
    if axiom == Axiom::A2 {
        report.notes.push(
            "rescaling F by (p^{1/2}+p^{-1/2})/(p-p^{-1}) multiplies both terms of each F-side identity alike and does not change this verdict"
                .to_string(),
        );
    }
    Ok(report.with_residuals(&residuals, 0.0))
}

/// Per-convention outcome of the full (a1)–(a3) matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ConventionSummary {
    pub convention: SignConvention,
    pub a1_a2_all_pass: bool,
    pub a3_all_pass: bool,
    pub failing: Vec<String>,
}

/// Every (axiom, variant, input) instance under every convention.
pub fn axiom_matrix(ns: &[i64]) -> Result<(Vec<VerificationReport>, Vec<ConventionSummary>)> {
    let mut jobs = Vec::new();
    for conv in SignConvention::ALL {
        for axiom in Axiom::ALL {
            for variant in [1i8, -1] {
                for x in AxiomInput::ALL {
                    jobs.push((conv, axiom, variant, x));
                }
            }
        }
    }
    let reports: Vec<VerificationReport> = jobs
        .par_iter()
        .map(|(c, a, v, x)| verify_axiom(*a, *v, *x, *c, ns))
        .collect::<Result<_>>()?;
    let mut summaries = Vec::new();
    for conv in SignConvention::ALL {
        let mine: Vec<(&(SignConvention, Axiom, i8, AxiomInput), &VerificationReport)> =
            jobs.iter().zip(&reports).filter(|(j, _)| j.0 == conv).collect();
        let failing: Vec<String> = mine.iter().filter(|(_, r)| !r.passed()).map(|(_, r)| r.relation.clone()).collect();
        summaries.push(ConventionSummary {
            convention: conv,
            a1_a2_all_pass: mine.iter().filter(|(j, _)| j.1 != Axiom::A3).all(|(_, r)| r.passed()),
            a3_all_pass: mine.iter().filter(|(j, _)| j.1 == Axiom::A3).all(|(_, r)| r.passed()),
            failing,
        });
    }
    Ok((reports, summaries))
}

/// Suite-level verdict: (a3) passes everywhere and some convention
/// passes all of (a1), (a2).
pub fn hopf_verdict(summaries: &[ConventionSummary]) -> Verdict {
    Verdict::from_bool(summaries.iter().all(|s| s.a3_all_pass) && summaries.iter().any(|s| s.a1_a2_all_pass))
}

/// `τ^{(m,p)} τ^{(p,n)} = τ^{(m,n)}` and `τ^{(n,m)} τ^{(m,n)} = id` on every
/// generator, plain and with a central shift, for indices in `range`.
pub fn tau_laws(range: std::ops::RangeInclusive<i64>) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("tau-laws", "all");
    let mut residuals = Vec::new();
    let idx: Vec<i64> = range.collect();
    for x in AxiomInput::ALL {
        for &n in &idx {
            let plain = x.expr(n);
            let shifted = plain.map_shifts(|s| s.add(&ShiftForm::c(n, half())).add(&ShiftForm::constant(BigRational::one())));
            for e in [plain, shifted] {
                for &m in &idx {
                    let direct = tau_to(&e, m)?;
                    let back = tau_to(&direct, n)?;
                    let mut ok = back == e;
                    for &p in &idx {
                        ok &= tau_to(&tau_to(&e, p)?, m)? == direct;
                    }
                    if !ok && report.witness.is_none() {
                        report.witness = Some(format!("{} at n={n}, m={m}", e));
                    }
                    residuals.push(if ok { 0.0 } else { 1.0 });
                }
            }
        }
    }
    report.notes.push(format!("{} composition instances", residuals.len()));
    Ok(report.with_residuals(&residuals, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(g: Gen, n: i64, shift: ShiftForm) -> Factor {
        Factor::new(g, n, shift)
    }

    #[test]
    fn coproduct_of_e_has_two_terms() {
        let d = coproduct(&TensorExpr::generator(Gen::E, 0), 0, 1, SignConvention::default()).unwrap();
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.render(), "E(z; q^(0)) ⊗ 1 - H-(z p^(c_0/2); q^(0)) ⊗ E(z p^(c_0); q^(1))");
    }

    #[test]
    fn coproduct_of_central_and_unit() {
        let d = coproduct(&TensorExpr::generator(Gen::Central, 2), 0, 1, SignConvention::default()).unwrap();
        assert_eq!(d.render(), "c_2 ⊗ 1 + 1 ⊗ c_3");
        let u = coproduct(&TensorExpr::unit(0), 0, 1, SignConvention::default()).unwrap();
        assert_eq!(u, TensorExpr::scalar(vec![0, 1], BigRational::one()));
    }

    #[test]
    fn counit_values() {
        let conv = SignConvention::default();
        assert!(counit(&TensorExpr::generator(Gen::E, 0), 0, conv).unwrap().is_zero());
        let h = TensorExpr::word(0, vec![plain(Gen::Hplus, 0, ShiftForm::c(0, half()))]);
        assert_eq!(counit(&h, 0, conv).unwrap(), TensorExpr::scalar(vec![], BigRational::one()));
        let ef = TensorExpr::word(0, vec![plain(Gen::E, 0, ShiftForm::zero()), plain(Gen::F, 0, ShiftForm::zero())]);
        assert!(counit(&ef, 0, conv).unwrap().is_zero());
    }

    #[test]
    fn antipode_basics() {
        let conv = SignConvention::default();
        let s = antipode(&TensorExpr::generator(Gen::Central, 0), 0, 1, conv).unwrap();
        assert_eq!(s.render(), "-c_1");
        let s = antipode(&TensorExpr::generator(Gen::Hplus, 0), 0, 1, conv).unwrap();
        assert_eq!(s.render(), "H+(z; q^(1))^-1");
        assert_eq!(antipode(&TensorExpr::unit(0), 0, 1, conv).unwrap(), TensorExpr::unit(1));
        let bad = TensorExpr::word(0, vec![plain(Gen::E, 0, ShiftForm::zero()).inv()]);
        assert!(antipode(&bad, 0, 1, conv).is_err());
    }

    #[test]
    fn antipode_reverses_with_sign() {
        let conv = SignConvention::default();
        let ef = TensorExpr::word(0, vec![plain(Gen::E, 0, ShiftForm::zero()), plain(Gen::F, 0, ShiftForm::zero())]);
        let fe_parts = antipode(&TensorExpr::generator(Gen::F, 0), 0, 1, conv)
            .unwrap()
            .mul(&antipode(&TensorExpr::generator(Gen::E, 0), 0, 1, conv).unwrap())
            .unwrap();
        assert_eq!(antipode(&ef, 0, 1, conv).unwrap(), fe_parts.scale(&-BigRational::one()));
    }

    #[test]
    fn a3_on_e_matches_expansion() {
        let sides = axiom_sides(Axiom::A3, 1, AxiomInput::Gen(Gen::E), 0, SignConvention::default()).unwrap();
        assert_eq!(sides.lhs, sides.rhs);
        let want = "E(z; q^(-1)) ⊗ 1 ⊗ 1 - H-(z p^(c_-1/2); q^(-1)) ⊗ E(z p^(c_-1); q^(0)) ⊗ 1 + H-(z p^(c_-1/2); q^(-1)) ⊗ H-(z p^(c_-1+c_0/2); q^(0)) ⊗ E(z p^(c_-1+c_0); q^(1))";
        assert_eq!(sides.lhs.render(), want);
    }

    #[test]
    fn duplicate_index_is_structural() {
        let d = coproduct(&TensorExpr::generator(Gen::E, 0), 0, 1, SignConvention::default()).unwrap();
        assert!(coproduct(&d, 0, 1, SignConvention::default()).is_err());
    }

    #[test]
    fn nome_bookkeeping() {
        for n in -4..4 {
            let a = FamilyIndex::new(n).nome_shift();
            let b = FamilyIndex::new(n).next().nome_shift();
            assert_eq!(b, a.add(&ShiftForm::c(n, BigRational::one())));
        }
        assert!(FamilyIndex::new(0).nome_shift().is_zero());
    }

    #[test]
    fn tau_round_trip_and_mixed_error() {
        let w = TensorExpr::word(2, vec![plain(Gen::Hplus, 2, ShiftForm::c(2, half())), plain(Gen::E, 2, ShiftForm::zero())]);
        assert_eq!(tau(&tau(&w, 1).unwrap(), -1).unwrap(), w);
        let mixed = TensorExpr::word(0, vec![plain(Gen::E, 0, ShiftForm::zero()), plain(Gen::F, 1, ShiftForm::zero())]);
        assert!(tau(&mixed, 1).is_err());
    }

    #[test]
    fn a1_needs_a_coherent_sign() {
        for conv in SignConvention::ALL {
            let r = verify_axiom(Axiom::A1, 1, AxiomInput::Gen(Gen::E), conv, &[0]).unwrap();
            assert_eq!(r.passed(), conv.sigma_hminus * conv.counit_hminus == -1, "{conv:?}");
        }
    }

    #[test]
    fn tau_laws_hold() {
        assert!(tau_laws(-3..=3).unwrap().passed());
    }

    #[test]
    fn canonical_is_idempotent() {
        let d = coproduct(&TensorExpr::generator(Gen::F, 1), 0, -1, SignConvention::default()).unwrap();
        assert_eq!(d.canonical().canonical(), d.canonical());
    }
}
