//! Suite runner and the JSON run report.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::degeneration::{
    limit_check, limit_samples, trig_rational_constants, ConvergenceReport, TrigStructureFunction, EPSILONS, LIMIT_IDS,
};
use crate::error::{Error, Result};
use crate::freefield::{contraction_series, exp_contraction_closed, ope_kernel, DeformationParams, FieldKind};
use crate::hopf::{axiom_matrix, coproduct, hopf_verdict, tau_laws, Gen, SignConvention, TensorExpr};
use crate::numeric::{BigComplex, Precision};
use crate::qpoch::product_series;
use crate::relations::{
    near_theta_zero, printed_ef_forms, relation_catalog, verify_ef, verify_exchange, verify_exchange_swapped, Current,
    ExchangeConfig, Mode, RelationId, RelationKind, StructureFunction,
};
use crate::report::{Verdict, VerificationReport};
use crate::sampling::{annulus_point, param_samples, rng, stream, DEFAULT_SEED};
use crate::series::{rat, render_rational};
use crate::theta::{theta, theta_eval_auto, theta_modular, ThetaSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Ope,
    Relations,
    Hopf,
    Limits,
    All,
}

impl SuiteName {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ope" => Some(SuiteName::Ope),
            "relations" => Some(SuiteName::Relations),
            "hopf" => Some(SuiteName::Hopf),
            "limits" => Some(SuiteName::Limits),
            "all" => Some(SuiteName::All),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Ope => "ope",
            SuiteName::Relations => "relations",
            SuiteName::Hopf => "hopf",
            SuiteName::Limits => "limits",
            SuiteName::All => "all",
        }
    }

    fn expand(self) -> Vec<SuiteName> {
        match self {
            SuiteName::All => vec![SuiteName::Ope, SuiteName::Relations, SuiteName::Hopf, SuiteName::Limits],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub suite: SuiteName,
    pub order: usize,
    pub digits: u32,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: usize,
    /// Restricts the Hopf suite to conventions with this `σ`.
    pub convention: Option<i8>,
    pub strict_text: bool,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: SuiteName::All,
            order: 30,
            digits: 50,
            tolerance: 1e-20,
            seed: DEFAULT_SEED,
            samples: 100,
            convention: None,
            strict_text: false,
            trace: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(Error::Usage(format!("order must be at least 4, got {}", self.order)));
        }
        if self.samples < 10 {
            return Err(Error::Usage(format!("samples must be at least 10, got {}", self.samples)));
        }
        if !(10..=2000).contains(&self.digits) {
            return Err(Error::Usage(format!("digits must lie in 10..=2000, got {}", self.digits)));
        }
        let floor = 10f64.powi(8 - self.digits as i32);
        if !(self.tolerance.is_finite() && self.tolerance >= floor) {
            return Err(Error::Usage(format!(
                "tolerance {:e} is below the working-precision floor {:e} for {} digits",
                self.tolerance, floor, self.digits
            )));
        }
        if let Some(s) = self.convention {
            if s != 1 && s != -1 {
                return Err(Error::Usage(format!("convention must be +1 or -1, got {s}")));
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        if self.strict_text {
            Mode::StrictText
        } else {
            Mode::Corrected
        }
    }
}

/// Either report shape; serialized without a tag.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum AnyReport {
    Verification(VerificationReport),
    Convergence(ConvergenceReport),
}

impl AnyReport {
    pub fn passed(&self) -> bool {
        match self {
            AnyReport::Verification(r) => r.passed(),
            AnyReport::Convergence(r) => r.passed(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            AnyReport::Verification(r) => &r.relation,
            AnyReport::Convergence(r) => &r.name,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub verdict: Verdict,
    pub reports: Vec<AnyReport>,
    /// Informational runs that do not enter the verdict.
    pub diagnostics: Vec<AnyReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub overall_verdict: Verdict,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut suites = Vec::new();
    for s in cfg.suite.expand() {
        let mut r = match s {
            SuiteName::Ope => ope_suite(cfg)?,
            SuiteName::Relations => relations_suite(cfg)?,
            SuiteName::Hopf => hopf_suite(cfg)?,
            SuiteName::Limits => limits_suite(cfg)?,
            SuiteName::All => unreachable!(),
        };
        if !cfg.trace {
            for rep in r.reports.iter_mut().chain(r.diagnostics.iter_mut()) {
                if let AnyReport::Verification(v) = rep {
                    v.trace.clear();
                }
            }
        }
        suites.push(r);
    }
    let overall = Verdict::from_bool(suites.iter().all(|s| s.verdict.passed()));
    Ok(RunReport { tool_version: env!("CARGO_PKG_VERSION").to_string(), config: cfg.clone(), suites, overall_verdict: overall })
}

fn finish(name: &str, reports: Vec<AnyReport>, diagnostics: Vec<AnyReport>) -> SuiteResult {
    let verdict = Verdict::from_bool(!reports.is_empty() && reports.iter().all(|r| r.passed()));
    SuiteResult { name: name.to_string(), verdict, reports, diagnostics }
}

fn params_note(params: &[DeformationParams]) -> String {
    let ps: Vec<String> =
        params.iter().map(|p| format!("(q={}, p={}, c={})", render_rational(p.q()), render_rational(p.p()), p.level())).collect();
    format!("parameters {}", ps.join(" "))
}

/// `exp` of the contraction series against the product closed form, exactly.
pub fn contraction_identity(a: FieldKind, b: FieldKind, order: usize, params: &[DeformationParams], seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("contraction:{}{}", a.name(), b.name()), "exact");
    report.seed = seed;
    report.order = order;
    let mut residuals = Vec::new();
    for dp in params {
        let lhs = contraction_series(a, b, order, dp)?.exp()?;
        let rhs = product_series(&exp_contraction_closed(a, b, dp)?, order)?;
        let diff = lhs.sub(&rhs)?;
        if !diff.is_zero() && report.witness.is_none() {
            let k = diff.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
            report.witness = Some(format!("coefficient x^{k} differs by {} at q={}, p={}", render_rational(diff.coeff(k)), render_rational(dp.q()), render_rational(dp.p())));
        }
        residuals.push(if diff.is_zero() { 0.0 } else { 1.0 });
    }
    report.notes.push(params_note(params));
    Ok(report.with_residuals(&residuals, 0.0))
}

/// Series of each OPE kernel against its closed form, exactly.
pub fn kernel_identity(a: Current, b: Current, order: usize, params: &[DeformationParams], seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("kernel:{}{}", pair_token(a), pair_token(b)), "exact");
    report.seed = seed;
    report.order = order;
    let mut residuals = Vec::new();
    for dp in params {
        let k = ope_kernel(&a.spec(), &b.spec(), order, dp)?;
        let ok = k.series == k.closed_series()?;
        if !ok && report.witness.is_none() {
            report.witness = Some(format!("series and closed form differ at q={}, p={}", render_rational(dp.q()), render_rational(dp.p())));
        }
        residuals.push(if ok { 0.0 } else { 1.0 });
    }
    report.notes.push(params_note(params));
    Ok(report.with_residuals(&residuals, 0.0))
}

fn random_nome(r: &mut rand_chacha::ChaCha20Rng, lo: f64, hi: f64, prec: Precision) -> BigComplex {
    annulus_point(r, lo, hi, prec)
}

fn theta_tolerance(digits: u32) -> f64 {
    10f64.powi(20 - digits as i32)
}

/// `θ(qz) = -θ(z)/z` at seeded `(z, q)`, `|q| ∈ [0.05, 0.95]`.
pub fn theta_quasi_periodicity(count: usize, digits: u32, seed: u64) -> Result<VerificationReport> {
    let prec = Precision::digits(digits + 10);
    let mut r = rng(seed, stream::THETA);
    let mut pts = Vec::new();
    while pts.len() < count {
        let q = random_nome(&mut r, 0.05, 0.95, prec);
        let z = annulus_point(&mut r, 0.3, 1.5, prec);
        if near_theta_zero(&z, &q) || near_theta_zero(&(&q * &z), &q) {
            continue;
        }
        pts.push((z, q));
    }
    let residuals: Vec<f64> = pts
        .par_iter()
        .map(|(z, q)| {
            let lhs = theta(&(q * z), q)?;
            let rhs = (&theta(z, q)? / z).scale_i64(-1);
            Ok(lhs.rel_diff(&rhs, 0.0))
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new("theta:quasi-periodicity", "auto");
    report.seed = seed;
    report.digits = digits;
    report.notes.push(format!("{count} points, |q| in [0.05, 0.95], |z| in [0.3, 1.5]"));
    Ok(report.with_residuals(&residuals, theta_tolerance(digits)))
}

/// Product expansion against the modular path for `|q| ≤ 0.95`.
pub fn theta_path_agreement(count: usize, digits: u32, seed: u64) -> Result<VerificationReport> {
    let prec = Precision::digits(digits + 10);
    let mut r = rng(seed, stream::THETA + 1);
    let mut pts = Vec::new();
    while pts.len() < count {
        let q = random_nome(&mut r, 0.05, 0.95, prec);
        let z = annulus_point(&mut r, 0.3, 1.5, prec);
        if near_theta_zero(&z, &q) {
            continue;
        }
        pts.push((z, q));
    }
    let residuals: Vec<f64> = pts
        .par_iter()
        .map(|(z, q)| {
            let a = theta_eval_auto(z, &ThetaSpec::new(q.clone())?)?;
            let b = theta_modular(z, q)?;
            Ok(a.rel_diff(&b, 0.0))
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new("theta:product-vs-modular", "auto");
    report.seed = seed;
    report.digits = digits;
    report.notes.push(format!("{count} points, |q| in [0.05, 0.95]"));
    Ok(report.with_residuals(&residuals, theta_tolerance(digits)))
}

fn ope_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    let params = param_samples(cfg.seed, 3, 1);
    let mut reports = Vec::new();
    for (a, b) in [(FieldKind::Phi, FieldKind::Phi), (FieldKind::Psi, FieldKind::Psi), (FieldKind::Phi, FieldKind::Psi)] {
        reports.push(AnyReport::Verification(contraction_identity(a, b, cfg.order, &params, cfg.seed)?));
    }
    use Current::*;
    for (a, b) in [(E, E), (F, F), (E, F), (F, E), (Hplus, E)] {
        reports.push(AnyReport::Verification(kernel_identity(a, b, cfg.order, &params, cfg.seed)?));
    }
    reports.push(AnyReport::Verification(theta_quasi_periodicity(cfg.samples, cfg.digits, cfg.seed)?));
    reports.push(AnyReport::Verification(theta_path_agreement(cfg.samples, cfg.digits, cfg.seed)?));
    Ok(finish("ope", reports, Vec::new()))
}

fn exchange_config(cfg: &RunConfig, samples: usize) -> ExchangeConfig {
    ExchangeConfig {
        order: cfg.order,
        samples,
        digits: cfg.digits,
        tolerance: cfg.tolerance,
        seed: cfg.seed,
        params: param_samples(cfg.seed, 3, 1),
    }
}

fn outcome(r: &VerificationReport) -> String {
    match (&r.verdict, &r.witness) {
        (Verdict::Pass, _) => "pass".into(),
        (Verdict::Fail, Some(w)) => format!("fail ({w})"),
        (Verdict::Fail, None) => format!("fail (residual {:e})", r.residual_max),
    }
}

fn relations_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    let mode = cfg.mode();
    let other = if cfg.strict_text { Mode::Corrected } else { Mode::StrictText };
    let cat = relation_catalog(1, mode);
    let other_cat = relation_catalog(1, other);
    let ecfg = exchange_config(cfg, cfg.samples);
    let mut reports = Vec::new();
    let mut diagnostics = Vec::new();
    for rel in &cat.relations {
        match rel.kind {
            RelationKind::Exchange => {
                let mut r = verify_exchange(rel, mode, &ecfg, None)?;
                if rel.id == RelationId::HmE {
                    let alt = verify_exchange(other_cat.get(RelationId::HmE), other, &exchange_config(cfg, 10), None)?;
                    r.notes.push(format!("{other} mode: {}", outcome(&alt)));
                }
                reports.push(AnyReport::Verification(r));
                reports.push(AnyReport::Verification(verify_exchange_swapped(rel, mode, &exchange_config(cfg, 10))?));
            }
            RelationKind::AnticommutatorDelta => {
                reports.push(AnyReport::Verification(verify_ef(rel, mode, cfg.order, &ecfg.params, cfg.seed)?));
            }
        }
    }
    // The unit structure function must be rejected on EE.
    let mut ctl = verify_exchange(cat.get(RelationId::EE), mode, &exchange_config(cfg, 10), Some(&StructureFunction::unit()))?;
    let rejected = ctl.residual_max.is_finite() && ctl.residual_max > 1e-2;
    ctl.relation = "EE:negative-control".into();
    ctl.notes.push("structure function replaced by 1; passes when the residual exceeds 1e-2".into());
    ctl.verdict = Verdict::from_bool(rejected);
    ctl.witness = None;
    reports.push(AnyReport::Verification(ctl));
    let mut forms = VerificationReport::new("EF:printed-forms", mode.to_string());
    for (name, terms) in printed_ef_forms() {
        forms.notes.push(format!("{name}: {} delta terms", terms.len()));
    }
    forms.verdict = Verdict::Pass;
    diagnostics.push(AnyReport::Verification(forms));
    Ok(finish("relations", reports, diagnostics))
}

fn hopf_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    let ns: Vec<i64> = (-3..=3).collect();
    let (matrix, summaries) = axiom_matrix(&ns)?;
    let keep = |name: &str| match cfg.convention {
        None => true,
        Some(s) => name.starts_with(&format!("sigma={s:+},")),
    };
    let mut reports: Vec<AnyReport> = Vec::new();
    let mut diagnostics: Vec<AnyReport> = Vec::new();
    let verdict = hopf_verdict(&summaries);
    let mut summary = VerificationReport::new("hopf:conventions", "all");
    for s in &summaries {
        summary.notes.push(format!(
            "{}: a1/a2 {}, a3 {}{}",
            s.convention.name(),
            if s.a1_a2_all_pass { "pass" } else { "fail" },
            if s.a3_all_pass { "pass" } else { "fail" },
            if s.failing.is_empty() { String::new() } else { format!(" [failing: {}]", s.failing.join(", ")) }
        ));
    }
    if !verdict.passed() {
        // witnesses from the conventions closest to passing
        let fewest = summaries.iter().map(|s| s.failing.len()).min().unwrap_or(0);
        let best: Vec<String> = summaries.iter().filter(|s| s.failing.len() == fewest).map(|s| s.convention.name()).collect();
        let w: Vec<String> = matrix
            .iter()
            .filter(|r| !r.passed() && best.contains(&r.mode))
            .filter_map(|r| r.witness.as_ref().map(|w| format!("{} [{}]: {w}", r.relation, r.mode)))
            .collect();
        summary.witness = Some(w.join("; "));
    }
    summary.verdict = verdict;
    reports.push(AnyReport::Verification(summary));
    for r in matrix {
        if keep(&r.mode) {
            diagnostics.push(AnyReport::Verification(r));
        }
    }
    reports.push(AnyReport::Verification(tau_laws(-3..=3)?));
    Ok(finish("hopf", reports, diagnostics))
}

/// `K(η)/K(η₀) ≤ 2` along `η = η₀, η₀/2, η₀/4`, for each sample.
pub fn trig_rational_report(id: RelationId, mode: Mode, level: i64, samples: &[crate::degeneration::LimitSample], digits: u32) -> Result<VerificationReport> {
    let f = TrigStructureFunction::target(id, mode, level)?;
    let mut report = VerificationReport::new(format!("trig-rational:{}", id.name()), mode.to_string());
    report.digits = digits;
    let mut residuals = Vec::new();
    for s in samples {
        let etas = [s.eta, s.eta / 2.0, s.eta / 4.0];
        let ks = trig_rational_constants(&f, s.u_minus_v, s.hbar, level, &etas, digits)?;
        let k0 = ks[0].max(f64::MIN_POSITIVE);
        let worst = ks.iter().map(|k| k / k0).fold(0.0, f64::max);
        report.notes.push(format!(
            "u-v={:.4}{:+.4}i hbar={:.4}: K = {}",
            s.u_minus_v.0,
            s.u_minus_v.1,
            s.hbar,
            ks.iter().map(|k| format!("{k:.4e}")).collect::<Vec<_>>().join(", ")
        ));
        residuals.push(if worst.is_finite() { worst } else { f64::NAN });
    }
    Ok(report.with_residuals(&residuals, 2.0))
}

/// HpHm and HH coincide at level 0, elliptically and after the limit.
pub fn level_zero_identification(digits: u32) -> Result<VerificationReport> {
    let prec = Precision::digits(digits);
    let cat = relation_catalog(0, Mode::Corrected);
    let hh = cat.get(RelationId::HpHp).structure.clone().expect("exchange");
    let hm = cat.get(RelationId::HpHm).structure.clone().expect("exchange");
    let np = crate::relations::NumParams::from_f64(0.4, 0.25, 0, prec);
    let mut residuals = Vec::new();
    for (re, im) in [(0.31, 0.07), (0.55, -0.2), (-0.4, 0.3)] {
        let x = BigComplex::from_f64(re, im, prec);
        residuals.push(hh.eval(&x, &np)?.rel_diff(&hm.eval(&x, &np)?, 0.0));
    }
    let (th, tm) = (TrigStructureFunction::from_elliptic("HH", &hh, 0), TrigStructureFunction::from_elliptic("HpHm", &hm, 0));
    let a = BigComplex::from_f64(0.37, 0.04, prec);
    residuals.push(th.eval(&a, 0.25, 0.25, 0.2)?.rel_diff(&tm.eval(&a, 0.25, 0.25, 0.2)?, 0.0));
    let mut report = VerificationReport::new("level-zero:HpHm=HH", "corrected");
    report.digits = digits;
    Ok(report.with_residuals(&residuals, theta_tolerance(digits)))
}

fn limits_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    let mode = cfg.mode();
    let digits = cfg.digits.min(40);
    let level = 1;
    let samples = limit_samples(cfg.seed, 5, level, digits)?;
    let cat = relation_catalog(level, mode);
    let mut jobs = Vec::new();
    for id in LIMIT_IDS {
        for s in &samples {
            for k in [1.0, 4.0] {
                jobs.push((id, *s, k));
            }
        }
    }
    let results: Vec<(f64, ConvergenceReport)> = jobs
        .par_iter()
        .map(|(id, s, k)| {
            let sf = cat.get(*id).structure.clone().expect("exchange");
            let target = TrigStructureFunction::target(*id, mode, level)?;
            let mut r = limit_check(&sf, &target, s.u_minus_v, s.eta, s.hbar, level, &EPSILONS, *k, digits)?;
            r.name = format!("limit:{}", id.name());
            Ok((*k, r))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, r) in results {
        if k == 1.0 {
            reports.push(AnyReport::Convergence(r));
        } else {
            diagnostics.push(AnyReport::Convergence(r));
        }
    }
    for id in LIMIT_IDS {
        reports.push(AnyReport::Verification(trig_rational_report(id, mode, level, &samples, digits)?));
    }
    reports.push(AnyReport::Verification(level_zero_identification(digits)?));
    // An EE elliptic function must not converge to the FF target.
    let s = samples[0];
    let mut neg = limit_check(
        cat.get(RelationId::EE).structure.as_ref().expect("exchange"),
        &TrigStructureFunction::target(RelationId::FF, mode, level)?,
        s.u_minus_v,
        s.eta,
        s.hbar,
        level,
        &EPSILONS,
        1.0,
        digits,
    )?;
    neg.name = "limit:EE-vs-FF:negative-control".into();
    neg.verdict = Verdict::from_bool(!neg.passed());
    reports.push(AnyReport::Convergence(neg));
    Ok(finish("limits", reports, diagnostics))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Kernel,
    StructureFunction,
    Coproduct,
}

impl ObjectKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "kernel" => Some(ObjectKind::Kernel),
            "structure-function" => Some(ObjectKind::StructureFunction),
            "coproduct" => Some(ObjectKind::Coproduct),
            _ => None,
        }
    }
}

fn pair_token(c: Current) -> &'static str {
    match c {
        Current::Hplus => "Hp",
        Current::Hminus => "Hm",
        Current::E => "E",
        Current::F => "F",
    }
}

fn parse_current(s: &str) -> Option<(Current, &str)> {
    for (tok, c) in [("Hp", Current::Hplus), ("Hm", Current::Hminus), ("E", Current::E), ("F", Current::F)] {
        if let Some(rest) = s.strip_prefix(tok) {
            return Some((c, rest));
        }
    }
    None
}

/// `"HpE"` to `(H⁺, E)`.
pub fn parse_pair(s: &str) -> Option<(Current, Current)> {
    let (a, rest) = parse_current(s)?;
    let (b, rest) = parse_current(rest)?;
    rest.is_empty().then_some((a, b))
}

/// Parameters for `print`: exact `q`, `p` and the level.
#[derive(Debug, Clone)]
pub struct PrintParams {
    pub params: DeformationParams,
    pub order: usize,
    pub coeffs: usize,
    pub mode: Mode,
    pub convention: SignConvention,
}

impl Default for PrintParams {
    fn default() -> Self {
        PrintParams {
            params: DeformationParams::new(rat(2, 5), rat(1, 4), 1).expect("valid defaults"),
            order: 8,
            coeffs: 6,
            mode: Mode::Corrected,
            convention: SignConvention::ALL[1],
        }
    }
}

fn gen_of(id: &str) -> Option<Gen> {
    match id {
        "Hp" | "H+" => Some(Gen::Hplus),
        "Hm" | "H-" => Some(Gen::Hminus),
        "E" => Some(Gen::E),
        "F" => Some(Gen::F),
        _ => None,
    }
}

/// Deterministic text rendering of one object.
pub fn print_object(kind: ObjectKind, id: &str, pp: &PrintParams) -> Result<String> {
    match kind {
        ObjectKind::Kernel => {
            let (a, b) = parse_pair(id).ok_or_else(|| Error::Usage(format!("unknown kernel id {id:?}; expected e.g. EE, HpE, HmF")))?;
            let k = ope_kernel(&a.spec(), &b.spec(), pp.order, &pp.params)?;
            Ok(format!(
                "kernel {}(z) {}(w) at q={}, p={}, c={}\n{}",
                a.symbol(),
                b.symbol(),
                render_rational(pp.params.q()),
                render_rational(pp.params.p()),
                pp.params.level(),
                k.render(pp.coeffs)
            ))
        }
        ObjectKind::StructureFunction => {
            let rid = RelationId::parse(id).ok_or_else(|| Error::Usage(format!("unknown relation id {id:?}")))?;
            let cat = relation_catalog(pp.params.level(), pp.mode);
            let rel = cat.get(rid);
            let mut out = format!("{} ({} mode, c={})\n{}\n", rid.name(), pp.mode, pp.params.level(), rel.render());
            if let Some(sf) = &rel.structure {
                out.push_str(&format!("normal form: {}\n", sf.normal_form().render()));
                if let Ok(t) = TrigStructureFunction::target(rid, pp.mode, pp.params.level()) {
                    out.push_str(&format!("trigonometric limit: {}\n", t.render()));
                }
            }
            Ok(out)
        }
        ObjectKind::Coproduct => {
            let g = gen_of(id).ok_or_else(|| Error::Usage(format!("unknown generator {id:?}; expected Hp, Hm, E or F")))?;
            let x = TensorExpr::generator(g, 0);
            let mut out = String::new();
            for dir in [1i8, -1] {
                let d = coproduct(&x, 0, dir, pp.convention)?;
                out.push_str(&format!("Delta{}({}) = {}\n", if dir > 0 { "+" } else { "-" }, x.render(), d.render()));
            }
            Ok(out)
        }
    }
}
