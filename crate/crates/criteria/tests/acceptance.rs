//! One line per acceptance criterion. Every criterion runs; the process
//! exits non-zero when any is red.

use std::time::{Duration, Instant};

use ospq_core::freefield::{ope_kernel, pole_residues, FieldKind, RationalKernel};
use ospq_core::hopf::{axiom_matrix, hopf_verdict, tau_laws};
use ospq_core::relations::{relation_catalog, Current, Mode, RelationId};
use ospq_core::sampling::{param_samples, DEFAULT_SEED};
use ospq_core::suite::{
    contraction_identity, run, theta_path_agreement, theta_quasi_periodicity, AnyReport, RunConfig, SuiteName,
    SuiteResult,
};

const CONTRACTION_BUDGET: Duration = Duration::from_secs(10);
const EF_BUDGET: Duration = Duration::from_secs(1);
const RELATIONS_BUDGET: Duration = Duration::from_secs(120);
const HOPF_BUDGET: Duration = Duration::from_secs(30);
const TAU_BUDGET: Duration = Duration::from_secs(5);
const LIMITS_BUDGET: Duration = Duration::from_secs(180);
const THETA_BUDGET: Duration = Duration::from_secs(30);
const FULL_BUDGET: Duration = Duration::from_secs(600);

const EXCHANGE_TOL: f64 = 1e-20;
const NEGATIVE_CONTROL_FLOOR: f64 = 1e-2;
const THETA_TOL: f64 = 1e-30;

struct Outcome {
    ok: bool,
    detail: String,
}

fn line(n: u32, title: &str, o: &Outcome, elapsed: Duration, budget: Duration) -> bool {
    let in_time = elapsed <= budget;
    let ok = o.ok && in_time;
    println!(
        "criterion {n} {title:<34} {}  {} [{:.1}s / {}s]",
        if ok { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn reports<'a>(s: &'a SuiteResult, prefix: &str) -> Vec<&'a AnyReport> {
    s.reports.iter().filter(|r| r.name().starts_with(prefix)).collect()
}

fn verification(r: &AnyReport) -> &ospq_core::report::VerificationReport {
    match r {
        AnyReport::Verification(v) => v,
        AnyReport::Convergence(_) => panic!("expected a verification report"),
    }
}

fn criterion_1() -> (Outcome, Duration) {
    timed(|| {
        let params = param_samples(DEFAULT_SEED, 3, 1);
        let mut ok = true;
        for (a, b) in [(FieldKind::Phi, FieldKind::Phi), (FieldKind::Psi, FieldKind::Psi), (FieldKind::Phi, FieldKind::Psi)] {
            let r = contraction_identity(a, b, 30, &params, DEFAULT_SEED).unwrap();
            ok &= r.passed() && r.residual_max == 0.0;
        }
        Outcome { ok, detail: "3 pairs x 3 samples, 31 coefficients, exact".into() }
    })
}

fn criterion_2() -> (Outcome, Duration) {
    timed(|| {
        let params = param_samples(DEFAULT_SEED, 3, 1);
        let cat = relation_catalog(1, Mode::Corrected);
        let r = ospq_core::relations::verify_ef(cat.get(RelationId::EF), Mode::Corrected, 30, &params, DEFAULT_SEED).unwrap();
        let k = ope_kernel(&Current::E.spec(), &Current::F.spec(), 30, &params[0]).unwrap();
        let mut supports: Vec<i64> =
            pole_residues(&RationalKernel::from_kernel(&k).unwrap()).unwrap().into_iter().map(|(b, _)| b).collect();
        supports.sort();
        let ok = r.passed() && supports == [-2, 2];
        Outcome { ok, detail: format!("delta supports s^{supports:?} x, coefficients symbolic") }
    })
}

fn criterion_3(rel: &SuiteResult) -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for id in ["EE", "FF"] {
        let r = rel.reports.iter().find(|r| r.name() == id).map(verification).unwrap();
        ok &= r.passed() && r.points.len() == 100 && r.digits == 50 && r.residual_max <= EXCHANGE_TOL;
        worst = worst.max(r.residual_max);
    }
    let ctl = rel.reports.iter().find(|r| r.name() == "EE:negative-control").map(verification).unwrap();
    ok &= ctl.residual_max > NEGATIVE_CONTROL_FLOOR;
    let ef = rel.reports.iter().find(|r| r.name() == "EF").unwrap();
    ok &= ef.passed();
    Outcome { ok, detail: format!("max residual {worst:.1e}, control {:.1e}", ctl.residual_max) }
}

fn criterion_4(rel: &SuiteResult) -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for id in ["HpE", "HmE", "HpF", "HmF", "HpHp", "HmHm", "HpHm"] {
        let r = rel.reports.iter().find(|r| r.name() == id).map(verification).unwrap();
        ok &= r.passed() && r.points.len() == 100 && r.residual_max <= EXCHANGE_TOL;
        worst = worst.max(r.residual_max);
    }
    let hme = rel.reports.iter().find(|r| r.name() == "HmE").map(verification).unwrap();
    let records_other = hme.notes.iter().any(|n| n.contains("mode:"));
    ok &= records_other;
    Outcome { ok, detail: format!("7 relations, max residual {worst:.1e}, HmE mode note recorded") }
}

fn criterion_5() -> (Outcome, Duration) {
    timed(|| {
        let ns: Vec<i64> = (-3..=3).collect();
        let (_, summaries) = axiom_matrix(&ns).unwrap();
        let a3 = summaries.iter().all(|s| s.a3_all_pass);
        let good: Vec<String> = summaries.iter().filter(|s| s.a1_a2_all_pass).map(|s| s.convention.name()).collect();
        let ok = hopf_verdict(&summaries).passed();
        let detail = if good.is_empty() {
            let first = summaries.iter().find(|s| !s.failing.is_empty()).map(|s| s.failing.join(",")).unwrap_or_default();
            format!("a3 {}; no convention passes a1+a2 (e.g. {first})", if a3 { "ok" } else { "red" })
        } else {
            format!("a3 ok; a1+a2 under {}", good.join(" "))
        };
        Outcome { ok, detail }
    })
}

fn criterion_6() -> (Outcome, Duration) {
    timed(|| {
        let r = tau_laws(-3..=3).unwrap();
        Outcome { ok: r.passed(), detail: r.notes.join("; ") }
    })
}

fn criterion_7(lim: &SuiteResult) -> Outcome {
    let conv = reports(lim, "limit:");
    let main: Vec<_> = conv.iter().filter(|r| !r.name().contains("negative-control")).collect();
    let red: Vec<&str> = main.iter().filter(|r| !r.passed()).map(|r| r.name()).collect();
    let trig = reports(lim, "trig-rational:");
    let trig_ok = trig.len() == 8 && trig.iter().all(|r| r.passed());
    let ok = main.len() == 40 && red.is_empty() && trig_ok;
    let mut names: Vec<&str> = red.iter().map(|n| n.trim_start_matches("limit:")).collect();
    names.dedup();
    let detail = if red.is_empty() {
        "40 convergence runs, K stable".to_string()
    } else {
        format!("{}/40 runs red ({}), K {}", red.len(), names.join(","), if trig_ok { "stable" } else { "unstable" })
    };
    Outcome { ok, detail }
}

fn criterion_8() -> (Outcome, Duration) {
    timed(|| {
        let a = theta_quasi_periodicity(100, 50, DEFAULT_SEED).unwrap();
        let b = theta_path_agreement(100, 50, DEFAULT_SEED).unwrap();
        let ok = a.residual_max < THETA_TOL && b.residual_max < THETA_TOL;
        Outcome { ok, detail: format!("quasi-periodicity {:.1e}, paths {:.1e}", a.residual_max, b.residual_max) }
    })
}

fn main() {
    let mut all = true;
    let (o, t) = criterion_1();
    all &= line(1, "contraction-product identity", &o, t, CONTRACTION_BUDGET);
    let (o, t) = criterion_2();
    all &= line(2, "EF delta extraction", &o, t, EF_BUDGET);

    // First full run, suite by suite, timed.
    let mut first = Vec::new();
    let t_full = Instant::now();
    for s in [SuiteName::Ope, SuiteName::Relations, SuiteName::Hopf, SuiteName::Limits] {
        let (r, t) = timed(|| run(&RunConfig { suite: s, ..RunConfig::default() }).unwrap());
        first.push((r.suites.into_iter().next().unwrap(), t));
    }
    let first_elapsed = t_full.elapsed();
    let (rel, rel_t) = &first[1];
    all &= line(3, "exchange relations, E and F", &criterion_3(rel), *rel_t, RELATIONS_BUDGET);
    all &= line(4, "exchange relations, H currents", &criterion_4(rel), *rel_t, RELATIONS_BUDGET);
    let (o, t) = criterion_5();
    all &= line(5, "Hopf family axioms", &o, t, HOPF_BUDGET);
    let (o, t) = criterion_6();
    all &= line(6, "tau category laws", &o, t, TAU_BUDGET);
    let (lim, lim_t) = &first[3];
    all &= line(7, "trigonometric and rational limits", &criterion_7(lim), *lim_t, LIMITS_BUDGET);
    let (o, t) = criterion_8();
    all &= line(8, "theta substrate", &o, t, THETA_BUDGET);

    let (second, t2) = timed(|| run(&RunConfig::default()).unwrap());
    let same = first.iter().zip(&second.suites).all(|((a, _), b)| {
        serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap()
    }) && first.len() == second.suites.len();
    let o = Outcome { ok: same, detail: "two full runs, identical suite reports".into() };
    all &= line(9, "determinism", &o, first_elapsed.max(t2), FULL_BUDGET);

    if !all {
        std::process::exit(1);
    }
}
