//! Report records shared by the suites.

use serde::Serialize;

use crate::numeric::BigComplex;
use crate::series::render_rational;
use num_rational::BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// An evaluation point: `x = w/z`, `z`, and the exact `(q, p)` used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePoint {
    pub x: [String; 2],
    pub z: [String; 2],
    pub q: String,
    pub p: String,
}

impl SamplePoint {
    pub fn new(x: &BigComplex, z: &BigComplex, q: &BigRational, p: &BigRational) -> Self {
        let (xr, xi) = x.to_decimal_pair(25);
        let (zr, zi) = z.to_decimal_pair(25);
        SamplePoint { x: [xr, xi], z: [zr, zi], q: render_rational(q), p: render_rational(p) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub relation: String,
    pub mode: String,
    pub seed: u64,
    pub points: Vec<SamplePoint>,
    pub residual_max: f64,
    pub residual_mean: f64,
    pub order: usize,
    pub digits: u32,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(relation: impl Into<String>, mode: impl Into<String>) -> Self {
        VerificationReport {
            relation: relation.into(),
            mode: mode.into(),
            seed: 0,
            points: Vec::new(),
            residual_max: 0.0,
            residual_mean: 0.0,
            order: 0,
            digits: 0,
            tolerance: 0.0,
            notes: Vec::new(),
            witness: None,
            trace: Vec::new(),
            verdict: Verdict::Fail,
        }
    }

    /// Sets residual statistics and the verdict `residual_max ≤ tolerance`.
    pub fn with_residuals(mut self, residuals: &[f64], tolerance: f64) -> Self {
        self.tolerance = tolerance;
        if residuals.is_empty() {
            self.residual_max = f64::NAN;
            self.residual_mean = f64::NAN;
            self.verdict = Verdict::Fail;
            return self;
        }
        self.residual_max = residuals.iter().cloned().fold(0.0, f64::max);
        if residuals.iter().any(|r| r.is_nan()) {
            self.residual_max = f64::NAN;
        }
        self.residual_mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        self.verdict = Verdict::from_bool(self.residual_max <= tolerance);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_threshold() {
        let r = VerificationReport::new("t", "m").with_residuals(&[1e-30, 1e-21], 1e-20);
        assert!(r.passed());
        let r = VerificationReport::new("t", "m").with_residuals(&[1e-30, 1e-19], 1e-20);
        assert!(!r.passed());
        let r = VerificationReport::new("t", "m").with_residuals(&[f64::NAN], 1e-20);
        assert!(!r.passed());
        assert!(!VerificationReport::new("t", "m").with_residuals(&[], 1.0).passed());
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport::new("EE", "corrected").with_residuals(&[0.0], 1e-20);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "pass");
        assert!(v.get("witness").is_none());
    }
}
