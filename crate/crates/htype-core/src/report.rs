use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Outcome of a single numerical check: a computed value against an expected
/// one, with the tolerances that decided the verdict recorded in `params`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    /// BTreeMap so serialized output has a stable key order.
    pub params: BTreeMap<String, String>,
    pub computed: f64,
    pub expected: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Build a report, deciding pass/fail from the given tolerances.
    /// Passes when `abs_err <= tol_abs` or `rel_err <= tol_rel`.
    pub fn new(
        check: impl Into<String>,
        computed: f64,
        expected: f64,
        tol_abs: f64,
        tol_rel: f64,
    ) -> Self {
        let abs_err = (computed - expected).abs();
        let rel_err = if expected != 0.0 {
            abs_err / expected.abs()
        } else {
            abs_err
        };
        let pass = abs_err.is_finite() && (abs_err <= tol_abs || rel_err <= tol_rel);
        let mut params = BTreeMap::new();
        params.insert("tol_abs".to_string(), format!("{tol_abs:e}"));
        params.insert("tol_rel".to_string(), format!("{tol_rel:e}"));
        CheckReport {
            check: check.into(),
            params,
            computed,
            expected,
            abs_err,
            rel_err,
            pass,
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_requires_one_tolerance() {
        let r = CheckReport::new("t", 1.0 + 1e-9, 1.0, 1e-12, 1e-8);
        assert!(r.pass);
        let r = CheckReport::new("t", 1.1, 1.0, 1e-12, 1e-8);
        assert!(!r.pass);
    }

    #[test]
    fn nan_never_passes() {
        let r = CheckReport::new("t", f64::NAN, 1.0, 1e30, 1e30);
        assert!(!r.pass);
    }
}
