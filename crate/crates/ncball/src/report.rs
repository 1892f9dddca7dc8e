//! Structured results of verification checks.
//!
//! Every solver and verifier reports its findings as a list of [`Check`]s:
//! a named quantity, the measured residual (or eigenvalue deficit), the
//! threshold it was held to, and the verdict. The JSON form is the source
//! of truth; [`Report::render_table`] produces the human-readable view.

use serde::{Deserialize, Serialize};

/// One verified quantity.
///
/// For residual checks `residual` is the measured norm and `pass` means
/// `residual <= threshold`. For eigenvalue checks `min_eigenvalue` records
/// the smallest eigenvalue found, `residual` its deficit below zero, and
/// `pass` means the spectrum stayed above `-threshold`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub min_eigenvalue: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// A check that passes when the residual stays within the threshold.
    pub fn residual(name: impl Into<String>, residual: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            residual,
            min_eigenvalue: None,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
        }
    }

    /// A check that passes when a Hermitian spectrum stays above `-tol`.
    pub fn eigen_floor(name: impl Into<String>, min_eigenvalue: f64, tol: f64) -> Check {
        Check {
            name: name.into(),
            residual: (-min_eigenvalue).max(0.0),
            min_eigenvalue: Some(min_eigenvalue),
            threshold: tol,
            pass: min_eigenvalue.is_finite() && min_eigenvalue >= -tol,
        }
    }
}

/// A titled collection of checks; passes when every check does.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report { title: title.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// Fixed-width table: check, residual, threshold, verdict.
    pub fn render_table(&self) -> String {
        let name_w = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(std::iter::once("check".len()))
            .max()
            .unwrap_or(5)
            .min(56);
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.title));
        out.push_str(&format!(
            "{:<name_w$}  {:>12}  {:>12}  {:>7}\n",
            "check", "residual", "threshold", "verdict"
        ));
        out.push_str(&format!("{}\n", "-".repeat(name_w + 40)));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<name_w$}  {:>12.3e}  {:>12.3e}  {:>7}\n",
                c.name,
                c.residual,
                c.threshold,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.pass() { "pass" } else { "FAIL" }
        ));
        out
    }
}

/// Re-judge a report against caller-chosen tolerances.
///
/// Checks whose threshold sits exactly at a library default — [`crate::TOL_EIG`]
/// for eigenvalue floors, [`crate::TOL_RES`] for residuals, `1 + TOL_EIG` for
/// norm bounds — move to the given values and their verdicts are recomputed.
/// Specially calibrated thresholds (exactness at zero, coefficient agreement,
/// quadrature error) are left alone: loosening or tightening a tolerance
/// should not silently rescale checks that were never tied to it.
pub fn retune(report: &mut Report, tol_eig: f64, tol_res: f64) {
    for check in &mut report.checks {
        let swapped = if check.threshold == crate::TOL_EIG {
            Some(tol_eig)
        } else if check.threshold == crate::TOL_RES {
            Some(tol_res)
        } else if check.threshold == 1.0 + crate::TOL_EIG {
            Some(1.0 + tol_eig)
        } else {
            None
        };
        if let Some(t) = swapped {
            check.threshold = t;
            check.pass = match check.min_eigenvalue {
                Some(low) => low.is_finite() && low >= -t,
                None => check.residual.is_finite() && check.residual <= t,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_the_thresholds() {
        let ok = Check::residual("identity-residual", 1e-12, 1e-8);
        assert!(ok.pass);
        let bad = Check::residual("identity-residual", 1e-3, 1e-8);
        assert!(!bad.pass);
        let eig = Check::eigen_floor("positivity", -5e-10, 1e-9);
        assert!(eig.pass);
        assert_eq!(eig.residual, 5e-10);
        let eig_bad = Check::eigen_floor("positivity", -1e-3, 1e-9);
        assert!(!eig_bad.pass);
        let nan = Check::residual("broken", f64::NAN, 1e-8);
        assert!(!nan.pass);
    }

    #[test]
    fn report_aggregates_and_renders() {
        let mut r = Report::new("demo");
        r.push(Check::residual("a", 0.0, 1e-8));
        r.push(Check::eigen_floor("b", 0.5, 1e-9));
        assert!(r.pass());
        let table = r.render_table();
        assert!(table.contains("demo"));
        assert!(table.contains("pass"));
        r.push(Check::residual("c", 1.0, 1e-8));
        assert!(!r.pass());
        assert!(r.render_table().contains("FAIL"));

        // JSON round trip keeps the verdicts
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.checks.len(), 3);
        assert!(!back.pass());
    }

    #[test]
    fn retune_moves_default_thresholds_only() {
        let mut r = Report::new("demo");
        r.push(Check::residual("at-default", 1e-12, crate::TOL_RES));
        r.push(Check::eigen_floor("floor-at-default", -1e-12, crate::TOL_EIG));
        r.push(Check::residual("norm-bound", 1.0, 1.0 + crate::TOL_EIG));
        r.push(Check::residual("pinned-exact", 0.0, 0.0));
        r.push(Check::residual("pinned-tight", 1e-13, 1e-12));
        assert!(r.pass());

        // Tightening the floor tolerance below the measured eigenvalue flips
        // that check; the others keep passing at their new thresholds.
        retune(&mut r, 1e-13, 1e-11);
        assert_eq!(r.checks[0].threshold, 1e-11);
        assert!(r.checks[0].pass);
        assert_eq!(r.checks[1].threshold, 1e-13);
        assert!(!r.checks[1].pass);
        assert_eq!(r.checks[2].threshold, 1.0 + 1e-13);
        assert!(r.checks[2].pass);
        assert_eq!(r.checks[3].threshold, 0.0);
        assert_eq!(r.checks[4].threshold, 1e-12);

        // Retuned thresholds no longer sit at the defaults, so a second
        // retune only touches checks that still do (here: none).
        let snapshot = serde_json::to_string(&r).unwrap();
        retune(&mut r, 0.5, 0.5);
        assert_eq!(serde_json::to_string(&r).unwrap(), snapshot);
    }
}
