//! Numerical checks of the a priori bounds, barriers and interpolation
//! inequalities for the degenerate operator.

pub mod barrier;
pub mod boundary;
pub mod interp;
pub mod maxprin;
pub mod schauder;

use std::fmt;

use crate::grid::Grid;
use crate::io::fmt_f64;

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Preconditions of an implication did not hold.
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        })
    }
}

/// One report row: `lhs <= rhs * slack` unless stated otherwise by the check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check_id: String,
    pub anchor: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

impl CheckRow {
    pub const CSV_HEADER: [&'static str; 6] = ["check_id", "anchor", "lhs", "rhs", "slack", "pass"];

    pub fn new(check_id: impl Into<String>, anchor: &'static str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let verdict = Verdict::from_bool(lhs <= rhs * slack);
        CheckRow {
            check_id: check_id.into(),
            anchor,
            lhs,
            rhs,
            slack,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.check_id.clone(),
            self.anchor.to_string(),
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.slack),
            self.verdict.to_string(),
        ]
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:<20} lhs={:.6e} rhs={:.6e} slack={} {}",
            self.check_id, self.anchor, self.lhs, self.rhs, self.slack, self.verdict
        )
    }
}

/// Fraction of the box trimmed from each truncation face before auditing.
pub const AUDIT_MARGIN: f64 = 0.25;

/// Whether a spatial point lies in the audited part of `grid`.
pub fn in_audit_region(grid: &Grid, x: &[f64], margin: f64) -> bool {
    let d = grid.dim();
    let xw = grid.spec.x_half_width * (1.0 - margin);
    let yw = grid.spec.y_max * (1.0 - margin);
    x[..d - 1].iter().all(|v| v.abs() <= xw + 1e-12) && x[d - 1] <= yw + 1e-12
}
