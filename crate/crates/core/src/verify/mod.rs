//! Verification suites: each claim becomes a record that compares a measured
//! value with an independently obtained reference.
//!
//! Records for formulas whose exactness is contested are `MeasuredOnly`. They
//! are reported and never fail a run.

mod convergence;
pub mod oracles;
mod pipelines;
mod suites;

use std::fmt::Write as _;

pub use convergence::{convergence_study, STUDIES};
pub use oracles::{radial_reduction, radial_reduction_profile};
pub use pipelines::{cormack_semi_discrete, cormack_volume_study, point_reconstruction, VolumeStudy};
pub use suites::{run_suite, theta_probe_table, SuiteConfig, SUITES};

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Stated outright in the source material.
    Published,
    /// Follows immediately from the definitions.
    Exact,
    /// Re-derived here and confirmed by an independent oracle.
    Derived,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Exact => "exact",
            Provenance::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    MeasuredOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::MeasuredOnly => "measured-only",
        }
    }
}

/// How `measured` is held against `reference` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|m - r| ≤ tol`
    Absolute,
    /// `|m - r| ≤ tol·|r|`
    Relative,
    /// `m ≥ r`
    AtLeast,
    /// `m ≤ r`
    AtMost,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::Absolute => "abs",
            Comparison::Relative => "rel",
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        }
    }

    pub fn holds(self, measured: f64, reference: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Absolute => (measured - reference).abs() <= tolerance,
            Comparison::Relative => (measured - reference).abs() <= tolerance * reference.abs(),
            Comparison::AtLeast => measured >= reference,
            Comparison::AtMost => measured <= reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: String,
    /// The claim being checked, in words.
    pub anchor: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub verdict: Verdict,
    pub provenance: Provenance,
    pub oracle: String,
    /// CLI invocation that reproduces the record.
    pub replay: String,
}

impl CheckRecord {
    /// A pass/fail record; the verdict follows from the comparison.
    #[allow(clippy::too_many_arguments)]
    pub fn check(
        id: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
        comparison: Comparison,
        provenance: Provenance,
        oracle: impl Into<String>,
        replay: impl Into<String>,
    ) -> Self {
        let verdict = if comparison.holds(measured, reference, tolerance) { Verdict::Pass } else { Verdict::Fail };
        Self {
            id: id.into(),
            anchor: anchor.into(),
            measured,
            reference,
            tolerance,
            comparison,
            verdict,
            provenance,
            oracle: oracle.into(),
            replay: replay.into(),
        }
    }

    /// Same fields, verdict fixed to `MeasuredOnly`.
    #[allow(clippy::too_many_arguments)]
    pub fn measured(
        id: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        reference: f64,
        provenance: Provenance,
        oracle: impl Into<String>,
        replay: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            measured,
            reference,
            tolerance: f64::NAN,
            comparison: Comparison::Absolute,
            verdict: Verdict::MeasuredOnly,
            provenance,
            oracle: oracle.into(),
            replay: replay.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub suite: String,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self { suite: suite.into(), records: Vec::new() }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    /// No record failed. Measured-only records never count against this.
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub const CSV_HEADER: &'static str =
        "suite,id,anchor,provenance,oracle,measured,reference,tolerance,comparison,verdict,replay";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let cells = [
                csv_cell(&self.suite),
                csv_cell(&r.id),
                csv_cell(&r.anchor),
                r.provenance.as_str().to_string(),
                csv_cell(&r.oracle),
                format!("{:.16e}", r.measured),
                format!("{:.16e}", r.reference),
                format!("{:.16e}", r.tolerance),
                r.comparison.as_str().to_string(),
                r.verdict.as_str().to_string(),
                csv_cell(&r.replay),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (pass, fail, info) = self.records.iter().fold((0, 0, 0), |acc, r| match r.verdict {
            Verdict::Pass => (acc.0 + 1, acc.1, acc.2),
            Verdict::Fail => (acc.0, acc.1 + 1, acc.2),
            Verdict::MeasuredOnly => (acc.0, acc.1, acc.2 + 1),
        });
        let _ = writeln!(out, "suite {}: {pass} pass, {fail} fail, {info} measured-only", self.suite);
        for r in &self.records {
            let tol = if r.verdict == Verdict::MeasuredOnly {
                String::new()
            } else {
                format!(" [{} {:.3e}]", r.comparison.as_str(), r.tolerance)
            };
            let _ = writeln!(
                out,
                "{:<13} {:<34} measured {:<24.16e} reference {:.16e}{tol}",
                r.verdict.as_str().to_uppercase(),
                r.id,
                r.measured,
                r.reference,
            );
            let _ = writeln!(out, "              {} ({}; oracle: {})", r.anchor, r.provenance.as_str(), r.oracle);
            if r.verdict == Verdict::Fail {
                let _ = writeln!(out, "              replay: {}", r.replay);
            }
        }
        out
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_writers() {
        let mut rep = VerificationReport::new("demo");
        rep.push(CheckRecord::check("a", "x, y", 1.0, 1.0 + 1e-12, 1e-9, Comparison::Relative, Provenance::Exact, "o", "r"));
        rep.push(CheckRecord::check("b", "z", 0.5, 1.0, 0.0, Comparison::AtLeast, Provenance::Derived, "o", "r"));
        rep.push(CheckRecord::measured("c", "w", 3.0, 1.0, Provenance::Derived, "o", "r"));
        assert_eq!(rep.records[0].verdict, Verdict::Pass);
        assert_eq!(rep.records[1].verdict, Verdict::Fail);
        assert!(!rep.passed());
        assert_eq!(rep.failures().count(), 1);
        let csv = rep.to_csv();
        assert!(csv.contains("\"x, y\""));
        assert_eq!(csv.lines().count(), 4);
        let text = rep.to_text();
        assert!(text.contains("1 pass, 1 fail, 1 measured-only"));
        assert!(text.contains("replay: r"));
    }
}
