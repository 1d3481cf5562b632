//! Machine-readable reports and their fixed-width renderings.

use std::fmt::Write as _;

use serde::Serialize;
use woldkit::multi::{BlockResiduals, CoordinateCheck, GlobalResiduals};
use woldkit::{DefectReport, SubsetLabel, ToleranceConfig};

use crate::error::Exit;
use crate::manifest::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Accepted,
    Unresolved,
    Rejected,
}

impl ReportStatus {
    pub fn exit(self) -> Exit {
        match self {
            ReportStatus::Accepted => Exit::Accepted,
            ReportStatus::Unresolved => Exit::Unresolved,
            ReportStatus::Rejected => Exit::Rejected,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReportStatus::Accepted => "accepted",
            ReportStatus::Unresolved => "unresolved",
            ReportStatus::Rejected => "rejected",
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| sci(x)).collect::<Vec<_>>().join(" ")
}

fn render_defects(out: &mut String, d: &DefectReport) {
    let _ = writeln!(out, "  isometry defect           {}", list(&d.isometry_defect));
    let _ = writeln!(out, "  interior isometry defect  {}", list(&d.interior_isometry_defect));
    let _ = writeln!(out, "  commutation defect        {}", sci(d.commutation_defect));
    let _ = writeln!(out, "  double commutation defect {}", sci(d.double_commutation_defect));
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub ambient_dim: usize,
    pub n: usize,
    pub status: ReportStatus,
    pub tolerances: ToleranceConfig,
    pub defects: DefectReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CheckReport {
    pub fn new(
        ambient_dim: usize,
        n: usize,
        tolerances: ToleranceConfig,
        defects: DefectReport,
        reason: Option<String>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "check",
            ambient_dim,
            n,
            status: if reason.is_some() {
                ReportStatus::Rejected
            } else {
                ReportStatus::Accepted
            },
            tolerances,
            defects,
            reason,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "check  n={}  N={}  status={}",
            self.n,
            self.ambient_dim,
            self.status.as_str()
        );
        render_defects(&mut out, &self.defects);
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "  reason: {r}");
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRow {
    pub label: SubsetLabel,
    pub dim: usize,
    pub coordinates: Vec<CoordinateCheck>,
    pub residuals: BlockResiduals,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementRow {
    pub label: SubsetLabel,
    pub direct_dim: usize,
    pub recursive_dim: usize,
    pub max_angle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub label: SubsetLabel,
    pub expected: usize,
    pub computed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub matches: bool,
    pub rows: Vec<OracleRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub ambient_dim: usize,
    pub n: usize,
    pub m: usize,
    pub method: &'static str,
    pub status: ReportStatus,
    pub tolerances: ToleranceConfig,
    pub defects: DefectReport,
    pub blocks: Vec<BlockRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<GlobalResiduals>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub agreement: Vec<AgreementRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    pub messages: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl DecompositionReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "decompose  n={}  m={}  N={}  method={}  status={}",
            self.n,
            self.m,
            self.ambient_dim,
            self.method,
            self.status.as_str()
        );
        render_defects(&mut out, &self.defects);
        if !self.blocks.is_empty() {
            let classes: Vec<String> = self
                .blocks
                .iter()
                .map(|row| {
                    let parts: Vec<String> = row
                        .coordinates
                        .iter()
                        .map(|c| format!("V{}={}", c.coordinate, class_name(c.classification)))
                        .collect();
                    if parts.is_empty() {
                        "-".to_string()
                    } else {
                        parts.join(" ")
                    }
                })
                .collect();
            let width = classes
                .iter()
                .map(String::len)
                .max()
                .unwrap_or(0)
                .max("classification".len());
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "  {:<14} {:>6}  {:<width$} {:>12} {:>12}",
                "block", "dim", "classification", "reducing", "span-orth"
            );
            for (row, classes) in self.blocks.iter().zip(&classes) {
                let _ = writeln!(
                    out,
                    "  {:<14} {:>6}  {:<width$} {:>12} {:>12}",
                    row.label.to_string(),
                    row.dim,
                    classes,
                    sci(row.residuals.joint_reducing),
                    sci(row.residuals.span_orthogonality),
                );
            }
        }
        if let Some(r) = &self.residuals {
            let _ = writeln!(
                out,
                "\n  completeness {}  orthogonality {}  joint reducing {}",
                r.completeness,
                sci(r.orthogonality),
                sci(r.joint_reducing)
            );
        }
        if !self.agreement.is_empty() {
            let _ = writeln!(
                out,
                "\n  {:<14} {:>8} {:>10} {:>12}",
                "agreement", "direct", "recursive", "max angle"
            );
            for a in &self.agreement {
                let _ = writeln!(
                    out,
                    "  {:<14} {:>8} {:>10} {:>12}",
                    a.label.to_string(),
                    a.direct_dim,
                    a.recursive_dim,
                    sci(a.max_angle)
                );
            }
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "\n  oracle: {}",
                if o.matches { "all block dims match" } else { "MISMATCH" }
            );
            for r in o.rows.iter().filter(|r| r.expected != r.computed) {
                let _ = writeln!(out, "    {}: expected {}, computed {}", r.label, r.expected, r.computed);
            }
        }
        for m in &self.messages {
            let _ = writeln!(out, "  note: {m}");
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(out, "  elapsed {t:.1} ms");
        }
        out
    }
}

fn class_name(c: woldkit::Classification) -> &'static str {
    match c {
        woldkit::Classification::Shift => "shift",
        woldkit::Classification::Unitary => "unitary",
        woldkit::Classification::Mixed => "mixed",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    /// Rows that document expected behaviour without affecting the suite status.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub detail: String,
}

impl CheckRow {
    pub fn check(name: impl Into<String>, passed: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            informational: false,
            value,
            detail: detail.into(),
        }
    }

    pub fn info(name: impl Into<String>, passed: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            informational: true,
            ..Self::check(name, passed, value, detail)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub suite: &'static str,
    pub status: ReportStatus,
    pub tolerances: ToleranceConfig,
    pub defects: DefectReport,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn new(
        suite: &'static str,
        tolerances: ToleranceConfig,
        defects: DefectReport,
        rows: Vec<CheckRow>,
        rejected: bool,
    ) -> Self {
        let status = if rejected {
            ReportStatus::Rejected
        } else if rows.iter().all(|r| r.passed || r.informational) {
            ReportStatus::Accepted
        } else {
            ReportStatus::Unresolved
        };
        Self {
            schema_version: SCHEMA_VERSION,
            command: "verify",
            suite,
            status,
            tolerances,
            defects,
            rows,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verify  suite={}  status={}", self.suite, self.status.as_str());
        if self.status == ReportStatus::Rejected {
            render_defects(&mut out, &self.defects);
            let _ = writeln!(out, "  suite skipped: tuple rejected by the gate");
            return out;
        }
        let width = self
            .rows
            .iter()
            .map(|r| r.name.chars().count())
            .max()
            .unwrap_or(4)
            .max(4);
        for r in &self.rows {
            let verdict = match (r.passed, r.informational) {
                (true, false) => "PASS",
                (false, false) => "FAIL",
                (true, true) => "holds",
                (false, true) => "fails",
            };
            let value = r.value.map(sci).unwrap_or_else(|| "-".into());
            let pad = width - r.name.chars().count();
            let _ = writeln!(
                out,
                "  {}{}  {:<5} {:>10}  {}",
                r.name,
                " ".repeat(pad),
                verdict,
                value,
                r.detail
            );
        }
        out
    }
}

/// Serializes a report as a single pretty-printed JSON document.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
