use std::io::Write;
use std::path::Path;
use std::time::Instant;

use woldkit::multi::{BlockResiduals, CoordinateCheck, GlobalResiduals};
use woldkit::{
    block_agreement, decompose_direct, decompose_recursive, wold_decompose, Classification, IsometryTuple,
    MultiWoldDecomposition, Status, SubsetLabel, ToleranceConfig,
};

use crate::error::{CliError, CliResult, Exit};
use crate::manifest::{OracleFile, SCHEMA_VERSION};
use crate::report::{AgreementRow, BlockRow, DecompositionReport, OracleComparison, OracleRow, ReportStatus};
use crate::{GlobalArgs, MethodArg};

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub depth: Option<usize>,
    pub method: MethodArg,
    pub timing: bool,
}

#[derive(Default)]
struct Computed {
    blocks: Vec<BlockRow>,
    residuals: Option<GlobalResiduals>,
    agreement: Vec<AgreementRow>,
    messages: Vec<String>,
    resolved: bool,
}

pub fn decompose(manifest: &Path, opts: &DecomposeOptions, g: &GlobalArgs, out: &mut dyn Write) -> CliResult<Exit> {
    let started = Instant::now();
    let (tuple, cfg) = super::load(manifest, g)?;
    let n = tuple.n();
    let m = opts.depth.unwrap_or(n);
    if m == 0 || m > n {
        return Err(CliError::Usage(format!("--depth must lie in 1..={n}, got {m}")));
    }
    let oracle = g.oracle.as_deref().map(OracleFile::load).transpose()?;
    if let Some(o) = &oracle {
        if o.n != n || o.ambient_dim != tuple.dim() {
            return Err(CliError::Usage(format!(
                "oracle describes n={}, N={} but the manifest has n={n}, N={}",
                o.n,
                o.ambient_dim,
                tuple.dim()
            )));
        }
    }

    let method = match (m, opts.method) {
        (1, _) => "wold",
        (_, MethodArg::Direct) => "direct",
        (_, MethodArg::Recursive) => "recursive",
        (_, MethodArg::Both) => "both",
    };
    let mut report = DecompositionReport {
        schema_version: SCHEMA_VERSION,
        command: "decompose",
        ambient_dim: tuple.dim(),
        n,
        m,
        method,
        status: ReportStatus::Accepted,
        tolerances: cfg,
        defects: tuple.defects().clone(),
        blocks: Vec::new(),
        residuals: None,
        agreement: Vec::new(),
        oracle: None,
        messages: Vec::new(),
        timing_ms: None,
    };

    match tuple.gate(&cfg) {
        Ok(()) => {
            let computed = if m == 1 {
                single(&tuple, &cfg)
            } else {
                multi(&tuple, m, opts.method, &cfg)
            };
            let computed = match computed {
                Ok(c) => c,
                Err(e @ woldkit::Error::Input(_)) => return Err(e.into()),
                Err(e) => Computed {
                    messages: vec![e.to_string()],
                    ..Computed::default()
                },
            };
            report.blocks = computed.blocks;
            report.residuals = computed.residuals;
            report.agreement = computed.agreement;
            report.messages = computed.messages;
            if !computed.resolved {
                report.status = ReportStatus::Unresolved;
            }
            if let (Some(o), false) = (&oracle, report.blocks.is_empty()) {
                let comparison = compare(o, m, &report.blocks)?;
                if !comparison.matches {
                    report.status = ReportStatus::Unresolved;
                    report.messages.push("block dimensions differ from the oracle".into());
                }
                report.oracle = Some(comparison);
            }
        }
        Err(woldkit::Error::Rejected { reason, .. }) => {
            report.status = ReportStatus::Rejected;
            report.messages.push(reason);
        }
        Err(e) => return Err(e.into()),
    }

    if opts.timing {
        report.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    super::emit(&report, report.render(), g, out)?;
    Ok(report.status.exit())
}

/// Depth one: the classical decomposition of `V_1`, reported as blocks `{1}` and `∅`.
fn single(tuple: &IsometryTuple, cfg: &ToleranceConfig) -> woldkit::Result<Computed> {
    let d = wold_decompose(tuple.coordinate(1), cfg)?;
    let r = &d.residuals;
    let row = |members: &[usize], dim: usize, classification: Classification, defect: f64, reducing: f64| BlockRow {
        label: SubsetLabel::new(1, members).expect("valid label"),
        dim,
        coordinates: if dim == 0 {
            Vec::new()
        } else {
            vec![CoordinateCheck {
                coordinate: 1,
                classification,
                defect,
            }]
        },
        residuals: BlockResiduals {
            joint_reducing: reducing,
            span_orthogonality: 0.0,
        },
    };
    let unitary_defect = r.unitary_isometry.max(r.unitary_coisometry);
    let mut messages = Vec::new();
    if d.status == Status::Unresolved {
        messages.push(format!("shift part not exhausted within {} powers", cfg.max_power));
    }
    Ok(Computed {
        blocks: vec![
            row(
                &[],
                d.unitary_part.dim(),
                Classification::Unitary,
                unitary_defect,
                r.unitary_reducing,
            ),
            row(
                &[1],
                d.shift_part.dim(),
                Classification::Shift,
                r.exhaustion,
                r.shift_reducing,
            ),
        ],
        residuals: Some(GlobalResiduals {
            completeness: r.completeness,
            orthogonality: r.orthogonality,
            joint_reducing: r.shift_reducing.max(r.unitary_reducing),
        }),
        agreement: Vec::new(),
        messages,
        resolved: d.status == Status::Accepted,
    })
}

fn rows(d: &MultiWoldDecomposition) -> Vec<BlockRow> {
    d.blocks
        .iter()
        .map(|(label, b)| BlockRow {
            label: *label,
            dim: b.dim(),
            coordinates: b.coordinates.clone(),
            residuals: b.residuals.clone(),
        })
        .collect()
}

fn multi(tuple: &IsometryTuple, m: usize, method: MethodArg, cfg: &ToleranceConfig) -> woldkit::Result<Computed> {
    let primary = match method {
        MethodArg::Recursive => decompose_recursive(tuple, m, cfg)?,
        MethodArg::Direct | MethodArg::Both => decompose_direct(tuple, m, cfg)?,
    };
    let mut computed = Computed {
        blocks: rows(&primary),
        residuals: Some(primary.residuals.clone()),
        resolved: primary.status == Status::Accepted,
        ..Computed::default()
    };
    if !primary.unresolved.is_empty() {
        computed
            .messages
            .push(format!("power budget exhausted at {}", primary.unresolved.join(", ")));
    }
    if method == MethodArg::Both {
        match decompose_recursive(tuple, m, cfg) {
            Ok(other) => {
                let other_dims = other.dims();
                for (label, angle) in block_agreement(&primary, &other) {
                    let row = AgreementRow {
                        label,
                        direct_dim: primary.blocks[&label].dim(),
                        recursive_dim: other_dims[&label],
                        max_angle: angle,
                    };
                    if row.direct_dim != row.recursive_dim || angle > cfg.residual_tol {
                        computed.resolved = false;
                        computed.messages.push(format!("methods disagree on block {label}"));
                    }
                    computed.agreement.push(row);
                }
                if other.status != Status::Accepted {
                    computed.resolved = false;
                    computed
                        .messages
                        .push("recursive method left iterations unresolved".into());
                }
            }
            Err(e) => {
                computed.resolved = false;
                computed.messages.push(format!("recursive method: {e}"));
            }
        }
    }
    Ok(computed)
}

fn compare(oracle: &OracleFile, m: usize, blocks: &[BlockRow]) -> CliResult<OracleComparison> {
    let expected = oracle.dims_at_depth(m)?;
    let rows: Vec<OracleRow> = blocks
        .iter()
        .map(|b| OracleRow {
            label: b.label,
            expected: expected.get(&b.label).copied().unwrap_or(0),
            computed: b.dim,
        })
        .collect();
    Ok(OracleComparison {
        matches: rows.iter().all(|r| r.expected == r.computed),
        rows,
    })
}
