use std::io::Write;
use std::path::Path;

use woldkit::{
    block_agreement, block_span, check_equivalence_conditions, decompose_direct, decompose_recursive,
    generalized_wandering_identity, intersect, max_principal_angle, reducing_defect, wandering_intersection,
    wold_decompose, Classification, IsometryTuple, MultiWoldDecomposition, Status, SubsetLabel, ToleranceConfig,
};

use crate::error::{CliResult, Exit};
use crate::report::{CheckRow, SuiteReport};
use crate::{GlobalArgs, Suite};

pub fn verify(manifest: &Path, suite: Suite, g: &GlobalArgs, out: &mut dyn Write) -> CliResult<Exit> {
    let (tuple, cfg) = super::load(manifest, g)?;
    let name = match suite {
        Suite::Wold => "wold",
        Suite::Multi => "multi",
        Suite::Identities => "identities",
        Suite::Equivalence => "equivalence",
    };
    let report = match tuple.gate(&cfg) {
        Err(woldkit::Error::Rejected { .. }) => SuiteReport::new(name, cfg, tuple.defects().clone(), Vec::new(), true),
        Err(e) => return Err(e.into()),
        Ok(()) => {
            let rows = match suite {
                Suite::Wold => wold_rows(&tuple, &cfg),
                Suite::Multi => multi_rows(&tuple, &cfg),
                Suite::Identities => {
                    let mut rows = identity_rows(&tuple, &cfg);
                    rows.extend(equivalence_rows(&tuple, &cfg).into_iter().map(|r| CheckRow {
                        informational: true,
                        ..r
                    }));
                    rows
                }
                Suite::Equivalence => equivalence_rows(&tuple, &cfg),
            };
            SuiteReport::new(name, cfg, tuple.defects().clone(), rows, false)
        }
    };
    super::emit(&report, report.render(), g, out)?;
    Ok(report.status.exit())
}

fn wold_rows(t: &IsometryTuple, cfg: &ToleranceConfig) -> Vec<CheckRow> {
    (1..=t.n())
        .map(|i| {
            let name = format!("Wold decomposition of V_{i}");
            match wold_decompose(t.coordinate(i), cfg) {
                Ok(d) => {
                    let r = &d.residuals;
                    let worst = [
                        r.orthogonality,
                        r.completeness,
                        r.shift_reducing,
                        r.unitary_reducing,
                        r.unitary_isometry,
                        r.unitary_coisometry,
                        r.exhaustion,
                        r.wandering_consistency,
                        r.unitary_cross_check.unwrap_or(0.0),
                    ]
                    .into_iter()
                    .fold(0.0, f64::max);
                    let detail = format!(
                        "shift {}, unitary {}, multiplicity {}, {:?}",
                        d.shift_part.dim(),
                        d.unitary_part.dim(),
                        d.multiplicity,
                        d.classification
                    )
                    .to_lowercase();
                    CheckRow::check(name, d.status == Status::Accepted, Some(worst), detail)
                }
                Err(e) => CheckRow::check(name, false, None, e.to_string()),
            }
        })
        .collect()
}

fn dims_detail(d: &MultiWoldDecomposition) -> String {
    let parts: Vec<String> = d
        .blocks
        .iter()
        .filter(|(_, b)| b.dim() > 0)
        .map(|(l, b)| format!("{l}:{}", b.dim()))
        .collect();
    parts.join(" ")
}

fn decomposition_row(name: &str, d: &woldkit::Result<MultiWoldDecomposition>) -> CheckRow {
    match d {
        Ok(d) => CheckRow::check(
            name,
            d.status == Status::Accepted,
            Some(d.residuals.orthogonality.max(d.residuals.joint_reducing)),
            dims_detail(d),
        ),
        Err(e) => CheckRow::check(name, false, None, e.to_string()),
    }
}

fn multi_rows(t: &IsometryTuple, cfg: &ToleranceConfig) -> Vec<CheckRow> {
    let n = t.n();
    let direct = decompose_direct(t, n, cfg);
    let recursive = decompose_recursive(t, n, cfg);
    let mut rows = vec![
        decomposition_row("direct decomposition", &direct),
        decomposition_row("recursive decomposition", &recursive),
    ];
    if let Ok(d) = &direct {
        let total: usize = d.blocks.values().map(|b| b.dim()).sum();
        rows.push(CheckRow::check(
            "block dimensions sum to N",
            total == t.dim(),
            Some(d.residuals.completeness),
            format!("{total} of {}", t.dim()),
        ));
        let mismatches: Vec<String> = d
            .blocks
            .iter()
            .flat_map(|(label, b)| {
                b.coordinates.iter().filter_map(move |c| {
                    let expected = if label.contains(c.coordinate) {
                        Classification::Shift
                    } else {
                        Classification::Unitary
                    };
                    (c.classification != expected).then(|| format!("V_{} on {label}", c.coordinate))
                })
            })
            .collect();
        let worst = d
            .blocks
            .values()
            .flat_map(|b| b.coordinates.iter().map(|c| c.defect))
            .fold(0.0, f64::max);
        rows.push(CheckRow::check(
            "coordinate classes match labels",
            mismatches.is_empty(),
            Some(worst),
            if mismatches.is_empty() {
                "shift on members, unitary elsewhere".into()
            } else {
                mismatches.join(", ")
            },
        ));
    }
    if let (Ok(a), Ok(b)) = (&direct, &recursive) {
        let worst = block_agreement(a, b).into_iter().map(|(_, x)| x).fold(0.0, f64::max);
        let same_dims = a.dims() == b.dims();
        rows.push(CheckRow::check(
            "direct and recursive blocks agree",
            same_dims && worst <= cfg.residual_tol,
            Some(worst),
            if same_dims {
                "max principal angle over blocks"
            } else {
                "block dimensions differ"
            },
        ));
    }
    rows
}

fn nonempty_labels(n: usize) -> impl Iterator<Item = SubsetLabel> {
    SubsetLabel::all(n).filter(|l| !l.is_empty())
}

fn identity_rows(t: &IsometryTuple, cfg: &ToleranceConfig) -> Vec<CheckRow> {
    let n = t.n();
    let tol = cfg.residual_tol;
    let mut rows = Vec::new();

    let singles = (1..=n)
        .map(|i| wandering_intersection(t, &SubsetLabel::new(n, &[i]).expect("valid"), cfg))
        .collect::<woldkit::Result<Vec<_>>>();
    let singles = match singles {
        Ok(s) => s,
        Err(e) => {
            rows.push(CheckRow::check(
                "coordinate wandering subspaces",
                false,
                None,
                e.to_string(),
            ));
            return rows;
        }
    };

    for a in nonempty_labels(n).filter(|a| a.len() > 1) {
        let name = format!("W_{a} product range = intersection");
        let parts: Vec<_> = a.members().iter().map(|&i| singles[i - 1].clone()).collect();
        let row = match (wandering_intersection(t, &a, cfg), intersect(&parts, cfg)) {
            (Ok(w), Ok(x)) => {
                let angle = max_principal_angle(&w, &x);
                CheckRow::check(
                    name,
                    w.dim() == x.dim() && angle <= tol,
                    Some(angle),
                    format!("dim {}", w.dim()),
                )
            }
            (Err(e), _) | (_, Err(e)) => CheckRow::check(name, false, None, e.to_string()),
        };
        rows.push(row);
    }

    for a in nonempty_labels(n) {
        let wa = match wandering_intersection(t, &a, cfg) {
            Ok(w) => w,
            Err(e) => {
                rows.push(CheckRow::check(format!("W_{a}"), false, None, e.to_string()));
                continue;
            }
        };
        for j in a.complement() {
            let defect = reducing_defect(t.coordinate(j), &wa);
            rows.push(CheckRow::check(
                format!("W_{a} reduces V_{j}"),
                defect <= tol,
                Some(defect),
                format!("dim W_{a} = {}", wa.dim()),
            ));
            let name = format!("W_{a} minus V_{j}W_{a} = W_{a} ∩ W_{j}");
            rows.push(match generalized_wandering_identity(t, &a, j, cfg) {
                Ok(r) => CheckRow::check(
                    name,
                    r.left_dim == r.right_dim && r.max_angle <= tol,
                    Some(r.max_angle),
                    format!("dims {} and {}", r.left_dim, r.right_dim),
                ),
                Err(e) => CheckRow::check(name, false, None, e.to_string()),
            });
        }
    }

    let full = SubsetLabel::full(n);
    let name = "joint wandering subspace is wandering";
    rows.push(
        match wandering_intersection(t, &full, cfg).and_then(|w| block_span(t, &full, &w, cfg).map(|s| (w, s))) {
            Ok((w, span)) => CheckRow::check(
                name,
                span.resolved && span.orthogonality_defect <= tol,
                Some(span.orthogonality_defect),
                format!("dim {}, {} orbit terms", w.dim(), span.terms),
            ),
            Err(e) => CheckRow::check(name, false, None, e.to_string()),
        },
    );
    rows
}

/// Condition rows are informational; the suite passes when the conditions
/// hold together or fail together.
fn equivalence_rows(t: &IsometryTuple, cfg: &ToleranceConfig) -> Vec<CheckRow> {
    let report = match check_equivalence_conditions(t, cfg) {
        Ok(r) => r,
        Err(e) => return vec![CheckRow::check("equivalence conditions", false, None, e.to_string())],
    };
    let mut rows: Vec<CheckRow> = report
        .conditions
        .iter()
        .map(|c| {
            CheckRow::info(
                format!("condition {}", c.condition.name()),
                c.holds,
                Some(c.residual),
                c.detail.clone(),
            )
        })
        .collect();
    let verdict = if report.all_hold() {
        "all hold"
    } else if report.none_hold() {
        "none holds"
    } else {
        "mixed"
    };
    rows.push(CheckRow::check(
        "conditions agree",
        report.consistent,
        None,
        format!("{verdict}; joint wandering dim {}", report.joint_wandering_dim),
    ));
    rows
}
