//! Wold decomposition of a single isometry: `H = H_s ⊕ H_u` with
//! `H_s = ⊕_m V^m W`, `W = ran(I − VV*)`, and `H_u = H_s^⊥`.
//!
//! Truncated shifts are handled natively: powers of the wandering subspace
//! are accumulated until the image vanishes, which for a shift of depth `D`
//! happens after exactly `D` steps.

use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, hcat, spectral_norm, CMatrix};
use crate::operator::{reducing_defect, Operator};
use crate::subspace::{max_principal_angle, null_space_scaled, orth_complement, span_scaled, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Shift,
    Unitary,
    Mixed,
}

impl Classification {
    /// `Shift` iff the unitary part is trivial (and the space is not),
    /// `Unitary` iff the shift part is trivial, `Mixed` otherwise.
    pub fn from_dims(shift_dim: usize, unitary_dim: usize) -> Self {
        match (shift_dim, unitary_dim) {
            (0, _) => Self::Unitary,
            (_, 0) => Self::Shift,
            _ => Self::Mixed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Accepted,
    /// An iteration ran out of its power budget before converging.
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationStatus {
    /// Dimension unchanged from iteration `at` onwards for the whole window.
    Stabilized {
        at: usize,
    },
    BudgetExhausted,
}

/// Result of a decreasing subspace iteration.
#[derive(Clone, Debug)]
pub struct IteratedSpace {
    pub space: Subspace,
    pub status: IterationStatus,
    /// Dimension after each iteration, starting with the initial space.
    pub dims: Vec<usize>,
}

impl IteratedSpace {
    pub fn is_stabilized(&self) -> bool {
        matches!(self.status, IterationStatus::Stabilized { .. })
    }
}

/// Accumulation of `⊕_m V^m W`.
#[derive(Clone, Debug)]
pub struct ShiftPart {
    pub space: Subspace,
    /// Number of nonzero powers accumulated, counting `W` itself.
    pub powers: usize,
    /// Largest overlap `‖F_acc* F_new‖` between an increment and the accumulation.
    pub exhaustion_defect: f64,
    /// `(m, dim V^m W)` for every step where the image lost dimension without vanishing.
    pub leakage: Vec<(usize, usize)>,
    /// `false` when the power budget ran out with nonzero increments.
    pub resolved: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WoldResiduals {
    /// `‖F_s* F_u‖`.
    pub orthogonality: f64,
    /// `|dim H_s + dim H_u − N|`.
    pub completeness: f64,
    pub shift_reducing: f64,
    pub unitary_reducing: f64,
    /// Isometry defect of `V` compressed to `H_u`.
    pub unitary_isometry: f64,
    /// Co-isometry defect of `V` compressed to `H_u`.
    pub unitary_coisometry: f64,
    /// Non-orthogonality met while accumulating `⊕ V^m W`.
    pub exhaustion: f64,
    /// Angle between `ran(I − VV*)` and `ker V*`.
    pub wandering_consistency: f64,
    /// Angle between `H_u` and the iterated-range construction, when the latter stabilized.
    pub unitary_cross_check: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct WoldDecomposition {
    pub shift_part: Subspace,
    pub unitary_part: Subspace,
    pub wandering: Subspace,
    pub multiplicity: usize,
    pub classification: Classification,
    pub powers: usize,
    pub leakage: Vec<(usize, usize)>,
    pub iterated_unitary: IteratedSpace,
    pub residuals: WoldResiduals,
    pub status: Status,
}

fn wandering_with_angle(v: &Operator, cfg: &ToleranceConfig) -> (Subspace, f64) {
    let m = v.matrix();
    let defect = linalg::identity(v.dim()) - linalg::mul_adj(m, m);
    let ran = span_scaled(&defect, 1.0, cfg);
    let ker = null_space_scaled(&m.adjoint(), 1.0, cfg);
    let angle = max_principal_angle(&ran, &ker);
    (ran, angle)
}

/// `W = ran(I − VV*)`, cross-checked against `ker V*`.
pub fn wandering_subspace(v: &Operator, cfg: &ToleranceConfig) -> Result<Subspace> {
    let (w, angle) = wandering_with_angle(v, cfg);
    check_wandering(v, &w, angle, cfg)?;
    Ok(w)
}

fn check_wandering(v: &Operator, w: &Subspace, angle: f64, cfg: &ToleranceConfig) -> Result<()> {
    if angle > cfg.residual_tol {
        let ker = null_space_scaled(&v.matrix().adjoint(), 1.0, cfg);
        return Err(Error::Consistency {
            what: "wandering subspace (range of I - VV* vs kernel of V*)".into(),
            left: w.dim(),
            right: ker.dim(),
            angle,
        });
    }
    Ok(())
}

/// Second Gram-Schmidt pass of `cols` against the orthonormal `basis`.
fn orthogonalize_against(basis: &CMatrix, cols: &CMatrix) -> CMatrix {
    let once = cols - linalg::mul(basis, &linalg::adj_mul(basis, cols));
    &once - linalg::mul(basis, &linalg::adj_mul(basis, &once))
}

pub fn shift_part(v: &Operator, w: &Subspace, cfg: &ToleranceConfig) -> ShiftPart {
    let n = v.dim();
    if w.dim() == 0 {
        return ShiftPart {
            space: Subspace::zero(n),
            powers: 0,
            exhaustion_defect: 0.0,
            leakage: Vec::new(),
            resolved: true,
        };
    }
    let mut acc = w.frame().clone();
    let mut current = w.clone();
    let mut powers = 1;
    let mut exhaustion_defect = 0.0_f64;
    let mut leakage = Vec::new();
    let mut resolved = false;
    for m in 1..=cfg.max_power {
        let image = span_scaled(&linalg::mul(v.matrix(), current.frame()), 1.0, cfg);
        if image.dim() == 0 {
            resolved = true;
            break;
        }
        if image.dim() < current.dim() {
            leakage.push((m, image.dim()));
        }
        exhaustion_defect = exhaustion_defect.max(spectral_norm(&linalg::adj_mul(&acc, image.frame())));
        let fresh = span_scaled(&orthogonalize_against(&acc, image.frame()), 1.0, cfg);
        acc = hcat(&acc, fresh.frame());
        current = image;
        powers += 1;
    }
    ShiftPart {
        space: Subspace::from_frame_unchecked(acc, None),
        powers,
        exhaustion_defect,
        leakage,
        resolved,
    }
}

/// Iterates `S ↦ ran(V·S)` from the whole space, stopping once the dimension
/// has been unchanged for `stabilization_window` consecutive steps.
pub fn unitary_part_iterative(v: &Operator, cfg: &ToleranceConfig) -> IteratedSpace {
    iterate_images(Subspace::full(v.dim()), &[v], cfg)
}

/// Applies the operators round-robin (one sweep = one pass over `ops`),
/// taking ranges, until the dimension is unchanged over the window.
pub(crate) fn iterate_images(start: Subspace, ops: &[&Operator], cfg: &ToleranceConfig) -> IteratedSpace {
    let mut space = start;
    let mut dims = vec![space.dim()];
    if ops.is_empty() {
        return IteratedSpace {
            space,
            status: IterationStatus::Stabilized { at: 0 },
            dims,
        };
    }
    let mut run = 0;
    let mut run_start = 0;
    for sweep in 1..=cfg.max_power {
        let before = space.dim();
        for op in ops {
            space = span_scaled(&linalg::mul(op.matrix(), space.frame()), 1.0, cfg);
        }
        dims.push(space.dim());
        if space.dim() == before {
            if run == 0 {
                run_start = sweep;
            }
            run += 1;
        } else {
            run = 0;
        }
        if run >= cfg.stabilization_window {
            return IteratedSpace {
                space,
                status: IterationStatus::Stabilized { at: run_start },
                dims,
            };
        }
    }
    IteratedSpace {
        space,
        status: IterationStatus::BudgetExhausted,
        dims,
    }
}

fn compress(v: &Operator, s: &Subspace) -> CMatrix {
    linalg::mul(&linalg::adj_mul(s.frame(), v.matrix()), s.frame())
}

pub fn wold_decompose(v: &Operator, cfg: &ToleranceConfig) -> Result<WoldDecomposition> {
    cfg.validate()?;
    let n = v.dim();
    let (wandering, wandering_angle) = wandering_with_angle(v, cfg);
    check_wandering(v, &wandering, wandering_angle, cfg)?;

    let shift = shift_part(v, &wandering, cfg);
    let hs = shift.space;
    let hu = orth_complement(&hs);
    let iterated = unitary_part_iterative(v, cfg);

    let unitary_block = compress(v, &hu);
    let block_identity = linalg::identity(hu.dim());
    let residuals = WoldResiduals {
        orthogonality: spectral_norm(&linalg::adj_mul(hs.frame(), hu.frame())),
        completeness: (hs.dim() + hu.dim()).abs_diff(n) as f64,
        shift_reducing: reducing_defect(v, &hs),
        unitary_reducing: reducing_defect(v, &hu),
        unitary_isometry: spectral_norm(&(unitary_block.adjoint() * &unitary_block - &block_identity)),
        unitary_coisometry: spectral_norm(&(&unitary_block * unitary_block.adjoint() - &block_identity)),
        exhaustion: shift.exhaustion_defect,
        wandering_consistency: wandering_angle,
        unitary_cross_check: iterated
            .is_stabilized()
            .then(|| max_principal_angle(&hu, &iterated.space)),
    };

    let status = if shift.resolved {
        Status::Accepted
    } else {
        Status::Unresolved
    };
    if status == Status::Accepted {
        let r = &residuals;
        let checks: [(&'static str, f64); 8] = [
            ("orthogonality", r.orthogonality),
            ("completeness", r.completeness),
            ("exhaustion", r.exhaustion),
            ("shift part reducing", r.shift_reducing),
            ("unitary part reducing", r.unitary_reducing),
            ("unitary part isometry", r.unitary_isometry),
            ("unitary part co-isometry", r.unitary_coisometry),
            ("iterated unitary part agreement", r.unitary_cross_check.unwrap_or(0.0)),
        ];
        if let Some(&(check, value)) = checks.iter().find(|(_, x)| *x > cfg.residual_tol) {
            return Err(Error::Wold {
                check,
                value,
                tolerance: cfg.residual_tol,
                residuals: Box::new(residuals),
            });
        }
    }

    Ok(WoldDecomposition {
        multiplicity: wandering.dim(),
        classification: Classification::from_dims(hs.dim(), hu.dim()),
        shift_part: hs,
        unitary_part: hu,
        wandering,
        powers: shift.powers,
        leakage: shift.leakage,
        iterated_unitary: iterated,
        residuals,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{circular_shift, random_unitary, truncated_shift};
    use crate::operator::Operator;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::for_depth(6)
    }

    #[test]
    fn wandering_subspace_examples() {
        let w = wandering_subspace(&truncated_shift(4), &cfg()).unwrap();
        assert!(max_principal_angle(&w, &Subspace::coordinate(4, &[0])) < 1e-15);
        assert_eq!(wandering_subspace(&circular_shift(4), &cfg()).unwrap().dim(), 0);
        // J_3 ⊗ I_2 on C^6: wandering = e_0 ⊗ C^2 = span{e_0, e_1}
        let v = truncated_shift(3).kron(&Operator::identity(2));
        let w = wandering_subspace(&v, &cfg()).unwrap();
        assert!(max_principal_angle(&w, &Subspace::coordinate(6, &[0, 1])) < 1e-15);
    }

    #[test]
    fn shift_part_examples() {
        let j = truncated_shift(4);
        let w = wandering_subspace(&j, &cfg()).unwrap();
        let sp = shift_part(&j, &w, &cfg());
        assert!(sp.resolved);
        assert_eq!((sp.space.dim(), sp.powers), (4, 4));

        let u = circular_shift(3);
        let sp = shift_part(&u, &Subspace::zero(3), &cfg());
        assert_eq!(sp.space.dim(), 0);

        let v = Operator::direct_sum(&[truncated_shift(3), random_unitary(2, 9)]);
        let w = wandering_subspace(&v, &cfg()).unwrap();
        let sp = shift_part(&v, &w, &cfg());
        assert!(max_principal_angle(&sp.space, &Subspace::coordinate(5, &[0, 1, 2])) < 1e-12);
    }

    #[test]
    fn shift_part_reports_exhausted_budget() {
        let small = ToleranceConfig { max_power: 2, ..cfg() };
        let j = truncated_shift(5);
        let w = wandering_subspace(&j, &small).unwrap();
        let sp = shift_part(&j, &w, &small);
        assert!(!sp.resolved);
        assert_eq!(wold_decompose(&j, &small).unwrap().status, Status::Unresolved);
    }

    #[test]
    fn iterated_unitary_part_examples() {
        let it = unitary_part_iterative(&circular_shift(4), &cfg());
        assert_eq!(it.status, IterationStatus::Stabilized { at: 1 });
        assert_eq!(it.space.dim(), 4);

        let it = unitary_part_iterative(&truncated_shift(4), &cfg());
        assert!(it.is_stabilized());
        assert_eq!(it.space.dim(), 0);
        assert_eq!(&it.dims[..5], &[4, 3, 2, 1, 0]);

        let v = Operator::direct_sum(&[truncated_shift(3), random_unitary(2, 9)]);
        let it = unitary_part_iterative(&v, &cfg());
        assert!(max_principal_angle(&it.space, &Subspace::coordinate(5, &[3, 4])) < 1e-12);

        let tight = ToleranceConfig { max_power: 3, ..cfg() };
        let it = unitary_part_iterative(&truncated_shift(6), &tight);
        assert_eq!(it.status, IterationStatus::BudgetExhausted);
    }

    #[test]
    fn trichotomy_examples() {
        let d = wold_decompose(&truncated_shift(5), &cfg()).unwrap();
        assert_eq!(d.classification, Classification::Shift);
        assert_eq!((d.multiplicity, d.shift_part.dim(), d.unitary_part.dim()), (1, 5, 0));

        let d = wold_decompose(&random_unitary(4, 3), &cfg()).unwrap();
        assert_eq!(d.classification, Classification::Unitary);
        assert_eq!(d.multiplicity, 0);

        let q = random_unitary(6, 17);
        let v = Operator::direct_sum(&[truncated_shift(3), circular_shift(3)]).conjugated_by(&q);
        let d = wold_decompose(&v, &cfg()).unwrap();
        assert_eq!(d.classification, Classification::Mixed);
        assert_eq!((d.multiplicity, d.shift_part.dim(), d.unitary_part.dim()), (1, 3, 3));
        let expected = Subspace::coordinate(6, &[0, 1, 2]).mapped_by(&q);
        assert!(max_principal_angle(&d.shift_part, &expected) < 1e-10);
        assert!(d.residuals.unitary_cross_check.unwrap() < 1e-10);
    }

    #[test]
    fn uniform_depth_dimension_identity() {
        // dim H_s = multiplicity × number of accumulated powers
        let v = truncated_shift(4).kron(&Operator::identity(3));
        let d = wold_decompose(&v, &cfg()).unwrap();
        assert_eq!(d.multiplicity, 3);
        assert_eq!(d.shift_part.dim(), d.multiplicity * d.powers);
        assert!(d.leakage.is_empty());
    }

    #[test]
    fn non_isometry_fails_a_check() {
        // 2·I is not an isometry: ran(I − VV*) = C^2 ≠ ker V* = {0}
        let v = Operator::new(linalg::identity(2) * crate::linalg::C64::new(2.0, 0.0)).unwrap();
        assert!(matches!(wold_decompose(&v, &cfg()), Err(Error::Consistency { .. })));
    }
}
