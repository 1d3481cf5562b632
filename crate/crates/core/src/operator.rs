//! Dense operators, isometry tuples and their defect functionals.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, spectral_norm, CMatrix};
use crate::subspace::Subspace;

/// A dense complex square matrix acting on `C^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Input(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::Input("operator has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix_unchecked(linalg::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.matrix.adjoint())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Operator) -> Self {
        Self::from_matrix_unchecked(self.matrix.kronecker(&rhs.matrix))
    }

    pub fn direct_sum(ops: &[Operator]) -> Self {
        let blocks: Vec<CMatrix> = ops.iter().map(|o| o.matrix.clone()).collect();
        Self::from_matrix_unchecked(linalg::direct_sum(&blocks))
    }

    /// `q · self · q*`.
    pub fn conjugated_by(&self, q: &Operator) -> Self {
        Self::from_matrix_unchecked(linalg::mul_adj(&linalg::mul(&q.matrix, &self.matrix), &q.matrix))
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// `‖V*V − I‖`.
    pub fn isometry_defect(&self) -> f64 {
        spectral_norm(&(linalg::adj_mul(&self.matrix, &self.matrix) - linalg::identity(self.dim())))
    }

    /// `‖VV* − I‖`.
    pub fn coisometry_defect(&self) -> f64 {
        spectral_norm(&(linalg::mul_adj(&self.matrix, &self.matrix) - linalg::identity(self.dim())))
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(linalg::mul(&self.matrix, &rhs.matrix))
    }
}

/// Defect functionals of a tuple, all measured in the spectral norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    /// `‖V_i*V_i − I‖` per operator.
    pub isometry_defect: Vec<f64>,
    /// `‖(V_i*V_i − I)·P_interior‖` per operator.
    pub interior_isometry_defect: Vec<f64>,
    /// `max_{i<j} ‖V_iV_j − V_jV_i‖`.
    pub commutation_defect: f64,
    /// `max_{i<j} ‖V_iV_j* − V_j*V_i‖`.
    pub double_commutation_defect: f64,
}

pub fn defect_report(operators: &[Operator], interior: Option<&Operator>) -> DefectReport {
    let mut isometry_defect = Vec::with_capacity(operators.len());
    let mut interior_isometry_defect = Vec::with_capacity(operators.len());
    for v in operators {
        let gram_defect = linalg::adj_mul(&v.matrix, &v.matrix) - linalg::identity(v.dim());
        isometry_defect.push(spectral_norm(&gram_defect));
        interior_isometry_defect.push(match interior {
            Some(p) => spectral_norm(&linalg::mul(&gram_defect, &p.matrix)),
            None => *isometry_defect.last().unwrap(),
        });
    }
    let mut commutation_defect = 0.0_f64;
    let mut double_commutation_defect = 0.0_f64;
    for (i, a) in operators.iter().enumerate() {
        for b in &operators[i + 1..] {
            let (a, b) = (&a.matrix, &b.matrix);
            commutation_defect = commutation_defect.max(spectral_norm(&(linalg::mul(a, b) - linalg::mul(b, a))));
            double_commutation_defect =
                double_commutation_defect.max(spectral_norm(&(linalg::mul_adj(a, b) - linalg::adj_mul(b, a))));
        }
    }
    DefectReport {
        isometry_defect,
        interior_isometry_defect,
        commutation_defect,
        double_commutation_defect,
    }
}

/// An `n`-tuple of operators on a common space, with an optional interior
/// projector marking where truncated shifts are genuinely isometric.
#[derive(Clone, Debug)]
pub struct IsometryTuple {
    operators: Vec<Operator>,
    interior: Option<Operator>,
    defects: DefectReport,
}

impl IsometryTuple {
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        Self::build(operators, None)
    }

    pub fn with_interior(operators: Vec<Operator>, interior: Operator) -> Result<Self> {
        Self::build(operators, Some(interior))
    }

    fn build(operators: Vec<Operator>, interior: Option<Operator>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Input("tuple needs at least one operator".into()))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::Input("ambient dimension must be positive".into()));
        }
        if let Some(bad) = operators.iter().position(|o| o.dim() != dim) {
            return Err(Error::Input(format!(
                "operator {} has dimension {}, expected {dim}",
                bad + 1,
                operators[bad].dim()
            )));
        }
        if let Some(p) = &interior {
            if p.dim() != dim {
                return Err(Error::Input(format!(
                    "interior projector has dimension {}, expected {dim}",
                    p.dim()
                )));
            }
        }
        let defects = defect_report(&operators, interior.as_ref());
        Ok(Self {
            operators,
            interior,
            defects,
        })
    }

    pub fn n(&self) -> usize {
        self.operators.len()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    /// The operator with 1-based coordinate index `i`.
    pub fn coordinate(&self, i: usize) -> &Operator {
        &self.operators[i - 1]
    }

    pub fn interior(&self) -> Option<&Operator> {
        self.interior.as_ref()
    }

    pub fn defects(&self) -> &DefectReport {
        &self.defects
    }

    /// Acceptance gate for decomposition: (double) commutation defects and
    /// interior isometry defects must all be within `residual_tol`.
    pub fn gate(&self, cfg: &ToleranceConfig) -> Result<()> {
        let d = &self.defects;
        let tol = cfg.residual_tol;
        let reason = if d.double_commutation_defect > tol {
            Some(format!(
                "not doubly commuting (defect {:.3e})",
                d.double_commutation_defect
            ))
        } else if d.commutation_defect > tol {
            Some(format!("not commuting (defect {:.3e})", d.commutation_defect))
        } else {
            d.interior_isometry_defect.iter().position(|&x| x > tol).map(|i| {
                format!(
                    "operator {} is not an isometry on the interior (defect {:.3e})",
                    i + 1,
                    d.interior_isometry_defect[i]
                )
            })
        };
        match reason {
            Some(reason) => Err(Error::Rejected {
                reason,
                defects: Box::new(d.clone()),
            }),
            None => Ok(()),
        }
    }

    /// Simultaneous conjugation `V_i ↦ q V_i q*` (the interior projector included).
    pub fn conjugated_by(&self, q: &Operator) -> Result<Self> {
        let ops = self.operators.iter().map(|v| v.conjugated_by(q)).collect();
        Self::build(ops, self.interior.as_ref().map(|p| p.conjugated_by(q)))
    }
}

/// `‖(I − P_S) V P_S‖`, the failure of `S` to be `V`-invariant.
pub fn invariance_defect(v: &Operator, s: &Subspace) -> f64 {
    if s.dim() == 0 {
        return 0.0;
    }
    let f = s.frame();
    let vf = linalg::mul(&v.matrix, f);
    let compressed = linalg::adj_mul(f, &vf);
    spectral_norm(&(vf - linalg::mul(f, &compressed)))
}

/// `max(‖(I−P)VP‖, ‖PV(I−P)‖)`; zero exactly when `S` reduces `V`.
pub fn reducing_defect(v: &Operator, s: &Subspace) -> f64 {
    if s.dim() == 0 || s.dim() == s.ambient_dim() {
        return 0.0;
    }
    let f = s.frame();
    let fv = linalg::adj_mul(f, &v.matrix);
    let compressed = linalg::mul(&fv, f);
    let outgoing = spectral_norm(&(fv - linalg::mul_adj(&compressed, f)));
    invariance_defect(v, s).max(outgoing)
}

/// Compression `F*VF` of `V` to an invariant subspace with frame `F`.
pub fn restrict(v: &Operator, s: &Subspace, cfg: &ToleranceConfig) -> Result<Operator> {
    if v.dim() != s.ambient_dim() {
        return Err(Error::Input(format!(
            "operator dimension {} does not match subspace ambient dimension {}",
            v.dim(),
            s.ambient_dim()
        )));
    }
    let defect = invariance_defect(v, s);
    if defect > cfg.residual_tol {
        return Err(Error::NotInvariant { defect });
    }
    let f = s.frame();
    Ok(Operator::from_matrix_unchecked(linalg::mul(
        &linalg::adj_mul(f, &v.matrix),
        f,
    )))
}
