//! Tolerance-aware arithmetic of subspaces of `C^N`.
//!
//! A [`Subspace`] is carried by an orthonormal frame. Every dimension is
//! decided by one singular value decomposition and a singular-gap rule; the
//! gap at the cut is kept alongside the frame so that marginal decisions are
//! visible to callers instead of silently shaping downstream results.

use std::f64::consts::FRAC_PI_2;

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, decide_rank, singular_values, spectral_norm, svd, CMatrix, RankInfo, C64};
use crate::operator::Operator;

/// A subspace of `C^N` represented by an `N × d` matrix with orthonormal columns.
///
/// The zero subspace (`d = 0`) is an ordinary value.
#[derive(Clone, Debug)]
pub struct Subspace {
    frame: CMatrix,
    rank: Option<RankInfo>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self::from_frame_unchecked(CMatrix::zeros(ambient_dim, 0), None)
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::from_frame_unchecked(linalg::identity(ambient_dim), None)
    }

    /// Span of the standard basis vectors with the given (0-based) indices.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut frame = CMatrix::zeros(ambient_dim, indices.len());
        for (col, &i) in indices.iter().enumerate() {
            frame[(i, col)] = C64::new(1.0, 0.0);
        }
        Self::from_frame_unchecked(frame, None)
    }

    pub(crate) fn from_frame_unchecked(frame: CMatrix, rank: Option<RankInfo>) -> Self {
        Self { frame, rank }
    }

    /// Wraps a frame that is already orthonormal, checking `‖F*F − I‖ ≤ 1e−10`.
    pub fn from_orthonormal_frame(frame: CMatrix) -> Result<Self> {
        if !linalg::is_finite(&frame) {
            return Err(Error::Input("frame has non-finite entries".into()));
        }
        let defect = spectral_norm(&(linalg::adj_mul(&frame, &frame) - linalg::identity(frame.ncols())));
        if defect > 1e-10 {
            return Err(Error::Input(format!(
                "frame columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self::from_frame_unchecked(frame, None))
    }

    /// Column space of `columns` under the relative singular-gap rule.
    pub fn orthonormalize(columns: &CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if !linalg::is_finite(columns) {
            return Err(Error::Input("columns have non-finite entries".into()));
        }
        Ok(span_scaled(columns, 0.0, cfg))
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    /// Rank decision that produced this space, if it came from one.
    pub fn rank_info(&self) -> Option<&RankInfo> {
        self.rank.as_ref()
    }

    pub fn is_marginal(&self) -> bool {
        self.rank.is_some_and(|r| r.marginal)
    }

    /// Maps a subspace of `C^d` into `C^N` through an isometric `N × d` frame.
    pub fn embed(&self, outer: &CMatrix) -> Self {
        assert_eq!(outer.ncols(), self.ambient_dim(), "embedding frame mismatch");
        Self::from_frame_unchecked(linalg::mul(outer, &self.frame), self.rank)
    }

    /// `Q·S` for a unitary `Q`.
    pub fn mapped_by(&self, q: &Operator) -> Self {
        Self::from_frame_unchecked(linalg::mul(q.matrix(), &self.frame), self.rank)
    }
}

/// Column space of `m`, keeping singular values `≥ rank_tol · max(σ_max, reference)`.
pub(crate) fn span_scaled(m: &CMatrix, reference: f64, cfg: &ToleranceConfig) -> Subspace {
    let dec = svd(m);
    let (r, info) = decide_rank(&dec.s, reference, cfg.rank_tol);
    Subspace::from_frame_unchecked(dec.u.columns(0, r).into_owned(), Some(info))
}

/// Null space of `m` under the same rule, for any shape of `m`.
pub(crate) fn null_space_scaled(m: &CMatrix, reference: f64, cfg: &ToleranceConfig) -> Subspace {
    let cols = m.ncols();
    let padded;
    let m = if m.nrows() < cols {
        padded = linalg::vcat(&[m.clone(), CMatrix::zeros(cols - m.nrows(), cols)]);
        &padded
    } else {
        m
    };
    let dec = svd(m);
    let (r, info) = decide_rank(&dec.s, reference, cfg.rank_tol);
    Subspace::from_frame_unchecked(dec.v.columns(r, cols - r).into_owned(), Some(info))
}

/// `{x : ‖Tx‖ ≤ rank_tol·‖T‖·‖x‖}` as decided by the singular-gap rule.
pub fn kernel(t: &Operator, cfg: &ToleranceConfig) -> Subspace {
    null_space_scaled(t.matrix(), 0.0, cfg)
}

pub fn range(t: &Operator, cfg: &ToleranceConfig) -> Subspace {
    span_scaled(t.matrix(), 0.0, cfg)
}

fn check_ambient(spaces: &[&Subspace]) -> Result<usize> {
    let n = spaces
        .first()
        .ok_or_else(|| Error::Input("expected at least one subspace".into()))?
        .ambient_dim();
    if let Some(bad) = spaces.iter().find(|s| s.ambient_dim() != n) {
        return Err(Error::Input(format!(
            "ambient dimension mismatch: {} vs {n}",
            bad.ambient_dim()
        )));
    }
    Ok(n)
}

/// Intersection by successive restriction: starting from the smallest space
/// with frame `F`, each further `S_j` replaces `F` by `F · null((I − P_j)F)`.
pub fn intersect(spaces: &[Subspace], cfg: &ToleranceConfig) -> Result<Subspace> {
    let n = check_ambient(&spaces.iter().collect::<Vec<_>>())?;
    if spaces.iter().any(|s| s.dim() == 0) {
        return Ok(Subspace::zero(n));
    }
    let mut proper: Vec<&Subspace> = spaces.iter().filter(|s| s.dim() < n).collect();
    proper.sort_by_key(|s| s.dim());
    let Some((first, rest)) = proper.split_first() else {
        return Ok(spaces[0].clone());
    };
    let mut acc = (*first).clone();
    for s in rest {
        if acc.dim() == 0 {
            break;
        }
        let f = acc.frame();
        let g = s.frame();
        let outside = f - linalg::mul(g, &linalg::adj_mul(g, f));
        let null = null_space_scaled(&outside, 1.0, cfg);
        let rank = null.rank;
        acc = Subspace::from_frame_unchecked(linalg::mul(f, null.frame()), rank);
    }
    Ok(acc)
}

/// Orthogonal complement; its dimension is exactly `N − dim S`.
pub fn orth_complement(s: &Subspace) -> Subspace {
    let n = s.ambient_dim();
    match s.dim() {
        0 => Subspace::full(n),
        d if d == n => Subspace::zero(n),
        d => {
            let f = s.frame();
            let dec = svd(&(linalg::identity(n) - linalg::mul_adj(f, f)));
            Subspace::from_frame_unchecked(dec.u.columns(0, n - d).into_owned(), None)
        }
    }
}

/// `S1 ⊖ S2 = S1 ∩ S2^⊥` for `S2 ⊆ S1`; containment is checked against `residual_tol`.
pub fn subspace_minus(s1: &Subspace, s2: &Subspace, cfg: &ToleranceConfig) -> Result<Subspace> {
    check_ambient(&[s1, s2])?;
    if s2.dim() > s1.dim() {
        return Err(Error::Containment { angle: FRAC_PI_2 });
    }
    if s2.dim() == 0 {
        return Ok(s1.clone());
    }
    let angle = containment_angle(s2, s1);
    if angle > cfg.residual_tol {
        return Err(Error::Containment { angle });
    }
    let keep = s1.dim() - s2.dim();
    let f1 = s1.frame();
    let f2 = s2.frame();
    let residual = f1 - linalg::mul(f2, &linalg::adj_mul(f2, f1));
    let dec = svd(&residual);
    Ok(Subspace::from_frame_unchecked(
        dec.u.columns(0, keep).into_owned(),
        None,
    ))
}

/// Largest angle between a vector of `inner` and the space `outer`.
pub fn containment_angle(inner: &Subspace, outer: &Subspace) -> f64 {
    if inner.dim() == 0 {
        return 0.0;
    }
    if outer.dim() == 0 {
        return FRAC_PI_2;
    }
    let fi = inner.frame();
    let fo = outer.frame();
    let residual = fi - linalg::mul(fo, &linalg::adj_mul(fo, fi));
    spectral_norm(&residual).min(1.0).asin()
}

/// Orthogonal projector `F F*`.
pub fn projector(s: &Subspace) -> Operator {
    Operator::from_matrix_unchecked(linalg::mul_adj(s.frame(), s.frame()))
}

/// Principal angles between two subspaces in nonincreasing order.
///
/// There are `min(dim S1, dim S2)` of them. Small angles come from the sines
/// of the residual `(I − P_big) F_small` and large ones from the cosines of
/// `F_big* F_small`, so both ends keep full relative precision.
pub fn principal_angles(a: &Subspace, b: &Subspace) -> Vec<f64> {
    assert_eq!(a.ambient_dim(), b.ambient_dim(), "ambient dimension mismatch");
    let (big, small) = if a.dim() >= b.dim() { (a, b) } else { (b, a) };
    if small.dim() == 0 {
        return Vec::new();
    }
    let cross = linalg::adj_mul(big.frame(), small.frame());
    let cosines = singular_values(&cross);
    let residual = small.frame() - linalg::mul(big.frame(), &cross);
    let mut sines = singular_values(&residual);
    sines.reverse();
    let mut angles: Vec<f64> = cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| {
            if c * c < 0.5 {
                c.min(1.0).acos()
            } else {
                s.min(1.0).asin()
            }
        })
        .collect();
    angles.reverse();
    angles
}

/// Largest principal angle, or `π/2` when the dimensions differ.
pub fn max_principal_angle(a: &Subspace, b: &Subspace) -> f64 {
    if a.dim() != b.dim() {
        return FRAC_PI_2;
    }
    principal_angles(a, b).first().copied().unwrap_or(0.0)
}

/// Largest pairwise frame cross-product norm, plus `|Σ dims − N|` when
/// `completeness` is requested.
pub fn direct_sum_residual(spaces: &[Subspace], completeness: bool) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in spaces.iter().enumerate() {
        for b in &spaces[i + 1..] {
            if a.dim() > 0 && b.dim() > 0 {
                worst = worst.max(spectral_norm(&linalg::adj_mul(a.frame(), b.frame())));
            }
        }
    }
    if completeness {
        let n = spaces.first().map_or(0, |s| s.ambient_dim());
        let total: usize = spaces.iter().map(Subspace::dim).sum();
        worst += total.abs_diff(n) as f64;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_unitary, truncated_shift};
    use nalgebra::DVector;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e(n: usize, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn orthonormality_defect(s: &Subspace) -> f64 {
        spectral_norm(&(s.frame().adjoint() * s.frame() - linalg::identity(s.dim())))
    }

    #[test]
    fn duplicate_columns_collapse() {
        let cols = CMatrix::from_columns(&[e(3, 0), e(3, 0)]);
        let s = Subspace::orthonormalize(&cols, &cfg()).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(max_principal_angle(&s, &Subspace::coordinate(3, &[0])) < 1e-15);
    }

    #[test]
    fn identity_columns_span_everything() {
        let s = Subspace::orthonormalize(&linalg::identity(4), &cfg()).unwrap();
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn nearly_axis_column_keeps_its_direction() {
        // the 3×1 matrix (1, 1e-14, 0)ᵀ has the single singular value
        // sqrt(1 + 1e-28) ≈ 1 with left vector (1, 1e-14, 0)ᵀ / ‖·‖
        let mut col = e(3, 0);
        col[1] = C64::new(1e-14, 0.0);
        let s = Subspace::orthonormalize(&CMatrix::from_columns(&[col]), &cfg()).unwrap();
        assert_eq!(s.dim(), 1);
        let angle = max_principal_angle(&s, &Subspace::coordinate(3, &[0]));
        assert!((angle - 1e-14).abs() < 1e-20, "angle {angle:e}");
    }

    #[test]
    fn non_finite_columns_are_rejected() {
        let mut cols = linalg::identity(2);
        cols[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(Subspace::orthonormalize(&cols, &cfg()), Err(Error::Input(_))));
    }

    #[test]
    fn kernel_and_range_of_truncated_shift() {
        let j = truncated_shift(3);
        let ker = kernel(&j.adjoint(), &cfg());
        assert!(max_principal_angle(&ker, &Subspace::coordinate(3, &[0])) < 1e-15);
        assert_eq!(kernel(&Operator::identity(4), &cfg()).dim(), 0);

        let defect = Operator::identity(3).matrix() - j.matrix() * j.matrix().adjoint();
        let ran = range(&Operator::new(defect).unwrap(), &cfg());
        assert!(max_principal_angle(&ran, &Subspace::coordinate(3, &[0])) < 1e-15);
        assert_eq!(range(&Operator::zeros(3), &cfg()).dim(), 0);
        assert_eq!(kernel(&Operator::zeros(3), &cfg()).dim(), 3);
    }

    #[test]
    fn kernel_recovers_a_planted_small_singular_value() {
        let u = random_unitary(6, 1);
        let v = random_unitary(6, 2);
        let sigma = [3.0, 2.0, 1.5, 1.0, 0.5, 1e-15];
        let d = CMatrix::from_diagonal(&DVector::from_iterator(6, sigma.iter().map(|&x| C64::new(x, 0.0))));
        let t = Operator::new(u.matrix() * d * v.matrix().adjoint()).unwrap();
        let ker = kernel(&t, &cfg());
        assert_eq!(ker.dim(), 1);
        let planted = Subspace::from_orthonormal_frame(v.matrix().columns(5, 1).into_owned()).unwrap();
        assert!(max_principal_angle(&ker, &planted) < 1e-12);
        assert!(spectral_norm(&(t.matrix() * ker.frame())) <= cfg().residual_tol * t.norm());
    }

    #[test]
    fn range_of_projector_is_its_subspace() {
        let q = random_unitary(5, 3);
        let planted = Subspace::from_orthonormal_frame(q.matrix().columns(0, 2).into_owned()).unwrap();
        let r = range(&projector(&planted), &cfg());
        assert_eq!(r.dim(), 2);
        assert!(max_principal_angle(&r, &planted) < 1e-12);
    }

    #[test]
    fn intersection_examples() {
        let a = Subspace::coordinate(3, &[0, 1]);
        let b = Subspace::coordinate(3, &[1, 2]);
        let ab = intersect(&[a.clone(), b], &cfg()).unwrap();
        assert!(max_principal_angle(&ab, &Subspace::coordinate(3, &[1])) < 1e-14);
        let same = intersect(&[a.clone(), Subspace::full(3)], &cfg()).unwrap();
        assert!(max_principal_angle(&same, &a) == 0.0);
        assert_eq!(intersect(&[a, Subspace::zero(3)], &cfg()).unwrap().dim(), 0);
        assert!(intersect(&[Subspace::full(2), Subspace::full(3)], &cfg()).is_err());
        assert!(intersect(&[], &cfg()).is_err());
    }

    #[test]
    fn complement_examples() {
        let c = orth_complement(&Subspace::coordinate(3, &[0]));
        assert!(max_principal_angle(&c, &Subspace::coordinate(3, &[1, 2])) < 1e-14);
        assert_eq!(orth_complement(&Subspace::zero(3)).dim(), 3);
        let q = random_unitary(7, 4);
        let s = Subspace::from_orthonormal_frame(q.matrix().columns(0, 3).into_owned()).unwrap();
        let c = orth_complement(&s);
        assert_eq!(c.dim(), 4);
        let cross = s.frame().adjoint() * c.frame();
        assert!(cross.iter().all(|z| z.norm() <= 1e-12));
        assert!(orthonormality_defect(&c) < 1e-13);
    }

    #[test]
    fn minus_examples() {
        let s01 = Subspace::coordinate(3, &[0, 1]);
        let s1 = Subspace::coordinate(3, &[1]);
        let d = subspace_minus(&s01, &s1, &cfg()).unwrap();
        assert!(max_principal_angle(&d, &Subspace::coordinate(3, &[0])) < 1e-14);
        assert_eq!(subspace_minus(&s01, &s01, &cfg()).unwrap().dim(), 0);
        match subspace_minus(&s01, &Subspace::coordinate(3, &[2]), &cfg()) {
            Err(Error::Containment { angle }) => assert!((angle - FRAC_PI_2).abs() < 1e-12),
            other => panic!("expected containment error, got {other:?}"),
        }
    }

    #[test]
    fn projector_and_angles_basics() {
        let p = projector(&Subspace::coordinate(2, &[0]));
        assert_eq!(p.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(p.matrix()[(1, 1)], C64::new(0.0, 0.0));
        let q = random_unitary(6, 5);
        let s = Subspace::from_orthonormal_frame(q.matrix().columns(0, 3).into_owned()).unwrap();
        assert!(principal_angles(&s, &s).iter().all(|&a| a < 1e-14));
        // angles between span{e0, e1} and span{e0, cos t e1 + sin t e2}
        let t = 0.3_f64;
        let mut v = e(3, 1) * C64::new(t.cos(), 0.0);
        v[2] = C64::new(t.sin(), 0.0);
        let b = Subspace::from_orthonormal_frame(CMatrix::from_columns(&[e(3, 0), v])).unwrap();
        let angles = principal_angles(&Subspace::coordinate(3, &[0, 1]), &b);
        assert!((angles[0] - t).abs() < 1e-14 && angles[1].abs() < 1e-15);
    }

    #[test]
    fn tiny_angles_are_resolved() {
        let t = 1e-11_f64;
        let mut v = e(3, 0) * C64::new(t.cos(), 0.0);
        v[1] = C64::new(t.sin(), 0.0);
        let b = Subspace::from_orthonormal_frame(CMatrix::from_columns(&[v])).unwrap();
        let a = principal_angles(&Subspace::coordinate(3, &[0]), &b)[0];
        assert!((a - t).abs() < 1e-20, "{a:e}");
    }

    #[test]
    fn direct_sum_residual_of_coordinate_split() {
        let parts = [
            Subspace::coordinate(4, &[0, 2]),
            Subspace::coordinate(4, &[1]),
            Subspace::coordinate(4, &[3]),
        ];
        assert_eq!(direct_sum_residual(&parts, true), 0.0);
        assert_eq!(direct_sum_residual(&parts[..2], true), 1.0);
        assert!((direct_sum_residual(&[Subspace::full(2), Subspace::coordinate(2, &[0])], false) - 1.0).abs() < 1e-15);
    }
}
