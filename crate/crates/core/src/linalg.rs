//! Dense complex matrix helpers shared by the subspace and operator layers.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::matmul::matmul;
use faer::linalg::svd::{svd_scratch, ComputeSvdVectors, SvdParams};
use faer::traits::Conjugate;
use faer::{Accum, Auto, Mat, MatMut, MatRef, Par, Spec};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Ratio below which the singular gap at a rank cut is reported as marginal.
pub const MARGINAL_GAP: f64 = 10.0;

/// Singular value decomposition with singular values sorted in nonincreasing order.
///
/// `u` is `rows × k` and `v` is `cols × k` with `k = min(rows, cols)`, so that
/// `m = u · diag(s) · v*`.
pub(crate) struct SortedSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

fn view(m: &CMatrix) -> MatRef<'_, C64> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn gemm<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> CMatrix
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    let (rows, cols) = out.shape();
    let dst = MatMut::from_column_major_slice_mut(out.as_mut_slice(), rows, cols);
    matmul(dst, Accum::Replace, a, b, C64::new(1.0, 0.0), Par::Seq);
    out
}

/// `a · b` on faer's kernels.
pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    gemm(view(a), view(b))
}

/// `a* · b`.
pub fn adj_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    gemm(view(a).adjoint(), view(b))
}

/// `a · b*`.
pub fn mul_adj(a: &CMatrix, b: &CMatrix) -> CMatrix {
    gemm(view(a), view(b).adjoint())
}

type SingularVectors = (Mat<C64>, Mat<C64>);

/// Thin SVD on the bidiagonal QR iteration. faer's divide-and-conquer path
/// (used above 128 columns by default) can return spurious singular values
/// near `2^-13` for matrices with large clusters of exact zeros.
fn faer_svd(m: MatRef<'_, C64>, vectors: bool) -> (Vec<f64>, Option<SingularVectors>) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let params: Spec<SvdParams, C64> = SvdParams {
        recursion_threshold: usize::MAX,
        ..<SvdParams as Auto<C64>>::auto()
    }
    .into();
    let mode = if vectors {
        ComputeSvdVectors::Thin
    } else {
        ComputeSvdVectors::No
    };
    let mut s = Diag::<C64>::zeros(k);
    let mut u = Mat::<C64>::zeros(rows, if vectors { k } else { 0 });
    let mut v = Mat::<C64>::zeros(cols, if vectors { k } else { 0 });
    let mut buffer = MemBuffer::new(svd_scratch::<C64>(rows, cols, mode, mode, Par::Seq, params));
    faer::linalg::svd::svd(
        m,
        s.as_mut(),
        vectors.then(|| u.as_mut()),
        vectors.then(|| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buffer),
        params,
    )
    .expect("SVD of a finite matrix converges");
    let values = (0..k).map(|j| s.column_vector()[j].re).collect();
    (values, vectors.then_some((u, v)))
}

pub(crate) fn svd(m: &CMatrix) -> SortedSvd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SortedSvd {
            u: CMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        };
    }
    let (s, vectors) = faer_svd(view(m), true);
    let (u, v) = vectors.expect("vectors requested");
    SortedSvd {
        u: CMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s,
        v: CMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    faer_svd(view(m), false).0
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Outcome of a singular-gap rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    /// Absolute cutoff applied to the singular values.
    pub cutoff: f64,
    /// Ratio of the smallest kept to the largest dropped singular value
    /// (infinite when nothing nonzero was dropped).
    pub gap_ratio: f64,
    pub marginal: bool,
}

/// Counts singular values at or above `rank_tol · max(σ_max, reference)`.
///
/// `reference` supplies a natural scale for matrices that may be pure
/// round-off (e.g. `I − VV*` for a unitary `V`); pass `0.0` for a purely
/// relative decision.
pub(crate) fn decide_rank(s: &[f64], reference: f64, rank_tol: f64) -> (usize, RankInfo) {
    let smax = s.first().copied().unwrap_or(0.0);
    let scale = smax.max(reference);
    let cutoff = rank_tol * scale;
    let rank = s.iter().take_while(|&&x| x > 0.0 && x >= cutoff).count();
    let upper = if rank > 0 { s[rank - 1] } else { scale };
    let gap_ratio = match s.get(rank) {
        Some(&lower) if lower > 0.0 => upper / lower,
        _ => f64::INFINITY,
    };
    (
        rank,
        RankInfo {
            cutoff,
            gap_ratio,
            marginal: gap_ratio < MARGINAL_GAP,
        },
    )
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Horizontal concatenation `[a | b]`.
pub(crate) fn hcat(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows(), "row mismatch in hcat");
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Vertical concatenation of blocks with equal column counts.
pub(crate) fn vcat(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "column mismatch in vcat");
        out.rows_mut(r, b.nrows()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let m = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub(crate) fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let m = CMatrix::from_fn(4, 3, |i, j| C64::new((i * 3 + j) as f64, (i as f64) - (j as f64)));
        let d = svd(&m);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.s.len(),
            d.s.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let back = &d.u * sigma * d.v.adjoint();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn rank_decision_reports_marginal_gaps() {
        let (r, info) = decide_rank(&[1.0, 0.5, 1e-12], 0.0, 1e-10);
        assert_eq!(r, 2);
        assert!(!info.marginal);
        let (r, info) = decide_rank(&[1.0, 2e-10, 1e-10], 0.0, 1.5e-10);
        assert_eq!(r, 2);
        assert!(info.marginal);
        // pure round-off against a unit reference has rank zero
        let (r, _) = decide_rank(&[3e-16, 1e-17], 1.0, 1e-10);
        assert_eq!(r, 0);
        let (r, _) = decide_rank(&[0.0, 0.0], 0.0, 1e-10);
        assert_eq!(r, 0);
    }

    #[test]
    fn direct_sum_places_blocks_on_the_diagonal() {
        let a = identity(2);
        let b = CMatrix::from_element(1, 1, C64::new(3.0, 0.0));
        let s = direct_sum(&[a, b]);
        assert_eq!(s.shape(), (3, 3));
        assert_eq!(s[(2, 2)], C64::new(3.0, 0.0));
        assert_eq!(s[(0, 2)], C64::new(0.0, 0.0));
    }
}
