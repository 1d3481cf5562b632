//! Wold-type decomposition of a tuple of doubly commuting isometries into
//! `2^m` jointly reducing blocks `H_A`, `A ⊆ {1, …, m}`, on which `V_i` is a
//! shift for `i ∈ A` and unitary for `i ∉ A`.
//!
//! Two independent routes produce the blocks:
//!
//! * [`decompose_direct`] evaluates the closed form
//!   `H_A = ⊕_{k ∈ ℕ^A} V_A^k ( ∩_{j ∈ ℕ^{I_m∖A}} V_{I_m∖A}^j W_A )` with
//!   `W_A = ran ∏_{i∈A} (I − V_iV_i*)`;
//! * [`decompose_recursive`] splits by the Wold decomposition of `V_1`,
//!   restricts the remaining operators to each part and recurses.
//!
//! Both hand their blocks to the same verifier, which certifies completeness,
//! orthogonality, joint reducibility and the per-coordinate shift/unitary
//! behaviour by re-running [`wold_decompose`] on every restriction.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, hcat, spectral_norm, CMatrix};
use crate::operator::{reducing_defect, restrict, IsometryTuple, Operator};
use crate::subspace::{direct_sum_residual, intersect, max_principal_angle, span_scaled, subspace_minus, Subspace};
use crate::wold::{iterate_images, wold_decompose, Classification, IteratedSpace, Status};

/// Largest tuple length accepted by the block decompositions.
pub const MAX_COORDINATES: usize = 16;

/// A subset `A ⊆ {1, …, m}`, stored as a bitmask (bit `i−1` for member `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetLabel {
    m: usize,
    mask: u32,
}

impl SubsetLabel {
    /// Builds `A` from 1-based members.
    pub fn new(m: usize, members: &[usize]) -> Result<Self> {
        if m > MAX_COORDINATES {
            return Err(Error::Input(format!(
                "at most {MAX_COORDINATES} coordinates are supported"
            )));
        }
        let mut mask = 0u32;
        for &i in members {
            if i == 0 || i > m {
                return Err(Error::Input(format!("subset member {i} outside 1..={m}")));
            }
            mask |= 1 << (i - 1);
        }
        Ok(Self { m, mask })
    }

    pub fn empty(m: usize) -> Self {
        Self { m, mask: 0 }
    }

    pub fn full(m: usize) -> Self {
        Self {
            m,
            mask: ((1u64 << m) - 1) as u32,
        }
    }

    /// All `2^m` subsets, ordered by bitmask.
    pub fn all(m: usize) -> impl Iterator<Item = SubsetLabel> {
        (0..(1u32 << m)).map(move |mask| SubsetLabel { m, mask })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.m && self.mask & (1 << (i - 1)) != 0
    }

    pub fn members(&self) -> Vec<usize> {
        (1..=self.m).filter(|&i| self.contains(i)).collect()
    }

    /// `I_m ∖ A`.
    pub fn complement(&self) -> Vec<usize> {
        (1..=self.m).filter(|&i| !self.contains(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// `A ∩ I_k`, viewed as a subset of `I_k`.
    pub fn truncate(&self, k: usize) -> SubsetLabel {
        let k = k.min(self.m);
        SubsetLabel {
            m: k,
            mask: self.mask & (((1u64 << k) - 1) as u32),
        }
    }
}

impl fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

impl Serialize for SubsetLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.members().serialize(serializer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Recursive,
}

/// Outcome of verifying how `V_i` acts on one block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoordinateCheck {
    pub coordinate: usize,
    pub classification: Classification,
    /// Unitary coordinates: `max(‖C*C − I‖, ‖CC* − I‖)` for the compression `C`;
    /// shift coordinates: largest residual of the compression's Wold decomposition.
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockResiduals {
    /// `max_{i ≤ m}` reducing defect of `V_i` on the block.
    pub joint_reducing: f64,
    /// Non-orthogonality between graded increments of the outer sum (direct route only).
    pub span_orthogonality: f64,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub space: Subspace,
    /// Inner space `∩_j V_{I_m∖A}^j W_A` (direct route only).
    pub core: Option<Subspace>,
    /// One entry per coordinate `1..=m`; empty for trivial blocks or unresolved results.
    pub coordinates: Vec<CoordinateCheck>,
    pub residuals: BlockResiduals,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GlobalResiduals {
    /// `|Σ_A dim H_A − N|`.
    pub completeness: f64,
    /// Largest pairwise frame cross-product norm.
    pub orthogonality: f64,
    pub joint_reducing: f64,
}

#[derive(Clone, Debug)]
pub struct MultiWoldDecomposition {
    pub n: usize,
    pub m: usize,
    pub method: Method,
    pub blocks: BTreeMap<SubsetLabel, Block>,
    pub residuals: GlobalResiduals,
    pub status: Status,
    /// Labels (or branches) whose iterations exhausted the power budget.
    pub unresolved: Vec<String>,
}

impl MultiWoldDecomposition {
    /// Block for the 1-based members `A`.
    pub fn block(&self, members: &[usize]) -> Option<&Block> {
        let label = SubsetLabel::new(self.m, members).ok()?;
        self.blocks.get(&label)
    }

    pub fn dims(&self) -> BTreeMap<SubsetLabel, usize> {
        self.blocks.iter().map(|(l, b)| (*l, b.dim())).collect()
    }
}

/// Per-block maximal principal angle between two decompositions of the same depth.
pub fn block_agreement(a: &MultiWoldDecomposition, b: &MultiWoldDecomposition) -> Vec<(SubsetLabel, f64)> {
    a.blocks
        .iter()
        .map(|(label, block)| {
            let angle = b.blocks.get(label).map_or(std::f64::consts::FRAC_PI_2, |other| {
                max_principal_angle(&block.space, &other.space)
            });
            (*label, angle)
        })
        .collect()
}

/// Per-coordinate defect projectors `I − V_iV_i*` and their ranges `W_i`.
struct Context<'a> {
    tuple: &'a IsometryTuple,
    defect_projectors: Vec<CMatrix>,
    coordinate_wandering: Vec<Subspace>,
}

impl<'a> Context<'a> {
    fn new(tuple: &'a IsometryTuple, cfg: &ToleranceConfig) -> Self {
        let n = tuple.dim();
        let defect_projectors: Vec<CMatrix> = tuple
            .operators()
            .iter()
            .map(|v| linalg::identity(n) - linalg::mul_adj(v.matrix(), v.matrix()))
            .collect();
        let coordinate_wandering = defect_projectors.iter().map(|p| span_scaled(p, 1.0, cfg)).collect();
        Self {
            tuple,
            defect_projectors,
            coordinate_wandering,
        }
    }

    fn op(&self, i: usize) -> &Operator {
        self.tuple.coordinate(i)
    }

    fn wandering_intersection(&self, a: &SubsetLabel, cfg: &ToleranceConfig) -> Result<Subspace> {
        let members = a.members();
        if members.is_empty() {
            return Err(Error::Input("W_A needs a nonempty subset A".into()));
        }
        // ran(P_1 ⋯ P_k) = P_1 ⋯ P_{k−1} ran(P_k)
        let (&last, init) = members.split_last().expect("nonempty");
        let mut image = self.coordinate_wandering[last - 1].frame().clone();
        for &i in init.iter().rev() {
            image = linalg::mul(&self.defect_projectors[i - 1], &image);
        }
        let via_product = span_scaled(&image, 1.0, cfg);
        let parts: Vec<Subspace> = members
            .iter()
            .map(|&i| self.coordinate_wandering[i - 1].clone())
            .collect();
        let via_intersection = intersect(&parts, cfg)?;
        let angle = max_principal_angle(&via_product, &via_intersection);
        if angle > cfg.residual_tol {
            return Err(Error::Consistency {
                what: format!("W_{a} (range of projector product vs intersection)"),
                left: via_product.dim(),
                right: via_intersection.dim(),
                angle,
            });
        }
        Ok(via_product)
    }

    fn inner_core(&self, a: &SubsetLabel, cfg: &ToleranceConfig) -> Result<IteratedSpace> {
        let start = if a.is_empty() {
            Subspace::full(self.tuple.dim())
        } else {
            self.wandering_intersection(a, cfg)?
        };
        let ops: Vec<&Operator> = a.complement().into_iter().map(|j| self.op(j)).collect();
        Ok(iterate_images(start, &ops, cfg))
    }
}

fn check_label(t: &IsometryTuple, a: &SubsetLabel) -> Result<()> {
    if a.m() > t.n() {
        return Err(Error::Input(format!(
            "subset over I_{} used with a {}-tuple",
            a.m(),
            t.n()
        )));
    }
    Ok(())
}

/// `W_A = ran ∏_{i∈A}(I − V_iV_i*)`, cross-checked against `∩_{i∈A} W_i`.
pub fn wandering_intersection(t: &IsometryTuple, a: &SubsetLabel, cfg: &ToleranceConfig) -> Result<Subspace> {
    check_label(t, a)?;
    Context::new(t, cfg).wandering_intersection(a, cfg)
}

/// Both sides of `W_A ⊖ V_jW_A = (∩_{i∈A} W_i) ∩ W_j`, computed independently.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub label: SubsetLabel,
    pub j: usize,
    /// Reducing defect of `V_j` on `W_A`.
    pub reducing_defect: f64,
    pub left_dim: usize,
    pub right_dim: usize,
    pub max_angle: f64,
}

pub fn generalized_wandering_identity(
    t: &IsometryTuple,
    a: &SubsetLabel,
    j: usize,
    cfg: &ToleranceConfig,
) -> Result<IdentityReport> {
    check_label(t, a)?;
    if j == 0 || j > t.n() || a.contains(j) {
        return Err(Error::Input(format!("coordinate {j} must lie in I_n outside {a}")));
    }
    let ctx = Context::new(t, cfg);
    let wa = ctx.wandering_intersection(a, cfg)?;
    let vj = ctx.op(j);
    let reducing = reducing_defect(vj, &wa);
    if reducing > cfg.residual_tol {
        return Err(Error::Block {
            label: Some(*a),
            check: format!("W_A reducing for V_{j}"),
            value: reducing,
            tolerance: cfg.residual_tol,
        });
    }
    let image = span_scaled(&linalg::mul(vj.matrix(), wa.frame()), 1.0, cfg);
    let left = subspace_minus(&wa, &image, cfg)?;
    let parts: Vec<Subspace> = a
        .members()
        .into_iter()
        .chain(std::iter::once(j))
        .map(|i| ctx.coordinate_wandering[i - 1].clone())
        .collect();
    let right = intersect(&parts, cfg)?;
    Ok(IdentityReport {
        label: *a,
        j,
        reducing_defect: reducing,
        left_dim: left.dim(),
        right_dim: right.dim(),
        max_angle: max_principal_angle(&left, &right),
    })
}

/// `∩_{j ∈ ℕ^{I_m∖A}} V_{I_m∖A}^j W_A` (the whole space stands in for `W_∅`),
/// obtained by round-robin images until the dimension stabilizes.
pub fn inner_core(t: &IsometryTuple, a: &SubsetLabel, cfg: &ToleranceConfig) -> Result<IteratedSpace> {
    check_label(t, a)?;
    Context::new(t, cfg).inner_core(a, cfg)
}

/// Accumulation of `⊕_{k ∈ ℕ^A} V_A^k(core)`.
#[derive(Clone, Debug)]
pub struct BlockSpan {
    pub space: Subspace,
    /// Number of multi-indices `k` with `V_A^k(core) ≠ {0}`.
    pub terms: usize,
    /// Largest overlap `‖F_acc* F_k‖` between a term and the terms before it.
    pub orthogonality_defect: f64,
    pub resolved: bool,
}

/// One nonzero term `V^k F` of an orbit, `F` the frame of the seed space.
#[derive(Clone, Debug)]
pub(crate) struct OrbitTerm {
    /// Exponents over all coordinates `1..=len`.
    pub index: Vec<usize>,
    /// `V^k F` itself (not re-orthonormalized).
    pub image: CMatrix,
}

#[derive(Clone, Debug)]
pub(crate) struct Orbit {
    pub terms: Vec<OrbitTerm>,
    pub resolved: bool,
}

/// Enumerates `V^k F` over multi-indices supported on `members`, graded by
/// `|k|` then lexicographic. A term whose image vanishes is dropped together
/// with all its successors; no exponent may exceed `max_power`.
pub(crate) fn orbit(ops: &[Operator], members: &[usize], seed: &Subspace, cfg: &ToleranceConfig) -> Orbit {
    let len = ops.len();
    let mut terms = vec![OrbitTerm {
        index: vec![0; len],
        image: seed.frame().clone(),
    }];
    if seed.dim() == 0 {
        return Orbit {
            terms: Vec::new(),
            resolved: true,
        };
    }
    let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
    seen.insert(vec![0; len]);
    let mut grade_start = 0;
    loop {
        let grade_end = terms.len();
        let mut next: BTreeMap<Vec<usize>, CMatrix> = BTreeMap::new();
        for t in grade_start..grade_end {
            for &i in members {
                let mut index = terms[t].index.clone();
                index[i - 1] += 1;
                if !seen.insert(index.clone()) {
                    continue;
                }
                let image = linalg::mul(ops[i - 1].matrix(), &terms[t].image);
                let (rank, _) = linalg::decide_rank(&linalg::singular_values(&image), 1.0, cfg.rank_tol);
                if rank == 0 {
                    continue;
                }
                if index[i - 1] > cfg.max_power {
                    return Orbit { terms, resolved: false };
                }
                next.insert(index, image);
            }
        }
        if next.is_empty() {
            return Orbit { terms, resolved: true };
        }
        grade_start = grade_end;
        terms.extend(next.into_iter().map(|(index, image)| OrbitTerm { index, image }));
    }
}

/// `⊕_{k ∈ ℕ^A} V_A^k(core)`, accumulated term by term with every term's
/// overlap against the accumulation recorded.
pub fn block_span(t: &IsometryTuple, a: &SubsetLabel, core: &Subspace, cfg: &ToleranceConfig) -> Result<BlockSpan> {
    check_label(t, a)?;
    if core.ambient_dim() != t.dim() {
        return Err(Error::Input("core lives in a different ambient space".into()));
    }
    Ok(span_orbit(t.operators(), &a.members(), core, cfg))
}

pub(crate) fn span_orbit(ops: &[Operator], members: &[usize], core: &Subspace, cfg: &ToleranceConfig) -> BlockSpan {
    let n = core.ambient_dim();
    let orbit = orbit(ops, members, core, cfg);
    let mut acc = CMatrix::zeros(n, 0);
    let mut defect = 0.0_f64;
    for term in &orbit.terms {
        let space = span_scaled(&term.image, 1.0, cfg);
        if acc.ncols() > 0 {
            defect = defect.max(spectral_norm(&linalg::adj_mul(&acc, space.frame())));
        }
        let once = space.frame() - linalg::mul(&acc, &linalg::adj_mul(&acc, space.frame()));
        let twice = &once - linalg::mul(&acc, &linalg::adj_mul(&acc, &once));
        let fresh = span_scaled(&twice, 1.0, cfg);
        acc = hcat(&acc, fresh.frame());
    }
    BlockSpan {
        space: Subspace::from_frame_unchecked(acc, None),
        terms: orbit.terms.len(),
        orthogonality_defect: defect,
        resolved: orbit.resolved,
    }
}

fn check_depth(t: &IsometryTuple, m: usize, cfg: &ToleranceConfig) -> Result<()> {
    cfg.validate()?;
    if m == 0 || m > t.n() {
        return Err(Error::Input(format!("depth {m} outside 1..={}", t.n())));
    }
    if m > MAX_COORDINATES {
        return Err(Error::Input(format!(
            "at most {MAX_COORDINATES} coordinates are supported"
        )));
    }
    t.gate(cfg)
}

/// Blocks from the closed-form expression, all `2^m` labels evaluated in parallel.
pub fn decompose_direct(t: &IsometryTuple, m: usize, cfg: &ToleranceConfig) -> Result<MultiWoldDecomposition> {
    check_depth(t, m, cfg)?;
    let ctx = Context::new(t, cfg);
    let labels: Vec<SubsetLabel> = SubsetLabel::all(m).collect();
    let computed = labels
        .par_iter()
        .map(|a| {
            let core = ctx.inner_core(a, cfg)?;
            let span = block_span(t, a, &core.space, cfg)?;
            Ok((*a, core, span))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut unresolved = Vec::new();
    let mut entries = Vec::with_capacity(computed.len());
    for (label, core, span) in computed {
        if !core.is_stabilized() || !span.resolved {
            unresolved.push(label.to_string());
        }
        entries.push(Entry {
            label,
            space: span.space,
            core: Some(core.space),
            span_orthogonality: span.orthogonality_defect,
        });
    }
    assemble(t, m, Method::Direct, entries, unresolved, cfg)
}

struct Entry {
    label: SubsetLabel,
    space: Subspace,
    core: Option<Subspace>,
    span_orthogonality: f64,
}

/// Blocks from iterated single-operator Wold decompositions.
pub fn decompose_recursive(t: &IsometryTuple, m: usize, cfg: &ToleranceConfig) -> Result<MultiWoldDecomposition> {
    check_depth(t, m, cfg)?;
    let ops: Vec<Operator> = t.operators()[..m].to_vec();
    let mut leaves = Vec::with_capacity(1 << m);
    let mut unresolved = Vec::new();
    let root = Branch {
        embed: linalg::identity(t.dim()),
        coordinate: 0,
        mask: 0,
        path: String::new(),
    };
    recurse(&ops, root, m, cfg, &mut leaves, &mut unresolved)?;
    let entries = leaves
        .into_iter()
        .map(|(label, space)| Entry {
            label,
            space,
            core: None,
            span_orthogonality: 0.0,
        })
        .collect();
    assemble(t, m, Method::Recursive, entries, unresolved, cfg)
}

struct Branch {
    /// Isometric `N × d` frame of the current part in the ambient space.
    embed: CMatrix,
    /// Number of coordinates already split off.
    coordinate: usize,
    mask: u32,
    path: String,
}

fn recurse(
    ops: &[Operator],
    branch: Branch,
    m: usize,
    cfg: &ToleranceConfig,
    leaves: &mut Vec<(SubsetLabel, Subspace)>,
    unresolved: &mut Vec<String>,
) -> Result<()> {
    let n = branch.embed.nrows();
    let c = branch.coordinate;
    if c == m {
        let label = SubsetLabel { m, mask: branch.mask };
        leaves.push((label, Subspace::from_frame_unchecked(branch.embed, None)));
        return Ok(());
    }
    if branch.embed.ncols() == 0 {
        // every refinement of a trivial part is trivial
        for rest in 0..(1u32 << (m - c)) {
            let label = SubsetLabel {
                m,
                mask: branch.mask | (rest << c),
            };
            leaves.push((label, Subspace::zero(n)));
        }
        return Ok(());
    }
    let tag = |e: Error, path: &str| Error::Path {
        path: if path.is_empty() {
            "root".into()
        } else {
            path.to_string()
        },
        source: Box::new(e),
    };
    let wold = wold_decompose(&ops[0], cfg).map_err(|e| tag(e, &branch.path))?;
    if wold.status == Status::Unresolved {
        unresolved.push(format!(
            "V_{} at {}",
            c + 1,
            if branch.path.is_empty() { "root" } else { &branch.path }
        ));
    }
    for (part, shift) in [(&wold.shift_part, true), (&wold.unitary_part, false)] {
        let kind = if shift { "shift" } else { "unitary" };
        let path = if branch.path.is_empty() {
            format!("V_{} {kind} part", c + 1)
        } else {
            format!("{} / V_{} {kind} part", branch.path, c + 1)
        };
        let rest = if part.dim() == 0 {
            vec![Operator::zeros(0); ops.len() - 1]
        } else {
            ops[1..]
                .iter()
                .map(|o| restrict(o, part, cfg))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| tag(e, &path))?
        };
        let child = Branch {
            embed: linalg::mul(&branch.embed, part.frame()),
            coordinate: c + 1,
            mask: if shift { branch.mask | (1 << c) } else { branch.mask },
            path,
        };
        recurse(&rest, child, m, cfg, leaves, unresolved)?;
    }
    Ok(())
}

fn check_coordinate(
    v: &Operator,
    label: &SubsetLabel,
    i: usize,
    space: &Subspace,
    cfg: &ToleranceConfig,
) -> Result<CoordinateCheck> {
    let block_err = |check: String, value: f64| Error::Block {
        label: Some(*label),
        check,
        value,
        tolerance: cfg.residual_tol,
    };
    let compressed = restrict(v, space, cfg).map_err(|e| match e {
        Error::NotInvariant { defect } => block_err(format!("V_{i} invariance"), defect),
        other => other,
    })?;
    let wold = wold_decompose(&compressed, cfg).map_err(|e| Error::Path {
        path: format!("block {label}, V_{i}"),
        source: Box::new(e),
    })?;
    let expected = if label.contains(i) {
        Classification::Shift
    } else {
        Classification::Unitary
    };
    let defect = if label.contains(i) {
        let r = &wold.residuals;
        [
            r.orthogonality,
            r.shift_reducing,
            r.unitary_reducing,
            r.exhaustion,
            r.wandering_consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    } else {
        compressed.isometry_defect().max(compressed.coisometry_defect())
    };
    if wold.classification != expected {
        return Err(block_err(
            format!("V_{i} expected {expected:?}, found {:?}", wold.classification),
            defect.max(1.0),
        ));
    }
    if defect > cfg.residual_tol {
        return Err(block_err(format!("V_{i} {expected:?} certificate"), defect));
    }
    Ok(CoordinateCheck {
        coordinate: i,
        classification: wold.classification,
        defect,
    })
}

fn assemble(
    t: &IsometryTuple,
    m: usize,
    method: Method,
    entries: Vec<Entry>,
    unresolved: Vec<String>,
    cfg: &ToleranceConfig,
) -> Result<MultiWoldDecomposition> {
    let spaces: Vec<Subspace> = entries.iter().map(|e| e.space.clone()).collect();
    let total: usize = spaces.iter().map(Subspace::dim).sum();
    let completeness = total.abs_diff(t.dim()) as f64;
    let orthogonality = direct_sum_residual(&spaces, false);
    let status = if unresolved.is_empty() {
        Status::Accepted
    } else {
        Status::Unresolved
    };

    let verified = entries
        .into_par_iter()
        .map(|entry| {
            let joint_reducing = (1..=m)
                .map(|i| reducing_defect(t.coordinate(i), &entry.space))
                .fold(0.0, f64::max);
            let mut coordinates = Vec::new();
            if status == Status::Accepted && entry.space.dim() > 0 {
                if joint_reducing > cfg.residual_tol {
                    return Err(Error::Block {
                        label: Some(entry.label),
                        check: "joint reducing".into(),
                        value: joint_reducing,
                        tolerance: cfg.residual_tol,
                    });
                }
                for i in 1..=m {
                    coordinates.push(check_coordinate(t.coordinate(i), &entry.label, i, &entry.space, cfg)?);
                }
            }
            let block = Block {
                space: entry.space,
                core: entry.core,
                coordinates,
                residuals: BlockResiduals {
                    joint_reducing,
                    span_orthogonality: entry.span_orthogonality,
                },
            };
            Ok((entry.label, block))
        })
        .collect::<Result<Vec<_>>>()?;

    let joint_reducing = verified
        .iter()
        .map(|(_, b)| b.residuals.joint_reducing)
        .fold(0.0, f64::max);
    let residuals = GlobalResiduals {
        completeness,
        orthogonality,
        joint_reducing,
    };
    if status == Status::Accepted {
        for (check, value) in [("completeness", completeness), ("orthogonality", orthogonality)] {
            if value > cfg.residual_tol {
                return Err(Error::Block {
                    label: None,
                    check: check.into(),
                    value,
                    tolerance: cfg.residual_tol,
                });
            }
        }
        if let Some((label, b)) = verified
            .iter()
            .find(|(_, b)| b.residuals.span_orthogonality > cfg.residual_tol)
        {
            return Err(Error::Block {
                label: Some(*label),
                check: "graded increments orthogonal".into(),
                value: b.residuals.span_orthogonality,
                tolerance: cfg.residual_tol,
            });
        }
    }
    Ok(MultiWoldDecomposition {
        n: t.n(),
        m,
        method,
        blocks: verified.into_iter().collect(),
        residuals,
        status,
        unresolved,
    })
}

/// The four blocks of a doubly commuting pair, labelled by the behaviour of
/// `(V_1, V_2)`: `ss = H_{1,2}`, `su = H_{1}`, `us = H_{2}`, `uu = H_∅`.
#[derive(Clone, Debug)]
pub struct SlocinskiBlocks {
    pub ss: Subspace,
    pub su: Subspace,
    pub us: Subspace,
    pub uu: Subspace,
    pub decomposition: MultiWoldDecomposition,
}

pub fn slocinski_blocks(t: &IsometryTuple, cfg: &ToleranceConfig) -> Result<SlocinskiBlocks> {
    if t.n() != 2 {
        return Err(Error::Input(format!("expected a pair of isometries, got {}", t.n())));
    }
    let d = decompose_direct(t, 2, cfg)?;
    let take = |members: &[usize]| d.block(members).expect("all four labels present").space.clone();
    Ok(SlocinskiBlocks {
        ss: take(&[1, 2]),
        su: take(&[1]),
        us: take(&[2]),
        uu: take(&[]),
        decomposition: d,
    })
}
