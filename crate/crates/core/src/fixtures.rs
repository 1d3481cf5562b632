//! Exactly doubly commuting tuples with known decompositions.
//!
//! A fixture is a direct sum over subset labels `A` of tensor blocks
//! `atom_1 ⊗ … ⊗ atom_n ⊗ C^{e_A}`, where slot `i` carries a truncated shift
//! for `i ∈ A` and a unitary for `i ∉ A`. `V_i` acts on slot `i` only, so the
//! tuple commutes and doubly commutes exactly. An optional seeded unitary
//! conjugates everything afterwards.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::multi::{SubsetLabel, MAX_COORDINATES};
use crate::operator::{IsometryTuple, Operator};
use crate::subspace::Subspace;

pub const DEFAULT_DIM_CAP: usize = 2000;

/// Nilpotent raising map `e_k ↦ e_{k+1}` on `C^d` (`e_{d−1} ↦ 0`).
pub fn truncated_shift(d: usize) -> Operator {
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d.saturating_sub(1) {
        m[(k + 1, k)] = C64::new(1.0, 0.0);
    }
    Operator::from_matrix_unchecked(m)
}

/// Cyclic permutation `e_k ↦ e_{k+1 mod u}`.
pub fn circular_shift(u: usize) -> Operator {
    let mut m = CMatrix::zeros(u, u);
    for k in 0..u {
        m[((k + 1) % u, k)] = C64::new(1.0, 0.0);
    }
    Operator::from_matrix_unchecked(m)
}

/// Haar-distributed unitary from the QR factorization of a seeded complex
/// Gaussian matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut sample = || -> f64 { StandardNormal.sample(&mut rng) };
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(sample() * scale, sample() * scale));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator::from_matrix_unchecked(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitaryKind {
    Circular,
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Shift { depth: usize },
    Unitary { dim: usize, unitary: UnitaryKind },
}

impl Atom {
    pub fn circular(dim: usize) -> Self {
        Atom::Unitary {
            dim,
            unitary: UnitaryKind::Circular,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Atom::Shift { depth } => depth,
            Atom::Unitary { dim, .. } => dim,
        }
    }

    pub fn operator(&self) -> Operator {
        match *self {
            Atom::Shift { depth } => truncated_shift(depth),
            Atom::Unitary {
                dim,
                unitary: UnitaryKind::Circular,
            } => circular_shift(dim),
            Atom::Unitary {
                dim,
                unitary: UnitaryKind::Random { seed },
            } => random_unitary(dim, seed),
        }
    }

    /// Projector onto the grades where the atom is isometric.
    fn interior(&self) -> Operator {
        match *self {
            Atom::Shift { depth } => Operator::direct_sum(&[Operator::identity(depth - 1), Operator::zeros(1)]),
            Atom::Unitary { dim, .. } => Operator::identity(dim),
        }
    }
}

/// One tensor block: `atoms[i]` sits in slot `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecipe {
    /// Sorted 1-based coordinates acting as shifts on this block.
    pub label: Vec<usize>,
    pub atoms: Vec<Atom>,
    /// Coefficient multiplicity `e_A`; zero means the block is absent.
    pub multiplicity: usize,
}

impl BlockRecipe {
    pub fn dim(&self) -> usize {
        self.atoms.iter().map(Atom::dim).product::<usize>() * self.multiplicity
    }
}

fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub n: usize,
    pub blocks: Vec<BlockRecipe>,
    #[serde(default)]
    pub scramble_seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Option<ToleranceConfig>,
    #[serde(default = "default_cap")]
    pub dim_cap: usize,
}

impl FixtureSpec {
    pub fn new(n: usize, blocks: Vec<BlockRecipe>) -> Self {
        Self {
            n,
            blocks,
            scramble_seed: None,
            tolerances: None,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn scrambled(mut self, seed: u64) -> Self {
        self.scramble_seed = Some(seed);
        self
    }

    /// Single joint-shift block of uniform depth `d` and multiplicity `e`:
    /// the truncated `(M_{z_1}, …, M_{z_n})` on `C^e`-valued polynomials.
    pub fn polydisc(e: usize, d: usize, n: usize) -> Self {
        Self::new(
            n,
            vec![BlockRecipe {
                label: (1..=n).collect(),
                atoms: vec![Atom::Shift { depth: d }; n],
                multiplicity: e,
            }],
        )
    }

    /// Pair with all four blocks present, of dimensions 4, 2, 2, 1 for
    /// `{1,2}`, `{1}`, `{2}`, `∅`.
    pub fn slocinski_mixed() -> Self {
        let s = Atom::Shift { depth: 2 };
        let u = Atom::circular(1);
        let block = |label: Vec<usize>, atoms: Vec<Atom>| BlockRecipe {
            label,
            atoms,
            multiplicity: 1,
        };
        Self::new(
            2,
            vec![
                block(vec![1, 2], vec![s, s]),
                block(vec![1], vec![s, u]),
                block(vec![2], vec![u, s]),
                block(vec![], vec![u, u]),
            ],
        )
    }

    /// Seeded spec over `n` coordinates with the given labels present
    /// (as bitmasks), depths in `2..=4`, unitary dims in `1..=3`.
    pub fn random_with_labels(n: usize, masks: &[u32], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = masks
            .iter()
            .map(|&mask| {
                let label: Vec<usize> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let atoms = (1..=n)
                    .map(|i| {
                        if label.contains(&i) {
                            Atom::Shift {
                                depth: rng.random_range(2..=4),
                            }
                        } else {
                            let dim = rng.random_range(1..=3);
                            let unitary = if rng.random_bool(0.5) {
                                UnitaryKind::Circular
                            } else {
                                UnitaryKind::Random { seed: rng.random() }
                            };
                            Atom::Unitary { dim, unitary }
                        }
                    })
                    .collect();
                BlockRecipe {
                    label,
                    atoms,
                    multiplicity: rng.random_range(1..=2),
                }
            })
            .collect();
        Self::new(n, blocks)
    }

    pub fn ambient_dim(&self) -> usize {
        self.blocks.iter().map(BlockRecipe::dim).sum()
    }

    pub fn max_depth(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.atoms)
            .filter_map(|a| match a {
                Atom::Shift { depth } => Some(*depth),
                Atom::Unitary { .. } => None,
            })
            .max()
            .unwrap_or(1)
    }

    /// Explicit tolerances, or the defaults sized for the deepest shift.
    pub fn tolerances(&self) -> ToleranceConfig {
        self.tolerances
            .unwrap_or_else(|| ToleranceConfig::for_depth(self.max_depth()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_COORDINATES {
            return Err(Error::Input(format!("n must lie in 1..={MAX_COORDINATES}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.blocks {
            let label = SubsetLabel::new(self.n, &b.label)?;
            if !seen.insert(label) {
                return Err(Error::Input(format!("block {label} listed twice")));
            }
            if b.atoms.len() != self.n {
                return Err(Error::Input(format!(
                    "block {label} has {} atoms, expected {}",
                    b.atoms.len(),
                    self.n
                )));
            }
            for (slot, atom) in b.atoms.iter().enumerate() {
                let i = slot + 1;
                match (label.contains(i), atom) {
                    (true, Atom::Shift { depth }) if *depth >= 2 => {}
                    (false, Atom::Unitary { dim, .. }) if *dim >= 1 => {}
                    _ => {
                        return Err(Error::Input(format!(
                            "block {label}: slot {i} needs a {} atom, got {atom:?}",
                            if label.contains(i) {
                                "shift (depth >= 2)"
                            } else {
                                "unitary (dim >= 1)"
                            }
                        )))
                    }
                }
            }
        }
        if self.ambient_dim() == 0 {
            return Err(Error::Input(
                "fixture needs at least one block with positive multiplicity".into(),
            ));
        }
        if let Some(t) = &self.tolerances {
            t.validate()?;
        }
        Ok(())
    }
}

/// Ground truth for a built fixture.
#[derive(Clone, Debug)]
pub struct FixtureOracle {
    pub n: usize,
    pub ambient_dim: usize,
    /// `dim H_A` for every `A ⊆ I_n` (zeros included).
    pub block_dims: BTreeMap<SubsetLabel, usize>,
    /// The exact blocks, in the scrambled basis.
    pub blocks: BTreeMap<SubsetLabel, Subspace>,
    /// `dim ran(I − V_iV_i*)` per coordinate.
    pub multiplicities: Vec<usize>,
    /// `dim ∩_i ran(I − V_iV_i*)`.
    pub joint_wandering_dim: usize,
    pub scramble_seed: Option<u64>,
    pub scramble: Option<Operator>,
}

impl FixtureOracle {
    /// Block dimensions at depth `m ≤ n`: labels agreeing on `I_m` are merged.
    pub fn block_dims_at_depth(&self, m: usize) -> BTreeMap<SubsetLabel, usize> {
        let mut out: BTreeMap<SubsetLabel, usize> = SubsetLabel::all(m).map(|l| (l, 0)).collect();
        for (label, dim) in &self.block_dims {
            *out.get_mut(&label.truncate(m)).unwrap() += dim;
        }
        out
    }
}

pub fn build_fixture(spec: &FixtureSpec) -> Result<(IsometryTuple, FixtureOracle)> {
    spec.validate()?;
    let dim = spec.ambient_dim();
    if dim > spec.dim_cap {
        return Err(Error::DimensionCap { dim, cap: spec.dim_cap });
    }
    let n = spec.n;
    let mut recipes: Vec<(SubsetLabel, &BlockRecipe)> = spec
        .blocks
        .iter()
        .filter(|b| b.multiplicity > 0)
        .map(|b| (SubsetLabel::new(n, &b.label).expect("validated"), b))
        .collect();
    recipes.sort_by_key(|(l, _)| *l);

    let mut per_coordinate: Vec<Vec<Operator>> = vec![Vec::new(); n];
    let mut interiors = Vec::new();
    let mut ranges: BTreeMap<SubsetLabel, (usize, usize)> = BTreeMap::new();
    let mut multiplicities = vec![0; n];
    let mut offset = 0;
    for (label, recipe) in &recipes {
        let coefficients = Operator::identity(recipe.multiplicity);
        let slot_ops: Vec<Operator> = recipe.atoms.iter().map(Atom::operator).collect();
        for (i, ops) in per_coordinate.iter_mut().enumerate() {
            let factors: Vec<Operator> = recipe
                .atoms
                .iter()
                .enumerate()
                .map(|(s, atom)| {
                    if s == i {
                        slot_ops[s].clone()
                    } else {
                        Operator::identity(atom.dim())
                    }
                })
                .collect();
            ops.push(kron_all(&factors).kron(&coefficients));
            if label.contains(i + 1) {
                multiplicities[i] += recipe.dim() / recipe.atoms[i].dim();
            }
        }
        let interior_factors: Vec<Operator> = recipe.atoms.iter().map(Atom::interior).collect();
        interiors.push(kron_all(&interior_factors).kron(&coefficients));
        ranges.insert(*label, (offset, recipe.dim()));
        offset += recipe.dim();
    }

    let mut operators: Vec<Operator> = per_coordinate.iter().map(|ops| Operator::direct_sum(ops)).collect();
    let mut interior = Operator::direct_sum(&interiors);
    let scramble = spec.scramble_seed.map(|seed| random_unitary(dim, seed));
    if let Some(q) = &scramble {
        operators = operators.iter().map(|v| v.conjugated_by(q)).collect();
        interior = interior.conjugated_by(q);
    }
    let tuple = IsometryTuple::with_interior(operators, interior)?;

    let mut block_dims = BTreeMap::new();
    let mut blocks = BTreeMap::new();
    for label in SubsetLabel::all(n) {
        let (start, len) = ranges.get(&label).copied().unwrap_or((0, 0));
        let indices: Vec<usize> = (start..start + len).collect();
        let exact = Subspace::coordinate(dim, &indices);
        let exact = match &scramble {
            Some(q) => exact.mapped_by(q),
            None => exact,
        };
        block_dims.insert(label, len);
        blocks.insert(label, exact);
    }
    let joint_wandering_dim = recipes
        .iter()
        .find(|(l, _)| *l == SubsetLabel::full(n))
        .map_or(0, |(_, r)| r.multiplicity);

    let oracle = FixtureOracle {
        n,
        ambient_dim: dim,
        block_dims,
        blocks,
        multiplicities,
        joint_wandering_dim,
        scramble_seed: spec.scramble_seed,
        scramble,
    };
    Ok((tuple, oracle))
}

fn kron_all(factors: &[Operator]) -> Operator {
    factors.iter().fold(Operator::identity(1), |acc, f| acc.kron(f))
}

/// `(M_{z_1}, …, M_{z_n})` on `C^e`-valued polynomials of degree `< degrees[i]`
/// in `z_i`, basis ordered as `z^k ⊗ η_j` with `k_1` most significant.
pub fn polydisc_operators(e: usize, degrees: &[usize]) -> Vec<Operator> {
    let coefficients = Operator::identity(e);
    (0..degrees.len())
        .map(|i| {
            let factors: Vec<Operator> = degrees
                .iter()
                .enumerate()
                .map(|(s, &d)| {
                    if s == i {
                        truncated_shift(d)
                    } else {
                        Operator::identity(d)
                    }
                })
                .collect();
            kron_all(&factors).kron(&coefficients)
        })
        .collect()
}

/// Truncated Hardy-space model over the polydisc.
#[derive(Clone, Debug)]
pub struct PolydiscModel {
    /// `dim 𝓔`.
    pub multiplicity: usize,
    pub degree: usize,
    pub n: usize,
    pub tuple: IsometryTuple,
}

pub fn build_polydisc(e: usize, d: usize, n: usize) -> Result<PolydiscModel> {
    if e == 0 || d < 2 || n == 0 {
        return Err(Error::Input(format!(
            "polydisc model needs e >= 1, D >= 2, n >= 1 (got e={e}, D={d}, n={n})"
        )));
    }
    let (tuple, _) = build_fixture(&FixtureSpec::polydisc(e, d, n))?;
    Ok(PolydiscModel {
        multiplicity: e,
        degree: d,
        n,
        tuple,
    })
}
