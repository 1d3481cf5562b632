//! Numerical Wold decompositions for single isometries and for doubly
//! commuting tuples of isometries on finite-dimensional spaces.
//!
//! Every subspace is carried as an orthonormal frame, every rank decision is
//! an SVD with an explicit cutoff, and every structural claim (reducing,
//! orthogonal, complete, shift or unitary) is checked against a residual
//! before a result is returned.
//!
//! ```
//! use woldkit::{decompose_direct, fixtures::{build_fixture, FixtureSpec}};
//!
//! let spec = FixtureSpec::slocinski_mixed();
//! let (tuple, oracle) = build_fixture(&spec).unwrap();
//! let d = decompose_direct(&tuple, 2, &spec.tolerances()).unwrap();
//! assert_eq!(d.dims(), oracle.block_dims);
//! ```

pub mod config;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod multi;
pub mod operator;
pub mod subspace;
pub mod wold;

pub use config::ToleranceConfig;
pub use equivalence::{
    build_mz_equivalence, check_equivalence_conditions, joint_wandering, Condition, EquivalenceReport, MzEquivalence,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, RankInfo, C64};
pub use multi::{
    block_agreement, block_span, decompose_direct, decompose_recursive, generalized_wandering_identity, inner_core,
    slocinski_blocks, wandering_intersection, Method, MultiWoldDecomposition, SubsetLabel,
};
pub use operator::{
    defect_report, invariance_defect, reducing_defect, restrict, DefectReport, IsometryTuple, Operator,
};
pub use subspace::{
    containment_angle, direct_sum_residual, intersect, kernel, max_principal_angle, orth_complement, principal_angles,
    projector, range, subspace_minus, Subspace,
};
pub use wold::{wold_decompose, Classification, Status, WoldDecomposition};
