//! Tuple manifests (`woldkit/1`) and oracle files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use woldkit::fixtures::FixtureOracle;
use woldkit::{CMatrix, IsometryTuple, Operator, SubsetLabel, ToleranceConfig, C64};

use crate::error::{CliError, CliResult};
use crate::mtx;

pub const SCHEMA_VERSION: &str = "woldkit/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    /// Rows of `[re, im]` pairs.
    Inline(Vec<Vec<[f64; 2]>>),
    /// Matrix Market file, relative to the manifest's directory.
    File(PathBuf),
}

impl MatrixSource {
    pub fn inline(m: &CMatrix) -> Self {
        MatrixSource::Inline(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn load(&self, base: &Path) -> CliResult<CMatrix> {
        match self {
            MatrixSource::File(rel) => mtx::read_matrix(&base.join(rel)),
            MatrixSource::Inline(rows) => {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(CliError::Usage("inline matrix has ragged rows".into()));
                }
                Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
                    C64::new(rows[i][j][0], rows[i][j][1])
                }))
            }
        }
    }
}

/// Per-field overrides of [`ToleranceConfig`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilization_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_power: Option<usize>,
}

impl ToleranceOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, base: ToleranceConfig) -> ToleranceConfig {
        ToleranceConfig {
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
            residual_tol: self.residual_tol.unwrap_or(base.residual_tol),
            stabilization_window: self.stabilization_window.unwrap_or(base.stabilization_window),
            max_power: self.max_power.unwrap_or(base.max_power),
        }
    }

    /// Every field set, taken from `cfg`.
    pub fn from_config(cfg: &ToleranceConfig) -> Self {
        Self {
            rank_tol: Some(cfg.rank_tol),
            residual_tol: Some(cfg.residual_tol),
            stabilization_window: Some(cfg.stabilization_window),
            max_power: Some(cfg.max_power),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleManifest {
    pub schema_version: String,
    pub ambient_dim: usize,
    pub operators: Vec<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_projector: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "ToleranceOverrides::is_empty")]
    pub tolerances: ToleranceOverrides,
}

/// A manifest together with the directory its file references resolve against.
#[derive(Clone, Debug)]
pub struct LoadedManifest {
    pub manifest: TupleManifest,
    pub path: PathBuf,
}

impl TupleManifest {
    pub fn inline(tuple: &IsometryTuple, tolerances: ToleranceOverrides) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            ambient_dim: tuple.dim(),
            operators: tuple
                .operators()
                .iter()
                .map(|v| MatrixSource::inline(v.matrix()))
                .collect(),
            interior_projector: tuple.interior().map(|p| MatrixSource::inline(p.matrix())),
            tolerances,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn load_manifest(path: &Path) -> CliResult<LoadedManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(path, e))?;
    let manifest: TupleManifest = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(CliError::parse(
            path,
            format!(
                "unrecognized schema_version {:?} (expected {SCHEMA_VERSION:?})",
                manifest.schema_version
            ),
        ));
    }
    if manifest.operators.is_empty() {
        return Err(CliError::parse(path, "manifest lists no operators"));
    }
    Ok(LoadedManifest {
        manifest,
        path: path.to_path_buf(),
    })
}

impl LoadedManifest {
    fn base(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new("."))
    }

    fn operator(&self, source: &MatrixSource, what: &str) -> CliResult<Operator> {
        let n = self.manifest.ambient_dim;
        let m = source.load(self.base()).map_err(|e| match e {
            CliError::Usage(msg) => CliError::parse(&self.path, format!("{what}: {msg}")),
            other => other,
        })?;
        if m.shape() != (n, n) {
            return Err(CliError::parse(
                &self.path,
                format!("{what} is {}×{}, expected {n}×{n}", m.nrows(), m.ncols()),
            ));
        }
        Operator::new(m).map_err(|e| CliError::parse(&self.path, format!("{what}: {e}")))
    }

    pub fn tuple(&self) -> CliResult<IsometryTuple> {
        let ops = self
            .manifest
            .operators
            .iter()
            .enumerate()
            .map(|(i, s)| self.operator(s, &format!("operator {}", i + 1)))
            .collect::<CliResult<Vec<_>>>()?;
        let tuple = match &self.manifest.interior_projector {
            Some(s) => IsometryTuple::with_interior(ops, self.operator(s, "interior projector")?),
            None => IsometryTuple::new(ops),
        };
        tuple.map_err(|e| CliError::parse(&self.path, e))
    }

    /// Defaults with the power budget sized for the ambient dimension, then
    /// manifest overrides, then command-line overrides.
    pub fn tolerances(&self, cli: &ToleranceOverrides) -> ToleranceConfig {
        let base = ToleranceConfig::for_depth(self.manifest.ambient_dim.max(1));
        cli.apply(self.manifest.tolerances.apply(base))
    }
}

/// Expected block dimensions, keyed by sorted 1-based labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub n: usize,
    pub ambient_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scramble_seed: Option<u64>,
    pub blocks: Vec<OracleBlock>,
    #[serde(default)]
    pub multiplicities: Vec<usize>,
    #[serde(default)]
    pub joint_wandering_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub label: Vec<usize>,
    pub dim: usize,
}

impl OracleFile {
    pub fn from_oracle(o: &FixtureOracle) -> Self {
        Self {
            n: o.n,
            ambient_dim: o.ambient_dim,
            scramble_seed: o.scramble_seed,
            blocks: o
                .block_dims
                .iter()
                .map(|(l, &dim)| OracleBlock {
                    label: l.members(),
                    dim,
                })
                .collect(),
            multiplicities: o.multiplicities.clone(),
            joint_wandering_dim: o.joint_wandering_dim,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("oracle serializes");
        s.push('\n');
        s
    }

    /// Expected dims at depth `m`, merging labels that agree on `{1, …, m}`.
    pub fn dims_at_depth(&self, m: usize) -> Result<BTreeMap<SubsetLabel, usize>, woldkit::Error> {
        let mut out: BTreeMap<SubsetLabel, usize> = SubsetLabel::all(m).map(|l| (l, 0)).collect();
        for b in &self.blocks {
            let label = SubsetLabel::new(self.n, &b.label)?.truncate(m);
            *out.entry(label).or_default() += b.dim;
        }
        Ok(out)
    }
}
