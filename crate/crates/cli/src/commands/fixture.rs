use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use woldkit::fixtures::{build_fixture, truncated_shift, Atom, BlockRecipe, FixtureSpec};
use woldkit::{IsometryTuple, Operator};

use crate::error::{CliError, CliResult, Exit};
use crate::manifest::{MatrixSource, OracleFile, ToleranceOverrides, TupleManifest, SCHEMA_VERSION};
use crate::report::to_json;
use crate::{fsio, mtx, FixtureArgs, GlobalArgs, MatrixFormat, Preset};

#[derive(Serialize)]
struct FixtureSummary {
    schema_version: &'static str,
    command: &'static str,
    n: usize,
    ambient_dim: usize,
    manifest: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleFile>,
}

enum Built {
    Fixture(FixtureSpec),
    /// `(J_D, …, J_D)`: commuting but not doubly commuting, so it has no oracle.
    RepeatedShift {
        depth: usize,
        n: usize,
    },
}

fn spec_from_args(args: &FixtureArgs, g: &GlobalArgs) -> CliResult<Built> {
    let e = args.e.unwrap_or(1);
    let depth = args.degree.unwrap_or(3);
    let n = args.n.unwrap_or(2);
    let seed = g.seed.unwrap_or(0);
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|err| CliError::parse(path, err))?;
            serde_json::from_str::<FixtureSpec>(&text).map_err(|err| CliError::parse(path, err))?
        }
        (None, Some(Preset::Polydisc)) => FixtureSpec::polydisc(e, depth, n),
        (None, Some(Preset::SlocinskiMixed)) => FixtureSpec::slocinski_mixed(),
        (None, Some(Preset::ShiftUnitary)) => {
            let u = Atom::circular(args.u.unwrap_or(2));
            let atoms = std::iter::once(Atom::Shift { depth })
                .chain(std::iter::repeat_n(u, n.saturating_sub(1)))
                .collect();
            FixtureSpec::new(
                n,
                vec![BlockRecipe {
                    label: vec![1],
                    atoms,
                    multiplicity: e,
                }],
            )
        }
        (None, Some(Preset::Random)) => {
            if n == 0 || n > 8 {
                return Err(CliError::Usage(format!("random preset needs 1 <= n <= 8, got {n}")));
            }
            let masks: Vec<u32> = (0..1u32 << n).collect();
            FixtureSpec::random_with_labels(n, &masks, seed)
        }
        (None, Some(Preset::RepeatedShift)) => {
            if depth < 2 || n == 0 {
                return Err(CliError::Usage("repeated-shift needs --D >= 2 and --n >= 1".into()));
            }
            return Ok(Built::RepeatedShift { depth, n });
        }
        (None, None) => return Err(CliError::Usage("pass --spec or --preset".into())),
    };
    if args.scramble {
        spec.scramble_seed = Some(seed);
    }
    if let Some(cap) = args.dim_cap {
        spec.dim_cap = cap;
    }
    Ok(Built::Fixture(spec))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "manifest".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}.mtx"))
}

/// The manifest plus any Matrix Market files it references.
fn manifest_files(
    tuple: &IsometryTuple,
    overrides: ToleranceOverrides,
    out: &Path,
    format: MatrixFormat,
) -> (TupleManifest, Vec<(PathBuf, Vec<u8>)>) {
    let mut manifest = TupleManifest::inline(tuple, overrides);
    let write = match format {
        MatrixFormat::Inline => return (manifest, Vec::new()),
        MatrixFormat::Array => mtx::write_array,
        MatrixFormat::Coordinate => mtx::write_coordinate,
    };
    let mut files = Vec::new();
    let mut external = |suffix: String, op: &Operator| {
        let path = sibling(out, &suffix);
        let name = PathBuf::from(path.file_name().expect("file name"));
        files.push((path, write(op.matrix()).into_bytes()));
        MatrixSource::File(name)
    };
    manifest.operators = tuple
        .operators()
        .iter()
        .enumerate()
        .map(|(i, v)| external(format!("v{}", i + 1), v))
        .collect();
    manifest.interior_projector = tuple.interior().map(|p| external("interior".into(), p));
    (manifest, files)
}

pub fn fixture(args: &FixtureArgs, g: &GlobalArgs, out: &mut dyn Write) -> CliResult<Exit> {
    let (tuple, oracle, cfg, mut human) = match spec_from_args(args, g)? {
        Built::Fixture(spec) => {
            let (tuple, oracle) = build_fixture(&spec)?;
            let mut human = format!("fixture  n={}  N={}\n", oracle.n, oracle.ambient_dim);
            for (label, dim) in oracle.block_dims.iter().filter(|(_, &d)| d > 0) {
                let _ = writeln!(human, "  {:<14} {:>6}", label.to_string(), dim);
            }
            (tuple, Some(OracleFile::from_oracle(&oracle)), spec.tolerances(), human)
        }
        Built::RepeatedShift { depth, n } => {
            if g.oracle.is_some() {
                return Err(CliError::Usage(
                    "repeated-shift tuples are not doubly commuting and have no oracle".into(),
                ));
            }
            let interior = Operator::direct_sum(&[Operator::identity(depth - 1), Operator::zeros(1)]);
            let tuple = IsometryTuple::with_interior(vec![truncated_shift(depth); n], interior)?;
            let human = format!("fixture  n={n}  N={depth}  (repeated truncated shift)\n");
            (tuple, None, woldkit::ToleranceConfig::for_depth(depth), human)
        }
    };
    let cfg = g.overrides().apply(cfg);
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("tolerances: {e}")))?;

    let (manifest, mut files) = manifest_files(
        &tuple,
        ToleranceOverrides::from_config(&cfg),
        &args.out,
        args.matrix_format,
    );
    files.push((args.out.clone(), manifest.to_json().into_bytes()));
    if let (Some(path), Some(o)) = (&g.oracle, &oracle) {
        files.push((path.clone(), o.to_json().into_bytes()));
    }
    if let Some(path) = &g.json {
        let summary = FixtureSummary {
            schema_version: SCHEMA_VERSION,
            command: "fixture",
            n: tuple.n(),
            ambient_dim: tuple.dim(),
            manifest: args.out.clone(),
            oracle,
        };
        files.push((path.clone(), to_json(&summary).into_bytes()));
    }
    let refs: Vec<(&Path, Vec<u8>)> = files.iter().map(|(p, b)| (p.as_path(), b.clone())).collect();
    fsio::write_all_atomic(&refs)?;

    let _ = writeln!(human, "  wrote {}", args.out.display());
    out.write_all(human.as_bytes()).map_err(|source| CliError::Write {
        path: "<stdout>".into(),
        source,
    })?;
    Ok(Exit::Accepted)
}
