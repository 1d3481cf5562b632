//! Matrix Market reader and writer for complex dense matrices.
//!
//! Reads `array` and `coordinate` files with `complex`, `real` or `integer`
//! fields and `general`, `symmetric`, `hermitian` or `skew-symmetric`
//! symmetry. Writes `complex general` in either layout.

use std::fmt::Write as _;
use std::path::Path;

use woldkit::{CMatrix, C64};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Complex,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

pub fn read_matrix(path: &Path) -> CliResult<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(path, e))?;
    parse_matrix(&text).map_err(|message| CliError::parse(path, message))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix, String> {
    let mut lines = text.lines();
    let banner = lines.next().ok_or("empty file")?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(format!("not a Matrix Market matrix banner: {banner:?}"));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(format!("unsupported layout {other:?}")),
    };
    let field = match words[3].as_str() {
        "complex" => Field::Complex,
        "real" | "double" | "integer" => Field::Real,
        other => return Err(format!("unsupported field {other:?}")),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(format!("unsupported symmetry {other:?}")),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err("hermitian symmetry requires the complex field".into());
    }

    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let (rows, cols, nnz) = {
        let mut next_usize = |what: &str| -> Result<usize, String> {
            let tok = tokens.next().ok_or_else(|| format!("missing {what}"))?;
            tok.parse().map_err(|_| format!("bad {what} {tok:?}"))
        };
        let rows = next_usize("row count")?;
        let cols = next_usize("column count")?;
        let nnz = match layout {
            Layout::Coordinate => Some(next_usize("entry count")?),
            Layout::Array => None,
        };
        (rows, cols, nnz)
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err("symmetric storage requires a square matrix".into());
    }

    let values: Vec<&str> = tokens.collect();
    let width = match field {
        Field::Complex => 2,
        Field::Real => 1,
    };
    let index_width = if layout == Layout::Coordinate { 2 } else { 0 };
    let stride = width + index_width;
    if !values.len().is_multiple_of(stride) {
        return Err("entry list ends in the middle of an entry".into());
    }
    let number = |tok: &str| -> Result<f64, String> {
        let x: f64 = tok.parse().map_err(|_| format!("bad number {tok:?}"))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("non-finite entry {tok:?}"))
        }
    };
    let mut m = CMatrix::zeros(rows, cols);
    let mut put = |i: usize, j: usize, z: C64| {
        m[(i, j)] = z;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = z,
                Symmetry::Hermitian => m[(j, i)] = z.conj(),
                Symmetry::Skew => m[(j, i)] = -z,
            }
        }
    };

    let entries: Vec<&[&str]> = values.chunks(stride).collect();
    match layout {
        Layout::Coordinate => {
            let expected = nnz.unwrap_or(0);
            if entries.len() != expected {
                return Err(format!("expected {expected} entries, found {}", entries.len()));
            }
            for entry in entries {
                let i: usize = entry[0].parse().map_err(|_| format!("bad row index {:?}", entry[0]))?;
                let j: usize = entry[1]
                    .parse()
                    .map_err(|_| format!("bad column index {:?}", entry[1]))?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(format!("entry ({i}, {j}) outside {rows}×{cols}"));
                }
                let re = number(entry[2])?;
                let im = if width == 2 { number(entry[3])? } else { 0.0 };
                put(i - 1, j - 1, C64::new(re, im));
            }
        }
        Layout::Array => {
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Symmetric | Symmetry::Hermitian => j,
                        Symmetry::Skew => j + 1,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            if entries.len() != positions.len() {
                return Err(format!("expected {} entries, found {}", positions.len(), entries.len()));
            }
            for ((i, j), entry) in positions.into_iter().zip(entries) {
                let re = number(entry[0])?;
                let im = if width == 2 { number(entry[1])? } else { 0.0 };
                put(i, j, C64::new(re, im));
            }
        }
    }
    Ok(m)
}

fn banner(layout: &str, m: &CMatrix) -> String {
    format!(
        "%%MatrixMarket matrix {layout} complex general\n{} {}",
        m.nrows(),
        m.ncols()
    )
}

/// Dense column-major listing of every entry.
pub fn write_array(m: &CMatrix) -> String {
    let mut out = banner("array", m);
    out.push('\n');
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
    out
}

/// Nonzero entries only, column-major.
pub fn write_coordinate(m: &CMatrix) -> String {
    let nonzero: Vec<(usize, usize, C64)> = (0..m.ncols())
        .flat_map(|j| (0..m.nrows()).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, m[(i, j)]))
        .filter(|(_, _, z)| z.re != 0.0 || z.im != 0.0)
        .collect();
    let mut out = banner("coordinate", m);
    let _ = writeln!(out, " {}", nonzero.len());
    for (i, j, z) in nonzero {
        let _ = writeln!(out, "{} {} {:.16e} {:.16e}", i + 1, j + 1, z.re, z.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 - 0.1 * j as f64, (i * j) as f64 / 7.0))
    }

    #[test]
    fn array_round_trip_is_exact() {
        let m = sample();
        assert_eq!(parse_matrix(&write_array(&m)).unwrap(), m);
    }

    #[test]
    fn coordinate_round_trip_is_exact() {
        let mut m = sample();
        m[(1, 2)] = C64::new(0.0, 0.0);
        let text = write_coordinate(&m);
        // (0, 0) is zero in the sample as well
        assert!(text.lines().nth(1).unwrap().ends_with(" 7"));
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }

    #[test]
    fn real_coordinate_and_comments() {
        let text = "%%MatrixMarket matrix coordinate real general\n% shift\n3 3 2\n2 1 1\n3 2 1.0\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(2, 1)], C64::new(1.0, 0.0));
        assert_eq!(m.iter().filter(|z| z.re != 0.0).count(), 2);
    }

    #[test]
    fn hermitian_array_mirrors_with_conjugation() {
        let text = "%%MatrixMarket matrix array complex hermitian\n2 2\n1 0\n2 3\n4 0\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m[(1, 0)], C64::new(2.0, 3.0));
        assert_eq!(m[(0, 1)], C64::new(2.0, -3.0));
        assert_eq!(m[(1, 1)], C64::new(4.0, 0.0));
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array complex general\n2 2\n1 0\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix coordinate complex general\n2 2 1\n3 1 1 0\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
        assert!(parse_matrix("%%MatrixMarket vector array real general\n1 1\n1\n").is_err());
    }
}
