//! On-disk formats: headerless matrix CSV, sample CSV, and edge lists.
//!
//! * Matrix CSV: one row per matrix row, comma-separated floats printed at
//!   17 significant digits (round-trip exact for f64), no header.
//! * Sample CSV: one row per sample, `p` columns, same float format.
//! * Edge list: whitespace-separated `i j [weight]` per line, 0-based node
//!   indices, weight defaulting to 1; `#` starts a comment.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use kirch_core::sym::{IndexSet, SymMatrix};

use crate::error::{io_err, CliError, Result};

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a symmetric matrix as headerless CSV.
pub fn write_matrix_csv(path: &Path, m: &SymMatrix) -> Result<()> {
    let p = m.dim();
    let mut out = String::new();
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_float(m.get(i, j)));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Read a symmetric matrix from headerless CSV (must be square and
/// symmetric within the crate-wide tolerance).
pub fn read_matrix_csv(path: &Path) -> Result<SymMatrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    CliError::Parse(format!(
                        "{}:{}: not a number: {tok:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    let p = rows.len();
    if p == 0 {
        return Err(CliError::Parse(format!("{}: empty matrix", path.display())));
    }
    let mut flat = Vec::with_capacity(p * p);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(CliError::Parse(format!(
                "{}: row {} has {} entries, expected {p}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    SymMatrix::from_rows(p, &flat).map_err(CliError::Core)
}

/// Write samples (row-major `n x p`) as CSV, one sample per row.
pub fn write_samples_csv(path: &Path, n: usize, p: usize, y: &[f64]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    for i in 0..n {
        for j in 0..p {
            if j > 0 {
                w.write_all(b",").map_err(io_err(path))?;
            }
            w.write_all(fmt_float(y[i * p + j]).as_bytes()).map_err(io_err(path))?;
        }
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Read a sample CSV; returns `(n, p, row-major data)`.
pub fn read_samples_csv(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut data = Vec::new();
    let mut p = 0usize;
    let mut n = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let start = data.len();
        for tok in line.split(',') {
            data.push(tok.trim().parse::<f64>().map_err(|_| {
                CliError::Parse(format!(
                    "{}:{}: not a number: {tok:?}",
                    path.display(),
                    lineno + 1
                ))
            })?);
        }
        let width = data.len() - start;
        if n == 0 {
            p = width;
        } else if width != p {
            return Err(CliError::Parse(format!(
                "{}: row {} has {width} entries, expected {p}",
                path.display(),
                n + 1
            )));
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::Parse(format!("{}: no samples", path.display())));
    }
    Ok((n, p, data))
}

/// Parse an edge-list file: `i j [weight]`, `#` comments, 0-based indices.
pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let badline = || {
            CliError::Parse(format!(
                "{}:{}: expected `i j [weight]`, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        };
        let i: usize = toks.next().ok_or_else(badline)?.parse().map_err(|_| badline())?;
        let j: usize = toks.next().ok_or_else(badline)?.parse().map_err(|_| badline())?;
        let w: f64 = match toks.next() {
            Some(t) => t.parse().map_err(|_| badline())?,
            None => 1.0,
        };
        if toks.next().is_some() {
            return Err(badline());
        }
        edges.push((i, j, w));
    }
    Ok(edges)
}

/// Write an undirected support as an edge list (each pair once, `i < j`),
/// with the matrix entry as the weight.
pub fn write_edge_list(path: &Path, m: &SymMatrix, support: &IndexSet) -> Result<()> {
    let mut out = String::from("# i j weight (0-based, undirected)\n");
    for (i, j) in support.iter() {
        if i < j {
            out.push_str(&format!("{i} {j} {}\n", fmt_float(m.get(i, j))));
        }
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Parse(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_csv_roundtrips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = SymMatrix::from_rows(
            2,
            &[1.0 / 3.0, 2.0f64.sqrt(), 2.0f64.sqrt(), 5.0e-13],
        )
        .unwrap();
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m.as_slice(), back.as_slice());
    }

    #[test]
    fn edge_list_parses_comments_defaults_and_rejects_junk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        fs::write(&path, "# header\n0 1 2.5\n1 2   # default weight\n\n2 3 -1.0\n").unwrap();
        let edges = read_edge_list(&path).unwrap();
        assert_eq!(edges, vec![(0, 1, 2.5), (1, 2, 1.0), (2, 3, -1.0)]);

        fs::write(&path, "0 x\n").unwrap();
        assert!(matches!(read_edge_list(&path), Err(CliError::Parse(_))));
    }

    #[test]
    fn samples_csv_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let y = vec![0.25, -1.5, 1.0 / 7.0, 3.25e8, -2.0, 0.0];
        write_samples_csv(&path, 3, 2, &y).unwrap();
        let (n, p, back) = read_samples_csv(&path).unwrap();
        assert_eq!((n, p), (3, 2));
        assert_eq!(y, back);
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = read_matrix_csv(Path::new("/nonexistent/m.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("/nonexistent/m.csv"));
    }
}
