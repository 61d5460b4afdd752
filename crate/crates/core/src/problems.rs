//! Model-problem generators and Matrix Market file I/O.
//!
//! Dirichlet boundaries are eliminated, so every generated operator is
//! nonsingular without constraint handling.

use crate::error::{Error, Result};
use crate::linalg::{real, Scalar, SparseMatrix};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Model problem selection.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemKind {
    /// 1D Laplacian, tridiag(-1, 2, -1) on n interior points.
    Poisson1d { n: usize },
    /// 2D Laplacian, standard 5-point stencil on an nx-by-ny interior grid.
    Poisson2d { nx: usize, ny: usize },
    /// 1D advection-diffusion, tridiag(-1-p, 2, -1+p) with p the mesh Peclet
    /// number `peclet * h / 2`; switches to upwinding when |p| > 1.
    AdvDiff1d { n: usize, peclet: f64 },
    /// Matrix Market coordinate file.
    CustomFile { path: std::path::PathBuf },
}

pub fn generate(kind: &ProblemKind) -> Result<SparseMatrix> {
    match kind {
        ProblemKind::Poisson1d { n } => poisson1d(*n),
        ProblemKind::Poisson2d { nx, ny } => poisson2d(*nx, *ny),
        ProblemKind::AdvDiff1d { n, peclet } => advdiff1d(*n, *peclet),
        ProblemKind::CustomFile { path } => read_matrix_market(path),
    }
}

pub fn poisson1d(n: usize) -> Result<SparseMatrix> {
    require_size(n)?;
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        trips.push((i, i, real(2.0)));
        if i > 0 {
            trips.push((i, i - 1, real(-1.0)));
        }
        if i + 1 < n {
            trips.push((i, i + 1, real(-1.0)));
        }
    }
    SparseMatrix::from_triplets(n, n, &trips)
}

pub fn poisson2d(nx: usize, ny: usize) -> Result<SparseMatrix> {
    require_size(nx)?;
    require_size(ny)?;
    let n = nx * ny;
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    let mut trips = Vec::with_capacity(5 * n);
    for iy in 0..ny {
        for ix in 0..nx {
            let c = idx(ix, iy);
            trips.push((c, c, real(4.0)));
            if ix > 0 {
                trips.push((c, idx(ix - 1, iy), real(-1.0)));
            }
            if ix + 1 < nx {
                trips.push((c, idx(ix + 1, iy), real(-1.0)));
            }
            if iy > 0 {
                trips.push((c, idx(ix, iy - 1), real(-1.0)));
            }
            if iy + 1 < ny {
                trips.push((c, idx(ix, iy + 1), real(-1.0)));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &trips)
}

pub fn advdiff1d(n: usize, peclet: f64) -> Result<SparseMatrix> {
    require_size(n)?;
    let h = 1.0 / (n as f64 + 1.0);
    let p = peclet * h / 2.0;
    let (sub, diag, sup) = if p.abs() <= 1.0 {
        (-1.0 - p, 2.0, -1.0 + p)
    } else if p > 0.0 {
        (-1.0 - 2.0 * p, 2.0 + 2.0 * p, -1.0)
    } else {
        (-1.0, 2.0 - 2.0 * p, -1.0 + 2.0 * p)
    };
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        trips.push((i, i, real(diag)));
        if i > 0 {
            trips.push((i, i - 1, real(sub)));
        }
        if i + 1 < n {
            trips.push((i, i + 1, real(sup)));
        }
    }
    SparseMatrix::from_triplets(n, n, &trips)
}

fn require_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidProblem {
            reason: format!("grid size {n} is below the minimum of 2"),
        });
    }
    Ok(())
}

/// Read a Matrix Market coordinate file (real or complex, general or
/// symmetric). Symmetric files have the stored triangle mirrored on read.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_matrix_market_from(BufReader::new(file), &path.display().to_string())
}

pub fn read_matrix_market_from(reader: impl BufRead, name: &str) -> Result<SparseMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: name.to_string(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate();

    let (header_no, header) = match lines.next() {
        Some((no, line)) => (no + 1, line?),
        None => return Err(err(1, "empty file".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%MatrixMarket" {
        return Err(err(
            header_no,
            "header must be `%%MatrixMarket matrix coordinate <field> <symmetry>`".into(),
        ));
    }
    if fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(err(
            header_no,
            format!("unsupported object/format `{} {}`", fields[1], fields[2]),
        ));
    }
    let complex = match fields[3] {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(err(header_no, format!("unsupported field type `{other}`"))),
    };
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(header_no, format!("unsupported symmetry `{other}`"))),
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut trips: Vec<(usize, usize, Scalar)> = Vec::new();
    for (no, line) in lines {
        let no = no + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = text.split_whitespace().collect();
        match dims {
            None => {
                if parts.len() != 3 {
                    return Err(err(no, "size line must be `rows cols nnz`".into()));
                }
                let rows = parse_usize(parts[0], no, name)?;
                let cols = parse_usize(parts[1], no, name)?;
                let nnz = parse_usize(parts[2], no, name)?;
                dims = Some((rows, cols, nnz));
            }
            Some((rows, cols, _)) => {
                let want = if complex { 4 } else { 3 };
                if parts.len() != want {
                    return Err(err(
                        no,
                        format!("entry must have {want} fields, found {}", parts.len()),
                    ));
                }
                let i = parse_usize(parts[0], no, name)?;
                let j = parse_usize(parts[1], no, name)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(err(
                        no,
                        format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
                    ));
                }
                let re = parse_f64(parts[2], no, name)?;
                let im = if complex {
                    parse_f64(parts[3], no, name)?
                } else {
                    0.0
                };
                let v = Scalar::new(re, im);
                trips.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trips.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = dims.ok_or_else(|| err(0, "missing size line".into()))?;
    let stored = if symmetric {
        trips.len() - trips.iter().filter(|&&(i, j, _)| i != j).count() / 2
    } else {
        trips.len()
    };
    if stored != nnz {
        return Err(err(
            0,
            format!("size line declared {nnz} entries, file stores {stored}"),
        ));
    }
    let m = SparseMatrix::from_triplets(rows, cols, &trips)?;
    if !m.to_dense().is_finite() {
        return Err(Error::NonFinite {
            op: "matrix market read",
        });
    }
    Ok(m)
}

fn parse_usize(s: &str, line: usize, name: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        path: name.to_string(),
        line,
        msg: format!("expected integer, found `{s}`"),
    })
}

fn parse_f64(s: &str, line: usize, name: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse {
        path: name.to_string(),
        line,
        msg: format!("expected number, found `{s}`"),
    })
}

/// Write in coordinate format; complex field is used only when some entry
/// has a nonzero imaginary part. Values round-trip exactly.
pub fn write_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_matrix_market_to(m, &mut file)
}

pub fn write_matrix_market_to(m: &SparseMatrix, out: &mut impl Write) -> Result<()> {
    let complex = m.entries().any(|(_, _, v)| v.im != 0.0);
    let field = if complex { "complex" } else { "real" };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, j, v) in m.entries() {
        if complex {
            writeln!(out, "{} {} {} {}", i + 1, j + 1, fmt_f64(v.re), fmt_f64(v.im))?;
        } else {
            writeln!(out, "{} {} {}", i + 1, j + 1, fmt_f64(v.re))?;
        }
    }
    Ok(())
}

/// Shortest representation that parses back to the identical f64.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn poisson1d_textbook_stencil() {
        let a = poisson1d(3).unwrap().to_dense();
        let expect =
            DenseMatrix::from_real_rows(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        assert_eq!(a, expect);
    }

    #[test]
    fn poisson2d_has_diagonal_four() {
        let a = poisson2d(2, 2).unwrap().to_dense();
        assert_eq!(a.rows(), 4);
        for i in 0..4 {
            assert_eq!(a[(i, i)], real(4.0));
        }
        // each corner of the 2x2 grid has exactly two neighbors
        for i in 0..4 {
            let offdiag: f64 = (0..4)
                .filter(|&j| j != i)
                .map(|j| a[(i, j)].norm())
                .sum();
            assert_eq!(offdiag, 2.0);
        }
    }

    #[test]
    fn advdiff_is_nonsymmetric_for_positive_peclet() {
        let a = advdiff1d(4, 0.5).unwrap();
        assert!(!a.is_symmetric());
        let d = a.to_dense();
        assert_ne!(d[(1, 0)], d[(0, 1)]);
    }

    #[test]
    fn advdiff_upwinds_beyond_unit_mesh_peclet() {
        // n = 4, h = 0.2, peclet = 20 -> p = 2 > 1
        let a = advdiff1d(4, 20.0).unwrap().to_dense();
        assert_eq!(a[(1, 1)], real(6.0));
        assert_eq!(a[(1, 0)], real(-5.0));
        assert_eq!(a[(1, 2)], real(-1.0));
    }

    #[test]
    fn one_by_one_matrix_writes_expected_form() {
        let m = SparseMatrix::from_triplets(1, 1, &[(0, 0, real(2.0))]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n"
        );
    }

    #[test]
    fn symmetric_file_expands_lower_triangle() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 -1\n";
        let m = read_matrix_market_from(text.as_bytes(), "inline").unwrap();
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], real(-1.0));
        assert_eq!(d[(1, 0)], real(-1.0));
        assert_eq!(d[(0, 0)], real(2.0));
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let a = poisson1d(8).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        let b = read_matrix_market_from(buf.as_slice(), "inline").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_header_reports_line() {
        let text = "%%MatrixMarket matrix array real general\n";
        match read_matrix_market_from(text.as_bytes(), "inline") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_entry_reports_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3.0\n";
        match read_matrix_market_from(text.as_bytes(), "inline") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn complex_values_round_trip() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, Scalar::new(1.5, -0.25)), (1, 0, real(3.0))],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate complex general"));
        let b = read_matrix_market_from(buf.as_slice(), "inline").unwrap();
        assert_eq!(m, b);
    }

    #[test]
    fn tiny_sizes_rejected() {
        assert!(poisson1d(1).is_err());
        assert!(poisson2d(1, 4).is_err());
    }
}
