//! Matrix Market and eigenvalue-list I/O.
//!
//! Parsing and writing of the Matrix Market container (array and
//! coordinate formats, general and symmetric storage) is delegated to
//! `nalgebra-sparse`; this module densifies the result.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra_sparse::io::{
    load_coo_from_matrix_market_file, load_coo_from_matrix_market_str, save_to_matrix_market_file,
};
use nalgebra_sparse::CooMatrix;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// A dense, possibly rectangular matrix read from a file (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<f64>,
}

impl RectMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    /// Interprets the matrix as a symmetric Hessian.
    pub fn into_square(self) -> Result<DenseMatrix<f64>> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: self.ncols });
        }
        DenseMatrix::from_row_major(self.nrows, self.data)
    }

    /// `scale · AᵀA` for `A` of shape `n × d`.
    pub fn gram(&self, scale: f64) -> DenseMatrix<f64> {
        let d = self.ncols;
        let mut h = DenseMatrix::zeros(d);
        for row in self.data.chunks(d) {
            for (i, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in row.iter().enumerate().skip(i) {
                    h.set(i, j, h.get(i, j) + scale * a * b);
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                h.set(i, j, h.get(j, i));
            }
        }
        h
    }
}

fn densify(coo: CooMatrix<f64>) -> RectMatrix {
    let (nrows, ncols) = (coo.nrows(), coo.ncols());
    let mut data = vec![0.0; nrows * ncols];
    for (i, j, v) in coo.triplet_iter() {
        data[i * ncols + j] += *v;
    }
    RectMatrix { nrows, ncols, data }
}

/// Reads a real Matrix Market file into a dense matrix.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<RectMatrix> {
    let path = path.as_ref();
    let coo = load_coo_from_matrix_market_file::<f64, _>(path)
        .map_err(|e| Error::MatrixMarket(format!("{}: {}", path.display(), e.message())))?;
    Ok(densify(coo))
}

/// Parses Matrix Market text.
pub fn parse_matrix_market(text: &str) -> Result<RectMatrix> {
    let coo = load_coo_from_matrix_market_str::<f64>(text).map_err(|e| Error::MatrixMarket(e.message().to_string()))?;
    Ok(densify(coo))
}

/// Writes a dense matrix in coordinate format (nonzeros only).
pub fn write_matrix_market(path: impl AsRef<Path>, m: &DenseMatrix<f64>) -> Result<()> {
    let n = m.dim();
    let mut coo = CooMatrix::new(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v != 0.0 {
                coo.push(i, j, v);
            }
        }
    }
    save_to_matrix_market_file(&coo, path)?;
    Ok(())
}

/// Reads a single-column CSV of eigenvalues; a non-numeric first line is
/// treated as a header.
pub fn read_eigenvalues_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_eigenvalues_csv(&text)
}

pub fn parse_eigenvalues_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidParameter(format!("line {}: not a number: {field:?}", lineno + 1)));
            }
        }
    }
    Ok(out)
}

/// Writes eigenvalues as a single-column CSV with header `eigenvalue`.
pub fn write_eigenvalues_csv(path: impl AsRef<Path>, eigs: &[f64]) -> Result<()> {
    let mut s = String::from("eigenvalue\n");
    for v in eigs {
        let _ = writeln!(s, "{v:.16e}");
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_symmetric_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n3 3 1.5\n";
        let m = parse_matrix_market(text).unwrap().into_square().unwrap();
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(2, 2), 1.5);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn parses_array_format() {
        let text = "%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!((m.nrows, m.ncols), (2, 3));
        // Column-major storage in the file.
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 2), 6.0);
        let g = m.gram(1.0);
        assert_eq!(g.get(0, 0), 1.0 + 4.0);
        assert_eq!(g.get(0, 2), 5.0 + 12.0);
        assert!(m.into_square().is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_matrix_market("not a matrix"), Err(Error::MatrixMarket(_))));
    }

    #[test]
    fn round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = DenseMatrix::from_fn(4, |i, j| {
            if i == j {
                2.0
            } else if i + 1 == j || j + 1 == i {
                -0.5
            } else {
                0.0
            }
        });
        let path = dir.path().join("h.mtx");
        write_matrix_market(&path, &m).unwrap();
        assert_eq!(read_matrix_market(&path).unwrap().into_square().unwrap(), m);

        let eigs = vec![0.0, 1.0 / 3.0, 2.5];
        let path = dir.path().join("eigs.csv");
        write_eigenvalues_csv(&path, &eigs).unwrap();
        assert_eq!(read_eigenvalues_csv(&path).unwrap(), eigs);
        assert!(parse_eigenvalues_csv("1.0\nabc\n").is_err());
    }
}
