//! Matrix Market coordinate (real, general or symmetric) and dense array I/O.
//!
//! Indices are 1-based in files and 0-based everywhere else.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CscMatrix, SparseError, TripletMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Write a coordinate matrix. With [`Symmetry::Symmetric`] only entries with
/// `row ≥ col` are written; the caller is responsible for the matrix actually
/// being symmetric. Explicit zeros are written so the pattern survives.
pub fn write_coordinate(a: &CscMatrix, symmetry: Symmetry) -> String {
    let keep = |i: usize, j: usize| symmetry == Symmetry::General || i >= j;
    let nnz = a.triplets().filter(|&(i, j, _)| keep(i, j)).count();
    let mut s = String::with_capacity(32 * nnz + 64);
    let tag = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    let _ = writeln!(s, "%%MatrixMarket matrix coordinate real {tag}");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), nnz);
    for (i, j, v) in a.triplets() {
        if keep(i, j) {
            let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
        }
    }
    s
}

/// Parse a coordinate matrix. Symmetric files are expanded to both triangles.
pub fn read_coordinate(text: &str) -> Result<CscMatrix, SparseError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| mm_err(1, "empty input"))?
        .to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(mm_err(1, "missing %%MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" {
        return Err(mm_err(1, "expected coordinate format"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(mm_err(1, "only real or integer fields are supported"));
    }
    let symmetry = match fields[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(mm_err(1, &format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines
        .enumerate()
        .map(|(k, l)| (k + 2, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (ln, size) = body.next().ok_or_else(|| mm_err(2, "missing size line"))?;
    let dims = parse_usizes(size, ln)?;
    if dims.len() != 3 {
        return Err(mm_err(ln, "size line needs rows, cols, nnz"));
    }
    let (n_rows, n_cols, nnz) = (dims[0], dims[1], dims[2]);
    let mut t = TripletMatrix::with_capacity(n_rows, n_cols, nnz * 2);
    let mut seen = 0;
    for (ln, line) in body {
        let mut it = line.split_whitespace();
        let (Some(i), Some(j), Some(v)) = (it.next(), it.next(), it.next()) else {
            return Err(mm_err(ln, "entry needs row, col, value"));
        };
        let i: usize = i.parse().map_err(|_| mm_err(ln, "bad row index"))?;
        let j: usize = j.parse().map_err(|_| mm_err(ln, "bad column index"))?;
        let v: f64 = v.parse().map_err(|_| mm_err(ln, "bad value"))?;
        if i == 0 || j == 0 || i > n_rows || j > n_cols {
            return Err(mm_err(ln, "index out of range"));
        }
        t.push(i - 1, j - 1, v)?;
        if symmetry == Symmetry::Symmetric && i != j {
            t.push(j - 1, i - 1, v)?;
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(mm_err(0, &format!("expected {nnz} entries, found {seen}")));
    }
    Ok(t.compress())
}

/// Dense column vector in Matrix Market array format.
pub fn write_vector(x: &[f64]) -> String {
    let mut s = String::with_capacity(24 * x.len() + 64);
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", x.len());
    for v in x {
        let _ = writeln!(s, "{v:e}");
    }
    s
}

pub fn read_vector(text: &str) -> Result<Vec<f64>, SparseError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| mm_err(1, "empty input"))?
        .to_ascii_lowercase();
    if !header.starts_with("%%matrixmarket matrix array") {
        return Err(mm_err(1, "expected array header"));
    }
    let mut body = lines
        .enumerate()
        .map(|(k, l)| (k + 2, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (ln, size) = body.next().ok_or_else(|| mm_err(2, "missing size line"))?;
    let dims = parse_usizes(size, ln)?;
    if dims.len() != 2 || dims[1] != 1 {
        return Err(mm_err(ln, "expected an n x 1 array"));
    }
    let mut x = Vec::with_capacity(dims[0]);
    for (ln, line) in body {
        x.push(line.parse().map_err(|_| mm_err(ln, "bad value"))?);
    }
    if x.len() != dims[0] {
        return Err(mm_err(0, &format!("expected {} values, found {}", dims[0], x.len())));
    }
    Ok(x)
}

pub fn save_coordinate(path: &Path, a: &CscMatrix, symmetry: Symmetry) -> std::io::Result<()> {
    fs::write(path, write_coordinate(a, symmetry))
}

pub fn load_coordinate(path: &Path) -> Result<CscMatrix, SparseError> {
    let text = fs::read_to_string(path).map_err(|e| SparseError::Io(path.display().to_string(), e))?;
    read_coordinate(&text)
}

fn parse_usizes(line: &str, ln: usize) -> Result<Vec<usize>, SparseError> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| mm_err(ln, "bad integer")))
        .collect()
}

fn mm_err(line: usize, msg: &str) -> SparseError {
    SparseError::MatrixMarket {
        line,
        msg: msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_round_trip_keeps_explicit_zeros() {
        let mut t = TripletMatrix::new(3, 3);
        t.push(0, 0, 1.5).unwrap();
        t.push(2, 1, 0.0).unwrap();
        t.push(1, 2, -3.25e-7).unwrap();
        let a = t.compress();
        let back = read_coordinate(&write_coordinate(&a, Symmetry::General)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn symmetric_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 1\n";
        let a = read_coordinate(text).unwrap();
        assert_eq!(a.to_dense(), vec![vec![4.0, 1.0], vec![1.0, 0.0]]);
        let back = read_coordinate(&write_coordinate(&a, Symmetry::Symmetric)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn bad_entry_count_is_an_error() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4\n";
        assert!(read_coordinate(text).is_err());
    }

    #[test]
    fn vector_round_trip() {
        let x = vec![1.0, -2.5e-300, 0.1, 7e12];
        assert_eq!(read_vector(&write_vector(&x)).unwrap(), x);
    }
}
