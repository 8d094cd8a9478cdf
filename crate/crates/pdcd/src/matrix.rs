//! Sparse data-matrix storage with simultaneous row and column traversal.
//!
//! The primal solver iterates over rows of the data matrix, the dual solver
//! over columns, so the matrix keeps both access paths. All cost-model
//! quantities are defined in terms of stored (structural) nonzeros, so an
//! explicit zero value is rejected at construction rather than dropped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A `d x n` sparse matrix stored in both row-major and column-major form.
///
/// Rows index features, columns index examples. Both views describe the
/// identical set of `(row, col, value)` triples; within each row/column the
/// indices are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DualIndexedSparseMatrix {
    d: usize,
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    nnz: usize,
}

/// Per-row/column structural statistics of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureStats {
    /// Nonzero count of each row (`‖X_{i:}‖_0`).
    pub row_nnz: Vec<usize>,
    /// Nonzero count of each column (`‖X_{:j}‖_0`).
    pub col_nnz: Vec<usize>,
    /// Squared Euclidean norm of each row (`‖X_{i:}‖_2²`).
    pub row_sqnorm: Vec<f64>,
    /// Squared Euclidean norm of each column (`‖X_{:j}‖_2²`).
    pub col_sqnorm: Vec<f64>,
    /// Squared Frobenius norm.
    pub frob_sq: f64,
}

impl DualIndexedSparseMatrix {
    /// Builds a matrix from `(row, col, value)` triples.
    ///
    /// Rejects out-of-range indices, duplicate positions and explicit zeros.
    pub fn build(triples: &[(usize, usize, f64)], d: usize, n: usize) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triples {
            if i >= d || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, d, n });
            }
            if v == 0.0 {
                return Err(Error::ExplicitZero { row: i, col: j });
            }
            rows[i].push((j, v));
        }
        for row in rows.iter_mut() {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        for (i, row) in rows.iter().enumerate() {
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::DuplicateEntry { row: i, col: w[0].0 });
                }
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((i, v));
            }
        }
        // Row-major fill visits rows in increasing order, so columns come out sorted.
        let nnz = triples.len();
        Ok(Self { d, n, rows, cols, nnz })
    }

    /// Number of rows (features).
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of columns (examples).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of stored entries, `‖X‖_0`.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Nonzeros of row `i` as `(column, value)` pairs, indices increasing.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Nonzeros of column `j` as `(row, value)` pairs, indices increasing.
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    /// All stored triples in row-major order.
    pub fn triples(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out.push((i, j, v));
            }
        }
        out
    }

    /// The transpose, with the two views swapped.
    pub fn transpose(&self) -> Self {
        Self {
            d: self.n,
            n: self.d,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            nnz: self.nnz,
        }
    }

    /// Computes all structural statistics in one pass per view.
    pub fn stats(&self) -> StructureStats {
        let row_nnz = self.rows.iter().map(|r| r.len()).collect();
        let col_nnz = self.cols.iter().map(|c| c.len()).collect();
        let row_sqnorm: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(_, v)| v * v).sum())
            .collect();
        let col_sqnorm: Vec<f64> = self
            .cols
            .iter()
            .map(|c| c.iter().map(|&(_, v)| v * v).sum())
            .collect();
        let frob_sq = row_sqnorm.iter().sum();
        StructureStats { row_nnz, col_nnz, row_sqnorm, col_sqnorm, frob_sq }
    }

    /// Divides every entry by the average column norm `(1/n) Σ_j ‖X_{:j}‖_2`
    /// of the input. The sparsity pattern is unchanged.
    pub fn normalize_columns(&self) -> Result<Self> {
        let stats = self.stats();
        for (j, &sq) in stats.col_sqnorm.iter().enumerate() {
            if sq == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
        }
        let avg = stats.col_sqnorm.iter().map(|&s| s.sqrt()).sum::<f64>() / self.n as f64;
        let mut out = self.clone();
        for row in out.rows.iter_mut() {
            for e in row.iter_mut() {
                e.1 /= avg;
            }
        }
        for col in out.cols.iter_mut() {
            for e in col.iter_mut() {
                e.1 /= avg;
            }
        }
        Ok(out)
    }

    /// Writes the matrix column-by-column in LIBSVM text format, one example
    /// per line with 1-based feature indices.
    pub fn write_libsvm<W: Write>(&self, labels: &[f64], mut out: W) -> Result<()> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: labels.len() });
        }
        for (j, label) in labels.iter().enumerate() {
            write!(out, "{label}")?;
            for &(i, v) in &self.cols[j] {
                write!(out, " {}:{}", i + 1, v)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parses LIBSVM text: one example per line, `label idx:val idx:val ...` with
/// 1-based strictly increasing feature indices. `#` starts a comment running
/// to end of line. Returns the matrix (examples as columns) and the labels.
///
/// The feature count defaults to the largest index seen; pass `min_d` to
/// force extra trailing all-zero features.
pub fn read_libsvm<R: BufRead>(source: R, min_d: Option<usize>) -> Result<(DualIndexedSparseMatrix, Vec<f64>)> {
    let mut labels = Vec::new();
    let mut triples = Vec::new();
    let mut d = min_d.unwrap_or(0);
    let mut j = 0usize;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = line.split_whitespace();
        let label_tok = match tokens.next() {
            Some(t) => t,
            None => continue, // blank or comment-only line
        };
        let malformed = |reason: &str| Error::MalformedLine {
            line: lineno + 1,
            reason: reason.to_string(),
        };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| malformed(&format!("bad label `{label_tok}`")))?;
        let mut prev_idx = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| malformed(&format!("expected idx:val, got `{tok}`")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| malformed(&format!("bad feature index `{idx_s}`")))?;
            if idx == 0 {
                return Err(malformed("feature index must be >= 1"));
            }
            if idx <= prev_idx {
                return Err(malformed("feature indices must be strictly increasing"));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| malformed(&format!("bad feature value `{val_s}`")))?;
            prev_idx = idx;
            d = d.max(idx);
            if val != 0.0 {
                triples.push((idx - 1, j, val));
            }
        }
        labels.push(label);
        j += 1;
    }
    if labels.is_empty() {
        return Err(Error::EmptyFile);
    }
    let x = DualIndexedSparseMatrix::build(&triples, d, labels.len())?;
    Ok((x, labels))
}
