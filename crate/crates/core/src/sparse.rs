//! Compressed sparse row storage.
//!
//! Every matrix is kept in canonical form: column indices strictly increasing
//! within a row, no duplicate entries. Row products accumulate in stored
//! (ascending column) order, so the same row always yields the same bits no
//! matter which worker evaluates it.

use std::ops::Range;

use crate::error::{Error, Result};

/// Index type used for row offsets and column indices.
pub type Index = i64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<Index>,
    col_idx: Vec<Index>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a canonical matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate positions are summed in input order. Triplets whose value is
    /// exactly zero are dropped before summation.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries = Vec::new();
        for (r, c, v) in triplets {
            check_index("row", r, n_rows)?;
            check_index("column", c, n_cols)?;
            if v != 0.0 {
                entries.push((r, c, v));
            }
        }
        // stable: duplicates keep their input order for summation
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0 as Index; n_rows + 1];
        let mut col_idx: Vec<Index> = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c as Index);
            vals.push(v);
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Wraps raw CSR arrays after checking every canonical-form invariant.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<Index>,
        col_idx: Vec<Index>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_rows + 1,
                found: row_ptr.len(),
            });
        }
        if col_idx.len() != vals.len() {
            return Err(Error::DimensionMismatch {
                expected: col_idx.len(),
                found: vals.len(),
            });
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() as Index {
            return Err(Error::CorruptFile(format!(
                "row offsets must span [0, {}], got [{}, {}]",
                col_idx.len(),
                row_ptr[0],
                row_ptr[n_rows]
            )));
        }
        for (i, w) in row_ptr.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::CorruptFile(format!(
                    "row offsets decrease at row {i}"
                )));
            }
            let cols = &col_idx[w[0] as usize..w[1] as usize];
            for (k, &c) in cols.iter().enumerate() {
                if c < 0 || c as usize >= n_cols {
                    return Err(Error::IndexOutOfRange {
                        what: "column",
                        index: c.max(0) as usize,
                        bound: n_cols,
                    });
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::CorruptFile(format!(
                        "columns of row {i} are not strictly increasing"
                    )));
                }
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n as Index).collect(),
            col_idx: (0..n as Index).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[Index] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[Index] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    /// Column indices and values stored in row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[Index], &[f64]) {
        let span = self.row_ptr[i] as usize..self.row_ptr[i + 1] as usize;
        (&self.col_idx[span.clone()], &self.vals[span])
    }

    /// `Σ_j A[i,j]·x[j]` accumulated in ascending column order.
    ///
    /// This is the only row-product kernel in the crate; Bellman backups,
    /// policy matvecs and Richardson sweeps all go through it.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        let mut acc = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            acc += v * x[c as usize];
        }
        acc
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.matvec_rows(0..self.n_rows, x, &mut y);
        Ok(y)
    }

    /// Computes rows `rows` of `A·x` into `out` (one slot per row).
    ///
    /// Panics if `out.len() != rows.len()` or `x` is too short.
    pub fn matvec_rows(&self, rows: Range<usize>, x: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), rows.len());
        for (y, i) in out.iter_mut().zip(rows) {
            *y = self.row_dot(i, x);
        }
    }

    /// New matrix whose row `k` is row `rows[k]` of `self`.
    pub fn extract_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut nnz = 0;
        for &r in rows {
            check_index("row", r, self.n_rows)?;
            nnz += (self.row_ptr[r + 1] - self.row_ptr[r]) as usize;
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for &r in rows {
            let (c, v) = self.row(r);
            col_idx.extend_from_slice(c);
            vals.extend_from_slice(v);
            row_ptr.push(col_idx.len() as Index);
        }
        Ok(SparseMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&c, &v)| (i, c as usize, v))
        })
    }
}

/// Sorts one row's `(col, value)` entries and merges duplicates, the same
/// way [`SparseMatrix::from_triplets`] does for a whole matrix.
pub(crate) fn canonicalize_row(entries: &mut Vec<(usize, f64)>) {
    entries.retain(|&(_, v)| v != 0.0);
    entries.sort_by_key(|&(c, _)| c);
    entries.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 += next.1;
            true
        } else {
            false
        }
    });
}

fn check_index(what: &'static str, index: usize, bound: usize) -> Result<()> {
    if index >= bound {
        Err(Error::IndexOutOfRange { what, index, bound })
    } else {
        Ok(())
    }
}
