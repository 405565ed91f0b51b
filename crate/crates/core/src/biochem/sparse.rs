//! Sparse nonnegative integer matrices for stoichiometry.
//!
//! Entries are assembled from triplets and stored column-compressed, which is
//! the access pattern of every kernel here (`B x = M^T x`, `M e`, and the
//! per-reaction outer products of the Hessians).

use std::collections::BTreeMap;

/// Column-compressed `rows x cols` matrix of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<u32>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// zero values dropped. Panics on out-of-range indices; the loaders
    /// validate before calling.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, u32)]) -> Self {
        let mut map: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for &(i, j, v) in triplets {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
            *map.entry((j, i)).or_insert(0) += v;
        }
        let mut col_ptr = vec![0; cols + 1];
        let mut row_idx = Vec::with_capacity(map.len());
        let mut values = Vec::with_capacity(map.len());
        for (&(j, i), &v) in &map {
            if v == 0 {
                continue;
            }
            col_ptr[j + 1] += 1;
            row_idx.push(i);
            values.push(v);
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of column `j` as `(row, value)`, ordered by row.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.column(j).find(|&(r, _)| r == i).map_or(0, |(_, v)| v)
    }

    /// Triplets in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, u32)> {
        (0..self.cols)
            .flat_map(|j| self.column(j).map(move |(i, v)| (i, j, v)))
            .collect()
    }

    /// Number of nonzeros in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rows];
        for &i in &self.row_idx {
            counts[i] += 1;
        }
        counts
    }

    /// `A^T v` as reals.
    pub fn tr_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.column(j).map(|(i, a)| a as f64 * v[i]).sum())
            .collect()
    }

    /// `A^T v` for integer weights.
    pub fn tr_mul_int(&self, v: &[i64]) -> Vec<i64> {
        (0..self.cols)
            .map(|j| self.column(j).map(|(i, a)| a as i64 * v[i]).sum())
            .collect()
    }
}
