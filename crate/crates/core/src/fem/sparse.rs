//! Symmetric sparse matrices stored as sorted upper-triangle triplets.

use std::fmt::Write;

/// Symmetric matrix stored as `(row, col, value)` with `row <= col`, sorted and
/// without duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetricMatrix {
    /// Builds from arbitrary triplets. Lower-triangle entries are mirrored into the
    /// upper triangle and duplicates are summed in input order, so the result is
    /// independent of how callers interleave their contributions only up to that order.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut upper: Vec<(usize, usize, f64)> = triplets
            .into_iter()
            .map(|(i, j, v)| {
                assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
                (i.min(j), i.max(j), v)
            })
            .collect();
        // stable: duplicates keep insertion order, which fixes the summation order
        upper.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(upper.len());
        for (i, j, v) in upper {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        SparseSymmetricMatrix { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        SparseSymmetricMatrix {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.mul_vec(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Maximum absolute row sum (equals the 1-norm by symmetry).
    pub fn inf_norm(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            rows[i] += v.abs();
            if i != j {
                rows[j] += v.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    /// Sum of every entry of the full (symmetric) matrix.
    pub fn total(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v } else { 2.0 * v })
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseSymmetricMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * factor)).collect(),
        }
    }

    pub fn add(&self, other: &SparseSymmetricMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(
            self.dim,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    /// Full symmetric adjacency: for each row, `(col, value)` sorted by column.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.dim];
        for &(i, j, v) in &self.entries {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        for r in &mut rows {
            r.sort_by_key(|e| e.0);
        }
        rows
    }

    /// Principal submatrix on `index` (renumbered `0..index.len()` in that order).
    pub fn principal_submatrix(&self, index: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in index.iter().enumerate() {
            pos[i] = k;
        }
        let triplets = self.entries.iter().filter_map(|&(i, j, v)| {
            let (a, b) = (pos[i], pos[j]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b, v))
        });
        Self::from_triplets(index.len(), triplets)
    }

    /// Off-diagonal block `A[rows, cols]` returned column by column as sparse
    /// `(row position, value)` lists.
    pub fn block_columns(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<(usize, f64)>> {
        let mut row_pos = vec![usize::MAX; self.dim];
        for (k, &i) in rows.iter().enumerate() {
            row_pos[i] = k;
        }
        let mut col_pos = vec![usize::MAX; self.dim];
        for (k, &j) in cols.iter().enumerate() {
            col_pos[j] = k;
        }
        let mut out = vec![Vec::new(); cols.len()];
        for &(i, j, v) in &self.entries {
            if row_pos[i] != usize::MAX && col_pos[j] != usize::MAX {
                out[col_pos[j]].push((row_pos[i], v));
            }
            if i != j && row_pos[j] != usize::MAX && col_pos[i] != usize::MAX {
                out[col_pos[i]].push((row_pos[j], v));
            }
        }
        for c in &mut out {
            c.sort_by_key(|e| e.0);
        }
        out
    }

    /// Coordinate-format text, one `row col value` line per stored entry, 17 significant digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::with_capacity(self.entries.len() * 32);
        for &(i, j, v) in &self.entries {
            writeln!(s, "{i} {j} {v:.16e}").unwrap();
        }
        s
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }
}
