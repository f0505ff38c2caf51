//! Envelope (profile) Cholesky factorization with reverse Cuthill-McKee ordering.
//!
//! The ordering depends only on the sparsity pattern and vertex indices, so the
//! factor and every solve are bit-reproducible.

use std::collections::VecDeque;

use super::SparseSymmetricMatrix;
use crate::error::{Error, Result};

/// `P A Pᵀ = L Lᵀ` with `L` stored row by row inside its envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv[old] = new`
    inv: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSymmetricMatrix) -> Result<Self> {
        let n = a.dim();
        let rows = a.rows();
        let perm = reverse_cuthill_mckee(&rows);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first = vec![0; n];
        for i in 0..n {
            let mut f = i;
            for &(j, _) in &rows[perm[i]] {
                f = f.min(inv[j]);
            }
            first[i] = f;
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for &(j, v) in &rows[perm[i]] {
                let jj = inv[j];
                if jj <= i {
                    data[start[i] + jj - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let li = &data[row_i + k0 - fi..row_i + j - fi];
                let lj = &data[start[j] + k0 - fj..start[j] + j - fj];
                let dot: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
                let diag = data[start[j + 1] - 1];
                data[row_i + j - fi] = (data[row_i + j - fi] - dot) / diag;
            }
            let row = &data[row_i..row_i + i - fi];
            let sq: f64 = row.iter().map(|x| x * x).sum();
            let d = data[start[i + 1] - 1] - sq;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Factorization {
                    pivot: perm[i],
                    value: d,
                });
            }
            data[start[i + 1] - 1] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            n,
            perm,
            inv,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` (envelope size).
    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1] - 1]
    }

    #[inline]
    fn diag(&self, i: usize) -> f64 {
        self.data[self.start[i + 1] - 1]
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.forward_in_place(&mut y, 0);
        self.backward_in_place(&mut y);
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// `y = L⁻¹ P b` for a sparse right-hand side given as `(original index, value)`.
    /// Returns the first permuted index where `y` can be nonzero, and `y` itself.
    pub fn forward_sparse(&self, b: &[(usize, f64)]) -> (usize, Vec<f64>) {
        let mut y = vec![0.0; self.n];
        let mut lead = self.n;
        for &(i, v) in b {
            let p = self.inv[i];
            y[p] += v;
            lead = lead.min(p);
        }
        if lead < self.n {
            self.forward_in_place(&mut y, lead);
        }
        (lead.min(self.n), y)
    }

    fn forward_in_place(&self, y: &mut [f64], lead: usize) {
        for i in lead..self.n {
            let fi = self.first[i];
            let k0 = fi.max(lead);
            let row = self.row(i);
            let dot: f64 = row[k0 - fi..]
                .iter()
                .zip(&y[k0..i])
                .map(|(l, x)| l * x)
                .sum();
            y[i] = (y[i] - dot) / self.diag(i);
        }
    }

    fn backward_in_place(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            let fi = self.first[i];
            for (k, l) in self.row(i).iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
    }
}

/// Reverse Cuthill-McKee ordering, component by component, starting each
/// component from a pseudo-peripheral vertex. Returns `perm[new] = old`.
pub fn reverse_cuthill_mckee(rows: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = rows.len();
    let adj: Vec<Vec<usize>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|e| e.0).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if placed[seed] {
            continue;
        }
        let root = pseudo_peripheral(&adj, &degree, seed);
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last_level = vec![root];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if dist[w] > depth {
                    depth = dist[w];
                    last_level.clear();
                }
                if dist[w] == depth {
                    last_level.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    (depth, last_level)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut root = seed;
    let (mut depth, mut last) = bfs_levels(adj, root);
    loop {
        let candidate = *last
            .iter()
            .min_by_key(|&&w| (degree[w], w))
            .expect("non-empty level");
        let (d, l) = bfs_levels(adj, candidate);
        if d <= depth {
            return root;
        }
        root = candidate;
        depth = d;
        last = l;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d(n: usize, shift: f64) -> SparseSymmetricMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseSymmetricMatrix::from_triplets(n, t)
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(50, 0.0);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let chol = EnvelopeCholesky::factor(&a).unwrap();
        let x = chol.solve(&b);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_dense_solve_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0));
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                if j != i {
                    t.push((i, j, rng.random_range(-1.0..1.0)));
                }
            }
        }
        let a = SparseSymmetricMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
        let dense = a.to_dense();
        let xd = dense.cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b));
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_sparse_agrees_with_full_solve() {
        let a = laplacian_1d(30, 0.5);
        let chol = EnvelopeCholesky::factor(&a).unwrap();
        let (lead, y) = chol.forward_sparse(&[(7, 1.0)]);
        assert!(y[..lead].iter().all(|&v| v == 0.0));
        // yᵀy = e7ᵀ A⁻¹ e7
        let mut e = vec![0.0; 30];
        e[7] = 1.0;
        let x = chol.solve(&e);
        let yy: f64 = y.iter().map(|v| v * v).sum();
        assert!((yy - x[7]).abs() < 1e-13);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseSymmetricMatrix::from_triplets(2, [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::Factorization { .. })
        ));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17, 0.0);
        let mut p = reverse_cuthill_mckee(&a.rows());
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
