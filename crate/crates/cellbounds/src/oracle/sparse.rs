//! Minimal sparse kernel for the oracle: CSR matrices, reverse Cuthill-McKee
//! ordering, and an envelope Cholesky factorization. Problem sizes stay at
//! desk scale (tens of thousands of unknowns), where the envelope approach
//! is entirely adequate.

use crate::error::{Error, Result};

/// Compressed sparse row matrix (symmetric matrices store both triangles).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Build from triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets.iter() {
            if col.len() > row_ptr[r] && *col.last().unwrap() == c && row_ptr[r + 1] == col.len()
            {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] = col.len();
            }
        }
        // rows with no entries inherit the previous offset
        for r in 0..n {
            if row_ptr[r + 1] < row_ptr[r] {
                row_ptr[r + 1] = row_ptr[r];
            }
        }
        let mut max = 0;
        for r in 0..=n {
            max = max.max(row_ptr[r]);
            row_ptr[r] = max;
        }
        Csr {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[r] = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.val[k] * x[self.col[k]];
            }
            acc += x[r] * row;
        }
        acc
    }

    /// y = alpha * self + beta * other, merging patterns.
    pub fn add_scaled(&self, alpha: f64, other: &Csr, beta: f64) -> Csr {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.val.len() + other.val.len());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((r, self.col[k], alpha * self.val[k]));
            }
            for k in other.row_ptr[r]..other.row_ptr[r + 1] {
                triplets.push((r, other.col[k], beta * other.val[k]));
            }
        }
        Csr::from_triplets(self.n, &mut triplets)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[r] += self.val[k];
            }
        }
        out
    }
}

/// Reverse Cuthill-McKee ordering of the matrix graph; returns `perm` with
/// `perm[new] = old`.
pub fn rcm_order(a: &Csr) -> Vec<usize> {
    let n = a.n;
    let degree = |v: usize| a.row_ptr[v + 1] - a.row_ptr[v];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // BFS layers from a pseudo-peripheral vertex of each component
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| degree(v));
    for &s0 in &starts {
        if visited[s0] {
            continue;
        }
        let start = pseudo_peripheral(a, s0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = (a.row_ptr[v]..a.row_ptr[v + 1])
                .map(|k| a.col[k])
                .filter(|&u| !visited[u])
                .collect();
            nbrs.sort_by_key(|&u| degree(u));
            for u in nbrs {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(a: &Csr, start: usize) -> usize {
    let mut v = start;
    let mut last_ecc = 0usize;
    for _ in 0..8 {
        let (far, ecc) = bfs_farthest(a, v);
        if ecc <= last_ecc {
            break;
        }
        last_ecc = ecc;
        v = far;
    }
    v
}

fn bfs_farthest(a: &Csr, start: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; a.n];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut far = start;
    while let Some(v) = queue.pop_front() {
        for k in a.row_ptr[v]..a.row_ptr[v + 1] {
            let u = a.col[k];
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                if dist[u] > dist[far] {
                    far = u;
                }
                queue.push_back(u);
            }
        }
    }
    (far, dist[far])
}

/// Envelope Cholesky factorization of a symmetric positive definite matrix,
/// with RCM preordering.
pub struct SpdSolver {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    low: Vec<f64>,
    diag: Vec<f64>,
}

impl SpdSolver {
    pub fn new(a: &Csr) -> Result<SpdSolver> {
        let n = a.n;
        let perm = rcm_order(a);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        // envelope of the permuted matrix
        let mut first = vec![0usize; n];
        for i in 0..n {
            let old = perm[i];
            let mut lo = i;
            for k in a.row_ptr[old]..a.row_ptr[old + 1] {
                lo = lo.min(inv_perm[a.col[k]]);
            }
            first[i] = lo;
        }
        let mut row_start = vec![0usize; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + (i - first[i]);
        }
        let mut low = vec![0.0f64; row_start[n]];
        let mut diag = vec![0.0f64; n];
        // scatter permuted A into the envelope
        for i in 0..n {
            let old = perm[i];
            for k in a.row_ptr[old]..a.row_ptr[old + 1] {
                let j = inv_perm[a.col[k]];
                use std::cmp::Ordering;
                match j.cmp(&i) {
                    Ordering::Equal => diag[i] += a.val[k],
                    Ordering::Less => low[row_start[i] + (j - first[i])] += a.val[k],
                    Ordering::Greater => {}
                }
            }
        }
        // in-place LL^T within the envelope
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut sum = low[row_start[i] + (j - fi)];
                for k in lo..j {
                    sum -= low[row_start[i] + (k - fi)] * low[row_start[j] + (k - fj)];
                }
                low[row_start[i] + (j - fi)] = sum / diag[j];
            }
            let mut s = diag[i];
            for k in fi..i {
                let l = low[row_start[i] + (k - fi)];
                s -= l * l;
            }
            if s <= 0.0 {
                return Err(Error::SolverNoConvergence(format!(
                    "matrix is not positive definite at pivot {i} (value {s:.3e})"
                )));
            }
            diag[i] = s.sqrt();
        }
        Ok(SpdSolver {
            n,
            perm,
            first,
            row_start,
            low,
            diag,
        })
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // forward: L y' = y
        for i in 0..n {
            let fi = self.first[i];
            let base = self.row_start[i];
            let mut acc = y[i];
            for k in fi..i {
                acc -= self.low[base + (k - fi)] * y[k];
            }
            y[i] = acc / self.diag[i];
        }
        // backward: L^T x = y'
        for i in (0..n).rev() {
            let fi = self.first[i];
            let base = self.row_start[i];
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            for k in fi..i {
                y[k] -= self.low[base + (k - fi)] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}
