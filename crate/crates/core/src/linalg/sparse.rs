//! Compressed sparse row storage and the operator trait used by the Krylov
//! and Chebyshev kernels.

use crate::exec::{Exec, ROW_CHUNK};

/// Anything that can be applied to a vector.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y <- A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    exec: Exec,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed and
    /// columns sorted within each row.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0u32; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(r, c, v) in triplets {
            let p = fill[r];
            cols[p] = c as u32;
            vals[p] = v;
            fill[r] += 1;
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            row.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for &(c, v) in &row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
            exec: Exec::default(),
        }
    }

    pub fn from_raw(n: usize, indptr: Vec<usize>, indices: Vec<u32>, values: Vec<f64>) -> Self {
        assert_eq!(indptr.len(), n + 1);
        assert_eq!(indices.len(), values.len());
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn gershgorin_max(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| (self.get(j as usize, i) - v).abs() <= tol * v.abs().max(1.0))
        })
    }

    /// `y <- A x` with the crate's execution policy.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_with(self.exec, x, y)
    }

    pub fn matvec_with(&self, exec: Exec, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        exec.fill_chunks(y, ROW_CHUNK, |off, block| {
            for (j, out) in block.iter_mut().enumerate() {
                let i = off + j;
                let (a, b) = (self.indptr[i], self.indptr[i + 1]);
                let mut s = 0.0;
                for p in a..b {
                    s += self.values[p] * x[self.indices[p] as usize];
                }
                *out = s;
            }
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Dense copy (small instances only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j as usize)] = v;
            }
        }
        m
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

/// `A + shift * I` without materialising it.
pub struct Shifted<'a, A: LinearOperator> {
    pub op: &'a A,
    pub shift: f64,
}

impl<A: LinearOperator> LinearOperator for Shifted<'_, A> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        if self.shift != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += self.shift * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 0.5), (2, 1, -1.0)]);
        assert_eq!(m.row(0).0, &[0, 2]);
        assert_eq!(m.get(0, 2), 1.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn matvec_policies_agree_bitwise() {
        let n = 20_000;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let m = CsrMatrix::from_triplets(n, &t);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        m.matvec_with(Exec::Parallel, &x, &mut a);
        m.matvec_with(Exec::Sequential, &x, &mut b);
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert!(m.is_symmetric(0.0));
        assert!(m.gershgorin_max() <= 4.0);
    }
}
