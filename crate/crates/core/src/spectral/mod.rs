//! Discrete Laplacian and gradient, heat and resolvent actions, the spectral
//! multipliers F_< and F_>, wave splitting and the operator norm tests.

pub mod heat;
pub mod multiplier;
pub mod opnorm;
pub mod resolvent;
pub mod separable;
pub mod wave;

use crate::error::Result;
use crate::exec::Exec;
use crate::geometry::ModelManifold;
use crate::linalg::krylov::{spectral_interval, SpectralInterval};
use crate::linalg::{CsrMatrix, LinearOperator};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Free,
}

const NONE: u32 = u32::MAX;

/// Δ restricted to the active vertices (interior for Dirichlet, all for free).
/// Vectors handed to the solvers live on the active index space.
#[derive(Debug)]
pub struct SparseOperator {
    pub matrix: CsrMatrix,
    pub active: Vec<usize>,
    pub position: Vec<u32>,
    pub boundary: Boundary,
    pub symmetric: bool,
    pub mu: Vec<f64>,
    interval: OnceLock<SpectralInterval>,
}

impl Clone for SparseOperator {
    fn clone(&self) -> Self {
        let interval = OnceLock::new();
        if let Some(iv) = self.interval.get() {
            let _ = interval.set(*iv);
        }
        SparseOperator {
            matrix: self.matrix.clone(),
            active: self.active.clone(),
            position: self.position.clone(),
            boundary: self.boundary,
            symmetric: self.symmetric,
            mu: self.mu.clone(),
            interval,
        }
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec_into(x, y)
    }
}

/// `Δf(z) = μ(z)^{-1} Σ_w w(z,w) (f(z) - f(w))`; the Dirichlet variant keeps
/// only interior rows and columns (ring values are zero).
pub fn laplacian(m: &ModelManifold, boundary: Boundary) -> SparseOperator {
    let nv = m.n_vertices();
    let active: Vec<usize> = match boundary {
        Boundary::Free => (0..nv).collect(),
        Boundary::Dirichlet => m.interior(),
    };
    let mut position = vec![NONE; nv];
    for (i, &v) in active.iter().enumerate() {
        position[v] = i as u32;
    }
    let mut trip = Vec::with_capacity(m.adjacency.nnz() + active.len());
    for (i, &v) in active.iter().enumerate() {
        let (cols, w) = m.adjacency.row(v);
        let mut diag = 0.0;
        for (&c, &wt) in cols.iter().zip(w) {
            diag += wt;
            let p = position[c as usize];
            if p != NONE {
                trip.push((i, p as usize, -wt / m.mu[v]));
            }
        }
        trip.push((i, i, diag / m.mu[v]));
    }
    let matrix = CsrMatrix::from_triplets(active.len(), &trip);
    let mu: Vec<f64> = active.iter().map(|&v| m.mu[v]).collect();
    let symmetric = mu.iter().all(|&x| x == mu[0]);
    SparseOperator {
        matrix,
        active,
        position,
        boundary,
        symmetric,
        mu,
        interval: OnceLock::new(),
    }
}

impl SparseOperator {
    pub fn n_vertices(&self) -> usize {
        self.position.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.n()
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.matrix.set_exec(exec);
        self
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&v| full[v]).collect()
    }

    pub fn extend(&self, act: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices()];
        for (i, &v) in self.active.iter().enumerate() {
            out[v] = act[i];
        }
        out
    }

    pub fn pos(&self, v: usize) -> Option<usize> {
        let p = self.position[v];
        (p != NONE).then_some(p as usize)
    }

    /// Unit mass at vertex `v` as an active vector, `δ_v / μ(v)`.
    pub fn delta(&self, v: usize) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        if let Some(p) = self.pos(v) {
            d[p] = 1.0 / self.mu[p];
        }
        d
    }

    /// μ-weighted inner product of two active vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.mu).map(|((x, y), w)| x * y * w).sum()
    }

    /// Cached Lanczos interval (300 steps, Gershgorin-capped).
    pub fn interval(&self) -> Result<SpectralInterval> {
        if let Some(iv) = self.interval.get() {
            return Ok(*iv);
        }
        let iv = spectral_interval(self, 300, 0x5eed, self.matrix.gershgorin_max())?;
        let _ = self.interval.set(iv);
        Ok(iv)
    }

    /// Same operator with Δ replaced by `Δ + eps·P` for the diagonal
    /// perturbation `P = diag(1, 0, 1, 0, ...)`; used for fault injection.
    pub fn perturbed(&self, eps: f64) -> SparseOperator {
        let n = self.dim();
        let mut trip = Vec::with_capacity(self.matrix.nnz());
        for i in 0..n {
            let (c, v) = self.matrix.row(i);
            for (&j, &x) in c.iter().zip(v) {
                trip.push((i, j as usize, x));
            }
            if i % 2 == 0 {
                trip.push((i, i, eps));
            }
        }
        SparseOperator {
            matrix: CsrMatrix::from_triplets(n, &trip).with_exec(self.matrix.exec()),
            active: self.active.clone(),
            position: self.position.clone(),
            boundary: self.boundary,
            symmetric: self.symmetric,
            mu: self.mu.clone(),
            interval: OnceLock::new(),
        }
    }
}

/// Gradient as an oriented incidence operator with `√w` weights.
#[derive(Debug, Clone)]
pub struct EdgeOperator {
    pub tail: Vec<u32>,
    pub head: Vec<u32>,
    pub sqrt_w: Vec<f64>,
    pub n_vertices: usize,
    pub mu: Vec<f64>,
}

pub fn gradient(m: &ModelManifold) -> EdgeOperator {
    let mut tail = Vec::new();
    let mut head = Vec::new();
    let mut sqrt_w = Vec::new();
    for v in 0..m.n_vertices() {
        let (cols, w) = m.adjacency.row(v);
        for (&c, &wt) in cols.iter().zip(w) {
            if (c as usize) > v {
                tail.push(v as u32);
                head.push(c);
                sqrt_w.push(wt.sqrt());
            }
        }
    }
    EdgeOperator {
        tail,
        head,
        sqrt_w,
        n_vertices: m.n_vertices(),
        mu: m.mu.clone(),
    }
}

impl EdgeOperator {
    pub fn n_edges(&self) -> usize {
        self.tail.len()
    }

    /// `(∇f)(e) = (f(head) - f(tail)) √w(e)` for a full-length `f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n_edges())
            .map(|e| (f[self.head[e] as usize] - f[self.tail[e] as usize]) * self.sqrt_w[e])
            .collect()
    }

    /// Adjoint `∇*` against μ on vertices and counting measure on edges.
    pub fn adjoint(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for e in 0..self.n_edges() {
            let x = g[e] * self.sqrt_w[e];
            out[self.head[e] as usize] += x;
            out[self.tail[e] as usize] -= x;
        }
        for (o, m) in out.iter_mut().zip(&self.mu) {
            *o /= m;
        }
        out
    }

    /// Pointwise modulus `|∇f|(z) = (½ Σ_{e∋z} g_e² / μ(z))^{1/2}`, so that
    /// `Σ_z μ(z) |∇f|(z)² = ‖g‖²`.
    pub fn modulus(&self, g: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_vertices];
        for e in 0..self.n_edges() {
            let x = 0.5 * g[e] * g[e];
            s[self.head[e] as usize] += x;
            s[self.tail[e] as usize] += x;
        }
        s.iter().zip(&self.mu).map(|(v, m)| (v / m).sqrt()).collect()
    }

    /// `Σ_e g_e²`.
    pub fn norm2_sq(&self, g: &[f64]) -> f64 {
        g.iter().map(|x| x * x).sum()
    }
}

/// `L^p(μ)` norm of a full-length vertex function.
pub fn lp_norm(f: &[f64], mu: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    f.iter().zip(mu).map(|(x, w)| w * x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, EndSpec};

    #[test]
    fn free_laplacian_kills_constants() {
        let m = build_model(&[EndSpec::new(3, &[3], 4), EndSpec::new(3, &[], 4)]).unwrap();
        let l = laplacian(&m, Boundary::Free);
        let y = l.matrix.matvec(&vec![1.0; l.dim()]);
        assert!(y.iter().all(|v| v.abs() < 1e-14));
        assert!(l.matrix.is_symmetric(0.0));
    }

    #[test]
    fn gradient_adjoint_is_laplacian() {
        let m = build_model(&[EndSpec::new(3, &[], 4), EndSpec::new(4, &[], 4)]).unwrap();
        let l = laplacian(&m, Boundary::Free);
        let g = gradient(&m);
        let f: Vec<f64> = (0..m.n_vertices()).map(|i| ((i * 31) % 17) as f64 * 0.1).collect();
        let a = g.adjoint(&g.apply(&f));
        let b = l.matrix.matvec(&f);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}
