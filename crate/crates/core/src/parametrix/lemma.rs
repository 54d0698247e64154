//! Solutions of `(Δ + k²) u = v` for compactly supported `v`, and the
//! harmonic profiles `Φᵢ = φᵢ + uᵢ(·, 0)`.

use super::{collar_source, envelope_slope, ParametrixConfig};
use crate::error::{LabError, Result};
use crate::geometry::{cutoff_phi, ModelManifold, VertexFunction};
use crate::linalg::fit::LineFit;
use crate::spectral::resolvent::resolvent_active;
use crate::spectral::{gradient, laplacian, Boundary, SparseOperator};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct LemmaUvSolution {
    /// `v` on the active space.
    pub v: Vec<f64>,
    pub ks: Vec<f64>,
    /// `u(·, k)` as full-length vectors, one per entry of `ks`.
    pub u: Vec<Vec<f64>>,
    /// Pointwise gradient modulus `|∇u(·, k)|`.
    pub grad: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// Dirichlet solves for every `k` (largest first, each warm-starting the next).
pub fn solve_lemma_uv(m: &ModelManifold, op: &SparseOperator, v: &[f64], ks: &[f64], tol: f64) -> Result<LemmaUvSolution> {
    if v.len() != op.dim() {
        return Err(LabError::Domain("v must live on the active space".into()));
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by(|&a, &b| ks[b].total_cmp(&ks[a]));
    let mut sol: Vec<Vec<f64>> = vec![Vec::new(); ks.len()];
    let mut prev: Option<Vec<f64>> = None;
    for &j in &order {
        let u = resolvent_active(op, ks[j], v, prev.as_deref(), tol)?;
        prev = Some(u.clone());
        sol[j] = u;
    }
    let grad_op = gradient(m);
    let mut residuals = Vec::with_capacity(ks.len());
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for (j, u) in sol.iter().enumerate() {
        let mut r = op.matrix.matvec(u);
        for ((ri, ui), vi) in r.iter_mut().zip(u).zip(v) {
            *ri += ks[j] * ks[j] * ui - vi;
        }
        residuals.push(r.iter().map(|x| x * x).sum::<f64>().sqrt() / vn);
    }
    let u: Vec<Vec<f64>> = sol.iter().map(|s| op.extend(s)).collect();
    let grad = u.iter().map(|f| grad_op.modulus(&grad_op.apply(f))).collect();
    Ok(LemmaUvSolution {
        v: v.to_vec(),
        ks: ks.to_vec(),
        u,
        grad,
        residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UvDecay {
    pub end: usize,
    pub u_slope: f64,
    pub grad_slope: f64,
    pub u_r2: f64,
    pub grad_r2: f64,
}

impl LemmaUvSolution {
    /// Fitted decay of `|u(·, k_j)|` and `|∇u(·, k_j)|` on `end` over `[d_lo, d_hi]`.
    pub fn decay(&self, m: &ModelManifold, j: usize, end: usize, d_lo: f64, d_hi: f64) -> UvDecay {
        let a: LineFit = envelope_slope(m, end, &self.u[j], d_lo, d_hi);
        let b: LineFit = envelope_slope(m, end, &self.grad[j], d_lo, d_hi);
        UvDecay {
            end,
            u_slope: a.slope,
            grad_slope: b.slope,
            u_r2: a.r2,
            grad_r2: b.r2,
        }
    }

    /// `‖u(·,k) - u(·,0)‖_∞ / k` and the gradient analogue for every `k > 0`;
    /// needs `k = 0` in the grid.
    pub fn lipschitz_ratios(&self) -> Result<Vec<(f64, f64, f64)>> {
        let z = self
            .ks
            .iter()
            .position(|&k| k == 0.0)
            .ok_or_else(|| LabError::Domain("k-grid lacks 0".into()))?;
        Ok(self
            .ks
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0.0)
            .map(|(j, &k)| {
                let du = self.u[j].iter().zip(&self.u[z]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let dg = self.grad[j]
                    .iter()
                    .zip(&self.grad[z])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                (k, du / k, dg / k)
            })
            .collect())
    }
}

/// `Φᵢ = φᵢ + uᵢ(·, 0)`: harmonic on the interior, 1 on the ring of end i and
/// 0 on the other rings.
pub fn harmonic_profile(m: &ModelManifold, i: usize, cfg: &ParametrixConfig) -> Result<VertexFunction> {
    let op = laplacian(m, Boundary::Dirichlet);
    let phi = cutoff_phi(m, i, cfg.r0, cfg.r1)?.values;
    let v = collar_source(m, &op, &phi);
    let u = op.extend(&resolvent_active(&op, 0.0, &v, None, cfg.cg_tol)?);
    Ok(VertexFunction {
        values: phi.iter().zip(&u).map(|(a, b)| a + b).collect(),
        end: Some(i),
        dirichlet: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_end, build_model, EndSpec, Tag};

    fn swap(m: &ModelManifold, v: usize) -> usize {
        match m.tags[v] {
            Tag::End(e) => m.end_maps[1 - e][m.local[v] as usize] as usize,
            Tag::Junction => {
                if let Some(h) = m.hubs.iter().position(|&h| h == v) {
                    m.hubs[1 - h]
                } else {
                    v
                }
            }
        }
    }

    #[test]
    fn profiles_partition_unity_and_are_symmetric() {
        let m = build_model(&[EndSpec::new(3, &[], 7), EndSpec::new(3, &[], 7)]).unwrap();
        let cfg = ParametrixConfig::default();
        let p1 = harmonic_profile(&m, 0, &cfg).unwrap().values;
        let p2 = harmonic_profile(&m, 1, &cfg).unwrap().values;
        for z in 0..m.n_vertices() {
            assert!((p1[z] + p2[z] - 1.0).abs() < 1e-8);
            assert!(p1[z] > -1e-9 && p1[z] < 1.0 + 1e-9);
            assert!((p1[z] - p2[swap(&m, z)]).abs() < 1e-8);
        }
        assert!((p1[m.centre.unwrap()] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn difference_source_gives_antisymmetric_u() {
        let m = build_model(&[EndSpec::new(3, &[], 7), EndSpec::new(3, &[], 7)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let cfg = ParametrixConfig::default();
        let d: Vec<f64> = {
            let a = cutoff_phi(&m, 0, cfg.r0, cfg.r1).unwrap().values;
            let b = cutoff_phi(&m, 1, cfg.r0, cfg.r1).unwrap().values;
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        };
        let v = collar_source(&m, &op, &d);
        let s = solve_lemma_uv(&m, &op, &v, &[0.0, 0.1], 1e-12).unwrap();
        let u = &s.u[0];
        for z in 0..m.n_vertices() {
            assert!((u[z] + u[swap(&m, z)]).abs() < 1e-8);
        }
        assert!(s.residuals.iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn fragment_collar_profile_is_constant() {
        // one end only: the profile is identically 1
        let m = build_end(&EndSpec::new(3, &[], 7)).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let phi = cutoff_phi(&m, 0, 1.0, 3.0).unwrap().values;
        let v = collar_source(&m, &op, &phi);
        let u = op.extend(&resolvent_active(&op, 0.0, &v, None, 1e-12).unwrap());
        for z in 0..m.n_vertices() {
            let base = if m.boundary[z] { phi[z] } else { phi[z] + u[z] };
            assert!((base - 1.0).abs() < 1e-8, "{z}: {base}");
        }
    }
}
