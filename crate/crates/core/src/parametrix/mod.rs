//! Low-energy resolvent parametrix: cutoffs and harmonic profiles, the
//! four-part approximation `G(k)`, its error `E(k)`, the finite-rank
//! correction and the inversion `S(k) = (I + E(k))^{-1} - I`.

pub mod bundle;
pub mod interior;
pub mod lemma;

pub use bundle::{
    assemble_parametrix, choose_k0, choose_k0_by, error_term, finite_rank_correction, invert_error,
    verify_resolvent_decomposition, DecompositionReport, ErrorMatrix, ParametrixBundle, SMatrix,
};
pub use interior::{interior_parametrix, Cap};
pub use lemma::{harmonic_profile, solve_lemma_uv, LemmaUvSolution};

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::{cutoff_phi, ModelManifold, Tag};
use crate::linalg::fit::{loglog_slope, LineFit};
use crate::spectral::resolvent::resolvent_active;
use crate::spectral::separable::{EndEmbedding, SeparableEnd};
use crate::spectral::{laplacian, Boundary, SparseOperator};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametrixConfig {
    /// Collar of the cutoffs in `d(z°ᵢ, ·)`.
    pub r0: f64,
    pub r1: f64,
    /// `G_int` is the Dirichlet resolvent of `{d_J ≤ cap_radius}`.
    pub cap_radius: f64,
    pub cg_tol: f64,
    pub tol_rank: f64,
}

impl Default for ParametrixConfig {
    fn default() -> Self {
        ParametrixConfig {
            r0: 1.0,
            r1: 3.0,
            cap_radius: 4.0,
            cg_tol: 1e-11,
            tol_rank: 1e-6,
        }
    }
}

/// `v_i = -Δ φ_i` on the interior (active) index space of `op`.
pub fn collar_source(m: &ModelManifold, op: &SparseOperator, phi: &[f64]) -> Vec<f64> {
    let free = laplacian(m, Boundary::Free);
    let lphi = free.matrix.matvec(phi);
    op.active.iter().map(|&v| -lphi[v]).collect()
}

/// Finite-rank term `G₄ = Σ ρ_j ⟨ω_j, ·⟩` (full-length vectors).
#[derive(Debug, Clone, Default)]
pub struct Correction {
    pub omega: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
}

/// k-independent pieces of the construction on a fixed model.
pub struct Setup<'m> {
    pub m: &'m ModelManifold,
    pub cfg: ParametrixConfig,
    pub op: SparseOperator,
    pub phi: Vec<Vec<f64>>,
    /// `v_i` on the active space of `op`.
    pub v: Vec<Vec<f64>>,
    pub ends: Vec<SeparableEnd>,
    pub embed: Vec<EndEmbedding>,
    pub cap: Cap,
    /// Row support of `E`: interior vertices with `d_J ≤ cap_radius + 1`
    /// plus the shell.
    pub chi: Vec<usize>,
    pub chi_pos: Vec<u32>,
    pub jd: Vec<f64>,
    pub correction: Correction,
    pub exec: Exec,
}

/// Per-energy data: `uᵢ(·,k)` and `Rᵢ(z°ᵢ, ·)` as full-length vectors.
#[derive(Debug, Clone)]
pub struct Energy {
    pub k: f64,
    pub u: Vec<Vec<f64>>,
    pub base_row: Vec<Vec<f64>>,
}

impl<'m> Setup<'m> {
    pub fn new(m: &'m ModelManifold, cfg: ParametrixConfig, exec: Exec) -> Result<Self> {
        if m.mu.iter().any(|&w| w != 1.0) {
            return Err(LabError::Domain("the parametrix assumes the counting measure".into()));
        }
        if m.is_fragment() || m.junction().is_empty() {
            return Err(LabError::Domain("the parametrix needs a connected sum".into()));
        }
        let op = laplacian(m, Boundary::Dirichlet).with_exec(exec);
        let phi = (0..m.n_ends())
            .map(|i| cutoff_phi(m, i, cfg.r0, cfg.r1).map(|f| f.values))
            .collect::<Result<Vec<_>>>()?;
        let v = phi.iter().map(|p| collar_source(m, &op, p)).collect();
        let ends: Vec<SeparableEnd> = m.ends.iter().map(|g| SeparableEnd::new(&g.spec).with_exec(exec)).collect();
        let embed = ends.iter().enumerate().map(|(i, s)| EndEmbedding::new(m, s, i)).collect();
        let jd = m.junction_distance();
        let cap = Cap::new(&op, &jd, cfg.cap_radius)?;
        for (i, p) in phi.iter().enumerate() {
            if let Some(v) = (0..m.n_vertices()).find(|&v| p[v] < 1.0 && m.tags[v] == Tag::End(i) && cap.pos[v] == u32::MAX) {
                return Err(LabError::Geometry(format!(
                    "cap radius {} does not contain the collar of end {} (vertex {v})",
                    cfg.cap_radius,
                    i + 1
                )));
            }
        }
        // Shell vertices lost a core neighbour in the gluing, so they carry
        // error rows even when far from the hubs.
        let on_shell = |v: usize| match m.tags[v] {
            Tag::End(i) => {
                let g = &m.ends[i];
                g.l1(&g.coords(m.local[v] as usize)) == crate::geometry::SHELL_RADIUS
            }
            Tag::Junction => false,
        };
        let chi: Vec<usize> = op
            .active
            .iter()
            .copied()
            .filter(|&v| jd[v] <= cfg.cap_radius + 1.0 || on_shell(v))
            .collect();
        let mut chi_pos = vec![u32::MAX; m.n_vertices()];
        for (i, &v) in chi.iter().enumerate() {
            chi_pos[v] = i as u32;
        }
        Ok(Setup {
            m,
            cfg,
            op,
            phi,
            v,
            ends,
            embed,
            cap,
            chi,
            chi_pos,
            jd,
            correction: Correction::default(),
            exec,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.m.n_vertices()
    }

    pub fn energy(&self, k: f64) -> Result<Energy> {
        let mut u = Vec::with_capacity(self.v.len());
        let mut base_row = Vec::with_capacity(self.v.len());
        for (i, vi) in self.v.iter().enumerate() {
            let ui = resolvent_active(&self.op, k, vi, None, self.cfg.cg_tol)?;
            u.push(self.op.extend(&ui));
            let t = self.embed[i].to_tensor[self.m.base_points[i]] as usize;
            let col = self.ends[i].apply_fn_delta(t, |l| 1.0 / (l + k * k));
            base_row.push(self.embed[i].gather(&col, self.n_vertices()));
        }
        Ok(Energy { k, u, base_row })
    }

    /// `G(k) s` for a full-length `s` supported on the interior.
    pub fn apply_g(&self, e: &Energy, s: &[f64]) -> Result<Vec<f64>> {
        let nv = self.n_vertices();
        let mut out = vec![0.0; nv];
        for (i, p) in self.phi.iter().enumerate() {
            let a: Vec<f64> = p.iter().zip(s).map(|(x, y)| x * y).collect();
            if a.iter().all(|&x| x == 0.0) {
                continue;
            }
            let t = self.embed[i].scatter(&a, self.ends[i].len());
            let r = self.ends[i].resolvent(e.k, &t);
            let g = self.embed[i].gather(&r, nv);
            for ((o, x), w) in out.iter_mut().zip(&g).zip(p) {
                *o += w * x;
            }
            let c: f64 = a.iter().zip(&e.base_row[i]).map(|(x, y)| x * y).sum();
            for (o, x) in out.iter_mut().zip(&e.u[i]) {
                *o += c * x;
            }
        }
        let x = self.cap.solve(e.k, s, self.cfg.cg_tol)?;
        for (o, xi) in out.iter_mut().zip(&x) {
            *o += xi;
        }
        for p in &self.phi {
            let a: Vec<f64> = p.iter().zip(s).map(|(x, y)| x * y).collect();
            if self.cap.vertices.iter().all(|&v| a[v] == 0.0) {
                continue;
            }
            let x = self.cap.solve(e.k, &a, self.cfg.cg_tol)?;
            for ((o, xi), w) in out.iter_mut().zip(&x).zip(p) {
                *o -= w * xi;
            }
        }
        self.add_correction(s, &mut out);
        Ok(out)
    }

    fn add_correction(&self, s: &[f64], out: &mut [f64]) {
        for (om, rho) in self.correction.omega.iter().zip(&self.correction.rho) {
            let c: f64 = om.iter().zip(s).map(|(x, y)| x * y).sum();
            if c != 0.0 {
                crate::exec::axpy(c, rho, out);
            }
        }
    }

    /// Column `G(k) δ_y`.
    pub fn g_column(&self, e: &Energy, y: usize) -> Result<Vec<f64>> {
        self.g_parts(e, y).map(|p| p.total())
    }

    /// The four parts of `G(k) δ_y` separately.
    pub fn g_parts(&self, e: &Energy, y: usize) -> Result<GParts> {
        let nv = self.n_vertices();
        let mut g1 = vec![0.0; nv];
        let mut g3 = vec![0.0; nv];
        let mut g4 = vec![0.0; nv];
        if let Tag::End(i) = self.m.tags[y] {
            let py = self.phi[i][y];
            if py != 0.0 {
                let t = self.embed[i].to_tensor[y];
                if t != u32::MAX {
                    let col = self.ends[i].apply_fn_delta(t as usize, |l| 1.0 / (l + e.k * e.k));
                    let g = self.embed[i].gather(&col, nv);
                    for ((o, x), w) in g1.iter_mut().zip(&g).zip(&self.phi[i]) {
                        *o = py * w * x;
                    }
                }
                let c = py * e.base_row[i][y];
                for (o, x) in g3.iter_mut().zip(&e.u[i]) {
                    *o = c * x;
                }
            }
        }
        let mut g2 = vec![0.0; nv];
        if self.cap.pos[y] != u32::MAX {
            let mut d = vec![0.0; nv];
            d[y] = 1.0;
            let x = self.cap.solve(e.k, &d, self.cfg.cg_tol)?;
            for (z, o) in g2.iter_mut().enumerate() {
                if x[z] != 0.0 {
                    let overlap: f64 = self.phi.iter().map(|p| p[z] * p[y]).sum();
                    *o = x[z] * (1.0 - overlap);
                }
            }
        }
        let mut d = vec![0.0; nv];
        d[y] = 1.0;
        self.add_correction(&d, &mut g4);
        Ok(GParts { g1, g2, g3, g4 })
    }

    /// `((Δ+k²) w)` on the interior, zero on the ring, for full-length `w`.
    pub fn shifted_laplacian(&self, k: f64, w: &[f64]) -> Vec<f64> {
        let a = self.op.restrict(w);
        let mut y = self.op.matrix.matvec(&a);
        for (yi, ai) in y.iter_mut().zip(&a) {
            *yi += k * k * ai;
        }
        self.op.extend(&y)
    }

    /// Column `E(k) δ_y = (Δ+k²) G(k) δ_y - δ_y` (full length).
    pub fn error_column(&self, e: &Energy, y: usize) -> Result<Vec<f64>> {
        let g = self.g_column(e, y)?;
        let mut out = self.shifted_laplacian(e.k, &g);
        out[y] -= 1.0;
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct GParts {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub g3: Vec<f64>,
    pub g4: Vec<f64>,
}

impl GParts {
    pub fn total(&self) -> Vec<f64> {
        (0..self.g1.len())
            .map(|z| self.g1[z] + self.g2[z] + self.g3[z] + self.g4[z])
            .collect()
    }
}

/// `(d, max_{d(z°ᵢ,z)=d} |f(z)|)` over end `i` for integer `d ∈ [d_lo, d_hi]`.
pub fn shell_envelope(m: &ModelManifold, i: usize, f: &[f64], d_lo: f64, d_hi: f64) -> (Vec<f64>, Vec<f64>) {
    let lo = d_lo.round() as usize;
    let hi = d_hi.round() as usize;
    let mut env = vec![0.0f64; hi + 1];
    for z in 0..m.n_vertices() {
        if m.tags[z] != Tag::End(i) || m.boundary[z] {
            continue;
        }
        let d = m.dist[i][z];
        if d >= lo as f64 - 1e-9 && d <= hi as f64 + 1e-9 {
            let b = d.round() as usize;
            env[b] = env[b].max(f[z].abs());
        }
    }
    let ds: Vec<f64> = (lo..=hi).map(|d| d as f64).collect();
    (ds, env[lo..=hi].to_vec())
}

/// Log-log slope of the shell envelope of `f` on end `i` over `[d_lo, d_hi]`.
pub fn envelope_slope(m: &ModelManifold, i: usize, f: &[f64], d_lo: f64, d_hi: f64) -> LineFit {
    let (d, e) = shell_envelope(m, i, f, d_lo, d_hi);
    loglog_slope(&d, &e)
}

/// Vertex on the positive first axis of end `i` at `d(z°ᵢ, ·) = d`.
pub fn axial_vertex(m: &ModelManifold, i: usize, d: usize) -> Option<usize> {
    let grid = &m.ends[i];
    let mut c = vec![0i32; grid.dims()];
    c[0] = crate::geometry::SHELL_RADIUS + d as i32;
    m.vertex(i, &c).filter(|&v| !m.boundary[v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, EndSpec};
    use crate::spectral::resolvent::resolvent_active;

    #[test]
    fn parametrix_column_error_is_supported_near_junction() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(3, &[2], 7)]).unwrap();
        let s = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let e = s.energy(0.3).unwrap();
        for y in [m.centre.unwrap(), m.base_points[0], axial_vertex(&m, 1, 3).unwrap()] {
            let col = s.error_column(&e, y).unwrap();
            let inside = s.chi.iter().map(|&z| col[z].abs()).fold(0.0, f64::max);
            let outside = (0..m.n_vertices())
                .filter(|&z| s.chi_pos[z] == u32::MAX)
                .map(|z| col[z].abs())
                .fold(0.0, f64::max);
            assert!(outside < 1e-8 * inside.max(1e-3), "{y}: {outside} vs {inside}");
        }
    }

    #[test]
    fn apply_matches_columns() {
        let m = build_model(&[EndSpec::new(3, &[], 7), EndSpec::new(3, &[], 7)]).unwrap();
        let s = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let e = s.energy(0.2).unwrap();
        let y = axial_vertex(&m, 0, 2).unwrap();
        let mut d = vec![0.0; m.n_vertices()];
        d[y] = 1.0;
        let a = s.apply_g(&e, &d).unwrap();
        let b = s.g_column(&e, y).unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        // far columns reduce to the end resolvent plus the u-correction
        let _ = resolvent_active(&s.op, 0.2, &s.op.delta(y), None, 1e-10).unwrap();
    }
}
