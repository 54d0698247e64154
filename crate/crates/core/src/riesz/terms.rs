//! k-integrated kernels of the low-energy Riesz transform, term by term
//! through the resolvent decomposition `G₁ + G₂ + G₃ + G₄ + GS`.

use crate::error::Result;
use crate::geometry::ModelManifold;
use crate::linalg::fit::loglog_slope;
use crate::linalg::quadrature::{gauss_legendre, map_rule};
use crate::parametrix::bundle::{assemble_parametrix, error_term, gs_column, invert_error, ray_probes};
use crate::parametrix::{axial_vertex, envelope_slope, Setup};
use crate::spectral::{gradient, EdgeOperator};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::FRAC_2_PI;

#[derive(Debug, Clone, Serialize)]
pub struct TermConfig {
    pub k0: f64,
    /// Gauss–Legendre nodes on `(0, k₀]`.
    pub nodes: usize,
    pub d_lo: usize,
    /// Truncation radii of the near-diagonal piece.
    pub radii: Vec<f64>,
}

impl Default for TermConfig {
    fn default() -> Self {
        TermConfig {
            k0: 1.0,
            nodes: 4,
            d_lo: 2,
            radii: vec![2.0, 4.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct G1Split {
    pub end: usize,
    pub probe: usize,
    /// `Σ |(∇φ) R φ δ_y| μ`, the derivative on the cutoff.
    pub phi_hit_l1: f64,
    /// `Σ |φ ∇R φ δ_y| μ`.
    pub resolvent_hit_l1: f64,
    /// Largest junction distance reached by the cutoff piece.
    pub phi_hit_reach: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermReport {
    pub ks: Vec<f64>,
    pub weights: Vec<f64>,
    pub g1_split: Vec<G1Split>,
    /// Largest junction distance of the k-integrated `∇G₂` column at the centre.
    pub g2_reach: f64,
    /// Per end: slope of `|∫∇G₃(·, z′) dk|` with `z′` in the compact region.
    pub g3_left: Vec<f64>,
    /// Per end `j`: slope in `d(z°ⱼ, z′)` of `|∫∇GS(z₀, z′) dk|` at the centre `z₀`.
    pub gs_right: Vec<f64>,
    pub g4_rank: usize,
    pub null_dim: usize,
    /// Per end: `(r, ‖χ_{D_r} ∫R dk δ_y‖₁)`.
    pub near_diag: Vec<Vec<(f64, f64)>>,
    /// Per end: log-log exponent of the truncated mass in `r`.
    pub near_diag_exponent: Vec<f64>,
}

fn fragment_column(setup: &Setup, i: usize, k: f64, y: usize) -> Vec<f64> {
    let nv = setup.n_vertices();
    let t = setup.embed[i].to_tensor[y];
    if t == u32::MAX {
        return vec![0.0; nv];
    }
    let col = setup.ends[i].apply_fn_delta(t as usize, |l| 1.0 / (l + k * k));
    setup.embed[i].gather(&col, nv)
}

fn l1(grad: &EdgeOperator, g: &[f64], mu: &[f64]) -> f64 {
    grad.modulus(g).iter().zip(mu).map(|(a, w)| a * w).sum()
}

fn accumulate(acc: &mut [f64], w: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += w * b;
    }
}

fn numerical_rank(cols: &[Vec<f64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let n = cols[0].len();
    let a = DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
    let sv = a.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

pub fn term_diagnostics(setup: &Setup, cfg: &TermConfig) -> Result<TermReport> {
    let m: &ModelManifold = setup.m;
    let nv = m.n_vertices();
    let grad = gradient(m);
    let ne = grad.n_edges();
    let rule: Vec<(f64, f64)> = map_rule(&gauss_legendre(cfg.nodes), 0.0, cfg.k0)
        .into_iter()
        .map(|(k, w)| (k, FRAC_2_PI * w))
        .collect();
    let centre = m.centre.unwrap_or(m.base_points[0]);
    let (probes, rays) = ray_probes(setup, cfg.d_lo);
    let r1 = setup.cfg.r1.ceil() as usize;
    let g1_probes: Vec<Option<usize>> = (0..m.n_ends()).map(|i| axial_vertex(m, i, r1 + 2)).collect();
    let g3_probes: Vec<Option<usize>> = (0..m.n_ends()).map(|i| axial_vertex(m, i, r1)).collect();
    let diag_probes: Vec<Option<usize>> = (0..m.n_ends())
        .map(|i| axial_vertex(m, i, m.ends[i].spec.r / 2))
        .collect();

    let mut phi_hit = vec![vec![0.0; ne]; m.n_ends()];
    let mut res_hit = vec![vec![0.0; ne]; m.n_ends()];
    let mut g2_int = vec![0.0; ne];
    let mut g3_int = vec![vec![0.0; ne]; m.n_ends()];
    let mut gs_int = vec![vec![0.0; ne]; probes.len()];
    let mut diag_int = vec![vec![0.0; nv]; m.n_ends()];
    let mut g4_cols = Vec::new();

    for (qi, &(k, w)) in rule.iter().enumerate() {
        let bundle = assemble_parametrix(setup, k, &probes)?;
        let e = error_term(setup, &bundle)?;
        let s = invert_error(&e, setup.cfg.tol_rank)?;
        for (p, acc) in gs_int.iter_mut().enumerate() {
            accumulate(acc, w, &grad.apply(&gs_column(setup, &bundle, &s, p)?));
        }
        for i in 0..m.n_ends() {
            if let Some(y) = g1_probes[i] {
                let phi = &setup.phi[i];
                let u: Vec<f64> = fragment_column(setup, i, k, y).iter().map(|x| phi[y] * x).collect();
                for ed in 0..ne {
                    let (t, h) = (grad.tail[ed] as usize, grad.head[ed] as usize);
                    let sw = grad.sqrt_w[ed];
                    phi_hit[i][ed] += w * sw * (phi[h] - phi[t]) * 0.5 * (u[h] + u[t]);
                    res_hit[i][ed] += w * sw * 0.5 * (phi[h] + phi[t]) * (u[h] - u[t]);
                }
            }
            if let Some(y) = g3_probes[i] {
                let parts = setup.g_parts(&bundle.energy, y)?;
                accumulate(&mut g3_int[i], w, &grad.apply(&parts.g3));
            }
            if let Some(y) = diag_probes[i] {
                accumulate(&mut diag_int[i], w, &fragment_column(setup, i, k, y));
            }
        }
        let parts = setup.g_parts(&bundle.energy, centre)?;
        accumulate(&mut g2_int, w, &grad.apply(&parts.g2));
        if qi == 0 {
            g4_cols = bundle.parts.iter().map(|p| p.g4.clone()).collect();
        }
    }

    let reach = |g: &[f64]| {
        let md = grad.modulus(g);
        (0..nv).filter(|&z| md[z] > 1e-14).map(|z| setup.jd[z]).fold(0.0, f64::max)
    };
    let g1_split = (0..m.n_ends())
        .filter_map(|i| {
            g1_probes[i].map(|probe| G1Split {
                end: i,
                probe,
                phi_hit_l1: l1(&grad, &phi_hit[i], &m.mu),
                resolvent_hit_l1: l1(&grad, &res_hit[i], &m.mu),
                phi_hit_reach: reach(&phi_hit[i]),
            })
        })
        .collect();
    let g3_left = (0..m.n_ends())
        .map(|j| {
            let hi = (m.ends[j].spec.r / 2) as f64;
            let md: Vec<f64> = (0..m.n_ends())
                .map(|i| grad.modulus(&g3_int[i]))
                .fold(vec![0.0; nv], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect());
            envelope_slope(m, j, &md, cfg.d_lo as f64, hi).slope
        })
        .collect();
    let gs_right = rays
        .iter()
        .map(|ray| {
            let ds: Vec<f64> = ray.iter().map(|r| r.0 as f64).collect();
            let vals: Vec<f64> = ray.iter().map(|r| grad.modulus(&gs_int[r.1])[centre]).collect();
            loglog_slope(&ds, &vals).slope
        })
        .collect();
    let mut near_diag = Vec::new();
    let mut near_diag_exponent = Vec::new();
    for i in 0..m.n_ends() {
        let Some(y) = diag_probes[i] else {
            near_diag.push(Vec::new());
            near_diag_exponent.push(f64::NAN);
            continue;
        };
        let col = &diag_int[i];
        let rows: Vec<(f64, f64)> = cfg
            .radii
            .iter()
            .map(|&r| {
                let mass = (0..nv)
                    .filter(|&z| m.embedded_distance(z, y).is_some_and(|d| d <= r))
                    .map(|z| col[z].abs() * m.mu[z])
                    .sum();
                (r, mass)
            })
            .collect();
        let (rs, ms): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
        near_diag_exponent.push(loglog_slope(&rs, &ms).slope);
        near_diag.push(rows);
    }
    Ok(TermReport {
        ks: rule.iter().map(|r| r.0).collect(),
        weights: rule.iter().map(|r| r.1).collect(),
        g1_split,
        g2_reach: reach(&g2_int),
        g3_left,
        gs_right,
        g4_rank: numerical_rank(&g4_cols),
        null_dim: setup.correction.omega.len(),
        near_diag,
        near_diag_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::geometry::{build_model, EndSpec};
    use crate::parametrix::ParametrixConfig;

    #[test]
    fn term_report_on_a_small_model() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(3, &[], 8)]).unwrap();
        let setup = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let cfg = TermConfig {
            nodes: 2,
            ..TermConfig::default()
        };
        let rep = term_diagnostics(&setup, &cfg).unwrap();
        assert!(rep.g4_rank <= rep.null_dim);
        // the cutoff piece lives on the collar
        for s in &rep.g1_split {
            assert!(s.phi_hit_reach <= setup.cfg.r1 + 4.0, "{s:?}");
            assert!(s.phi_hit_l1 > 0.0 && s.resolvent_hit_l1 > 0.0);
        }
        assert!(rep.g2_reach <= setup.cfg.cap_radius + 1.0);
        assert!(rep.g3_left.iter().all(|s| *s < 0.0), "{:?}", rep.g3_left);
        assert!(rep.near_diag_exponent.iter().all(|e| e.is_finite() && *e > 0.0));
    }
}
