//! Column-sampling estimates of `‖G(√Δ/a)‖_{1→1}` and `‖(1+Δ)^{-k}‖_{2→∞}`.

use super::SparseOperator;
use crate::error::Result;
use crate::exec::Exec;
use crate::geometry::ModelManifold;
use crate::linalg::chebyshev::ChebyshevSeries;
use crate::linalg::krylov::cg;
use serde::Serialize;

/// Sample vertices covering the junction and every end: the junction centre
/// (or first junction vertex), each base point, and axial points at
/// `x₁ = R/2` and `x₁ = R-2` on every end.
pub fn sample_vertices(m: &ModelManifold) -> Vec<usize> {
    let mut out = Vec::new();
    if let Some(c) = m.centre.or_else(|| m.junction().first().copied()) {
        out.push(c);
    }
    for (e, grid) in m.ends.iter().enumerate() {
        out.push(m.base_points[e]);
        let r = grid.spec.r as i32;
        for x in [r / 2, r - 2] {
            let mut c = vec![0; grid.dims()];
            c[0] = x;
            if let Some(v) = m.vertex(e, &c) {
                out.push(v);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnNormReport {
    pub samples: Vec<usize>,
    pub column_norms: Vec<f64>,
    pub max: f64,
    pub approx_degree: usize,
}

fn report(samples: &[usize], column_norms: Vec<f64>, approx_degree: usize) -> ColumnNormReport {
    let max = column_norms.iter().cloned().fold(0.0, f64::max);
    ColumnNormReport {
        samples: samples.to_vec(),
        column_norms,
        max,
        approx_degree,
    }
}

/// `max_y ‖f(Δ) δ_y‖_{L¹(μ)}` with `f` expanded in Chebyshev polynomials on
/// the Lanczos interval.
pub fn multiplier_l1_columns<F: Fn(f64) -> f64>(
    op: &SparseOperator,
    f: F,
    samples: &[usize],
    exec: Exec,
) -> Result<ColumnNormReport> {
    let iv = op.interval()?;
    let series = ChebyshevSeries::fit(f, iv.lo, iv.hi, 1e-10)?;
    let norms = exec.map_slice(samples, |&y| {
        let col = series.apply(op, &op.delta(y));
        col.iter().zip(&op.mu).map(|(c, m)| c.abs() * m).sum::<f64>()
    });
    Ok(report(samples, norms, series.degree()))
}

/// `‖G(√Δ/a)‖_{1→1}` for `G(λ) = π/2 - arctan λ`.
pub fn multiplier_l1_norm_test(op: &SparseOperator, a: f64, samples: &[usize], exec: Exec) -> Result<ColumnNormReport> {
    if !(a > 0.0) {
        return Err(crate::LabError::Domain(format!("a must be positive, got {a}")));
    }
    multiplier_l1_columns(
        op,
        |x| std::f64::consts::FRAC_PI_2 - (x.max(0.0).sqrt() / a).atan(),
        samples,
        exec,
    )
}

/// `max_y ‖(1+Δ)^{-k} δ_y‖₂ √μ(y)` with `k = ⌊N/4⌋ + 1` unless overridden.
pub fn sobolev_embedding_test(
    op: &SparseOperator,
    big_n: usize,
    k_override: Option<usize>,
    samples: &[usize],
    exec: Exec,
) -> Result<ColumnNormReport> {
    let k = k_override.unwrap_or(big_n / 4 + 1);
    let cols: Vec<Result<f64>> = exec.map_slice(samples, |&y| {
        let mut v = op.delta(y);
        for _ in 0..k {
            v = cg(op, 1.0, &v, None, 1e-13, 10_000)?.x;
        }
        let p = op.pos(y).map(|p| op.mu[p]).unwrap_or(1.0);
        Ok(op.inner(&v, &v).sqrt() * p.sqrt())
    });
    let norms = cols.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(samples, norms, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, EndSpec};
    use crate::spectral::{laplacian, Boundary};

    #[test]
    fn trivial_multipliers() {
        let m = build_model(&[EndSpec::new(3, &[], 5), EndSpec::new(3, &[2], 5)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let ys = sample_vertices(&m);
        let zero = multiplier_l1_columns(&op, |_| 0.0, &ys, Exec::Sequential).unwrap();
        assert_eq!(zero.max, 0.0);
        let id = multiplier_l1_columns(&op, |_| 1.0, &ys, Exec::Sequential).unwrap();
        assert!((id.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_decreases_in_k() {
        let m = build_model(&[EndSpec::new(3, &[], 5), EndSpec::new(4, &[], 5)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let ys = sample_vertices(&m);
        let mut last = f64::INFINITY;
        for k in 0..4 {
            let r = sobolev_embedding_test(&op, 4, Some(k), &ys, Exec::Sequential).unwrap();
            assert!(r.max <= last + 1e-12);
            last = r.max;
        }
    }
}
