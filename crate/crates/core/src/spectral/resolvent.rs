//! Shifted resolvent solves `(Δ + k²) u = f` by conjugate gradients.

use super::{Boundary, SparseOperator};
use crate::error::{LabError, Result};
use crate::geometry::VertexFunction;
use crate::linalg::krylov::cg;

pub const CG_MAX_ITER: usize = 20_000;

pub fn resolvent_solve(op: &SparseOperator, k: f64, f: &VertexFunction, tol: f64) -> Result<VertexFunction> {
    let x = op.restrict(&f.values);
    let u = resolvent_active(op, k, &x, None, tol)?;
    Ok(VertexFunction {
        values: op.extend(&u),
        end: f.end,
        dirichlet: op.boundary == Boundary::Dirichlet,
    })
}

/// Solve on the active index space with an optional warm start.
pub fn resolvent_active(
    op: &SparseOperator,
    k: f64,
    f: &[f64],
    warm: Option<&[f64]>,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(k >= 0.0) {
        return Err(LabError::Domain(format!("k must be >= 0, got {k}")));
    }
    if k == 0.0 && op.boundary == Boundary::Free {
        return Err(LabError::Domain("k = 0 needs the Dirichlet Laplacian".into()));
    }
    Ok(cg(op, k * k, f, warm, tol, CG_MAX_ITER)?.x)
}

/// Solves for a sequence of `k`, each warm-started from the previous answer.
pub fn resolvent_sweep(op: &SparseOperator, ks: &[f64], f: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(ks.len());
    for &k in ks {
        let u = resolvent_active(op, k, f, out.last().map(|v| v.as_slice()), tol)?;
        out.push(u);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, EndSpec};
    use crate::spectral::laplacian;

    #[test]
    fn large_shift_is_neumann_dominated() {
        let m = build_model(&[EndSpec::new(3, &[], 4), EndSpec::new(3, &[2], 4)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let lmax = op.matrix.gershgorin_max();
        let k = (10.0 * lmax).sqrt() * 10.0;
        let f: Vec<f64> = (0..op.dim()).map(|i| 1.0 + (i % 3) as f64).collect();
        let u = resolvent_active(&op, k, &f, None, 1e-12).unwrap();
        let err = u
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b / (k * k)).abs() / (b / (k * k)))
            .fold(0.0, f64::max);
        assert!(err < 1e-3);
    }

    #[test]
    fn sweep_is_monotone_in_k() {
        let m = build_model(&[EndSpec::new(3, &[], 4), EndSpec::new(3, &[], 5)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let y = m.base_points[0];
        let us = resolvent_sweep(&op, &[0.6, 0.3, 0.1, 0.0], &op.delta(y), 1e-11).unwrap();
        for w in us.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                assert!(*a >= -1e-12 && a <= &(b + 1e-12));
            }
        }
    }
}
