//! Heat semigroup action through a Chebyshev expansion of `e^{-tx}`.

use super::SparseOperator;
use crate::error::{LabError, Result};
use crate::geometry::VertexFunction;
use crate::linalg::chebyshev::ChebyshevSeries;

/// `e^{-tΔ} f` for a full-length vertex function; values outside the active
/// set are dropped (Dirichlet) before the action.
pub fn heat_apply(op: &SparseOperator, t: f64, f: &VertexFunction) -> Result<VertexFunction> {
    if !(t >= 0.0) {
        return Err(LabError::Domain(format!("heat time must be >= 0, got {t}")));
    }
    let x = op.restrict(&f.values);
    let y = heat_active(op, t, &x)?;
    Ok(VertexFunction {
        values: op.extend(&y),
        end: f.end,
        dirichlet: op.boundary == super::Boundary::Dirichlet,
    })
}

/// Same on the active index space.
pub fn heat_active(op: &SparseOperator, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    // Fitting above the Lanczos floor makes the error relative to e^{-tλ_min}.
    let lo = match op.boundary {
        super::Boundary::Dirichlet => op.interval()?.lo.max(0.0),
        super::Boundary::Free => 0.0,
    };
    let hi = op.matrix.gershgorin_max();
    let series = ChebyshevSeries::fit(|s| (-t * s).exp(), lo, hi, 1e-12)?;
    Ok(series.apply(op, x))
}

/// On-diagonal heat kernel `p_t(v, v) = (e^{-tΔ} δ_v)(v)` with `δ_v` of unit mass.
pub fn heat_diagonal(op: &SparseOperator, t: f64, v: usize) -> Result<f64> {
    let p = op
        .pos(v)
        .ok_or_else(|| LabError::Domain(format!("vertex {v} is not active")))?;
    Ok(heat_active(op, t, &op.delta(v))?[p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_end, EndSpec};
    use crate::spectral::{laplacian, Boundary};

    #[test]
    fn matches_dense_exponential() {
        let m = build_end(&EndSpec::new(3, &[2], 4)).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let dense = op.matrix.to_dense();
        let eig = dense.clone().symmetric_eigen();
        let f: Vec<f64> = (0..op.dim()).map(|i| ((i * 7) % 5) as f64 + 0.5).collect();
        let fv = nalgebra::DVector::from_vec(f.clone());
        for t in [0.3, 2.0, 11.0, 60.0] {
            let d = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-t * l).exp()));
            let want = &eig.eigenvectors * d * eig.eigenvectors.transpose() * &fv;
            let got = heat_active(&op, t, &f).unwrap();
            let err = (nalgebra::DVector::from_vec(got) - &want).norm() / want.norm();
            assert!(err < 1e-8, "t={t}: {err}");
        }
    }
}
