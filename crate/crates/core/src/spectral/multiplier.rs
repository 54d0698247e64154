//! Low/high energy multipliers `F_<`, `F_>` with `F_< + F_> = λ^{-1}`.

use super::SparseOperator;
use crate::error::{LabError, Result};
use crate::geometry::VertexFunction;
use crate::linalg::chebyshev::ChebyshevSeries;
use crate::linalg::krylov::shifted_sum;
use crate::linalg::quadrature::{gauss_legendre, map_rule};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_2_PI;

pub const DENSE_ORACLE_MAX: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Low,
    High,
    Full,
}

/// Gauss–Legendre panels on `[0, k_min] ∪ [k_min, 2k_min] ∪ … ∪ [·, k₀]`,
/// each split into `2^refine` equal pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub nodes: usize,
    pub refine: u32,
}

impl Default for PanelSpec {
    fn default() -> Self {
        PanelSpec { nodes: 20, refine: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub k0: f64,
    pub which: Which,
    pub panels: PanelSpec,
}

impl MultiplierSpec {
    pub fn new(k0: f64, which: Which) -> Self {
        MultiplierSpec {
            k0,
            which,
            panels: PanelSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return Err(LabError::InvalidSpec(format!("k0 must be positive, got {}", self.k0)));
        }
        if self.panels.nodes < 2 || self.panels.refine > 12 {
            return Err(LabError::InvalidSpec("bad panel description".into()));
        }
        Ok(())
    }
}

/// `F_<(λ) = (2/π) λ^{-1} arctan(k₀/λ)`.
pub fn f_less(lambda: f64, k0: f64) -> f64 {
    FRAC_2_PI * (k0 / lambda).atan() / lambda
}

/// `F_>(λ) = (2/π) λ^{-1} arctan(λ/k₀)`.
pub fn f_greater(lambda: f64, k0: f64) -> f64 {
    if lambda < 1e-4 * k0 {
        let q = (lambda / k0).powi(2);
        return FRAC_2_PI / k0 * (1.0 - q / 3.0 + q * q / 5.0);
    }
    FRAC_2_PI * (lambda / k0).atan() / lambda
}

/// Nodes and weights (the `2/π` included) of the low-energy rule, so that
/// `Σ w_j / (λ² + k_j²) ≈ F_<(λ)` for `λ ≥ lambda_min`.
pub fn low_energy_rule(k0: f64, lambda_min: f64, panels: PanelSpec) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(panels.nodes);
    let kmin = (lambda_min / 8.0).min(k0);
    let mut edges = vec![0.0, kmin];
    let mut e = kmin;
    while e < k0 {
        e = (2.0 * e).min(k0);
        edges.push(e);
    }
    let pieces = 1usize << panels.refine;
    let mut out = Vec::new();
    for w in edges.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let step = (w[1] - w[0]) / pieces as f64;
        for p in 0..pieces {
            let a = w[0] + p as f64 * step;
            for (k, wt) in map_rule(&rule, a, a + step) {
                out.push((k, FRAC_2_PI * wt));
            }
        }
    }
    out
}

/// Largest relative scalar error of the low-energy rule on `[λ_lo, λ_hi]`.
pub fn low_energy_rule_error(rule: &[(f64, f64)], k0: f64, lambda_lo: f64, lambda_hi: f64) -> f64 {
    let n = 400;
    (0..=n)
        .map(|i| {
            let l = lambda_lo * (lambda_hi / lambda_lo).powf(i as f64 / n as f64);
            let q: f64 = rule.iter().map(|&(k, w)| w / (l * l + k * k)).sum();
            let exact = f_less(l, k0);
            ((q - exact) / exact).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct MultiplierReport {
    pub values: Vec<f64>,
    pub lanczos_steps: usize,
    pub chebyshev_degree: usize,
    pub rule_error: f64,
    pub refine: u32,
}

/// `F_<(√Δ) x` on the active space. Panels are refined until the scalar rule
/// error over the Lanczos interval is below `1e-10`.
pub fn apply_low(op: &SparseOperator, k0: f64, panels: PanelSpec, x: &[f64]) -> Result<MultiplierReport> {
    let iv = op.interval()?;
    let (l_lo, l_hi) = (iv.lo.max(1e-300).sqrt(), iv.hi.sqrt());
    if iv.lo <= 0.0 {
        return Err(LabError::SpectralInterval(
            "F_< needs a spectrum bounded away from 0".into(),
        ));
    }
    let mut panels = panels;
    let (rule, err) = loop {
        let rule = low_energy_rule(k0, l_lo, panels);
        let err = low_energy_rule_error(&rule, k0, l_lo, l_hi);
        if err <= 1e-10 || panels.refine >= 8 {
            break (rule, err);
        }
        panels.refine += 1;
    };
    let shifts: Vec<f64> = rule.iter().map(|p| p.0 * p.0).collect();
    let weights: Vec<f64> = rule.iter().map(|p| p.1).collect();
    let (values, info) = shifted_sum(op, x, &shifts, &weights, 1e-12, 20_000)?;
    Ok(MultiplierReport {
        values,
        lanczos_steps: info.steps,
        chebyshev_degree: 0,
        rule_error: err,
        refine: panels.refine,
    })
}

/// Chebyshev series of `x ↦ F_>(√x)` on `[0, hi]`.
pub fn high_series(k0: f64, hi: f64) -> Result<ChebyshevSeries> {
    ChebyshevSeries::fit(|x| f_greater(x.max(0.0).sqrt(), k0), 0.0, hi, 1e-10)
}

/// `F_>(√Δ) x` on the active space.
pub fn apply_high(op: &SparseOperator, k0: f64, x: &[f64]) -> Result<MultiplierReport> {
    let iv = op.interval()?;
    let series = high_series(k0, iv.hi)?;
    Ok(MultiplierReport {
        values: series.apply(op, x),
        lanczos_steps: 0,
        chebyshev_degree: series.degree(),
        rule_error: series.max_error,
        refine: 0,
    })
}

pub fn multiplier_active(op: &SparseOperator, spec: &MultiplierSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(match spec.which {
        Which::Low => apply_low(op, spec.k0, spec.panels, x)?.values,
        Which::High => apply_high(op, spec.k0, x)?.values,
        Which::Full => {
            let mut lo = apply_low(op, spec.k0, spec.panels, x)?.values;
            let hi = apply_high(op, spec.k0, x)?.values;
            crate::exec::axpy(1.0, &hi, &mut lo);
            lo
        }
    })
}

pub fn multiplier_apply(op: &SparseOperator, spec: &MultiplierSpec, f: &VertexFunction) -> Result<VertexFunction> {
    let y = multiplier_active(op, spec, &op.restrict(&f.values))?;
    Ok(VertexFunction {
        values: op.extend(&y),
        end: f.end,
        dirichlet: op.boundary == super::Boundary::Dirichlet,
    })
}

/// `Δ^{-1/2} x = F_<(√Δ)x + F_>(√Δ)x`.
pub fn inv_sqrt_active(op: &SparseOperator, k0: f64, x: &[f64]) -> Result<Vec<f64>> {
    multiplier_active(op, &MultiplierSpec::new(k0, Which::Full), x)
}

/// Dense symmetric eigendecomposition of a small operator.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub values: nalgebra::DVector<f64>,
    pub vectors: nalgebra::DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn new(op: &SparseOperator) -> Result<Self> {
        if op.dim() > DENSE_ORACLE_MAX {
            return Err(LabError::ResourceCap(format!(
                "dense oracle limited to {DENSE_ORACLE_MAX} vertices, got {}",
                op.dim()
            )));
        }
        if !op.symmetric {
            return Err(LabError::Domain("dense oracle needs a constant measure".into()));
        }
        let eig = op.matrix.to_dense().symmetric_eigen();
        Ok(DenseSpectrum {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// `f(Δ) x`.
    pub fn apply<F: Fn(f64) -> f64>(&self, x: &[f64], f: F) -> Vec<f64> {
        let xv = nalgebra::DVector::from_column_slice(x);
        let mut c = self.vectors.transpose() * xv;
        for (ci, &l) in c.iter_mut().zip(self.values.iter()) {
            *ci *= f(l);
        }
        (&self.vectors * c).iter().copied().collect()
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, EndSpec};
    use crate::linalg::quadrature::adaptive_gk;
    use crate::spectral::{laplacian, Boundary};

    #[test]
    fn closed_forms_agree_with_integrals() {
        for &(l, k0) in &[(0.3, 0.5), (1.7, 0.5), (0.05, 2.0)] {
            let (lo, _) = adaptive_gk(|k| FRAC_2_PI / (l * l + k * k), 0.0, k0, 1e-15, 1e-13, 200).unwrap();
            assert!((lo - f_less(l, k0)).abs() < 1e-12 * f_less(l, k0));
            assert!((f_less(l, k0) + f_greater(l, k0) - 1.0 / l).abs() < 1e-12 / l);
        }
        assert!((f_greater(0.7, 0.7) - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn low_rule_reaches_target() {
        let rule = low_energy_rule(0.5, 0.02, PanelSpec::default());
        assert!(low_energy_rule_error(&rule, 0.5, 0.02, 3.6) < 1e-10);
    }

    #[test]
    fn split_matches_dense_inverse_sqrt() {
        let m = build_model(&[EndSpec::new(3, &[], 4), EndSpec::new(3, &[2], 4)]).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let ds = DenseSpectrum::new(&op).unwrap();
        let x = op.delta(m.base_points[1]);
        let want = ds.apply(&x, |l| 1.0 / l.sqrt());
        let got = inv_sqrt_active(&op, 0.5, &x).unwrap();
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            / want.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(err < 1e-8, "{err}");
    }
}
