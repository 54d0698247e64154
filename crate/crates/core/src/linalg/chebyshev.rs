//! Chebyshev expansions of scalar functions and their action on symmetric
//! operators through the three-term recurrence.

use super::sparse::LinearOperator;
use crate::error::{LabError, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ChebyshevSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
    /// Max error on the verification grid.
    pub max_error: f64,
}

fn cheb_coeffs(vals: &[f64]) -> Vec<f64> {
    // Type-I DCT on the Chebyshev (first kind) nodes.
    let n = vals.len();
    let mut c = vec![0.0; n];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in vals.iter().enumerate() {
            s += v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
        }
        *ck = 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    c
}

impl ChebyshevSeries {
    /// Fit `f` on `[a, b]`, doubling the sample count until the uniform error
    /// on a dense check grid is below `tol * max|f|`.
    pub fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Self> {
        if !(b > a) {
            return Err(LabError::SpectralInterval(format!("empty interval [{a}, {b}]")));
        }
        let mut n = 16;
        while n <= 8192 {
            let vals: Vec<f64> = (0..n)
                .map(|j| {
                    let t = (PI * (j as f64 + 0.5) / n as f64).cos();
                    f(0.5 * (a + b) + 0.5 * (b - a) * t)
                })
                .collect();
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let mut c = cheb_coeffs(&vals);
            let cut = tol * scale * 1e-2;
            let mut keep = c.len();
            while keep > 1 && c[keep - 1].abs() < cut {
                keep -= 1;
            }
            if keep < n * 3 / 4 {
                c.truncate(keep);
                let mut s = ChebyshevSeries {
                    a,
                    b,
                    coeffs: c,
                    max_error: 0.0,
                };
                let m = 4 * n + 1;
                let err = (0..m)
                    .map(|i| {
                        let x = a + (b - a) * i as f64 / (m - 1) as f64;
                        (s.eval(x) - f(x)).abs()
                    })
                    .fold(0.0, f64::max);
                s.max_error = err;
                if err <= tol * scale {
                    return Ok(s);
                }
            }
            n *= 2;
        }
        Err(LabError::SpectralInterval(format!(
            "Chebyshev fit on [{a}, {b}] did not reach {tol}"
        )))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// `f(A) x` for symmetric `A` with spectrum inside `[a, b]`.
    pub fn apply<A: LinearOperator>(&self, op: &A, x: &[f64]) -> Vec<f64> {
        let n = op.dim();
        let alpha = 2.0 / (self.b - self.a);
        let beta = -(self.a + self.b) / (self.b - self.a);
        let affine = |v: &[f64], out: &mut [f64]| {
            op.apply(v, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o = alpha * *o + beta * vi;
            }
        };
        let mut y: Vec<f64> = x.iter().map(|v| self.coeffs[0] * v).collect();
        if self.coeffs.len() == 1 {
            return y;
        }
        let mut t_prev = x.to_vec();
        let mut t_cur = vec![0.0; n];
        affine(x, &mut t_cur);
        crate::exec::axpy(self.coeffs[1], &t_cur, &mut y);
        let mut tmp = vec![0.0; n];
        for &c in &self.coeffs[2..] {
            affine(&t_cur, &mut tmp);
            for (t, p) in tmp.iter_mut().zip(&t_prev) {
                *t = 2.0 * *t - p;
            }
            crate::exec::axpy(c, &tmp, &mut y);
            std::mem::swap(&mut t_prev, &mut t_cur);
            std::mem::swap(&mut t_cur, &mut tmp);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fit_is_uniformly_accurate() {
        let s = ChebyshevSeries::fit(|x| (-3.0 * x).exp(), 0.0, 12.0, 1e-12).unwrap();
        for i in 0..=100 {
            let x = 0.12 * i as f64;
            assert!((s.eval(x) - (-3.0 * x).exp()).abs() < 1e-12);
        }
        assert!(s.degree() < 120);
    }

    #[test]
    fn fit_rejects_empty_interval() {
        assert!(ChebyshevSeries::fit(|x| x, 1.0, 1.0, 1e-8).is_err());
    }
}
