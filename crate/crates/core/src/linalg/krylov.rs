//! Conjugate gradients, two-pass Lanczos for sums of shifted inverses, and
//! Lanczos spectral-interval estimates.

use super::sparse::{LinearOperator, Shifted};
use crate::error::{LabError, Result};
use crate::exec::{axpy, dot, norm2};

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `||b - A x|| / ||b||` recomputed from scratch at exit.
    pub rel_residual: f64,
}

/// Plain CG for `(A + shift) x = b`. `x0` is a warm start.
pub fn cg<A: LinearOperator>(
    a: &A,
    shift: f64,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let op = Shifted { op: a, shift };
    let n = op.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = b.to_vec();
    let mut ap = vec![0.0; n];
    if x0.is_some() {
        op.apply(&x, &mut ap);
        axpy(-1.0, &ap, &mut r);
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = (tol * bnorm).powi(2);
    let mut it = 0;
    while rr > target && it < max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LabError::NonConvergence {
                solver: "cg (operator not positive definite)",
                iterations: it,
                residual: rr.sqrt() / bnorm,
            });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        it += 1;
    }
    op.apply(&x, &mut ap);
    let res: f64 = ap
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    if res > tol * 10.0 {
        return Err(LabError::NonConvergence {
            solver: "cg",
            iterations: it,
            residual: res,
        });
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        rel_residual: res,
    })
}

/// Solve the symmetric tridiagonal system `(T + s) y = e_1`.
/// `alpha` is the diagonal, `beta[j]` couples `j` and `j+1`.
pub fn tridiag_solve_e1(alpha: &[f64], beta: &[f64], s: f64) -> Vec<f64> {
    let m = alpha.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = alpha[0] + s;
    c[0] = if m > 1 { beta[0] / denom } else { 0.0 };
    d[0] = 1.0 / denom;
    for j in 1..m {
        denom = alpha[j] + s - beta[j - 1] * c[j - 1];
        if j + 1 < m {
            c[j] = beta[j] / denom;
        }
        d[j] = (0.0 - beta[j - 1] * d[j - 1]) / denom;
    }
    let mut y = vec![0.0; m];
    y[m - 1] = d[m - 1];
    for j in (0..m - 1).rev() {
        y[j] = d[j] - c[j] * y[j + 1];
    }
    y
}

struct LanczosState<'a, A: LinearOperator> {
    op: &'a A,
    v_prev: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    beta_prev: f64,
}

impl<'a, A: LinearOperator> LanczosState<'a, A> {
    fn new(op: &'a A, b: &[f64], bnorm: f64) -> Self {
        let n = op.dim();
        LanczosState {
            op,
            v_prev: vec![0.0; n],
            v: b.iter().map(|x| x / bnorm).collect(),
            w: vec![0.0; n],
            beta_prev: 0.0,
        }
    }

    /// One step; returns `(alpha_j, beta_{j+1})` and advances to `v_{j+1}`.
    fn step(&mut self) -> (f64, f64) {
        self.op.apply(&self.v, &mut self.w);
        axpy(-self.beta_prev, &self.v_prev, &mut self.w);
        let alpha = dot(&self.w, &self.v);
        axpy(-alpha, &self.v, &mut self.w);
        let beta = norm2(&self.w);
        std::mem::swap(&mut self.v_prev, &mut self.v);
        if beta > 0.0 {
            for (vi, wi) in self.v.iter_mut().zip(&self.w) {
                *vi = wi / beta;
            }
        }
        self.beta_prev = beta;
        (alpha, beta)
    }
}

#[derive(Debug, Clone)]
pub struct ShiftedSumInfo {
    pub steps: usize,
    /// Largest relative residual over the shifts at exit.
    pub max_rel_residual: f64,
}

/// `sum_j w_j (A + s_j)^{-1} b` for symmetric positive semidefinite `A` and
/// `s_j >= 0` (positive definite in total), via two Lanczos passes: the first
/// builds the tridiagonal matrix until every shifted system has converged,
/// the second regenerates the basis and accumulates the combination.
pub fn shifted_sum<A: LinearOperator>(
    a: &A,
    b: &[f64],
    shifts: &[f64],
    weights: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, ShiftedSumInfo)> {
    assert_eq!(shifts.len(), weights.len());
    let n = a.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 || shifts.is_empty() {
        return Ok((
            vec![0.0; n],
            ShiftedSumInfo {
                steps: 0,
                max_rel_residual: 0.0,
            },
        ));
    }
    let mut st = LanczosState::new(a, b, bnorm);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut worst = f64::INFINITY;
    let mut breakdown = false;
    while alpha.len() < max_iter {
        let (al, be) = st.step();
        alpha.push(al);
        beta.push(be);
        let m = alpha.len();
        if be <= 1e-14 * (al.abs() + 1.0) {
            breakdown = true;
            worst = 0.0;
            break;
        }
        if m % 8 == 0 || m == max_iter {
            worst = 0.0;
            for &s in shifts {
                let y = tridiag_solve_e1(&alpha, &beta[..m - 1], s);
                worst = f64::max(worst, be * y[m - 1].abs());
            }
            if worst <= tol {
                break;
            }
        }
    }
    if worst > tol && !breakdown {
        return Err(LabError::NonConvergence {
            solver: "shifted lanczos",
            iterations: alpha.len(),
            residual: worst,
        });
    }
    let m = alpha.len();
    let mut coef = vec![0.0; m];
    for (&s, &w) in shifts.iter().zip(weights) {
        let y = tridiag_solve_e1(&alpha, &beta[..m - 1], s);
        axpy(w, &y, &mut coef);
    }
    let mut x = vec![0.0; n];
    let mut st = LanczosState::new(a, b, bnorm);
    for (j, &c) in coef.iter().enumerate() {
        axpy(c * bnorm, &st.v, &mut x);
        if j + 1 < m {
            st.step();
        }
    }
    Ok((
        x,
        ShiftedSumInfo {
            steps: m,
            max_rel_residual: worst,
        },
    ))
}

/// Eigenvalues of the symmetric tridiagonal matrix, ascending.
pub fn tridiag_eigenvalues(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let m = alpha.len();
    let mut t = nalgebra::DMatrix::zeros(m, m);
    for j in 0..m {
        t[(j, j)] = alpha[j];
        if j + 1 < m {
            t[(j, j + 1)] = beta[j];
            t[(j + 1, j)] = beta[j];
        }
    }
    let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    /// Extreme Ritz values.
    pub ritz_min: f64,
    pub ritz_max: f64,
    /// Interval with safety margins applied.
    pub lo: f64,
    pub hi: f64,
}

/// Lanczos estimate of the spectrum of a symmetric operator, widened by 10%
/// on each side. `hi` never exceeds `cap` (e.g. a Gershgorin bound).
pub fn spectral_interval<A: LinearOperator>(
    a: &A,
    steps: usize,
    seed: u64,
    cap: f64,
) -> Result<SpectralInterval> {
    use rand::{Rng, SeedableRng};
    let n = a.dim();
    if n == 0 {
        return Err(LabError::SpectralInterval("empty operator".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bnorm = norm2(&b);
    let mut st = LanczosState::new(a, &b, bnorm);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for _ in 0..steps.min(n) {
        let (al, be) = st.step();
        alpha.push(al);
        beta.push(be);
        if be <= 1e-12 * (al.abs() + 1.0) {
            break;
        }
    }
    let m = alpha.len();
    let ev = tridiag_eigenvalues(&alpha, &beta[..m - 1]);
    let (rmin, rmax) = (ev[0], ev[m - 1]);
    if !(rmin.is_finite() && rmax.is_finite()) || rmax <= 0.0 {
        return Err(LabError::SpectralInterval(format!(
            "non-finite or non-positive Ritz values ({rmin}, {rmax})"
        )));
    }
    Ok(SpectralInterval {
        ritz_min: rmin,
        ritz_max: rmax,
        lo: (rmin / 1.1).max(0.0),
        hi: (rmax * 1.1).min(cap.max(rmax)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::CsrMatrix;

    fn path(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn cg_solves_dirichlet_path() {
        let a = path(200);
        let b: Vec<f64> = (0..200).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let out = cg(&a, 0.0, &b, None, 1e-12, 10_000).unwrap();
        let r = a.matvec(&out.x);
        let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn shifted_sum_matches_individual_solves() {
        let a = path(300);
        let b: Vec<f64> = (0..300).map(|i| (i as f64 * 0.1).sin()).collect();
        let shifts = [0.0, 0.01, 0.3, 2.0];
        let weights = [0.5, -1.0, 2.0, 0.25];
        let (x, info) = shifted_sum(&a, &b, &shifts, &weights, 1e-12, 5000).unwrap();
        assert!(info.steps > 0);
        let mut y = vec![0.0; 300];
        for (&s, &w) in shifts.iter().zip(&weights) {
            let o = cg(&a, s, &b, None, 1e-13, 10_000).unwrap();
            axpy(w, &o.x, &mut y);
        }
        let num: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(num / norm2(&y) < 1e-9, "{}", num / norm2(&y));
    }

    #[test]
    fn interval_brackets_path_spectrum() {
        let n = 100;
        let a = path(n);
        let iv = spectral_interval(&a, 100, 1, a.gershgorin_max()).unwrap();
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let lmin = 2.0 - 2.0 * h.cos();
        let lmax = 2.0 + 2.0 * h.cos();
        assert!(iv.lo <= lmin && iv.hi >= lmax, "{iv:?}");
    }
}
