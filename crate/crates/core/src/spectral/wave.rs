//! Finite-propagation splitting `F_> = G′_r + G″_r` through the cosine wave
//! propagator: `G′_r(λ) = (2/π)∫₀^∞ cos(tλ) E₁(k₀t) s(t/r) dt`.

use super::SparseOperator;
use crate::error::{LabError, Result};
use crate::exec::axpy;
use crate::linalg::quadrature::{adaptive_gk, tanh_sinh_rule};
use crate::linalg::LinearOperator;
use crate::special_fn::hat_f_greater;
use std::f64::consts::{FRAC_2_PI, PI};

use super::multiplier::f_greater;

/// Polynomial degree of the local interpolation of `cos(tλ)`.
const PANEL: usize = 8;
/// Taylor terms of `cos(dt √Δ)`.
const TAYLOR: usize = 10;
/// Absolute scalar accuracy required of the time quadrature.
const SCALAR_TOL: f64 = 1e-7;
/// `k₀ T` at which the far part is truncated (`E₁(25) ≈ 5e-13`).
const FAR_HORIZON: f64 = 25.0;

/// Raised-cosine bump: 1 on `|τ| ≤ ½`, 0 on `|τ| ≥ 1`.
pub fn bump(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * (2.0 * a - 1.0)).cos())
    }
}

/// Exact near symbol `G′_r(λ)` by adaptive quadrature.
pub fn near_symbol(lambda: f64, r: f64, k0: f64) -> Result<f64> {
    // [0, r/2]: bump is 1, log singularity at 0.
    let mut head = 0.0;
    for node in tanh_sinh_rule(0.0, 0.5 * r, 1.0 / 32.0) {
        if node.from_a > 0.0 {
            head += node.w * (node.x * lambda).cos() * hat_f_greater(node.from_a, k0)?;
        }
    }
    let (tail, _) = adaptive_gk(
        |t| (t * lambda).cos() * hat_f_greater(t, k0).unwrap_or(0.0) * bump(t / r),
        0.5 * r,
        r,
        1e-14,
        1e-12,
        4000,
    )?;
    Ok(FRAC_2_PI * (head + tail))
}

/// `G″_r(λ) = F_>(λ) - G′_r(λ)`.
pub fn far_symbol(lambda: f64, r: f64, k0: f64) -> Result<f64> {
    Ok(f_greater(lambda, k0) - near_symbol(lambda, r, k0)?)
}

/// `sup_λ |G″_r(λ)|` over `λ ∈ [0, λ_top]` (dense grid).
pub fn far_symbol_sup(r: f64, k0: f64, lambda_top: f64) -> Result<f64> {
    let n = 400;
    let mut best: f64 = 0.0;
    for i in 0..=n {
        let l = lambda_top * i as f64 / n as f64;
        best = best.max(far_symbol(l, r, k0)?.abs());
    }
    Ok(best)
}

fn cos_taylor(x: f64) -> f64 {
    // cos(√x) truncated after TAYLOR terms
    let mut term = 1.0;
    let mut s = 1.0;
    for j in 1..TAYLOR {
        term *= -x / ((2 * j - 1) * (2 * j)) as f64;
        s += term;
    }
    s
}

/// Time-quadrature weights for both parts on a common grid `t_n = n dt`.
#[derive(Debug, Clone)]
pub struct WaveSplitting {
    pub r: f64,
    pub k0: f64,
    pub dt: f64,
    pub steps: usize,
    pub near_weights: Vec<f64>,
    pub far_weights: Vec<f64>,
    /// Max scalar error of the discrete symbols against the exact ones.
    pub scalar_error: f64,
    pub lambda_max: f64,
}

fn product_weights(dt: f64, steps: usize, r: f64, k0: f64, near: bool) -> Result<Vec<f64>> {
    let mut w = vec![0.0; steps + 1];
    let sigma = |t: f64| if near { bump(t / r) } else { 1.0 - bump(t / r) };
    for p in 0..steps / PANEL {
        let base = p * PANEL;
        let (a, b) = (base as f64 * dt, (base + PANEL) as f64 * dt);
        let mut cuts = vec![a];
        for c in [0.5 * r, r] {
            if c > a && c < b {
                cuts.push(c);
            }
        }
        cuts.push(b);
        for seg in cuts.windows(2) {
            let (sa, sb) = (seg[0], seg[1]);
            if near && sa >= r || !near && sb <= 0.5 * r {
                continue;
            }
            for node in tanh_sinh_rule(sa, sb, 1.0 / 16.0) {
                let t = if sa == 0.0 { node.from_a } else { node.x };
                if t <= 0.0 {
                    continue;
                }
                let f = node.w * hat_f_greater(t, k0)? * sigma(t);
                if f == 0.0 {
                    continue;
                }
                let s = t / dt - base as f64;
                for j in 0..=PANEL {
                    let mut l = 1.0;
                    for m in 0..=PANEL {
                        if m != j {
                            l *= (s - m as f64) / (j as f64 - m as f64);
                        }
                    }
                    w[base + j] += f * l;
                }
            }
        }
    }
    for x in &mut w {
        *x *= FRAC_2_PI;
    }
    Ok(w)
}

impl WaveSplitting {
    /// Picks `dt ≤ min(h/√(2N), 0.35/√λ_max)` and halves it until the scalar
    /// symbols are within `1e-7` of the exact ones.
    pub fn new(r: f64, k0: f64, lambda_max: f64, h: f64, n_dim: usize) -> Result<Self> {
        if !(r >= 1.0) {
            return Err(LabError::Domain(format!("wave splitting needs r >= 1, got {r}")));
        }
        if !(k0 > 0.0) {
            return Err(LabError::Domain(format!("k0 must be positive, got {k0}")));
        }
        let mut dt = (h / (2.0 * n_dim as f64).sqrt()).min(0.35 / lambda_max.sqrt());
        for _ in 0..6 {
            let ws = Self::with_dt(r, k0, lambda_max, dt)?;
            if ws.scalar_error <= SCALAR_TOL {
                return Ok(ws);
            }
            dt *= 0.5;
        }
        Err(LabError::Quadrature("wave time quadrature did not reach 1e-7".into()))
    }

    /// Fixed step; errors when `dt √λ_max > 2`.
    pub fn with_dt(r: f64, k0: f64, lambda_max: f64, dt: f64) -> Result<Self> {
        let cfl = dt * lambda_max.sqrt();
        if cfl > 2.0 {
            return Err(LabError::Cfl(cfl));
        }
        let t_max = (FAR_HORIZON / k0).max(r);
        let steps = PANEL * (t_max / (dt * PANEL as f64)).ceil() as usize;
        let near_weights = product_weights(dt, steps, r, k0, true)?;
        let far_weights = product_weights(dt, steps, r, k0, false)?;
        let mut ws = WaveSplitting {
            r,
            k0,
            dt,
            steps,
            near_weights,
            far_weights,
            scalar_error: 0.0,
            lambda_max,
        };
        let top = lambda_max.sqrt();
        let mut err: f64 = 0.0;
        for i in 0..=60 {
            let l = top * i as f64 / 60.0;
            let (n, f) = ws.discrete_symbols(l);
            let exact_n = near_symbol(l, r, k0)?;
            let exact_f = f_greater(l, k0) - exact_n;
            err = err.max((n - exact_n).abs()).max((f - exact_f).abs());
        }
        ws.scalar_error = err;
        Ok(ws)
    }

    /// Symbols actually realised by the stepping, `(G′, G″)` at `λ`.
    pub fn discrete_symbols(&self, lambda: f64) -> (f64, f64) {
        let c = cos_taylor(self.dt * self.dt * lambda * lambda);
        let (mut prev, mut cur) = (1.0, c);
        let mut n = self.near_weights[0];
        let mut f = self.far_weights[0];
        for step in 1..=self.steps {
            n += self.near_weights[step] * cur;
            f += self.far_weights[step] * cur;
            let next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
        }
        (n, f)
    }

    fn last_needed(&self, far: bool) -> usize {
        if far {
            return self.steps;
        }
        self.near_weights.iter().rposition(|&w| w != 0.0).unwrap_or(0)
    }

    /// `(G′_r x, G″_r x)`; when `far` is false only the near part is stepped.
    pub fn apply(&self, op: &SparseOperator, x: &[f64], far: bool) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let h2 = self.dt * self.dt;
        let cos_step = |v: &[f64]| -> Vec<f64> {
            // Horner in dt²Δ
            let mut acc = v.to_vec();
            let mut tmp = vec![0.0; n];
            for j in (1..TAYLOR).rev() {
                op.apply(&acc, &mut tmp);
                let c = -h2 / ((2 * j - 1) * (2 * j)) as f64;
                for (a, (t, vi)) in acc.iter_mut().zip(tmp.iter().zip(v)) {
                    *a = vi + c * t;
                }
            }
            acc
        };
        let mut near = vec![0.0; n];
        let mut farv = vec![0.0; n];
        axpy(self.near_weights[0], x, &mut near);
        axpy(self.far_weights[0], x, &mut farv);
        let mut prev = x.to_vec();
        let mut cur = cos_step(x);
        for step in 1..=self.last_needed(far) {
            axpy(self.near_weights[step], &cur, &mut near);
            if far {
                axpy(self.far_weights[step], &cur, &mut farv);
            }
            let cc = cos_step(&cur);
            let next: Vec<f64> = cc.iter().zip(&prev).map(|(a, p)| 2.0 * a - p).collect();
            prev = std::mem::replace(&mut cur, next);
        }
        (near, farv)
    }
}

/// Splitting for the operator's own spectral interval and lattice.
pub fn wave_splitting(op: &SparseOperator, r: f64, k0: f64, h: f64, n_dim: usize) -> Result<WaveSplitting> {
    let iv = op.interval()?;
    WaveSplitting::new(r, k0, iv.hi, h, n_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.3), 1.0);
        assert_eq!(bump(-1.2), 0.0);
        assert!((bump(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn near_symbol_at_long_range_is_f_greater() {
        // r large enough that the cut sits beyond the E₁ decay
        let k0 = 2.0;
        for l in [0.0, 0.7, 2.5] {
            let g = near_symbol(l, 40.0, k0).unwrap();
            assert!((g - f_greater(l, k0)).abs() < 1e-10, "{l}");
        }
    }

    #[test]
    fn discrete_symbols_are_accurate() {
        let ws = WaveSplitting::new(4.0, 0.5, 12.0, 1.0, 4).unwrap();
        assert!(ws.scalar_error <= SCALAR_TOL, "{}", ws.scalar_error);
        assert!(WaveSplitting::with_dt(4.0, 0.5, 12.0, 0.7).is_err());
    }
}
