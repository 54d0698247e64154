//! Gauss–Legendre rules, adaptive Gauss–Kronrod and tanh-sinh quadrature.

use crate::error::{LabError, Result};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Map a rule on `[-1, 1]` to `[a, b]`.
pub fn map_rule(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| (a + h * (x + 1.0), h * w))
        .collect()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Adaptive Gauss–Kronrod (7/15) on `[a, b]`; returns `(value, error estimate)`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&f, a, b);
    let (mut total, mut err) = (v, e);
    heap.push(Seg { a, b, val: v, err: e });
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_segments {
            return Err(LabError::Quadrature(format!(
                "adaptive_gk on [{a}, {b}]: error {err:e} after {max_segments} segments"
            )));
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
        if !total.is_finite() {
            return Err(LabError::Quadrature("non-finite integrand".into()));
        }
    }
    // Re-sum to shed accumulated rounding in the running total.
    let total: f64 = heap.iter().map(|s| s.val).sum();
    let err: f64 = heap.iter().map(|s| s.err).sum();
    Ok((total, err))
}

/// Tanh-sinh nodes and weights on `[a, b]` at step `h`; handles integrable
/// endpoint singularities. Returns points as offsets from the nearest
/// endpoint too, so callers can evaluate singular factors accurately.
pub fn tanh_sinh_rule(a: f64, b: f64, h: f64) -> Vec<TanhSinhNode> {
    let half = 0.5 * (b - a);
    let mut out = Vec::new();
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let ch = u.cosh();
        // 1 - tanh(u) computed without cancellation
        let one_minus = 1.0 / (u.exp() * ch);
        let w = 0.5 * PI * t.cosh() / (ch * ch) * h * half;
        if w < 1e-300 {
            continue;
        }
        let (x, from_a, from_b) = if u >= 0.0 {
            let d = half * one_minus;
            (b - d, b - a - d, d)
        } else {
            let one_plus = 1.0 / ((-u).exp() * ch);
            let d = half * one_plus;
            (a + d, d, b - a - d)
        };
        out.push(TanhSinhNode { x, from_a, from_b, w });
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct TanhSinhNode {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
    pub w: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 20] {
            let r = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = r.0.iter().zip(&r.1).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_gk_handles_peaks() {
        let (v, _) = adaptive_gk(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-13, 2000).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn tanh_sinh_handles_log_singularity() {
        let s: f64 = tanh_sinh_rule(0.0, 1.0, 1.0 / 32.0)
            .iter()
            .map(|n| n.w * n.from_a.ln())
            .sum();
        assert!((s + 1.0).abs() < 1e-12, "{s}");
    }
}
