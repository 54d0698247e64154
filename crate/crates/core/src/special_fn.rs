//! Continuum reference kernels: Gaussian and torus heat kernels, the Bessel
//! family `L_a(r) = r^{1-a/2} K_{|a/2-1|}(r)`, product-end resolvent kernels,
//! the exponential integral and the weight envelopes ω₁, ω₂.

use crate::error::{LabError, Result};
use crate::geometry::{EndSpec, ModelManifold, Tag};
use crate::linalg::quadrature::adaptive_gk;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(4πt)^{-n/2} exp(-r²/4t)`.
pub fn gaussian_heat(n: usize, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::Domain(format!("gaussian_heat needs t > 0, got {t}")));
    }
    if r < 0.0 {
        return Err(LabError::Domain(format!("gaussian_heat needs r >= 0, got {r}")));
    }
    Ok((4.0 * PI * t).powf(-(n as f64) / 2.0) * (-r * r / (4.0 * t)).exp())
}

/// Laplacian eigenvalue `j` of the cycle graph with `l` vertices.
pub fn cycle_eigenvalue(l: usize, j: usize) -> f64 {
    match l {
        1 => 0.0,
        2 => 2.0 * j as f64,
        _ => 2.0 - 2.0 * (2.0 * PI * j as f64 / l as f64).cos(),
    }
}

/// Heat kernel of the discrete torus `∏ C_L` (counting measure) between `y`
/// and `y'`.
pub fn torus_heat(cycles: &[usize], t: f64, y: &[i32], yp: &[i32]) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(LabError::Domain(format!("torus_heat needs t >= 0, got {t}")));
    }
    let mut prod = 1.0;
    for (c, &l) in cycles.iter().enumerate() {
        let d = (y[c] - yp[c]).rem_euclid(l.max(1) as i32) as f64;
        let s: f64 = (0..l)
            .map(|j| (-t * cycle_eigenvalue(l, j)).exp() * (2.0 * PI * j as f64 * d / l as f64).cos())
            .sum();
        prod *= s / l as f64;
    }
    Ok(prod)
}

/// Product heat kernel on ℝⁿ × ∏C_L: Gaussian times torus factor.
pub fn product_heat(end: &EndSpec, t: f64, r: f64, y: &[i32], yp: &[i32]) -> Result<f64> {
    Ok(gaussian_heat(end.n, t, r)? * torus_heat(&end.factor, t, y, yp)?)
}

/// Heat kernel of the lattice ℤ at displacement `m`:
/// `(1/π) ∫_0^π exp(-t(2 - 2cos θ)) cos(mθ) dθ = e^{-2t} I_m(2t)`,
/// by the periodic trapezoid rule.
pub fn lattice_heat_1d(t: f64, m: i64) -> f64 {
    let q = 4096;
    let mut s = 0.0;
    for j in 0..q {
        let th = PI * (j as f64 + 0.5) / q as f64;
        s += (-t * (2.0 - 2.0 * th.cos())).exp() * (m as f64 * th).cos();
    }
    s / q as f64
}

fn chebev(c: &[f64], x: f64) -> f64 {
    let (mut d, mut dd) = (0.0, 0.0);
    let y2 = 2.0 * x;
    for &cj in c.iter().skip(1).rev() {
        let sv = d;
        d = y2 * d - dd + cj;
        dd = sv;
    }
    x * d - dd + 0.5 * c[0]
}

/// `Γ₁(μ)`, `Γ₂(μ)`, `1/Γ(1+μ)`, `1/Γ(1-μ)` for `|μ| <= 1/2` (Temme).
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    const C1: [f64; 7] = [
        -1.142022680371168e0,
        6.5165112670737e-3,
        3.087090173086e-4,
        -3.4706269649e-6,
        6.9437664e-9,
        3.67795e-11,
        -1.356e-13,
    ];
    const C2: [f64; 8] = [
        1.843740587300905e0,
        -7.68528408447867e-2,
        1.2719271366546e-3,
        -4.9717367042e-6,
        -3.31261198e-8,
        2.423096e-10,
        -1.702e-13,
        -1.49e-15,
    ];
    let xx = 8.0 * mu * mu - 1.0;
    let g1 = chebev(&C1, xx);
    let g2 = chebev(&C2, xx);
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

/// `(e^x K_ν(x), e^x K_{ν+1}(x))` for `ν >= 0`, `x > 0`: Temme's series for
/// `x < 2`, Steed's continued fraction otherwise, then forward recurrence.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LabError::Domain(format!("K_nu needs x > 0, got {x}")));
    }
    if nu < 0.0 {
        return Err(LabError::Domain(format!("K_nu implemented for nu >= 0, got {nu}")));
    }
    const EPS: f64 = 1e-16;
    let nl = (nu + 0.5).floor() as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut rkmu, mut rk1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - xmu2);
            c *= dd / i;
            p /= i - xmu;
            q /= i + xmu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if del.abs() < sum.abs() * EPS || i > 500.0 {
                break;
            }
            i += 1.0;
        }
        let ex = x.exp();
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2.0;
        loop {
            a -= 2.0 * (i - 1.0);
            c = -a * c / i;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
            if i > 100_000.0 {
                return Err(LabError::Domain(format!("K_nu continued fraction failed at x = {x}")));
            }
            i += 1.0;
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let t = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = t;
    }
    Ok((rkmu, rk1))
}

pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)?.0 * (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub a: f64,
    pub r: f64,
    pub value: f64,
    pub derivative: f64,
    pub second_derivative: f64,
}

impl BesselEval {
    /// `|f'' + (a-1)/r f' - f| / f`.
    pub fn ode_residual(&self) -> f64 {
        (self.second_derivative + (self.a - 1.0) / self.r * self.derivative - self.value).abs() / self.value
    }
}

/// `L_a(r) = r^{1-a/2} K_{|a/2-1|}(r)` with its first two derivatives.
pub fn bessel_l(a: f64, r: f64) -> Result<BesselEval> {
    if a < 1.0 {
        return Err(LabError::Domain(format!("bessel_L needs a >= 1, got {a}")));
    }
    if r == 0.0 {
        return Err(LabError::Domain(format!(
            "bessel_L at r = 0: L_a has an r^(2-a) singularity (a = {a})"
        )));
    }
    if !(r > 0.0) {
        return Err(LabError::Domain(format!("bessel_L needs r > 0, got {r}")));
    }
    let nu = (a / 2.0 - 1.0).abs();
    let e = (-r).exp();
    let (value, derivative, second) = if a >= 2.0 {
        let (k0, k1) = bessel_k_scaled(nu, r)?;
        let p = r.powf(-nu) * e;
        (p * k0, -p * k1, p * (k0 + (2.0 * nu + 1.0) / r * k1))
    } else {
        // 1 <= a < 2: L = r^ν K_ν, L' = -r^ν K_{1-ν}, L'' = r^ν K_ν - (2ν-1) r^{ν-1} K_{1-ν}.
        let (kn, _) = bessel_k_scaled(nu, r)?;
        let (k1n, _) = bessel_k_scaled(1.0 - nu, r)?;
        let p = r.powf(nu) * e;
        (p * kn, -p * k1n, p * kn - (2.0 * nu - 1.0) * p / r * k1n)
    };
    Ok(BesselEval {
        a,
        r,
        value,
        derivative,
        second_derivative: second,
    })
}

/// `∫_0^∞ t^{-a/2} e^{-tk²} e^{-r²/4t} dt` by adaptive Gauss–Kronrod after
/// the substitution `t = e^s`.
pub fn bessel_time_integral(a: f64, k: f64, r: f64) -> Result<f64> {
    if !(k > 0.0 && r > 0.0) {
        return Err(LabError::Domain(format!("time integral needs k, r > 0 (k={k}, r={r})")));
    }
    let phi = |s: f64| s * (1.0 - a / 2.0) - k * k * s.exp() - r * r / 4.0 * (-s).exp();
    // φ is concave; its maximiser solves (1 - a/2) = k² e^s - (r²/4) e^{-s}.
    let c = 1.0 - a / 2.0;
    let es = (c + (c * c + k * k * r * r).sqrt()) / (2.0 * k * k);
    let s0 = es.ln();
    let pmax = phi(s0);
    let mut lo = s0 - 1.0;
    while phi(lo) > pmax - 60.0 {
        lo -= 1.0;
    }
    let mut hi = s0 + 1.0;
    while phi(hi) > pmax - 60.0 {
        hi += 1.0;
    }
    let g = |s: f64| (phi(s) - pmax).exp();
    let (v, _) = adaptive_gk(g, lo, hi, 0.0, 1e-14, 4000)
        .map_err(|e| LabError::Quadrature(format!("Bessel time integral (a={a}, k={k}, r={r}): {e}")))?;
    Ok(v * pmax.exp())
}

/// `C_a` calibrated at `(k, r) = (1, 1)`.
pub fn calibrate_c(a: f64) -> Result<f64> {
    Ok(bessel_time_integral(a, 1.0, 1.0)? / bessel_l(a, 1.0)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub c_a: f64,
}

impl BesselIdentity {
    pub fn rel_err(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs()
    }
}

/// Both sides of `∫ t^{-a/2} e^{-tk²-r²/4t} dt = C_a k^{a-2} L_a(kr)`, with
/// `C_a` held fixed (pass the calibrated value).
pub fn bessel_integral_identity(a: f64, k: f64, r: f64, c_a: f64) -> Result<BesselIdentity> {
    if a < 3.0 {
        return Err(LabError::Domain(format!("identity checked for a >= 3, got {a}")));
    }
    let lhs = bessel_time_integral(a, k, r)?;
    let rhs = c_a * k.powf(a - 2.0) * bessel_l(a, k * r)?.value;
    Ok(BesselIdentity { lhs, rhs, c_a })
}

/// ℝⁿ resolvent kernel `(Δ + κ²)^{-1}` at distance `r`, written through the
/// Bessel identity: `(4π)^{-n/2} C_n κ^{n-2} L_n(κ r)`; at `κ = 0` the
/// Newtonian kernel `Γ(n/2-1) / (4 π^{n/2} r^{n-2})`.
pub fn rn_resolvent(n: usize, kappa: f64, r: f64, c_n: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(LabError::Domain("ℝⁿ resolvent is singular on the diagonal".into()));
    }
    let nf = n as f64;
    if kappa == 0.0 {
        if n < 3 {
            return Err(LabError::Domain("k = 0 resolvent needs n >= 3".into()));
        }
        return Ok(gamma(nf / 2.0 - 1.0) / (4.0 * PI.powf(nf / 2.0) * r.powf(nf - 2.0)));
    }
    Ok((4.0 * PI).powf(-nf / 2.0) * c_n * kappa.powf(nf - 2.0) * bessel_l(nf, kappa * r)?.value)
}

/// Γ(x) for x > 0 (Lanczos, g = 7).
pub fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, &g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Resolvent kernel of ℝⁿ × ∏C_L between `(x, y)` and `(x', y')`:
/// `Σ_j ψ_j(y) ψ_j(y') G_ℝⁿ(√(k² + μ_j); |x - x'|)`.
pub fn product_resolvent_kernel(end: &EndSpec, k: f64, x: &[f64], xp: &[f64], y: &[i32], yp: &[i32]) -> Result<f64> {
    let r = x.iter().zip(xp).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(LabError::Domain("coincident points: the ℝⁿ kernel is singular".into()));
    }
    if k < 0.0 {
        return Err(LabError::Domain(format!("k must be >= 0, got {k}")));
    }
    let c_n = calibrate_c(end.n as f64)?;
    let mut modes: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (c, &l) in end.factor.iter().enumerate() {
        let d = (y[c] - yp[c]).rem_euclid(l.max(1) as i32) as f64;
        let mut next = Vec::with_capacity(modes.len() * l);
        for &(mu, w) in &modes {
            for j in 0..l {
                let psi = (2.0 * PI * j as f64 * d / l as f64).cos() / l as f64;
                next.push((mu + cycle_eigenvalue(l, j), w * psi));
            }
        }
        modes = next;
    }
    let mut s = 0.0;
    for (mu, w) in modes {
        s += w * rn_resolvent(end.n, (k * k + mu).sqrt(), r, c_n)?;
    }
    Ok(s)
}

/// The same kernel by time quadrature of `e^{-tk²}` times the product heat
/// kernel; an independent route used to cross-check the eigen-sum.
pub fn product_resolvent_by_time(end: &EndSpec, k: f64, r: f64, y: &[i32], yp: &[i32]) -> Result<f64> {
    if r <= 0.0 {
        return Err(LabError::Domain("coincident points".into()));
    }
    let f = |s: f64| {
        let t = s.exp();
        t * (-t * k * k).exp() * product_heat(end, t, r, y, yp).unwrap_or(0.0)
    };
    let (v, _) = adaptive_gk(f, (r * r).ln() - 12.0, 40.0f64.max((r * r).ln() + 20.0), 0.0, 1e-13, 20_000)?;
    Ok(v)
}

/// `(r^{2-N} + r^{2-n}) e^{-c k r}`, the shape of the resolvent envelopes.
pub fn resolvent_envelope(n: usize, big_n: usize, k: f64, r: f64, c: f64) -> f64 {
    (r.powf(2.0 - big_n as f64) + r.powf(2.0 - n as f64)) * (-c * k * r).exp()
}

/// Exponential rate `c` of the upper envelope `r^{2-n} e^{-c k r}`: minus the
/// log-linear slope of `r^{n-2} R_n(1, r)` over `r ∈ [4, 16]`.
pub fn envelope_decay_constant(n: usize) -> Result<f64> {
    let c_n = calibrate_c(n as f64)?;
    let rs: Vec<f64> = (4..=16).map(|r| r as f64).collect();
    let vals = rs
        .iter()
        .map(|&r| Ok(r.powf(n as f64 - 2.0) * rn_resolvent(n, 1.0, r, c_n)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(-crate::linalg::fit::loglinear_slope(&rs, &vals).slope)
}

/// `(t^{-n/2} + t^{-N/2}) e^{-d²/(c t)}`, the shape of the Gaussian bounds.
pub fn gaussian_envelope(n: usize, big_n: usize, t: f64, d: f64, c: f64) -> f64 {
    (t.powf(-(n as f64) / 2.0) + t.powf(-(big_n as f64) / 2.0)) * (-d * d / (c * t)).exp()
}

/// Exponential integral `E₁(x)`: power series for `x <= 1`, Lentz continued
/// fraction beyond.
pub fn expint_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(LabError::Domain(format!("E1 diverges at x = {x}")));
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..200 {
            term *= -x / n as f64;
            let d = -term / n as f64;
            sum += d;
            if d.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() + sum)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok(h * (-x).exp());
            }
        }
        Err(LabError::Domain(format!("E1 continued fraction failed at x = {x}")))
    }
}

/// `∫_{k₀}^∞ e^{-k|t|}/k dk = E₁(k₀|t|)`.
pub fn hat_f_greater(t: f64, k0: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(LabError::Domain("hat F_> has a logarithmic singularity at t = 0".into()));
    }
    expint_e1(k0 * t.abs())
}

/// `⟨d⟩ = (1 + d²)^{1/2}`.
pub fn japanese(d: f64) -> f64 {
    (1.0 + d * d).sqrt()
}

/// Weight `ω_a(z, k)`: 1 on the junction, `⟨d⟩^{-(n_i - a)} e^{-k d}` on end i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEnvelope {
    pub a: u8,
    pub k: f64,
}

impl WeightEnvelope {
    pub fn eval(&self, m: &ModelManifold, z: usize) -> f64 {
        match m.tags[z] {
            Tag::Junction => 1.0,
            Tag::End(i) => {
                let d = m.dist[i][z];
                let n = m.ends[i].spec.n as f64;
                (japanese(d).powf(-(n - self.a as f64)) * (-self.k * d).exp()).min(1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_bessel_values() {
        let cases = [
            (0.0, 1.0, 0.421_024_438_240_708_3),
            (1.0, 1.0, 0.601_907_230_197_234_6),
            (0.0, 0.1, 2.427_069_024_702_016_6),
            (1.0, 2.5, 0.073_890_816_347_747_07),
            (0.0, 5.0, 0.003_691_098_334_042_594),
            (2.0, 0.5, 7.550_183_551_240_869),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(nu, x).unwrap();
            assert!((got - want).abs() < 1e-13 * want, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn half_integer_closed_form() {
        for &x in &[0.3, 1.0, 1.99, 2.0, 7.5, 40.0] {
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!((bessel_k(0.5, x).unwrap() - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn e1_reference() {
        assert!((expint_e1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((expint_e1(0.1).unwrap() - 1.822_923_958_419_390_7).abs() < 1e-14);
        assert!((expint_e1(5.0).unwrap() - 0.001_148_295_591_275_325_8).abs() < 1e-17);
        assert!(hat_f_greater(0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_reference() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
    }

    #[test]
    fn l_singularity_signalled() {
        assert!(bessel_l(4.0, 0.0).is_err());
        assert!(bessel_l(0.5, 1.0).is_err());
    }

    #[test]
    fn envelope_rate_in_three_dimensions_is_one() {
        // R_3(1, r) = e^{-r}/(4πr) exactly
        assert!((envelope_decay_constant(3).unwrap() - 1.0).abs() < 1e-6);
        let c4 = envelope_decay_constant(4).unwrap();
        assert!(c4 > 0.9 && c4 < 1.0, "{c4}");
    }
}
