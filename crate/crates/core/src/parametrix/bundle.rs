//! Error matrix `E(k)`, finite-rank correction, inversion to `S(k)` and the
//! verification of `(Δ+k²)^{-1} = G + GS`.

use super::{axial_vertex, envelope_slope, Correction, Energy, GParts, Setup};
use crate::error::{LabError, Result};
use crate::linalg::fit::loglog_slope;
use crate::linalg::krylov::{cg, spectral_interval};
use crate::linalg::LinearOperator;
use crate::spectral::gradient;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Largest number of near-null directions the correction will absorb.
pub const RANK_CAP: usize = 4;

pub struct ParametrixBundle {
    pub k: f64,
    pub energy: Energy,
    pub probes: Vec<usize>,
    pub parts: Vec<GParts>,
}

/// `G(k)` data at energy `k` with the parts of every probe column.
pub fn assemble_parametrix(setup: &Setup, k: f64, probes: &[usize]) -> Result<ParametrixBundle> {
    if !(k >= 0.0) {
        return Err(LabError::Domain(format!("k must be >= 0, got {k}")));
    }
    let energy = setup.energy(k)?;
    let parts = setup
        .exec
        .map_slice(probes, |&y| setup.g_parts(&energy, y))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ParametrixBundle {
        k,
        energy,
        probes: probes.to_vec(),
        parts,
    })
}

/// `E(k)` restricted to rows in `supp χ`; the first `n_chi` columns are
/// `supp χ` itself (square block), the rest are probes.
#[derive(Debug, Clone)]
pub struct ErrorMatrix {
    pub k: f64,
    pub columns: Vec<usize>,
    pub n_chi: usize,
    pub data: DMatrix<f64>,
    /// Largest `|E|` outside `supp χ` relative to the largest inside.
    pub leak: f64,
}

impl ErrorMatrix {
    pub fn hs_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn square(&self) -> DMatrix<f64> {
        self.data.columns(0, self.n_chi).into_owned()
    }

    /// Column of probe `p` (index into the probe list).
    pub fn probe_column(&self, p: usize) -> DVector<f64> {
        self.data.column(self.n_chi + p).into_owned()
    }
}

const LEAK_TOL: f64 = 1e-7;

pub fn error_term(setup: &Setup, bundle: &ParametrixBundle) -> Result<ErrorMatrix> {
    let mut columns = setup.chi.clone();
    columns.extend_from_slice(&bundle.probes);
    let n_chi = setup.chi.len();
    let cols: Vec<Result<(Vec<f64>, f64, f64)>> = setup.exec.map_slice(&columns, |&y| {
        let c = setup.error_column(&bundle.energy, y)?;
        let mut inside = 0.0f64;
        let mut outside = 0.0f64;
        for (z, &x) in c.iter().enumerate() {
            if setup.chi_pos[z] == u32::MAX {
                outside = outside.max(x.abs());
            } else {
                inside = inside.max(x.abs());
            }
        }
        Ok((setup.chi.iter().map(|&z| c[z]).collect(), inside, outside))
    });
    let mut data = DMatrix::zeros(n_chi, columns.len());
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for (j, c) in cols.into_iter().enumerate() {
        let (c, i, o) = c?;
        inside = inside.max(i);
        outside = outside.max(o);
        data.column_mut(j).copy_from_slice(&c);
    }
    let leak = if inside > 0.0 { outside / inside } else { outside };
    if leak > LEAK_TOL {
        return Err(LabError::Support(format!(
            "E(k={}) has rows outside supp chi: relative size {leak:e}",
            bundle.k
        )));
    }
    Ok(ErrorMatrix {
        k: bundle.k,
        columns,
        n_chi,
        data,
        leak,
    })
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a.read(i, j))
}

/// Dense LU of a square block with singular-value estimates.
pub struct Factored {
    lu: faer::solvers::PartialPivLu<f64>,
    n: usize,
}

impl Factored {
    pub fn new(a: &DMatrix<f64>) -> Self {
        Factored {
            lu: to_faer(a).partial_piv_lu(),
            n: a.nrows(),
        }
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        use faer::prelude::SpSolver;
        from_faer(self.lu.solve(to_faer(b).as_ref()).as_ref())
    }
}

/// `x ↦ A^{-1} A^{-T} x`.
struct InverseGram<'a>(&'a Factored);

impl LinearOperator for InverseGram<'_> {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        use faer::prelude::SpSolver;
        let b = faer::Mat::from_fn(x.len(), 1, |i, _| x[i]);
        let w = self.0.lu.solve_transpose(b.as_ref());
        let z = self.0.lu.solve(w.as_ref());
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = z.read(i, 0);
        }
    }
}

struct Gram<'a>(&'a DMatrix<f64>);

impl LinearOperator for Gram<'_> {
    fn dim(&self) -> usize {
        self.0.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = self.0 * DVector::from_column_slice(x);
        let w = self.0.tr_mul(&v);
        y.copy_from_slice(w.as_slice());
    }
}

fn lanczos_steps(n: usize) -> usize {
    n.min(120)
}

/// Largest singular value by Lanczos on `AᵀA`.
pub fn largest_singular_value(a: &DMatrix<f64>) -> Result<f64> {
    Ok(spectral_interval(&Gram(a), lanczos_steps(a.ncols()), 7, f64::INFINITY)?
        .ritz_max
        .sqrt())
}

/// Smallest singular value by Lanczos on `(AᵀA)^{-1}` through the LU.
pub fn smallest_singular_value(f: &Factored) -> Result<f64> {
    let inv = spectral_interval(&InverseGram(f), lanczos_steps(f.n), 11, f64::INFINITY)?.ritz_max;
    if !inv.is_finite() {
        return Ok(0.0);
    }
    Ok(1.0 / inv.sqrt())
}

/// `(σ_min, σ_max)` of a square matrix.
pub fn extreme_singular_values(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let top = largest_singular_value(a)?;
    let f = Factored::new(a);
    let bottom = match smallest_singular_value(&f) {
        Ok(v) => v,
        Err(LabError::SpectralInterval(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((bottom, top))
}

#[derive(Debug, Clone)]
pub struct SMatrix {
    pub k: f64,
    pub columns: Vec<usize>,
    pub n_chi: usize,
    pub data: DMatrix<f64>,
    pub min_sv: f64,
    pub max_sv: f64,
    /// `‖(I+E)(I+S) - I‖` over all stored columns (max column norm).
    pub identity_residual: f64,
}

impl SMatrix {
    pub fn hs_norm(&self) -> f64 {
        self.data.norm()
    }
}

/// Solves `(I + E_χχ) S_{χ,·} = -E_{χ,·}`; rows of `S` outside `supp χ` vanish.
pub fn invert_error(e: &ErrorMatrix, tol_rank: f64) -> Result<SMatrix> {
    let n = e.n_chi;
    let a = DMatrix::identity(n, n) + e.square();
    let max_sv = largest_singular_value(&a)?;
    let f = Factored::new(&a);
    let min_sv = smallest_singular_value(&f).unwrap_or(0.0);
    if !(min_sv >= tol_rank * max_sv) {
        return Err(LabError::Singular(format!(
            "I + E(k={}) has smallest singular value {min_sv:e} (largest {max_sv:e})",
            e.k
        )));
    }
    let s = f.solve(&(-&e.data));
    // (I+E)(I+S) - I = E + S + E S on the stored columns
    let mut r = &e.data + &s + e.square() * &s;
    let mut worst = 0.0f64;
    for mut c in r.column_iter_mut() {
        worst = worst.max(c.norm());
        c.fill(0.0);
    }
    Ok(SMatrix {
        k: e.k,
        columns: e.columns.clone(),
        n_chi: n,
        data: s,
        min_sv,
        max_sv,
        identity_residual: worst,
    })
}

/// Replaces `E` by `E - (I+E)P` with `P = ωωᵀ` (ω unit, on `supp χ`), which
/// makes `I + E` singular along `ω`.
pub fn inject_degeneracy(e: &ErrorMatrix, omega: &DVector<f64>) -> ErrorMatrix {
    let n = e.n_chi;
    let a = DMatrix::identity(n, n) + e.square();
    let aw = &a * omega;
    let mut out = e.clone();
    for j in 0..e.columns.len() {
        let wj = if j < n {
            omega[j]
        } else {
            let c = e.columns[j];
            e.columns[..n].iter().position(|&v| v == c).map(|p| omega[p]).unwrap_or(0.0)
        };
        if wj != 0.0 {
            let mut col = out.data.column_mut(j);
            col -= &aw * wj;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CorrectionReport {
    pub correction: Correction,
    pub corrected: ErrorMatrix,
    pub min_sv_before: f64,
    pub min_sv_after: f64,
}

/// Near-null directions `ωⱼ` of `I + E(0)` and compactly supported `ρⱼ` with
/// `Δρⱼ` fitting the missing range directions in least squares, so that
/// `I + E + Σ (Δρⱼ)⟨ωⱼ, ·⟩` is invertible.
pub fn finite_rank_correction(setup: &Setup, e0: &ErrorMatrix, tol_rank: f64) -> Result<CorrectionReport> {
    let n = e0.n_chi;
    let a = DMatrix::identity(n, n) + e0.square();
    let (min_sv, max_sv) = extreme_singular_values(&a)?;
    if min_sv >= tol_rank * max_sv {
        return Ok(CorrectionReport {
            correction: Correction::default(),
            corrected: e0.clone(),
            min_sv_before: min_sv,
            min_sv_after: min_sv,
        });
    }
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let null: Vec<usize> = (0..n).filter(|&j| svd.singular_values[j] < tol_rank * max_sv).collect();
    if null.len() > RANK_CAP {
        return Err(LabError::Singular(format!(
            "{} near-null directions exceed the rank cap {RANK_CAP}",
            null.len()
        )));
    }
    // least squares for ρ on the inner part of supp χ
    let inner: Vec<usize> = (0..n)
        .filter(|&i| setup.jd[setup.chi[i]] <= setup.cfg.cap_radius)
        .collect();
    let mut d = DMatrix::zeros(n, inner.len());
    for (c, &i) in inner.iter().enumerate() {
        let mut f = vec![0.0; setup.n_vertices()];
        f[setup.chi[i]] = 1.0;
        let lf = setup.shifted_laplacian(0.0, &f);
        for (r, &z) in setup.chi.iter().enumerate() {
            d[(r, c)] = lf[z];
        }
    }
    let dsvd = d.clone().svd(true, true);
    let mut correction = Correction::default();
    let mut corrected = e0.clone();
    for &j in &null {
        let target = u.column(j).into_owned();
        let coef = dsvd
            .solve(&target, 1e-12)
            .map_err(|m| LabError::Singular(m.to_string()))?;
        let mut rho = vec![0.0; setup.n_vertices()];
        for (c, &i) in inner.iter().enumerate() {
            rho[setup.chi[i]] = coef[c];
        }
        let mut omega = vec![0.0; setup.n_vertices()];
        for i in 0..n {
            omega[setup.chi[i]] = vt[(j, i)];
        }
        let lrho = &d * &coef;
        for (col, &y) in e0.columns.iter().enumerate() {
            let w = omega[y];
            if w != 0.0 {
                let mut c = corrected.data.column_mut(col);
                c += &lrho * w;
            }
        }
        correction.omega.push(omega);
        correction.rho.push(rho);
    }
    let a2 = DMatrix::identity(n, n) + corrected.square();
    let (after, top) = extreme_singular_values(&a2)?;
    if after < tol_rank * top {
        return Err(LabError::Singular(format!(
            "correction left smallest singular value {after:e}"
        )));
    }
    Ok(CorrectionReport {
        correction,
        corrected,
        min_sv_before: min_sv,
        min_sv_after: after,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeCheck {
    pub vertex: usize,
    /// `‖(Δ+k²)(G+GS)δ_y - δ_y‖₂`.
    pub residual: f64,
    /// Relative L² distance to the direct CG column.
    pub direct_relerr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub k: f64,
    pub probes: Vec<ProbeCheck>,
    pub max_residual: f64,
    pub max_direct_relerr: f64,
    pub hs_norm_s: f64,
    pub hs_norm_e: f64,
    pub min_sv: f64,
}

/// `GS δ_y` for probe index `p`.
pub fn gs_column(setup: &Setup, bundle: &ParametrixBundle, s: &SMatrix, p: usize) -> Result<Vec<f64>> {
    let col = s.data.column(s.n_chi + p);
    let mut f = vec![0.0; setup.n_vertices()];
    for (i, &z) in setup.chi.iter().enumerate() {
        f[z] = col[i];
    }
    setup.apply_g(&bundle.energy, &f)
}

pub fn verify_resolvent_decomposition(
    setup: &Setup,
    bundle: &ParametrixBundle,
    e: &ErrorMatrix,
    s: &SMatrix,
) -> Result<DecompositionReport> {
    let k = bundle.k;
    let checks: Vec<Result<ProbeCheck>> = setup.exec.map(bundle.probes.len(), |p| {
        let y = bundle.probes[p];
        let g = bundle.parts[p].total();
        let gs = gs_column(setup, bundle, s, p)?;
        let w: Vec<f64> = g.iter().zip(&gs).map(|(a, b)| a + b).collect();
        let mut r = setup.shifted_laplacian(k, &w);
        r[y] -= 1.0;
        let residual = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let op = &setup.op;
        let direct = op.extend(&cg(op, k * k, &op.delta(y), None, 1e-10, 50_000)?.x);
        let num: f64 = w.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = direct.iter().map(|b| b * b).sum::<f64>().sqrt();
        Ok(ProbeCheck {
            vertex: y,
            residual,
            direct_relerr: num / den,
        })
    });
    let probes = checks.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DecompositionReport {
        k,
        max_residual: probes.iter().map(|c| c.residual).fold(0.0, f64::max),
        max_direct_relerr: probes.iter().map(|c| c.direct_relerr).fold(0.0, f64::max),
        probes,
        hs_norm_s: s.hs_norm(),
        hs_norm_e: e.hs_norm(),
        min_sv: s.min_sv,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct K0Report {
    pub k0: f64,
    pub grid: Vec<f64>,
    pub min_sv: Vec<f64>,
}

/// Largest grid `k ≤ 1` with `σ_min(I+E(k)) ≥ 0.5` for every grid point up to
/// it, refined by `refine` bisection steps towards the first failure.
pub fn choose_k0_by<F: FnMut(f64) -> Result<f64>>(grid: &[f64], refine: usize, mut min_sv: F) -> Result<K0Report> {
    let mut g: Vec<f64> = grid.iter().copied().filter(|&k| k > 0.0 && k <= 1.0).collect();
    g.sort_by(f64::total_cmp);
    let mut svs = Vec::new();
    let mut k0 = None;
    let mut fail = None;
    for &k in &g {
        let s = min_sv(k)?;
        svs.push(s);
        if s >= 0.5 {
            k0 = Some(k);
        } else {
            fail = Some(k);
            break;
        }
    }
    let mut k0 = k0.ok_or_else(|| LabError::Singular("no admissible k0 on the grid".into()))?;
    if let Some(mut hi) = fail {
        for _ in 0..refine {
            let mid = 0.5 * (k0 + hi);
            if min_sv(mid)? >= 0.5 {
                k0 = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(K0Report {
        k0,
        grid: g[..svs.len()].to_vec(),
        min_sv: svs,
    })
}

pub fn choose_k0(setup: &Setup, grid: &[f64], refine: usize) -> Result<K0Report> {
    choose_k0_by(grid, refine, |k| {
        let b = assemble_parametrix(setup, k, &[])?;
        let e = error_term(setup, &b)?;
        let n = e.n_chi;
        Ok(extreme_singular_values(&(DMatrix::identity(n, n) + e.square()))?.0)
    })
}

/// Weight-exponent diagnostics of `E`, `GS` and `∇GS`, and the `G₃` vs `GS`
/// comparison far out on each end.
#[derive(Debug, Clone, Serialize)]
pub struct WeightFits {
    /// Per end `j`: slope of `Σ_z |E(z,z′)|` against `d(z°ⱼ, z′)`.
    pub e_right: Vec<f64>,
    /// Per end `i`: slope of `|GS(·, y₀)|` against `d(z°ᵢ, ·)`.
    pub gs_left: Vec<f64>,
    /// Per end `j`: slope of `max_{z∈B} |GS(z, z′)|` against `d(z°ⱼ, z′)`.
    pub gs_right: Vec<f64>,
    /// Per end `i`: slope of `|∇GS(·, y₀)|`.
    pub grad_gs_left: Vec<f64>,
    /// Per end `j`: `max_B |G₃| / max_B |GS|` at the far probes.
    pub g3_over_gs: Vec<Vec<(f64, f64)>>,
}

/// Probe layout used by the weight fits: the junction centre first, then
/// axial points at every integer `d ∈ [d_lo, d_hi(j)]` on each end.
pub fn ray_probes(setup: &Setup, d_lo: usize) -> (Vec<usize>, Vec<Vec<(usize, usize)>>) {
    let m = setup.m;
    let mut probes = vec![m.centre.unwrap()];
    let mut rays = Vec::new();
    for j in 0..m.n_ends() {
        let hi = m.ends[j].spec.r / 2;
        let mut ray = Vec::new();
        for d in d_lo..=hi.max(d_lo) {
            if let Some(v) = axial_vertex(m, j, d) {
                ray.push((d, probes.len()));
                probes.push(v);
            }
        }
        rays.push(ray);
    }
    (probes, rays)
}

pub fn weight_fits(
    setup: &Setup,
    bundle: &ParametrixBundle,
    e: &ErrorMatrix,
    s: &SMatrix,
    rays: &[Vec<(usize, usize)>],
    d_lo: f64,
) -> Result<WeightFits> {
    let m = setup.m;
    let nv = m.n_vertices();
    let grad = gradient(m);
    let ball: Vec<usize> = (0..nv).filter(|&z| setup.jd[z] <= 2.0 && !m.boundary[z]).collect();
    let gs_cols: Vec<Vec<f64>> = setup
        .exec
        .map(bundle.probes.len(), |p| gs_column(setup, bundle, s, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut fits = WeightFits {
        e_right: Vec::new(),
        gs_left: Vec::new(),
        gs_right: Vec::new(),
        grad_gs_left: Vec::new(),
        g3_over_gs: Vec::new(),
    };
    let centre_col = &gs_cols[0];
    let grad_centre = grad.modulus(&grad.apply(centre_col));
    for (i, ray) in rays.iter().enumerate() {
        let hi = (m.ends[i].spec.r / 2) as f64;
        fits.gs_left.push(envelope_slope(m, i, centre_col, d_lo, hi).slope);
        fits.grad_gs_left.push(envelope_slope(m, i, &grad_centre, d_lo, hi).slope);
        let ds: Vec<f64> = ray.iter().map(|r| r.0 as f64).collect();
        let e_l1: Vec<f64> = ray.iter().map(|r| e.probe_column(r.1).abs().sum()).collect();
        fits.e_right.push(loglog_slope(&ds, &e_l1).slope);
        let gs_b: Vec<f64> = ray
            .iter()
            .map(|r| ball.iter().map(|&z| gs_cols[r.1][z].abs()).fold(0.0, f64::max))
            .collect();
        fits.gs_right.push(loglog_slope(&ds, &gs_b).slope);
        let ratios = ray
            .iter()
            .zip(&gs_b)
            .map(|(r, &g)| {
                let g3 = &bundle.parts[r.1].g3;
                let top = ball.iter().map(|&z| g3[z].abs()).fold(0.0, f64::max);
                (r.0 as f64, top / g)
            })
            .collect();
        fits.g3_over_gs.push(ratios);
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::geometry::{build_model, EndSpec};
    use crate::parametrix::ParametrixConfig;

    fn small() -> crate::geometry::ModelManifold {
        build_model(&[EndSpec::new(3, &[], 7), EndSpec::new(3, &[2], 6)]).unwrap()
    }

    #[test]
    fn decomposition_reproduces_resolvent() {
        let m = small();
        let setup = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let probes = vec![m.centre.unwrap(), m.base_points[1], axial_vertex(&m, 0, 3).unwrap()];
        let b = assemble_parametrix(&setup, 0.3, &probes).unwrap();
        let e = error_term(&setup, &b).unwrap();
        let s = invert_error(&e, 1e-6).unwrap();
        assert!(s.identity_residual < 1e-8);
        let r = verify_resolvent_decomposition(&setup, &b, &e, &s).unwrap();
        assert!(r.max_residual < 1e-6, "{r:?}");
        assert!(r.max_direct_relerr < 1e-5, "{r:?}");
    }

    #[test]
    fn injected_null_vector_is_corrected() {
        let m = small();
        let setup = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let b = assemble_parametrix(&setup, 0.0, &[m.centre.unwrap()]).unwrap();
        let e = error_term(&setup, &b).unwrap();
        let n = e.n_chi;
        let mut w = DVector::zeros(n);
        for i in 0..n {
            if setup.jd[setup.chi[i]] <= 1.0 {
                w[i] = 1.0;
            }
        }
        w /= w.norm();
        let bad = inject_degeneracy(&e, &w);
        assert!(invert_error(&bad, 1e-6).is_err());
        let fix = finite_rank_correction(&setup, &bad, 1e-6).unwrap();
        assert_eq!(fix.correction.omega.len(), 1);
        assert!(fix.min_sv_before < 1e-8);
        assert!(fix.min_sv_after > 1e-4, "{}", fix.min_sv_after);
        // ω lives on supp χ
        assert!((0..m.n_vertices()).all(|z| setup.chi_pos[z] != u32::MAX || fix.correction.omega[0][z] == 0.0));
        assert!(invert_error(&fix.corrected, 1e-6).is_ok());
    }

    #[test]
    fn neumann_series_for_small_error() {
        let m = small();
        let setup = Setup::new(&m, ParametrixConfig::default(), Exec::Sequential).unwrap();
        let b = assemble_parametrix(&setup, 0.5, &[]).unwrap();
        let mut e = error_term(&setup, &b).unwrap();
        let n = e.n_chi;
        let scale = 0.05 / extreme_singular_values(&e.square()).unwrap().1;
        e.data *= scale;
        let s = invert_error(&e, 1e-6).unwrap();
        let sq = e.square();
        let approx = -&sq + &sq * &sq;
        let norm_e: f64 = 0.05;
        let diff = extreme_singular_values(&(&s.data - approx)).unwrap().1;
        assert!(diff <= 2.0 * norm_e.powi(3), "{diff}");
        assert_eq!(s.data.ncols(), n);
    }

    #[test]
    fn k0_scan_caps_at_one_for_exact_resolvent() {
        let r = choose_k0_by(&[0.25, 0.5, 0.75, 1.0], 3, |_| Ok(1.0)).unwrap();
        assert_eq!(r.k0, 1.0);
        let r = choose_k0_by(&[0.25, 0.5, 0.75, 1.0], 4, |k| Ok(1.0 - 0.8 * k)).unwrap();
        assert!(r.k0 >= 0.5 && r.k0 < 0.75 && (r.k0 - 0.625).abs() < 0.25 / 16.0 + 1e-12);
    }
}
