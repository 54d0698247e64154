//! Riesz transform `T = ∇Δ^{-1/2}` on the Dirichlet space, L^p lower bounds
//! over witness families, the weak (1,1) functional and the rank-one witness.

pub mod scaling;
pub mod schur;
pub mod terms;

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::{cutoff_phi, ModelManifold, Tag};
use crate::parametrix::{axial_vertex, harmonic_profile, ParametrixConfig};
use crate::special_fn::{envelope_decay_constant, japanese};
use crate::spectral::multiplier::{inv_sqrt_active, DenseSpectrum};
use crate::spectral::opnorm::sample_vertices;
use crate::spectral::{gradient, laplacian, lp_norm, Boundary, EdgeOperator, SparseOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Dense eigendecomposition, small instances only.
    Eigen,
    /// `F_<` by shifted Lanczos over the k-panels, `F_>` by Chebyshev.
    Quadrature,
}

/// Values on the oriented edges of [`gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    pub values: Vec<f64>,
}

pub struct RieszOperator<'m> {
    pub m: &'m ModelManifold,
    pub op: SparseOperator,
    pub grad: EdgeOperator,
    pub mode: Mode,
    pub k0: f64,
    dense: Option<DenseSpectrum>,
}

impl<'m> RieszOperator<'m> {
    pub fn new(m: &'m ModelManifold, mode: Mode, k0: f64, exec: Exec) -> Result<Self> {
        if !(k0 > 0.0) {
            return Err(LabError::Domain(format!("k0 must be positive, got {k0}")));
        }
        let op = laplacian(m, Boundary::Dirichlet).with_exec(exec);
        let dense = match mode {
            Mode::Eigen => Some(DenseSpectrum::new(&op)?),
            Mode::Quadrature => None,
        };
        Ok(RieszOperator {
            m,
            op,
            grad: gradient(m),
            mode,
            k0,
            dense,
        })
    }

    /// `Δ^{-1/2} x` on the active space.
    pub fn inv_sqrt(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.dense {
            Some(d) => Ok(d.apply(x, |l| 1.0 / l.sqrt())),
            None => inv_sqrt_active(&self.op, self.k0, x),
        }
    }

    /// `T f` for a full-length `f` vanishing on the Dirichlet ring.
    pub fn apply(&self, f: &[f64]) -> Result<EdgeFunction> {
        if f.len() != self.m.n_vertices() {
            return Err(LabError::Domain(format!(
                "function has {} entries, manifold has {} vertices",
                f.len(),
                self.m.n_vertices()
            )));
        }
        if f.iter().zip(&self.m.boundary).any(|(x, &b)| b && *x != 0.0) {
            return Err(LabError::Domain("f must vanish on the Dirichlet ring".into()));
        }
        let y = self.inv_sqrt(&self.op.restrict(f))?;
        Ok(EdgeFunction {
            values: self.grad.apply(&self.op.extend(&y)),
        })
    }

    /// `|T f|` per vertex.
    pub fn modulus(&self, g: &EdgeFunction) -> Vec<f64> {
        self.grad.modulus(&g.values)
    }

    pub fn ratio(&self, f: &[f64], tf_modulus: &[f64], p: f64) -> f64 {
        lp_norm(tf_modulus, &self.m.mu, p) / lp_norm(f, &self.m.mu, p)
    }
}

pub fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `|b|^{p′-1} sign b`, the input attaining `⟨b, f⟩ = ‖b‖_{p′} ‖f‖_p`.
pub fn dualise(b: &[f64], p: f64) -> Vec<f64> {
    let q = dual_exponent(p);
    b.iter().map(|x| x.signum() * x.abs().powf(q - 1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessKind {
    Delta { vertex: usize },
    /// `b`-profile of end `end` dualised to `p′`.
    DualProfile { end: usize },
    Random { seed: u64 },
    Bump { end: usize },
}

impl WitnessKind {
    pub fn id(&self) -> String {
        match self {
            WitnessKind::Delta { vertex } => format!("delta-{vertex}"),
            WitnessKind::DualProfile { end } => format!("dual-profile-{end}"),
            WitnessKind::Random { seed } => format!("random-{seed}"),
            WitnessKind::Bump { end } => format!("bump-{end}"),
        }
    }

    pub fn depends_on_p(&self) -> bool {
        matches!(self, WitnessKind::DualProfile { .. })
    }
}

/// Nominal radius: the largest end radius.
fn nominal_radius(m: &ModelManifold) -> usize {
    m.ends.iter().map(|e| e.spec.r).max().unwrap_or(0)
}

/// `b(z′) = ⟨d(z°ᵢ, z′)⟩^{-(nᵢ-1)} [1 - e^{-c k₀ d}] φᵢ(z′)` with `c` the
/// fitted envelope rate for dimension `nᵢ`.
pub fn b_profile(m: &ModelManifold, i: usize, k0: f64, cfg: &ParametrixConfig) -> Result<Vec<f64>> {
    let phi = cutoff_phi(m, i, cfg.r0, cfg.r1)?.values;
    let n = m.ends[i].spec.n;
    let c = envelope_decay_constant(n)?;
    Ok((0..m.n_vertices())
        .map(|z| {
            if m.boundary[z] || phi[z] == 0.0 {
                return 0.0;
            }
            let d = m.dist[i][z];
            japanese(d).powf(1.0 - n as f64) * (1.0 - (-c * k0 * d).exp()) * phi[z]
        })
        .collect())
}

/// Centre distance and radius of the fixed bump `τ`.
pub const BUMP_DISTANCE: usize = 2;
pub const BUMP_RADIUS: f64 = 2.0;

/// `cos²` bump of embedded radius `BUMP_RADIUS` centred on the axis of end
/// `e` at `d(z°ₑ, ·) = BUMP_DISTANCE` (closer when the end is too short).
pub fn bump_on_end(m: &ModelManifold, e: usize) -> Result<Vec<f64>> {
    let re = m.ends[e].spec.r;
    let d = BUMP_DISTANCE.min(re.saturating_sub(crate::geometry::SHELL_RADIUS as usize + 2));
    let centre = axial_vertex(m, e, d)
        .ok_or_else(|| LabError::Geometry(format!("end {e} too small for a bump at distance {d}")))?;
    Ok((0..m.n_vertices())
        .map(|z| {
            if m.boundary[z] || m.tags[z] != Tag::End(e) {
                return 0.0;
            }
            match m.embedded_distance(z, centre) {
                Some(x) if x < BUMP_RADIUS => (FRAC_PI_2 * x / BUMP_RADIUS).cos().powi(2),
                _ => 0.0,
            }
        })
        .collect())
}

/// Default family: δ-columns at the sample vertices, the dual `b`-profile
/// (on ends long enough for the collar) and a bump on every end, and two
/// random ±1 fields.
/// Seed of the first random field in [`witness_family`].
pub const DEFAULT_SEED: u64 = 1;

pub fn witness_family(m: &ModelManifold) -> Vec<WitnessKind> {
    witness_family_seeded(m, DEFAULT_SEED)
}

/// δ-columns, dual profiles, bumps and two ±1 fields seeded `seed`, `seed + 1`.
pub fn witness_family_seeded(m: &ModelManifold, seed: u64) -> Vec<WitnessKind> {
    let mut fam: Vec<WitnessKind> = sample_vertices(m)
        .into_iter()
        .filter(|&v| !m.boundary[v])
        .map(|vertex| WitnessKind::Delta { vertex })
        .collect();
    let cfg = ParametrixConfig::default();
    for end in 0..m.n_ends() {
        if cutoff_phi(m, end, cfg.r0, cfg.r1).is_ok() {
            fam.push(WitnessKind::DualProfile { end });
        }
        fam.push(WitnessKind::Bump { end });
    }
    fam.extend([seed, seed.wrapping_add(1)].map(|seed| WitnessKind::Random { seed }));
    fam
}

pub fn build_witness(m: &ModelManifold, kind: &WitnessKind, p: f64, k0: f64) -> Result<Vec<f64>> {
    let nv = m.n_vertices();
    match *kind {
        WitnessKind::Delta { vertex } => {
            if vertex >= nv || m.boundary[vertex] {
                return Err(LabError::Domain(format!("δ witness at vertex {vertex} is not interior")));
            }
            let mut f = vec![0.0; nv];
            f[vertex] = 1.0;
            Ok(f)
        }
        WitnessKind::DualProfile { end } => Ok(dualise(&b_profile(m, end, k0, &ParametrixConfig::default())?, p)),
        WitnessKind::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..nv)
                .map(|z| {
                    let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    if m.boundary[z] {
                        0.0
                    } else {
                        s
                    }
                })
                .collect())
        }
        WitnessKind::Bump { end } => bump_on_end(m, end),
    }
}

pub fn sha256_hex(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    format!("{:x}", h.finalize())
}

/// Certified lower bound on `‖T‖_{p→p}`: the best ratio over a witness family.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NormReport {
    pub p: f64,
    pub lower_bound: f64,
    pub witness: WitnessKind,
    /// SHA-256 of the little-endian witness values, for replay checks.
    pub witness_sha256: String,
    pub r: usize,
    pub k0: f64,
    /// `(witness id, ratio)` for every member of the family.
    pub ratios: Vec<(String, f64)>,
    pub slope: Option<f64>,
    pub band: (f64, f64),
}

impl NormReport {
    /// Rebuild the witness and recompute its ratio.
    pub fn replay(&self, t: &RieszOperator) -> Result<(f64, String)> {
        let f = build_witness(t.m, &self.witness, self.p, self.k0)?;
        let h = t.modulus(&t.apply(&f)?);
        Ok((t.ratio(&f, &h, self.p), sha256_hex(&f)))
    }
}

pub const SLOPE_BOUNDED: f64 = 0.05;
pub const SLOPE_UNBOUNDED: f64 = 0.1;

/// Lower bounds for several exponents at once; `p`-independent witnesses are
/// applied once.
pub fn lp_lower_bounds(t: &RieszOperator, ps: &[f64], family: &[WitnessKind]) -> Result<Vec<NormReport>> {
    if let Some(p) = ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
        return Err(LabError::Domain(format!("p must lie in (1, ∞), got {p}")));
    }
    let mut best: Vec<Option<(f64, WitnessKind, String)>> = vec![None; ps.len()];
    let mut ratios: Vec<Vec<(String, f64)>> = vec![Vec::new(); ps.len()];
    let mut record = |pi: usize, kind: &WitnessKind, f: &[f64], r: f64| {
        ratios[pi].push((kind.id(), r));
        if best[pi].as_ref().map_or(true, |b| r > b.0) {
            best[pi] = Some((r, kind.clone(), sha256_hex(f)));
        }
    };
    for kind in family {
        if kind.depends_on_p() {
            for (pi, &p) in ps.iter().enumerate() {
                let f = build_witness(t.m, kind, p, t.k0)?;
                let h = t.modulus(&t.apply(&f)?);
                record(pi, kind, &f, t.ratio(&f, &h, p));
            }
        } else {
            let f = build_witness(t.m, kind, 2.0, t.k0)?;
            let h = t.modulus(&t.apply(&f)?);
            for (pi, &p) in ps.iter().enumerate() {
                record(pi, kind, &f, t.ratio(&f, &h, p));
            }
        }
    }
    let r = nominal_radius(t.m);
    ps.iter()
        .zip(best)
        .zip(ratios)
        .map(|((&p, b), ratios)| {
            let (lower_bound, witness, witness_sha256) =
                b.ok_or_else(|| LabError::Config("empty witness family".into()))?;
            Ok(NormReport {
                p,
                lower_bound,
                witness,
                witness_sha256,
                r,
                k0: t.k0,
                ratios,
                slope: None,
                band: (SLOPE_BOUNDED, SLOPE_UNBOUNDED),
            })
        })
        .collect()
}

pub fn lp_lower_bound(t: &RieszOperator, p: f64, family: &[WitnessKind]) -> Result<NormReport> {
    Ok(lp_lower_bounds(t, &[p], family)?.remove(0))
}

/// `sup_λ λ μ{h > λ}` for a non-negative `h`.
pub fn weak11_functional(h: &[f64], mu: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..h.len()).filter(|&z| h[z] > 0.0).collect();
    idx.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
    let mut mass = 0.0;
    let mut best: f64 = 0.0;
    for &z in &idx {
        mass += mu[z];
        best = best.max(h[z] * mass);
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct Weak11Report {
    pub sources: Vec<usize>,
    pub values: Vec<f64>,
    pub max: f64,
}

/// `sup_λ λ μ{|Tδ_y| > λ} / μ(y)` per source.
pub fn weak11_test(t: &RieszOperator, sources: &[usize]) -> Result<Weak11Report> {
    let values = sources
        .iter()
        .map(|&y| {
            let f = build_witness(t.m, &WitnessKind::Delta { vertex: y }, 2.0, t.k0)?;
            let h = t.modulus(&t.apply(&f)?);
            Ok(weak11_functional(&h, &t.m.mu) / t.m.mu[y])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Weak11Report {
        sources: sources.to_vec(),
        max: values.iter().cloned().fold(0.0, f64::max),
        values,
    })
}

pub fn default_sources(m: &ModelManifold) -> Vec<usize> {
    sample_vertices(m).into_iter().filter(|&v| !m.boundary[v]).collect()
}

/// Rank-one witness `a ⊗ b` with `a = τ ∇Φᵢ` and the `b`-profile of end `i`.
#[derive(Debug, Clone, Serialize)]
pub struct RankOneReport {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub a_norm: f64,
    /// `‖a‖_p / ‖τ‖_p`.
    pub a_normalised: f64,
    pub b_norm: f64,
    /// `‖a‖_p ‖b‖_{p′}`.
    pub product: f64,
    /// `‖Tf‖_p / ‖f‖_p` for `f = |b|^{p′-1} sign b`.
    pub realized_ratio: Option<f64>,
    /// Same with `Tf` restricted to `supp τ`.
    pub restricted_ratio: Option<f64>,
    pub witness_sha256: String,
}

/// `|a|` and `b` as vertex functions.
pub fn rank_one_profile(m: &ModelManifold, i: usize, j: usize, k0: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if i >= m.n_ends() || j >= m.n_ends() {
        return Err(LabError::Geometry(format!("ends ({i}, {j}) out of range")));
    }
    let cfg = ParametrixConfig::default();
    let big_phi = harmonic_profile(m, i, &cfg)?.values;
    let grad = gradient(m);
    let g = grad.modulus(&grad.apply(&big_phi));
    let tau = bump_on_end(m, j)?;
    let a: Vec<f64> = tau.iter().zip(&g).map(|(t, x)| t * x).collect();
    Ok((a, b_profile(m, i, k0, &cfg)?, tau))
}

pub fn rank_one_report(m: &ModelManifold, i: usize, j: usize, p: f64, k0: f64) -> Result<RankOneReport> {
    let (a, b, tau) = rank_one_profile(m, i, j, k0)?;
    let a_norm = lp_norm(&a, &m.mu, p);
    let b_norm = lp_norm(&b, &m.mu, dual_exponent(p));
    Ok(RankOneReport {
        i,
        j,
        p,
        a_norm,
        a_normalised: a_norm / lp_norm(&tau, &m.mu, p),
        b_norm,
        product: a_norm * b_norm,
        realized_ratio: None,
        restricted_ratio: None,
        witness_sha256: sha256_hex(&dualise(&b, p)),
    })
}

/// `‖(a ⊗ b) f‖_p / ‖f‖_p = ‖a‖_p |⟨b, f⟩| / ‖f‖_p`.
pub fn rank_one_ratio(a: &[f64], b: &[f64], f: &[f64], mu: &[f64], p: f64) -> f64 {
    let inner: f64 = b.iter().zip(f).zip(mu).map(|((x, y), w)| x * y * w).sum();
    lp_norm(a, mu, p) * inner.abs() / lp_norm(f, mu, p)
}

/// Below this `‖a‖_p/‖τ‖_p` the witness counts as vanishing.
pub const WITNESS_FLOOR: f64 = 1e-6;

/// Rank-one witness of the `p ≥ nᵢ` obstruction with `τ` on the first end
/// `j ≠ i`, plus the realized ratio of `T` on the extremal dual input.
pub fn unboundedness_witness(t: &RieszOperator, i: usize, p: f64) -> Result<RankOneReport> {
    let m = t.m;
    let j = (0..m.n_ends())
        .find(|&j| j != i)
        .ok_or_else(|| LabError::Domain("unboundedness witness needs at least two ends".into()))?;
    let mut rep = rank_one_report(m, i, j, p, t.k0)?;
    if rep.a_normalised <= WITNESS_FLOOR {
        return Err(LabError::Domain(format!(
            "∇Φ_{i} vanishes on supp τ (‖a‖_p/‖τ‖_p = {:.2e})",
            rep.a_normalised
        )));
    }
    let b = b_profile(m, i, t.k0, &ParametrixConfig::default())?;
    let f = dualise(&b, p);
    let h = t.modulus(&t.apply(&f)?);
    let tau = bump_on_end(m, j)?;
    let hr: Vec<f64> = h.iter().zip(&tau).map(|(x, s)| if *s > 0.0 { *x } else { 0.0 }).collect();
    rep.realized_ratio = Some(t.ratio(&f, &h, p));
    rep.restricted_ratio = Some(t.ratio(&f, &hr, p));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_end, build_model, EndSpec};
    use proptest::prelude::*;
    use rand::Rng;

    fn small() -> ModelManifold {
        build_model(&[EndSpec::new(3, &[], 4), EndSpec::new(3, &[], 4)]).unwrap()
    }

    fn random_interior(m: &ModelManifold, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m.n_vertices())
            .map(|z| if m.boundary[z] { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect()
    }

    #[test]
    fn partial_isometry_in_both_modes() {
        let m = small();
        for mode in [Mode::Eigen, Mode::Quadrature] {
            let t = RieszOperator::new(&m, mode, 1.0, Exec::Sequential).unwrap();
            for seed in 0..3 {
                let f = random_interior(&m, seed);
                let r = t.ratio(&f, &t.modulus(&t.apply(&f).unwrap()), 2.0);
                assert!((r - 1.0).abs() < 1e-8, "{mode:?}: {r}");
            }
        }
    }

    #[test]
    fn modes_agree() {
        let m = small();
        let te = RieszOperator::new(&m, Mode::Eigen, 1.0, Exec::Sequential).unwrap();
        let tq = RieszOperator::new(&m, Mode::Quadrature, 1.0, Exec::Sequential).unwrap();
        let f = random_interior(&m, 9);
        let a = te.apply(&f).unwrap().values;
        let b = tq.apply(&f).unwrap().values;
        let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(num / den < 1e-5, "{}", num / den);
    }

    #[test]
    fn eigenfunction_is_scaled_gradient() {
        let m = small();
        let t = RieszOperator::new(&m, Mode::Quadrature, 1.0, Exec::Sequential).unwrap();
        let d = DenseSpectrum::new(&t.op).unwrap();
        let (imin, lmin) = d.values.argmin();
        let f = t.op.extend(&d.vectors.column(imin).iter().copied().collect::<Vec<_>>());
        let tf = t.apply(&f).unwrap().values;
        let expect = t.grad.apply(&f);
        for (x, y) in tf.iter().zip(&expect) {
            assert!((x - y / lmin.sqrt()).abs() < 1e-7);
        }
    }

    #[test]
    fn ring_values_are_rejected() {
        let m = small();
        let t = RieszOperator::new(&m, Mode::Eigen, 1.0, Exec::Sequential).unwrap();
        let mut f = vec![0.0; m.n_vertices()];
        f[m.boundary.iter().position(|&b| b).unwrap()] = 1.0;
        assert!(t.apply(&f).is_err());
    }

    #[test]
    fn p2_lower_bound_is_one() {
        let m = small();
        let t = RieszOperator::new(&m, Mode::Eigen, 1.0, Exec::Sequential).unwrap();
        let rep = lp_lower_bound(&t, 2.0, &witness_family(&m)).unwrap();
        assert!((rep.lower_bound - 1.0).abs() < 1e-8);
        assert!(rep.ratios.iter().all(|(_, r)| (r - 1.0).abs() < 1e-8));
    }

    #[test]
    fn replay_reproduces_the_bound() {
        let m = small();
        let t = RieszOperator::new(&m, Mode::Eigen, 1.0, Exec::Sequential).unwrap();
        let rep = lp_lower_bound(&t, 3.0, &witness_family(&m)).unwrap();
        let (r, sha) = rep.replay(&t).unwrap();
        assert_eq!(sha, rep.witness_sha256);
        assert!((r - rep.lower_bound).abs() < 1e-12);
    }

    #[test]
    fn enlarging_family_never_lowers_the_bound() {
        let m = small();
        let t = RieszOperator::new(&m, Mode::Eigen, 1.0, Exec::Sequential).unwrap();
        let fam = witness_family(&m);
        let mut prev = 0.0;
        for n in 1..=fam.len() {
            let b = lp_lower_bound(&t, 4.0, &fam[..n]).unwrap().lower_bound;
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn identity_weak_functional_is_one() {
        let mu = vec![1.0; 10];
        let mut h = vec![0.0; 10];
        h[3] = 1.0;
        assert_eq!(weak11_functional(&h, &mu), 1.0);
        // 1/r profile: sup_λ λ #{1/r > λ} = max_k k · (1/k) = 1
        let h: Vec<f64> = (1..=50).map(|r| 1.0 / r as f64).collect();
        assert!((weak11_functional(&h, &vec![1.0; 50]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_end_witness_vanishes() {
        let m = build_end(&EndSpec::new(3, &[], 8)).unwrap();
        let rep = rank_one_report(&m, 0, 0, 4.0, 1.0).unwrap();
        assert!(rep.a_normalised <= WITNESS_FLOOR, "{}", rep.a_normalised);
        let t = RieszOperator::new(&m, Mode::Quadrature, 1.0, Exec::Sequential).unwrap();
        assert!(unboundedness_witness(&t, 0, 4.0).is_err());
    }

    #[test]
    fn two_end_witness_is_nonzero() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(4, &[], 6)]).unwrap();
        let rep = rank_one_report(&m, 0, 1, 4.0, 1.0).unwrap();
        assert!(rep.a_normalised > 1e-3, "{}", rep.a_normalised);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rank_one_dual_input_attains_product(
            a in proptest::collection::vec(-1.0f64..1.0, 12),
            b in proptest::collection::vec(-1.0f64..1.0, 12),
            p in 1.2f64..6.0,
        ) {
            prop_assume!(b.iter().any(|x| x.abs() > 1e-3));
            let mu = vec![1.0; 12];
            let f = dualise(&b, p);
            let lhs = rank_one_ratio(&a, &b, &f, &mu, p);
            let rhs = lp_norm(&a, &mu, p) * lp_norm(&b, &mu, dual_exponent(p));
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300));
        }

        #[test]
        fn weak_functional_bounded_by_l1(h in proptest::collection::vec(0.0f64..5.0, 1..40)) {
            let mu = vec![1.0; h.len()];
            let l1: f64 = h.iter().sum();
            prop_assert!(weak11_functional(&h, &mu) <= l1 + 1e-12);
        }
    }
}
