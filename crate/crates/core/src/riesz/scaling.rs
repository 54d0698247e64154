//! Growth of L^p lower bounds across the nominal radius `R`.

use super::{
    dual_exponent, lp_lower_bounds, rank_one_profile, witness_family_seeded, Mode, NormReport, RieszOperator, SLOPE_BOUNDED,
    SLOPE_UNBOUNDED,
};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::ModelSpec;
use crate::linalg::fit::loglog_slope;
use crate::spectral::lp_norm;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::Bounded => "bounded",
            Classification::Unbounded => "unbounded",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

pub fn classify(slope: f64) -> Classification {
    if slope <= SLOPE_BOUNDED {
        Classification::Bounded
    } else if slope >= SLOPE_UNBOUNDED {
        Classification::Unbounded
    } else {
        Classification::Inconclusive
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingCell {
    pub model_id: String,
    pub p: f64,
    pub r: usize,
    pub complete: bool,
    pub report: Option<NormReport>,
}

/// Rank-one witness norms `‖a‖_p`, `‖b‖_{p′}` for the pair `(i, j)`.
#[derive(Debug, Clone, Serialize)]
pub struct RankOneRow {
    pub model_id: String,
    pub p: f64,
    pub r: usize,
    pub i: usize,
    pub j: usize,
    pub a_norm: f64,
    pub b_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub model_id: String,
    pub p: f64,
    pub slope: f64,
    pub classification: Classification,
    /// Several ends and `p` equal to the smallest end dimension: the divergence is logarithmic
    /// and the slope test cannot decide.
    pub by_design: bool,
    /// At `p = nᵢ`: slope of `log ‖b‖_{p′}` against `log log R`.
    pub triple_log: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingTable {
    pub cells: Vec<ScalingCell>,
    pub fits: Vec<ScalingFit>,
    pub rank_one: Vec<RankOneRow>,
    pub complete: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingConfig {
    pub k0: f64,
    /// Cells whose manifold would exceed this many vertices are skipped.
    pub max_vertices: usize,
    /// Seed of the random witness fields.
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            k0: 1.0,
            max_vertices: 2_000_000,
            seed: super::DEFAULT_SEED,
            exec: Exec::Parallel,
        }
    }
}

pub const CSV_HEADER: &str = "model_id,p,R,lower_bound,witness_id,slope,classification";

impl ScalingTable {
    pub fn fit(&self, model_id: &str, p: f64) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.model_id == model_id && f.p == p)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let fit = self.fit(&c.model_id, c.p);
            let (lb, wid) = match &c.report {
                Some(r) => (format!("{:.10e}", r.lower_bound), r.witness.id()),
                None => ("".into(), "incomplete".into()),
            };
            let slope = fit.map_or(String::new(), |f| format!("{:.6}", f.slope));
            let class = fit.map_or("", |f| f.classification.label());
            out.push_str(&format!("{},{},{},{},{},{},{}\n", c.model_id, c.p, c.r, lb, wid, slope, class));
        }
        out
    }
}

struct CellOutput {
    reports: Option<Vec<NormReport>>,
    rank_one: Vec<RankOneRow>,
    /// `(p, ‖b‖_{p′})` for ends with `nᵢ = p`.
    b_norms: Vec<(f64, f64)>,
}

fn run_cell(spec: &ModelSpec, r: usize, ps: &[f64], cfg: &ScalingConfig) -> Result<CellOutput> {
    let size: usize = spec.end_specs(r).iter().map(|e| e.fragment_size()).sum();
    if size > cfg.max_vertices {
        return Ok(CellOutput {
            reports: None,
            rank_one: Vec::new(),
            b_norms: Vec::new(),
        });
    }
    let m = spec.build(r)?;
    let t = RieszOperator::new(&m, Mode::Quadrature, cfg.k0, cfg.exec)?;
    let reports = lp_lower_bounds(&t, ps, &witness_family_seeded(&m, cfg.seed))?;
    let mut rank_one = Vec::new();
    let mut b_norms = Vec::new();
    for i in 0..m.n_ends() {
        let j = (0..m.n_ends()).find(|&j| j != i).unwrap_or(i);
        let (a, b, _) = rank_one_profile(&m, i, j, cfg.k0)?;
        for &p in ps {
            let b_norm = lp_norm(&b, &m.mu, dual_exponent(p));
            if m.ends[i].spec.n as f64 == p {
                b_norms.push((p, b_norm));
            }
            if j != i {
                rank_one.push(RankOneRow {
                    model_id: spec.id.clone(),
                    p,
                    r,
                    i,
                    j,
                    a_norm: lp_norm(&a, &m.mu, p),
                    b_norm,
                });
            }
        }
    }
    Ok(CellOutput {
        reports: Some(reports),
        rank_one,
        b_norms,
    })
}

pub fn scaling_study(specs: &[ModelSpec], ps: &[f64], rs: &[usize], cfg: &ScalingConfig) -> Result<ScalingTable> {
    if specs.is_empty() || ps.is_empty() || rs.len() < 2 {
        return Err(LabError::Config("scaling study needs models, exponents and at least two radii".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..specs.len()).flat_map(|s| rs.iter().map(move |&r| (s, r))).collect();
    let outputs = cfg
        .exec
        .map_slice(&jobs, |&(s, r)| run_cell(&specs[s], r, ps, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    let mut rank_one = Vec::new();
    let mut fits = Vec::new();
    for (si, spec) in specs.iter().enumerate() {
        let outs: Vec<(&usize, &CellOutput)> = jobs
            .iter()
            .zip(&outputs)
            .filter(|(j, _)| j.0 == si)
            .map(|(j, o)| (&j.1, o))
            .collect();
        for (pi, &p) in ps.iter().enumerate() {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut lls = Vec::new();
            let mut bs = Vec::new();
            for &(&r, out) in &outs {
                let report = out.reports.as_ref().map(|v| v[pi].clone());
                if let Some(rep) = &report {
                    xs.push(r as f64);
                    ys.push(rep.lower_bound);
                }
                if let Some(&(_, b)) = out.b_norms.iter().find(|x| x.0 == p) {
                    lls.push((r as f64).ln());
                    bs.push(b);
                }
                cells.push(ScalingCell {
                    model_id: spec.id.clone(),
                    p,
                    r,
                    complete: report.is_some(),
                    report,
                });
            }
            let slope = loglog_slope(&xs, &ys).slope;
            let by_design = spec.ends.len() >= 2 && spec.min_n() as f64 == p;
            fits.push(ScalingFit {
                model_id: spec.id.clone(),
                p,
                slope,
                classification: if by_design {
                    Classification::Inconclusive
                } else {
                    classify(slope)
                },
                by_design,
                triple_log: (by_design && bs.len() >= 2).then(|| loglog_slope(&lls, &bs).slope),
            });
        }
        for (_, out) in &outs {
            rank_one.extend(out.rank_one.iter().cloned());
        }
    }
    for cell in cells.iter_mut() {
        if let (Some(rep), Some(fit)) = (cell.report.as_mut(), fits.iter().find(|f| f.model_id == cell.model_id && f.p == cell.p)) {
            rep.slope = Some(fit.slope);
        }
    }
    Ok(ScalingTable {
        complete: cells.iter().all(|c| c.complete),
        cells,
        fits,
        rank_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_end, EndSpec, ScaledEnd};
    use crate::riesz::b_profile;
    use crate::parametrix::ParametrixConfig;

    #[test]
    fn classification_bands() {
        assert_eq!(classify(0.0), Classification::Bounded);
        assert_eq!(classify(0.05), Classification::Bounded);
        assert_eq!(classify(0.07), Classification::Inconclusive);
        assert_eq!(classify(0.1), Classification::Unbounded);
    }

    #[test]
    fn resource_cap_gives_partial_table() {
        let spec = ModelSpec {
            id: "tiny".into(),
            ends: vec![ScaledEnd {
                n: 3,
                factor: vec![],
                a: 1.0,
                b: 0.0,
            }],
        };
        let cfg = ScalingConfig {
            max_vertices: 4000,
            exec: Exec::Sequential,
            ..ScalingConfig::default()
        };
        let t = scaling_study(&[spec], &[2.0, 3.0], &[6, 7, 9], &cfg).unwrap();
        assert!(!t.complete);
        assert_eq!(t.cells.iter().filter(|c| c.complete).count(), 4);
        let csv = t.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains("incomplete"));
        let f2 = t.fit("tiny", 2.0).unwrap();
        assert_eq!(f2.classification, Classification::Bounded);
        // a single end has no logarithmic threshold
        assert!(!t.fit("tiny", 3.0).unwrap().by_design);
    }

    /// `‖b‖_{3/2}` on an n = 3 end against the radial sum
    /// `Σ_d #{shell d} ⟨d⟩^{-3}` (continuum `(log R)^{2/3}`).
    #[test]
    fn b_norm_grows_like_log_power() {
        let mut lls = Vec::new();
        let mut bs = Vec::new();
        for r in [8, 12, 16, 24] {
            let m = build_end(&EndSpec::new(3, &[], r)).unwrap();
            let b = b_profile(&m, 0, 1.0, &ParametrixConfig::default()).unwrap();
            lls.push((r as f64).ln().ln());
            bs.push(lp_norm(&b, &m.mu, 1.5));
        }
        let s = loglog_slope(&lls, &bs).slope;
        assert!(s > 2.0 / 3.0 / 2.0 && s < 2.0 * 2.0 / 3.0, "{s}");
    }
}
