//! Run configuration, verb orchestration and run manifests.

pub mod verify;

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::{multi_source_distance, ModelManifold, ModelSpec, ScaledEnd};
use crate::parametrix::bundle::{gs_column, ray_probes, weight_fits};
use crate::parametrix::{assemble_parametrix, choose_k0, error_term, invert_error, verify_resolvent_decomposition};
use crate::parametrix::{ParametrixConfig, Setup};
use crate::riesz::scaling::{scaling_study, ScalingConfig};
use crate::riesz::{
    default_sources, lp_lower_bounds, unboundedness_witness, weak11_test, witness_family_seeded, Mode, RieszOperator,
};
use crate::spectral::heat::heat_apply;
use crate::spectral::multiplier::{apply_high, apply_low, DenseSpectrum, PanelSpec, DENSE_ORACLE_MAX};
use crate::spectral::resolvent::resolvent_solve;
use crate::spectral::{laplacian, Boundary};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
/// Bumped whenever a CSV gains columns; existing columns keep their order.
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const VERTEX_CSV_HEADER: &str = "vertex_id,end_tag,distance,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Build,
    KernelsCheck,
    Heat,
    Resolve,
    Multiplier,
    Parametrix,
    Riesz,
    Scaling,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Build => "build",
            Verb::KernelsCheck => "kernels-check",
            Verb::Heat => "heat",
            Verb::Resolve => "resolve",
            Verb::Multiplier => "multiplier",
            Verb::Parametrix => "parametrix",
            Verb::Riesz => "riesz",
            Verb::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub cg: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cg: 1e-10, rank: 1e-6 }
    }
}

/// `points` equispaced energies on `[0, k0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KGrid {
    pub k0: f64,
    pub points: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid { k0: 1.0, points: 5 }
    }
}

impl KGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|j| self.k0 * j as f64 / (n - 1) as f64).collect()
    }

    pub fn id(&self) -> String {
        format!("k0={}:points={}", self.k0, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_models")]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub verbs: Vec<Verb>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub k_grid: KGrid,
    #[serde(default = "default_ps")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_rs")]
    pub r_list: Vec<usize>,
    /// Probe columns per parametrix check.
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Seed of the random witness fields and test functions.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_times")]
    pub heat_times: Vec<f64>,
    /// Source of the heat/resolve/multiplier columns; the junction centre
    /// (or base point) when absent.
    #[serde(default)]
    pub source_vertex: Option<usize>,
    #[serde(default = "default_cap")]
    pub max_vertices: usize,
}

fn schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_models() -> Vec<ModelSpec> {
    vec![desk_model()]
}
fn default_ps() -> Vec<f64> {
    vec![2.0, 2.5, 3.0, 4.0]
}
fn default_rs() -> Vec<usize> {
    vec![8, 12, 16]
}
fn default_probes() -> usize {
    10
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_seed() -> u64 {
    crate::riesz::DEFAULT_SEED
}
fn default_times() -> Vec<f64> {
    vec![1.0, 4.0, 16.0]
}
fn default_cap() -> usize {
    2_000_000
}

/// The (3, 4) model: `ℤ³ × C₃` of radius `R` and `ℤ⁴` of radius `R/2 + 2`.
pub fn desk_model() -> ModelSpec {
    ModelSpec {
        id: "desk".into(),
        ends: vec![
            ScaledEnd {
                n: 3,
                factor: vec![3],
                a: 1.0,
                b: 0.0,
            },
            ScaledEnd {
                n: 4,
                factor: vec![],
                a: 0.5,
                b: 2.0,
            },
        ],
    }
}

/// Single `ℤ³` end of radius `R`.
pub fn single_end_model() -> ModelSpec {
    ModelSpec {
        id: "z3".into(),
        ends: vec![ScaledEnd {
            n: 3,
            factor: vec![],
            a: 1.0,
            b: 0.0,
        }],
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    /// Parse and validate; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            LabError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        let mut ids: Vec<&str> = self.models.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("model ids must be unique".into());
        }
        for m in &self.models {
            if m.id.is_empty() || m.id.contains([',', '/', '\\']) {
                return bad(format!("bad model id {:?}", m.id));
            }
            if m.ends.is_empty() {
                return bad(format!("model {} has no ends", m.id));
            }
            for e in &m.ends {
                if e.n < 3 || !(e.a > 0.0) || !e.b.is_finite() || e.factor.iter().any(|&l| l < 3) {
                    return bad(format!("model {}: bad end {e:?}", m.id));
                }
            }
        }
        for (name, t) in [("tolerances.cg", self.tolerances.cg), ("tolerances.rank", self.tolerances.rank)] {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("{name} must be > 0, got {t}"));
            }
        }
        if !(self.k_grid.k0 > 0.0 && self.k_grid.k0 <= 1.0) || self.k_grid.points < 2 {
            return bad("k_grid needs 0 < k0 <= 1 and at least two points".into());
        }
        if self.p_list.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
            return bad("every p must be finite and > 1".into());
        }
        if self.r_list.is_empty() || self.r_list.iter().any(|&r| r < 4) {
            return bad("r_list must be non-empty with R >= 4".into());
        }
        if self.probes == 0 {
            return bad("probes must be positive".into());
        }
        if self.heat_times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return bad("heat times must be finite and >= 0".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }

    pub fn scaling_config(&self, exec: Exec) -> ScalingConfig {
        ScalingConfig {
            k0: self.k_grid.k0,
            max_vertices: self.max_vertices,
            seed: self.seed,
            exec,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub verb: String,
    pub seconds: f64,
    pub status: String,
    pub outputs: Vec<String>,
    /// Witness ids, grids and model fingerprints behind the outputs.
    pub provenance: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config_schema_version: u32,
    pub csv_schema_version: u32,
    pub config_sha256: String,
    pub seed: u64,
    pub k_grid: String,
    pub steps: Vec<StepRecord>,
    /// Some cells were skipped by the resource cap.
    pub partial: bool,
    pub exit_code: i32,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(cfg: &RunConfig) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_schema_version: CONFIG_SCHEMA_VERSION,
            csv_schema_version: CSV_SCHEMA_VERSION,
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            k_grid: cfg.k_grid.id(),
            steps: Vec::new(),
            partial: false,
            exit_code: 0,
            error: None,
        }
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Write through a temporary sibling and rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write_atomic(&dir.join(name), text.as_bytes())?;
    Ok(name.to_string())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<String> {
    write_atomic(&dir.join(name), text.as_bytes())?;
    Ok(name.to_string())
}

/// Full-length vertex values as `vertex_id,end_tag,distance,value` rows,
/// distance measured in the graph from `source`.
pub fn vertex_csv(m: &ModelManifold, source: usize, values: &[f64]) -> String {
    let dist = multi_source_distance(m, &[source]);
    let mut out = String::with_capacity(32 * values.len());
    out.push_str(VERTEX_CSV_HEADER);
    out.push('\n');
    for (v, x) in values.iter().enumerate() {
        out.push_str(&format!("{v},{},{},{x:.17e}\n", m.tags[v].label(), dist[v]));
    }
    out
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub exit_code: i32,
}

struct Cell {
    key: String,
    r: usize,
    m: ModelManifold,
}

struct StepOutput {
    outputs: Vec<String>,
    provenance: Value,
    partial: bool,
}

fn source_of(cfg: &RunConfig, m: &ModelManifold) -> Result<usize> {
    let v = cfg
        .source_vertex
        .unwrap_or_else(|| m.centre.unwrap_or(m.base_points[0]));
    if v >= m.n_vertices() || m.boundary[v] {
        return Err(LabError::Config(format!("source vertex {v} is not an interior vertex")));
    }
    Ok(v)
}

fn cells(cfg: &RunConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for spec in &cfg.models {
        for &r in &cfg.r_list {
            let size: usize = spec.end_specs(r).iter().map(|e| e.fragment_size()).sum();
            if size > cfg.max_vertices {
                return Err(LabError::ResourceCap(format!(
                    "{} at R={r} needs ~{size} vertices, cap is {}",
                    spec.id, cfg.max_vertices
                )));
            }
            out.push(Cell {
                key: format!("{}_R{r}", spec.id),
                r,
                m: spec.build(r)?,
            });
        }
    }
    Ok(out)
}

fn fmt_num(x: f64) -> String {
    format!("{x}").replace('.', "p")
}

fn step(cfg: &RunConfig, verb: Verb, dir: &Path, exec: Exec) -> Result<StepOutput> {
    let mut outputs = Vec::new();
    let mut prov = Vec::new();
    let mut partial = false;
    match verb {
        Verb::Build => {
            let mut csv = String::from("model_id,R,n_vertices,n_ends,fingerprint\n");
            for c in cells(cfg)? {
                outputs.push(write_json(dir, &format!("manifold_{}.json", c.key), &c.m.to_json())?);
                let fp = c.m.fingerprint();
                csv.push_str(&format!(
                    "{},{},{},{},{fp}\n",
                    c.key.rsplit_once("_R").unwrap().0,
                    c.r,
                    c.m.n_vertices(),
                    c.m.n_ends()
                ));
                prov.push(json!({"cell": c.key, "fingerprint": fp}));
            }
            outputs.push(write_text(dir, "models.csv", &csv)?);
        }
        Verb::KernelsCheck => {
            let rep = verify::kernels_report()?;
            outputs.push(write_json(dir, "kernels.json", &rep)?);
            outputs.push(write_text(dir, "kernels.csv", &verify::kernels_table()?)?);
            prov.push(json!({"grid": "a in {3,4,5,6}; (k, r) 5x5; 50 ODE points"}));
        }
        Verb::Heat => {
            for c in cells(cfg)? {
                let op = laplacian(&c.m, Boundary::Dirichlet).with_exec(exec);
                let y = source_of(cfg, &c.m)?;
                let mut delta = vec![0.0; c.m.n_vertices()];
                delta[y] = 1.0;
                let f = crate::geometry::VertexFunction::new(delta);
                for &t in &cfg.heat_times {
                    let h = heat_apply(&op, t, &f)?;
                    let name = format!("heat_{}_t{}.csv", c.key, fmt_num(t));
                    outputs.push(write_text(dir, &name, &vertex_csv(&c.m, y, &h.values))?);
                    prov.push(json!({"file": name, "source": y, "t": t, "diagonal": h.values[y]}));
                }
            }
        }
        Verb::Resolve => {
            for c in cells(cfg)? {
                let op = laplacian(&c.m, Boundary::Dirichlet).with_exec(exec);
                let y = source_of(cfg, &c.m)?;
                let mut delta = vec![0.0; c.m.n_vertices()];
                delta[y] = 1.0;
                let f = crate::geometry::VertexFunction::new(delta);
                for k in cfg.k_grid.values() {
                    let u = resolvent_solve(&op, k, &f, cfg.tolerances.cg)?;
                    let name = format!("resolve_{}_k{}.csv", c.key, fmt_num(k));
                    outputs.push(write_text(dir, &name, &vertex_csv(&c.m, y, &u.values))?);
                    prov.push(json!({"file": name, "source": y, "k": k, "grid": cfg.k_grid.id()}));
                }
            }
        }
        Verb::Multiplier => {
            for c in cells(cfg)? {
                let op = laplacian(&c.m, Boundary::Dirichlet).with_exec(exec);
                let y = source_of(cfg, &c.m)?;
                let x = op.delta(y);
                let k0 = cfg.k_grid.k0;
                let low = apply_low(&op, k0, PanelSpec::default(), &x)?;
                let high = apply_high(&op, k0, &x)?;
                let mut oracle = Value::Null;
                if op.dim() <= DENSE_ORACLE_MAX {
                    let d = DenseSpectrum::new(&op)?;
                    let exact = d.apply(&x, |l| 1.0 / l.sqrt());
                    let num: f64 = exact
                        .iter()
                        .zip(low.values.iter().zip(&high.values))
                        .map(|(e, (a, b))| (a + b - e).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let den = exact.iter().map(|e| e * e).sum::<f64>().sqrt();
                    oracle = json!({"relerr_vs_dense": num / den});
                }
                for (part, rep) in [("low", &low), ("high", &high)] {
                    let name = format!("multiplier_{}_{part}.csv", c.key);
                    outputs.push(write_text(dir, &name, &vertex_csv(&c.m, y, &op.extend(&rep.values)))?);
                }
                prov.push(json!({
                    "cell": c.key, "source": y, "k0": k0,
                    "lanczos_steps": low.lanczos_steps, "rule_error": low.rule_error,
                    "chebyshev_degree": high.chebyshev_degree, "oracle": oracle,
                }));
            }
        }
        Verb::Parametrix => {
            let ks = cfg.k_grid.values();
            for c in cells(cfg)? {
                if c.m.n_ends() < 2 {
                    prov.push(json!({"cell": c.key, "skipped": "the parametrix needs at least two ends"}));
                    continue;
                }
                let pcfg = ParametrixConfig {
                    cg_tol: cfg.tolerances.cg.min(1e-11),
                    tol_rank: cfg.tolerances.rank,
                    ..ParametrixConfig::default()
                };
                let setup = Setup::new(&c.m, pcfg, exec)?;
                let (rays_probes, rays) = ray_probes(&setup, 2);
                let probes: Vec<usize> = rays_probes.iter().copied().take(cfg.probes).collect();
                let mut reports = Vec::new();
                for &k in &ks {
                    let b = assemble_parametrix(&setup, k, &probes)?;
                    let e = error_term(&setup, &b)?;
                    let s = invert_error(&e, pcfg.tol_rank)?;
                    reports.push(verify_resolvent_decomposition(&setup, &b, &e, &s)?);
                    // (G + GS) δ_y for the first probe
                    let mut col = b.parts[0].total();
                    for (x, g) in col.iter_mut().zip(gs_column(&setup, &b, &s, 0)?) {
                        *x += g;
                    }
                    let name = format!("parametrix_{}_k{}.csv", c.key, fmt_num(k));
                    outputs.push(write_text(dir, &name, &vertex_csv(&c.m, probes[0], &col))?);
                }
                let b = assemble_parametrix(&setup, ks[0], &rays_probes)?;
                let e = error_term(&setup, &b)?;
                let s = invert_error(&e, pcfg.tol_rank)?;
                let fits = weight_fits(&setup, &b, &e, &s, &rays, 2.0)?;
                let k0 = match choose_k0(&setup, &ks, 3) {
                    Ok(r) => json!(r),
                    Err(e) => json!({"error": e.to_string()}),
                };
                // weight slopes are fitted at the first grid energy only
                let summary: Vec<Value> = reports
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        json!({
                            "k": r.k,
                            "hs_norm_E": r.hs_norm_e,
                            "min_sv": r.min_sv,
                            "slopes": if i == 0 {
                                json!({
                                    "e_right": fits.e_right,
                                    "gs_left": fits.gs_left,
                                    "gs_right": fits.gs_right,
                                    "grad_gs_left": fits.grad_gs_left,
                                })
                            } else {
                                Value::Null
                            },
                        })
                    })
                    .collect();
                let name = format!("parametrix_{}.json", c.key);
                outputs.push(write_json(
                    dir,
                    &name,
                    &json!({
                        "summary": summary,
                        "decomposition": reports,
                        "weight_fits": fits,
                        "choose_k0": k0,
                    }),
                )?);
                prov.push(json!({"cell": c.key, "probes": probes, "grid": cfg.k_grid.id()}));
            }
        }
        Verb::Riesz => {
            for c in cells(cfg)? {
                let t = RieszOperator::new(&c.m, Mode::Quadrature, cfg.k_grid.k0, exec)?;
                let fam = witness_family_seeded(&c.m, cfg.seed);
                let reports = lp_lower_bounds(&t, &cfg.p_list, &fam)?;
                let weak = weak11_test(&t, &default_sources(&c.m))?;
                let mut rank_one = Vec::new();
                if c.m.n_ends() >= 2 {
                    for i in 0..c.m.n_ends() {
                        for &p in &cfg.p_list {
                            match unboundedness_witness(&t, i, p) {
                                Ok(r) => rank_one.push(json!(r)),
                                Err(e) => rank_one.push(json!({"i": i, "p": p, "error": e.to_string()})),
                            }
                        }
                    }
                }
                let name = format!("riesz_{}.json", c.key);
                outputs.push(write_json(
                    dir,
                    &name,
                    &json!({"lower_bounds": reports, "weak11": weak, "rank_one": rank_one}),
                )?);
                prov.push(json!({
                    "cell": c.key,
                    "witnesses": fam.iter().map(|w| w.id()).collect::<Vec<_>>(),
                    "k0": cfg.k_grid.k0,
                }));
            }
        }
        Verb::Scaling => {
            let table = scaling_study(&cfg.models, &cfg.p_list, &cfg.r_list, &cfg.scaling_config(exec))?;
            outputs.push(write_text(dir, "table.csv", &table.to_csv())?);
            outputs.push(write_json(dir, "scaling.json", &table)?);
            partial = !table.complete;
            prov.push(json!({
                "cells": table.cells.iter().map(|c| json!({
                    "model_id": c.model_id, "p": c.p, "R": c.r, "complete": c.complete,
                    "witness": c.report.as_ref().map(|r| r.witness.id()),
                    "witness_sha256": c.report.as_ref().map(|r| r.witness_sha256.clone()),
                })).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(StepOutput {
        outputs,
        provenance: Value::Array(prov),
        partial,
    })
}

/// Execute the configured verbs in order, writing outputs and the manifest
/// into `cfg.out_dir`. Stops at the first failing verb.
pub fn run(cfg: &RunConfig, exec: Exec) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut manifest = RunManifest::new(cfg);
    for &verb in &cfg.verbs {
        let t0 = Instant::now();
        let res = step(cfg, verb, &dir, exec);
        let seconds = t0.elapsed().as_secs_f64();
        match res {
            Ok(out) => {
                manifest.partial |= out.partial;
                manifest.steps.push(StepRecord {
                    verb: verb.name().into(),
                    seconds,
                    status: if out.partial { "partial" } else { "ok" }.into(),
                    outputs: out.outputs,
                    provenance: out.provenance,
                });
            }
            Err(e) => {
                manifest.exit_code = e.exit_code();
                manifest.error = Some(e.to_string());
                manifest.partial |= matches!(e, LabError::ResourceCap(_));
                manifest.steps.push(StepRecord {
                    verb: verb.name().into(),
                    seconds,
                    status: "failed".into(),
                    outputs: Vec::new(),
                    provenance: json!({"error": e.to_string()}),
                });
                break;
            }
        }
    }
    if manifest.exit_code == 0 && manifest.partial {
        manifest.exit_code = 4;
        manifest.error = Some("resource cap: some cells were skipped".into());
    }
    write_json(&dir, MANIFEST_NAME, &manifest)?;
    Ok(RunOutcome {
        exit_code: manifest.exit_code,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.models[0], desk_model());
        assert_eq!(cfg.k_grid.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = RunConfig::from_json("{\n  \"seed\": 3,\n  \"p_list\": [2, \n}").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("line 4"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn schema_violations_are_config_errors() {
        for text in [
            r#"{"tolerances": {"cg": 0}}"#,
            r#"{"tolerances": {"cg": -1e-8}}"#,
            r#"{"unknown_field": 1}"#,
            r#"{"verbs": ["fly"]}"#,
            r#"{"p_list": [1.0]}"#,
            r#"{"r_list": []}"#,
            r#"{"k_grid": {"k0": 2.0}}"#,
            r#"{"models": [{"id": "a", "ends": [{"n": 2}]}]}"#,
        ] {
            let err = RunConfig::from_json(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn hash_depends_on_content_only() {
        let a = RunConfig::from_json(r#"{"seed": 5, "p_list": [2, 3]}"#).unwrap();
        let b = RunConfig::from_json(r#"{ "p_list": [2.0, 3.0], "seed": 5 }"#).unwrap();
        let c = RunConfig::from_json(r#"{"seed": 6, "p_list": [2, 3]}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = std::env::temp_dir().join(format!("rieszlab-atomic-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
