//! Lattice models of ℝⁿ × (product of cycles) ends and their connected sums.
//!
//! A fragment is the cube `|x|∞ ≤ R` in ℤⁿ times a discrete torus. Its outer
//! shell `|x|∞ = R` is the Dirichlet ring and the ℓ¹ ball `|x|₁ ≤ 2` is the
//! removable core. `connect_sum` deletes every core and wires the exposed
//! shells `|x|₁ = 3` to a fixed junction: one hub per end joined to the
//! axial shell points `±3e_a × {0}`, the hubs joined pairwise, and a centre
//! vertex joined to every hub.

use crate::error::{LabError, Result};
use crate::linalg::CsrMatrix;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// ℓ¹ radius of the removed core.
pub const CORE_RADIUS: i32 = 2;
/// ℓ¹ radius of the exposed shell wired to the junction.
pub const SHELL_RADIUS: i32 = CORE_RADIUS + 1;
pub const MANIFOLD_FORMAT_VERSION: u32 = 1;

fn default_h() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndSpec {
    pub n: usize,
    #[serde(default)]
    pub factor: Vec<usize>,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(default = "default_h")]
    pub h: f64,
}

impl EndSpec {
    pub fn new(n: usize, factor: &[usize], r: usize) -> Self {
        EndSpec {
            n,
            factor: factor.to_vec(),
            r,
            h: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(LabError::InvalidSpec(format!(
                "n = {} is below 3; every end needs n_i >= 3",
                self.n
            )));
        }
        if self.r < 4 {
            return Err(LabError::InvalidSpec(format!(
                "R = {} too small to hold core, shell and cutoff collars (need R >= 4)",
                self.r
            )));
        }
        if self.factor.iter().any(|&l| l < 1) {
            return Err(LabError::InvalidSpec("cycle lengths must be >= 1".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(LabError::InvalidSpec(format!("lattice spacing h = {}", self.h)));
        }
        Ok(())
    }

    /// Total dimension N = n + (number of non-trivial cycles).
    pub fn total_dim(&self) -> usize {
        self.n + self.factor.iter().filter(|&&l| l > 1).count()
    }

    pub fn torus_size(&self) -> usize {
        self.factor.iter().product::<usize>().max(1)
    }

    pub fn side(&self) -> usize {
        2 * self.r + 1
    }

    pub fn fragment_size(&self) -> usize {
        self.side().pow(self.n as u32) * self.torus_size()
    }
}

/// Index arithmetic for one fragment: cube coordinates (slowest) then cycle
/// coordinates (fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct EndGrid {
    pub spec: EndSpec,
}

impl EndGrid {
    pub fn new(spec: EndSpec) -> Self {
        EndGrid { spec }
    }

    pub fn len(&self) -> usize {
        self.spec.fragment_size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.spec.n + self.spec.factor.len()
    }

    /// Extent of every coordinate axis (cube axes then cycles).
    pub fn extents(&self) -> Vec<usize> {
        let mut e = vec![self.spec.side(); self.spec.n];
        e.extend(self.spec.factor.iter().copied());
        e
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i32> {
        let ext = self.extents();
        let mut c = vec![0i32; ext.len()];
        for a in (0..ext.len()).rev() {
            c[a] = (idx % ext[a]) as i32;
            idx /= ext[a];
        }
        let r = self.spec.r as i32;
        for x in c.iter_mut().take(self.spec.n) {
            *x -= r;
        }
        c
    }

    pub fn index(&self, c: &[i32]) -> Option<usize> {
        let ext = self.extents();
        let r = self.spec.r as i32;
        let mut idx = 0usize;
        for (a, &e) in ext.iter().enumerate() {
            let v = if a < self.spec.n { c[a] + r } else { c[a].rem_euclid(e as i32) };
            if v < 0 || v as usize >= e {
                return None;
            }
            idx = idx * e + v as usize;
        }
        Some(idx)
    }

    pub fn linf(&self, c: &[i32]) -> i32 {
        c[..self.spec.n].iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn l1(&self, c: &[i32]) -> i32 {
        c[..self.spec.n].iter().map(|x| x.abs()).sum()
    }

    /// Nearest neighbours of `c`: ±1 on each cube axis (inside the cube) and
    /// on each cycle (distinct vertices only).
    pub fn neighbours(&self, c: &[i32]) -> Vec<Vec<i32>> {
        let mut out = Vec::new();
        let r = self.spec.r as i32;
        for a in 0..self.spec.n {
            for d in [-1, 1] {
                let v = c[a] + d;
                if v.abs() <= r {
                    let mut nb = c.to_vec();
                    nb[a] = v;
                    out.push(nb);
                }
            }
        }
        for (j, &l) in self.spec.factor.iter().enumerate() {
            let a = self.spec.n + j;
            let l = l as i32;
            if l == 1 {
                continue;
            }
            let steps: &[i32] = if l == 2 { &[1] } else { &[-1, 1] };
            for &d in steps {
                let mut nb = c.to_vec();
                nb[a] = (c[a] + d).rem_euclid(l);
                out.push(nb);
            }
        }
        out
    }

    /// Product-Euclidean distance between two fragment points: Euclidean on
    /// the cube axes, cyclic on the torus.
    pub fn embedded_distance(&self, a: &[i32], b: &[i32]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.spec.n {
            s += ((a[k] - b[k]) as f64).powi(2);
        }
        for (j, &l) in self.spec.factor.iter().enumerate() {
            let k = self.spec.n + j;
            let d = (a[k] - b[k]).rem_euclid(l as i32);
            s += (d.min(l as i32 - d) as f64).powi(2);
        }
        s.sqrt() * self.spec.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// End index, 0-based.
    End(usize),
    /// Junction vertex (the compact set K).
    Junction,
}

impl Tag {
    pub fn end(self) -> Option<usize> {
        match self {
            Tag::End(i) => Some(i),
            Tag::Junction => None,
        }
    }

    /// Serialised label: end index 1-based, 0 for the junction.
    pub fn label(self) -> i64 {
        match self {
            Tag::End(i) => i as i64 + 1,
            Tag::Junction => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    pub ends: Vec<EndGrid>,
    pub tags: Vec<Tag>,
    pub mu: Vec<f64>,
    /// Symmetric weighted adjacency (off-diagonal only).
    pub adjacency: CsrMatrix,
    /// Edge lengths aligned with `adjacency` entries.
    pub lengths: Vec<f64>,
    pub boundary: Vec<bool>,
    /// Removable core flags (fragments only; all false after `connect_sum`).
    pub core: Vec<bool>,
    pub base_points: Vec<usize>,
    pub dist: Vec<Vec<f64>>,
    /// Fragment-local index of each vertex (`u32::MAX` on the junction).
    pub local: Vec<u32>,
    /// Per end: fragment-local index -> vertex (`u32::MAX` if removed).
    pub end_maps: Vec<Vec<u32>>,
    pub hubs: Vec<usize>,
    pub centre: Option<usize>,
}

/// Dirichlet-compatible or not, a function on the vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    pub values: Vec<f64>,
    pub end: Option<usize>,
    pub dirichlet: bool,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction {
            values,
            end: None,
            dirichlet: false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

const NONE: u32 = u32::MAX;

impl ModelManifold {
    pub fn n_vertices(&self) -> usize {
        self.tags.len()
    }

    pub fn n_ends(&self) -> usize {
        self.ends.len()
    }

    pub fn is_fragment(&self) -> bool {
        self.core.iter().any(|&c| c)
    }

    pub fn coords(&self, v: usize) -> Option<Vec<i32>> {
        let e = self.tags[v].end()?;
        Some(self.ends[e].coords(self.local[v] as usize))
    }

    /// Vertex at fragment coordinates `c` of end `e`, if present.
    pub fn vertex(&self, e: usize, c: &[i32]) -> Option<usize> {
        let l = self.ends[e].index(c)?;
        let v = self.end_maps[e][l];
        (v != NONE).then_some(v as usize)
    }

    pub fn neighbours(&self, v: usize) -> (&[u32], &[f64]) {
        self.adjacency.row(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency.row(v).0.len()
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| !self.boundary[v]).collect()
    }

    pub fn vertices_of_end(&self, e: usize) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| self.tags[v] == Tag::End(e)).collect()
    }

    pub fn junction(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| self.tags[v] == Tag::Junction).collect()
    }

    /// Product-Euclidean distance for two vertices on the same end.
    pub fn embedded_distance(&self, a: usize, b: usize) -> Option<f64> {
        let (ea, eb) = (self.tags[a].end()?, self.tags[b].end()?);
        if ea != eb {
            return None;
        }
        Some(self.ends[ea].embedded_distance(&self.coords(a)?, &self.coords(b)?))
    }

    /// Graph distance from the nearest junction vertex (`dist` to the base
    /// point for fragments).
    pub fn junction_distance(&self) -> Vec<f64> {
        let j = self.junction();
        if j.is_empty() {
            return self.dist[0].clone();
        }
        multi_source_distance(self, &j)
    }

    /// Deterministic SHA-256 of the graph (tags, boundary, adjacency).
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for t in &self.tags {
            h.update(t.label().to_le_bytes());
        }
        for &b in &self.boundary {
            h.update([b as u8]);
        }
        for &p in self.adjacency.indptr() {
            h.update((p as u64).to_le_bytes());
        }
        for &i in self.adjacency.indices() {
            h.update(i.to_le_bytes());
        }
        for &w in self.adjacency.values() {
            h.update(w.to_le_bytes());
        }
        format!("{:x}", h.finalize())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let b64 = base64::engine::general_purpose::STANDARD;
        let bytes_u64: Vec<u8> = self
            .adjacency
            .indptr()
            .iter()
            .flat_map(|&p| (p as u64).to_le_bytes())
            .collect();
        let bytes_u32: Vec<u8> = self.adjacency.indices().iter().flat_map(|i| i.to_le_bytes()).collect();
        let bytes_f64: Vec<u8> = self.adjacency.values().iter().flat_map(|w| w.to_le_bytes()).collect();
        serde_json::json!({
            "version": MANIFOLD_FORMAT_VERSION,
            "kind": if self.is_fragment() { "fragment" } else { "connected_sum" },
            "ends": self.ends.iter().map(|g| &g.spec).collect::<Vec<_>>(),
            "n_vertices": self.n_vertices(),
            "edges": {
                "indptr": b64.encode(bytes_u64),
                "indices": b64.encode(bytes_u32),
                "weights": b64.encode(bytes_f64),
            },
            "tags": self.tags.iter().map(|t| t.label()).collect::<Vec<_>>(),
            "base_points": self.base_points,
            "fingerprint": self.fingerprint(),
        })
    }

    /// Rebuild from the stored specs and check the stored graph matches.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let version = v["version"]
            .as_u64()
            .ok_or_else(|| LabError::Config("manifold document lacks `version`".into()))?;
        if version != MANIFOLD_FORMAT_VERSION as u64 {
            return Err(LabError::Config(format!("unsupported manifold version {version}")));
        }
        let ends: Vec<EndSpec> = serde_json::from_value(v["ends"].clone())?;
        let m = match v["kind"].as_str() {
            Some("fragment") => {
                if ends.len() != 1 {
                    return Err(LabError::Config("fragment document must hold one end".into()));
                }
                build_end(&ends[0])?
            }
            _ => build_model(&ends)?,
        };
        let b64 = base64::engine::general_purpose::STANDARD;
        let decode = |key: &str| -> Result<Vec<u8>> {
            let s = v["edges"][key]
                .as_str()
                .ok_or_else(|| LabError::Config(format!("edges.{key} missing")))?;
            b64.decode(s).map_err(|e| LabError::Config(format!("edges.{key}: {e}")))
        };
        let indptr: Vec<usize> = decode("indptr")?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        let indices: Vec<u32> = decode("indices")?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let weights: Vec<f64> = decode("weights")?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if indptr != m.adjacency.indptr() || indices != m.adjacency.indices() || weights != m.adjacency.values() {
            return Err(LabError::Config("stored edge arrays do not match the rebuilt graph".into()));
        }
        Ok(m)
    }
}

/// Dijkstra from several sources at once; unreachable vertices get `+∞`.
pub fn multi_source_distance(m: &ModelManifold, sources: &[usize]) -> Vec<f64> {
    let n = m.n_vertices();
    let mut d = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        d[s] = 0.0;
        heap.push(Reverse((OrdF(0.0), s)));
    }
    let ip = m.adjacency.indptr();
    let ix = m.adjacency.indices();
    while let Some(Reverse((OrdF(du), u))) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for p in ip[u]..ip[u + 1] {
            let w = ix[p] as usize;
            let nd = du + m.lengths[p];
            if nd < d[w] {
                d[w] = nd;
                heap.push(Reverse((OrdF(nd), w)));
            }
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF(f64);
impl Eq for OrdF {}
impl PartialOrd for OrdF {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for OrdF {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Exact shortest-path distances from `basepoint`.
pub fn distance_field(m: &ModelManifold, basepoint: usize) -> Result<VertexFunction> {
    if basepoint >= m.n_vertices() {
        return Err(LabError::Geometry(format!("basepoint {basepoint} out of range")));
    }
    Ok(VertexFunction::new(multi_source_distance(m, &[basepoint])))
}

fn base_coords(grid: &EndGrid) -> Vec<i32> {
    let mut c = vec![0i32; grid.dims()];
    c[0] = SHELL_RADIUS;
    c
}

/// Single-end fragment with its core marked but not removed.
pub fn build_end(spec: &EndSpec) -> Result<ModelManifold> {
    spec.validate()?;
    let grid = EndGrid::new(spec.clone());
    let n = grid.len();
    let r = spec.r as i32;
    let mut triplets = Vec::with_capacity(n * 2 * grid.dims());
    let mut boundary = vec![false; n];
    let mut core = vec![false; n];
    for v in 0..n {
        let c = grid.coords(v);
        boundary[v] = grid.linf(&c) == r;
        core[v] = grid.l1(&c) <= CORE_RADIUS;
        for nb in grid.neighbours(&c) {
            triplets.push((v, grid.index(&nb).unwrap(), 1.0));
        }
    }
    let adjacency = CsrMatrix::from_triplets(n, &triplets);
    let lengths = vec![spec.h; adjacency.nnz()];
    let base = grid.index(&base_coords(&grid)).unwrap();
    let mut m = ModelManifold {
        ends: vec![grid],
        tags: vec![Tag::End(0); n],
        mu: vec![1.0; n],
        adjacency,
        lengths,
        boundary,
        core,
        base_points: vec![base],
        dist: Vec::new(),
        local: (0..n as u32).collect(),
        end_maps: vec![(0..n as u32).collect()],
        hubs: Vec::new(),
        centre: None,
    };
    m.dist = vec![multi_source_distance(&m, &[base])];
    Ok(m)
}

/// Remove every fragment's core and glue the exposed shells to the junction.
pub fn connect_sum(fragments: &[ModelManifold]) -> Result<ModelManifold> {
    if fragments.is_empty() {
        return Err(LabError::Geometry("connect_sum needs at least one fragment".into()));
    }
    for f in fragments {
        if f.n_ends() != 1 || !f.is_fragment() {
            return Err(LabError::Geometry("connect_sum expects single-end fragments with a marked core".into()));
        }
    }
    let l = fragments.len();
    let mut tags = Vec::new();
    let mut local = Vec::new();
    let mut boundary = Vec::new();
    let mut end_maps = Vec::with_capacity(l);
    for (e, f) in fragments.iter().enumerate() {
        let mut map = vec![NONE; f.n_vertices()];
        for v in 0..f.n_vertices() {
            if !f.core[v] {
                map[v] = tags.len() as u32;
                tags.push(Tag::End(e));
                local.push(v as u32);
                boundary.push(f.boundary[v]);
            }
        }
        end_maps.push(map);
    }
    let hubs: Vec<usize> = (0..l).map(|i| tags.len() + i).collect();
    let centre = tags.len() + l;
    for _ in 0..=l {
        tags.push(Tag::Junction);
        local.push(NONE);
        boundary.push(false);
    }
    let n = tags.len();
    let mut triplets = Vec::new();
    let mut lens = Vec::new();
    let mut push = |a: usize, b: usize, h: f64, t: &mut Vec<(usize, usize, f64)>| {
        t.push((a, b, 1.0));
        t.push((b, a, 1.0));
        lens.push(((a, b), h));
        lens.push(((b, a), h));
    };
    for (e, f) in fragments.iter().enumerate() {
        let map = &end_maps[e];
        let h = f.ends[0].spec.h;
        for v in 0..f.n_vertices() {
            if map[v] == NONE {
                continue;
            }
            let (cols, _) = f.adjacency.row(v);
            for &w in cols {
                let w = w as usize;
                if w > v && map[w] != NONE {
                    push(map[v] as usize, map[w] as usize, h, &mut triplets);
                }
            }
        }
        let grid = &f.ends[0];
        for a in 0..grid.spec.n {
            for s in [-SHELL_RADIUS, SHELL_RADIUS] {
                let mut c = vec![0i32; grid.dims()];
                c[a] = s;
                let v = map[grid.index(&c).unwrap()] as usize;
                push(hubs[e], v, 1.0, &mut triplets);
            }
        }
    }
    for i in 0..l {
        push(hubs[i], centre, 1.0, &mut triplets);
        for j in (i + 1)..l {
            push(hubs[i], hubs[j], 1.0, &mut triplets);
        }
    }
    let adjacency = CsrMatrix::from_triplets(n, &triplets);
    lens.sort_by_key(|e| e.0);
    let lengths: Vec<f64> = lens.into_iter().map(|e| e.1).collect();
    debug_assert_eq!(lengths.len(), adjacency.nnz());
    let ends: Vec<EndGrid> = fragments.iter().map(|f| f.ends[0].clone()).collect();
    let base_points: Vec<usize> = ends
        .iter()
        .enumerate()
        .map(|(e, g)| end_maps[e][g.index(&base_coords(g)).unwrap()] as usize)
        .collect();
    let mut m = ModelManifold {
        ends,
        tags,
        mu: vec![1.0; n],
        adjacency,
        lengths,
        boundary,
        core: vec![false; n],
        base_points,
        dist: Vec::new(),
        local,
        end_maps,
        hubs,
        centre: Some(centre),
    };
    m.dist = m.base_points.iter().map(|&b| multi_source_distance(&m, &[b])).collect();
    Ok(m)
}

/// Build every fragment and glue them.
pub fn build_model(ends: &[EndSpec]) -> Result<ModelManifold> {
    let frags = ends.iter().map(build_end).collect::<Result<Vec<_>>>()?;
    connect_sum(&frags)
}

fn ramp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * (3.0 - 2.0 * s)
    }
}

/// Cutoff on end `i`: 0 for `dist[i] <= r0`, 1 for `dist[i] >= r1`, cubic in
/// between, and 0 off end `i`.
pub fn cutoff_phi(m: &ModelManifold, i: usize, r0: f64, r1: f64) -> Result<VertexFunction> {
    if i >= m.n_ends() {
        return Err(LabError::Geometry(format!("no end {i}")));
    }
    let rr = m.ends[i].spec.r as f64 * m.ends[i].spec.h;
    if !(0.0 <= r0 && r0 < r1 && r1 < rr - 2.0) {
        return Err(LabError::Geometry(format!(
            "collar [{r0}, {r1}] outside end {i} (need 0 <= r0 < r1 < R - 2 = {})",
            rr - 2.0
        )));
    }
    let d = &m.dist[i];
    let values = (0..m.n_vertices())
        .map(|v| {
            if m.tags[v] == Tag::End(i) {
                ramp((d[v] - r0) / (r1 - r0))
            } else {
                0.0
            }
        })
        .collect();
    Ok(VertexFunction {
        values,
        end: Some(i),
        dirichlet: false,
    })
}

/// Number of vertices (μ-mass) within graph distance `r` of `z`.
pub fn ball_volume(m: &ModelManifold, z: usize, r: f64) -> f64 {
    let d = multi_source_distance(m, &[z]);
    d.iter().zip(&m.mu).filter(|(x, _)| **x <= r).map(|(_, w)| w).sum()
}

/// End whose radius scales as `round(a R + b)` with the nominal radius `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledEnd {
    pub n: usize,
    #[serde(default)]
    pub factor: Vec<usize>,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    pub ends: Vec<ScaledEnd>,
}

impl ModelSpec {
    pub fn end_specs(&self, r: usize) -> Vec<EndSpec> {
        self.ends
            .iter()
            .map(|e| EndSpec::new(e.n, &e.factor, (e.a * r as f64 + e.b).round().max(0.0) as usize))
            .collect()
    }

    pub fn build(&self, r: usize) -> Result<ModelManifold> {
        build_model(&self.end_specs(r))
    }

    pub fn min_n(&self) -> usize {
        self.ends.iter().map(|e| e.n).min().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragment_counts() {
        assert_eq!(build_end(&EndSpec::new(3, &[], 4)).unwrap().n_vertices(), 729);
        assert_eq!(build_end(&EndSpec::new(3, &[5], 4)).unwrap().n_vertices(), 3645);
        assert!(build_end(&EndSpec::new(2, &[], 8)).is_err());
        assert!(build_end(&EndSpec::new(3, &[], 3)).is_err());
    }

    #[test]
    fn grid_index_roundtrip() {
        let g = EndGrid::new(EndSpec::new(3, &[4, 3], 4));
        for i in (0..g.len()).step_by(37) {
            assert_eq!(g.index(&g.coords(i)), Some(i));
        }
    }

    #[test]
    fn two_end_sum_is_connected_and_compact_junction() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(3, &[], 8)]).unwrap();
        assert!(m.dist[0].iter().all(|d| d.is_finite()));
        assert!(m.dist[0][m.base_points[1]] <= 8.0);
        assert_eq!(m.junction().len(), 3);
        let cnt: usize = (0..2).map(|e| m.vertices_of_end(e).len()).sum();
        assert_eq!(cnt + 3, m.n_vertices());
    }

    #[test]
    fn cutoff_endpoints_and_errors() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(3, &[], 8)]).unwrap();
        let phi = cutoff_phi(&m, 0, 2.0, 4.0).unwrap();
        assert_eq!(phi.values[m.base_points[0]], 0.0);
        assert!(m.vertices_of_end(1).iter().all(|&v| phi.values[v] == 0.0));
        assert!(cutoff_phi(&m, 0, 2.0, 6.5).is_err());
    }
}
