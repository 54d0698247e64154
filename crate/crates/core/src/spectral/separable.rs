//! Exact spectral calculus for one Dirichlet end fragment `cube × torus`:
//! the interior Laplacian is a Kronecker sum of Dirichlet paths (sine modes)
//! and cycles (real Fourier modes).

use crate::exec::Exec;
use crate::geometry::{EndGrid, EndSpec, ModelManifold, Tag};
use crate::special_fn::cycle_eigenvalue;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
struct Axis {
    m: usize,
    /// `q[i * m + j] = ψ_j(i)`, orthonormal columns.
    q: Vec<f64>,
    lam: Vec<f64>,
}

fn path_axis(m: usize) -> Axis {
    let s = (2.0 / (m as f64 + 1.0)).sqrt();
    let mut q = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            q[i * m + j] = s * (PI * (i + 1) as f64 * (j + 1) as f64 / (m as f64 + 1.0)).sin();
        }
    }
    let lam = (0..m)
        .map(|j| 2.0 - 2.0 * (PI * (j + 1) as f64 / (m as f64 + 1.0)).cos())
        .collect();
    Axis { m, q, lam }
}

fn cycle_axis(l: usize) -> Axis {
    let mut q = vec![0.0; l * l];
    let mut lam = vec![0.0; l];
    let lf = l as f64;
    let mut col = 0;
    let set = |col: usize, j: usize, f: &dyn Fn(usize) -> f64, q: &mut Vec<f64>, lam: &mut Vec<f64>| {
        for y in 0..l {
            q[y * l + col] = f(y);
        }
        lam[col] = cycle_eigenvalue(l, j);
    };
    set(col, 0, &|_| 1.0 / lf.sqrt(), &mut q, &mut lam);
    col += 1;
    let mut j = 1;
    while 2 * j < l {
        let a = 2.0 * PI * j as f64 / lf;
        set(col, j, &|y| (2.0 / lf).sqrt() * (a * y as f64).cos(), &mut q, &mut lam);
        set(col + 1, j, &|y| (2.0 / lf).sqrt() * (a * y as f64).sin(), &mut q, &mut lam);
        col += 2;
        j += 1;
    }
    if l % 2 == 0 && l > 1 {
        set(col, l / 2, &|y| if y % 2 == 0 { 1.0 } else { -1.0 } / lf.sqrt(), &mut q, &mut lam);
    }
    Axis { m: l, q, lam }
}

#[derive(Debug, Clone)]
pub struct SeparableEnd {
    pub spec: EndSpec,
    axes: Vec<Axis>,
    shape: Vec<usize>,
    lam_total: Vec<f64>,
    exec: Exec,
}

impl SeparableEnd {
    pub fn new(spec: &EndSpec) -> Self {
        let m = 2 * spec.r - 1;
        let mut axes: Vec<Axis> = (0..spec.n).map(|_| path_axis(m)).collect();
        axes.extend(spec.factor.iter().map(|&l| cycle_axis(l)));
        let shape: Vec<usize> = axes.iter().map(|a| a.m).collect();
        let n: usize = shape.iter().product();
        let mut lam_total = vec![0.0; n];
        let mut stride = n;
        for ax in &axes {
            stride /= ax.m;
            for (idx, l) in lam_total.iter_mut().enumerate() {
                *l += ax.lam[(idx / stride) % ax.m];
            }
        }
        SeparableEnd {
            spec: spec.clone(),
            axes,
            shape,
            lam_total,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn len(&self) -> usize {
        self.lam_total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lam_total.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lam_total
    }

    pub fn lambda_min(&self) -> f64 {
        self.axes.iter().map(|a| a.lam.iter().cloned().fold(f64::INFINITY, f64::min)).sum()
    }

    pub fn lambda_max(&self) -> f64 {
        self.axes.iter().map(|a| a.lam.iter().cloned().fold(0.0, f64::max)).sum()
    }

    /// Tensor index of fragment coordinates, `None` on the ring.
    pub fn tensor_index(&self, c: &[i32]) -> Option<usize> {
        let r = self.spec.r as i32;
        let mut idx = 0;
        for (a, &m) in self.shape.iter().enumerate() {
            let v = if a < self.spec.n {
                if c[a].abs() >= r {
                    return None;
                }
                (c[a] + r - 1) as usize
            } else {
                c[a].rem_euclid(m as i32) as usize
            };
            idx = idx * m + v;
        }
        Some(idx)
    }

    fn transform(&self, x: &[f64], forward: bool) -> Vec<f64> {
        let mut cur = x.to_vec();
        let n = cur.len();
        let mut inner = n;
        for ax in &self.axes {
            let m = ax.m;
            inner /= m;
            let block = m * inner;
            let mut out = vec![0.0; n];
            let src = &cur;
            self.exec.fill_chunks(&mut out, block, |off, ob| {
                let ib = &src[off..off + block];
                for j in 0..m {
                    let orow = &mut ob[j * inner..(j + 1) * inner];
                    for i in 0..m {
                        let q = if forward { ax.q[i * m + j] } else { ax.q[j * m + i] };
                        if q == 0.0 {
                            continue;
                        }
                        let irow = &ib[i * inner..(i + 1) * inner];
                        for (o, v) in orow.iter_mut().zip(irow) {
                            *o += q * v;
                        }
                    }
                }
            });
            cur = out;
        }
        cur
    }

    /// `f(Δ_end) x` for `x` in tensor layout.
    pub fn apply_fn<F: Fn(f64) -> f64>(&self, x: &[f64], f: F) -> Vec<f64> {
        let mut c = self.transform(x, true);
        for (ci, &l) in c.iter_mut().zip(&self.lam_total) {
            *ci *= f(l);
        }
        self.transform(&c, false)
    }

    /// `f(Δ_end) δ_idx`; the forward transform of a point mass is a tensor
    /// product of eigenvector rows.
    pub fn apply_fn_delta<F: Fn(f64) -> f64>(&self, idx: usize, f: F) -> Vec<f64> {
        let mut rem = idx;
        let mut coords = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            coords[a] = rem % self.shape[a];
            rem /= self.shape[a];
        }
        let mut c = vec![1.0];
        for (ax, &i) in self.axes.iter().zip(&coords) {
            let row = &ax.q[i * ax.m..(i + 1) * ax.m];
            let mut next = Vec::with_capacity(c.len() * ax.m);
            for &v in &c {
                next.extend(row.iter().map(|q| v * q));
            }
            c = next;
        }
        for (ci, &l) in c.iter_mut().zip(&self.lam_total) {
            *ci *= f(l);
        }
        self.transform(&c, false)
    }

    /// `(Δ_end + k²)^{-1} x`.
    pub fn resolvent(&self, k: f64, x: &[f64]) -> Vec<f64> {
        let k2 = k * k;
        self.apply_fn(x, |l| 1.0 / (l + k2))
    }

    /// On-diagonal heat kernel `e^{-tΔ}(c, c)` as a product of axis sums.
    pub fn heat_diagonal(&self, c: &[i32], t: f64) -> f64 {
        let idx = match self.tensor_index(c) {
            Some(i) => i,
            None => return 0.0,
        };
        let mut rem = idx;
        let mut coords = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            coords[a] = rem % self.shape[a];
            rem /= self.shape[a];
        }
        self.axes
            .iter()
            .zip(&coords)
            .map(|(ax, &i)| {
                (0..ax.m)
                    .map(|j| (-t * ax.lam[j]).exp() * ax.q[i * ax.m + j].powi(2))
                    .sum::<f64>()
            })
            .product()
    }
}

/// Correspondence between an end of `M` and the tensor layout of its
/// isolated fragment.
#[derive(Debug, Clone)]
pub struct EndEmbedding {
    pub end: usize,
    /// Vertex of `M` -> tensor index (`u32::MAX` off the end or on the ring).
    pub to_tensor: Vec<u32>,
    /// Tensor index -> vertex of `M` (`u32::MAX` inside the removed core).
    pub to_vertex: Vec<u32>,
}

impl EndEmbedding {
    pub fn new(m: &ModelManifold, sep: &SeparableEnd, end: usize) -> Self {
        let grid: &EndGrid = &m.ends[end];
        let mut to_tensor = vec![u32::MAX; m.n_vertices()];
        let mut to_vertex = vec![u32::MAX; sep.len()];
        for v in 0..m.n_vertices() {
            if m.tags[v] == Tag::End(end) {
                let c = grid.coords(m.local[v] as usize);
                if let Some(t) = sep.tensor_index(&c) {
                    to_tensor[v] = t as u32;
                    to_vertex[t] = v as u32;
                }
            }
        }
        EndEmbedding { end, to_tensor, to_vertex }
    }

    /// Scatter a full-length vertex function (end part only) into tensor layout.
    pub fn scatter(&self, f: &[f64], len: usize) -> Vec<f64> {
        let mut x = vec![0.0; len];
        for (v, &t) in self.to_tensor.iter().enumerate() {
            if t != u32::MAX {
                x[t as usize] = f[v];
            }
        }
        x
    }

    /// Gather tensor values back onto the end's vertices of `M` (zero elsewhere).
    pub fn gather(&self, x: &[f64], n_vertices: usize) -> Vec<f64> {
        let mut f = vec![0.0; n_vertices];
        for (t, &v) in self.to_vertex.iter().enumerate() {
            if v != u32::MAX {
                f[v as usize] = x[t];
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_end;
    use crate::linalg::krylov::cg;
    use crate::spectral::{laplacian, Boundary};

    #[test]
    fn axes_are_orthonormal() {
        for ax in [path_axis(7), cycle_axis(1), cycle_axis(2), cycle_axis(5), cycle_axis(6)] {
            let m = ax.m;
            for a in 0..m {
                for b in 0..m {
                    let d: f64 = (0..m).map(|i| ax.q[i * m + a] * ax.q[i * m + b]).sum();
                    assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn resolvent_matches_cg_on_fragment() {
        let spec = EndSpec::new(3, &[3], 4);
        let frag = build_end(&spec).unwrap();
        let op = laplacian(&frag, Boundary::Dirichlet);
        let sep = SeparableEnd::new(&spec);
        let emb = EndEmbedding::new(&frag, &sep, 0);
        let z = frag.base_points[0];
        let col = sep.resolvent(0.3, &emb.scatter(&{
            let mut d = vec![0.0; frag.n_vertices()];
            d[z] = 1.0;
            d
        }, sep.len()));
        let full = emb.gather(&col, frag.n_vertices());
        let want = cg(&op, 0.09, &op.delta(z), None, 1e-13, 5000).unwrap().x;
        let got = op.restrict(&full);
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        let t = emb.to_tensor[z] as usize;
        let col2 = sep.apply_fn_delta(t, |l| 1.0 / (l + 0.09));
        let err2 = col.iter().zip(&col2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err2 < 1e-13, "{err2}");
    }
}
