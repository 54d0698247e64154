//! Interior parametrix: the Dirichlet resolvent of a capped neighbourhood of
//! the junction, `{d_J ≤ cap_radius}`, inside `M`.

use crate::error::{LabError, Result};
use crate::geometry::ModelManifold;
use crate::linalg::krylov::cg;
use crate::linalg::CsrMatrix;
use crate::spectral::{laplacian, Boundary, SparseOperator};

#[derive(Debug, Clone)]
pub struct Cap {
    pub vertices: Vec<usize>,
    /// Vertex of `M` -> cap index (`u32::MAX` outside).
    pub pos: Vec<u32>,
    pub matrix: CsrMatrix,
}

impl Cap {
    /// Principal submatrix of the Dirichlet `op` on `{jd ≤ radius}`.
    pub fn new(op: &SparseOperator, jd: &[f64], radius: f64) -> Result<Self> {
        let vertices: Vec<usize> = op.active.iter().copied().filter(|&v| jd[v] <= radius).collect();
        if vertices.is_empty() {
            return Err(LabError::Geometry(format!("empty cap at radius {radius}")));
        }
        let mut pos = vec![u32::MAX; op.n_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i as u32;
        }
        let mut trip = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            let row = op.pos(v).unwrap();
            let (cols, vals) = op.matrix.row(row);
            for (&c, &x) in cols.iter().zip(vals) {
                let p = pos[op.active[c as usize]];
                if p != u32::MAX {
                    trip.push((i, p as usize, x));
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(vertices.len(), &trip);
        Ok(Cap { vertices, pos, matrix })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `(Δ_cap + k²)^{-1} (f|_cap)`, extended by zero (full length).
    pub fn solve(&self, k: f64, f: &[f64], tol: f64) -> Result<Vec<f64>> {
        let b: Vec<f64> = self.vertices.iter().map(|&v| f[v]).collect();
        let x = cg(&self.matrix, k * k, &b, None, tol, 20_000)?.x;
        let mut out = vec![0.0; f.len()];
        for (i, &v) in self.vertices.iter().enumerate() {
            out[v] = x[i];
        }
        Ok(out)
    }
}

/// `G_int` at energy `k`.
pub struct InteriorParametrix {
    pub cap: Cap,
    pub k: f64,
    pub tol: f64,
}

impl InteriorParametrix {
    pub fn column(&self, y: usize, n_vertices: usize) -> Result<Vec<f64>> {
        let mut d = vec![0.0; n_vertices];
        d[y] = 1.0;
        self.cap.solve(self.k, &d, self.tol)
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.cap.solve(self.k, f, self.tol)
    }
}

pub fn interior_parametrix(m: &ModelManifold, k: f64, cap_radius: f64) -> Result<InteriorParametrix> {
    if !(k >= 0.0) {
        return Err(LabError::Domain(format!("k must be >= 0, got {k}")));
    }
    let op = laplacian(m, Boundary::Dirichlet);
    let cap = Cap::new(&op, &m.junction_distance(), cap_radius)?;
    Ok(InteriorParametrix { cap, k, tol: 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_model, multi_source_distance, EndSpec};
    use crate::spectral::resolvent::resolvent_active;

    #[test]
    fn kernel_is_symmetric_and_supported() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(4, &[], 6)]).unwrap();
        let g = interior_parametrix(&m, 0.4, 4.0).unwrap();
        let (a, b) = (m.centre.unwrap(), m.base_points[1]);
        let ca = g.column(a, m.n_vertices()).unwrap();
        let cb = g.column(b, m.n_vertices()).unwrap();
        assert!((ca[b] - cb[a]).abs() < 1e-10 * ca[b].abs());
        let d = multi_source_distance(&m, &[a]);
        // cap diameter bound: 2 * radius + diam(K)
        assert!((0..m.n_vertices()).all(|z| d[z] <= 10.0 || ca[z] == 0.0));
    }

    #[test]
    fn near_diagonal_agrees_with_full_resolvent() {
        let m = build_model(&[EndSpec::new(3, &[], 8), EndSpec::new(3, &[], 8)]).unwrap();
        let k = 1.0;
        let g = interior_parametrix(&m, k, 4.0).unwrap();
        let op = laplacian(&m, Boundary::Dirichlet);
        let y = m.centre.unwrap();
        let full = op.extend(&resolvent_active(&op, k, &op.delta(y), None, 1e-12).unwrap());
        let col = g.column(y, m.n_vertices()).unwrap();
        let d = multi_source_distance(&m, &[y]);
        for z in 0..m.n_vertices() {
            if d[z] <= 2.0 {
                assert!((col[z] - full[z]).abs() <= 0.1 * full[z], "{z}: {} {}", col[z], full[z]);
            }
        }
    }
}
