//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run on the calling thread. Every reduction that feeds a reported
//! number is done sequentially over an ordered `Vec`, so results do not depend
//! on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy selectable at run time. `Parallel` degrades to
/// `Sequential` when the crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Ordered map over `0..n`.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Ordered map over a slice.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fill `out` in blocks of `chunk` entries; `f` receives the offset of the block.
    pub fn fill_chunks<F>(self, out: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(b, block)| f(b * chunk, block));
            return;
        }
        for (b, block) in out.chunks_mut(chunk).enumerate() {
            f(b * chunk, block);
        }
    }
}

/// Row-block size used by the sparse kernels.
pub const ROW_CHUNK: usize = 4096;

/// Deterministic dot product: fixed-size partial sums combined in order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut total = 0.0;
    for (ca, cb) in a.chunks(ROW_CHUNK).zip(b.chunks(ROW_CHUNK)) {
        let mut s = 0.0;
        for (x, y) in ca.iter().zip(cb) {
            s += x * y;
        }
        total += s;
    }
    total
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_is_ordered_under_both_policies() {
        let a = Exec::Parallel.map(1000, |i| i * i);
        let b = Exec::Sequential.map(1000, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn fill_chunks_covers_everything() {
        let mut v = vec![0.0; 10_001];
        Exec::Parallel.fill_chunks(&mut v, 333, |off, blk| {
            for (j, x) in blk.iter_mut().enumerate() {
                *x = (off + j) as f64;
            }
        });
        assert!(v.iter().enumerate().all(|(i, &x)| x == i as f64));
    }

    #[test]
    fn dot_is_blockwise_deterministic() {
        let a: Vec<f64> = (0..20_000).map(|i| (i as f64).sin()).collect();
        let d1 = dot(&a, &a);
        let d2 = dot(&a, &a);
        assert_eq!(d1.to_bits(), d2.to_bits());
        assert!((norm2(&a).powi(2) - d1).abs() < 1e-9 * d1);
    }
}
