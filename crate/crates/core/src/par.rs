//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon pool; without it every call runs sequentially. Both paths
//! return results in input order, so output never depends on the mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `Parallel` unless `jobs == 1`.
    pub fn from_jobs(jobs: usize) -> Self {
        if jobs == 1 {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map_slice<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Runs `f` over `0..n` and sums the per-index vectors elementwise.
    /// Partial sums are formed over fixed blocks and then added in block
    /// order, so the floating-point result is the same in both modes.
    pub fn sum_vectors<F>(self, n: usize, len: usize, f: F) -> Vec<f64>
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        const BLOCK: usize = 1024;
        let blocks = n.div_ceil(BLOCK);
        let partials = self.map_range(blocks, |b| {
            let mut acc = vec![0.0; len];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                f(i, &mut acc);
            }
            acc
        });
        partials.into_iter().fold(vec![0.0; len], |mut total, part| {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
            total
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = Execution::Sequential.map_range(1000, |i| i * i);
        let par = Execution::Parallel.map_range(1000, |i| i * i);
        assert_eq!(seq, par);
        let f = |i: usize, acc: &mut [f64]| acc[i % 3] += (i as f64).sqrt();
        assert_eq!(
            Execution::Sequential.sum_vectors(5000, 3, f),
            Execution::Parallel.sum_vectors(5000, 3, f)
        );
    }
}
