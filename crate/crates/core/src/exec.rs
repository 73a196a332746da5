//! Execution policy for the data-parallel loops (sweeps, quadrature grids,
//! deformation lists).
//!
//! Without the `parallel` feature every policy runs sequentially. Results
//! always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    #[cfg(feature = "parallel")]
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if self.is_parallel() {
            items.par_iter().map(f).collect()
        } else {
            items.iter().map(f).collect()
        }
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..n`, preserving order.
    #[cfg(feature = "parallel")]
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        if self.is_parallel() {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_preserve_order() {
        let items: Vec<u32> = (0..100).collect();
        let seq = Exec::Sequential.map(&items, |x| x * 3);
        let par = Exec::Parallel.map(&items, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(Exec::Parallel.map_range(50, |i| i * i)[7], 49);
    }
}
