//! Runs independent jobs (replications, sweep points) and returns their
//! results in index order. With the `parallel` feature the jobs are spread
//! over rayon's pool; without it they run one after another. Either way the
//! output is identical.

/// Sequential execution, always available.
pub mod sequential {
    pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> T,
    {
        (0..n).map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub mod parallel {
    use rayon::prelude::*;

    pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub use parallel::map_indexed;

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    sequential::map_indexed(n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        let v = map_indexed(100, |i| i * i);
        assert_eq!(v, sequential::map_indexed(100, |i| i * i));
        assert_eq!(v[7], 49);
    }
}
