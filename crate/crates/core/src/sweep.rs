//! Grid evaluation with a selectable execution strategy.
//!
//! Every sweep in the crate (moment grids, φ tables, random trials) goes through
//! [`map`], which preserves input order. Any reduction over the results is done
//! afterwards by the caller in that fixed order, so parallel and sequential runs
//! produce bit-identical output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls back
    /// to sequential evaluation.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this strategy actually runs on more than one thread in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to every item, returning results in input order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Like [`map`] over the index range `0..n`.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in `ln`.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0, "geomspace needs positive endpoints");
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + step * i as f64).exp(),
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map(Execution::Sequential, &xs, |x| x * x);
        let par = map(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn grids_hit_their_endpoints() {
        let g = geomspace(1e-3, 1e3, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[20], 1e3);
        assert!((g[10] - 1.0).abs() < 1e-14);
        let l = linspace(0.0, 50.0, 101);
        assert_eq!(l[100], 50.0);
        assert_eq!(l[1], 0.5);
    }
}
