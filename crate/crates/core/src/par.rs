//! Execution policy for the data-parallel loops (oracle grids, pencil
//! grids, multistart runs). Results never depend on the policy: every
//! parallel map preserves index order and every reduction breaks ties by
//! index.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f).collect()` under the given policy.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Minimum of `f(i)` over `0..n`, ignoring `None`; ties go to the lowest
/// index so the answer is schedule independent.
pub fn argmin_indexed<T, F>(exec: Execution, n: usize, f: F) -> Option<(usize, f64, T)>
where
    T: Send,
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
{
    fn better<T>(
        a: Option<(usize, f64, T)>,
        b: Option<(usize, f64, T)>,
    ) -> Option<(usize, f64, T)> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    }

    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .map(|i| f(i).map(|(v, t)| (i, v, t)))
                .reduce(|| None, better);
        }
    }
    let _ = exec;
    (0..n)
        .map(|i| f(i).map(|(v, t)| (i, v, t)))
        .fold(None, better)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| ((i * 7919) % 101) as f64;
        let a = map_indexed(Execution::Sequential, 500, f);
        let b = map_indexed(Execution::Parallel, 500, f);
        assert_eq!(a, b);
        let ma = argmin_indexed(Execution::Sequential, 500, |i| Some((f(i), i)));
        let mb = argmin_indexed(Execution::Parallel, 500, |i| Some((f(i), i)));
        assert_eq!(ma, mb);
        assert_eq!(ma.unwrap().1, 0.0);
    }
}
