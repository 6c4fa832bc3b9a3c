//! Execution strategy: rayon when the `parallel` feature is on, plain
//! iteration otherwise. Callers must produce order-independent results;
//! combined with per-stream RNG seeding this keeps both builds bit-identical.

use crate::error::Result;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Apply `f` to every item of `items` in place.
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    use rayon::prelude::*;
    items
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, item)| f(i, item));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Cap rayon's pool from `GBSVM_THREADS` if set. Call once at startup;
/// later calls (and calls after the pool already exists) are ignored.
/// No-op in sequential builds.
pub fn configure_threads_from_env() -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Ok(raw) = std::env::var("GBSVM_THREADS") {
        let n: usize = raw.parse().map_err(|_| {
            crate::error::GbsvmError::InvalidConfig(format!(
                "GBSVM_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
        if n == 0 {
            return Err(crate::error::GbsvmError::InvalidConfig(
                "GBSVM_THREADS must be a positive integer, got 0".into(),
            ));
        }
        // Ignore AlreadyInitialized: the first configuration wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let out = map_indexed(5, |i| i * i);
        assert_eq!(out, vec![0, 1, 4, 9, 16]);
    }

    #[test]
    fn for_each_mut_touches_every_item() {
        let mut xs = vec![10, 20, 30];
        for_each_mut(&mut xs, |i, x| *x += i);
        assert_eq!(xs, vec![10, 21, 32]);
    }
}
