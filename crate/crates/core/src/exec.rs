//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers fan out over rayon's current
//! pool whenever it has more than one thread; otherwise (or without the
//! feature) they run in order. Every helper returns the same value either
//! way: results are collected in input order and "first" always means the
//! lowest index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `f` with `jobs` worker threads available to the helpers below.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

/// Number of workers the helpers will use right now.
pub fn current_jobs() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(feature = "parallel")]
fn parallel() -> bool {
    current_jobs() > 1
}

pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if parallel() {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// `f` applied to the first item (by index) for which it returns `Some`.
pub fn find_first<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Option<R> + Sync + Send) -> Option<R> {
    #[cfg(feature = "parallel")]
    if parallel() {
        return items.par_iter().find_map_first(f);
    }
    items.iter().find_map(f)
}

pub fn any<T: Sync>(items: &[T], f: impl Fn(&T) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    if parallel() {
        return items.par_iter().any(f);
    }
    items.iter().any(f)
}

pub fn all<T: Sync>(items: &[T], f: impl Fn(&T) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    if parallel() {
        return items.par_iter().all(f);
    }
    items.iter().all(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_answers_with_any_worker_count() {
        let items: Vec<u32> = (0..500).collect();
        let run = || {
            (
                map(&items, |x| x * x),
                find_first(&items, |&x| (x % 97 == 96).then_some(x)),
                any(&items, |&x| x == 499),
                all(&items, |&x| x < 500),
            )
        };
        let seq = with_jobs(1, run);
        assert_eq!(with_jobs(4, run), seq);
        assert_eq!(seq.1, Some(96));
    }
}
