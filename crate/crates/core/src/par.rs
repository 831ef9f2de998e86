//! Data-parallel helpers. With the `parallel` feature enabled the work
//! runs on rayon unless the caller asks for the sequential path; without
//! the feature everything is sequential. Results are deterministic
//! either way: order is preserved and searches return the first match.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}

/// First `Some` produced by `f`, in input order.
pub fn find_map_first<T, U, F>(items: &[T], parallel: bool, f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().filter_map(&f).find_first(|_| true);
        }
    }
    let _ = parallel;
    items.iter().find_map(f)
}
