//! Data-parallel helpers.
//!
//! With the `parallel` feature these run on the rayon pool; without it they
//! fall back to plain iterators. Every helper returns the same value in both
//! modes and for any worker count: maps keep index order, searches return
//! the lowest matching index, and reductions are only used with operators
//! that are associative and commutative (min/max with an index tie-break).

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over an index range.
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

/// Ordered map over a slice.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Lowest index in `range` satisfying `pred`.
pub fn find_first<F>(range: Range<usize>, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().find_first(|&i| pred(i))
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.into_iter().find(|&i| pred(i))
    }
}

/// Maximum of `f` over `range`; ties go to the lowest index. NaN values are
/// ignored.
pub fn argmax<F>(range: Range<usize>, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    fn better(a: Option<(usize, f64)>, b: Option<(usize, f64)>) -> Option<(usize, f64)> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                if x.1 > y.1 || (x.1 == y.1 && x.0 < y.0) {
                    Some(x)
                } else {
                    Some(y)
                }
            }
        }
    }
    let lift = |i: usize| {
        let v = f(i);
        if v.is_nan() {
            None
        } else {
            Some((i, v))
        }
    };
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(lift).reduce(|| None, better)
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(lift).fold(None, better)
    }
}

/// Minimum of `f` over `range` keyed by `(value, index)`.
pub fn argmin<F>(range: Range<usize>, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    argmax(range, |i| -f(i)).map(|(i, v)| (i, -v))
}

/// Maximum of `f` over `range`, `f64::NEG_INFINITY` for an empty range.
pub fn max_f64<F>(range: Range<usize>, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    argmax(range, f).map_or(f64::NEG_INFINITY, |(_, v)| v)
}

/// Splits `range` into fixed-size chunks, folds each chunk with `fold` into a
/// fresh accumulator, then merges accumulators with `merge`. `merge` must be
/// associative and commutative for the result to be schedule-independent.
pub fn fold_chunks<A, I, F, M>(range: Range<usize>, chunk: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    let start = range.start;
    let len = range.end.saturating_sub(range.start);
    let n_chunks = len.div_ceil(chunk);
    let run = |c: usize| {
        let mut acc = init();
        let lo = start + c * chunk;
        let hi = (lo + chunk).min(range.end);
        for i in lo..hi {
            fold(&mut acc, i);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    {
        (0..n_chunks).into_par_iter().map(run).reduce(&init, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_chunks).map(run).fold(init(), merge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let vals = [1.0, 3.0, 2.0, 3.0];
        assert_eq!(argmax(0..4, |i| vals[i]), Some((1, 3.0)));
        assert_eq!(argmin(0..4, |i| vals[i]), Some((0, 1.0)));
        assert_eq!(argmax(0..0, |_| 0.0), None);
    }

    #[test]
    fn find_first_is_lowest() {
        assert_eq!(find_first(0..10_000, |i| i % 97 == 96), Some(96));
        assert_eq!(find_first(0..10, |_| false), None);
    }

    #[test]
    fn fold_chunks_sums_counts() {
        let total = fold_chunks(0..1000, 7, || 0usize, |a, _| *a += 1, |a, b| a + b);
        assert_eq!(total, 1000);
    }
}
