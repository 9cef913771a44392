//! Sweep helpers. With the `parallel` feature grid sweeps fan out through
//! rayon; without it they run sequentially. Reductions are always folded in
//! index order afterwards, so results are bit-identical either way.

#[cfg(feature = "parallel")]
pub fn sweep<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(|x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn sweep<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential reference path, kept unconditionally for benchmarking the
/// parallel sweep against it.
pub fn sweep_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Deterministic argmax over sweep results: ties resolve to the smallest
/// index regardless of evaluation order.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(j) if *v > values[j] => best = Some(i),
            _ => {}
        }
    }
    best
}
