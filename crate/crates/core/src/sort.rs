//! Ordering helpers shared by the norms, screening rules and KKT checks.
//!
//! Every sort here is stable: ties keep the lower original index first, which
//! keeps the screening sets deterministic.

use std::cmp::Ordering;

fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Permutation that sorts `x` into decreasing order.
///
/// `perm[k]` is the original index of the `k`-th largest entry.
pub fn argsort_desc(x: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&i, &j| desc(x[i], x[j]));
    perm
}

/// Permutation that sorts `x` into decreasing order of absolute value.
pub fn argsort_abs_desc(x: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&i, &j| desc(x[i].abs(), x[j].abs()));
    perm
}

/// Stable descending sort returning the sorted values and the permutation
/// from sorted position to original index.
pub fn sort_desc_with_index(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let perm = argsort_desc(x);
    let sorted = perm.iter().map(|&i| x[i]).collect();
    (sorted, perm)
}

/// Stable descending sort of `|x|`.
pub fn sort_abs_desc_with_index(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let perm = argsort_abs_desc(x);
    let sorted = perm.iter().map(|&i| x[i].abs()).collect();
    (sorted, perm)
}

/// Inverse of a permutation: `inv[perm[k]] = k`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

pub(crate) fn cumsum(x: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    x.into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

pub(crate) fn is_nonincreasing(x: &[f64], tol: f64) -> bool {
    x.windows(2).all(|w| w[1] <= w[0] + tol)
}
