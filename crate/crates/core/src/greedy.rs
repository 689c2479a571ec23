//! Greedy sumsets. For sorted A and any B, A ⊕ B keeps the sums a + b where
//! a is the largest element of A not exceeding a + b. Membership is a single
//! binary search, which is what makes k-fold queries cheap.

use crate::error::{Error, Result};
use crate::set::SortedIntSet;
use crate::solution::CompactSolution;

/// Materializes A ⊕ B = { a_i + b : b ∈ B, 0 ≤ b < a_{i+1} − a_i }, a_{n+1} = ∞.
pub fn greedy_sumset(a: &SortedIntSet, b: &SortedIntSet) -> Result<SortedIntSet> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let av = a.as_slice();
    let mut out = Vec::new();
    for (i, &ai) in av.iter().enumerate() {
        let limit = av.get(i + 1).map(|&nx| nx - ai);
        for bv in b.iter() {
            if bv < 0 {
                continue;
            }
            if let Some(l) = limit {
                if bv >= l {
                    break;
                }
            }
            out.push(ai + bv);
        }
    }
    // the ranges [a_i, a_{i+1}) are disjoint and increasing, so `out` is sorted
    Ok(SortedIntSet::from_sorted_unchecked(out))
}

/// Returns (a, z − a) when z ∈ A ⊕ B, with a the largest element of A at most z.
pub fn greedy_membership(a: &SortedIntSet, b: &SortedIntSet, z: i128) -> Option<(i64, i64)> {
    let x = a.largest_at_most(z)?;
    let rest = z - x as i128;
    let rest = i64::try_from(rest).ok()?;
    b.contains(rest).then_some((x, rest))
}

/// Answers z ∈ k⊗A by k greedy picks; returns the picks compactly.
///
/// Repeated picks of the same value are emitted in one step: once a is the
/// largest element at most the residual r, it stays so while r ≥ a.
pub fn kfold_greedy_query(a: &SortedIntSet, k: u64, z: i128) -> Option<CompactSolution> {
    if k == 0 || z < 0 {
        return None;
    }
    let mut parts: Vec<(i64, u64)> = Vec::new();
    let mut r = z;
    let mut left = k;
    while left > 0 {
        let x = a.largest_at_most(r)?;
        let times = if x == 0 {
            left
        } else {
            (r / x as i128).min(left as i128) as u64
        };
        parts.push((x, times));
        r -= x as i128 * times as i128;
        left -= times;
    }
    (r == 0).then(|| CompactSolution::multiset(parts, z, k))
}
