use crate::set::SortedIntSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// The progression {start + j·diff : 0 ≤ j ≤ length}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArithProgression {
    pub start: i128,
    pub diff: i128,
    pub length: i128,
}

impl ArithProgression {
    pub fn new(start: i128, diff: i128, length: i128) -> Self {
        assert!(diff >= 1, "progression diff must be positive");
        assert!(length >= 0, "progression length must be nonnegative");
        ArithProgression {
            start,
            diff,
            length,
        }
    }

    pub fn term(&self, j: i128) -> i128 {
        self.start + j * self.diff
    }

    pub fn last(&self) -> i128 {
        self.term(self.length)
    }

    /// Index of `v` in the progression, if it is a term.
    pub fn index_of(&self, v: i128) -> Option<i128> {
        let off = v - self.start;
        if off < 0 || off % self.diff != 0 {
            return None;
        }
        let j = off / self.diff;
        (j <= self.length).then_some(j)
    }

    /// First `length + 1` terms only.
    pub fn truncated(&self, length: i128) -> Self {
        assert!(length <= self.length);
        ArithProgression::new(self.start, self.diff, length)
    }
}

impl fmt::Display for ArithProgression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.start, self.diff, self.length)
    }
}

/// A multiset of base-set values certifying that `target` lies in kA
/// (`fold_budget = k > 0`) or in S(A) (`fold_budget = 0`, all counts 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactSolution {
    pub parts: Vec<(i64, u64)>,
    pub target: i128,
    pub fold_budget: u64,
}

impl CompactSolution {
    pub fn is_subset_mode(&self) -> bool {
        self.fold_budget == 0
    }

    pub fn total_count(&self) -> u128 {
        self.parts.iter().map(|&(_, c)| c as u128).sum()
    }

    pub fn value_sum(&self) -> i128 {
        self.parts.iter().map(|&(v, c)| v as i128 * c as i128).sum()
    }

    /// Builds a sumset-mode solution, merging equal values and sorting.
    pub fn multiset(parts: impl IntoIterator<Item = (i64, u64)>, target: i128, k: u64) -> Self {
        assert!(k > 0);
        CompactSolution {
            parts: merge_parts(parts),
            target,
            fold_budget: k,
        }
    }

    /// Builds a subset-mode solution from distinct elements.
    pub fn subset(elems: impl IntoIterator<Item = i64>, target: i128) -> Self {
        let mut v: Vec<i64> = elems.into_iter().collect();
        v.sort_unstable();
        CompactSolution {
            parts: v.into_iter().map(|x| (x, 1)).collect(),
            target,
            fold_budget: 0,
        }
    }
}

/// Sorts by value, sums counts of equal values and drops zero counts.
pub fn merge_parts(parts: impl IntoIterator<Item = (i64, u64)>) -> Vec<(i64, u64)> {
    let mut m: BTreeMap<i64, u64> = BTreeMap::new();
    for (v, c) in parts {
        if c > 0 {
            *m.entry(v).or_default() += c;
        }
    }
    m.into_iter().collect()
}

/// Why a certificate was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SumMismatch,
    BudgetExceeded,
    NotInBase,
    ZeroCount,
    RepeatedElement,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::SumMismatch => "sum_mismatch",
            RejectReason::BudgetExceeded => "budget_exceeded",
            RejectReason::NotInBase => "not_in_base",
            RejectReason::ZeroCount => "zero_count",
            RejectReason::RepeatedElement => "repeated_element",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub reason: Option<RejectReason>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict {
            ok: true,
            reason: None,
        }
    }

    fn fail(r: RejectReason) -> Self {
        Verdict {
            ok: false,
            reason: Some(r),
        }
    }
}

/// Checks a certificate against its base set. Never trusts the producer.
pub fn verify_solution(a: &SortedIntSet, sol: &CompactSolution) -> Verdict {
    let mut total: u128 = 0;
    let mut sum: i128 = 0;
    for &(v, c) in &sol.parts {
        if c == 0 {
            return Verdict::fail(RejectReason::ZeroCount);
        }
        if !a.contains(v) {
            return Verdict::fail(RejectReason::NotInBase);
        }
        total += c as u128;
        sum += v as i128 * c as i128;
    }
    if sol.fold_budget == 0 {
        if sol.parts.iter().any(|&(_, c)| c != 1) {
            return Verdict::fail(RejectReason::RepeatedElement);
        }
        let mut vals: Vec<i64> = sol.parts.iter().map(|&(v, _)| v).collect();
        vals.sort_unstable();
        if vals.windows(2).any(|w| w[0] == w[1]) {
            return Verdict::fail(RejectReason::RepeatedElement);
        }
    } else if total > sol.fold_budget as u128 {
        return Verdict::fail(RejectReason::BudgetExceeded);
    }
    if sum != sol.target {
        return Verdict::fail(RejectReason::SumMismatch);
    }
    Verdict::pass()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn verify_examples() {
        let a = s(&[0, 1, 3]);
        let ok = CompactSolution {
            parts: vec![(3, 1), (1, 1)],
            target: 4,
            fold_budget: 2,
        };
        assert!(verify_solution(&a, &ok).ok);
        let over = CompactSolution {
            parts: vec![(3, 2)],
            target: 6,
            fold_budget: 1,
        };
        assert_eq!(
            verify_solution(&a, &over).reason,
            Some(RejectReason::BudgetExceeded)
        );
        let missing = CompactSolution {
            parts: vec![(2, 1)],
            target: 2,
            fold_budget: 1,
        };
        assert_eq!(
            verify_solution(&a, &missing).reason,
            Some(RejectReason::NotInBase)
        );
    }

    #[test]
    fn subset_mode_rejects_reuse() {
        let a = s(&[1, 2, 5]);
        let twice = CompactSolution {
            parts: vec![(2, 2)],
            target: 4,
            fold_budget: 0,
        };
        assert!(!verify_solution(&a, &twice).ok);
        let split = CompactSolution {
            parts: vec![(2, 1), (2, 1)],
            target: 4,
            fold_budget: 0,
        };
        assert!(!verify_solution(&a, &split).ok);
        assert!(verify_solution(&a, &CompactSolution::subset([1, 5], 6)).ok);
    }

    #[test]
    fn progression_indexing() {
        let p = ArithProgression::new(6, 2, 12);
        assert_eq!(p.last(), 30);
        assert_eq!(p.index_of(8), Some(1));
        assert_eq!(p.index_of(9), None);
        assert_eq!(p.index_of(32), None);
    }
}
