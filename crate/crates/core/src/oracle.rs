//! Brute-force ground truth: exact k-fold sumsets, subset sums, unbounded coin
//! reachability. Deliberately naive and capped.

use crate::error::{Error, Result};
use crate::set::SortedIntSet;

/// Hard ceiling on every table size.
pub const ORACLE_CAP: i128 = 100_000_000;

/// Bit vector over [0, len).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    /// self | (other << s), truncated to len.
    fn or_shifted(&mut self, other: &Bitset, s: usize) {
        let (ws, bs) = (s / 64, s % 64);
        for i in (ws..self.words.len()).rev() {
            let j = i - ws;
            let mut w = other.words.get(j).copied().unwrap_or(0) << bs;
            if bs > 0 && j > 0 {
                w |= other.words[j - 1] >> (64 - bs);
            }
            self.words[i] |= w;
        }
        self.trim();
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

fn check_cap(what: &'static str, value: i128, cap: i128) -> Result<()> {
    let cap = cap.min(ORACLE_CAP);
    if value > cap {
        return Err(Error::CapExceeded { what, value, cap });
    }
    Ok(())
}

/// kA exactly, by k rounds of shift-or.
pub fn brute_kfold(a: &SortedIntSet, k: u64, cap: i128) -> Result<SortedIntSet> {
    let Some(max) = a.max() else {
        return Err(Error::EmptySet);
    };
    let top = k as i128 * max as i128;
    check_cap("k·max(A)", top, cap)?;
    let len = top as usize + 1;
    let mut cur = Bitset::new(len);
    cur.set(0);
    for _ in 0..k {
        let mut next = Bitset::new(len);
        for x in a.iter() {
            next.or_shifted(&cur, x as usize);
        }
        cur = next;
    }
    Ok(SortedIntSet::from_sorted_unchecked(cur.ones().map(|i| i as i64).collect()))
}

/// S(A) with one reconstructable subset per reachable sum.
#[derive(Clone, Debug)]
pub struct SubsetSums {
    elems: Vec<i64>,
    reach: Bitset,
    /// Index of the element that first reached each sum.
    pred: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl SubsetSums {
    pub fn contains(&self, t: i128) -> bool {
        t >= 0 && self.reach.get(t as usize)
    }

    pub fn reachable(&self) -> &Bitset {
        &self.reach
    }

    pub fn total(&self) -> i128 {
        self.reach.len() as i128 - 1
    }

    /// Distinct elements summing to t.
    pub fn subset(&self, t: i128) -> Option<Vec<i64>> {
        if !self.contains(t) {
            return None;
        }
        let mut out = Vec::new();
        let mut v = t as usize;
        while v > 0 {
            let i = self.pred[v];
            out.push(self.elems[i as usize]);
            v -= self.elems[i as usize] as usize;
        }
        out.reverse();
        Some(out)
    }
}

pub fn brute_subset_sums(a: &SortedIntSet, cap: i128) -> Result<SubsetSums> {
    let total = a.sum();
    check_cap("Σ_A", total, cap)?;
    let len = total as usize + 1;
    let mut reach = Bitset::new(len);
    reach.set(0);
    let mut pred = vec![NONE; len];
    for (i, x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let mut next = reach.clone();
        next.or_shifted(&reach, x as usize);
        for (wi, (n, o)) in next.words.iter().zip(&reach.words).enumerate() {
            let mut fresh = n & !o;
            while fresh != 0 {
                let b = fresh.trailing_zeros() as usize;
                fresh &= fresh - 1;
                pred[wi * 64 + b] = i as u32;
            }
        }
        reach = next;
    }
    Ok(SubsetSums {
        elems: a.as_slice().to_vec(),
        reach,
        pred,
    })
}

/// Which t ∈ [0, t_max] are nonnegative integer combinations of the coins.
#[derive(Clone, Debug)]
pub struct CoinTable {
    pub reach: Bitset,
    /// Largest unreachable t in the table, or −1 when every t is reachable.
    pub frobenius: i128,
}

pub fn brute_unbounded(coins: &SortedIntSet, t_max: i128) -> Result<CoinTable> {
    check_cap("t_max", t_max, 10_000_000)?;
    let len = t_max.max(0) as usize + 1;
    let mut reach = Bitset::new(len);
    reach.set(0);
    for t in 1..len {
        if coins.iter().any(|c| c > 0 && c as usize <= t && reach.get(t - c as usize)) {
            reach.set(t);
        }
    }
    let frobenius = (0..len).rev().find(|&t| !reach.get(t)).map_or(-1, |t| t as i128);
    Ok(CoinTable { reach, frobenius })
}

/// 2·a_{n−1}·⌊a_n/n⌋ − a_n for a sorted coin set with n ≥ 2.
pub fn erdos_graham_bound(coins: &SortedIntSet) -> Option<i128> {
    let v = coins.as_slice();
    let n = v.len();
    if n < 2 {
        return None;
    }
    let (an1, an) = (v[n - 2] as i128, v[n - 1] as i128);
    Some(2 * an1 * (an / n as i128) - an)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn kfold_examples() {
        assert_eq!(brute_kfold(&s(&[0, 1, 3]), 2, 1000).unwrap().as_slice(), &[0, 1, 2, 3, 4, 6]);
        assert_eq!(brute_kfold(&s(&[2, 5, 9]), 1, 1000).unwrap(), s(&[2, 5, 9]));
        assert_eq!(brute_kfold(&s(&[0]), 7, 1000).unwrap().as_slice(), &[0]);
        assert!(matches!(brute_kfold(&s(&[0, 100]), 20, 1000), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn subset_sum_examples() {
        let t = brute_subset_sums(&s(&[1, 2]), 100).unwrap();
        assert_eq!(t.reachable().ones().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        let t = brute_subset_sums(&s(&[5]), 100).unwrap();
        assert_eq!(t.reachable().ones().collect::<Vec<_>>(), vec![0, 5]);
        let t = brute_subset_sums(&s(&[3, 5, 7]), 100).unwrap();
        assert_eq!(t.subset(12), Some(vec![5, 7]));
        assert_eq!(t.subset(11), None);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(brute_unbounded(&s(&[3, 5]), 100).unwrap().frobenius, 7);
        assert_eq!(brute_unbounded(&s(&[1]), 100).unwrap().frobenius, -1);
        assert_eq!(brute_unbounded(&s(&[2, 3]), 100).unwrap().frobenius, 1);
        assert_eq!(erdos_graham_bound(&s(&[3, 5])), Some(7));
    }

    proptest! {
        #[test]
        fn kfold_two_matches_pairs(v in proptest::collection::btree_set(0i64..200, 1..50)) {
            let a = SortedIntSet::from_sorted(v.iter().copied().collect()).unwrap();
            let got: BTreeSet<i64> = brute_kfold(&a, 2, 1000).unwrap().iter().collect();
            let want: BTreeSet<i64> = v.iter().flat_map(|x| v.iter().map(move |y| x + y)).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn subsets_reconstruct(v in proptest::collection::btree_set(1i64..60, 1..12)) {
            let a = SortedIntSet::from_sorted(v.iter().copied().collect()).unwrap();
            let table = brute_subset_sums(&a, 10_000).unwrap();
            let elems: Vec<i64> = v.iter().copied().collect();
            let mut want = BTreeSet::new();
            for mask in 0u32..1 << elems.len() {
                want.insert((0..elems.len()).filter(|i| mask >> i & 1 == 1).map(|i| elems[i]).sum::<i64>());
            }
            let got: BTreeSet<i64> = table.reachable().ones().map(|x| x as i64).collect();
            prop_assert_eq!(&got, &want);
            for &t in &want {
                let sub = table.subset(t as i128).unwrap();
                prop_assert_eq!(sub.iter().sum::<i64>(), t);
                prop_assert!(sub.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn frobenius_below_erdos_graham(v in proptest::collection::btree_set(2i64..40, 2..5)) {
            let a = SortedIntSet::from_sorted(v.iter().copied().collect()).unwrap();
            prop_assume!(crate::set::gcd_all(&a).unwrap() == 1);
            let bound = erdos_graham_bound(&a).unwrap();
            let table = brute_unbounded(&a, bound.max(0) + a.max().unwrap() as i128 + 1).unwrap();
            prop_assert!(table.frobenius <= bound);
        }
    }
}
