use super::Profile;
use crate::error::{exhausted, precondition, Result};
use crate::set::SortedIntSet;
use std::collections::BTreeSet;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GapClass {
    /// Larger than ℓ/4000.
    Large,
    /// Small and not divisible by d.
    NonDiv,
    /// Small, divisible, and at least the case-2 lower bound on its own.
    Big,
    /// Small, divisible, below the case-2 lower bound.
    Tiny,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ScanConfig {
    d: i128,
    ell: i128,
    n: i128,
    m: i128,
    c4000: i128,
    widest: bool,
}

impl ScanConfig {
    /// 2(4000m + ℓ); a gap or run sum g reaches ℓ'd/(2γ) iff g times this
    /// is at least ℓdn.
    fn half_gamma_den(&self) -> i128 {
        2 * (self.c4000 * self.m + self.ell)
    }

    fn reaches_case2(&self, g: i128) -> bool {
        g * self.half_gamma_den() >= self.ell * self.d * self.n
    }

    fn within_case2(&self, g: i128) -> bool {
        g * self.c4000 <= self.ell * self.d
    }

    fn classify(&self, g: i128) -> GapClass {
        if g * self.c4000 > self.ell {
            GapClass::Large
        } else if g % self.d != 0 {
            GapClass::NonDiv
        } else if self.reaches_case2(g) {
            GapClass::Big
        } else {
            GapClass::Tiny
        }
    }
}

/// An augmentation pair with its case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AugPair {
    /// d ∤ (hi − lo), hi − lo ≤ ℓ/4000.
    Case1 { lo: i64, hi: i64 },
    /// d | (hi − lo), ℓd/(8000γ) ≤ hi − lo ≤ ℓd/4000.
    Case2 { lo: i64, hi: i64 },
}

impl AugPair {
    pub fn lo(&self) -> i64 {
        match *self {
            AugPair::Case1 { lo, .. } | AugPair::Case2 { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> i64 {
        match *self {
            AugPair::Case1 { hi, .. } | AugPair::Case2 { hi, .. } => hi,
        }
    }
}

/// Sorted survivors as a linked list with per-gap classes kept current
/// under removal. The gap at position i is the one between i and its
/// surviving successor.
#[derive(Clone, Debug)]
pub struct GapScan {
    vals: Vec<i64>,
    prev: Vec<usize>,
    next: Vec<usize>,
    alive: Vec<bool>,
    live: usize,
    cfg: Option<ScanConfig>,
    nondiv: BTreeSet<usize>,
    big: BTreeSet<usize>,
    tiny: BTreeSet<usize>,
}

impl GapScan {
    pub fn new(a: &SortedIntSet) -> Self {
        let n = a.len();
        GapScan {
            vals: a.as_slice().to_vec(),
            prev: (0..n).map(|i| if i == 0 { NONE } else { i - 1 }).collect(),
            next: (0..n).map(|i| if i + 1 == n { NONE } else { i + 1 }).collect(),
            alive: vec![true; n],
            live: n,
            cfg: None,
            nondiv: BTreeSet::new(),
            big: BTreeSet::new(),
            tiny: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Surviving elements in increasing order.
    pub fn survivors(&self) -> Vec<i64> {
        self.vals
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Sets d and ℓ for the next round and rebuilds every class in O(|A|).
    pub fn configure(&mut self, d: i128, ell: i128, n: i128, m: i128, profile: &Profile) -> Result<()> {
        if d < 1 || ell < 1 || n < 1 || m < 1 {
            return Err(precondition(format!(
                "gap scan needs positive d, ℓ, n, m; got {d}, {ell}, {n}, {m}"
            )));
        }
        self.cfg = Some(ScanConfig {
            d,
            ell,
            n,
            m,
            c4000: profile.c4000,
            widest: !profile.is_paper(),
        });
        self.nondiv.clear();
        self.big.clear();
        self.tiny.clear();
        for i in 0..self.vals.len() {
            if self.alive[i] {
                self.classify_at(i);
            }
        }
        Ok(())
    }

    fn gap(&self, i: usize) -> Option<i128> {
        let j = self.next[i];
        (j != NONE).then(|| (self.vals[j] - self.vals[i]) as i128)
    }

    fn class_of(&self, i: usize) -> Option<GapClass> {
        let cfg = self.cfg.as_ref()?;
        self.gap(i).map(|g| cfg.classify(g))
    }

    fn unclassify(&mut self, i: usize) {
        self.nondiv.remove(&i);
        self.big.remove(&i);
        self.tiny.remove(&i);
    }

    fn classify_at(&mut self, i: usize) {
        self.unclassify(i);
        match self.class_of(i) {
            Some(GapClass::NonDiv) => {
                self.nondiv.insert(i);
            }
            Some(GapClass::Big) => {
                self.big.insert(i);
            }
            Some(GapClass::Tiny) => {
                self.tiny.insert(i);
            }
            Some(GapClass::Large) | None => {}
        }
    }

    fn position(&self, v: i64) -> Option<usize> {
        let i = self.vals.binary_search(&v).ok()?;
        self.alive[i].then_some(i)
    }

    /// Removes a surviving element, merging its two neighbouring gaps.
    pub fn remove(&mut self, v: i64) -> Result<()> {
        let i = self
            .position(v)
            .ok_or_else(|| precondition(format!("{v} is not a surviving element")))?;
        self.unclassify(i);
        let (p, q) = (self.prev[i], self.next[i]);
        if p != NONE {
            self.next[p] = q;
        }
        if q != NONE {
            self.prev[q] = p;
        }
        self.alive[i] = false;
        self.prev[i] = NONE;
        self.next[i] = NONE;
        self.live -= 1;
        if p != NONE {
            self.classify_at(p);
        }
        Ok(())
    }

    /// Recomputes all classes from scratch and compares with the maintained ones.
    pub fn audit(&self) -> bool {
        let mut nondiv = BTreeSet::new();
        let mut big = BTreeSet::new();
        let mut tiny = BTreeSet::new();
        let surv: Vec<usize> = (0..self.vals.len()).filter(|&i| self.alive[i]).collect();
        if surv.len() != self.live {
            return false;
        }
        for w in surv.windows(2) {
            if self.next[w[0]] != w[1] || self.prev[w[1]] != w[0] {
                return false;
            }
        }
        if let Some(cfg) = &self.cfg {
            for w in surv.windows(2) {
                let g = (self.vals[w[1]] - self.vals[w[0]]) as i128;
                match cfg.classify(g) {
                    GapClass::NonDiv => nondiv.insert(w[0]),
                    GapClass::Big => big.insert(w[0]),
                    GapClass::Tiny => tiny.insert(w[0]),
                    GapClass::Large => false,
                };
            }
        }
        nondiv == self.nondiv && big == self.big && tiny == self.tiny
    }

    fn divisible_small(&self, i: usize) -> bool {
        self.big.contains(&i) || self.tiny.contains(&i)
    }

    fn next_divisible(&self, from: usize) -> Option<usize> {
        let a = self.big.range(from..).next().copied();
        let b = self.tiny.range(from..).next().copied();
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    /// Shortest prefix of a run of tiny gaps whose sum reaches the case-2
    /// lower bound; returns the positions of its two ends.
    fn shortest_run(&self, cfg: &ScanConfig) -> Option<(usize, usize)> {
        let mut cursor = self.tiny.iter().next().copied();
        while let Some(start) = cursor {
            let mut sum = 0i128;
            let mut i = start;
            loop {
                sum += self.gap(i).unwrap();
                let j = self.next[i];
                if cfg.reaches_case2(sum) {
                    return cfg.within_case2(sum).then_some((start, j));
                }
                if !self.tiny.contains(&j) {
                    cursor = self.tiny.range(j + 1..).next().copied();
                    break;
                }
                i = j;
            }
        }
        None
    }

    /// Longest prefix of a run of small divisible gaps whose sum stays within
    /// the case-2 upper bound, provided it reaches the lower bound.
    fn widest_run(&self, cfg: &ScanConfig) -> Option<(usize, usize)> {
        let mut cursor = self.next_divisible(0);
        while let Some(start) = cursor {
            let mut sum = 0i128;
            let mut i = start;
            let mut best = None;
            loop {
                let g = self.gap(i).unwrap();
                if !cfg.within_case2(sum + g) {
                    break;
                }
                sum += g;
                let j = self.next[i];
                if cfg.reaches_case2(sum) {
                    best = Some((start, j));
                }
                if !self.divisible_small(j) {
                    break;
                }
                i = j;
            }
            if best.is_some() {
                return best;
            }
            cursor = self.next_divisible(i + 1);
        }
        None
    }
}

/// Finds one augmentation pair and removes its two endpoints from the scan.
///
/// A small non-divisible gap wins. Otherwise, with the exact profile, a single
/// divisible gap that is large enough, then the shortest run of tiny
/// divisible gaps whose sum is large enough, paired end to end. The tuned
/// profile instead takes the longest run that stays within the upper bound,
/// which lengthens the progression more per consumed pair.
pub fn find_aug_pair(scan: &mut GapScan) -> Result<AugPair> {
    let cfg = scan
        .cfg
        .ok_or_else(|| precondition("gap scan is not configured"))?;
    let ends = if let Some(&i) = scan.nondiv.iter().next() {
        Some((i, scan.next[i], true))
    } else if cfg.widest {
        scan.widest_run(&cfg).map(|(i, j)| (i, j, false))
    } else if let Some(&i) = scan.big.iter().next() {
        Some((i, scan.next[i], false))
    } else {
        scan.shortest_run(&cfg).map(|(i, j)| (i, j, false))
    };
    let Some((i, j, case1)) = ends else {
        return Err(exhausted("no augmentation pair among the surviving elements", None));
    };
    let (lo, hi) = (scan.vals[i], scan.vals[j]);
    let pair = if case1 {
        AugPair::Case1 { lo, hi }
    } else {
        AugPair::Case2 { lo, hi }
    };
    scan.remove(lo)?;
    scan.remove(hi)?;
    Ok(pair)
}

/// Pairs collected by [`extract_aug_pairs`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extracted {
    pub case1: Vec<(i64, i64)>,
    pub case2: Vec<(i64, i64)>,
    /// Which target was met: 1 for ⌈20000·d·log2 d⌉ case-1 pairs, 2 for
    /// ⌈4000γ⌉ case-2 pairs (or, tuned, enough case-2 growth for ℓ/2),
    /// `None` if the scan ran dry first.
    pub reached: Option<u8>,
    pub target1: Option<usize>,
    pub target2: usize,
}

/// Repeats [`find_aug_pair`] until one of the two targets is met.
pub fn extract_aug_pairs(
    scan: &mut GapScan,
    d: i128,
    ell: i128,
    n: i128,
    m: i128,
    profile: &Profile,
) -> Result<Extracted> {
    let log_d = super::log2_real(d as f64);
    let target1 = (d >= 2).then(|| (profile.c20000 as f64 * d as f64 * log_d).ceil() as usize);
    // 4000γ = (4000m + ℓ)/n
    let target2 = crate::arith::ceil_div(profile.c4000 * m + ell, n) as usize;
    if profile.is_paper() {
        if ell * n < profile.c16000 * m {
            return Err(precondition(format!(
                "ℓ ≥ 16000m/n fails: ℓ = {ell}, m = {m}, n = {n}"
            )));
        }
        let need = n as f64
            + profile.c40000 as f64 * d as f64 * log_d
            + profile.c8000 as f64 * (m as f64 / n as f64 + ell as f64 / (profile.c4000 * n) as f64);
        if (scan.len() as f64) < need {
            return Err(precondition(format!(
                "|A| ≥ n + 40000·d·log2 d + 8000γ fails: |A| = {}, bound {need:.1}",
                scan.len()
            )));
        }
    }
    scan.configure(d, ell, n, m, profile)?;
    let mut out = Extracted {
        target1,
        target2,
        ..Extracted::default()
    };
    let mut gain = 0i128;
    let floor = if profile.is_paper() { n as usize } else { 1 };
    while scan.len() > floor {
        let Ok(pair) = find_aug_pair(scan) else { break };
        match pair {
            AugPair::Case1 { lo, hi } => out.case1.push((lo, hi)),
            AugPair::Case2 { lo, hi } => {
                gain += (hi - lo) as i128 / d;
                out.case2.push((lo, hi));
            }
        }
        if target1.is_some_and(|t| out.case1.len() >= t) {
            out.reached = Some(1);
            break;
        }
        if out.case2.len() >= target2 || (!profile.is_paper() && 2 * gain >= ell) {
            out.reached = Some(2);
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    /// Exact selection rules with the tuned constants.
    fn exact_rules() -> Profile {
        Profile {
            kind: super::super::ProfileKind::Paper,
            ..Profile::tuned()
        }
    }

    #[test]
    fn case1_on_consecutive() {
        let v: Vec<i64> = (1..=100).collect();
        let mut scan = GapScan::new(&s(&v));
        scan.configure(2, 64, 25, 100, &Profile::tuned()).unwrap();
        let p = find_aug_pair(&mut scan).unwrap();
        assert_eq!(p, AugPair::Case1 { lo: 1, hi: 2 });
        assert_eq!(scan.len(), 98);
        assert!(scan.audit());
    }

    #[test]
    fn case2_run_rule() {
        // gaps all 2, d = 2: divisible and tiny; the run rule picks the
        // minimal prefix reaching ℓdn/(2(8m + ℓ)).
        let v: Vec<i64> = (1..=200).map(|i| 2 * i).collect();
        let (d, ell, n, m) = (2i128, 400i128, 100i128, 400i128);
        let mut scan = GapScan::new(&s(&v));
        scan.configure(d, ell, n, m, &exact_rules()).unwrap();
        let p = find_aug_pair(&mut scan).unwrap();
        // threshold 400·2·100/(2·3600) ≈ 11.1 → 6 gaps of 2 sum to 12
        assert_eq!(p, AugPair::Case2 { lo: 2, hi: 14 });
        let g = (p.hi() - p.lo()) as i128;
        assert!(g * 2 * (8 * m + ell) >= ell * d * n);
        assert!(g * 8 <= ell * d);
        assert!(scan.audit());
        // widest rule: longest prefix with sum ≤ ℓd/8 = 100
        let mut scan = GapScan::new(&s(&v));
        scan.configure(d, ell, n, m, &Profile::tuned()).unwrap();
        assert_eq!(find_aug_pair(&mut scan).unwrap(), AugPair::Case2 { lo: 2, hi: 102 });
        assert!(scan.audit());
    }

    #[test]
    fn big_gap_preferred_over_run() {
        let v = vec![1, 3, 5, 7, 47, 49];
        let mut scan = GapScan::new(&s(&v));
        // ℓ = 400: small means ≤ 50; d = 2; threshold ℓdn/(2(8m+ℓ)) with
        // m = 49, n = 100 is 80000/1584 ≈ 50.5 → nothing big, runs too short
        scan.configure(2, 400, 100, 49, &exact_rules()).unwrap();
        assert!(find_aug_pair(&mut scan).is_err());
        scan.configure(2, 400, 10, 49, &exact_rules()).unwrap();
        // threshold now ≈ 5.05: gap 40 is big
        assert_eq!(find_aug_pair(&mut scan).unwrap(), AugPair::Case2 { lo: 7, hi: 47 });
    }

    #[test]
    fn audit_after_random_removals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut v: Vec<i64> = (0..80).map(|_| rng.gen_range(1..400)).collect();
            v.sort_unstable();
            v.dedup();
            let a = s(&v);
            let mut scan = GapScan::new(&a);
            let d = rng.gen_range(1..5);
            scan.configure(d, rng.gen_range(8..200), 10, 400, &Profile::tuned()).unwrap();
            for _ in 0..30 {
                let surv = scan.survivors();
                if surv.is_empty() {
                    break;
                }
                let x = surv[rng.gen_range(0..surv.len())];
                scan.remove(x).unwrap();
                assert!(scan.audit());
            }
            while find_aug_pair(&mut scan).is_ok() {
                assert!(scan.audit());
            }
        }
    }

    #[test]
    fn extract_consecutive_d3() {
        let v: Vec<i64> = (1..=600).collect();
        let mut scan = GapScan::new(&s(&v));
        let e = extract_aug_pairs(&mut scan, 3, 64, 100, 600, &Profile::tuned()).unwrap();
        assert_eq!(e.reached, Some(1));
        assert_eq!(e.case1.len(), e.target1.unwrap());
        assert!(e.case1.iter().all(|&(lo, hi)| (hi - lo) % 3 != 0 && (hi - lo) * 8 <= 64));
        let mut ends: Vec<i64> = e.case1.iter().flat_map(|&(a, b)| [a, b]).collect();
        ends.sort_unstable();
        ends.dedup();
        assert_eq!(ends.len(), 2 * e.case1.len());
        assert!(scan.len() >= 100);
    }

    #[test]
    fn paper_precondition() {
        let v: Vec<i64> = (1..=600).collect();
        let mut scan = GapScan::new(&s(&v));
        assert!(extract_aug_pairs(&mut scan, 3, 64, 100, 600, &Profile::paper()).is_err());
    }
}
