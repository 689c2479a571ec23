//! Long arithmetic progressions in k-fold sumsets, with witnesses.
//!
//! Pipeline: locate a dense endpoint u, build a progression of difference 1
//! in 32kA when {0, 1} ⊆ A, lift it to a progression of difference g in 320kA
//! for general A, then augment the difference down to 1.

use crate::arith::ceil_div;
use crate::augment::{augment_to_full, AugmentChain, Parts};
use crate::density_ap::{build_density_witness, DensityWitness};
use crate::error::{contract, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::set::{gcd_all, normalize, SortedIntSet};
use crate::solution::{merge_parts, ArithProgression, CompactSolution};
use std::collections::BTreeMap;

/// Which side of [0, m] holds the dense interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Every v in [u+1, m] has |A[u+1, v]| ≥ (v − u)/2k.
    Left,
    /// Every v in [0, u−1] has |A[v, u−1]| ≥ (u − v)/2k.
    Right,
}

/// Smallest index i (0-based over `a` plus the sentinel m + 1) such that
/// 2k(j − i) ≥ a_j − a_i for every j ≥ i.
fn scan_good_start(a: &[i64], m: i128, k: u64) -> usize {
    let val = |idx: usize| -> i128 {
        if idx < a.len() {
            a[idx] as i128
        } else {
            m + 1
        }
    };
    let two_k = 2 * k as i128;
    let mut i = 0usize;
    for j in 1..=a.len() {
        while two_k * (j - i) as i128 > 0 && two_k * ((j - i) as i128) < val(j) - val(i) {
            i += 1;
        }
        debug_assert!((i..=j).all(|t| two_k * ((t - i) as i128) >= val(t) - val(i)));
    }
    i
}

/// Finds u with the dense-interval property on the left or right of [0, m].
pub fn find_dense_endpoint(a: &SortedIntSet, m: i128, k: u64) -> Result<(i128, Side)> {
    if k == 0 {
        return Err(precondition("k must be positive"));
    }
    let n = a.len() as i128;
    if n * k as i128 == 0 || n * (k as i128) < m + 1 {
        return Err(precondition(format!(
            "cardinality: n ≥ (m+1)/k fails, n = {n}, m = {m}, k = {k}"
        )));
    }
    if let Some(mx) = a.max() {
        if mx as i128 > m || a.min().unwrap_or(0) < 0 {
            return Err(precondition(format!("A ⊆ [0, m] fails: max {mx} > m = {m}")));
        }
    }
    let v = a.as_slice();
    let i = scan_good_start(v, m, k);
    if i < v.len() && 2 * (v[i] as i128 - 1) <= m {
        return Ok((v[i] as i128 - 1, Side::Left));
    }
    let mut refl: Vec<i64> = v.iter().rev().map(|&x| (m - x as i128) as i64).collect();
    refl.dedup();
    let i = scan_good_start(&refl, m, k);
    if i < refl.len() && 2 * (refl[i] as i128 - 1) <= m {
        return Ok((m - (refl[i] as i128 - 1), Side::Right));
    }
    Err(contract("no dense endpoint found although the cardinality bound holds"))
}

/// Checks the dense-interval property for (u, side) directly.
pub fn check_dense_endpoint(a: &SortedIntSet, m: i128, k: u64, u: i128, side: Side) -> bool {
    let two_k = 2 * k as i128;
    match side {
        Side::Left => {
            if !(-1 <= u && 2 * u <= m) {
                return false;
            }
            (u + 1..=m).all(|v| two_k * a.count_in(u + 1, v) as i128 >= v - u)
        }
        Side::Right => {
            if !(2 * u >= m && u <= m + 1) {
                return false;
            }
            (0..u).all(|v| two_k * a.count_in(v, u - 1) as i128 >= u - v)
        }
    }
}

/// {s} + {0, 1, …, m} ⊆ 32kX for a base set X containing 0 and 1.
#[derive(Clone, Debug)]
pub struct RestrictedAp {
    pub ap: ArithProgression,
    pub u: i128,
    pub side: Side,
    pub k: u64,
    witness: DensityWitness,
}

/// Builds the difference-1 progression in 32kA when {0, 1} ⊆ A.
pub fn ap_restricted(a: &SortedIntSet, m: i128, k: u64) -> Result<RestrictedAp> {
    if !a.contains(0) || !a.contains(1) {
        return Err(precondition("membership: {0,1} ⊆ A fails"));
    }
    let (u, side) = find_dense_endpoint(a, m, k)?;
    let cap = match side {
        Side::Left => (m - u).min(m),
        Side::Right => u.min(m),
    };
    let mut bs: Vec<i64> = vec![0];
    for &x in a.as_slice() {
        let b = match side {
            Side::Left => x as i128 - u,
            Side::Right => u - x as i128,
        };
        if (1..=cap).contains(&b) {
            bs.push(b as i64);
        }
    }
    let b = SortedIntSet::from_unsorted(bs)?;
    let witness = build_density_witness(&b, m, 8 * k)
        .map_err(|e| contract(format!("dense interval did not give ρ ≥ 1/4k: {e}")))?;
    let start = match side {
        Side::Left => 16 * k as i128 * (u + 1),
        Side::Right => 16 * k as i128 * u - m,
    };
    Ok(RestrictedAp {
        ap: ArithProgression::new(start, 1, m),
        u,
        side,
        k,
        witness,
    })
}

impl RestrictedAp {
    pub fn fold_budget(&self) -> u64 {
        32 * self.k
    }

    pub fn witness(&self) -> &DensityWitness {
        &self.witness
    }

    /// Parts over the base set, exactly 32k of them counted with multiplicity.
    pub fn query(&self, j: i128, rng: &mut RandomSource) -> Result<Parts> {
        if j < 0 || j > self.ap.length {
            return Err(Error::OutOfRange {
                z: j,
                max: self.ap.length,
            });
        }
        let z = match self.side {
            Side::Left => j,
            Side::Right => self.ap.length - j,
        };
        let sol = self.witness.query(z, rng)?;
        let mut used: u64 = sol.parts.iter().map(|p| p.1).sum();
        let total = 16 * self.k;
        if used > total {
            return Err(contract("density witness used more than 16k parts"));
        }
        let mut bparts = sol.parts;
        if used < total {
            bparts.push((0, total - used));
            used = total;
        }
        debug_assert_eq!(used, total);
        let u = self.u as i64;
        let mut out = Vec::with_capacity(2 * bparts.len());
        for (b, c) in bparts {
            match (self.side, b) {
                (Side::Left, 0) => {
                    out.push((0, c));
                    out.push((u + 1, c));
                }
                (Side::Left, _) => {
                    out.push((1, c));
                    out.push((u + b, c));
                }
                (Side::Right, 0) => {
                    out.push((u - 1, c));
                    out.push((1, c));
                }
                (Side::Right, _) => {
                    out.push((u - b, c));
                    out.push((0, c));
                }
            }
        }
        Ok(merge_parts(out))
    }
}

/// {s} + {0, g, …, ℓg} ⊆ 320kA with ℓ·min(g, n) ≥ 5m.
#[derive(Clone, Debug)]
pub struct ShortAp {
    pub ap: ArithProgression,
    pub g: i64,
    pub a_star: i64,
    pub a_prime: i64,
    pub k: u64,
    base: SortedIntSet,
    restricted: RestrictedAp,
}

/// Builds the short progression for a general base set with |A| ≥ 2.
pub fn ap_short(a: &SortedIntSet, m: i128, k: u64) -> Result<ShortAp> {
    let n = a.len();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if (n as i128) * (k as i128) < m + 1 {
        return Err(precondition(format!(
            "cardinality: n ≥ (m+1)/k fails, n = {n}, m = {m}, k = {k}"
        )));
    }
    let v = a.as_slice();
    if v[n - 1] as i128 > m {
        return Err(precondition(format!("A ⊆ [0, m] fails: max {} > m = {m}", v[n - 1])));
    }
    let (mut a_star, mut g) = (v[0], v[1] - v[0]);
    for w in v.windows(2) {
        if w[1] - w[0] < g {
            g = w[1] - w[0];
            a_star = w[0];
        }
    }
    let mut classes: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &x in v {
        classes.entry(x % g).or_default().push(x);
    }
    let t = classes.len() as i128;
    // largest class, smallest residue on ties
    let best = classes
        .values()
        .fold(None::<&Vec<i64>>, |acc, c| match acc {
            Some(b) if b.len() >= c.len() => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| contract("no residue class"))?;
    let a_prime = best[0];
    let mut bs: Vec<i64> = Vec::with_capacity(2 * best.len());
    for &x in best {
        let c = (x - a_prime) / g;
        bs.push(c);
        bs.push(c + 1);
    }
    let b = SortedIntSet::from_unsorted(bs)?;
    let m2 = ceil_div(5 * m, t);
    let k2 = 5 * k;
    if b.max().unwrap_or(0) as i128 > m2 {
        return Err(contract(format!("max(B) = {:?} exceeds ⌈5m/t⌉ = {m2}", b.max())));
    }
    let restricted = ap_restricted(&b, m2, k2)?;
    let start = restricted.ap.start * g as i128 + 160 * k as i128 * (a_prime as i128 + a_star as i128);
    Ok(ShortAp {
        ap: ArithProgression::new(start, g as i128, m2),
        g,
        a_star,
        a_prime,
        k,
        base: a.clone(),
        restricted,
    })
}

impl ShortAp {
    pub fn fold_budget(&self) -> u64 {
        320 * self.k
    }

    pub fn restricted(&self) -> &RestrictedAp {
        &self.restricted
    }

    /// Parts over A for term j, exactly 320k of them.
    pub fn query(&self, j: i128, rng: &mut RandomSource) -> Result<Parts> {
        let bparts = self.restricted.query(j, rng)?;
        let mut out = Vec::with_capacity(2 * bparts.len());
        for (b, c) in bparts {
            let x = b * self.g + self.a_prime;
            if self.base.contains(x) {
                out.push((x, c));
                out.push((self.a_star, c));
            } else {
                out.push((x - self.g, c));
                out.push((self.a_star + self.g, c));
            }
        }
        Ok(merge_parts(out))
    }
}

/// {s} + {0, 1, …, m} ⊆ 332kA together with its witness.
#[derive(Clone, Debug)]
pub struct SumsetWitness {
    pub ap: ArithProgression,
    pub k_eff: u64,
    pub fold_budget: u64,
    base: SortedIntSet,
    short: ShortAp,
    chain: AugmentChain,
}

/// Builds the progression of length m in 332kA.
///
/// The base set must contain 0, have gcd 1, lie in [0, m] and satisfy
/// |A| ≥ (m+1)/k. The witness is sized for k_eff = ⌈(m+1)/|A|⌉ ≤ k.
pub fn theorem_ka(raw: &[i128], m: i128, k: u64) -> Result<SumsetWitness> {
    let a = normalize(raw)?.set;
    sumset_witness(&a, m, k)
}

pub fn sumset_witness(a: &SortedIntSet, m: i128, k: u64) -> Result<SumsetWitness> {
    if k == 0 {
        return Err(precondition("k ≥ 1 fails"));
    }
    if m < 1 {
        return Err(precondition(format!("m ≥ 1 fails: m = {m}")));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if !a.contains(0) {
        return Err(precondition("0 ∈ A fails"));
    }
    let g = gcd_all(a)?;
    if g != 1 {
        return Err(precondition(format!("gcd(A) = 1 fails: gcd = {g}")));
    }
    let mx = a.max().unwrap_or(0) as i128;
    if mx > m {
        return Err(precondition(format!("A ⊆ [0, m] fails: max {mx} > m = {m}")));
    }
    let n = a.len() as i128;
    if n * (k as i128) < m + 1 {
        return Err(precondition(format!(
            "cardinality: n ≥ (m+1)/k fails, n = {n}, m = {m}, k = {k}"
        )));
    }
    let k_eff = ceil_div(m + 1, n) as u64;
    let short = ap_short(a, m, k_eff)?;
    let full = augment_to_full(a, short.ap, m)?;
    let ap = full.progression.truncated(m);
    let fold_budget = short.fold_budget() + full.chain.budget();
    if fold_budget > 332 * k_eff {
        return Err(contract(format!(
            "fold budget {fold_budget} exceeds 332·k_eff = {}",
            332 * k_eff
        )));
    }
    Ok(SumsetWitness {
        ap,
        k_eff,
        fold_budget,
        base: a.clone(),
        short,
        chain: full.chain,
    })
}

impl SumsetWitness {
    pub fn base(&self) -> &SortedIntSet {
        &self.base
    }

    pub fn short(&self) -> &ShortAp {
        &self.short
    }

    pub fn chain(&self) -> &AugmentChain {
        &self.chain
    }

    /// Certificate for ap.start + j with at most `fold_budget` parts.
    pub fn query(&self, j: i128, rng: &mut RandomSource) -> Result<CompactSolution> {
        if j < 0 || j > self.ap.length {
            return Err(Error::OutOfRange {
                z: j,
                max: self.ap.length,
            });
        }
        let (js, mut parts) = self.chain.resolve(j, rng)?;
        parts.extend(self.short.query(js, rng)?);
        let sol = CompactSolution::multiset(parts, self.ap.term(j), self.fold_budget);
        if sol.value_sum() != sol.target {
            return Err(contract(format!(
                "certificate for term {j} sums to {} instead of {}",
                sol.value_sum(),
                sol.target
            )));
        }
        Ok(sol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::verify_solution;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn endpoint_examples() {
        assert_eq!(find_dense_endpoint(&s(&[0, 1, 2, 3]), 3, 1).unwrap(), (-1, Side::Left));
        assert_eq!(find_dense_endpoint(&s(&[0, 1]), 1, 1).unwrap(), (-1, Side::Left));
        assert_eq!(find_dense_endpoint(&s(&[2, 3]), 3, 2).unwrap(), (1, Side::Left));
        assert!(find_dense_endpoint(&s(&[0]), 5, 1).is_err());
    }

    #[test]
    fn endpoint_exhaustive() {
        for m in 1..=12i128 {
            for mask in 1u32..(1 << (m + 1)) {
                let v: Vec<i64> = (0..=m as i64).filter(|i| mask >> i & 1 == 1).collect();
                let a = s(&v);
                let n = v.len() as i128;
                for k in 1..=4u64 {
                    if n * (k as i128) < m + 1 {
                        continue;
                    }
                    let (u, side) = find_dense_endpoint(&a, m, k).unwrap();
                    assert!(check_dense_endpoint(&a, m, k, u, side), "{v:?} m={m} k={k} u={u}");
                }
            }
        }
    }

    fn check_all(w: &SumsetWitness, k: u64, rng: &mut RandomSource) {
        for j in 0..=w.ap.length {
            let sol = w.query(j, rng).unwrap();
            assert!(verify_solution(w.base(), &sol).ok, "term {j}: {sol:?}");
            assert!(sol.total_count() <= 332 * k as u128);
        }
    }

    #[test]
    fn restricted_examples() {
        let mut rng = RandomSource::new(3);
        let a = s(&[0, 1]);
        let r = ap_restricted(&a, 1, 1).unwrap();
        for j in 0..=1 {
            let parts = r.query(j, &mut rng).unwrap();
            let sol = CompactSolution::multiset(parts, r.ap.term(j), 32);
            assert!(verify_solution(&a, &sol).ok);
        }
        let v: Vec<i64> = (0..=20).collect();
        let a = s(&v);
        let r = ap_restricted(&a, 20, 1).unwrap();
        for j in 0..=20 {
            let parts = r.query(j, &mut rng).unwrap();
            let sol = CompactSolution::multiset(parts, r.ap.term(j), 32);
            assert!(verify_solution(&a, &sol).ok);
        }
        assert!(ap_restricted(&s(&[0, 2, 3]), 3, 2).is_err());
    }

    #[test]
    fn restricted_right_side() {
        // dense block at the top of [0, m]
        let mut v: Vec<i64> = vec![0, 1];
        v.extend(30..=40);
        let a = s(&v);
        let r = ap_restricted(&a, 40, 4).unwrap();
        assert_eq!(r.side, Side::Right);
        let mut rng = RandomSource::new(5);
        for j in 0..=40 {
            let parts = r.query(j, &mut rng).unwrap();
            let sol = CompactSolution::multiset(parts, r.ap.term(j), 128);
            assert!(verify_solution(&a, &sol).ok, "{j}");
        }
    }

    #[test]
    fn short_examples() {
        let mut rng = RandomSource::new(3);
        let a = s(&[0, 1]);
        let p = ap_short(&a, 1, 1).unwrap();
        assert_eq!(p.g, 1);
        assert!(p.ap.length >= 5);
        let mut v: Vec<i64> = (0..=10).map(|x| 10 * x).collect();
        v.push(101);
        let a = s(&v);
        let p = ap_short(&a, 101, 12).unwrap();
        assert_eq!((p.g, p.a_star), (1, 100));
        for j in 0..=p.ap.length {
            let parts = p.query(j, &mut rng).unwrap();
            let sol = CompactSolution::multiset(parts, p.ap.term(j), 320 * 12);
            assert!(verify_solution(&a, &sol).ok);
        }
        assert!(matches!(ap_short(&s(&[3]), 3, 4), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn theorem_examples() {
        let mut rng = RandomSource::new(11);
        let w = theorem_ka(&[0, 1], 1, 1).unwrap();
        assert_eq!(w.ap.length, 1);
        check_all(&w, 1, &mut rng);
        let raw = [0i128, 7, 100, 213, 350, 401, 555, 702, 811, 930, 999];
        let w = theorem_ka(&raw, 1000, 101).unwrap();
        assert_eq!(w.ap.length, 1000);
        assert_eq!(w.ap.diff, 1);
        check_all(&w, 101, &mut rng);
        assert!(theorem_ka(&[0, 1, 2], 10, 1).is_err());
    }

    #[test]
    fn nontrivial_augmentation() {
        // gaps force g = 3 in the short step, then augmentation to diff 1
        let v: Vec<i64> = vec![0, 3, 6, 9, 12, 15, 18, 20];
        let a = s(&v);
        let w = sumset_witness(&a, 20, 3).unwrap();
        assert_eq!(w.ap.diff, 1);
        assert!(!w.chain().is_empty());
        let mut rng = RandomSource::new(2);
        check_all(&w, 3, &mut rng);
    }
}
