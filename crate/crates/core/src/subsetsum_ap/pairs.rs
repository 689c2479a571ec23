use super::{log2_real, Profile};
use crate::error::{contract, exhausted, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::set::SortedIntSet;
use crate::solution::{ArithProgression, CompactSolution};
use crate::sumset_ap::{sumset_witness, SumsetWitness};
use num_integer::Integer;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Conflict-free integer pairs (lo, hi) with lo < hi.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PairSet {
    pairs: Vec<(i64, i64)>,
}

impl PairSet {
    pub fn new(pairs: Vec<(i64, i64)>) -> Result<Self> {
        let mut ends: Vec<i64> = Vec::with_capacity(2 * pairs.len());
        for &(lo, hi) in &pairs {
            if lo >= hi {
                return Err(precondition(format!("pair ({lo}, {hi}) is not increasing")));
            }
            ends.push(lo);
            ends.push(hi);
        }
        ends.sort_unstable();
        if let Some(w) = ends.windows(2).find(|w| w[0] == w[1]) {
            return Err(precondition(format!("pairs share the integer {}", w[0])));
        }
        Ok(PairSet { pairs })
    }

    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// A_T, sorted.
    pub fn elements(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v
    }

    /// G_T with multiplicities.
    pub fn gaps(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for &(lo, hi) in &self.pairs {
            *m.entry(hi - lo).or_default() += 1;
        }
        m
    }

    /// R_T(d) with multiplicities.
    pub fn residues(&self, d: i64) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for &(lo, hi) in &self.pairs {
            *m.entry((hi - lo).mod_floor(&d)).or_default() += 1;
        }
        m
    }

    /// s_T, the sum of the low ends.
    pub fn lo_sum(&self) -> i128 {
        self.pairs.iter().map(|&(lo, _)| lo as i128).sum()
    }

    pub fn max_gap(&self) -> i64 {
        self.pairs.iter().map(|&(lo, hi)| hi - lo).max().unwrap_or(0)
    }

    /// The common multiplicity if every gap occurs equally often.
    pub fn uniformity(&self) -> Option<usize> {
        let g = self.gaps();
        let first = *g.values().next()?;
        g.values().all(|&c| c == first).then_some(first)
    }

    fn index_by(&self, key: impl Fn(i64) -> i64) -> BTreeMap<i64, Vec<usize>> {
        let mut m: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &(lo, hi)) in self.pairs.iter().enumerate() {
            m.entry(key(hi - lo)).or_default().push(i);
        }
        m
    }
}

/// Takes the high end of `count` pairs per key and the low end of every other
/// pair. Returns the chosen elements.
pub(crate) fn flip_pairs(
    pairs: &[(i64, i64)],
    index: &BTreeMap<i64, Vec<usize>>,
    picks: impl IntoIterator<Item = (i64, u64)>,
) -> Result<Vec<i64>> {
    let mut high = vec![false; pairs.len()];
    for (key, count) in picks {
        if count == 0 {
            continue;
        }
        let have = index.get(&key).map_or(0, Vec::len);
        if count as usize > have {
            return Err(Error::MultiplicityExceeded {
                gap: key,
                need: count,
                have: have as u64,
            });
        }
        for &i in &index[&key][..count as usize] {
            high[i] = true;
        }
    }
    Ok(pairs
        .iter()
        .zip(&high)
        .map(|(&(lo, hi), &h)| if h { hi } else { lo })
        .collect())
}

/// Consecutive pairs with gaps at most m/n from a set of 4n integers.
///
/// Up to three of the largest elements are dropped so the size is a multiple
/// of four; the number dropped is returned.
pub fn gen_pairs(a: &SortedIntSet) -> Result<(PairSet, usize)> {
    let dropped = a.len() % 4;
    let v = &a.as_slice()[..a.len() - dropped];
    if v.len() < 4 {
        return Err(Error::TooSmall { need: 4, got: a.len() });
    }
    let n = (v.len() / 4) as i128;
    let m = *v.last().unwrap() as i128;
    let mut odd = Vec::new();
    let mut even = Vec::new();
    for i in 0..v.len() - 1 {
        let g = (v[i + 1] - v[i]) as i128;
        if g * n <= m {
            if i % 2 == 0 {
                odd.push((v[i], v[i + 1]));
            } else {
                even.push((v[i], v[i + 1]));
            }
        }
    }
    let pick = if odd.len() >= even.len() { odd } else { even };
    Ok((PairSet::new(pick)?, dropped))
}

fn uniformize_with(t: &PairSet, key: impl Fn(i64) -> i64) -> (usize, PairSet) {
    let index = t.index_by(key);
    let max_mult = index.values().map(Vec::len).max().unwrap_or(0);
    let mut best = (0usize, 0usize);
    for u in 1..=max_mult {
        let keys = index.values().filter(|v| v.len() >= u).count();
        if u * keys > best.0 * best.1 {
            best = (u, keys);
        }
    }
    let u = best.0;
    let mut chosen: Vec<usize> = index
        .values()
        .filter(|v| v.len() >= u)
        .flat_map(|v| v[..u].iter().copied())
        .collect();
    chosen.sort_unstable();
    let pairs = chosen.into_iter().map(|i| t.pairs[i]).collect();
    (u, PairSet { pairs })
}

/// Largest u·|G^u| selection: keeps exactly u pairs of every gap that occurs at
/// least u times. Ties go to the smaller u.
pub fn uniformize(t: &PairSet) -> (usize, PairSet) {
    uniformize_with(t, |g| g)
}

/// Same selection keyed by gap residue modulo d.
pub fn uniformize_by_residue(t: &PairSet, d: i64) -> (usize, PairSet) {
    uniformize_with(t, move |g| g.mod_floor(&d))
}

/// Converts a solution for z over G_T ∪ {0} into a subset of A_T summing to
/// s_T + z.
pub fn pairs_to_subsetsum(t: &PairSet, z: i128, sol_z: &CompactSolution) -> Result<CompactSolution> {
    if sol_z.value_sum() != z {
        return Err(precondition(format!(
            "solution sums to {} instead of {z}",
            sol_z.value_sum()
        )));
    }
    let index = t.index_by(|g| g);
    let picks = sol_z.parts.iter().filter(|p| p.0 != 0).copied();
    let elems = flip_pairs(&t.pairs, &index, picks)?;
    Ok(CompactSolution::subset(elems, t.lo_sum() + z))
}

/// Largest DP table the tuned fallbacks will allocate.
pub(crate) const TABLE_CAP: usize = 1 << 21;

/// Bounded-multiplicity knapsack over `items` (value, copies). Finds the
/// smallest s with s, s+1, …, s+len all reachable and returns s together
/// with, for each of those sums, the copies of each item it uses.
pub(crate) fn knapsack_window(items: &[(i64, u64)], len: i128) -> Option<(i128, Vec<Vec<(usize, u64)>>)> {
    const UNSET: u32 = u32::MAX;
    const ROOT: u32 = u32::MAX - 1;
    let total: i128 = items.iter().map(|&(v, c)| v as i128 * c as i128).sum();
    let z_cap = total.min(TABLE_CAP as i128) as usize;
    if (len as usize) > z_cap {
        return None;
    }
    let mut parent = vec![UNSET; z_cap + 1];
    let mut used = vec![0u64; z_cap + 1];
    parent[0] = ROOT;
    for (i, &(v, copies)) in items.iter().enumerate() {
        let v = v as usize;
        for z in v..=z_cap {
            if parent[z] != UNSET || parent[z - v] == UNSET {
                continue;
            }
            let run = if parent[z - v] == i as u32 { used[z - v] } else { 0 };
            if run < copies {
                parent[z] = i as u32;
                used[z] = run + 1;
            }
        }
    }
    let need = len as usize + 1;
    let mut streak = 0usize;
    let mut start = None;
    for (z, &p) in parent.iter().enumerate() {
        streak = if p == UNSET { 0 } else { streak + 1 };
        if streak == need {
            start = Some(z + 1 - need);
            break;
        }
    }
    let s = start?;
    let terms = (s..s + need)
        .map(|mut z| {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            while z > 0 {
                let i = parent[z] as usize;
                *counts.entry(i).or_default() += 1;
                z -= items[i].0 as usize;
            }
            counts.into_iter().collect()
        })
        .collect();
    Some((s as i128, terms))
}

#[derive(Clone, Debug)]
enum PairRoute {
    /// kA witness on G/d ∪ {0}; parts are gap units.
    Sumset(SumsetWitness),
    /// Per-term gap counts from a bounded knapsack (tuned fallback).
    Table(Arc<Vec<Vec<(i64, u64)>>>),
}

/// Progression {s} + {0, d, …, g·d} in S(A_{T*}) built from gap sums.
#[derive(Clone, Debug)]
pub struct PairAp {
    pub ap: ArithProgression,
    pub u: usize,
    /// Multiplicity kept per gap value in T*.
    pub kept: BTreeMap<i64, u64>,
    pairs: PairSet,
    index: BTreeMap<i64, Vec<usize>>,
    unit: i64,
    route: PairRoute,
}

/// Builds a progression of length g_bound in the subset sums of a subset T*
/// of the pairs.
pub fn ap_by_pairs(t: &PairSet, g_bound: i128, profile: &Profile) -> Result<PairAp> {
    if t.is_empty() {
        return Err(precondition("ap_by_pairs needs a nonempty pair set"));
    }
    if g_bound < 1 {
        return Err(precondition(format!("g ≥ 1 fails: g = {g_bound}")));
    }
    if t.max_gap() as i128 > g_bound {
        return Err(precondition(format!(
            "G_T ⊆ [1, g] fails: max gap {} > g = {g_bound}",
            t.max_gap()
        )));
    }
    let n = t.len() as f64;
    if profile.is_paper() && g_bound as f64 > n / (profile.c1000 as f64 * log2_real(2.0 * n)) {
        return Err(precondition(format!(
            "g ≤ |T|/(1000·log2(2|T|)) fails: g = {g_bound}, |T| = {}",
            t.len()
        )));
    }
    let (u, tp) = uniformize(t);
    let gaps: Vec<i64> = tp.gaps().keys().copied().collect();
    let unit = gaps.iter().fold(0i64, |acc, &g| acc.gcd(&g));
    match by_sumset(&tp, u, &gaps, unit, g_bound, profile) {
        Ok(built) => Ok(built),
        Err(e) if profile.is_paper() => Err(e),
        Err(_) => by_table(&tp, u, &gaps, unit, g_bound),
    }
}

fn thin(tp: &PairSet, kept: &BTreeMap<i64, u64>) -> PairSet {
    let index_all = tp.index_by(|g| g);
    let mut chosen: Vec<usize> = Vec::new();
    for (g, &k) in kept {
        chosen.extend(index_all[g][..k as usize].iter().copied());
    }
    chosen.sort_unstable();
    PairSet {
        pairs: chosen.into_iter().map(|i| tp.pairs[i]).collect(),
    }
}

fn by_sumset(tp: &PairSet, u: usize, gaps: &[i64], unit: i64, g_bound: i128, profile: &Profile) -> Result<PairAp> {
    let mut base: Vec<i64> = vec![0];
    base.extend(gaps.iter().map(|&g| g / unit));
    let base = SortedIntSet::from_unsorted(base)?;
    let k_ka = crate::arith::ceil_div(g_bound + 1, base.len() as i128) as u64;
    let witness = sumset_witness(&base, g_bound, k_ka)?;
    let z_max = witness.ap.last();
    let fold = witness.fold_budget as i128;
    let need = |v: i64| -> u64 { fold.min(z_max / v as i128) as u64 };
    let mut kept = BTreeMap::new();
    if profile.is_paper() {
        let k = (profile.c1000 * g_bound / gaps.len() as i128) as u64;
        if k as usize > u {
            return Err(contract(format!("thinning multiplicity k = {k} exceeds u = {u}")));
        }
        for &g in gaps {
            let nv = need(g / unit);
            if nv > k {
                return Err(Error::MultiplicityExceeded { gap: g, need: nv, have: k });
            }
            kept.insert(g, k);
        }
    } else {
        for &g in gaps {
            let nv = need(g / unit);
            if nv as usize > u {
                return Err(Error::MultiplicityExceeded {
                    gap: g,
                    need: nv,
                    have: u as u64,
                });
            }
            kept.insert(g, nv);
        }
    }
    let pairs = thin(tp, &kept);
    let index = pairs.index_by(|g| g);
    let ap = ArithProgression::new(
        pairs.lo_sum() + unit as i128 * witness.ap.start,
        unit as i128,
        g_bound,
    );
    Ok(PairAp {
        ap,
        u,
        kept,
        pairs,
        index,
        unit,
        route: PairRoute::Sumset(witness),
    })
}

fn by_table(tp: &PairSet, u: usize, gaps: &[i64], unit: i64, g_bound: i128) -> Result<PairAp> {
    let items: Vec<(i64, u64)> = gaps.iter().map(|&g| (g / unit, u as u64)).collect();
    let (s, terms) = knapsack_window(&items, g_bound).ok_or_else(|| {
        exhausted(
            format!("gap sums of {} pairs hold no window of length {g_bound}", tp.len()),
            None,
        )
    })?;
    let mut kept: BTreeMap<i64, u64> = BTreeMap::new();
    for term in &terms {
        for &(i, c) in term {
            let e = kept.entry(gaps[i]).or_default();
            *e = (*e).max(c);
        }
    }
    let table: Vec<Vec<(i64, u64)>> = terms
        .into_iter()
        .map(|term| term.into_iter().map(|(i, c)| (gaps[i], c)).collect())
        .collect();
    let pairs = thin(tp, &kept);
    let index = pairs.index_by(|g| g);
    let ap = ArithProgression::new(pairs.lo_sum() + unit as i128 * s, unit as i128, g_bound);
    Ok(PairAp {
        ap,
        u,
        kept,
        pairs,
        index,
        unit,
        route: PairRoute::Table(Arc::new(table)),
    })
}

impl PairAp {
    pub fn pairs(&self) -> &PairSet {
        &self.pairs
    }

    /// The coreset A_{T*}.
    pub fn elements(&self) -> Vec<i64> {
        self.pairs.elements()
    }

    /// Whether the progression came from the kA witness rather than the
    /// knapsack fallback.
    pub fn uses_sumset_witness(&self) -> bool {
        matches!(self.route, PairRoute::Sumset(_))
    }

    /// Elements of A_{T*} summing to term j.
    pub fn query(&self, j: i128, rng: &mut RandomSource) -> Result<Vec<i64>> {
        if j < 0 || j > self.ap.length {
            return Err(Error::OutOfRange { z: j, max: self.ap.length });
        }
        let elems = match &self.route {
            PairRoute::Sumset(w) => {
                let sol = w.query(j, rng)?;
                let unit = self.unit;
                let picks = sol.parts.iter().filter(|p| p.0 != 0).map(|&(v, c)| (v * unit, c));
                flip_pairs(&self.pairs.pairs, &self.index, picks)?
            }
            PairRoute::Table(t) => flip_pairs(&self.pairs.pairs, &self.index, t[j as usize].iter().copied())?,
        };
        let sum: i128 = elems.iter().map(|&x| x as i128).sum();
        if sum != self.ap.term(j) {
            return Err(contract(format!("pair certificate for term {j} sums to {sum}")));
        }
        Ok(elems)
    }
}

/// Short progression in S(A*) for a set of 4n integers.
pub fn short_ap_ss(a: &SortedIntSet, ell: i128, profile: &Profile) -> Result<PairAp> {
    let (t, dropped) = gen_pairs(a)?;
    let kept = &a.as_slice()[..a.len() - dropped];
    let n = (kept.len() / 4) as i128;
    let m = *kept.last().unwrap() as i128;
    if ell * n < m {
        return Err(precondition(format!("ℓ ≥ m/n fails: ℓ = {ell}, m = {m}, n = {n}")));
    }
    if profile.is_paper() {
        let nf = n as f64;
        if ell as f64 > nf / (profile.c1000 as f64 * log2_real(2.0 * nf)) {
            return Err(precondition(format!(
                "ℓ ≤ n/(1000·log2(2n)) fails: ℓ = {ell}, n = {n}"
            )));
        }
    }
    let pap = ap_by_pairs(&t, ell, profile)?;
    if profile.is_paper() && (2 * pap.pairs.len()) as i128 > profile.c2000 * ell {
        return Err(contract("coreset exceeds 2000ℓ"));
    }
    Ok(pap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::verify_solution;

    fn s(v: &[i64]) -> SortedIntSet {
        SortedIntSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn gen_pairs_examples() {
        let (t, dropped) = gen_pairs(&s(&[1, 2, 3, 4, 5, 6, 7, 8])).unwrap();
        assert_eq!(dropped, 0);
        assert!(t.len() >= 2);
        assert!(t.gaps().keys().all(|&g| g <= 4));
        let (t, _) = gen_pairs(&s(&[1, 2, 100, 101, 200, 201, 300, 301])).unwrap();
        assert!(t.len() >= 2);
        assert_eq!(t.gaps().keys().copied().collect::<Vec<_>>(), vec![1]);
        let (_, dropped) = gen_pairs(&s(&[1, 2, 3, 4, 5, 6])).unwrap();
        assert_eq!(dropped, 2);
        assert!(gen_pairs(&s(&[1, 2, 3])).is_err());
    }

    #[test]
    fn uniformize_examples() {
        let t = PairSet::new(vec![(0, 1), (2, 3), (4, 5), (6, 8)]).unwrap();
        let (u, tp) = uniformize(&t);
        assert_eq!(u, 3);
        assert_eq!(tp.len(), 3);
        let distinct = PairSet::new((0..8).map(|i| (100 * i, 100 * i + i + 1)).collect()).unwrap();
        let (u, tp) = uniformize(&distinct);
        assert_eq!(u, 1);
        assert_eq!(tp, distinct);
        let equal = PairSet::new((0..8).map(|i| (10 * i, 10 * i + 3)).collect()).unwrap();
        let (u, tp) = uniformize(&equal);
        assert_eq!(u, 8);
        assert_eq!(tp, equal);
    }

    #[test]
    fn uniformize_bound() {
        for size in 1..=300usize {
            // gap i has multiplicity roughly size/i
            let mut pairs = Vec::new();
            let mut x = 0i64;
            let mut g = 1i64;
            while pairs.len() < size {
                let reps = (size as i64 / g).max(1);
                for _ in 0..reps {
                    if pairs.len() == size {
                        break;
                    }
                    pairs.push((x, x + g));
                    x += g + 1;
                }
                g += 1;
            }
            let t = PairSet::new(pairs).unwrap();
            let (_, tp) = uniformize(&t);
            let bound = size as f64 / (2.0 * size as f64).log2();
            assert!(tp.len() as f64 >= bound, "size {size}");
            assert!(tp.uniformity().is_some());
        }
    }

    #[test]
    fn pairs_to_subsetsum_examples() {
        let t = PairSet::new(vec![(1, 2), (5, 6)]).unwrap();
        let two = CompactSolution::multiset([(1, 2)], 2, 2);
        let sol = pairs_to_subsetsum(&t, 2, &two).unwrap();
        assert_eq!(sol.parts, vec![(2, 1), (6, 1)]);
        assert_eq!(sol.target, 8);
        let zero = CompactSolution::multiset([(0, 2)], 0, 2);
        assert_eq!(pairs_to_subsetsum(&t, 0, &zero).unwrap().value_sum(), 6);
        let one = CompactSolution::multiset([(1, 1), (0, 1)], 1, 2);
        assert_eq!(pairs_to_subsetsum(&t, 1, &one).unwrap().value_sum(), 7);
        let three = CompactSolution::multiset([(1, 3)], 3, 3);
        assert!(matches!(
            pairs_to_subsetsum(&t, 3, &three),
            Err(Error::MultiplicityExceeded { .. })
        ));
    }

    #[test]
    fn ap_by_pairs_toy() {
        let mut pairs = Vec::new();
        for i in 0..64i64 {
            let g = 1 + (i % 2);
            pairs.push((10 * i, 10 * i + g));
        }
        let t = PairSet::new(pairs).unwrap();
        let pap = ap_by_pairs(&t, 2, &Profile::tuned()).unwrap();
        assert_eq!(pap.ap.length, 2);
        let base = s(&t.elements());
        let mut rng = RandomSource::new(4);
        for j in 0..=2 {
            let elems = pap.query(j, &mut rng).unwrap();
            let sol = CompactSolution::subset(elems, pap.ap.term(j));
            assert!(verify_solution(&base, &sol).ok);
        }
        assert!(ap_by_pairs(&PairSet::default(), 2, &Profile::tuned()).is_err());
    }

    #[test]
    fn short_ap_toy() {
        let v: Vec<i64> = (1..=4000).collect();
        let a = s(&v);
        let pap = short_ap_ss(&a, 10, &Profile::tuned()).unwrap();
        assert_eq!(pap.ap.length, 10);
        assert!(pap.ap.diff <= 4000 / 1000);
        let mut rng = RandomSource::new(1);
        for j in 0..=10 {
            let elems = pap.query(j, &mut rng).unwrap();
            let sol = CompactSolution::subset(elems, pap.ap.term(j));
            assert!(verify_solution(&a, &sol).ok);
        }
        assert!(short_ap_ss(&a, 3, &Profile::tuned()).is_err());
    }

    #[test]
    fn paper_gate_named() {
        let v: Vec<i64> = (1..=4000).collect();
        let e = short_ap_ss(&s(&v), 10, &Profile::paper()).unwrap_err();
        match e {
            Error::PreconditionViolated(msg) => assert!(msg.contains("1000·log2(2n)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
