//! Dense Subset Sum for sets: decide in O(1) after preprocessing, and search.
//!
//! Preprocessing divides out an almost divisor γ, then splits the reduced set
//! A′ into a remainder set R (its subset sums hit every residue modulo d), an
//! AP set P whose subset sums contain {s} + {0, d, …, L·d} with a witness, and
//! a bulk set G. A target t is decided by its residue modulo γ. A solution is
//! Y (non-multiples of γ fixing the residue) plus γ times a subset of A′ made
//! of G′ ⊆ G (coarse), R′ ⊆ R (residue modulo d) and P′ ⊆ P (the rest).

use crate::error::{contract, exhausted, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::set::{normalize, SortedIntSet};
use crate::solution::CompactSolution;
use crate::subsetsum_ap::{theorem_ss, Profile, ProfileKind, SubsetSumWitness};
use std::collections::HashMap;

/// Largest element the factorization sieve accepts.
pub const FACTOR_CAP: i64 = 10_000_000;

/// Largest d for which d-completeness of R is checked residue by residue.
const COMPLETENESS_CHECK_CAP: i64 = 10_000;

/// Constants of the dense pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseParams {
    pub kind: ProfileKind,
    /// α = c_alpha·log2(2μ); μ = 1 for sets.
    pub c_alpha: f64,
    /// δ = c_delta·log2(2N)·log2²(2μ).
    pub c_delta: f64,
    /// C′_λ = c_lambda·log2(2μ)·log2(2N).
    pub c_lambda: f64,
    /// Constants of the subset-sum progression builder used for P.
    pub ss: Profile,
}

impl DenseParams {
    pub fn paper() -> Self {
        DenseParams {
            kind: ProfileKind::Paper,
            c_alpha: 42480.0,
            c_delta: 1_699_200.0,
            c_lambda: 169_920.0,
            ss: Profile::paper(),
        }
    }

    pub fn tuned() -> Self {
        DenseParams {
            kind: ProfileKind::Tuned,
            c_alpha: 4.0,
            c_delta: 4.0,
            c_lambda: 4.0,
            ss: Profile::tuned(),
        }
    }

    pub fn for_profile(p: &Profile) -> Self {
        match p.kind {
            ProfileKind::Paper => Self::paper(),
            ProfileKind::Tuned => Self::tuned(),
        }
    }

    pub fn is_paper(&self) -> bool {
        self.kind == ProfileKind::Paper
    }

    pub fn alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn delta(&self, n: usize) -> f64 {
        self.c_delta * log2_2x(n as f64)
    }

    pub fn c_lambda_prime(&self, n: usize) -> f64 {
        self.c_lambda * log2_2x(n as f64)
    }

    fn failure(&self, msg: String) -> Error {
        if self.is_paper() {
            contract(msg)
        } else {
            exhausted(msg, None)
        }
    }
}

fn log2_2x(x: f64) -> f64 {
    (2.0 * x).max(1.0).log2()
}

/// Smallest-prime-factor table up to `max`.
struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    fn new(max: i64) -> Result<Self> {
        if max > FACTOR_CAP {
            return Err(Error::CapExceeded {
                what: "largest element to factorize",
                value: max as i128,
                cap: FACTOR_CAP as i128,
            });
        }
        let n = max.max(1) as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(Sieve { spf })
    }

    fn factor(&self, mut x: i64) -> Vec<u64> {
        let mut out = Vec::new();
        while x > 1 {
            let p = self.spf[x as usize] as i64;
            out.push(p as u64);
            x /= p;
        }
        out
    }

    fn distinct_primes(&self, x: i64) -> Vec<i64> {
        let mut f: Vec<i64> = self.factor(x).into_iter().map(|p| p as i64).collect();
        f.dedup();
        f
    }
}

/// Prime factors with multiplicity, ascending, for every element.
pub fn factorize_all(a: &SortedIntSet) -> Result<Vec<Vec<u64>>> {
    if a.min() == Some(0) {
        return Err(precondition("cannot factorize 0"));
    }
    let sieve = Sieve::new(a.max().unwrap_or(1))?;
    Ok(a.iter().map(|x| sieve.factor(x)).collect())
}

/// γ together with A′ = A(γ)/γ and the non-multiples of γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSplit {
    pub gamma: i64,
    pub reduced: SortedIntSet,
    pub nonmultiples: SortedIntSet,
}

fn almost_divisor_threshold(alpha: f64, sum: i128, n: usize) -> f64 {
    alpha * sum as f64 / (n as f64 * n as f64)
}

/// Divides out α-almost divisors until none remains.
///
/// Each round looks for a prime p with at most α·Σ/N² non-multiples in the
/// current set (any almost divisor has such a prime factor) and replaces the
/// set by its multiples of p divided by p.
pub fn find_gamma(a: &SortedIntSet, alpha: f64) -> Result<GammaSplit> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.min() == Some(0) {
        return Err(precondition("elements must be positive"));
    }
    let sieve = Sieve::new(a.max().unwrap())?;
    let mut cur: Vec<i64> = a.as_slice().to_vec();
    let mut gamma = 1i64;
    loop {
        let n = cur.len();
        let sum: i128 = cur.iter().map(|&x| x as i128).sum();
        let theta = almost_divisor_threshold(alpha, sum, n);
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for &x in &cur {
            for p in sieve.distinct_primes(x) {
                *counts.entry(p).or_default() += 1;
            }
        }
        let best = counts
            .into_iter()
            .filter(|&(_, c)| ((n - c) as f64) <= theta)
            .max_by_key(|&(p, c)| (c, std::cmp::Reverse(p)));
        let Some((p, _)) = best else { break };
        cur = cur.into_iter().filter(|x| x % p == 0).map(|x| x / p).collect();
        gamma *= p;
    }
    let reduced = SortedIntSet::from_sorted(cur)?;
    let nonmultiples = SortedIntSet::from_sorted(a.iter().filter(|x| x % gamma != 0).collect())?;
    let split = GammaSplit {
        gamma,
        reduced,
        nonmultiples,
    };
    check_gamma_properties(a, &split)?;
    Ok(split)
}

fn check_gamma_properties(a: &SortedIntSet, s: &GammaSplit) -> Result<()> {
    let n = a.len() as f64;
    let sum = a.sum() as f64;
    let g = s.gamma as f64;
    if g > 4.0 * sum / (n * n) {
        return Err(contract(format!("γ ≤ 4Σ/N² fails: γ = {}, bound {:.3}", s.gamma, 4.0 * sum / (n * n))));
    }
    if g > 4.0 * n {
        return Err(contract(format!("γ ≤ 4N fails: γ = {}", s.gamma)));
    }
    if (s.reduced.len() as f64) < 0.75 * n {
        return Err(contract(format!("|A′| ≥ 0.75|A| fails: {} of {}", s.reduced.len(), a.len())));
    }
    if (s.reduced.sum() as f64) < 0.75 * sum / g {
        return Err(contract(format!("Σ_A′ ≥ 0.75Σ_A/γ fails: Σ_A′ = {}", s.reduced.sum())));
    }
    Ok(())
}

/// Some subset of `a` with sum ≡ r (mod γ), or `None` if no subset has that
/// residue. Bellman's DP over Z_γ with first-reach predecessors.
pub fn modular_subset_sum(a: &[i64], gamma: i64, r: i64) -> Option<Vec<i64>> {
    assert!(gamma >= 1, "modulus must be positive");
    let g = gamma as usize;
    let target = r.rem_euclid(gamma) as usize;
    // pred[x] = (item index, previous residue) for the first way x was reached
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; g];
    let mut seen = vec![false; g];
    seen[0] = true;
    let mut order = vec![0usize];
    for (i, &x) in a.iter().enumerate() {
        if seen[target] || order.len() == g {
            break;
        }
        let step = x.rem_euclid(gamma) as usize;
        if step == 0 {
            continue;
        }
        let before = order.len();
        for k in 0..before {
            let from = order[k];
            let to = (from + step) % g;
            if !seen[to] {
                seen[to] = true;
                pred[to] = Some((i, from));
                order.push(to);
            }
        }
    }
    if !seen[target] {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = target;
    while let Some((i, from)) = pred[cur] {
        out.push(a[i]);
        cur = from;
    }
    out.reverse();
    Some(out)
}

/// Drops blocks between equal prefix-sum residues until |Y| < γ; the sum
/// modulo γ is unchanged.
pub fn shrink_mod(y: &[i64], gamma: i64) -> Vec<i64> {
    assert!(gamma >= 1, "modulus must be positive");
    let mut kept: Vec<i64> = Vec::with_capacity(y.len());
    let mut prefix: Vec<i64> = vec![0];
    let mut first: HashMap<i64, usize> = HashMap::from([(0, 0)]);
    for &x in y {
        let r = (prefix[kept.len()] + x).rem_euclid(gamma);
        if let Some(&pos) = first.get(&r) {
            for &old in &prefix[pos + 1..] {
                first.remove(&old);
            }
            kept.truncate(pos);
            prefix.truncate(pos + 1);
        } else {
            kept.push(x);
            prefix.push(r);
            first.insert(r, kept.len());
        }
    }
    kept
}

fn reachable_residues(a: &[i64], gamma: i64) -> Vec<bool> {
    let g = gamma as usize;
    let mut seen = vec![false; g];
    seen[0] = true;
    let mut order = vec![0usize];
    for &x in a {
        if order.len() == g {
            break;
        }
        let step = x.rem_euclid(gamma) as usize;
        let before = order.len();
        for k in 0..before {
            let to = (order[k] + step) % g;
            if !seen[to] {
                seen[to] = true;
                order.push(to);
            }
        }
    }
    seen
}

/// Everything preprocessing produces. R, P and G partition A′ = A(γ)/γ and
/// are stored in A′ units.
#[derive(Clone, Debug)]
pub struct DenseDecomposition {
    pub gamma: i64,
    pub r: SortedIntSet,
    /// The coreset of the progression witness.
    pub p: SortedIntSet,
    pub g: SortedIntSet,
    pub witness: SubsetSumWitness,
    pub s: i128,
    pub d: i128,
    /// Terms s, s + d, …, s + ell_p·d are certified.
    pub ell_p: i128,
    /// λ_A = C′_λ·m·Σ_A/N².
    pub lambda: f64,
    /// Targets in [region_lo, region_hi] are decided.
    pub region_lo: i128,
    pub region_hi: i128,
    pub tau: i64,
    pub params: DenseParams,
    a: SortedIntSet,
    reduced: SortedIntSet,
    nonmultiples: SortedIntSet,
    residues: Vec<bool>,
    /// Largest possible Σ_R′ for an R′ of at most d − 1 elements.
    rho_r: i128,
    bulk: Bulk,
}

impl DenseDecomposition {
    pub fn input(&self) -> &SortedIntSet {
        &self.a
    }

    pub fn reduced(&self) -> &SortedIntSet {
        &self.reduced
    }

    pub fn nonmultiples(&self) -> &SortedIntSet {
        &self.nonmultiples
    }

    pub fn in_region(&self, t: i128) -> bool {
        self.region_lo <= t && t <= self.region_hi
    }
}

fn to_set(v: Vec<i64>) -> Result<SortedIntSet> {
    SortedIntSet::from_unsorted(v)
}

fn minus(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j < b.len() && b[j] == x {
            continue;
        }
        out.push(x);
    }
    out
}

/// G split for the coarse step: a chain whose k-subset sweep reaches every
/// window of the working width inside `cover`, and the other elements, which
/// are picked greedily.
#[derive(Clone, Debug)]
struct Bulk {
    chain: Vec<i64>,
    other: Vec<i64>,
    cover: (i128, i128),
}

/// Longest stretch of [min_k, max_k] intervals of `c` that chain together
/// with holes of at most `step`.
fn best_stretch(c: &[i64], step: i128) -> (i128, i128) {
    let n = c.len();
    let mut pre = vec![0i128; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + c[i] as i128;
    }
    let (mut start, mut end) = (0i128, 0i128);
    let mut best = (0i128, 0i128);
    for k in 1..=n {
        let (a, b) = (pre[k], pre[n] - pre[n - k]);
        if a <= end + step {
            end = end.max(b);
        } else {
            start = a;
            end = b;
        }
        if end - start > best.1 - best.0 {
            best = (start, end);
        }
    }
    best
}

fn split_bulk(g: &[i64], width: i128) -> Option<Bulk> {
    if width < 0 {
        return None;
    }
    let step = width + 1;
    let mut best: Option<(usize, usize, (i128, i128))> = None;
    let mut from = 0;
    for i in 0..=g.len() {
        if i == g.len() || (i > from && (g[i] - g[i - 1]) as i128 > step) {
            if i > from {
                let cover = best_stretch(&g[from..i], step);
                if best.is_none_or(|(_, _, c)| cover.1 - cover.0 > c.1 - c.0) {
                    best = Some((from, i, cover));
                }
            }
            from = i;
        }
    }
    let (a, b, cover) = best?;
    let mut other = g[..a].to_vec();
    other.extend(&g[b..]);
    Some(Bulk {
        chain: g[a..b].to_vec(),
        other,
        cover,
    })
}

/// Preprocesses a dense set: γ, then the R/P/G partition of A(γ)/γ.
pub fn build_rpg(raw: &[i128], params: &DenseParams) -> Result<DenseDecomposition> {
    let norm = normalize(raw)?;
    if norm.duplicates > 0 {
        return Err(precondition("multiset input is not supported; elements must be distinct"));
    }
    let a = norm.set;
    if a.min() == Some(0) {
        return Err(precondition("elements must be positive"));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = a.len();
    let m = a.max().unwrap() as i128;
    let sum = a.sum();
    let delta = params.delta(n);
    if (n as f64) * (n as f64) < delta * m as f64 {
        return Err(precondition(format!(
            "δ-dense N² ≥ δ·m fails: N = {n}, m = {m}, δ = {delta:.1}"
        )));
    }
    let split = find_gamma(&a, params.alpha())?;
    let gamma = split.gamma;
    let red = split.reduced.as_slice();
    let n1 = red.len();
    let m1 = *red.last().unwrap() as i128;
    let sum1 = split.reduced.sum();
    if (n1 as f64) * (n1 as f64) < params.delta(n1) * m1 as f64 {
        return Err(contract("A(γ)/γ is no longer δ-dense"));
    }

    // R = R′ ∪ ⋃ R_p
    let tau = (params.alpha() * sum1 as f64 / (n1 as f64 * n1 as f64)).ceil().max(1.0) as i64;
    let mut r: Vec<i64> = red.iter().copied().take((2 * tau) as usize).collect();
    let r_prime = r.clone();
    for p in primes_up_to(tau) {
        let non = r_prime.iter().filter(|&&x| x % p != 0).count() as i64;
        if non >= tau {
            continue;
        }
        let extra: Vec<i64> = red
            .iter()
            .copied()
            .filter(|&x| x % p != 0 && !r.contains(&x))
            .take(tau as usize)
            .collect();
        if (extra.len() as i64) < tau {
            return Err(contract(format!("fewer than τ = {tau} non-multiples of {p} remain")));
        }
        r.extend(extra);
    }
    r.sort_unstable();
    if 4 * r.len() > n1 {
        return Err(params.failure(format!("|R| ≤ N/4 fails: |R| = {}, N = {n1}", r.len())));
    }

    // P from the smallest N/4 elements outside R
    let rest = minus(red, &r);
    let take = if params.is_paper() { n1 / 4 } else { rest.len() };
    let b: Vec<i128> = rest.iter().take(take).map(|&x| x as i128).collect();
    let (witness, ell_p) = build_p(&b, 2 * m1, params)?;
    let p_set = witness.coreset.clone();
    let s = witness.ap.start;
    let d = witness.ap.diff;

    // G is the rest; under tuned, R borrows from it until it is d-complete
    let mut g = minus(&rest, &p_set);
    if !is_complete(&r, d as i64) {
        if params.is_paper() {
            return Err(contract(format!("S(R) is not {d}-complete")));
        }
        let mut reach = reachable_residues(&r, d as i64);
        let mut moved = Vec::new();
        for &x in &g {
            if reach.iter().all(|&b| b) {
                break;
            }
            if x as i128 % d == 0 {
                continue;
            }
            let before = reach.iter().filter(|&&b| b).count();
            let next = reachable_residues(&[x], d as i64);
            let mut grown = reach.clone();
            for (i, &was) in reach.iter().enumerate() {
                if was {
                    for (j, &step) in next.iter().enumerate() {
                        if step {
                            grown[(i + j) % d as usize] = true;
                        }
                    }
                }
            }
            if grown.iter().filter(|&&b| b).count() > before {
                reach = grown;
                moved.push(x);
            }
        }
        if !reach.iter().all(|&b| b) {
            return Err(params.failure(format!("no subset of A′ completes residues modulo {d}")));
        }
        r.extend(&moved);
        r.sort_unstable();
        g = minus(&g, &moved);
    }
    if d <= COMPLETENESS_CHECK_CAP as i128 && !is_complete(&r, d as i64) {
        return Err(contract(format!("S(R) is not {d}-complete")));
    }
    let sum_g: i128 = g.iter().map(|&x| x as i128).sum();
    if 2 * sum_g < sum1 {
        return Err(params.failure(format!("Σ_G ≥ Σ_A′/2 fails: Σ_G = {sum_g}, Σ_A′ = {sum1}")));
    }
    let rho_r: i128 = r.iter().rev().take((d - 1) as usize).map(|&x| x as i128).sum();
    let width = ell_p * d - rho_r;
    let bulk = split_bulk(&g, width)
        .ok_or_else(|| params.failure(format!("window L·d − ρ_R = {width} is negative")))?;
    let (c_lo, c_hi) = bulk.cover;
    let max_other = bulk.other.iter().copied().max().unwrap_or(0) as i128;
    if max_other > c_hi - c_lo + width + 1 {
        return Err(params.failure(format!(
            "chain cover [{c_lo}, {c_hi}] plus window {width} is narrower than the element {max_other}"
        )));
    }
    let sum_other: i128 = bulk.other.iter().map(|&x| x as i128).sum();
    if sum1 / 2 - s - ell_p * d > sum_other + c_hi {
        return Err(params.failure("G cannot reach half of Σ_A′".to_string()));
    }
    let base = s + rho_r + c_lo;

    let lambda = params.c_lambda_prime(n) * m as f64 * sum as f64 / (n as f64 * n as f64);
    let formula_lo = ((4.0 + 2.0 * params.c_lambda_prime(n)) * m as f64 * sum as f64 / (n as f64 * n as f64)).ceil() as i128;
    let y_max: i128 = split
        .nonmultiples
        .as_slice()
        .iter()
        .rev()
        .take((gamma - 1) as usize)
        .map(|&x| x as i128)
        .sum();
    let g128 = gamma as i128;
    let (region_lo, region_hi) = if params.is_paper() {
        (formula_lo, sum / 2)
    } else {
        (
            formula_lo.max(g128 * base + y_max),
            (sum / 2).min(g128 * (sum1 - base)),
        )
    };
    if region_lo > region_hi {
        return Err(params.failure(format!("decided region [{region_lo}, {region_hi}] is empty")));
    }
    let residues = reachable_residues(split.nonmultiples.as_slice(), gamma);
    Ok(DenseDecomposition {
        gamma,
        r: to_set(r)?,
        p: to_set(p_set)?,
        g: to_set(g)?,
        witness,
        s,
        d,
        ell_p,
        lambda,
        region_lo,
        region_hi,
        tau,
        params: *params,
        a,
        reduced: split.reduced,
        nonmultiples: split.nonmultiples,
        residues,
        rho_r,
        bulk,
    })
}

fn build_p(b: &[i128], ell: i128, params: &DenseParams) -> Result<(SubsetSumWitness, i128)> {
    if params.is_paper() {
        let w = theorem_ss(b, ell, &params.ss)?;
        return Ok((w, ell));
    }
    let attempt = |l: i128| match theorem_ss(b, l, &params.ss) {
        Ok(w) => Ok(Some(w)),
        Err(Error::Exhausted { .. } | Error::PreconditionViolated(_)) => Ok(None),
        Err(e) => Err(e),
    };
    // halve until a length succeeds, then bisect back toward the failure
    let mut hi = ell;
    let mut l = ell;
    let mut best = loop {
        if let Some(w) = attempt(l)? {
            break (w, l);
        }
        if l == 1 {
            return Err(exhausted("no progression of any length in S(P)", None));
        }
        hi = l;
        l /= 2;
    };
    let mut lo = best.1;
    while hi - lo > 1 && lo < ell {
        let mid = lo + (hi - lo) / 2;
        match attempt(mid)? {
            Some(w) => {
                best = (w, mid);
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

fn primes_up_to(x: i64) -> Vec<i64> {
    (2..=x).filter(|&p| (2..).take_while(|q| q * q <= p).all(|q| p % q != 0)).collect()
}

fn is_complete(r: &[i64], d: i64) -> bool {
    reachable_residues(r, d).iter().all(|&b| b)
}

/// Whether t ∈ S(A), for t in the decided region.
pub fn dense_decide(dd: &DenseDecomposition, t: i128) -> Result<bool> {
    if !dd.in_region(t) {
        return Err(Error::OutOfRegion {
            t,
            lo: dd.region_lo,
            hi: dd.region_hi,
        });
    }
    Ok(dd.residues[t.rem_euclid(dd.gamma as i128) as usize])
}

/// Distinct elements of A summing to t.
pub fn dense_search(dd: &DenseDecomposition, t: i128, rng: &mut RandomSource) -> Result<CompactSolution> {
    if !dense_decide(dd, t)? {
        return Err(precondition(format!("t = {t} is not a subset sum (residue modulo γ unreachable)")));
    }
    let gamma = dd.gamma;
    let y = modular_subset_sum(dd.nonmultiples.as_slice(), gamma, (t % gamma as i128) as i64)
        .ok_or_else(|| contract("reachable residue has no subset"))?;
    let y = shrink_mod(&y, gamma);
    let sum_y: i128 = y.iter().map(|&x| x as i128).sum();
    let rest = t - sum_y;
    if rest.rem_euclid(gamma as i128) != 0 {
        return Err(contract("Y leaves a remainder not divisible by γ"));
    }
    let z = rest / gamma as i128;
    let sum1 = dd.reduced.sum();
    let z_sub = if 2 * z <= sum1 {
        solve_reduced(dd, z, rng)?
    } else {
        let mut comp = solve_reduced(dd, sum1 - z, rng)?;
        comp.sort_unstable();
        minus(dd.reduced.as_slice(), &comp)
    };
    let mut elems = y;
    elems.extend(z_sub.iter().map(|&x| x * gamma));
    elems.sort_unstable();
    if elems.windows(2).any(|w| w[0] == w[1]) {
        return Err(contract("solution repeats an element"));
    }
    if let Some(&x) = elems.iter().find(|&&x| !dd.a.contains(x)) {
        return Err(contract(format!("solution uses {x}, which is not in A")));
    }
    let sol = CompactSolution::subset(elems, t);
    if sol.value_sum() != t {
        return Err(contract(format!("solution sums to {} instead of {t}", sol.value_sum())));
    }
    Ok(sol)
}

/// Subset of A′ with sum z, via G′, R′ and P′.
fn solve_reduced(dd: &DenseDecomposition, z: i128, rng: &mut RandomSource) -> Result<Vec<i64>> {
    let (s, d) = (dd.s, dd.d);
    let lo = z - s - dd.ell_p * d;
    let hi = z - s - dd.rho_r;
    let g_prime = coarse(&dd.bulk, lo, hi).ok_or_else(|| contract(format!("no G′ ⊆ G with sum in [{lo}, {hi}]")))?;
    let sum_g: i128 = g_prime.iter().map(|&x| x as i128).sum();
    if !(lo <= sum_g && sum_g <= hi) {
        return Err(contract("G′ left its window"));
    }
    let rem = z - sum_g - s;
    let r_prime = modular_subset_sum(dd.r.as_slice(), d as i64, rem.rem_euclid(d) as i64)
        .ok_or_else(|| contract("R is not d-complete"))?;
    let r_prime = shrink_mod(&r_prime, d as i64);
    let sum_r: i128 = r_prime.iter().map(|&x| x as i128).sum();
    let off = rem - sum_r;
    if off < 0 || off % d != 0 || off / d > dd.ell_p {
        return Err(contract(format!("offset {off} is not a progression index")));
    }
    let p_prime = dd.witness.query(off / d, rng)?;
    let mut out = g_prime;
    out.extend(r_prime);
    out.extend(p_prime.parts.iter().map(|&(x, _)| x));
    Ok(out)
}

/// Greedy over the other elements, then the chain sweep for the remainder.
fn coarse(bulk: &Bulk, lo: i128, hi: i128) -> Option<Vec<i64>> {
    let (c_lo, c_hi) = bulk.cover;
    let (tl, th) = (lo - c_hi, hi - c_lo);
    if th < 0 {
        return None;
    }
    let mut picked = Vec::new();
    let mut sum = 0i128;
    if tl > 0 {
        for &x in bulk.other.iter().rev() {
            if sum + x as i128 <= th {
                sum += x as i128;
                picked.push(x);
            }
        }
        if sum < tl {
            return None;
        }
    }
    picked.extend(sweep(&bulk.chain, lo - sum, hi - sum)?);
    Some(picked)
}

/// A subset of the sorted set `g` with sum in [lo, hi].
///
/// For a fixed size k, start from the k smallest elements and slide the top
/// ones upward; every slide raises the sum by one gap of `g`, so a window at
/// least as wide as the largest gap is always hit.
fn sweep(g: &[i64], lo: i128, hi: i128) -> Option<Vec<i64>> {
    if hi < lo {
        return None;
    }
    if lo <= 0 && 0 <= hi {
        return Some(Vec::new());
    }
    let n = g.len();
    let mut pre = vec![0i128; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + g[i] as i128;
    }
    let total = pre[n];
    let k0 = (1..=n).find(|&k| total - pre[n - k] >= lo)?;
    for k in k0..=n {
        if pre[k] > hi {
            break;
        }
        if let Some(idx) = sweep_k(g, k, pre[k], lo, hi) {
            return Some(idx.into_iter().map(|i| g[i]).collect());
        }
    }
    None
}

fn sweep_k(g: &[i64], k: usize, start: i128, lo: i128, hi: i128) -> Option<Vec<usize>> {
    let n = g.len();
    let mut pos: Vec<usize> = (0..k).collect();
    let mut cur = start;
    for slot in (0..k).rev() {
        if cur >= lo {
            break;
        }
        let from = pos[slot];
        let top = n - (k - slot);
        let full = cur + (g[top] - g[from]) as i128;
        if full < lo {
            pos[slot] = top;
            cur = full;
            continue;
        }
        // smallest p with cur + g[p] − g[from] ≥ lo
        let need = lo - cur + g[from] as i128;
        let p = from + g[from..=top].partition_point(|&x| (x as i128) < need);
        pos[slot] = p;
        cur += (g[p] - g[from]) as i128;
    }
    (lo <= cur && cur <= hi).then_some(pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums_mod(y: &[i64], g: i64) -> i64 {
        y.iter().sum::<i64>().rem_euclid(g)
    }

    #[test]
    fn factorize_examples() {
        let a = SortedIntSet::from_sorted(vec![1, 12, 97]).unwrap();
        assert_eq!(factorize_all(&a).unwrap(), vec![vec![], vec![2, 2, 3], vec![97]]);
        let big = SortedIntSet::from_sorted(vec![FACTOR_CAP + 1]).unwrap();
        assert!(matches!(factorize_all(&big), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn gamma_of_even_set() {
        let a = SortedIntSet::from_sorted((1..=500).map(|x| 2 * x).collect()).unwrap();
        let s = find_gamma(&a, 4.0).unwrap();
        assert_eq!(s.gamma % 2, 0);
        assert!(s.nonmultiples.is_empty());
        assert_eq!(s.reduced.as_slice(), (1..=500).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn gamma_of_consecutive_set() {
        let a = SortedIntSet::from_sorted((1..=1000).collect()).unwrap();
        let s = find_gamma(&a, 4.0).unwrap();
        assert_eq!(s.gamma, 1);
        // every prime misses far more than the threshold
        let theta = almost_divisor_threshold(4.0, a.sum(), a.len());
        for p in [2i64, 3, 5, 7] {
            assert!(a.iter().filter(|x| x % p != 0).count() as f64 > theta);
        }
    }

    #[test]
    fn modular_examples() {
        let y = modular_subset_sum(&[3, 5], 4, 0).unwrap();
        assert_eq!(sums_mod(&y, 4), 0);
        assert_eq!(modular_subset_sum(&[3, 5], 4, 3).unwrap(), vec![3]);
        assert_eq!(modular_subset_sum(&[2], 4, 1), None);
    }

    #[test]
    fn modular_matches_exhaustive() {
        let a = [3i64, 5, 9, 14, 20];
        for g in 1..12 {
            let mut reach = vec![false; g as usize];
            for mask in 0u32..32 {
                let s: i64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
                reach[s.rem_euclid(g) as usize] = true;
            }
            for r in 0..g {
                let got = modular_subset_sum(&a, g, r);
                assert_eq!(got.is_some(), reach[r as usize]);
                if let Some(y) = got {
                    assert_eq!(sums_mod(&y, g), r);
                }
            }
        }
    }

    #[test]
    fn shrink_examples() {
        let y = [1i64, 2, 4, 5, 7];
        let out = shrink_mod(&y, 3);
        assert!(out.len() <= 3);
        assert_eq!(sums_mod(&out, 3), sums_mod(&y, 3));
        assert_eq!(shrink_mod(&[1, 2], 5), vec![1, 2]);
        assert!(shrink_mod(&[3, 6, 9], 3).len() < 3);
    }

    #[test]
    fn sweep_hits_narrow_windows() {
        let g: Vec<i64> = (10..60).step_by(3).collect();
        let total: i128 = g.iter().map(|&x| x as i128).sum();
        for lo in 8..total - 10 {
            let out = sweep(&g, lo, lo + 2).unwrap();
            let s: i128 = out.iter().map(|&x| x as i128).sum();
            assert!(lo <= s && s <= lo + 2, "lo {lo} got {s}");
        }
    }

    #[test]
    fn consecutive_4000() {
        let raw: Vec<i128> = (1..=4000).collect();
        let dd = build_rpg(&raw, &DenseParams::tuned()).unwrap();
        assert_eq!(dd.gamma, 1);
        let sum_a = dd.input().sum();
        assert!(2 * dd.g.sum() >= sum_a);
        let total = dd.r.len() + dd.p.len() + dd.g.len();
        assert_eq!(total, 4000);
        let mut rng = RandomSource::new(5);
        for j in [0, dd.ell_p / 2, dd.ell_p] {
            let sol = dd.witness.query(j, &mut rng).unwrap();
            assert!(sol.parts.iter().all(|&(x, _)| dd.p.contains(x)));
        }
        let t = sum_a / 2;
        assert!(dense_decide(&dd, t).unwrap());
        let sol = dense_search(&dd, t, &mut rng).unwrap();
        assert_eq!(sol.value_sum(), t);
        let lo = dd.region_lo;
        assert_eq!(dense_search(&dd, lo, &mut rng).unwrap().value_sum(), lo);
    }

    #[test]
    fn remainder_set_has_non_multiples() {
        let raw: Vec<i128> = (1..=3000).filter(|x| x % 7 != 3).collect();
        let dd = build_rpg(&raw, &DenseParams::tuned()).unwrap();
        let bound = dd.tau.min(200);
        for g in 2..=bound {
            assert!(dd.r.iter().filter(|x| x % g != 0).count() as i64 >= g);
        }
    }

    #[test]
    fn even_set_rejects_odd_targets() {
        let raw: Vec<i128> = (1..=1500).map(|x| 2 * x).collect();
        let dd = build_rpg(&raw, &DenseParams::tuned()).unwrap();
        assert_eq!(dd.gamma, 2);
        let t = dd.region_lo + (dd.region_lo % 2 == 0) as i128;
        assert!(!dense_decide(&dd, t).unwrap());
        assert!(dense_search(&dd, t, &mut RandomSource::new(1)).is_err());
        let even = t + 1;
        let sol = dense_search(&dd, even, &mut RandomSource::new(1)).unwrap();
        assert_eq!(sol.value_sum(), even);
    }

    #[test]
    fn sparse_and_strict_profile_inputs_rejected() {
        let sparse: Vec<i128> = (1..=50).map(|x| x * x).collect();
        assert!(matches!(build_rpg(&sparse, &DenseParams::tuned()), Err(Error::PreconditionViolated(_))));
        let raw: Vec<i128> = (1..=4000).collect();
        let err = build_rpg(&raw, &DenseParams::paper()).unwrap_err();
        assert!(err.to_string().contains("δ-dense"));
    }

    #[test]
    fn out_of_region() {
        let raw: Vec<i128> = (1..=2000).collect();
        let dd = build_rpg(&raw, &DenseParams::tuned()).unwrap();
        assert!(matches!(dense_decide(&dd, dd.region_hi + 1), Err(Error::OutOfRegion { .. })));
        assert!(matches!(dense_decide(&dd, 0), Err(Error::OutOfRegion { .. })));
    }
}
