//! Progression augmentation: shrink the common difference with a ladder of
//! residues, or stretch the length with a pair whose gap the difference divides.
//!
//! Each step is recorded as a [`Layer`] holding O(1) metadata. A query for a
//! term of the outer progression is resolved layer by layer down to a term of
//! the base progression, collecting the extra parts each layer contributes.

use crate::arith::{ceil_div, solve_residue_coefficient};
use crate::error::{contract, precondition, Result};
use crate::rng::RandomSource;
use crate::set::SortedIntSet;
use crate::solution::ArithProgression;
use crate::subsetsum_ap::ModLadder;
use num_integer::Integer;
use std::sync::Arc;

pub type Parts = Vec<(i64, u64)>;

/// How a ladder produces its elements q_i together with their solutions.
#[derive(Clone, Debug)]
pub enum LadderSource {
    /// q_i = (d/d')·a + j·g with j = i·j* mod (d/d'), solved by
    /// (d/d' − j) copies of a and j copies of a + g.
    Pair { a: i64, g: i64, jstar: i128 },
    /// Residue ladder over a pair set (subset-sum mode).
    Modular(Arc<ModLadder>),
}

/// Integers q_0, …, q_{d/d'−1} with q_i ≡ s_q + i·d' (mod d) and
/// h_min ≤ ⌊(q_i − s_q)/d⌋ ≤ h_max.
#[derive(Clone, Debug)]
pub struct LadderAccessor {
    pub d: i128,
    pub d_prime: i128,
    pub s_q: i128,
    pub h_min: i128,
    pub h_max: i128,
    pub source: LadderSource,
}

impl LadderAccessor {
    pub fn rungs(&self) -> i128 {
        self.d / self.d_prime
    }

    /// Returns q_i and a solution for it.
    pub fn lookup(&self, i: i128, rng: &mut RandomSource) -> Result<(i128, Parts)> {
        if i < 0 || i >= self.rungs() {
            return Err(contract(format!("ladder index {i} outside [0, {})", self.rungs())));
        }
        match &self.source {
            LadderSource::Pair { a, g, jstar } => {
                let r = self.rungs();
                let j = (i * jstar).mod_floor(&r);
                let q = self.s_q + j * *g as i128;
                let mut parts = Vec::with_capacity(2);
                if r - j > 0 {
                    parts.push((*a, (r - j) as u64));
                }
                if j > 0 {
                    parts.push((a + g, j as u64));
                }
                Ok((q, parts))
            }
            LadderSource::Modular(ml) => ml.lookup(i, rng),
        }
    }

    /// Extra fold budget a lookup may consume (sumset mode).
    pub fn budget(&self) -> u64 {
        match &self.source {
            LadderSource::Pair { .. } => self.rungs() as u64,
            LadderSource::Modular(_) => 0,
        }
    }
}

/// Ladder built from one pair (a, a + g) with d ∤ g.
pub fn ladder_from_pair(d: i128, a: i64, g: i64) -> Result<LadderAccessor> {
    if d < 2 {
        return Err(precondition(format!("ladder needs d >= 2, got {d}")));
    }
    if g < 1 || (g as i128) % d == 0 {
        return Err(precondition(format!("ladder needs d ∤ g, got d = {d}, g = {g}")));
    }
    let (dp, jstar) = solve_residue_coefficient(d, g as i128);
    // j runs over [0, d/d' − 1], so ⌊j·g/d⌋ peaks at the last j; this never
    // exceeds g/d'.
    Ok(LadderAccessor {
        d,
        d_prime: dp,
        s_q: d * a as i128 / dp,
        h_min: 0,
        h_max: (d / dp - 1) * g as i128 / d,
        source: LadderSource::Pair { a, g, jstar },
    })
}

/// One augmentation step.
#[derive(Clone, Debug)]
pub enum Layer {
    Ladder {
        inner: ArithProgression,
        outer: ArithProgression,
        ladder: LadderAccessor,
    },
    Div {
        inner: ArithProgression,
        outer: ArithProgression,
        a: i64,
        g: i64,
        h: u64,
        subset_mode: bool,
    },
}

impl Layer {
    pub fn inner(&self) -> ArithProgression {
        match self {
            Layer::Ladder { inner, .. } | Layer::Div { inner, .. } => *inner,
        }
    }

    pub fn outer(&self) -> ArithProgression {
        match self {
            Layer::Ladder { outer, .. } | Layer::Div { outer, .. } => *outer,
        }
    }

    /// Extra elements (with multiplicity) this layer adds to any certificate.
    pub fn budget(&self) -> u64 {
        match self {
            Layer::Ladder { ladder, .. } => ladder.budget(),
            Layer::Div { h, .. } => *h,
        }
    }

    /// Maps outer term index j' to an inner term index plus the layer's parts.
    pub fn resolve(&self, jp: i128, rng: &mut RandomSource) -> Result<(i128, Parts)> {
        let outer = self.outer();
        if jp < 0 || jp > outer.length {
            return Err(contract(format!("layer term {jp} outside [0, {}]", outer.length)));
        }
        let inner = self.inner();
        let (p, parts) = match self {
            Layer::Ladder { ladder, .. } => {
                let dp = ladder.d_prime;
                let i = (jp * dp).mod_floor(&ladder.d) / dp;
                let (q, parts) = ladder.lookup(i, rng)?;
                (outer.term(jp) - q, parts)
            }
            Layer::Div {
                a, g, h, subset_mode, ..
            } => {
                let d = inner.diff;
                let g128 = *g as i128;
                let span = *h as i128 * g128 / d;
                if jp < span {
                    let q = jp * d / g128;
                    let j = (jp * d).mod_floor(&g128) / d;
                    let mut parts = Vec::new();
                    if q > 0 {
                        parts.push((a + g, q as u64));
                    }
                    if (*h as i128) - q > 0 {
                        parts.push((*a, (*h as i128 - q) as u64));
                    }
                    if *subset_mode && parts.iter().any(|&(_, c)| c > 1) {
                        return Err(contract("div layer in subset mode must have h = 1"));
                    }
                    (inner.term(j), parts)
                } else {
                    (inner.term(jp - span), vec![(a + g, *h)])
                }
            }
        };
        match inner.index_of(p) {
            Some(j) => Ok((j, parts)),
            None => Err(contract(format!(
                "residual {p} is not a term of inner progression {inner}"
            ))),
        }
    }
}

/// Applies a ladder to P, shrinking the difference from d to d'.
pub fn augment_by_ladder(p: ArithProgression, ladder: LadderAccessor) -> Result<(ArithProgression, Layer)> {
    if ladder.d != p.diff {
        return Err(precondition(format!(
            "ladder modulus {} differs from progression diff {}",
            ladder.d, p.diff
        )));
    }
    let dp = ladder.d_prime;
    if dp < 1 || dp >= p.diff || p.diff % dp != 0 {
        return Err(precondition(format!("d' = {dp} is not a proper divisor of d = {}", p.diff)));
    }
    let spread = ladder.h_max - ladder.h_min;
    if p.length < spread {
        return Err(precondition(format!(
            "progression length {} < h_max − h_min = {spread}",
            p.length
        )));
    }
    let start = p.start + ladder.s_q + ladder.h_max * p.diff;
    let length = (p.length - spread) * (p.diff / dp);
    let outer = ArithProgression::new(start, dp, length);
    Ok((
        outer,
        Layer::Ladder {
            inner: p,
            outer,
            ladder,
        },
    ))
}

/// Augmentation with a pair (a, a + g), d ∤ g.
pub fn augment_nondiv_pair(p: ArithProgression, a: i64, g: i64) -> Result<(i128, ArithProgression, Layer)> {
    if p.diff <= 1 {
        return Err(precondition("augment_nondiv_pair needs diff > 1"));
    }
    let dp = p.diff.gcd(&(g as i128));
    if p.length < g as i128 / dp {
        return Err(precondition(format!(
            "ℓ ≥ g/d' fails: ℓ = {}, g = {g}, d' = {dp}",
            p.length
        )));
    }
    let ladder = ladder_from_pair(p.diff, a, g)?;
    let (outer, layer) = augment_by_ladder(p, ladder)?;
    Ok((dp, outer, layer))
}

/// Stretches P with h copies of a pair (a, a + g) whose gap d divides.
pub fn augment_div_pair(p: ArithProgression, a: i64, g: i64, h: u64) -> Result<(ArithProgression, Layer)> {
    div_pair(p, a, g, h, false)
}

pub(crate) fn div_pair(
    p: ArithProgression,
    a: i64,
    g: i64,
    h: u64,
    subset_mode: bool,
) -> Result<(ArithProgression, Layer)> {
    let g128 = g as i128;
    if g128 % p.diff != 0 {
        return Err(precondition(format!("d | g fails: d = {}, g = {g}", p.diff)));
    }
    if g < 1 || g128 > p.length * p.diff {
        return Err(precondition(format!(
            "1 ≤ g ≤ ℓd fails: g = {g}, ℓd = {}",
            p.length * p.diff
        )));
    }
    if h == 0 {
        return Err(precondition("h must be positive"));
    }
    let outer = ArithProgression::new(
        p.start + h as i128 * a as i128,
        p.diff,
        p.length + h as i128 * g128 / p.diff,
    );
    Ok((
        outer,
        Layer::Div {
            inner: p,
            outer,
            a,
            g,
            h,
            subset_mode,
        },
    ))
}

/// Pairs chosen from the consecutive gaps of A for one augmentation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapPairs {
    /// (a, g): d ∤ g, g ≤ 4m/n.
    Case1 { a: i64, g: i64 },
    /// (a, g) with d ∤ g and (a2, g2) with d | g2, g2 a run of divisible gaps.
    Case2 { a: i64, g: i64, a2: i64, g2: i64 },
}

/// Picks the augmentation pairs from consecutive gaps. Ties go to the first index.
pub fn find_gap_pairs(a: &SortedIntSet, d: i128, m: i128) -> Result<GapPairs> {
    let v = a.as_slice();
    let n = v.len();
    if n < 2 {
        return Err(precondition("find_gap_pairs needs |A| ≥ 2"));
    }
    if d < 2 {
        return Err(precondition("find_gap_pairs needs d ≥ 2"));
    }
    let divisible = |gap: i64| (gap as i128) % d == 0;
    let mut best: Option<(i64, i64)> = None;
    let mut nondiv = 0usize;
    for w in v.windows(2) {
        let gap = w[1] - w[0];
        if !divisible(gap) {
            nondiv += 1;
            if best.is_none_or(|(_, bg)| gap < bg) {
                best = Some((w[0], gap));
            }
        }
    }
    let Some((a1, g1)) = best else {
        return Err(precondition(format!(
            "every consecutive gap is divisible by d = {d}; A must have gcd 1"
        )));
    };
    if 4 * nondiv >= n {
        return Ok(GapPairs::Case1 { a: a1, g: g1 });
    }
    // Largest group of consecutive divisible gaps between non-divisible ones.
    let mut best_run: Option<(usize, usize, i64)> = None;
    let mut start = 0usize;
    let mut len = 0usize;
    let mut sum = 0i64;
    for i in 0..n - 1 {
        let gap = v[i + 1] - v[i];
        if divisible(gap) {
            if len == 0 {
                start = i;
            }
            len += 1;
            sum += gap;
        }
        let closes = !divisible(gap) || i + 2 == n;
        if closes && len > 0 {
            if best_run.is_none_or(|(_, bl, _)| len > bl) {
                best_run = Some((start, len, sum));
            }
            len = 0;
            sum = 0;
        }
    }
    let Some((st, _, g2)) = best_run else {
        return Err(contract("case 2 without a divisible gap"));
    };
    let _ = m;
    Ok(GapPairs::Case2 {
        a: a1,
        g: g1,
        a2: v[st],
        g2,
    })
}

/// Result of one augmentation step.
#[derive(Clone, Debug)]
pub struct AugmentStep {
    pub d_prime: i128,
    pub progression: ArithProgression,
    pub layers: Vec<Layer>,
}

/// One step of difference reduction in sumset mode.
pub fn augment_once(a: &SortedIntSet, p: ArithProgression, m: i128) -> Result<AugmentStep> {
    check_base(a)?;
    if p.length * p.diff < m {
        return Err(precondition(format!("ℓd ≥ m fails: ℓd = {}, m = {m}", p.length * p.diff)));
    }
    if p.diff < 2 {
        return Err(precondition("augment_once needs diff ≥ 2"));
    }
    let n = a.len() as i128;
    match find_gap_pairs(a, p.diff, m)? {
        GapPairs::Case1 { a: x, g } => {
            let (dp, outer, layer) = augment_nondiv_pair(p, x, g)?;
            Ok(AugmentStep {
                d_prime: dp,
                progression: outer,
                layers: vec![layer],
            })
        }
        GapPairs::Case2 { a: x, g, a2, g2 } => {
            let dp = p.diff.gcd(&(g as i128));
            let h = ceil_div(4 * m, n * dp).max(1) as u64;
            let (mid, l1) = augment_div_pair(p, a2, g2, h)?;
            let (dp2, outer, l2) = augment_nondiv_pair(mid, x, g)?;
            debug_assert_eq!(dp, dp2);
            Ok(AugmentStep {
                d_prime: dp2,
                progression: outer,
                layers: vec![l1, l2],
            })
        }
    }
}

fn check_base(a: &SortedIntSet) -> Result<()> {
    if !a.contains(0) {
        return Err(precondition("augmentation needs 0 ∈ A"));
    }
    if crate::set::gcd_all(a)? != 1 {
        return Err(precondition("augmentation needs gcd(A) = 1"));
    }
    Ok(())
}

/// Stack of layers, outermost last.
#[derive(Clone, Debug, Default)]
pub struct AugmentChain {
    layers: Vec<Layer>,
}

impl AugmentChain {
    pub fn new() -> Self {
        AugmentChain { layers: Vec::new() }
    }

    pub fn push(&mut self, layer: Layer) {
        if let Some(last) = self.layers.last() {
            debug_assert_eq!(last.outer(), layer.inner());
        }
        self.layers.push(layer);
    }

    pub fn extend(&mut self, layers: impl IntoIterator<Item = Layer>) {
        for l in layers {
            self.push(l);
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn budget(&self) -> u64 {
        self.layers.iter().map(Layer::budget).sum()
    }

    /// Resolves a term of the outermost progression to a base term index,
    /// returning the parts every layer contributed.
    pub fn resolve(&self, j: i128, rng: &mut RandomSource) -> Result<(i128, Parts)> {
        let mut idx = j;
        let mut parts = Vec::new();
        for layer in self.layers.iter().rev() {
            let (inner, p) = layer.resolve(idx, rng)?;
            idx = inner;
            parts.extend(p);
        }
        Ok((idx, parts))
    }
}

/// Result of [`augment_to_full`].
#[derive(Clone, Debug)]
pub struct FullAugment {
    pub progression: ArithProgression,
    pub chain: AugmentChain,
    pub iterations: usize,
}

/// Repeats [`augment_once`] until the difference is 1.
pub fn augment_to_full(a: &SortedIntSet, p: ArithProgression, m: i128) -> Result<FullAugment> {
    check_base(a)?;
    let n = a.len() as i128;
    if p.length * p.diff.min(n) < 5 * m {
        return Err(precondition(format!(
            "ℓ·min(d, n) ≥ 5m fails: ℓ = {}, d = {}, n = {n}, m = {m}",
            p.length, p.diff
        )));
    }
    let mut chain = AugmentChain::new();
    let mut cur = p;
    let mut iterations = 0;
    while cur.diff > 1 {
        let step = augment_once(a, cur, m)?;
        if cur.diff % step.d_prime != 0 || step.d_prime >= cur.diff {
            return Err(contract("augment_once did not shrink the difference"));
        }
        cur = step.progression;
        if cur.length * cur.diff < m {
            return Err(contract(format!(
                "ℓ_i·d_i ≥ m broken after iteration {iterations}: {cur}"
            )));
        }
        chain.extend(step.layers);
        iterations += 1;
    }
    let bound = 2 * p.diff + ceil_div(8 * m, n);
    if chain.budget() as i128 > bound {
        return Err(contract(format!(
            "augmentation budget {} exceeds 2d + ⌈8m/n⌉ = {bound}",
            chain.budget()
        )));
    }
    Ok(FullAugment {
        progression: cur,
        chain,
        iterations,
    })
}
