use super::{extract_aug_pairs, log2_real, mod_ladder, short_ap_ss, GapScan, PairAp, PairSet, Profile};
use crate::arith::ceil_div;
use crate::augment::{augment_by_ladder, div_pair, AugmentChain, LadderSource, Layer};
use crate::error::{contract, exhausted, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::set::{normalize, SortedIntSet};
use crate::solution::{ArithProgression, CompactSolution};

/// One round of subset-sum augmentation.
#[derive(Clone, Debug)]
pub struct SsStep {
    pub d_prime: i128,
    /// Elements the new layers may use; disjoint from every earlier layer.
    pub consumed: Vec<i64>,
    pub progression: ArithProgression,
    pub layers: Vec<Layer>,
    /// 1 for a residue ladder, 2 for divisible pairs.
    pub case: u8,
}

fn grows_enough(before: &ArithProgression, after: &ArithProgression) -> bool {
    2 * after.length >= 3 * before.length
}

fn via_div_pairs(p: ArithProgression, pairs: &[(i64, i64)]) -> Result<SsStep> {
    if pairs.is_empty() {
        return Err(exhausted("no divisible pairs", Some(p)));
    }
    let mut cur = p;
    let mut layers = Vec::with_capacity(pairs.len());
    let mut consumed = Vec::with_capacity(2 * pairs.len());
    for &(lo, hi) in pairs {
        let (next, layer) = div_pair(cur, lo, hi - lo, 1, true)?;
        layers.push(layer);
        consumed.extend([lo, hi]);
        cur = next;
    }
    Ok(SsStep {
        d_prime: p.diff,
        consumed,
        progression: cur,
        layers,
        case: 2,
    })
}

fn via_ladder(p: ArithProgression, pairs: &[(i64, i64)], profile: &Profile) -> Result<SsStep> {
    if pairs.is_empty() || p.diff < 2 {
        return Err(exhausted("no non-divisible pairs", Some(p)));
    }
    let t = PairSet::new(pairs.to_vec())?;
    let ladder = mod_ladder(&t, p.diff, profile)?;
    let consumed = match &ladder.source {
        LadderSource::Modular(ml) => ml.pairs().elements(),
        LadderSource::Pair { .. } => return Err(contract("subset-sum ladder must be modular")),
    };
    let d_prime = ladder.d_prime;
    let (outer, layer) = augment_by_ladder(p, ladder)?;
    Ok(SsStep {
        d_prime,
        consumed,
        progression: outer,
        layers: vec![layer],
        case: 1,
    })
}

/// Extracts augmentation pairs from the scan and applies them to P, giving a
/// progression at least 3/2 times as long over fresh elements.
pub fn aug_one_step_ss(
    p: ArithProgression,
    scan: &mut GapScan,
    n: i128,
    m: i128,
    profile: &Profile,
) -> Result<SsStep> {
    if p.length < 1 {
        return Err(precondition("aug_one_step_ss needs ℓ ≥ 1"));
    }
    let ex = extract_aug_pairs(scan, p.diff, p.length, n, m, profile)?;
    let case2_gain: i128 = ex.case2.iter().map(|&(lo, hi)| (hi - lo) as i128 / p.diff).sum();
    let order: [u8; 2] = match ex.reached {
        Some(1) => [1, 2],
        Some(_) => [2, 1],
        None if 2 * case2_gain >= p.length => [2, 1],
        None => [1, 2],
    };
    let mut last_err = None;
    for case in order {
        let attempt = if case == 1 {
            via_ladder(p, &ex.case1, profile)
        } else {
            via_div_pairs(p, &ex.case2)
        };
        match attempt {
            Ok(step) if grows_enough(&p, &step.progression) => return Ok(step),
            Ok(step) => {
                last_err = Some(format!(
                    "case {case} reached length {} from {}",
                    step.progression.length, p.length
                ))
            }
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    let reason = format!(
        "no augmentation reached 3/2 growth ({})",
        last_err.unwrap_or_default()
    );
    if profile.is_paper() {
        Err(contract(reason))
    } else {
        Err(exhausted(reason, Some(p)))
    }
}

/// Long progression in S(A') for a small coreset A' ⊆ A, with its witness.
#[derive(Clone, Debug)]
pub struct SubsetSumWitness {
    pub ap: ArithProgression,
    /// A' sorted; every certificate draws from it.
    pub coreset: Vec<i64>,
    /// 30000·ℓ·log2(n)/n with the profile's constant, ℓ replaced by max(ℓ, m)
    /// when ℓ < m.
    pub coreset_bound: f64,
    /// Length of the progression built from A' before augmentation.
    pub ell0: i128,
    pub rounds: usize,
    pub profile: Profile,
    base: SortedIntSet,
    short: PairAp,
    chain: AugmentChain,
}

impl SubsetSumWitness {
    pub fn base(&self) -> &SortedIntSet {
        &self.base
    }

    pub fn short(&self) -> &PairAp {
        &self.short
    }

    pub fn chain(&self) -> &AugmentChain {
        &self.chain
    }

    pub fn within_coreset_bound(&self) -> bool {
        self.coreset.len() as f64 <= self.coreset_bound
    }

    /// Distinct elements of A' summing to ap.start + j·d.
    pub fn query(&self, j: i128, rng: &mut RandomSource) -> Result<CompactSolution> {
        if j < 0 || j > self.ap.length {
            return Err(Error::OutOfRange {
                z: j,
                max: self.ap.length,
            });
        }
        let (j0, parts) = self.chain.resolve(j, rng)?;
        let mut elems: Vec<i64> = parts
            .into_iter()
            .map(|(x, c)| {
                if c == 1 {
                    Ok(x)
                } else {
                    Err(contract(format!("subset certificate uses {x} {c} times")))
                }
            })
            .collect::<Result<_>>()?;
        elems.extend(self.short.query(j0, rng)?);
        elems.sort_unstable();
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(contract(format!("certificate for term {j} reuses {}", w[0])));
        }
        let sol = CompactSolution::subset(elems, self.ap.term(j));
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

fn paper_gates(big_n: i128, m: i128, ell: i128, profile: &Profile) -> Result<()> {
    if ell < m {
        return Err(precondition(format!("m ≤ ℓ fails: m = {m}, ℓ = {ell}")));
    }
    let nf = big_n as f64;
    let bound = nf * nf / (profile.c5e8 as f64 * log2_real(2.0 * nf));
    if ell as f64 > bound {
        return Err(precondition(format!(
            "ℓ ≤ n²/(5·10^8·log2(2n)) fails: ℓ = {ell}, n = {big_n}, bound {bound:.3}"
        )));
    }
    Ok(())
}

struct Built {
    ap: ArithProgression,
    short: PairAp,
    chain: AugmentChain,
    consumed: Vec<i64>,
    rounds: usize,
}

fn build(
    a1: &SortedIntSet,
    a2: &SortedIntSet,
    ell0: i128,
    ell: i128,
    n: i128,
    m: i128,
    profile: &Profile,
) -> Result<Built> {
    let short = short_ap_ss(a1, ell0, profile)?;
    let mut p = short.ap;
    let mut chain = AugmentChain::new();
    let mut consumed = Vec::new();
    let cap = (2.0 * log2_real(n as f64)).ceil().max(1.0) as usize;
    let mut scan = GapScan::new(a2);
    let mut rounds = 0;
    while p.length < ell {
        if rounds == cap {
            return Err(exhausted(format!("{cap} augmentation rounds did not reach ℓ = {ell}"), Some(p)));
        }
        let step = aug_one_step_ss(p, &mut scan, n, m, profile).map_err(|e| match e {
            Error::Exhausted { reason, .. } => exhausted(reason, Some(p)),
            other => other,
        })?;
        consumed.extend(&step.consumed);
        chain.extend(step.layers);
        p = step.progression;
        rounds += 1;
    }
    Ok(Built {
        ap: p.truncated(ell),
        short,
        chain,
        consumed,
        rounds,
    })
}

/// Builds {s} + {0, d, …, ℓd} ⊆ S(A') for a coreset A' of the input.
///
/// Zero is dropped from the input. The smallest 4⌊N/6⌋ elements give the
/// short progression; the rest feed the augmentation rounds.
pub fn theorem_ss(raw: &[i128], ell: i128, profile: &Profile) -> Result<SubsetSumWitness> {
    let norm = normalize(raw)?.set;
    let base = SortedIntSet::from_sorted(norm.iter().filter(|&x| x > 0).collect())?;
    let big_n = base.len() as i128;
    if big_n < 6 {
        return Err(Error::TooSmall {
            need: 6,
            got: base.len(),
        });
    }
    if ell < 1 {
        return Err(precondition(format!("ℓ ≥ 1 fails: ℓ = {ell}")));
    }
    let m = base.max().unwrap() as i128;
    let n = big_n / 6;
    if profile.is_paper() {
        paper_gates(big_n, m, ell, profile)?;
    }
    let split = 4 * n as usize;
    let a1 = SortedIntSet::from_sorted(base.as_slice()[..split].to_vec())?;
    let a2 = SortedIntSet::from_sorted(base.as_slice()[split..].to_vec())?;
    let m1 = a1.max().unwrap() as i128;
    let floor_len = ceil_div(m1, n).max(1);
    let scheduled = ceil_div(profile.c16000 * ell, n);
    let (ell0, built) = if profile.is_paper() {
        (scheduled, build(&a1, &a2, scheduled, ell, n, m, profile)?)
    } else {
        let ell0 = scheduled.max(ceil_div(profile.c16000 * m, n)).max(floor_len);
        let direct = ell.max(floor_len);
        if ell0 < ell {
            match build(&a1, &a2, ell0, ell, n, m, profile) {
                Ok(b) => (ell0, b),
                Err(Error::Exhausted { reason, partial }) => match build(&a1, &a2, direct, ell, n, m, profile) {
                    Ok(b) => (direct, b),
                    Err(Error::Exhausted { .. }) => return Err(Error::Exhausted { reason, partial }),
                    Err(e) => return Err(e),
                },
                Err(e) => return Err(e),
            }
        } else {
            (direct, build(&a1, &a2, direct, ell, n, m, profile)?)
        }
    };
    let d = built.ap.diff;
    if d * big_n > 7 * m {
        let reason = format!("d ≤ 7m/n fails: d = {d}, m = {m}, n = {big_n}");
        return Err(if profile.is_paper() {
            contract(reason)
        } else {
            exhausted(reason, Some(built.ap))
        });
    }
    let mut coreset = built.short.elements();
    coreset.extend(&built.consumed);
    coreset.sort_unstable();
    if coreset.windows(2).any(|w| w[0] == w[1]) {
        return Err(contract("layers share an element"));
    }
    let scale = if profile.is_paper() { ell } else { ell.max(m) };
    let coreset_bound = profile.c30000 as f64 * scale as f64 * log2_real(n as f64) / n as f64;
    let witness = SubsetSumWitness {
        ap: built.ap,
        coreset,
        coreset_bound,
        ell0,
        rounds: built.rounds,
        profile: *profile,
        base,
        short: built.short,
        chain: built.chain,
    };
    if profile.is_paper() && !witness.within_coreset_bound() {
        return Err(contract(format!(
            "coreset of {} exceeds 30000ℓ·log2(n)/n = {:.1}",
            witness.coreset.len(),
            witness.coreset_bound
        )));
    }
    Ok(witness)
}
