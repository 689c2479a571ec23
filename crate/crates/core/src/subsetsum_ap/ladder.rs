use super::pairs::flip_pairs;
use super::{log2_real, uniformize_by_residue, PairSet, Profile};
use crate::arith::{ceil_div, floor_div};
use crate::augment::{LadderAccessor, LadderSource, Parts};
use crate::error::{contract, exhausted, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::set::SortedIntSet;
use crate::sumset_ap::{sumset_witness, SumsetWitness};
use num_integer::Integer;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
enum Route {
    /// kR witness on R/d' ∪ {0, d/d'}; residue parts flip pairs.
    Sumset {
        index: BTreeMap<i64, Vec<usize>>,
        witness: SumsetWitness,
    },
    /// Pair indices to flip for each rung (tuned fallback).
    Reach(Vec<Vec<usize>>),
}

/// Residue ladder over a conflict-free pair set: for each i < d/d' a subset
/// sum q_i ≡ s_q + i·d' (mod d) of A_{T*}.
#[derive(Clone, Debug)]
pub struct ModLadder {
    pub d: i128,
    pub d_prime: i128,
    pub s_q: i128,
    pub h_min: i128,
    pub h_max: i128,
    pairs: PairSet,
    route: Route,
}

impl ModLadder {
    /// T*, the pairs whose endpoints the ladder may use.
    pub fn pairs(&self) -> &PairSet {
        &self.pairs
    }

    pub fn uses_sumset_witness(&self) -> bool {
        matches!(self.route, Route::Sumset { .. })
    }

    /// q_i with its subset of A_{T*}, each element once.
    pub fn lookup(&self, i: i128, rng: &mut RandomSource) -> Result<(i128, Parts)> {
        let rungs = self.d / self.d_prime;
        if i < 0 || i >= rungs {
            return Err(contract(format!("ladder index {i} outside [0, {rungs})")));
        }
        let pairs = self.pairs.pairs();
        let elems = match &self.route {
            Route::Sumset { index, witness } => {
                let sol = witness.query(i, rng)?;
                let dp = self.d_prime as i64;
                let picks = sol
                    .parts
                    .iter()
                    .filter(|&&(v, _)| v != 0 && v as i128 != rungs)
                    .map(|&(v, c)| (v * dp, c));
                flip_pairs(pairs, index, picks)?
            }
            Route::Reach(flips) => {
                let mut high = vec![false; pairs.len()];
                for &p in &flips[i as usize] {
                    high[p] = true;
                }
                pairs
                    .iter()
                    .zip(high)
                    .map(|(&(lo, hi), h)| if h { hi } else { lo })
                    .collect()
            }
        };
        let q: i128 = elems.iter().map(|&x| x as i128).sum();
        if (q - self.s_q - i * self.d_prime).mod_floor(&self.d) != 0 {
            return Err(contract(format!("ladder rung {i} has the wrong residue")));
        }
        let h = floor_div(q - self.s_q, self.d);
        if h < self.h_min || h > self.h_max {
            return Err(contract(format!("ladder rung {i} leaves [h_min, h_max]")));
        }
        Ok((q, elems.into_iter().map(|x| (x, 1)).collect()))
    }
}

/// Builds the residue ladder for pairs whose gaps d never divides.
pub fn mod_ladder(t: &PairSet, d: i128, profile: &Profile) -> Result<LadderAccessor> {
    if d < 2 {
        return Err(precondition(format!("mod_ladder needs d ≥ 2, got {d}")));
    }
    if t.is_empty() {
        return Err(precondition("mod_ladder needs a nonempty pair set"));
    }
    if let Some(&(lo, hi)) = t.pairs().iter().find(|&&(lo, hi)| ((hi - lo) as i128) % d == 0) {
        return Err(precondition(format!(
            "d ∤ g fails: pair ({lo}, {hi}) has gap divisible by d = {d}"
        )));
    }
    if profile.is_paper() {
        let n = t.len() as f64;
        if d as f64 > n / (profile.c1000 as f64 * log2_real(2.0 * n)) {
            return Err(precondition(format!(
                "d ≤ |T|/(1000·log2(2|T|)) fails: d = {d}, |T| = {}",
                t.len()
            )));
        }
    }
    let ladder = match by_sumset(t, d, profile) {
        Ok(l) => l,
        Err(e) if profile.is_paper() => return Err(e),
        Err(_) => by_reach(t, d)?,
    };
    Ok(LadderAccessor {
        d: ladder.d,
        d_prime: ladder.d_prime,
        s_q: ladder.s_q,
        h_min: ladder.h_min,
        h_max: ladder.h_max,
        source: LadderSource::Modular(Arc::new(ladder)),
    })
}

fn by_sumset(t: &PairSet, d: i128, profile: &Profile) -> Result<ModLadder> {
    let (u, tp) = uniformize_by_residue(t, d as i64);
    let residues: Vec<i64> = tp.residues(d as i64).keys().copied().collect();
    let dp = residues.iter().fold(d, |acc, &r| acc.gcd(&(r as i128)));
    let rungs = d / dp;
    let mut base: Vec<i64> = vec![0, rungs as i64];
    base.extend(residues.iter().map(|&r| r / dp as i64));
    let base = SortedIntSet::from_unsorted(base)?;
    let k = ceil_div(rungs + 1, base.len() as i128) as u64;
    let witness = sumset_witness(&base, rungs, k)?;
    let fold = witness.fold_budget as i128;
    let z_max = witness.ap.start + rungs - 1;
    let need = |unit: i64| -> u64 { fold.min(z_max / unit as i128) as u64 };
    let mut kept: BTreeMap<i64, u64> = BTreeMap::new();
    if profile.is_paper() {
        let k = (profile.c1000 * d / residues.len() as i128) as u64;
        if k as usize > u {
            return Err(contract(format!("thinning multiplicity k = {k} exceeds u = {u}")));
        }
        for &r in &residues {
            let nv = need(r / dp as i64);
            if nv > k {
                return Err(Error::MultiplicityExceeded { gap: r, need: nv, have: k });
            }
            kept.insert(r, k);
        }
    } else {
        for &r in &residues {
            let nv = need(r / dp as i64);
            if nv as usize > u {
                return Err(Error::MultiplicityExceeded {
                    gap: r,
                    need: nv,
                    have: u as u64,
                });
            }
            kept.insert(r, nv);
        }
    }
    let by_res = tp_index(&tp, d);
    let mut chosen: Vec<usize> = Vec::new();
    for (r, &c) in &kept {
        chosen.extend(by_res[r][..c as usize].iter().copied());
    }
    chosen.sort_unstable();
    let pairs = PairSet::new(chosen.into_iter().map(|i| tp.pairs()[i]).collect())?;
    let index = tp_index(&pairs, d);
    let s_t = pairs.lo_sum();
    let s_q = s_t + dp * witness.ap.start;
    let g_max = pairs.max_gap() as i128;
    let min_unit = residues.iter().map(|&r| r as i128 / dp).min().unwrap_or(1).max(1);
    let max_parts = fold.min(z_max / min_unit);
    let gap_total: i128 = pairs.pairs().iter().map(|&(lo, hi)| (hi - lo) as i128).sum();
    let f_max = (max_parts * g_max).min(gap_total);
    Ok(ModLadder {
        d,
        d_prime: dp,
        s_q,
        h_min: floor_div(s_t - s_q, d),
        h_max: floor_div(s_t + f_max - s_q, d),
        pairs,
        route: Route::Sumset { index, witness },
    })
}

fn tp_index(t: &PairSet, d: i128) -> BTreeMap<i64, Vec<usize>> {
    let mut m: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &(lo, hi)) in t.pairs().iter().enumerate() {
        m.entry((hi - lo).mod_floor(&(d as i64))).or_default().push(i);
    }
    m
}

/// Reachability over Z_d: each pair adds its gap at most once. Only pairs that
/// reach a new residue are kept, so T* has fewer than d/d' pairs.
fn by_reach(t: &PairSet, d: i128) -> Result<ModLadder> {
    let du = d as usize;
    let gaps: Vec<i128> = t.pairs().iter().map(|&(lo, hi)| (hi - lo) as i128).collect();
    let dp = gaps.iter().fold(d, |acc, &g| acc.gcd(&g));
    let rungs = (d / dp) as usize;
    // from[r] = (pair, previous residue)
    let mut from: Vec<Option<(usize, usize)>> = vec![None; du];
    let mut reached = vec![0usize];
    let mut seen = vec![false; du];
    seen[0] = true;
    for (p, &g) in gaps.iter().enumerate() {
        if reached.len() == rungs {
            break;
        }
        let r = g.mod_floor(&d) as usize;
        let snapshot = reached.len();
        for idx in 0..snapshot {
            let x = reached[idx];
            let y = (x + r) % du;
            if !seen[y] {
                seen[y] = true;
                from[y] = Some((p, x));
                reached.push(y);
            }
        }
    }
    if reached.len() < rungs {
        return Err(exhausted(
            format!(
                "pair residues reach {} of the {rungs} classes modulo {d}",
                reached.len()
            ),
            None,
        ));
    }
    let chain = |mut y: usize| -> Vec<usize> {
        let mut out = Vec::new();
        while let Some((p, x)) = from[y] {
            out.push(p);
            y = x;
        }
        out
    };
    let mut used: Vec<usize> = Vec::new();
    let raw: Vec<Vec<usize>> = (0..rungs)
        .map(|i| {
            let c = chain((i * dp as usize) % du);
            used.extend(&c);
            c
        })
        .collect();
    used.sort_unstable();
    used.dedup();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let pairs = PairSet::new(used.iter().map(|&p| t.pairs()[p]).collect())?;
    let flips: Vec<Vec<usize>> = raw
        .into_iter()
        .map(|c| c.into_iter().map(|p| remap[&p]).collect())
        .collect();
    let s_t = pairs.lo_sum();
    let hs: Vec<i128> = flips
        .iter()
        .map(|f| {
            let sum: i128 = f.iter().map(|&k| gaps[used[k]]).sum();
            floor_div(sum, d)
        })
        .collect();
    Ok(ModLadder {
        d,
        d_prime: dp,
        s_q: s_t,
        h_min: *hs.iter().min().unwrap(),
        h_max: *hs.iter().max().unwrap(),
        pairs,
        route: Route::Reach(flips),
    })
}
