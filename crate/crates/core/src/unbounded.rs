//! Unbounded Subset Sum above a constant factor of the Erdős–Graham bound.
//!
//! With d = gcd(a_1, …, a_{n−1}), the scaled set {0, a_1/d, …, a_{n−1}/d}
//! has a kA progression {s} + [0, a_n − 1]. Copies of a_n fix the residue of t
//! modulo d and absorb whole multiples of a_n; the progression covers the rest.

use crate::arith::ceil_div;
use crate::error::{contract, precondition, Result};
use crate::rng::RandomSource;
use crate::set::{normalize, SortedIntSet};
use crate::sumset_ap::{sumset_witness, SumsetWitness};
use num_integer::Integer;
use serde::Serialize;

/// Multipliers x_i, one per input value, with Σ a_i·x_i = t.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnboundedSolution {
    pub x: Vec<(i64, u128)>,
    pub target: i128,
}

impl UnboundedSolution {
    pub fn total(&self) -> i128 {
        self.x.iter().map(|&(a, c)| a as i128 * c as i128).sum()
    }
}

/// Reusable solver state for one coin set.
#[derive(Clone, Debug)]
pub struct UnboundedSolver {
    coins: SortedIntSet,
    d: i64,
    witness: SumsetWitness,
    /// t_0 = (d − 1)·a_n + s·d; every t ≥ t_0 is solved.
    pub t0: i128,
    /// 333·⌈a_n/(n − 1)⌉·a_{n−1}.
    pub threshold: i128,
}

/// 333·⌈a_n/(n − 1)⌉·a_{n−1} for a sorted coin set with n ≥ 2.
pub fn unbounded_threshold(coins: &SortedIntSet) -> Option<i128> {
    let v = coins.as_slice();
    if v.len() < 2 {
        return None;
    }
    let n = v.len() as i128;
    let an = v[v.len() - 1] as i128;
    let an1 = v[v.len() - 2] as i128;
    Some(333 * ceil_div(an, n - 1) * an1)
}

impl UnboundedSolver {
    pub fn new(raw: &[i128]) -> Result<Self> {
        let coins = normalize(raw)?.set;
        if coins.min() == Some(0) {
            return Err(precondition("coins must be positive"));
        }
        if coins.len() < 2 {
            return Err(precondition(format!("n ≥ 2 fails: n = {}", coins.len())));
        }
        let v = coins.as_slice();
        let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        if g != 1 {
            return Err(precondition(format!("gcd(a_1, …, a_n) = 1 fails: gcd = {g}")));
        }
        let an = *v.last().unwrap();
        let rest = &v[..v.len() - 1];
        let d = rest.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        let mut scaled = vec![0i64];
        scaled.extend(rest.iter().map(|&x| x / d));
        let scaled = SortedIntSet::from_sorted(scaled)?;
        let n = v.len() as i128;
        let k = ceil_div(an as i128, n) as u64;
        let witness = sumset_witness(&scaled, an as i128 - 1, k)?;
        if witness.fold_budget > 332 * k {
            return Err(contract("witness exceeds 332k parts"));
        }
        let t0 = (d as i128 - 1) * an as i128 + witness.ap.start * d as i128;
        let threshold = unbounded_threshold(&coins).unwrap();
        if t0 > threshold {
            return Err(contract(format!("t_0 = {t0} exceeds the threshold {threshold}")));
        }
        Ok(UnboundedSolver {
            coins,
            d,
            witness,
            t0,
            threshold,
        })
    }

    pub fn coins(&self) -> &SortedIntSet {
        &self.coins
    }

    /// Solves Σ a_i·x_i = t for any t ≥ threshold.
    pub fn solve(&self, t: i128, rng: &mut RandomSource) -> Result<UnboundedSolution> {
        if t < self.threshold {
            return Err(precondition(format!(
                "t ≥ 333·⌈a_n/(n−1)⌉·a_(n−1) fails: t = {t}, threshold {}",
                self.threshold
            )));
        }
        self.solve_from_t0(t, rng)
    }

    /// Same as [`solve`](Self::solve) but accepts any t ≥ t_0.
    pub fn solve_from_t0(&self, t: i128, rng: &mut RandomSource) -> Result<UnboundedSolution> {
        if t < self.t0 {
            return Err(precondition(format!("t ≥ t_0 fails: t = {t}, t_0 = {}", self.t0)));
        }
        let v = self.coins.as_slice();
        let an = *v.last().unwrap() as i128;
        let d = self.d as i128;
        let target_res = t.mod_floor(&d);
        let mut i_t = 0i128;
        let mut r = 0i128;
        while r != target_res {
            r = (r + an) % d;
            i_t += 1;
            if i_t >= d {
                return Err(contract("no residue of a_n matches t"));
            }
        }
        let z = (t - i_t * an) / d - self.witness.ap.start;
        let (q, rem) = z.div_mod_floor(&an);
        let sol = self.witness.query(rem, rng)?;
        let mut x: Vec<(i64, u128)> = v.iter().map(|&a| (a, 0u128)).collect();
        for &(unit, c) in &sol.parts {
            if unit == 0 {
                continue;
            }
            let a = unit * self.d;
            let idx = v
                .binary_search(&a)
                .map_err(|_| contract(format!("witness part {unit} maps outside the coin set")))?;
            x[idx].1 += c as u128;
        }
        let last = x.len() - 1;
        x[last].1 += (q * d + i_t) as u128;
        let out = UnboundedSolution { x, target: t };
        if out.total() != t {
            return Err(contract(format!("multipliers sum to {} instead of {t}", out.total())));
        }
        Ok(out)
    }
}

/// One-shot solver.
pub fn solve_unbounded(raw: &[i128], t: i128, rng: &mut RandomSource) -> Result<UnboundedSolution> {
    UnboundedSolver::new(raw)?.solve(t, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn three_five() {
        let mut rng = RandomSource::new(1);
        let sol = solve_unbounded(&[3, 5], 5000, &mut rng).unwrap();
        assert_eq!(sol.total(), 5000);
        assert_eq!(sol.x.len(), 2);
    }

    #[test]
    fn rejects() {
        let mut rng = RandomSource::new(1);
        assert!(matches!(solve_unbounded(&[2, 4], 10_000, &mut rng), Err(Error::PreconditionViolated(_))));
        assert!(matches!(solve_unbounded(&[7], 10_000, &mut rng), Err(Error::PreconditionViolated(_))));
        assert!(matches!(solve_unbounded(&[3, 5], 100, &mut rng), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn nontrivial_residue() {
        // d = gcd(6, 10) = 2, a_n = 15
        let s = UnboundedSolver::new(&[6, 10, 15]).unwrap();
        let mut rng = RandomSource::new(2);
        for t in s.threshold..s.threshold + 200 {
            assert_eq!(s.solve(t, &mut rng).unwrap().total(), t);
        }
    }

    #[test]
    fn large_coins() {
        let s = UnboundedSolver::new(&[1_000_003, 2_000_001, 5_000_011]).unwrap();
        let mut rng = RandomSource::new(3);
        let t = s.threshold + 12_345;
        assert_eq!(s.solve(t, &mut rng).unwrap().total(), t);
    }
}
