//! Las Vegas witness for {0, …, m} ⊆ 2kA when ρ_m(A) ≥ 2/k.
//!
//! Amplification: with k' = ⌈2/ρ_m(A)⌉ the greedy k'-fold set has density at
//! least 3/4 on [1, m], so for a uniform a ∈ [1, z] both a and z − a land in it
//! with probability at least 1/2. Each round costs two greedy queries.

use crate::arith::{ceil_div, ceil_log2};
use crate::error::{contract, precondition, Error, Result};
use crate::greedy::kfold_greedy_query;
use crate::rng::RandomSource;
use crate::set::{density_with_arg, SortedIntSet};
use crate::solution::CompactSolution;
use num_rational::Ratio;

#[derive(Clone, Debug)]
pub struct DensityWitness {
    base: SortedIntSet,
    m: i128,
    k_inner: u64,
}

/// Builds the witness; fails if 0 or 1 is missing or k·ρ_m(A) < 2.
pub fn build_density_witness(a: &SortedIntSet, m: i128, k: u64) -> Result<DensityWitness> {
    if m < 1 {
        return Err(precondition(format!("density witness needs m >= 1, got {m}")));
    }
    if !a.contains(0) || !a.contains(1) {
        return Err(precondition("membership: density witness needs {0,1} ⊆ A"));
    }
    if let Some(mx) = a.max() {
        if mx as i128 > m {
            return Err(precondition(format!("density witness needs A ⊆ [0, m]; max {mx} > {m}")));
        }
    }
    let dw = density_with_arg(a, m);
    let rho = dw.density.value();
    if Ratio::from_integer(k as i128) * rho < Ratio::from_integer(2) {
        return Err(precondition(format!(
            "density: k·ρ_m(A) ≥ 2 fails, ρ_{m}(A) = {rho} attained at z' = {}, k = {k}",
            dw.argmin
        )));
    }
    // ⌈2/ρ⌉ = ⌈2·denom/numer⌉
    let k_inner = ceil_div(2 * rho.denom(), *rho.numer()) as u64;
    debug_assert!(k_inner <= k);
    Ok(DensityWitness {
        base: a.clone(),
        m,
        k_inner,
    })
}

impl DensityWitness {
    pub fn base(&self) -> &SortedIntSet {
        &self.base
    }

    pub fn m(&self) -> i128 {
        self.m
    }

    pub fn k_inner(&self) -> u64 {
        self.k_inner
    }

    pub fn fold_budget(&self) -> u64 {
        2 * self.k_inner
    }

    /// Sampling cap after which the loop reports a broken contract.
    pub fn retry_cap(&self) -> u64 {
        64 * ceil_log2((self.m + 2) as u128) as u64
    }

    /// Returns a solution for z ∈ 2k'A with at most 2k' parts.
    pub fn query(&self, z: i128, rng: &mut RandomSource) -> Result<CompactSolution> {
        if z < 0 || z > self.m {
            return Err(Error::OutOfRange { z, max: self.m });
        }
        let budget = self.fold_budget();
        if z == 0 {
            return Ok(CompactSolution::multiset([(0, budget)], 0, budget));
        }
        for _ in 0..self.retry_cap() {
            rng.note_round();
            let x = rng.uniform(1, z);
            let Some(left) = kfold_greedy_query(&self.base, self.k_inner, x) else {
                continue;
            };
            let Some(right) = kfold_greedy_query(&self.base, self.k_inner, z - x) else {
                continue;
            };
            let parts = left.parts.into_iter().chain(right.parts);
            return Ok(CompactSolution::multiset(parts, z, budget));
        }
        Err(contract(format!(
            "density witness found no split for z = {z} in {} rounds",
            self.retry_cap()
        )))
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
    fn build_examples() {
        assert!(build_density_witness(&s(&[0, 1]), 1, 2).is_ok());
        let full: Vec<i64> = (0..=10).collect();
        assert!(build_density_witness(&s(&full), 10, 2).is_ok());
        let e = build_density_witness(&s(&[0, 1, 5]), 5, 2).unwrap_err();
        match e {
            Error::PreconditionViolated(msg) => {
                assert!(msg.contains("1/4"), "{msg}");
                assert!(msg.contains("z' = 4"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_density_witness(&s(&[0, 2]), 2, 100).is_err());
    }

    #[test]
    fn query_examples() {
        let mut rng = RandomSource::new(1);
        let a = s(&[0, 1]);
        let w = build_density_witness(&a, 1, 2).unwrap();
        let z0 = w.query(0, &mut rng).unwrap();
        assert_eq!(z0.parts, vec![(0, 4)]);
        let z1 = w.query(1, &mut rng).unwrap();
        assert!(verify_solution(&a, &z1).ok);
        assert!(z1.total_count() <= 4);
        let full: Vec<i64> = (0..=10).collect();
        let a = s(&full);
        let w = build_density_witness(&a, 10, 2).unwrap();
        let sol = w.query(7, &mut rng).unwrap();
        assert!(verify_solution(&a, &sol).ok);
        assert!(sol.total_count() <= 4);
        assert!(matches!(w.query(11, &mut rng), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn same_seed_same_certificate() {
        let a = s(&[0, 1, 2, 4, 7, 9, 13, 14, 20]);
        let w = build_density_witness(&a, 20, 10).unwrap();
        for z in 0..=20 {
            let x = w.query(z, &mut RandomSource::new(99)).unwrap();
            let y = w.query(z, &mut RandomSource::new(99)).unwrap();
            assert_eq!(x, y);
        }
    }
}
