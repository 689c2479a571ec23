use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded randomness for the Las Vegas witnesses. Also counts how many
/// sampling rounds the density witnesses have spent, so callers can audit
/// the expected-constant-rounds claim.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
    rounds: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rounds: 0,
        }
    }

    /// Independent stream for worker `index`, derived from this source's seed.
    pub fn derive(&self, index: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(index.wrapping_add(1));
        RandomSource {
            seed: self.seed,
            rng: r,
            rounds: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform integer in [lo, hi].
    pub fn uniform(&mut self, lo: i128, hi: i128) -> i128 {
        assert!(lo <= hi);
        self.rng.gen_range(lo..=hi)
    }

    pub(crate) fn note_round(&mut self) {
        self.rounds += 1;
    }

    /// Sampling rounds spent so far by density-witness queries.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let mut a = RandomSource::new(7);
        let mut b = RandomSource::new(7);
        for _ in 0..100 {
            assert_eq!(a.uniform(1, 1000), b.uniform(1, 1000));
        }
        let mut c = a.derive(3);
        let mut d = b.derive(3);
        assert_eq!(c.uniform(0, 1 << 40), d.uniform(0, 1 << 40));
    }
}
