//! Long arithmetic progressions in subset sums.
//!
//! Conflict-free pairs turn k-fold sumsets of their gaps into subset sums:
//! taking the high end of a pair instead of the low end adds its gap. A short
//! progression comes from the gaps of one half of the input; the other half
//! supplies fresh pairs that lengthen it or shrink its difference, one layer
//! at a time, so no element is used by two layers.

mod ladder;
mod pairs;
mod pipeline;
mod scan;

pub use ladder::{mod_ladder, ModLadder};
pub use pairs::{
    ap_by_pairs, gen_pairs, pairs_to_subsetsum, short_ap_ss, uniformize, uniformize_by_residue,
    PairAp, PairSet,
};
pub use pipeline::{aug_one_step_ss, theorem_ss, SsStep, SubsetSumWitness};
pub use scan::{extract_aug_pairs, find_aug_pair, AugPair, Extracted, GapScan};

/// Which set of constants gates the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// Exact inequalities; unsatisfiable for inputs that fit in memory.
    Paper,
    /// Scaled constants; every success is still certificate-checked and a
    /// failed existence step is reported as `Exhausted`.
    Tuned,
}

/// Named constants of the subset-sum pipeline. Field names carry the value
/// each constant has under the exact profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub c996: i128,
    pub c1000: i128,
    pub c2000: i128,
    pub c4000: i128,
    pub c8000: i128,
    pub c16000: i128,
    pub c20000: i128,
    pub c30000: i128,
    pub c40000: i128,
    pub c5e8: i128,
}

impl Profile {
    pub fn paper() -> Self {
        Profile {
            kind: ProfileKind::Paper,
            c996: 996,
            c1000: 1000,
            c2000: 2000,
            c4000: 4000,
            c8000: 8000,
            c16000: 16000,
            c20000: 20000,
            c30000: 30000,
            c40000: 40000,
            c5e8: 500_000_000,
        }
    }

    pub fn tuned() -> Self {
        Profile {
            kind: ProfileKind::Tuned,
            c996: 4,
            c1000: 8,
            c2000: 8,
            c4000: 8,
            c8000: 16,
            c16000: 32,
            c20000: 8,
            c30000: 32,
            c40000: 16,
            c5e8: 64,
        }
    }

    pub fn is_paper(&self) -> bool {
        self.kind == ProfileKind::Paper
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProfileKind::Paper => "paper",
            ProfileKind::Tuned => "tuned",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "paper" => Ok(Profile::paper()),
            "tuned" => Ok(Profile::tuned()),
            other => Err(crate::Error::Parse(format!("unknown profile {other:?}"))),
        }
    }
}

pub(crate) fn log2_real(x: f64) -> f64 {
    x.max(1.0).log2()
}
