//! Long arithmetic progressions in sumsets and subset sums, with per-term
//! certificates, and their use for unbounded and dense subset sum search.

pub mod arith;
pub mod augment;
pub mod dense;
pub mod density_ap;
pub mod error;
pub mod greedy;
pub mod oracle;
pub mod rng;
pub mod set;
pub mod solution;
pub mod subsetsum_ap;
pub mod sumset_ap;
pub mod unbounded;

pub use error::{Error, Result};
pub use rng::RandomSource;
pub use set::{Density, SortedIntSet};
pub use solution::{verify_solution, ArithProgression, CompactSolution, RejectReason, Verdict};
