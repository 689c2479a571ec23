use apcert::{ArithProgression, CompactSolution};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

/// Machine-readable outcome of one run. Holds nothing time-dependent, so the
/// same seed and input always serialize to the same bytes.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub args: Args,
    pub profile: Option<String>,
    pub seed: u64,
    pub input_size: usize,
    pub status: Status,
    pub error: Option<String>,
    pub ap: Option<Progression>,
    /// Set when a tuned run gave up, with the longest progression it built.
    pub partial_ap: Option<Progression>,
    /// Multiset budget of every certificate; 0 means subset certificates.
    pub fold_budget: u64,
    pub certificates: Vec<Certificate>,
    pub verification: Verification,
    pub decision: Option<bool>,
    /// Coin multipliers for `unbounded`, as [value, count].
    pub x: Option<Vec<(i64, u128)>>,
    pub details: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Args {
    pub input: String,
    pub m: Option<i128>,
    pub k: Option<u64>,
    pub ell: Option<i128>,
    pub target: Option<i128>,
    pub verify_all: bool,
    pub sample: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Ok,
    Precondition,
    CertificateFailure,
    No,
    Exhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Precondition => 1,
            Status::CertificateFailure => 2,
            Status::No => 3,
            Status::Exhausted => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Precondition => "precondition",
            Status::CertificateFailure => "certificate_failure",
            Status::No => "no",
            Status::Exhausted => "exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub start: i128,
    pub diff: i128,
    pub length: i128,
}

impl From<ArithProgression> for Progression {
    fn from(p: ArithProgression) -> Self {
        Progression {
            start: p.start,
            diff: p.diff,
            length: p.length,
        }
    }
}

impl From<Progression> for ArithProgression {
    fn from(p: Progression) -> Self {
        ArithProgression::new(p.start, p.diff, p.length)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Progression index j, or `None` for a standalone target.
    pub index: Option<i128>,
    pub target: i128,
    pub parts: Vec<(i64, u64)>,
}

impl Certificate {
    pub fn new(index: Option<i128>, sol: &CompactSolution) -> Self {
        Certificate {
            index,
            target: sol.target,
            parts: sol.parts.clone(),
        }
    }

    pub fn solution(&self, fold_budget: u64) -> CompactSolution {
        CompactSolution {
            parts: self.parts.clone(),
            target: self.target,
            fold_budget,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub target: i128,
    pub reason: String,
}

impl Verification {
    pub fn all_passed(&self) -> bool {
        self.passed == self.checked
    }
}
