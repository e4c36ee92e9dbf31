//! Three-valued results for semi-decidable questions.
//!
//! Definite answers always carry a certificate that an independent verifier
//! in the producing module can re-check; `Unknown` always carries the search
//! bound it was produced at.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Yes,
    No,
    Unknown,
}

/// `Y` is the certificate type for definite-yes, `N` for definite-no.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Verdict<Y, N> {
    Yes { certificate: Y, bound: u64 },
    No { certificate: N, bound: u64 },
    Unknown { bound: u64 },
}

impl<Y, N> Verdict<Y, N> {
    pub fn outcome(&self) -> Outcome {
        match self {
            Verdict::Yes { .. } => Outcome::Yes,
            Verdict::No { .. } => Outcome::No,
            Verdict::Unknown { .. } => Outcome::Unknown,
        }
    }

    pub fn bound(&self) -> u64 {
        match self {
            Verdict::Yes { bound, .. } | Verdict::No { bound, .. } | Verdict::Unknown { bound } => {
                *bound
            }
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }
}

impl Outcome {
    /// CLI contract: 0 definite yes, 1 definite no, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Yes => 0,
            Outcome::No => 1,
            Outcome::Unknown => 2,
        }
    }
}
