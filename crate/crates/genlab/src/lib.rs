//! genlab: a desk-scale computational group theory laboratory.
//!
//! The crate provides:
//!
//! * [`word`] - words over variables and constants, free reduction, and
//!   finite systems of equations/inequations;
//! * [`oracle`] - a uniform contract for countable groups with computable
//!   structure, built-in exact oracles, bounded word-problem search for
//!   finitely presented groups, and presentation constructions;
//! * [`marked`] - Cayley balls, rooted labeled-graph comparison, the
//!   marked-group metric, and the ball-to-system device;
//! * [`order`] - bounded certificates for left orderability, local
//!   indicability, biorderability, and the unique product property;
//! * [`approx`] - Folner set verification/search and sofic approximations;
//! * [`forcing`] - partial enumerated groups, consistency semi-decision, the
//!   two-player forcing game with strategies, and bounded existential
//!   closure testing;
//! * [`cli`] - the `genlab` command-line frontend.
//!
//! Results of semi-decidable questions are three-valued ([`verdict`]):
//! definite answers carry re-checkable certificates and `Unknown` carries
//! the bound it was produced at.

pub mod approx;
pub mod forcing;
pub mod marked;
pub mod oracle;
pub mod order;
pub mod verdict;
pub mod word;

pub use oracle::{Elem, Env, GroupOracle, MarkedGroup};
pub use verdict::{Outcome, Verdict};
pub use word::{parse_word, CoefficientAssignment, Equation, Polarity, System, Word};
