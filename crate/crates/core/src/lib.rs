//! Mills-type prime-representing constants.
//!
//! For an integer exponent sequence `(c_k)` with partial products
//! `C_k = c_1 ... c_k`, a constant `A > 1` is prime-representing when
//! `floor(A^(C_k))` is prime for every `k`. This crate builds the prime
//! chains that pin such constants down, extracts certified decimal digits
//! from them, and enumerates the nested cylinder intervals of the set of
//! all such constants. All comparisons are exact big-integer arithmetic.

pub mod chain;
pub mod cli;
pub mod error;
pub mod exec;
pub mod explorer;
pub mod exps;
pub mod interval;
pub mod policy;
pub mod primality;
pub mod radix;
mod serde_big;
pub mod window;

pub use chain::{
    approximants_nested, build_chain, candidate_seeds, convergence_bound_check, theta_window_report,
    verify_chain, ChainConfig, ChainReport, PrimeChain, Selection, ThetaReport,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use exps::{parse_exponent_spec, ExponentSequence, SequenceKind};
pub use interval::CertifiedDecimalInterval;
pub use policy::GapPolicy;
pub use primality::{is_prime, Certainty, PrimalityConfig, PrimalityVerdict, SearchConfig};
pub use radix::{
    certified_root_enclosure, nth_root_floor, prc_digits, rational_approx_scan, verify_floor_recovery,
    DigitResult, FloorVerdict, RadixConfig,
};
pub use window::Window;
