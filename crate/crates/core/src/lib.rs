//! Adaptive drift analysis of the (1+1) EA on linear pseudo-Boolean
//! functions.
//!
//! The crate builds objective-dependent drift functions (block structure,
//! copy/damped weights, jump partition), checks the multiplicative drift
//! conditions exactly by mask enumeration or by Monte Carlo sampling, and
//! runs seeded batch experiments on the EA's optimisation time.

pub mod bits;
pub mod drift;
pub mod ea;
pub mod error;
pub mod experiments;
pub mod objective;
pub mod rng;
pub mod verify;
pub mod wide;

pub use bits::BitString;
pub use ea::{mutate, run_ea, run_ea_from, select, MutationParams, RunRecord};
pub use error::{Error, Result};
pub use objective::LinearObjective;
pub use wide::WideReal;
