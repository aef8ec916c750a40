//! Linear forms in 1 and odd zeta values built from very-well-poised rational
//! functions with a common prime factor, together with the growth constants
//! and linear-independence bounds derived from them.
//!
//! Module map:
//! - [`kernel`]: exact rationals, primes, certified ψ/ζ/log values
//! - [`params`]: parameter sets and the constant `C`
//! - [`step_phi`]: the floor-sum step functions and their digamma integral `ϖ`
//! - [`linear_forms`]: the rational function, its partial fractions and arithmetic checks
//! - [`asymptotics`]: growth constants α, β and their adjusted forms
//! - [`criterion`]: dimension bounds from the two independence criteria
//! - [`search`]: evaluation and search over parameter candidates

//! - [`presets`]: named parameter sets

pub mod asymptotics;
pub mod criterion;
pub mod error;
pub mod kernel;
pub mod linear_forms;
pub mod params;
pub mod presets;
pub mod search;
pub mod step_phi;

pub use error::{Error, Result};
