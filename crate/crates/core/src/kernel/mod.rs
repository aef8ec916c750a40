//! Exact and certified-approximate arithmetic shared by every other module.

mod approx;
mod arith;
mod special;

pub use approx::{rational_to_decimal, ApproxReal};
pub use arith::{
    factor_with, factorial, int_valuation, lcm_upto, p_adic_valuation, primes_above_sqrt,
    primes_in, sieve,
};
pub use special::{
    bernoulli, digamma, generalized_harmonic, is_integer, ln2, ln_approx, ln_rational, zeta_value,
};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Shorthand for the rational `n/d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
