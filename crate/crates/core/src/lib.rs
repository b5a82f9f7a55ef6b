//! Effective de la Vallée Poussin-form bounds on the first Chebyshev
//! function θ(x).
//!
//! * [`bounds`]: source families `a·x·(ln x)^b·exp(−c√ln x)`, the built-in
//!   catalog, and their conversion into `ã·x·exp(−c̃√ln x)` form.
//! * [`theta`]: a segmented-sieve θ table with per-entry error budgets and
//!   a double-double oracle.
//! * [`verify`]: rigorous checking of `|θ(x) − x| < g(x)` over real ranges,
//!   threshold search and minimal prefactors.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dd;
pub mod envelope;
pub mod error;
pub mod exec;
pub mod sieve;
pub mod sum;
pub mod theta;
pub mod verify;

pub use bounds::{
    catalog, derive_prefactor, lookup, peak_location, solve_decay, BoundFamily, Coefficient,
    DerivedBound, PeakLocation, Threshold,
};
pub use dd::Dd;
pub use envelope::{envelope_monotone_from, EnvelopeFn};
pub use error::{Error, Result};
pub use exec::Exec;
pub use theta::{build_theta_table, extended_theta, theta_at, ThetaTable, ThetaValue};
pub use verify::{
    check_range, find_x_star, min_prefactor, verify_parent, CheckOutcome, MinPrefactor,
    PrecisionPolicy, Verdict, Verifier, VerifyOptions, XStar,
};
