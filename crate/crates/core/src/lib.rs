//! Permutation micro-states of bounded random variables.
//!
//! A tuple of permutations `(σ_1, …, σ_n)` of `{1, …, N}` is a *micro-state*
//! when some canonical sorted vectors `x_1, …, x_n` make
//! `(σ_1(x_1), …, σ_n(x_n))` statistically close to the target joint law:
//! joint moments within `δ` up to order `m` for real variables, or the joint
//! empirical type within `δ` of the joint pmf for finite alphabets. The
//! normalized log-volume of the micro-state set under the uniform measure on
//! `S_N^n` tends to minus the mutual information `Σ H(X_i) − H(X_1, …, X_n)`.
//!
//! The crate provides:
//!
//! * [`types`], [`perm`], [`logspace`]: alphabets, exact-rational pmfs,
//!   empirical types, permutations and log-domain counting.
//! * [`entropy`]: Shannon entropy, relative entropy, closed-form moments of
//!   a small family of bounded distributions, and quadrature-based
//!   differential entropies.
//! * [`discrete`]: exact band enumeration, brute-force counts, certified
//!   upper/lower brackets and Monte Carlo estimates for finite alphabets.
//! * [`continuous`]: moment-band membership, midpoint quantile sequences,
//!   and Monte Carlo probes of permutation and Lebesgue micro-state volumes.
//! * [`harness`]: JSON-configured convergence studies, CSV output,
//!   finite-size extrapolation and reporting.

pub mod continuous;
pub mod discrete;
pub mod entropy;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod logspace;
pub mod perm;
pub mod types;

pub use error::{Error, Result};
