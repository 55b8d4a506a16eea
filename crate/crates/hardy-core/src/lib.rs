//! Verification toolkit for geometric Hardy inequalities associated with
//! families of polynomial vector fields on ℝⁿ (stratified groups such as
//! Heisenberg and Engel, and degenerate frames such as the Grushin plane).
//!
//! The crate has two halves that check each other:
//!
//! * an exact half — sparse multivariate polynomials over ℚ, horizontal
//!   gradients/divergences, and a factored form of the p-sub-Laplacian in
//!   which the closed-form identities behind each built-in inequality become
//!   decidable polynomial equalities;
//! * a numeric half — tensor-product Gauss–Legendre quadrature over bump
//!   supports, deficit evaluation for each inequality, and derivative-free
//!   Rayleigh-quotient probing of the constant ((p−1)/p)ᵖ.

pub mod calculus;
pub mod groups;
pub mod hardy;
pub mod identity;
pub mod numerics;
pub mod symbolic;

use thiserror::Error;

/// Cap internal parallelism from the HARDY_THREADS environment variable.
/// No-op when unset, unparsable, or when a global pool already exists.
/// Results do not depend on the thread count (reductions run in fixed
/// order); only timing does.
pub fn init_thread_pool_from_env() {
    if let Ok(v) = std::env::var("HARDY_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable lists differ: {0} vs {1}")]
    VarMismatch(String, String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable index {0} out of range (arity {1})")]
    IndexOutOfRange(usize, usize),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite integrand sample at {point:?}")]
    NonFiniteSample { point: Vec<f64> },
    #[error("boundary sampling failed: {0}")]
    Sampling(String),
    #[error("degenerate boundary: vanishing level-set gradient at {point:?}")]
    DegenerateBoundary { point: Vec<f64> },
    #[error("test function support is not strictly inside the domain")]
    Inadmissible,
    #[error("the p-sub-Laplacian term does not vanish for this spec; sweep gamma explicitly")]
    SurvivingLpTerm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
