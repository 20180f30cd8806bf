//! Generalized Fibonacci zeta functions of real quadratic fields.
//!
//! For a squarefree D > 1 whose fundamental unit ε has norm -1, the crate
//! evaluates
//!
//!   Z_D^odd(s)  = Σ_{n≥1} F_D(2n-1)^(-s),   Z_D^even(s) = Σ_{n≥1} F_D(2n)^(-s),
//!
//! where F_D(n) = Tr(ε^n / √q), together with their meromorphic
//! continuation. Three evaluators are provided (direct summation, a binomial
//! expansion valid everywhere, and a Gamma-function series over the
//! spectral parameters πm / (2 log ε)), and they are cross-checked against
//! each other.

pub mod arith;
pub mod cli;
pub mod continuation;
pub mod error;
pub mod identities;
pub mod qfield;
pub mod sequences;
pub mod special;

pub use error::{Error, Result};
pub use special::CNum;
