//! Arbitrary-precision complex arithmetic and the special functions the
//! continuation formulas consume.

pub mod bernoulli;
pub mod cnum;
pub mod gamma;

pub use cnum::{pi, CNum};
pub use gamma::{
    binom_rising, gamma, gamma_deflated, gamma_ratio_asymptotic, hurwitz_zeta, log_gamma,
    rgamma, sin_pi,
};
