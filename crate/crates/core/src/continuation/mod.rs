//! Evaluation of Z_odd(s) = Σ F_D(2n-1)^(-s) and Z_even(s) = Σ F_D(2n)^(-s)
//! and of their meromorphic continuation.
//!
//! Three evaluators are provided:
//!
//! * [`z_direct`]: the defining series, for Re s > 0.
//! * [`z_binomial`]: an expansion that converges on all of C away from poles.
//!   Since N(ε) = -1, the sequence has the closed forms
//!
//!     F_D(2n-1) = (ε^(2n-1) + ε^-(2n-1)) / √q,   F_D(2n) = (ε^(2n) - ε^-(2n)) / √q.
//!
//!   Writing F_D(2n-1)^(-s) = q^(s/2) ε^(-(2n-1)s) (1 + ε^(-2(2n-1)))^(-s),
//!   expanding the last factor by the binomial series and summing the
//!   geometric series over n gives
//!
//!   ```text
//!   Z_odd(s)  = q^(s/2) Σ_{k≥0} (-1)^k C_k(s) / (ε^(s+2k) - ε^-(s+2k)),
//!   Z_even(s) = q^(s/2) Σ_{k≥0} C_k(s) / (ε^(2(s+2k)) - 1),
//!   ```
//!
//!   with C_k(s) = Γ(s+k) / (Γ(s) k!). Every term is meromorphic in s and the
//!   k-sum converges geometrically with ratio ε^-2 (odd) or ε^-4 (even),
//!   so the right-hand sides continue both functions to C.
//! * [`z_spectral`]: the Gamma-function series over t_m = πm / (2 log ε).
//!
//! The poles of both functions lie on the grid s = -2k + πim / log ε.

mod binomial;
mod crosscheck;
mod direct;
mod poles;
mod spectral;

use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Serialize};

pub use crate::sequences::Parity;
pub use binomial::z_binomial;
pub use crosscheck::{cross_check, method_pairs, CrossCheckReport, PairCheck, PointCheck, Region, RegionSummary};
pub use direct::{z_direct, z_direct_capped};
pub use poles::{
    nearest_grid_pole, pole_grid, pole_location, residue_analytic, residue_at, residue_contour,
    z_odd_factored, PoleSpec,
};
pub use spectral::z_spectral;

use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::special::cnum::float_to_decimal;
use crate::special::CNum;

/// Term cap for [`z_direct`] when called through [`evaluate`].
pub const DEFAULT_DIRECT_MAX: usize = 1_000_000;
/// Term cap for [`z_binomial`] when called through [`evaluate`].
pub const DEFAULT_K_MAX: usize = 100_000;
/// Term cap for [`z_spectral`] when called through [`evaluate`].
pub const DEFAULT_M_MAX: usize = 100_000;

/// Guard bits carried by every evaluator above the context precision.
pub(crate) const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Binomial,
    Spectral,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::Binomial, Method::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Binomial => "binomial",
            Method::Spectral => "spectral",
        }
    }

    /// Whether the method is defined at `s` for the given parity.
    pub fn applies(self, s: &CNum, parity: Parity) -> bool {
        match self {
            Method::Direct => s.re_f64() > 0.0,
            Method::Binomial => true,
            Method::Spectral => parity == Parity::Odd || s.re_f64() < 0.0,
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "binomial" => Ok(Method::Binomial),
            "spectral" => Ok(Method::Spectral),
            _ => Err(Error::Parse(format!(
                "method must be direct, binomial or spectral, got {s:?}"
            ))),
        }
    }
}

/// A value of Z_odd or Z_even together with the evaluator's error bookkeeping.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub value: CNum,
    pub method: Method,
    pub terms_used: usize,
    /// Bound on the truncation error of the returned value.
    pub tail_bound: f64,
    /// Distance from s to the nearest point of the pole grid.
    pub nearest_pole_distance: f64,
}

/// Flat JSON shape of an evaluation. Real and imaginary parts are decimal
/// strings carrying every digit of the context precision.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalRecord {
    #[serde(rename = "D")]
    pub d: i64,
    pub s_re: String,
    pub s_im: String,
    pub parity: Parity,
    pub method: Method,
    pub value_re: String,
    pub value_im: String,
    pub tail_bound: f64,
    pub terms_used: usize,
}

impl EvalResult {
    pub fn to_record(&self, ctx: &FieldContext, s: &CNum, parity: Parity) -> EvalRecord {
        EvalRecord {
            d: ctx.d,
            s_re: float_to_decimal(s.re()),
            s_im: float_to_decimal(s.im()),
            parity,
            method: self.method,
            value_re: float_to_decimal(self.value.re()),
            value_im: float_to_decimal(self.value.im()),
            tail_bound: self.tail_bound,
            terms_used: self.terms_used,
        }
    }
}

/// Run one evaluator with its default term cap.
pub fn evaluate(
    ctx: &FieldContext,
    s: &CNum,
    parity: Parity,
    method: Method,
    tol: f64,
) -> Result<EvalResult> {
    match method {
        Method::Direct => z_direct(ctx, s, parity, tol),
        Method::Binomial => z_binomial(ctx, s, parity, tol, DEFAULT_K_MAX),
        Method::Spectral => z_spectral(ctx, s, parity, tol, DEFAULT_M_MAX),
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be a positive real, got {tol}")))
    }
}

/// exp(z · ln_base), i.e. base^z for a positive real base given by its log.
pub(crate) fn real_power(ln_base: &Float, z: &CNum) -> CNum {
    (z * ln_base).exp()
}

/// i·t as a complex number.
pub(crate) fn imag(t: Float) -> CNum {
    let prec = t.prec();
    CNum::from_parts(Float::new(prec), t)
}

/// ln(1 - e^(-x)) for x > 0, accurate for small and large x.
pub(crate) fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}
