//! Direct summation of the defining series for Re s > 0.

use rug::{Float, Integer};

use super::{check_tol, ln_one_minus_exp_neg, nearest_grid_pole, EvalResult, Method, GUARD_BITS};
use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::sequences::Parity;
use crate::special::CNum;

/// Z(s) by partial summation until the tail bound falls below `tol`.
pub fn z_direct(ctx: &FieldContext, s: &CNum, parity: Parity, tol: f64) -> Result<EvalResult> {
    z_direct_capped(ctx, s, parity, tol, super::DEFAULT_DIRECT_MAX)
}

/// [`z_direct`] with an explicit cap on the number of terms.
///
/// Tail bound after n terms: F_D grows at least geometrically,
/// F(2j-1) / F(2n-1) ≥ ε^(2(j-n)) / (1 + ε^-(4n-2)) and F(2j) / F(2n) ≥ ε^(2(j-n)),
/// so the remaining terms are dominated by a geometric series with ratio ε^(-2 Re s).
pub fn z_direct_capped(
    ctx: &FieldContext,
    s: &CNum,
    parity: Parity,
    tol: f64,
    n_max: usize,
) -> Result<EvalResult> {
    check_tol(tol)?;
    let sigma = s.re_f64();
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::domain(
            "direct summation requires Re s > 0 (the series diverges otherwise)",
        ));
    }
    let prec = ctx.prec();
    let wp = prec + GUARD_BITS;
    let sw = s.with_prec(wp);
    let neg_s = -&sw;
    let log_eps = ctx.log_eps.to_f64();
    let ratio_log = 2.0 * sigma * log_eps;
    let geometric = -ratio_log - ln_one_minus_exp_neg(ratio_log);

    // Rolling recurrence x(j+1) = L(1) x(j) + x(j-1), starting at F(0) = 0, F(1).
    let step = ctx.eps.trace();
    let mut prev = Integer::new();
    let mut cur = ctx.eps.y.clone();
    let mut index = 1u64;
    let mut acc = CNum::zero(wp);
    let mut tail = f64::INFINITY;
    for n in 1..=n_max as u64 {
        let target = parity.index(n);
        while index < target {
            let next = Integer::from(&step * &cur) + &prev;
            prev = std::mem::replace(&mut cur, next);
            index += 1;
        }
        let ln_f = Float::with_val(wp, &cur).ln();
        acc = &acc + &(&neg_s * &ln_f).exp();

        let slack = match parity {
            Parity::Odd => sigma * (-(4.0 * n as f64 - 2.0) * log_eps).exp().ln_1p(),
            Parity::Even => 0.0,
        };
        tail = (-sigma * ln_f.to_f64() + slack + geometric).exp();
        if tail < tol {
            let (_, _, distance) = nearest_grid_pole(ctx, s);
            return Ok(EvalResult {
                value: acc.with_prec(prec),
                method: Method::Direct,
                terms_used: n as usize,
                tail_bound: tail,
                nearest_pole_distance: distance,
            });
        }
    }
    Err(Error::NoConvergence { method: "direct", terms: n_max, tail_bound: tail })
}
