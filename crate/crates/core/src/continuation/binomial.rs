//! The binomial expansion, valid on all of C away from the pole grid.

use rug::Float;

use super::poles::check_pole_distance;
use super::{check_tol, ln_one_minus_exp_neg, real_power, EvalResult, Method, GUARD_BITS};
use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::sequences::Parity;
use crate::special::CNum;

/// Z(s) from the binomial expansion over k (see the module documentation).
///
/// With C_k = Γ(s+k)/(Γ(s) k!) and p = 1 (odd) or 2 (even), term k is bounded by
/// U_k = q^(Re s/2) |C_k| ε^(-p Re w_k) / (1 - ε^(-2 Re w_k)) once Re w_k = Re s + 2k > 0,
/// and U_(j+1)/U_j ≤ (1 + |s-1|/(j+1)) ε^(-2p). The tail from k on is bounded by
/// U_k / (1 - r_k) as soon as that ratio r_k drops below 1.
pub fn z_binomial(
    ctx: &FieldContext,
    s: &CNum,
    parity: Parity,
    tol: f64,
    k_max: usize,
) -> Result<EvalResult> {
    check_tol(tol)?;
    let distance = check_pole_distance(ctx, s)?;
    let prec = ctx.prec();
    let mut guard = GUARD_BITS;
    // Alternating terms can be much larger than the sum; one retry with the
    // observed cancellation added to the working precision restores the digits.
    for attempt in 0..2 {
        let sum = binomial_sum(ctx, s, parity, tol, k_max, prec + guard)?;
        if attempt == 1 || sum.lost_bits + 8.0 <= f64::from(GUARD_BITS) {
            return Ok(EvalResult {
                value: sum.value.with_prec(prec),
                method: Method::Binomial,
                terms_used: sum.terms,
                tail_bound: sum.tail,
                nearest_pole_distance: distance,
            });
        }
        guard = GUARD_BITS + sum.lost_bits.ceil() as u32;
    }
    unreachable!()
}

struct Sum {
    value: CNum,
    terms: usize,
    tail: f64,
    lost_bits: f64,
}

fn binomial_sum(
    ctx: &FieldContext,
    s: &CNum,
    parity: Parity,
    tol: f64,
    k_max: usize,
    wp: u32,
) -> Result<Sum> {
    let sigma = s.re_f64();
    let s_minus_1 = (s - 1i64).abs_f64();
    let log_eps_f = ctx.log_eps.to_f64();
    let p = match parity {
        Parity::Odd => 1.0,
        Parity::Even => 2.0,
    };
    let ln_q = Float::with_val(wp, ctx.q).ln();
    let pref_log = 0.5 * sigma * ln_q.to_f64();
    let log_eps = ctx.log_eps_at(wp);
    let eps = ctx.eps_value(wp);
    let eps2 = Float::with_val(wp, eps.square_ref());

    let sw = s.with_prec(wp);
    let prefactor = real_power(&ln_q, &(&sw * 0.5));
    // odd: up = ε^w, down = ε^-w with w = s + 2k; even: up = ε^(2w).
    let (mut up, mut down, up_step, down_step) = match parity {
        Parity::Odd => (
            real_power(&log_eps, &sw),
            real_power(&log_eps, &(-&sw)),
            eps2.clone(),
            Float::with_val(wp, eps2.recip_ref()),
        ),
        Parity::Even => {
            let eps4 = Float::with_val(wp, eps2.square_ref());
            (real_power(&log_eps, &(&sw * 2i64)), CNum::zero(wp), eps4, Float::new(wp))
        }
    };

    let mut coeff = CNum::one(wp);
    let mut log_coeff = 0.0f64;
    let mut acc = CNum::zero(wp);
    let mut max_term_log2 = f64::NEG_INFINITY;
    let mut tail = f64::INFINITY;
    for k in 0..k_max {
        let mut term = match parity {
            Parity::Odd => &coeff / &(&up - &down),
            Parity::Even => &coeff / &(&up - 1i64),
        };
        if parity == Parity::Odd && k % 2 == 1 {
            term = -term;
        }
        if !term.is_zero() {
            max_term_log2 = max_term_log2.max(term.abs().log2().to_f64());
        }
        acc = &acc + &term;

        let shifted = &sw + k as i64;
        log_coeff += shifted.abs_f64().ln() - ((k + 1) as f64).ln();
        coeff = &(&coeff * &shifted) / (k as i64 + 1);
        up = up.scale(&up_step);
        if parity == Parity::Odd {
            down = down.scale(&down_step);
        }

        let next = (k + 1) as f64;
        let re_w = sigma + 2.0 * next;
        if re_w <= 0.0 {
            continue;
        }
        let r_log = (s_minus_1 / (next + 1.0)).ln_1p() - 2.0 * p * log_eps_f;
        if r_log >= 0.0 {
            continue;
        }
        let ln_tail = pref_log + log_coeff
            - p * re_w * log_eps_f
            - ln_one_minus_exp_neg(2.0 * re_w * log_eps_f)
            - ln_one_minus_exp_neg(-r_log);
        tail = ln_tail.exp();
        if tail < tol {
            let value = &prefactor * &acc;
            let floor = acc.abs().log2().to_f64().max(tol.log2() - pref_log / std::f64::consts::LN_2);
            let lost_bits = (max_term_log2 - floor).max(0.0);
            return Ok(Sum { value, terms: k + 1, tail, lost_bits });
        }
    }
    Err(Error::NoConvergence { method: "binomial", terms: k_max, tail_bound: tail })
}
