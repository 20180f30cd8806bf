//! The Gamma-function series over the spectral parameters t_m = πm / (2 log ε):
//!
//!   Z_odd(s)  = q^(s/2) / (8 Γ(s) log ε) Σ_m (-1)^m Γ(s/2 + i t_m) Γ(s/2 - i t_m),
//!   Z_even(s) = q^(s/2) Γ(1-s) / (4 log ε) Σ_m Γ(s/2 - i t_m) / Γ(1 - s/2 - i t_m),
//!
//! the second for Re s < 0 only.
//!
//! The odd terms decay like e^(-π t_m). The even terms decay only like
//! |t_m|^(Re s - 1), so the even sum is evaluated exactly for |m| ≤ M and the
//! remainder is summed in closed form from the large-|z| expansion
//! Γ(z+a)/Γ(z+b) ~ Σ_j c_j z^(a-b-j) with z = ∓i t_m, a = s/2, b = 1 - s/2:
//!
//!   Σ_{|m|>M} = Σ_j c_j ((-ic)^(s-1-j) + (ic)^(s-1-j)) ζ(1+j-s, M+1),   c = π/(2 log ε).
//!
//! M is chosen with c M ≳ 0.2 · (working bits) so that the expansion reaches
//! the working precision before its terms start to grow.

use std::f64::consts::{LN_2, PI};

use rug::Float;

use super::poles::check_pole_distance;
use super::{check_tol, imag, ln_one_minus_exp_neg, real_power, EvalResult, Method, GUARD_BITS};
use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::sequences::Parity;
use crate::special::{gamma, gamma_ratio_asymptotic, hurwitz_zeta, pi, rgamma, CNum};

/// Z(s) from the spectral series.
pub fn z_spectral(
    ctx: &FieldContext,
    s: &CNum,
    parity: Parity,
    tol: f64,
    m_max: usize,
) -> Result<EvalResult> {
    check_tol(tol)?;
    if parity == Parity::Even && (s.re_f64().is_nan() || s.re_f64() >= 0.0) {
        return Err(Error::domain(
            "the even spectral series is only available for Re s < 0",
        ));
    }
    let distance = check_pole_distance(ctx, s)?;
    let prec = ctx.prec();
    let wp = prec + GUARD_BITS;
    let (value, terms, tail) = match parity {
        Parity::Odd => odd(ctx, s, tol, m_max, wp)?,
        Parity::Even => even(ctx, s, tol, m_max, wp)?,
    };
    Ok(EvalResult {
        value: value.with_prec(prec),
        method: Method::Spectral,
        terms_used: terms,
        tail_bound: tail,
        nearest_pole_distance: distance,
    })
}

/// c = π / (2 log ε) at `wp` bits.
pub(crate) fn spectral_step(ctx: &FieldContext, wp: u32) -> Float {
    pi(wp) / (ctx.log_eps_at(wp) * 2u32)
}

/// ln |z| as an f64, -∞ for zero, without f64 underflow.
pub(crate) fn ln_abs(z: &CNum) -> f64 {
    if z.is_zero() {
        f64::NEG_INFINITY
    } else {
        z.abs().ln().to_f64()
    }
}

/// Σ_{m∈Z} (-1)^m T_m for terms symmetric under m → -m, given T_m for m ≥ 0.
///
/// `scale_ln` is ln of the factor multiplying the sum, so that `tol` applies
/// to the final value. Truncation uses the large-t behavior
/// |T_m| ≍ t_m^(Re s - 1) e^(-π t_m): once t_m ≥ |s| + 2 the remaining terms
/// are dominated by a geometric series with ratio
/// e^(-πc) ((m+1)/m)^max(Re s - 1, 0).
///
/// Returns (sum, number of m values used, tail estimate).
pub(crate) fn alternating_symmetric_sum(
    s: &CNum,
    c: f64,
    scale_ln: f64,
    tol: f64,
    m_max: usize,
    mut term: impl FnMut(i64) -> Result<CNum>,
) -> Result<(CNum, usize, f64)> {
    let sigma = s.re_f64();
    let abs_s = s.abs_f64();
    let mut acc = term(0)?;
    let mut tail = f64::INFINITY;
    for m in 1..=m_max as i64 {
        let t = term(m)?;
        let doubled = &t * 2i64;
        acc = if m % 2 == 1 { &acc - &doubled } else { &acc + &doubled };
        if c * (m as f64) < abs_s + 2.0 {
            continue;
        }
        let growth = ((m + 1) as f64 / m as f64).ln() * (sigma - 1.0).max(0.0);
        let rho_log = -PI * c + growth;
        if rho_log >= 0.0 {
            continue;
        }
        let ln_tail = scale_ln + LN_2 + ln_abs(&t) + rho_log - ln_one_minus_exp_neg(-rho_log);
        tail = ln_tail.exp();
        if tail < tol {
            return Ok((acc, 2 * m as usize + 1, tail));
        }
    }
    Err(Error::NoConvergence { method: "spectral", terms: 2 * m_max + 1, tail_bound: tail })
}

fn odd(ctx: &FieldContext, s: &CNum, tol: f64, m_max: usize, wp: u32) -> Result<(CNum, usize, f64)> {
    let sw = s.with_prec(wp);
    let w = &sw * 0.5;
    let c = spectral_step(ctx, wp);
    let ln_q = Float::with_val(wp, ctx.q).ln();
    let prefactor = &(&real_power(&ln_q, &w) * &rgamma(&sw)) / &(ctx.log_eps_at(wp) * 8u32);
    let (sum, terms, tail) =
        alternating_symmetric_sum(s, c.to_f64(), ln_abs(&prefactor), tol, m_max, |m| {
            let it = imag(Float::with_val(wp, &c * m));
            Ok(&gamma(&(&w + &it))? * &gamma(&(&w - &it))?)
        })?;
    Ok((&prefactor * &sum, terms, tail))
}

fn even(ctx: &FieldContext, s: &CNum, tol: f64, m_max: usize, wp: u32) -> Result<(CNum, usize, f64)> {
    let abs_s = s.abs_f64();
    let c = spectral_step(ctx, wp);
    let c_f = c.to_f64();
    let big_m = ((0.2 * f64::from(wp) + 10.0 + 2.0 * abs_s) / c_f).ceil().max(1.0) as usize;
    if big_m > m_max {
        return Err(Error::NoConvergence {
            method: "spectral",
            terms: 2 * m_max + 1,
            tail_bound: f64::INFINITY,
        });
    }
    // Extra bits against cancellation inside the Bernoulli polynomials of the
    // asymptotic coefficients, which grow like e^(2π|a|).
    let wp_tail = wp + (9.0 * (abs_s / 2.0 + 1.0)).ceil() as u32;
    let sw = s.with_prec(wp);
    let w = &sw * 0.5;
    let one_minus_w = &(-&w) + 1i64;
    let ln_q = Float::with_val(wp, ctx.q).ln();
    let prefactor = &(&real_power(&ln_q, &w) * &gamma(&(&(-&sw) + 1i64))?)
        / &(ctx.log_eps_at(wp) * 4u32);
    let scale_ln = ln_abs(&prefactor);

    let mut acc = CNum::zero(wp);
    for m in -(big_m as i64)..=big_m as i64 {
        let it = imag(Float::with_val(wp, &c * m));
        let num = gamma(&(&w - &it))?;
        let den_recip = rgamma(&(&one_minus_w - &it));
        acc = &acc + &(&num * &den_recip);
    }

    let (tail_sum, tail) = even_tail(s, &c, big_m as u64, scale_ln, tol, wp_tail)?;
    let total = &acc + &tail_sum.with_prec(wp);
    Ok((&prefactor * &total, 2 * big_m + 1, tail))
}

/// Σ_{|m|>M} Γ(s/2 - i c m) / Γ(1 - s/2 - i c m) from the asymptotic expansion.
fn even_tail(
    s: &CNum,
    c: &Float,
    big_m: u64,
    scale_ln: f64,
    tol: f64,
    wp: u32,
) -> Result<(CNum, f64)> {
    let sw = s.with_prec(wp);
    let a = &sw * 0.5;
    let b = &(-&a) + 1i64;
    let ln_c = Float::with_val(wp, c).ln();
    let half_pi = pi(wp) / 2u32;
    let ln_plus = CNum::from_parts(ln_c.clone(), half_pi.clone()); // ln(ic)
    let ln_minus = CNum::from_parts(ln_c, -half_pi); // ln(-ic)
    let target = tol.ln() - 8.0 * LN_2 - scale_ln;

    let mut n_coeffs = 64;
    loop {
        let coeffs = gamma_ratio_asymptotic(&a, &b, n_coeffs);
        let mut acc = CNum::zero(wp);
        let mut min_ln = f64::INFINITY;
        let mut below = 0;
        for (j, cj) in coeffs.iter().enumerate() {
            let exponent = &(&sw - 1i64) - j as i64;
            let factor = &(&exponent * &ln_minus).exp() + &(&exponent * &ln_plus).exp();
            let zeta = hurwitz_zeta(&(-&exponent), big_m + 1)?;
            let term = &(cj * &factor) * &zeta;
            let term_ln = ln_abs(&term);
            acc = &acc + &term;
            // Coefficients can vanish (up to rounding), so two consecutive
            // small terms are required before stopping, and terms below the
            // working precision are ignored by the divergence guard.
            below = if term_ln < target { below + 1 } else { 0 };
            if below == 2 {
                return Ok((acc, (min_ln.max(term_ln) + scale_ln).exp()));
            }
            let negligible = term_ln < ln_abs(&acc) - f64::from(wp) * LN_2;
            if negligible {
                continue;
            }
            if j >= 4 && term_ln > min_ln + 4.0 {
                // The expansion has started to diverge before reaching the target.
                return Err(Error::NoConvergence {
                    method: "spectral",
                    terms: j,
                    tail_bound: (min_ln + scale_ln).exp(),
                });
            }
            min_ln = min_ln.min(term_ln);
        }
        if n_coeffs >= 1024 {
            return Err(Error::NoConvergence {
                method: "spectral",
                terms: n_coeffs,
                tail_bound: (min_ln + scale_ln).exp(),
            });
        }
        n_coeffs *= 2;
    }
}
