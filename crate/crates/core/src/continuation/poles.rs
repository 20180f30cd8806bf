//! The pole grid s = -2k + πim / log ε and residues of Z_odd.

use rayon::prelude::*;
use rug::Float;

use super::spectral::{alternating_symmetric_sum, ln_abs, spectral_step};
use super::{imag, real_power, z_spectral, GUARD_BITS};
use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::sequences::Parity;
use crate::special::{binom_rising, gamma, gamma_deflated, pi, rgamma, CNum};

/// Upper limit on the number of poles [`pole_grid`] will enumerate.
const MAX_GRID_POLES: u64 = 1_000_000;

/// Richardson levels used by [`residue_at`].
const RICHARDSON_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSpec {
    pub k: u64,
    pub m: i64,
    /// -2k + πim / log ε at context precision.
    pub location: CNum,
}

impl PoleSpec {
    pub fn new(ctx: &FieldContext, k: u64, m: i64) -> Self {
        PoleSpec { k, m, location: pole_location(ctx, k, m, ctx.prec()) }
    }
}

/// -2k + πim / log ε at `prec` bits.
pub fn pole_location(ctx: &FieldContext, k: u64, m: i64, prec: u32) -> CNum {
    let im = pi(prec + 16) * m / ctx.log_eps_at(prec + 16);
    CNum::from_parts(Float::with_val(prec, -2 * k as i64), Float::with_val(prec, im))
}

/// Imaginary spacing π / log ε of the grid, as an f64.
fn spacing(ctx: &FieldContext) -> f64 {
    std::f64::consts::PI / ctx.log_eps.to_f64()
}

/// All grid poles in the closed rectangle re.0 ≤ Re s ≤ re.1, im.0 ≤ Im s ≤ im.1,
/// ordered by k and then by m.
pub fn pole_grid(ctx: &FieldContext, re: (f64, f64), im: (f64, f64)) -> Result<Vec<PoleSpec>> {
    let finite = [re.0, re.1, im.0, im.1].iter().all(|x| x.is_finite());
    if !finite || re.0 > re.1 || im.0 > im.1 {
        return Err(Error::domain(format!(
            "pole_grid needs a finite rectangle, got Re in {re:?}, Im in {im:?}"
        )));
    }
    let k_lo = (-re.1 / 2.0).ceil().max(0.0);
    let k_hi = (-re.0 / 2.0).floor();
    let h = spacing(ctx);
    let m_lo = (im.0 / h).ceil();
    let m_hi = (im.1 / h).floor();
    if k_hi < k_lo || m_hi < m_lo {
        return Ok(Vec::new());
    }
    let count = (k_hi - k_lo + 1.0) * (m_hi - m_lo + 1.0);
    if count > MAX_GRID_POLES as f64 {
        return Err(Error::domain(format!(
            "rectangle holds about {count:.0} poles, more than the limit of {MAX_GRID_POLES}"
        )));
    }
    let mut poles = Vec::with_capacity(count as usize);
    for k in k_lo as u64..=k_hi as u64 {
        for m in m_lo as i64..=m_hi as i64 {
            poles.push(PoleSpec::new(ctx, k, m));
        }
    }
    Ok(poles)
}

/// The grid point (k, m) closest to `s`, and its distance.
pub fn nearest_grid_pole(ctx: &FieldContext, s: &CNum) -> (u64, i64, f64) {
    let k = (-s.re_f64() / 2.0).round().max(0.0) as u64;
    let m = (s.im_f64() / spacing(ctx)).round() as i64;
    let prec = s.prec().max(ctx.prec());
    let distance = s.dist(&pole_location(ctx, k, m, prec));
    (k, m, distance)
}

/// Fail with `NearPole` when `s` is within 2^(-prec/4) of the grid.
pub(crate) fn check_pole_distance(ctx: &FieldContext, s: &CNum) -> Result<f64> {
    let (k, m, distance) = nearest_grid_pole(ctx, s);
    let threshold = (-f64::from(ctx.prec()) / 4.0).exp2();
    if distance <= threshold {
        Err(Error::NearPole { k, m, distance })
    } else {
        Ok(distance)
    }
}

fn require_odd(parity: Parity) -> Result<()> {
    match parity {
        Parity::Odd => Ok(()),
        Parity::Even => Err(Error::domain("residues are only computed for the odd series")),
    }
}

/// Residue of Z_odd read off the binomial expansion: only term k vanishes
/// at the pole, and d/ds (ε^w - ε^-w) = 2 (-1)^m log ε there, giving
/// q^(s0/2) (-1)^(k+m) C_k(s0) / (2 log ε).
pub fn residue_analytic(ctx: &FieldContext, pole: &PoleSpec) -> CNum {
    let wp = ctx.prec() + GUARD_BITS;
    let s0 = pole_location(ctx, pole.k, pole.m, wp);
    let ln_q = Float::with_val(wp, ctx.q).ln();
    let mut value = &(&real_power(&ln_q, &(&s0 * 0.5)) * &binom_rising(&s0, pole.k))
        / &(ctx.log_eps_at(wp) * 2u32);
    if (pole.k as i64 + pole.m) % 2 != 0 {
        value = -value;
    }
    value.with_prec(ctx.prec())
}

/// Residue of Z_odd by the limit method: h(s) = (s - s0) Z_odd(s) is analytic
/// at s0 once the singular Gamma factors are replaced by their deflated forms.
/// h is averaged over the four points s0 + r i^j (error O(r^4)) for radii
/// r, r/2, r/4, r/8 and Richardson-extrapolated in r^4.
pub fn residue_at(ctx: &FieldContext, pole: &PoleSpec, parity: Parity) -> Result<CNum> {
    require_odd(parity)?;
    let wp = ctx.prec() + GUARD_BITS;
    let s0 = pole_location(ctx, pole.k, pole.m, wp);
    let tol = (-f64::from(wp)).exp2();
    let r0 = analytic_radius(ctx) / 8.0;

    let mut samples = Vec::with_capacity(RICHARDSON_DEPTH);
    for level in 0..RICHARDSON_DEPTH {
        let r = r0 / f64::from(1u32 << level);
        let mut acc = CNum::zero(wp);
        for (dx, dy) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            let s = &s0 + &CNum::from_f64(wp, r * dx, r * dy);
            acc = &acc + &deflated_odd(ctx, pole, &s0, &s, tol, wp)?;
        }
        samples.push(acc / 4i64);
    }
    // table[i] holds the extrapolant of order `order` ending at radius level i.
    let mut table = samples;
    for order in 1..RICHARDSON_DEPTH {
        let factor = f64::powi(16.0, order as i32);
        table = table
            .windows(2)
            .map(|pair| &(&(&pair[1] * factor) - &pair[0]) / (factor - 1.0))
            .collect();
    }
    Ok(table[0].with_prec(ctx.prec()))
}

/// Z_odd(s) near a grid pole, computed as h(s)/(s - s0) where h is the
/// spectral series with the pole's singular Gamma factors divided out.
/// Valid for any s ≠ s0 closer to `pole` than to every other grid point.
pub fn z_odd_factored(ctx: &FieldContext, pole: &PoleSpec, s: &CNum) -> Result<CNum> {
    let wp = ctx.prec() + GUARD_BITS;
    let s0 = pole_location(ctx, pole.k, pole.m, wp);
    let sw = s.with_prec(wp);
    let ds = &sw - &s0;
    if ds.is_zero() {
        return Err(Error::Pole { n: -2 * pole.k as i64 });
    }
    let tol = (-f64::from(wp)).exp2();
    let h = deflated_odd(ctx, pole, &s0, &sw, tol, wp)?;
    Ok((&h / &ds).with_prec(ctx.prec()))
}

/// Radius of a disk around any grid pole free of other grid poles.
fn analytic_radius(ctx: &FieldContext) -> f64 {
    spacing(ctx).min(2.0)
}

/// (s - s0) Z_odd(s) from the spectral series with the singular factors of
/// the pole at s0 divided out analytically.
fn deflated_odd(
    ctx: &FieldContext,
    pole: &PoleSpec,
    s0: &CNum,
    s: &CNum,
    tol: f64,
    wp: u32,
) -> Result<CNum> {
    let w = s * 0.5;
    let ds = s - s0;
    let c = spectral_step(ctx, wp);
    let ln_q = Float::with_val(wp, ctx.q).ln();
    let prefactor = &real_power(&ln_q, &w) / &(ctx.log_eps_at(wp) * 8u32);
    let rg = rgamma(s);
    let k = pole.k;
    let singular_m = pole.m.unsigned_abs() as i64;
    let sum = alternating_symmetric_sum(s, c.to_f64(), ln_abs(&prefactor), tol, super::DEFAULT_M_MAX, |m| {
        if m == singular_m && pole.m == 0 {
            // (s + 2k) Γ(s/2)² / Γ(s) with both poles removed.
            let g = gamma_deflated(&w, k);
            return Ok(&(&(&g * &g) * 4i64) / &gamma_deflated(s, 2 * k));
        }
        if m == singular_m {
            // The factor Γ(s/2 - i t) with t = c·pole.m has its pole at s0.
            let it = imag(Float::with_val(wp, &c * pole.m));
            let v = &w - &it;
            let deflated = &gamma_deflated(&v, k) * 2i64;
            return Ok(&(&rg * &deflated) * &gamma(&(&w + &it))?);
        }
        let it = imag(Float::with_val(wp, &c * m));
        Ok(&(&(&ds * &rg) * &gamma(&(&w + &it))?) * &gamma(&(&w - &it))?)
    })?;
    Ok(&prefactor * &sum.0)
}

/// Residue of Z_odd by the trapezoidal rule on a circle: (1/N) Σ (s_j - s0) Z(s_j)
/// with Z from the unmodified spectral series. The radius is a quarter of the
/// pole-free radius, so aliasing errors are O(4^-N).
pub fn residue_contour(ctx: &FieldContext, pole: &PoleSpec, parity: Parity) -> Result<CNum> {
    require_odd(parity)?;
    let prec = ctx.prec();
    let wp = prec + GUARD_BITS;
    let s0 = pole_location(ctx, pole.k, pole.m, wp);
    let radius = analytic_radius(ctx) / 4.0;
    let n = (wp / 2 + 8) as usize;
    let tol = (-f64::from(prec)).exp2();
    let two_pi = pi(wp) * 2u32;
    let values: Vec<Result<CNum>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let angle = Float::with_val(wp, &two_pi * j as u64) / n as u64;
            let offset = CNum::from_parts(
                Float::with_val(wp, angle.cos_ref()) * radius,
                Float::with_val(wp, angle.sin_ref()) * radius,
            );
            let s = &s0 + &offset;
            let z = z_spectral(ctx, &s, Parity::Odd, tol, super::DEFAULT_M_MAX)?;
            Ok(&offset * &z.value)
        })
        .collect();
    let mut acc = CNum::zero(wp);
    for v in values {
        acc = &acc + &v?;
    }
    Ok((acc / n as i64).with_prec(prec))
}
