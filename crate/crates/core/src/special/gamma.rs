//! Complex Gamma function and relatives at arbitrary precision.
//!
//! All routines shift the argument to the right until `Re w >= 20 + prec/8`
//! with the recurrence Γ(z+1) = zΓ(z), then evaluate the Stirling series
//!
//!   log Γ(w) = (w - 1/2) log w - w + log(2π)/2 + Σ B_2k / (2k(2k-1) w^(2k-1)),
//!
//! adding terms until they fall below the working epsilon. The shift keeps
//! the smallest Stirling term near exp(-2π|w|), far below 2^-(prec + guard)
//! for every supported precision.
//!
//! Error model: heuristic, validated against evaluations at four times the
//! precision (see tests). Results are returned at the input precision.

use rug::Float;

use super::bernoulli::bernoulli_upto;
use super::cnum::{pi, CNum};
use crate::error::{Error, Result};

const MAX_STIRLING_TERMS: usize = 1000;

fn guard_bits(z: &CNum) -> u32 {
    let mag = z.abs_f64().max(1.0);
    40 + 2 * (mag.log2().ceil() as u32)
}

fn stirling_threshold(prec: u32) -> f64 {
    20.0 + f64::from(prec) / 8.0
}

/// Number of unit shifts that push `Re z` past the Stirling threshold.
fn shift_count(z: &CNum, prec: u32) -> u64 {
    let need = stirling_threshold(prec) - z.re_f64();
    if need <= 0.0 {
        0
    } else {
        need.ceil() as u64
    }
}

/// If `z` lies within 2^(-prec/2) of a nonpositive integer, return that integer.
pub fn nearest_pole(z: &CNum) -> Option<i64> {
    let re = z.re_f64();
    if re > 0.5 {
        return None;
    }
    let n = re.round();
    let tol = (-(f64::from(z.prec()) / 2.0)).exp2();
    let pole = CNum::from_f64(z.prec(), n, 0.0);
    (z.dist(&pole) < tol).then_some(n as i64)
}

/// Stirling series for log Γ(w); assumes Re w above the threshold.
fn stirling(w: &CNum, wp: u32) -> CNum {
    let w = w.with_prec(wp);
    let half_log_2pi = (pi(wp) * 2u32).ln() / 2u32;
    let lnw = w.ln();
    let mut acc = &(&(&w - 0.5) * &lnw) - &w;
    acc = &acc + &CNum::from_real(half_log_2pi);

    let eps = Float::with_val(64, Float::i_exp(1, -(wp as i32)));
    let scale = acc.abs().max(&Float::with_val(64, 1));
    let threshold = eps * scale;

    let w_inv = w.recip();
    let w_inv2 = &w_inv * &w_inv;
    let mut power = w_inv.clone(); // w^-(2k-1)
    let mut nterms = 16;
    let mut bern = bernoulli_upto(2 * nterms);
    let mut prev = Float::with_val(64, f64::INFINITY);
    for k in 1..MAX_STIRLING_TERMS {
        if 2 * k >= bern.len() {
            nterms *= 2;
            bern = bernoulli_upto(2 * nterms);
        }
        let coeff = Float::with_val(wp, &bern[2 * k]) / ((2 * k * (2 * k - 1)) as u64);
        let term = power.scale(&coeff);
        let mag = Float::with_val(64, term.abs());
        acc = &acc + &term;
        if mag < threshold {
            break;
        }
        debug_assert!(mag < prev, "Stirling series diverging at k = {k}");
        prev = mag;
        power = &power * &w_inv2;
    }
    acc
}

/// Π_{j<n} (z + j) at working precision, skipping index `skip` if given.
fn rising_product(z: &CNum, n: u64, skip: Option<u64>, wp: u32) -> CNum {
    let z = z.with_prec(wp);
    let mut p = CNum::one(wp);
    for j in 0..n {
        if Some(j) != skip {
            p = &p * &(&z + j as i64);
        }
    }
    p
}

/// Principal branch of log Γ(z).
pub fn log_gamma(z: &CNum) -> Result<CNum> {
    if let Some(n) = nearest_pole(z) {
        return Err(Error::Pole { n });
    }
    let prec = z.prec();
    let wp = prec + guard_bits(z);
    let n = shift_count(z, prec);
    let zw = z.with_prec(wp);
    let w = &zw + n as i64;
    let mut result = stirling(&w, wp);
    if n > 0 {
        // Σ log(z+j) equals log of the product up to a multiple of 2πi; the
        // multiple comes from the (cheap, f64) sum of the arguments.
        let prod = rising_product(&zw, n, None, wp);
        let log_prod = prod.ln();
        let (zr, zi) = (z.re_f64(), z.im_f64());
        let arg_sum: f64 = (0..n).map(|j| zi.atan2(zr + j as f64)).sum();
        let winding = ((arg_sum - log_prod.im_f64()) / std::f64::consts::TAU).round();
        let two_pi_i = CNum::from_parts(Float::with_val(wp, 0), pi(wp) * 2u32);
        let branch = &two_pi_i * winding as i64;
        result = &result - &(&log_prod + &branch);
    }
    Ok(result.with_prec(prec))
}

/// Γ(z).
pub fn gamma(z: &CNum) -> Result<CNum> {
    if let Some(n) = nearest_pole(z) {
        return Err(Error::Pole { n });
    }
    let prec = z.prec();
    let wp = prec + guard_bits(z);
    let n = shift_count(z, prec);
    let zw = z.with_prec(wp);
    let value = stirling(&(&zw + n as i64), wp).exp();
    let value = if n > 0 {
        &value / &rising_product(&zw, n, None, wp)
    } else {
        value
    };
    Ok(value.with_prec(prec))
}

/// 1/Γ(z), an entire function: exactly zero at the nonpositive integers.
pub fn rgamma(z: &CNum) -> CNum {
    let prec = z.prec();
    let wp = prec + guard_bits(z);
    let n = shift_count(z, prec);
    let zw = z.with_prec(wp);
    let value = (-stirling(&(&zw + n as i64), wp)).exp();
    let value = if n > 0 {
        &value * &rising_product(&zw, n, None, wp)
    } else {
        value
    };
    value.with_prec(prec)
}

/// (w + k) Γ(w): Γ with its pole at -k divided out, analytic near w = -k.
pub fn gamma_deflated(w: &CNum, k: u64) -> CNum {
    let prec = w.prec();
    let wp = prec + guard_bits(w);
    let n = shift_count(w, prec).max(k + 1);
    let ww = w.with_prec(wp);
    let value = stirling(&(&ww + n as i64), wp).exp();
    let value = &value / &rising_product(&ww, n, Some(k), wp);
    value.with_prec(prec)
}

/// Γ(s+k) / (Γ(s) k!) as the finite product Π_{j<k} (s+j)/(j+1).
pub fn binom_rising(s: &CNum, k: u64) -> CNum {
    let mut acc = CNum::one(s.prec());
    for j in 0..k {
        acc = &(&acc * &(s + j as i64)) / (j as i64 + 1);
    }
    acc
}

/// Coefficients c_0.. c_{n-1} of the asymptotic expansion
///
///   Γ(z + a) / Γ(z + b) ~ z^(a - b) Σ_k c_k z^(-k),   |z| → ∞, |arg z| < π,
///
/// from log Γ(z+a) - log Γ(z+b) = (a-b) log z + Σ_{j≥1} (-1)^(j+1) (B_{j+1}(a) - B_{j+1}(b)) / (j(j+1) z^j).
pub fn gamma_ratio_asymptotic(a: &CNum, b: &CNum, n: usize) -> Vec<CNum> {
    use super::bernoulli::bernoulli_poly;
    let prec = a.prec().max(b.prec());
    let mut d = vec![CNum::zero(prec); n.max(1)];
    for (j, dj) in d.iter_mut().enumerate().skip(1) {
        let diff = &bernoulli_poly(j + 1, a) - &bernoulli_poly(j + 1, b);
        let mut v = diff / (j as i64 * (j as i64 + 1));
        if j % 2 == 0 {
            v = -v;
        }
        *dj = v;
    }
    // exp of the power series Σ d_j x^j: k c_k = Σ_{j=1..k} j d_j c_{k-j}.
    let mut c = vec![CNum::one(prec)];
    for k in 1..n {
        let mut acc = CNum::zero(prec);
        for j in 1..=k {
            acc = &acc + &(&(&d[j] * &c[k - j]) * j as i64);
        }
        c.push(acc / k as i64);
    }
    c.truncate(n);
    c
}

/// Σ_{n ≥ a} n^(-p) for an integer a ≥ 1 and Re p > 1, via direct summation
/// up to a cutoff followed by the Euler–Maclaurin tail.
pub fn hurwitz_zeta(p: &CNum, a: u64) -> Result<CNum> {
    if a == 0 {
        return Err(Error::domain("hurwitz_zeta requires a >= 1"));
    }
    if p.re_f64() <= 1.0 {
        return Err(Error::domain("hurwitz_zeta requires Re p > 1"));
    }
    let prec = p.prec();
    let wp = prec + 32;
    let pw = p.with_prec(wp);
    let cutoff = ((p.abs_f64() + f64::from(wp)) / std::f64::consts::PI).ceil() as u64 + 2;
    let big_n = a.max(cutoff);

    let power = |n: u64, e: &CNum| -> CNum {
        let ln_n = Float::with_val(wp, n).ln();
        (&(-e) * &ln_n).exp()
    };
    let mut acc = CNum::zero(wp);
    for n in a..big_n {
        acc = &acc + &power(n, &pw);
    }
    // Σ_{n≥N} n^-p = N^(1-p)/(p-1) + N^-p/2 + Σ_j B_2j/(2j)! (p)_{2j-1} N^(-p-2j+1)
    let n_pow = power(big_n, &pw);
    let nf = Float::with_val(wp, big_n);
    acc = &acc + &(&(&n_pow * &nf) / &(&pw - 1i64));
    acc = &acc + &(&n_pow * 0.5);

    let eps = Float::with_val(64, Float::i_exp(1, -(wp as i32)));
    let n_inv2 = Float::with_val(wp, nf.clone().recip().square_ref());
    let bern = bernoulli_upto(2 * (wp as usize) + 4);
    // rising = (p)_{2j-1}, pw_term = N^(-p-2j+1), fact = (2j)!
    let mut rising = pw.clone();
    let mut npow = n_pow.scale(&nf.clone().recip());
    let mut fact = Float::with_val(wp, 2);
    for j in 1..=(wp as usize) {
        let coeff = Float::with_val(wp, &bern[2 * j]) / &fact;
        let term = (&rising * &npow).scale(&coeff);
        acc = &acc + &term;
        if term.abs() < eps.clone() * Float::with_val(64, acc.abs()) {
            break;
        }
        // advance to j+1
        let jj = 2 * j as i64;
        rising = &(&rising * &(&pw + jj - 1)) * &(&pw + jj);
        npow = npow.scale(&n_inv2);
        fact *= ((2 * j + 1) * (2 * j + 2)) as u64;
    }
    Ok(acc.with_prec(prec))
}

/// sin(πz) for complex z.
pub fn sin_pi(z: &CNum) -> CNum {
    z.scale(&pi(z.prec())).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 128;

    fn c(re: f64, im: f64) -> CNum {
        CNum::from_f64(P, re, im)
    }

    fn tiny(prec: u32, shift: i32) -> f64 {
        (f64::from(shift) - f64::from(prec)).exp2()
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(&c(1.0, 0.0)).unwrap().abs_f64() < tiny(P, 8));
        let sqrt_pi_log = Float::with_val(P, pi(P).sqrt()).ln();
        assert!(log_gamma(&c(0.5, 0.0)).unwrap().dist(&CNum::from_real(sqrt_pi_log)) < tiny(P, 8));
        let log24 = Float::with_val(P, 24).ln();
        assert!(log_gamma(&c(5.0, 0.0)).unwrap().dist(&CNum::from_real(log24)) < tiny(P, 8));
    }

    #[test]
    fn gamma_examples() {
        assert!(gamma(&c(1.0, 0.0)).unwrap().dist(&c(1.0, 0.0)) < tiny(P, 8));
        let sqrt_pi = CNum::from_real(pi(P).sqrt());
        assert!(gamma(&c(0.5, 0.0)).unwrap().dist(&sqrt_pi) < tiny(P, 8));
        assert!((gamma(&c(0.5, 0.0)).unwrap().re_f64() - 1.7724539).abs() < 1e-7);
    }

    #[test]
    fn reflection_formula() {
        let z = c(0.3, 0.7);
        let lhs = &gamma(&z).unwrap() * &gamma(&(&CNum::one(P) - &z)).unwrap();
        let rhs = &CNum::from_real(pi(P)) / &sin_pi(&z);
        assert!(lhs.rel_dist(&rhs) < tiny(P, 8));
    }

    #[test]
    fn poles_rejected() {
        for n in [0, -1, -7] {
            let z = c(n as f64, 0.0);
            assert_eq!(log_gamma(&z), Err(Error::Pole { n }));
            assert_eq!(gamma(&z), Err(Error::Pole { n }));
            assert!(rgamma(&z).is_zero() || rgamma(&z).abs_f64() < 1e-60);
        }
        // just outside the 2^(-prec/2) window is fine
        assert!(gamma(&c(-3.0 + 1e-15, 0.0)).is_ok());
    }

    #[test]
    fn log_gamma_principal_branch_on_negative_axis() {
        // Γ(-2.5) = -0.9453087205..., so Im log Γ is an odd multiple of π.
        let lg = log_gamma(&c(-2.5, 0.0)).unwrap();
        let g = gamma(&c(-2.5, 0.0)).unwrap();
        assert!(lg.exp().rel_dist(&g) < tiny(P, 16));
        // continuity across a point with large imaginary part and negative real part
        let z = c(-30.2, 5.0);
        let lg = log_gamma(&z).unwrap();
        let lg_next = log_gamma(&(&z + 1i64)).unwrap();
        let diff = &(&lg_next - &lg) - &z.ln();
        assert!(diff.abs_f64() < tiny(P, 24));
    }

    #[test]
    fn deflated_gamma_at_poles() {
        // (w + k) Γ(w) -> (-1)^k / k! at w = -k
        let mut fact = 1.0;
        for k in 0..6u64 {
            if k > 0 {
                fact *= k as f64;
            }
            let v = gamma_deflated(&c(-(k as f64), 0.0), k);
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } / fact;
            assert!((v.re_f64() - expected).abs() < 1e-30, "k={k}");
        }
        // away from the pole it agrees with (w+k) Γ(w)
        let w = c(-1.7, 0.4);
        let direct = &(&w + 2i64) * &gamma(&w).unwrap();
        assert!(gamma_deflated(&w, 2).rel_dist(&direct) < tiny(P, 16));
    }

    #[test]
    fn binom_rising_examples() {
        let s = c(0.3, 0.2);
        assert_eq!(binom_rising(&s, 0), CNum::one(P));
        assert!(binom_rising(&s, 1).dist(&s) < tiny(P, 4));
        assert!(binom_rising(&c(3.0, 0.0), 2).dist(&c(6.0, 0.0)) < tiny(P, 4));
        // against the Gamma ratio
        let k = 7;
        let via_gamma = &gamma(&(&s + k as i64)).unwrap()
            / &(&gamma(&s).unwrap() * 5040i64);
        assert!(binom_rising(&s, k).rel_dist(&via_gamma) < tiny(P, 16));
    }

    #[test]
    fn ratio_expansion_matches_gamma_ratio() {
        let a = c(-0.35, 0.2);
        let b = &CNum::one(P) - &a;
        let coeffs = gamma_ratio_asymptotic(&a, &b, 40);
        let z = c(0.0, -60.0);
        let mut series = CNum::zero(P);
        let zinv = z.recip();
        let mut pow = CNum::one(P);
        for ck in &coeffs {
            series = &series + &(ck * &pow);
            pow = &pow * &zinv;
        }
        series = &series * &z.pow(&(&a - &b));
        let exact = &gamma(&(&z + &a)).unwrap() / &gamma(&(&z + &b)).unwrap();
        assert!(series.rel_dist(&exact) < 1e-35);
    }

    #[test]
    fn hurwitz_matches_known_values() {
        // ζ(2) = π²/6, ζ(4) = π⁴/90
        let pi2 = pi(P).square();
        let z2 = hurwitz_zeta(&c(2.0, 0.0), 1).unwrap();
        assert!(z2.dist(&CNum::from_real(pi2.clone() / 6u32)) < tiny(P, 8));
        let z4 = hurwitz_zeta(&c(4.0, 0.0), 1).unwrap();
        assert!(z4.dist(&CNum::from_real(pi2.square() / 90u32)) < tiny(P, 8));
        // shifting the start subtracts the leading terms
        let p = c(2.5, 3.0);
        let from1 = hurwitz_zeta(&p, 1).unwrap();
        let from4 = hurwitz_zeta(&p, 4).unwrap();
        let head: CNum = (1..4u64).fold(CNum::zero(P), |acc, n| {
            &acc + &(&(-&p) * &Float::with_val(P, n).ln()).exp()
        });
        assert!((&from1 - &from4).dist(&head) < tiny(P, 8));
        assert!(hurwitz_zeta(&c(0.5, 0.0), 1).is_err());
    }

    #[test]
    fn monotone_precision() {
        let z = c(0.37, -2.25);
        let reference = gamma(&z.with_prec(4 * 256)).unwrap();
        let defect = |p: u32| gamma(&z.with_prec(p)).unwrap().dist(&reference);
        let (d1, d2) = (defect(128), defect(256));
        assert!(d2 <= d1 * (-64f64).exp2(), "{d1:e} {d2:e}");
        assert!(d1 < tiny(128, 8));
    }

    fn arb_point() -> impl Strategy<Value = (f64, f64)> {
        (-20.0f64..20.0, -20.0f64..20.0)
            .prop_filter("away from poles", |(re, im)| {
                let d = (re - re.round()).hypot(*im);
                (re.hypot(*im) <= 20.0) && (*re > 0.0 || d > 0.05)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn duplication((re, im) in arb_point()) {
            let z = c(re, im);
            let lhs = &gamma(&z).unwrap() * &gamma(&(&z + 0.5)).unwrap();
            let two = CNum::from_f64(P, 2.0, 0.0);
            let rhs = &(&two.pow(&(&CNum::one(P) - &(&z * 2i64))) * &CNum::from_real(pi(P).sqrt()))
                * &gamma(&(&z * 2i64)).unwrap();
            prop_assert!(lhs.rel_dist(&rhs) < tiny(P, 16) * rhs.abs_f64().max(1.0) / lhs.abs_f64().max(1.0) + tiny(P, 16),
                "z = {z}, rel = {}", lhs.rel_dist(&rhs));
        }

        #[test]
        fn recurrence((re, im) in arb_point()) {
            let z = c(re, im);
            let lhs = gamma(&(&z + 1i64)).unwrap();
            let rhs = &z * &gamma(&z).unwrap();
            let rel = (&lhs - &rhs).abs_f64() / rhs.abs_f64();
            prop_assert!(rel < tiny(P, 16), "z = {z}, rel = {rel}");
        }
    }
}
