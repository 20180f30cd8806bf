//! Exact Bernoulli numbers (B_1 = -1/2 convention) and Bernoulli polynomials.

use std::sync::Mutex;

use rug::{Float, Integer, Rational};

use super::cnum::CNum;

static TABLE: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

fn extend_table(table: &mut Vec<Rational>, upto: usize) {
    if table.is_empty() {
        table.push(Rational::from(1));
    }
    while table.len() <= upto {
        let m = table.len();
        if m >= 3 && m % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        // sum_{j<m} C(m+1, j) B_j + (m+1) B_m = 0
        let m1 = (m + 1) as u32;
        let mut acc = Rational::new();
        for (j, b) in table.iter().enumerate() {
            if !b.is_zero() {
                acc += Rational::from(b * Integer::from(Integer::binomial_u(m1, j as u32)));
            }
        }
        table.push(-acc / m1);
    }
}

/// The n-th Bernoulli number as an exact rational.
pub fn bernoulli(n: usize) -> Rational {
    let mut table = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    extend_table(&mut table, n);
    table[n].clone()
}

/// B_0..=B_n as exact rationals.
pub fn bernoulli_upto(n: usize) -> Vec<Rational> {
    let mut table = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    extend_table(&mut table, n);
    table[..=n].to_vec()
}

pub fn bernoulli_float(n: usize, prec: u32) -> Float {
    Float::with_val(prec, bernoulli(n))
}

/// Bernoulli polynomial B_n(x) = sum_k C(n,k) B_k x^(n-k).
pub fn bernoulli_poly(n: usize, x: &CNum) -> CNum {
    let prec = x.prec();
    let b = bernoulli_upto(n);
    // Horner in x over the coefficients of x^(n-k), k = 0..n.
    let mut acc = CNum::zero(prec);
    for (k, bk) in b.iter().enumerate() {
        let coeff = Rational::from(Integer::from(Integer::binomial_u(n as u32, k as u32))) * bk;
        acc = &(&acc * x) + &CNum::from_real(Float::with_val(prec, coeff));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn small_values() {
        let expect = [(0, 1, 1), (1, -1, 2), (2, 1, 6), (3, 0, 1), (4, -1, 30), (6, 1, 42), (8, -1, 30), (10, 5, 66), (12, -691, 2730)];
        for (n, p, q) in expect {
            assert_eq!(bernoulli(n), Rational::from((p, q)), "B_{n}");
        }
    }

    #[test]
    fn matches_zeta_at_even_integers() {
        // B_2k = (-1)^(k+1) 2 (2k)! zeta(2k) / (2 pi)^(2k), zeta by direct summation.
        let prec = 128;
        for k in [10usize, 20, 40] {
            let n = 2 * k;
            let mut zeta = Float::with_val(prec, 0);
            for j in 1..200u32 {
                zeta += Float::with_val(prec, j).pow(-(n as i32));
            }
            let fact = Float::with_val(prec, Integer::from(Integer::factorial(n as u32)));
            let two_pi = super::super::cnum::pi(prec) * 2u32;
            let mut expected = fact * zeta * 2u32 / two_pi.pow(n as i32);
            if k % 2 == 0 {
                expected = -expected;
            }
            let got = bernoulli_float(n, prec);
            let rel = ((got - &expected) / expected).abs().to_f64();
            assert!(rel < 1e-35, "B_{n}: rel {rel}");
        }
    }

    #[test]
    fn polynomial_at_zero_and_one() {
        let z = CNum::zero(128);
        let o = CNum::one(128);
        for n in 2..12 {
            let b = CNum::from_real(bernoulli_float(n, 128));
            assert!(bernoulli_poly(n, &z).dist(&b) < 1e-30);
            // B_n(1) = B_n for n >= 2
            assert!(bernoulli_poly(n, &o).dist(&b) < 1e-30);
        }
        // B_1(x) = x - 1/2
        let x = CNum::from_f64(128, 0.3, 0.7);
        assert!(bernoulli_poly(1, &x).dist(&(&x - 0.5)) < 1e-30);
    }
}
