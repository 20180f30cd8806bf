//! Exact integer utilities: square roots, square detection, trial-division
//! factorization and the Kronecker symbol.
//!
//! Everything here is exact. Factorization is plain trial division, which is
//! fine for the field discriminants this crate works with (well below 10^12).

use rug::ops::Pow;
use rug::Integer;

use crate::error::{Error, Result};

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: &Integer) -> Result<Integer> {
    if n.is_negative() {
        return Err(Error::domain(format!("isqrt of negative integer {n}")));
    }
    Ok(n.clone().sqrt())
}

/// Floor square root for machine integers.
pub fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Returns true when `n` is the square of an integer (0 included).
pub fn is_square(n: &Integer) -> bool {
    !n.is_negative() && n.is_perfect_square()
}

/// Number of integer solutions of x^2 = n.
///
/// This is 1 at n = 0, 2 at positive squares and 0 elsewhere.
pub fn r1(n: &Integer) -> u32 {
    if n.is_zero() {
        1
    } else if is_square(n) {
        2
    } else {
        0
    }
}

/// Prime factorization as (prime, exponent) pairs with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(Integer, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(Integer, u32)] {
        &self.factors
    }

    /// Product of p^e over all factors.
    pub fn value(&self) -> Integer {
        self.factors
            .iter()
            .fold(Integer::from(1), |acc, (p, e)| acc * p.clone().pow(*e))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|(_, e)| u64::from(*e) + 1).product()
    }
}

/// Factor a positive integer by trial division.
pub fn factorize(n: &Integer) -> Result<Factorization> {
    if *n < 1 {
        return Err(Error::domain(format!("cannot factor {n}: must be positive")));
    }
    let mut rest = n.clone();
    let mut factors = Vec::new();
    let mut push = |rest: &mut Integer, p: u64| {
        let mut e = 0u32;
        while rest.is_divisible_u(p as u32) {
            *rest /= p as u32;
            e += 1;
        }
        if e > 0 {
            factors.push((Integer::from(p), e));
        }
    };
    push(&mut rest, 2);
    let mut p = 3u64;
    while Integer::from(p) * p <= rest {
        if p > u64::from(u32::MAX) {
            return Err(Error::domain(format!("{n} is too large for trial division")));
        }
        push(&mut rest, p);
        p += 2;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { factors })
}

/// True iff no prime square divides `n`. Requires n > 1.
pub fn is_squarefree(n: i64) -> Result<bool> {
    if n <= 1 {
        return Err(Error::domain(format!("is_squarefree requires n > 1, got {n}")));
    }
    Ok(factorize(&Integer::from(n))?.is_squarefree())
}

/// Number of positive divisors of `n`.
pub fn divisor_count(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("divisor_count requires n >= 1"));
    }
    Ok(factorize(&Integer::from(n))?.divisor_count())
}

// (2/n) for odd n, indexed by n mod 8.
const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Kronecker symbol (a/n) for arbitrary integers.
///
/// Uses (a/2) = 0, 1, -1 for a even, a = ±1 mod 8, a = ±3 mod 8 and
/// (a/-1) = -1 for a < 0, +1 otherwise.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let mut a = i128::from(a);
    let mut b = i128::from(n);
    if b == 0 {
        return i32::from(a.abs() == 1);
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // b is odd and positive from here on.
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}
