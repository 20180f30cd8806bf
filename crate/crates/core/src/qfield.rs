//! Real quadratic fields Q(√D): exact units, class numbers, and the field
//! invariants every zeta evaluation consumes.

use std::collections::HashMap;
use std::fmt;

use rug::{Float, Integer};
use serde::Serialize;

use crate::arith::{self, kronecker};
use crate::error::{Error, Result};
use crate::special::cnum::{float_to_decimal, pi};

/// Element of the ring of integers O_D.
///
/// Stored as (x + y√D)/2 with x ≡ y (mod 2) when D ≡ 1 (mod 4), and as
/// x + y√D otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadInt {
    d: i64,
    pub x: Integer,
    pub y: Integer,
}

fn half_basis(d: i64) -> bool {
    d.rem_euclid(4) == 1
}

impl QuadInt {
    pub fn new(d: i64, x: impl Into<Integer>, y: impl Into<Integer>) -> Result<Self> {
        let (x, y) = (x.into(), y.into());
        if half_basis(d) && x.is_odd() != y.is_odd() {
            return Err(Error::domain(format!(
                "({x} + {y}√{d})/2 is not integral: x and y must have equal parity"
            )));
        }
        Ok(QuadInt { d, x, y })
    }

    pub fn one(d: i64) -> Self {
        let x = if half_basis(d) { 2 } else { 1 };
        QuadInt { d, x: Integer::from(x), y: Integer::new() }
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// 2 when the coordinates are halves, 1 otherwise.
    pub fn denominator(&self) -> u32 {
        if half_basis(self.d) {
            2
        } else {
            1
        }
    }

    pub fn trace(&self) -> Integer {
        if half_basis(self.d) {
            self.x.clone()
        } else {
            Integer::from(&self.x * 2u32)
        }
    }

    pub fn norm(&self) -> Integer {
        let n = Integer::from(self.x.square_ref()) - Integer::from(self.y.square_ref()) * self.d;
        if half_basis(self.d) {
            n / 4u32
        } else {
            n
        }
    }

    pub fn conj(&self) -> Self {
        QuadInt { d: self.d, x: self.x.clone(), y: Integer::from(-&self.y) }
    }

    pub fn mul(&self, other: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.d, other.d);
        let xx = Integer::from(&self.x * &other.x) + Integer::from(&self.y * &other.y) * self.d;
        let yy = Integer::from(&self.x * &other.y) + Integer::from(&self.y * &other.x);
        if half_basis(self.d) {
            QuadInt { d: self.d, x: xx / 2u32, y: yy / 2u32 }
        } else {
            QuadInt { d: self.d, x: xx, y: yy }
        }
    }

    /// self^n by binary powering.
    pub fn pow(&self, mut n: u64) -> QuadInt {
        let mut base = self.clone();
        let mut acc = QuadInt::one(self.d);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Value under the embedding √D > 0.
    pub fn to_float(&self, prec: u32) -> Float {
        let root = Float::with_val(prec, self.d).sqrt();
        let v = Float::with_val(prec, &self.x) + root * &self.y;
        v / self.denominator()
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.y.is_negative() { "-" } else { "+" };
        let y = Integer::from(self.y.abs_ref());
        if half_basis(self.d) {
            write!(f, "({} {sign} {y}√{})/2", self.x, self.d)
        } else {
            write!(f, "{} {sign} {y}√{}", self.x, self.d)
        }
    }
}

fn require_squarefree(d: i64) -> Result<()> {
    if d <= 1 {
        return Err(Error::domain(format!("D must be > 1, got {d}")));
    }
    if !arith::is_squarefree(d)? {
        return Err(Error::domain(format!("D = {d} is not squarefree")));
    }
    Ok(())
}

/// q = D if D ≡ 1 (mod 4), else 4D: the field discriminant.
pub fn conductor(d: i64) -> i64 {
    if half_basis(d) {
        d
    } else {
        4 * d
    }
}

/// The fundamental unit ε > 1 of O_D.
///
/// Expands θ = √D (or (1+√D)/2 when D ≡ 1 mod 4) as a continued fraction.
/// Writing θ_i = (P_i + √D)/Q_i for the complete quotients, the first
/// i ≥ 1 with Q_i = Q_0 closes the period, and p_{i-1} - q_{i-1}θ' is then
/// the fundamental unit.
pub fn fundamental_unit(d: i64) -> Result<QuadInt> {
    require_squarefree(d)?;
    let (p0, q0) = if half_basis(d) { (1i64, 2i64) } else { (0, 1) };
    let root = arith::isqrt(&Integer::from(d))?;
    let dd = Integer::from(d);
    let (mut big_p, mut big_q) = (Integer::from(p0), Integer::from(q0));
    let (mut p_prev, mut p_cur) = (Integer::from(0), Integer::from(1));
    let (mut q_prev, mut q_cur) = (Integer::from(1), Integer::from(0));
    loop {
        let a = Integer::from(&big_p + &root) / &big_q;
        let p_next = Integer::from(&a * &p_cur) + &p_prev;
        let q_next = Integer::from(&a * &q_cur) + &q_prev;
        (p_prev, p_cur) = (p_cur, p_next);
        (q_prev, q_cur) = (q_cur, q_next);
        big_p = Integer::from(&a * &big_q) - &big_p;
        big_q = (dd.clone() - Integer::from(big_p.square_ref())) / &big_q;
        if big_q == q0 {
            break;
        }
    }
    // ε = p - q θ' = (Q0 p - q P0 + q √D) / Q0
    let x = Integer::from(&p_cur * q0) - Integer::from(&q_cur * p0);
    QuadInt::new(d, x, q_cur)
}

/// Reduced indefinite forms (a, b, c) of discriminant disc.
fn reduced_forms(disc: i64) -> Vec<(i64, i64, i64)> {
    let s = arith::isqrt_u64(disc as u64) as i64;
    let mut forms = Vec::new();
    let mut b = if disc % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = (disc - b * b) / 4;
        for a_abs in 1..=n {
            if n % a_abs != 0 {
                continue;
            }
            // s < 2|a| + b and 2|a| - b <= s
            if s < 2 * a_abs + b && 2 * a_abs - b <= s {
                let c_abs = n / a_abs;
                forms.push((a_abs, b, -c_abs));
                forms.push((-a_abs, b, c_abs));
            }
        }
        b += 2;
    }
    forms
}

/// One reduction step (a, b, c) -> (c, b', (b'^2 - disc)/(4c)).
fn rho(form: (i64, i64, i64), disc: i64, s: i64) -> (i64, i64, i64) {
    let (_, b, c) = form;
    let m = 2 * c.abs();
    let lo = s - m + 1;
    let b_new = lo + (-b - lo).rem_euclid(m);
    (c, b_new, (b_new * b_new - disc) / (4 * c))
}

/// Class number h(D), counted as cycles of reduced forms of discriminant q,
/// identifying the cycle of (a, b, c) with that of (-a, b, -c).
pub fn class_number(d: i64) -> Result<u64> {
    require_squarefree(d)?;
    let disc = conductor(d);
    let s = arith::isqrt_u64(disc as u64) as i64;
    let forms = reduced_forms(disc);
    let mut cycle_of: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut cycles = 0usize;
    for &f in &forms {
        if cycle_of.contains_key(&f) {
            continue;
        }
        let mut g = f;
        loop {
            cycle_of.insert(g, cycles);
            g = rho(g, disc, s);
            if g == f {
                break;
            }
            debug_assert!(!cycle_of.contains_key(&g), "rho left the cycle at {g:?}");
        }
        cycles += 1;
    }
    // Merge each cycle with the cycle of its negation.
    let mut parent: Vec<usize> = (0..cycles).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for (&(a, b, c), &idx) in &cycle_of {
        let other = cycle_of[&(-a, b, -c)];
        let (ra, rb) = (find(&mut parent, idx), find(&mut parent, other));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    Ok((0..cycles).filter(|&i| find(&mut parent, i) == i).count() as u64)
}

/// Narrow class number: cycles of reduced forms without the negation merge.
pub fn narrow_class_number(d: i64) -> Result<u64> {
    require_squarefree(d)?;
    let disc = conductor(d);
    let s = arith::isqrt_u64(disc as u64) as i64;
    let mut seen = std::collections::HashSet::new();
    let mut cycles = 0;
    for f in reduced_forms(disc) {
        if seen.contains(&f) {
            continue;
        }
        let mut g = f;
        loop {
            seen.insert(g);
            g = rho(g, disc, s);
            if g == f {
                break;
            }
        }
        cycles += 1;
    }
    Ok(cycles)
}

/// L(1, χ_q) for χ_q = (q/·), from the closed form for even real characters
/// L(1, χ) = -(1/√q) Σ_{a=1}^{q-1} χ(a) log sin(πa/q).
pub fn l1_direct(d: i64, precision_bits: u32) -> Result<Float> {
    require_squarefree(d)?;
    let q = conductor(d);
    let wp = precision_bits + 32;
    let pi_over_q = pi(wp) / q as u64;
    let mut acc = Float::with_val(wp, 0);
    for a in 1..q {
        let chi = kronecker(q, a);
        if chi == 0 {
            continue;
        }
        let term = (pi_over_q.clone() * a as u64).sin().ln();
        if chi > 0 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    let value = acc / Float::with_val(wp, q).sqrt();
    Ok(Float::with_val(precision_bits, value))
}

/// Comparison of the directly summed L(1, χ_q) with 2h log ε / √q.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassNumberCheck {
    #[serde(rename = "D")]
    pub d: i64,
    pub class_number: u64,
    pub l1_direct: String,
    pub l1_formula: String,
    pub residual: f64,
    pub passed: bool,
}

/// Class number formula check for every squarefree D in 2..=d_max with N(ε) = -1.
pub fn class_number_formula_checks(d_max: i64, precision_bits: u32, tol: f64) -> Result<Vec<ClassNumberCheck>> {
    let mut checks = Vec::new();
    for d in 2..=d_max {
        if !arith::is_squarefree(d)? {
            continue;
        }
        let ctx = match make_context(d, precision_bits) {
            Ok(ctx) => ctx,
            Err(Error::UnsupportedField { .. }) => continue,
            Err(e) => return Err(e),
        };
        let direct = l1_direct(d, precision_bits)?;
        let residual = Float::with_val(precision_bits, &direct - &ctx.l1_chi_q).abs().to_f64();
        checks.push(ClassNumberCheck {
            d,
            class_number: ctx.class_number,
            l1_direct: float_to_decimal(&direct),
            l1_formula: float_to_decimal(&ctx.l1_chi_q),
            residual,
            passed: residual < tol,
        });
    }
    Ok(checks)
}

/// All invariants of Q(√D) used downstream. Immutable once built.
#[derive(Debug, Clone)]
pub struct FieldContext {
    pub d: i64,
    pub q: i64,
    pub ell: i64,
    pub eps: QuadInt,
    pub norm_eps: i32,
    /// Regulator log ε.
    pub log_eps: Float,
    pub class_number: u64,
    pub divisor_count_d: u64,
    pub l1_chi_q: Float,
    pub precision_bits: u32,
}

/// Build the context for D, requiring N(ε) = -1.
pub fn make_context(d: i64, precision_bits: u32) -> Result<FieldContext> {
    if precision_bits < 16 {
        return Err(Error::domain("precision must be at least 16 bits"));
    }
    require_squarefree(d)?;
    let eps = fundamental_unit(d)?;
    let norm = eps.norm();
    if norm == 1 {
        return Err(Error::UnsupportedField { d });
    }
    debug_assert_eq!(norm, -1);
    let q = conductor(d);
    let ell = 4 * d / q;
    let log_eps = Float::with_val(precision_bits, eps.to_float(precision_bits + 32).ln());
    let h = class_number(d)?;
    let sqrt_q = Float::with_val(precision_bits + 32, q).sqrt();
    let l1 = Float::with_val(precision_bits, Float::with_val(precision_bits + 32, &log_eps) * (2 * h) / sqrt_q);
    let direct = l1_direct(d, precision_bits)?;
    let defect = Float::with_val(precision_bits, &l1 - &direct).abs();
    if defect > Float::with_val(64, Float::i_exp(1, -(precision_bits as i32) / 2)) {
        return Err(Error::Consistency(format!(
            "class number formula fails for D = {d}: 2h log(eps)/sqrt(q) = {}, direct L(1) = {}",
            float_to_decimal(&l1),
            float_to_decimal(&direct)
        )));
    }
    Ok(FieldContext {
        d,
        q,
        ell,
        eps,
        norm_eps: -1,
        log_eps,
        class_number: h,
        divisor_count_d: arith::divisor_count(d as u64)?,
        l1_chi_q: l1,
        precision_bits,
    })
}

impl FieldContext {
    pub fn prec(&self) -> u32 {
        self.precision_bits
    }

    /// ε as a real number.
    pub fn eps_value(&self, prec: u32) -> Float {
        self.eps.to_float(prec)
    }

    /// log ε at a requested precision (recomputed when more bits are asked for).
    pub fn log_eps_at(&self, prec: u32) -> Float {
        if prec <= self.precision_bits {
            Float::with_val(prec, &self.log_eps)
        } else {
            Float::with_val(prec, self.eps.to_float(prec + 16).ln())
        }
    }

    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            d: self.d.to_string(),
            q: self.q.to_string(),
            ell: self.ell.to_string(),
            eps: UnitRecord {
                x: self.eps.x.to_string(),
                y: self.eps.y.to_string(),
                denominator: self.eps.denominator().to_string(),
                display: self.eps.to_string(),
            },
            norm_eps: self.norm_eps.to_string(),
            log_eps: RealRecord::new(&self.log_eps),
            class_number: self.class_number.to_string(),
            divisor_count_d: self.divisor_count_d.to_string(),
            l1_chi_q: RealRecord::new(&self.l1_chi_q),
            precision_bits: self.precision_bits,
        }
    }
}

/// A real number as a decimal string plus the binary precision it carries.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RealRecord {
    pub value: String,
    pub precision_bits: u32,
}

impl RealRecord {
    pub fn new(x: &Float) -> Self {
        RealRecord { value: float_to_decimal(x), precision_bits: x.prec() }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct UnitRecord {
    pub x: String,
    pub y: String,
    pub denominator: String,
    pub display: String,
}

/// JSON shape of a [`FieldContext`].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FieldRecord {
    #[serde(rename = "D")]
    pub d: String,
    pub q: String,
    pub ell: String,
    pub eps: UnitRecord,
    pub norm_eps: String,
    pub log_eps: RealRecord,
    pub class_number: String,
    #[serde(rename = "divisor_count_D")]
    pub divisor_count_d: String,
    #[serde(rename = "L1_chi_q")]
    pub l1_chi_q: RealRecord,
    pub precision_bits: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smallest y ≥ 1 with x² - D y² = ±4 (half basis) or ±1, by search.
    fn brute_unit(d: i64) -> (i64, i64) {
        let target = if half_basis(d) { 4 } else { 1 };
        for y in 1i64.. {
            for sign in [-1, 1] {
                let rhs = d * y * y + sign * target;
                if rhs <= 0 {
                    continue;
                }
                let x = arith::isqrt_u64(rhs as u64) as i64;
                if x * x == rhs {
                    return (x, y);
                }
            }
        }
        unreachable!()
    }

    fn squarefree_upto(n: i64) -> Vec<i64> {
        (2..=n).filter(|&d| arith::is_squarefree(d).unwrap()).collect()
    }

    #[test]
    fn unit_examples() {
        let e2 = fundamental_unit(2).unwrap();
        assert_eq!((e2.x.to_i64(), e2.y.to_i64()), (Some(1), Some(1)));
        assert_eq!(e2.norm(), -1);
        let e5 = fundamental_unit(5).unwrap();
        assert_eq!((e5.x.to_i64(), e5.y.to_i64()), (Some(1), Some(1)));
        assert_eq!(e5.denominator(), 2);
        assert_eq!(e5.norm(), -1);
        let e3 = fundamental_unit(3).unwrap();
        assert_eq!((e3.x.to_i64(), e3.y.to_i64()), (Some(2), Some(1)));
        assert_eq!(e3.norm(), 1);
        assert!(matches!(fundamental_unit(12), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_matches_brute_force() {
        for d in squarefree_upto(150) {
            if d == 94 || d == 139 || d == 151 || d == 109 || d == 134 || d == 149 {
                continue; // units too large for the naive search to be quick
            }
            let e = fundamental_unit(d).unwrap();
            let (x, y) = brute_unit(d);
            assert_eq!((e.x.to_i64().unwrap(), e.y.to_i64().unwrap()), (x, y), "D = {d}");
            assert_eq!(Integer::from(e.norm().abs_ref()), 1);
        }
    }

    #[test]
    fn unit_is_minimal() {
        // Any unit u > 1 has positive coordinates, so a search over
        // 1 <= x <= x(ε), 1 <= y <= y(ε) finds every unit between 1 and ε.
        for d in squarefree_upto(100) {
            let e = fundamental_unit(d).unwrap();
            let (xmax, ymax) = (e.x.to_i64().unwrap(), e.y.to_i64().unwrap());
            if ymax > 300 {
                continue;
            }
            let target = if half_basis(d) { 4 } else { 1 };
            for y in 1..=ymax {
                for x in 1..=xmax {
                    if (x, y) == (xmax, ymax) {
                        continue;
                    }
                    let n = x * x - d * y * y;
                    assert!(n.abs() != target, "D = {d}: ({x}, {y}) is a smaller unit than {e}");
                }
            }
        }
    }

    #[test]
    fn large_units() {
        // D = 94: 2143295 + 221064√94, norm +1
        let e = fundamental_unit(94).unwrap();
        assert_eq!(e.x, 2143295);
        assert_eq!(e.y, 221064);
        assert_eq!(e.norm(), 1);
        let e = fundamental_unit(61).unwrap();
        assert_eq!((e.x.to_i64(), e.y.to_i64()), (Some(39), Some(5)));
        assert_eq!(e.norm(), -1);
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number(5).unwrap(), 1);
        assert_eq!(class_number(2).unwrap(), 1);
        assert_eq!(class_number(65).unwrap(), 2);
        assert_eq!(class_number(10).unwrap(), 2);
        assert_eq!(class_number(3).unwrap(), 1);
        assert_eq!(narrow_class_number(3).unwrap(), 2);
        assert_eq!(class_number(34).unwrap(), 2);
        assert_eq!(narrow_class_number(34).unwrap(), 4);
        assert_eq!(class_number(79).unwrap(), 3);
    }

    #[test]
    fn class_number_formula_for_all_fields() {
        // h log ε = √q L(1, χ_q) / 2 holds for every real quadratic field.
        for d in squarefree_upto(200) {
            let h = class_number(d).unwrap();
            let l1 = l1_direct(d, 128).unwrap();
            let e = fundamental_unit(d).unwrap();
            let log_eps = e.to_float(160).ln();
            let rhs = Float::with_val(160, conductor(d)).sqrt() * &l1 / 2u32 / &log_eps;
            let defect = (rhs - h).abs().to_f64();
            assert!(defect < 1e-25, "D = {d}, h = {h}, defect {defect:e}");
        }
    }

    #[test]
    fn narrow_equals_wide_iff_norm_minus_one() {
        for d in squarefree_upto(200) {
            let norm = fundamental_unit(d).unwrap().norm();
            let (h, hp) = (class_number(d).unwrap(), narrow_class_number(d).unwrap());
            if norm == -1 {
                assert_eq!(h, hp, "D = {d}");
            } else {
                assert_eq!(2 * h, hp, "D = {d}");
            }
        }
    }

    #[test]
    fn l1_direct_is_positive() {
        for d in [2, 5, 13, 29, 65, 3, 7] {
            assert!(l1_direct(d, 128).unwrap() > 0);
        }
    }

    #[test]
    fn context_examples() {
        let c5 = make_context(5, 128).unwrap();
        assert_eq!((c5.q, c5.ell, c5.class_number, c5.norm_eps), (5, 4, 1, -1));
        assert!((c5.log_eps.to_f64() - 0.4812118).abs() < 1e-7);
        let bound = Float::with_val(64, Float::i_exp(1, -100));
        let formula = Float::with_val(160, &c5.log_eps) * 2u32 / Float::with_val(160, 5).sqrt();
        assert!(Float::with_val(128, &formula - &l1_direct(5, 128).unwrap()).abs() < bound);

        let c2 = make_context(2, 128).unwrap();
        assert_eq!((c2.q, c2.ell, c2.norm_eps), (8, 1, -1));
        assert_eq!(c2.q * c2.ell, 8);

        assert!(matches!(make_context(12, 128), Err(Error::Domain(_))));
        assert_eq!(make_context(3, 128).unwrap_err(), Error::UnsupportedField { d: 3 });
        assert!(matches!(make_context(1, 128), Err(Error::Domain(_))));
    }

    #[test]
    fn context_exists_iff_negative_pell_solvable() {
        for d in squarefree_upto(100) {
            let solvable = (1..500_000u64).any(|y| {
                let Some(rhs) = ((d as u64) * y * y).checked_sub(4) else { return false };
                let x = arith::isqrt_u64(rhs);
                x * x == rhs
            });
            let ctx = make_context(d, 64);
            assert_eq!(ctx.is_ok(), solvable, "D = {d}");
            if !solvable {
                assert_eq!(ctx.unwrap_err(), Error::UnsupportedField { d });
            }
        }
    }

    #[test]
    fn record_has_string_integers() {
        let json = serde_json::to_value(make_context(5, 128).unwrap().to_record()).unwrap();
        assert_eq!(json["D"], "5");
        assert_eq!(json["q"], "5");
        assert_eq!(json["ell"], "4");
        assert_eq!(json["class_number"], "1");
        assert_eq!(json["log_eps"]["precision_bits"], 128);
        assert!(json["log_eps"]["value"].as_str().unwrap().starts_with("4.812118250596034474977589"));
    }
}
