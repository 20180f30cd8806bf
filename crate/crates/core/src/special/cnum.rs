//! Complex numbers at a configurable binary precision.
//!
//! `CNum` is a thin newtype over an MPFR-backed [`rug::Complex`]. Binary
//! operations evaluate at the larger of the two operand precisions, so mixing
//! a guard-bit working value with a caller-precision value never silently
//! drops bits.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct CNum(Complex);

/// pi at the given precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Decimal digits that are meaningful at `prec` bits.
pub fn decimal_digits(prec: u32) -> usize {
    (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// Render a float as a decimal string with all digits meaningful at its precision.
pub fn float_to_decimal(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(decimal_digits(x.prec())))
}

pub fn parse_float(prec: u32, text: &str) -> Result<Float> {
    Float::parse(text.trim())
        .map(|p| Float::with_val(prec, p))
        .map_err(|e| Error::Parse(format!("invalid real number {text:?}: {e}")))
}

impl CNum {
    pub fn zero(prec: u32) -> Self {
        CNum(Complex::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        CNum(Complex::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        CNum(Complex::with_val(prec, (re, im)))
    }

    pub fn from_i64(prec: u32, re: i64) -> Self {
        CNum(Complex::with_val(prec, re))
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        CNum(Complex::with_val(prec, (re, 0)))
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec());
        CNum(Complex::with_val(prec, (re, im)))
    }

    pub fn from_complex(c: Complex) -> Self {
        CNum(c)
    }

    /// Parse `"a+bi"`, `"a"`, `"bi"`, `"-i"` and similar decimal forms.
    pub fn parse(prec: u32, text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty complex number".into()));
        }
        let Some(body) = s.strip_suffix(['i', 'j']) else {
            return Ok(CNum::from_real(parse_float(prec, &s)?));
        };
        // The imaginary part starts at the last sign that is not an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re_text, im_text) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im_text {
            "" | "+" => Float::with_val(prec, 1),
            "-" => Float::with_val(prec, -1),
            t => parse_float(prec, t)?,
        };
        Ok(CNum::from_parts(parse_float(prec, re_text)?, im))
    }

    pub fn prec(&self) -> u32 {
        let (a, b) = self.0.prec();
        a.max(b)
    }

    /// Same value rounded (or extended) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        CNum(Complex::with_val(prec, &self.0))
    }

    pub fn inner(&self) -> &Complex {
        &self.0
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    pub fn re_f64(&self) -> f64 {
        self.0.real().to_f64()
    }

    pub fn im_f64(&self) -> f64 {
        self.0.imag().to_f64()
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.0.abs_ref())
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }

    pub fn conj(&self) -> Self {
        CNum(self.0.clone().conj())
    }

    pub fn exp(&self) -> Self {
        CNum(self.0.clone().exp())
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        CNum(self.0.clone().ln())
    }

    pub fn sqrt(&self) -> Self {
        CNum(self.0.clone().sqrt())
    }

    pub fn sin(&self) -> Self {
        CNum(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        CNum(self.0.clone().cos())
    }

    pub fn recip(&self) -> Self {
        CNum(self.0.clone().recip())
    }

    /// Principal power `self^w`.
    pub fn pow(&self, w: &CNum) -> Self {
        let prec = self.prec().max(w.prec());
        CNum(Complex::with_val(prec, (&self.0).pow(&w.0)))
    }

    pub fn powi(&self, n: i32) -> Self {
        CNum(self.0.clone().pow(n))
    }

    /// Multiply by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        CNum(self.0.clone().mul_i(false))
    }

    pub fn scale(&self, x: &Float) -> Self {
        CNum(Complex::with_val(self.prec(), &self.0 * x))
    }

    /// Distance |self - other| as an f64.
    pub fn dist(&self, other: &CNum) -> f64 {
        (self - other).abs_f64()
    }

    /// `|self - other| / max(1, |other|)`.
    pub fn rel_dist(&self, other: &CNum) -> f64 {
        let d = (self - other).abs();
        let scale = other.abs().max(&Float::with_val(53, 1));
        (d / scale).to_f64()
    }
}

impl fmt::Debug for CNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CNum({self})")
    }
}

impl fmt::Display for CNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = float_to_decimal(self.re());
        let im = float_to_decimal(self.im());
        if im.starts_with('-') {
            write!(f, "{re}{im}i")
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

macro_rules! cnum_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&CNum> for &CNum {
            type Output = CNum;
            fn $method(self, rhs: &CNum) -> CNum {
                let prec = self.prec().max(rhs.prec());
                CNum(Complex::with_val(prec, $tr::$method(&self.0, &rhs.0)))
            }
        }
        impl $tr<CNum> for CNum {
            type Output = CNum;
            fn $method(self, rhs: CNum) -> CNum {
                $tr::$method(&self, &rhs)
            }
        }
        impl $tr<&CNum> for CNum {
            type Output = CNum;
            fn $method(self, rhs: &CNum) -> CNum {
                $tr::$method(&self, rhs)
            }
        }
        impl $tr<CNum> for &CNum {
            type Output = CNum;
            fn $method(self, rhs: CNum) -> CNum {
                $tr::$method(self, &rhs)
            }
        }
        impl $tr<f64> for &CNum {
            type Output = CNum;
            fn $method(self, rhs: f64) -> CNum {
                CNum(Complex::with_val(self.prec(), $tr::$method(&self.0, rhs)))
            }
        }
        impl $tr<f64> for CNum {
            type Output = CNum;
            fn $method(self, rhs: f64) -> CNum {
                $tr::$method(&self, rhs)
            }
        }
        impl $tr<i64> for &CNum {
            type Output = CNum;
            fn $method(self, rhs: i64) -> CNum {
                CNum(Complex::with_val(self.prec(), $tr::$method(&self.0, rhs)))
            }
        }
        impl $tr<i64> for CNum {
            type Output = CNum;
            fn $method(self, rhs: i64) -> CNum {
                $tr::$method(&self, rhs)
            }
        }
        impl $tr<&Float> for &CNum {
            type Output = CNum;
            fn $method(self, rhs: &Float) -> CNum {
                let prec = self.prec().max(rhs.prec());
                CNum(Complex::with_val(prec, $tr::$method(&self.0, rhs)))
            }
        }
        impl $tr<&Float> for CNum {
            type Output = CNum;
            fn $method(self, rhs: &Float) -> CNum {
                $tr::$method(&self, rhs)
            }
        }
    };
}

cnum_binop!(Add, add);
cnum_binop!(Sub, sub);
cnum_binop!(Mul, mul);
cnum_binop!(Div, div);

impl Neg for CNum {
    type Output = CNum;
    fn neg(self) -> CNum {
        CNum(-self.0)
    }
}

impl Neg for &CNum {
    type Output = CNum;
    fn neg(self) -> CNum {
        CNum(-self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let p = 128;
        let cases = [
            ("2", 2.0, 0.0),
            ("-1", -1.0, 0.0),
            ("0.3i", 0.0, 0.3),
            ("-3+i", -3.0, 1.0),
            ("1-2.5i", 1.0, -2.5),
            ("2e-3+1e-2i", 2e-3, 1e-2),
            ("-1.5e+1-1e-1i", -15.0, -0.1),
            ("i", 0.0, 1.0),
            ("-i", 0.0, -1.0),
            (" 0.5 + 1.3 i ", 0.5, 1.3),
        ];
        for (text, re, im) in cases {
            let z = CNum::parse(p, text).unwrap();
            assert!((z.re_f64() - re).abs() < 1e-15, "{text}");
            assert!((z.im_f64() - im).abs() < 1e-15, "{text}");
        }
        assert!(CNum::parse(p, "abc").is_err());
        assert!(CNum::parse(p, "").is_err());
    }

    #[test]
    fn parse_keeps_full_precision() {
        let z = CNum::parse(256, "0.1").unwrap();
        let tenth = Float::with_val(256, 1) / 10u32;
        assert_eq!(*z.re(), tenth);
    }

    #[test]
    fn mixed_precision_takes_max() {
        let a = CNum::from_f64(64, 1.0, 0.0);
        let b = CNum::from_f64(200, 1.0, 0.0);
        assert_eq!((&a + &b).prec(), 200);
        assert_eq!((&b * &a).prec(), 200);
    }

    #[test]
    fn display_round_trips() {
        let z = CNum::from_f64(128, 1.25, -0.5);
        let back = CNum::parse(128, &z.to_string()).unwrap();
        assert_eq!(back, z);
    }
}
