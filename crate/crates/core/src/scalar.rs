//! Pluggable scalar fields.
//!
//! Two fields are provided: [`Rational`] (exact, arbitrary size) and [`Real`]
//! (binary floating point with a process-wide working precision). Every
//! algorithm in the crate is generic over [`Scalar`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = num_rational::BigRational;

/// Operations shared by the exact and the floating field.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;
    /// Field label used in reports.
    fn field_name() -> String;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    /// Square root, `None` if it does not exist in the field.
    fn sqrt(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn pi() -> Option<Self>;

    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Text form: exact fraction, or the shortest decimal that reads back identically.
    fn render(&self) -> String;

    /// Relative rounding unit of the field (zero when exact).
    fn epsilon() -> Self;

    fn from_frac(p: i64, q: i64) -> Self {
        Self::from_i64(p) / Self::from_i64(q)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// `self^p` for a general exponent through `exp(p ln self)`; exact for integral `p`.
    fn powf(&self, p: &Self) -> Option<Self> {
        let r = p.to_f64();
        if r == r.trunc() && r.abs() < 1e9 && Self::from_i64(r as i64) == *p {
            return Some(self.powi(r as i64));
        }
        if self.is_zero() && *p > Self::zero() {
            return Some(Self::zero());
        }
        (self.ln()? * p.clone()).exp()
    }

    fn max_abs(a: Self, b: Self) -> Self {
        let (a, b) = (a.abs(), b.abs());
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn field_name() -> String {
        "rational".to_string()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sqrt(&self) -> Option<Self> {
        if Signed::is_negative(self) {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }
    fn exp(&self) -> Option<Self> {
        Zero::is_zero(self).then(One::one)
    }
    fn ln(&self) -> Option<Self> {
        One::is_one(self).then(Zero::zero)
    }
    fn pi() -> Option<Self> {
        None
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn epsilon() -> Self {
        Zero::zero()
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    if let (Some(a), Some(b)) = (n.to_f64(), d.to_f64()) {
        if a.is_finite() && b.is_finite() && b != 0.0 {
            return a / b;
        }
    }
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 60 {
        Rational::new(n.clone(), d.clone() << (shift - 60) as usize)
    } else {
        Rational::new(n.clone() << (60 - shift) as usize, d.clone())
    };
    let q = scaled.to_integer().to_f64().unwrap_or(0.0);
    q * libm_pow2(shift - 60)
}

fn libm_pow2(e: i64) -> f64 {
    let mut v = 1.0f64;
    let mut e = e;
    while e > 0 {
        let s = e.min(1000);
        v *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 {
        let s = (-e).min(1000);
        v /= 2f64.powi(s as i32);
        e += s;
    }
    v
}

/// Working precision of [`Real`] in bits (default 128, about 34 decimal digits).
static PRECISION: AtomicUsize = AtomicUsize::new(DEFAULT_PRECISION_BITS);

pub const DEFAULT_PRECISION_BITS: usize = 128;

/// Sets the process-wide working precision of [`Real`], in bits (rounded up to 64).
pub fn set_precision_bits(bits: usize) {
    let bits = bits.clamp(64, 1 << 16);
    PRECISION.store(bits.div_ceil(64) * 64, AtomicOrdering::Relaxed);
}

pub fn precision_bits() -> usize {
    PRECISION.load(AtomicOrdering::Relaxed)
}

/// Approximate number of significant decimal digits at the current precision.
pub fn precision_digits() -> usize {
    (precision_bits() as f64 * core::f64::consts::LOG10_2) as usize
}

const RM: RoundingMode = RoundingMode::ToEven;

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

/// Binary floating-point number at the process-wide precision.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn from_bigfloat(b: BigFloat) -> Self {
        Real(b)
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.0
    }

    pub fn from_f64(v: f64) -> Self {
        Real(BigFloat::from_f64(v, precision_bits()))
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    fn from_bigint(n: &BigInt) -> BigFloat {
        if n.is_zero() {
            return BigFloat::from_u64(0, precision_bits());
        }
        let (sign, mag) = n.to_u64_digits();
        let words: Vec<u64> = mag;
        let s = if sign == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
        let e = (words.len() * 64) as i32;
        BigFloat::from_words(&words, s, e)
    }

    /// Exact rational value of the binary number.
    pub fn to_rational(&self) -> Option<Rational> {
        let (words, _bits, sign, exp, _) = self.0.as_raw_parts()?;
        let mut mag = BigUint::zero();
        for w in words.iter().rev() {
            mag = (mag << 64usize) + BigUint::from(*w);
        }
        if mag.is_zero() {
            return Some(<Rational as Zero>::zero());
        }
        let shift = exp as i64 - 64 * words.len() as i64;
        let mut num = BigInt::from(mag);
        if sign == Sign::Neg {
            num = -num;
        }
        Some(if shift >= 0 {
            Rational::from_integer(num << shift as usize)
        } else {
            Rational::new(num, BigInt::one() << (-shift) as usize)
        })
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl $tr for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0.$call(&rhs.0, precision_bits(), RM))
            }
        }
    };
}
real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

impl Scalar for Real {
    const EXACT: bool = false;

    fn field_name() -> String {
        alloc::format!("float-{}", precision_bits())
    }
    fn zero() -> Self {
        Real(BigFloat::from_u64(0, precision_bits()))
    }
    fn one() -> Self {
        Real(BigFloat::from_u64(1, precision_bits()))
    }
    fn from_i64(v: i64) -> Self {
        Real(BigFloat::from_i64(v, precision_bits()))
    }
    fn from_rational(r: &Rational) -> Self {
        let n = Real::from_bigint(r.numer());
        let d = Real::from_bigint(r.denom());
        Real(n.div(&d, precision_bits(), RM))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn sqrt(&self) -> Option<Self> {
        if self.0.is_negative() && !self.0.is_zero() {
            return None;
        }
        Some(Real(self.0.sqrt(precision_bits(), RM)))
    }
    fn exp(&self) -> Option<Self> {
        let r = Real(self.0.exp(precision_bits(), RM, &mut consts()));
        r.is_finite().then_some(r)
    }
    fn ln(&self) -> Option<Self> {
        if !self.0.is_positive() || self.0.is_zero() {
            return None;
        }
        Some(Real(self.0.ln(precision_bits(), RM, &mut consts())))
    }
    fn pi() -> Option<Self> {
        Some(Real(consts().pi(precision_bits(), RM)))
    }
    fn abs(&self) -> Self {
        Real(self.0.abs())
    }
    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        match self.0.as_raw_parts() {
            Some((words, _, sign, exp, _)) => {
                let top = *words.last().unwrap_or(&0);
                let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
                let m = top as f64 + next as f64 / 18446744073709551616.0;
                let v = m * libm_pow2(exp as i64 - 64);
                if sign == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => 0.0,
        }
    }
    fn render(&self) -> String {
        if !self.is_finite() {
            return if self.0.is_nan() { "NaN".into() } else if self.0.is_positive() { "inf".into() } else { "-inf".into() };
        }
        match self.to_rational() {
            Some(v) => shortest_decimal(&v, |cand| Real::from_rational(cand) == *self),
            None => "NaN".into(),
        }
    }
    fn epsilon() -> Self {
        Real::one() / Real::from_i64(2).powi(precision_bits() as i64 - 1)
    }
}

/// Shortest decimal string `d` (in significant digits) such that `accept(value of d)` holds.
fn shortest_decimal(v: &Rational, accept: impl Fn(&Rational) -> bool) -> String {
    if Zero::is_zero(v) {
        return "0".into();
    }
    let neg = Signed::is_negative(v);
    let mag = Signed::abs(v);
    let mut e10 = rational_to_f64(&mag).log10().floor() as i64;
    if pow10(e10) > mag {
        e10 -= 1;
    } else if pow10(e10 + 1) <= mag {
        e10 += 1;
    }
    for digits in 1..=400i64 {
        let scale = digits - 1 - e10;
        let scaled = &mag * pow10(scale);
        let k = round_half_even(&scaled);
        let cand = Rational::from_integer(k.clone()) / pow10(scale);
        let signed = if neg { -cand.clone() } else { cand.clone() };
        if accept(&signed) {
            let mut s = k.to_string();
            let mut exp = e10;
            if s.len() as i64 > digits {
                exp += 1;
            }
            while s.len() > 1 && s.ends_with('0') {
                s.pop();
            }
            return format_decimal(neg, &s, exp);
        }
    }
    alloc::format!("{}", v)
}

fn pow10(e: i64) -> Rational {
    let t = BigInt::from(10).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(t)
    } else {
        Rational::new(BigInt::one(), t)
    }
}

fn round_half_even(r: &Rational) -> BigInt {
    let fl = r.floor().to_integer();
    let frac = r - Rational::from_integer(fl.clone());
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    match frac.cmp(&half) {
        Ordering::Less => fl,
        Ordering::Greater => fl + 1,
        Ordering::Equal => {
            if fl.is_even() {
                fl
            } else {
                fl + 1
            }
        }
    }
}

/// `digits` are the significant digits, the value is `0.d1d2.. * 10^(exp+1)`.
fn format_decimal(neg: bool, digits: &str, exp: i64) -> String {
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-5..21).contains(&exp) {
        if exp < 0 {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits);
        } else {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                out.push_str(digits);
                for _ in digits.len()..int_len {
                    out.push('0');
                }
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        }
    } else {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

/// Parses `"3"`, `"-1/4"`, `"0.125"`, `"1e-8"`, `"2.5E+3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(p / q);
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::from(int_part);
    digits.push_str(frac_part);
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let mut r = Rational::from_integer(n) * pow10(exp - frac_part.len() as i64);
    if neg {
        r = -r;
    }
    Some(r)
}

/// Parses a decimal or fractional literal into any field.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    parse_rational(text).map(|r| S::from_rational(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(Scalar::sqrt(&q(1, 4)), Some(q(1, 2)));
        assert_eq!(Scalar::sqrt(&q(2, 1)), None);
        assert_eq!(Scalar::sqrt(&q(-1, 1)), None);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("0.125"), Some(q(1, 8)));
        assert_eq!(parse_rational("-1/4"), Some(q(-1, 4)));
        assert_eq!(parse_rational("1e-3"), Some(q(1, 1000)));
        assert_eq!(parse_rational("2.5E+1"), Some(q(25, 1)));
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn real_render_round_trips() {
        for v in ["0.1", "-2.5", "1e-30", "3", "123456789.125", "6.02e23"] {
            let x: Real = parse_scalar(v).unwrap();
            let text = x.render();
            let back: Real = parse_scalar(&text).unwrap();
            assert_eq!(back, x, "{v} -> {text}");
        }
        let third = Real::one() / Real::from_i64(3);
        let back: Real = parse_scalar(&third.render()).unwrap();
        assert_eq!(back, third);
        assert_eq!(Real::from_frac(1, 10).render(), "0.1");
        assert_eq!(Real::from_i64(-2).render(), "-2");
    }

    #[test]
    fn real_elementary_functions() {
        let two = Real::from_i64(2);
        let s = Scalar::sqrt(&two).unwrap();
        assert!((s.clone() * s - two.clone()).abs() < Real::epsilon() * Real::from_i64(8));
        let e = Real::one().exp().unwrap();
        assert!((e.ln().unwrap() - Real::one()).abs() < Real::epsilon() * Real::from_i64(8));
        assert!((Real::pi().unwrap().to_f64() - core::f64::consts::PI).abs() < 1e-15);
        assert!((two.to_f64() - 2.0).abs() == 0.0);
        assert!((Real::from_frac(-1, 3).to_f64() + 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn powi_and_powf() {
        assert_eq!(q(2, 3).powi(3), q(8, 27));
        assert_eq!(q(2, 3).powi(-2), q(9, 4));
        assert_eq!(q(4, 1).powf(&q(2, 1)), Some(q(16, 1)));
        assert_eq!(q(4, 1).powf(&q(1, 2)), None);
        let r = Real::from_i64(4).powf(&Real::from_frac(1, 2)).unwrap();
        assert!((r - Real::from_i64(2)).abs() < Real::epsilon() * Real::from_i64(16));
    }
}
