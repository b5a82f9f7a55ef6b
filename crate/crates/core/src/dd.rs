//! Double-double arithmetic.
//!
//! A [`Dd`] is the unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi) / 2`, which carries roughly 106 significand bits
//! (about 32 significant decimal digits). The elementary functions here
//! (`exp`, `ln`, `sqrt`, `powf`) are accurate to a few units of `2^-104`
//! relative on the ranges this crate uses.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

/// Error-free sum: `a + b == s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    let e = b - (s - a);
    (s, e)
}

/// Error-free product: `a * b == p + e` exactly (barring underflow).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const INFINITY: Dd = Dd {
        hi: f64::INFINITY,
        lo: 0.0,
    };
    pub const NAN: Dd = Dd {
        hi: f64::NAN,
        lo: f64::NAN,
    };
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    /// Builds a normalized value from two arbitrary components.
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion for `n < 2^106`; larger values round.
    pub fn from_u128(n: u128) -> Dd {
        let hi = n as f64;
        if n < (1u128 << 106) {
            let rest = n as i128 - hi as i128;
            Dd::from_parts(hi, rest as f64)
        } else {
            let mask = (1u128 << 53) - 1;
            let top = Dd::from_f64((n >> 106) as f64 * 2f64.powi(106));
            let mid = Dd::from_f64(((n >> 53) & mask) as f64 * 2f64.powi(53));
            top + mid + Dd::from_f64((n & mask) as f64)
        }
    }

    pub fn from_u64(n: u64) -> Dd {
        Dd::from_u128(n as u128)
    }

    pub fn from_ratio(num: i64, den: i64) -> Dd {
        Dd::from_f64(num as f64) / Dd::from_f64(den as f64)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest `f64` (the high component, since the pair is normalized).
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn min(self, other: Dd) -> Dd {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Dd) -> Dd {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Multiplication by an exact power of two.
    #[inline]
    pub fn mul_pow2(self, p: f64) -> Dd {
        Dd {
            hi: self.hi * p,
            lo: self.lo * p,
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            Dd::from_parts(hi, self.lo.floor())
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::NAN;
        }
        if self.hi.is_infinite() {
            return Dd::INFINITY;
        }
        let s = self.hi.sqrt();
        let root = Dd::from_f64(s);
        let residual = self - root.sqr();
        root + Dd::from_f64(residual.hi / (2.0 * s))
    }

    /// `10^e` in double-double.
    pub fn pow10(e: i32) -> Dd {
        if (0..=22).contains(&e) {
            return Dd::from_f64(10f64.powi(e));
        }
        let mut base = Dd::from_f64(10.0);
        let mut acc = Dd::ONE;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            n >>= 1;
        }
        if e < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Natural exponential.
    pub fn exp(self) -> Dd {
        const SCALE_BITS: i32 = 9;
        if self.hi.is_nan() {
            return Dd::NAN;
        }
        if self.hi > 709.8 {
            return Dd::INFINITY;
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = (self - Dd::LN_2.mul_f64(k)).mul_pow2(2f64.powi(-SCALE_BITS));

        // expm1(r) by Taylor series; |r| < 7e-4 so a dozen terms is plenty.
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r).div_f64(n);
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() || n > 30.0 {
                break;
            }
        }
        // (1 + s)^2 - 1 = 2s + s^2 keeps full relative accuracy while squaring.
        for _ in 0..SCALE_BITS {
            sum = sum.mul_pow2(2.0) + sum.sqr();
        }
        let y = sum + Dd::ONE;
        let k = k as i32;
        let half = k / 2;
        y.mul_pow2(2f64.powi(half)).mul_pow2(2f64.powi(k - half))
    }

    /// Natural logarithm; NaN for non-positive input.
    pub fn ln(self) -> Dd {
        if self.hi.is_nan() || self.hi < 0.0 {
            return Dd::NAN;
        }
        if self.hi == 0.0 {
            return -Dd::INFINITY;
        }
        if self.hi.is_infinite() {
            return Dd::INFINITY;
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // One Newton step on exp(y) = x doubles the f64 accuracy.
        let y = Dd::from_f64(self.hi.ln());
        y + self * (-y).exp() - Dd::ONE
    }

    /// `self^y` for positive `self`.
    pub fn powf(self, y: Dd) -> Dd {
        if y.is_zero() {
            return Dd::ONE;
        }
        (y * self.ln()).exp()
    }

    /// Decimal rendering with exactly `digits` significant digits
    /// (round-half-up on the remainder).
    pub fn to_sig_string(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.hi.is_nan() {
            return "NaN".to_owned();
        }
        if self.hi.is_infinite() {
            return if self.hi > 0.0 { "inf" } else { "-inf" }.to_owned();
        }
        if self.hi == 0.0 {
            return format_positional(&vec![0; digits], 0, false);
        }
        let negative = self.hi < 0.0;
        let x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        let mut m = if e >= 0 {
            x / Dd::pow10(e)
        } else {
            x * Dd::pow10(-e)
        };
        if m.hi >= 10.0 {
            m = m.div_f64(10.0);
            e += 1;
        } else if m.hi < 1.0 {
            m = m.mul_f64(10.0);
            e -= 1;
        }

        let mut ds: Vec<u8> = Vec::with_capacity(digits);
        for _ in 0..digits {
            let mut d = m.floor().hi.clamp(0.0, 9.0);
            let mut rest = m - Dd::from_f64(d);
            if rest.hi < 0.0 && d > 0.0 {
                d -= 1.0;
                rest += Dd::ONE;
            }
            ds.push(d as u8);
            m = rest.mul_f64(10.0);
        }
        if m.hi >= 5.0 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }

        if e < -5 || e >= digits.max(21) as i32 {
            let mut s = String::new();
            if negative {
                s.push('-');
            }
            s.push((b'0' + ds[0]) as char);
            if ds.len() > 1 {
                s.push('.');
                s.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
            }
            s.push_str(&format!("e{e}"));
            s
        } else {
            format_positional(&ds, e, negative)
        }
    }
}

fn format_positional(ds: &[u8], e: i32, negative: bool) -> String {
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    let ch = |d: &u8| (b'0' + d) as char;
    if e < 0 {
        s.push_str("0.");
        for _ in 0..(-e - 1) {
            s.push('0');
        }
        s.extend(ds.iter().map(ch));
    } else {
        let int_len = e as usize + 1;
        if ds.len() <= int_len {
            s.extend(ds.iter().map(ch));
            for _ in ds.len()..int_len {
                s.push('0');
            }
        } else {
            s.extend(ds[..int_len].iter().map(ch));
            s.push('.');
            s.extend(ds[int_len..].iter().map(ch));
        }
    }
    s
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Dd { hi: s1, lo: 0.0 };
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Dd { hi: p, lo: 0.0 };
        }
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd { hi: q1, lo: 0.0 };
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        f.write_str(&self.to_sig_string(digits))
    }
}

/// Parses plain decimals (`0.2196138920`, `-3`, `1.5e-3`) and simple
/// fractions of decimals (`1/4`, `3/2`).
impl FromStr for Dd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Dd, Error> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: Dd = parse_decimal(num.trim())?;
            let den: Dd = parse_decimal(den.trim())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(num / den);
        }
        parse_decimal(s)
    }
}

fn parse_decimal(s: &str) -> Result<Dd, Error> {
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp_part) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut exp10: i32 = match exp_part {
        Some(t) => t.parse().map_err(|_| bad())?,
        None => 0,
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    // Up to 40 significant digits, folded in 15-digit chunks so every
    // chunk is an exact f64.
    let mut digits: Vec<u8> = Vec::new();
    for (pos, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = c.to_digit(10).ok_or_else(bad)? as u8;
        let in_frac = pos >= int_part.len();
        if digits.len() < 40 {
            if d > 0 || !digits.is_empty() {
                digits.push(d);
            }
            if in_frac {
                exp10 -= 1;
            }
        } else if !in_frac {
            exp10 += 1;
        }
    }
    let mut v = Dd::ZERO;
    for chunk in digits.chunks(15) {
        let n = chunk.iter().fold(0u64, |acc, &d| acc * 10 + d as u64);
        v = v.mul_f64(10f64.powi(chunk.len() as i32)) + Dd::from_f64(n as f64);
    }
    let v = if exp10 >= 0 {
        v * Dd::pow10(exp10)
    } else {
        v / Dd::pow10(-exp10)
    };
    Ok(if negative { -v } else { v })
}
