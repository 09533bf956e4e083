//! Thin extended-precision real type used by the eigensolve and the
//! eigenvalue extraction.
//!
//! Every value carries its working precision in bits; binary operations run at
//! the larger of the two operand precisions with round-half-even.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone, Debug)]
pub struct Real {
    v: BigFloat,
    bits: usize,
}

impl Real {
    pub fn zero(bits: usize) -> Self {
        Real {
            v: BigFloat::from_f64(0.0, bits),
            bits,
        }
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Real {
            v: BigFloat::from_f64(x, bits),
            bits,
        }
    }

    pub fn from_i64(x: i64, bits: usize) -> Self {
        Real {
            v: BigFloat::from_i64(x, bits),
            bits,
        }
    }

    /// Exact ratio `num / den` rounded once to `bits`.
    pub fn ratio(num: i64, den: i64, bits: usize) -> Self {
        Real::from_i64(num, bits) / Real::from_i64(den, bits)
    }

    pub fn pi(bits: usize) -> Self {
        let mut cc = consts();
        Real {
            v: cc.pi(bits, RM),
            bits,
        }
    }

    pub fn precision(&self) -> usize {
        self.bits
    }

    pub fn sqrt(&self) -> Self {
        Real {
            v: self.v.sqrt(self.bits, RM),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        Real {
            v: self.v.abs(),
            bits: self.bits,
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    /// Binary exponent `e` such that `|x| = 0.m * 2^e` with `0.5 <= 0.m < 1`.
    /// Zero maps to `i32::MIN`.
    pub fn binary_exponent(&self) -> i32 {
        if self.v.is_zero() {
            return i32::MIN;
        }
        self.v.exponent().unwrap_or(i32::MIN)
    }

    /// Correctly rounded conversion to `f64` (for values in the normal range).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        let mut r = self.v.clone();
        if r.set_precision(53, RM).is_err() {
            return f64::NAN;
        }
        let Some((words, _, sign, exp, _)) = r.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *words.last().expect("nonzero mantissa");
        // value = top / 2^64 * 2^exp
        let mut x = top as f64;
        let mut e = exp - 64;
        while e < -1000 {
            x *= 2f64.powi(-1000);
            e += 1000;
        }
        while e > 1000 {
            x *= 2f64.powi(1000);
            e -= 1000;
        }
        x *= 2f64.powi(e);
        if sign == Sign::Neg {
            -x
        } else {
            x
        }
    }

    /// Parses a plain decimal literal such as `-1.25e-7`.
    pub fn parse(s: &str, bits: usize) -> Option<Self> {
        let t = s.trim();
        if t.is_empty()
            || !t
                .bytes()
                .all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b))
        {
            return None;
        }
        let mut cc = consts();
        let v = BigFloat::parse(t, Radix::Dec, bits, RM, &mut cc);
        if v.is_nan() || v.is_inf() {
            return None;
        }
        Some(Real { v, bits })
    }

    /// Decimal scientific notation with exactly `digits` significant digits,
    /// e.g. `4.088132200000000000000000000000000000000e-50`. Zero renders as
    /// `0`. The output depends only on the stored value.
    pub fn to_sci_string(&self, digits: usize) -> String {
        assert!(digits >= 1);
        if self.v.is_zero() {
            return "0".to_string();
        }
        let mut cc = consts();
        let full = self
            .v
            .format(Radix::Dec, RM, &mut cc)
            .expect("finite value formats");
        round_sci(&full, digits)
    }
}

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

/// Round a `[-]d.ddd…e±x` decimal string to `digits` significant digits
/// using round-half-even on the digit string.
fn round_sci(full: &str, digits: usize) -> String {
    let (neg, body) = match full.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, full),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut ds: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    let mut exp10 = exp + int_part.len() as i64 - 1;
    // strip leading zeros
    let lead = ds.iter().take_while(|&&d| d == 0).count();
    ds.drain(..lead);
    exp10 -= lead as i64;
    if ds.is_empty() {
        return "0".to_string();
    }
    if ds.len() > digits {
        let rest = &ds[digits..];
        let round_up = match rest[0].cmp(&5) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => rest[1..].iter().any(|&d| d != 0) || ds[digits - 1] % 2 == 1,
        };
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    exp10 += 1;
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
    } else {
        ds.resize(digits, 0);
    }
    let mut out = String::with_capacity(digits + 8);
    if neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if digits > 1 {
        out.push('.');
        out.extend(ds[1..].iter().map(|&d| (b'0' + d) as char));
    }
    out.push('e');
    if exp10 < 0 {
        out.push('-');
    } else {
        out.push('+');
    }
    out.push_str(&format!("{:02}", exp10.abs()));
    out
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string(20))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let bits = self.bits.max(rhs.bits);
                Real {
                    v: self.v.$m(&rhs.v, bits, RM),
                    bits,
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            v: self.v.neg(),
            bits: self.bits,
        }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            v: self.v.clone().neg(),
            bits: self.bits,
        }
    }
}
