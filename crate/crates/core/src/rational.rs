//! Exact rational helpers.
//!
//! Every height, rate, time and density in the crate is a [`Rational`]
//! (an arbitrary-precision fraction kept in lowest terms). Floating point
//! only appears in [`to_f64`], for display.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// `r * g`, reducing only by `gcd(g, den)`; the result stays in lowest terms.
pub fn mul_u64(r: &Rational, g: u64) -> Rational {
    if g == 0 {
        return Rational::zero();
    }
    let rem = (r.denom() % BigInt::from(g)).to_u64().expect("remainder below g");
    let common = g.gcd(&rem);
    Rational::new_raw(r.numer() * BigInt::from(g / common), r.denom() / BigInt::from(common))
}

/// Parse `"7/15"`, `"-3"`, `"0.125"` or `"1.5e-3"` exactly.
pub fn parse(input: &str) -> Result<Rational> {
    let err = || Error::Parse {
        what: "rational",
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let mut n: BigInt = format!("{whole}{frac}").parse().map_err(|_| err())?;
    if negative {
        n = -n;
    }
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `"num/den"`, always with an explicit denominator.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        return n / d;
    }
    // Both sides overflow f64; shift down first.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or(Error::Parse {
        what: "finite float",
        input: x.to_string(),
    })
}

/// Largest `k` with `2^k <= r`, for positive `r`.
pub fn floor_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "floor_log2 of non-positive value");
    floor_log2_ratio(r.numer(), r.denom())
}

/// [`floor_log2`] of `num / den` without reducing the fraction.
pub fn floor_log2_ratio(num: &BigInt, den: &BigInt) -> i64 {
    assert!(num.is_positive() && den.is_positive(), "floor_log2 of non-positive value");
    let n = num.magnitude();
    let d = den.magnitude();
    let mut k = n.bits() as i64 - d.bits() as i64;
    // 2^k <= n/d  <=>  d * 2^k <= n
    let le = |k: i64| -> bool {
        if k >= 0 {
            (d << k as usize) <= *n
        } else {
            *d <= (n << (-k) as usize)
        }
    };
    while !le(k) {
        k -= 1;
    }
    while le(k + 1) {
        k += 1;
    }
    k
}

/// `2^k` as a rational, any sign of `k`.
pub fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(BigInt::one() << k as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// A rational upper approximation of `sqrt(r)`: the result `s` satisfies
/// `sqrt(r) <= s <= sqrt(r) * (1 + 2^-bits)`. Exact when `r` is a perfect
/// square of a rational.
pub fn sqrt_upper(r: &Rational, bits: u32) -> Rational {
    assert!(!r.is_negative(), "sqrt of negative value");
    if r.is_zero() {
        return Rational::zero();
    }
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    // sqrt(n/d) = sqrt(n*d)/d ; scale by 4^bits so the ceiling error is tiny.
    let scaled: BigUint = (n * d) << (2 * bits as usize);
    let root = scaled.sqrt();
    let root = if &root * &root == scaled { root } else { root + 1u32 };
    let den: BigUint = d << bits as usize;
    Rational::new(
        BigInt::from_biguint(Sign::Plus, root),
        BigInt::from_biguint(Sign::Plus, den),
    )
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn lcm_u64(a: u64, b: u64) -> Option<u64> {
    (a / a.gcd(&b)).checked_mul(b)
}

/// Serde adapter: rationals travel as `"num/den"` strings; plain JSON numbers
/// (integers and decimals) are accepted on input and converted exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frac(pub Rational);

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        let text = match &value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(de::Error::custom(format_args!(
                    "expected a fraction string or number, got {other}"
                )))
            }
        };
        parse(&text).map(Frac).map_err(de::Error::custom)
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(&self.0))
    }
}

impl From<Rational> for Frac {
    fn from(r: Rational) -> Self {
        Frac(r)
    }
}
