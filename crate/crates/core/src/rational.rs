//! Exact rational helpers: serialization as `{"num": "..", "den": ".."}`,
//! `num/den` strings and fixed significant-digit decimal rendering.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    BigRational::new(num.into(), den.into())
}

pub fn from_usize(v: usize) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// `n!` as an unsigned big integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Serialized form of a rational; both parts are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<RationalRepr> for Rational {
    type Error = String;

    fn try_from(repr: RationalRepr) -> Result<Self, Self::Error> {
        let num: BigInt = repr.num.parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = repr.den.parse().map_err(|e| format!("bad denominator: {e}"))?;
        if den.is_zero() || den.is_negative() {
            return Err("denominator must be positive".into());
        }
        Ok(BigRational::new(num, den))
    }
}

/// `#[serde(with = "crate::rational::serde_rational")]`
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        Rational::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// Rows of rationals, e.g. the per-j rows of a probability table.
pub mod serde_rational_rows {
    use super::*;

    pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<Vec<RationalRepr>> = rows
            .iter()
            .map(|row| row.iter().map(RationalRepr::from).collect())
            .collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let repr = Vec::<Vec<RationalRepr>>::deserialize(d)?;
        repr.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|r| Rational::try_from(r).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// Big integers as decimal strings.
pub mod serde_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `num/den` in lowest terms; integers keep the `/1` so the shape is uniform.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal rendering with exactly `sig` significant digits, rounded half away
/// from zero. Computed in exact arithmetic, so identical inputs always render
/// identically.
pub fn to_decimal(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let v = r.abs();
    let ten = BigInt::from(10);

    // Decimal exponent e with 10^e <= v < 10^(e+1); start from the f64 guess
    // and correct exactly.
    let guess = v.to_f64().map(|f| f.log10().floor()).unwrap_or(0.0);
    let mut e = if guess.is_finite() { guess as i64 } else { 0 };
    let pow10 = |e: i64| -> Rational {
        if e >= 0 {
            BigRational::from_integer(ten.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), ten.pow((-e) as u32))
        }
    };
    while pow10(e) > v {
        e -= 1;
    }
    while pow10(e + 1) <= v {
        e += 1;
    }

    let shift = sig as i64 - 1 - e;
    let scaled = &v * pow10(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = q;
    if BigInt::from(2) * rem >= *scaled.denom() {
        digits += 1;
    }
    if digits == ten.pow(sig as u32) {
        digits /= &ten;
        e += 1;
    }
    let digits = digits.to_string();
    let body = if e >= 0 {
        let int_len = (e + 1) as usize;
        if int_len >= sig {
            format!("{}{}", digits, "0".repeat(int_len - sig))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}
