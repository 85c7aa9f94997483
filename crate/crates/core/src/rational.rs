//! Exact rational parameters (`δ`, `ξ`, `η`, `ε`) and small helpers.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Rational = Ratio<i64>;

pub fn ratio(num: i64, den: i64) -> Rational {
    Ratio::new(num, den)
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3/8"`, `"0.125"` or `"2"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let den: i64 = b.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Ratio::new(a.trim().parse().ok()?, den));
    }
    let negative = text.starts_with('-');
    let body = text.trim_start_matches(['-', '+']);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > 15 || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let int: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_val: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().ok()?
    };
    let num = int.checked_mul(den)?.checked_add(frac_val)?;
    Some(Ratio::new(if negative { -num } else { num }, den))
}

/// `⌈r⌉` for a non-negative rational.
pub fn ceil_nonneg(r: Rational) -> u64 {
    debug_assert!(r >= Rational::zero());
    r.ceil().to_integer() as u64
}

/// `⌊r⌋` for a non-negative rational.
pub fn floor_nonneg(r: Rational) -> u64 {
    debug_assert!(r >= Rational::zero());
    r.floor().to_integer() as u64
}

/// Closest rational with denominator at most `max_den` (for turning an
/// empirical `f64` into a parameter).
pub fn approximate(x: f64, max_den: i64) -> Rational {
    let mut best = Ratio::from_integer(x.round() as i64);
    let mut best_err = (x - to_f64(best)).abs();
    for den in 1..=max_den {
        let num = (x * den as f64).round() as i64;
        let cand = Ratio::new(num, den);
        let err = (x - to_f64(cand)).abs();
        if err < best_err - 1e-15 {
            best = cand;
            best_err = err;
        }
    }
    best
}

pub mod serde_rational {
    //! Serializes a rational as `"p/q"`.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("bad rational {text:?}")))
    }
}
