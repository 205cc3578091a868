//! Exact rational helpers shared by the degeneracy and spread modules.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Renders `p/q` with an explicit denominator, including integers (`3/1`).
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.45` exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::param(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 15 {
        return Err(bad());
    }
    let mut numer: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let mut denom: i64 = 1;
    for c in frac_part.chars() {
        numer = numer
            .checked_mul(10)
            .and_then(|x| x.checked_add(c.to_digit(10).unwrap() as i64))
            .ok_or_else(bad)?;
        denom *= 10;
    }
    let r = Rational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn from_int(x: i64) -> Rational {
    Rational::from_integer(x)
}

/// `⌊r·n⌋` for nonnegative `r`.
pub fn floor_mul(r: &Rational, n: usize) -> usize {
    let v = (*r * Rational::from_integer(n as i64)).floor();
    (*v.numer()).max(0) as usize
}

/// `⌈r⌉` as a nonnegative integer.
pub fn ceil_u64(r: &Rational) -> u64 {
    let c = r.ceil();
    (*c.numer()).max(0) as u64
}

pub fn is_probability(r: &Rational) -> bool {
    *r >= Rational::zero() && *r <= Rational::one()
}

pub mod serde_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::render(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    use crate::Rational;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&super::render(r))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse("3/2").unwrap(), Rational::new(3, 2));
        assert_eq!(parse("0.45").unwrap(), Rational::new(9, 20));
        assert_eq!(parse("2").unwrap(), Rational::from_integer(2));
        assert_eq!(parse(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse("-1.25").unwrap(), Rational::new(-5, 4));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1e-3").is_err());
    }

    #[test]
    fn renders_integers_with_denominator() {
        assert_eq!(render(&Rational::from_integer(3)), "3/1");
        assert_eq!(render(&Rational::new(10, 4)), "5/2");
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_mul(&Rational::new(9, 20), 10), 4);
        assert_eq!(floor_mul(&Rational::new(1, 2), 16), 8);
        assert_eq!(ceil_u64(&Rational::new(20, 9)), 3);
        assert_eq!(ceil_u64(&Rational::from_integer(2)), 2);
    }
}
