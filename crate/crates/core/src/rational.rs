//! Exact rational scalars and points.
//!
//! Everything geometric in this crate is computed over `BigRational`, so all
//! predicates (in particular strict height comparisons) are decidable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// A point in some rational coordinate space.
pub type Point = Vec<Rational>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn point(coords: &[i64]) -> Point {
    coords.iter().map(|&c| int(c)).collect()
}

/// Parses `"a/b"` or `"a"`. Unreduced input is normalized, never rejected.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("bad rational numerator in {s:?}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("bad rational denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn add(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `(1 - s) * a + s * b`
pub fn lerp(a: &[Rational], b: &[Rational], s: &Rational) -> Point {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
}

/// Weighted combination `sum w_i p_i`.
pub fn combine<'a, I>(terms: I, dim: usize) -> Point
where
    I: IntoIterator<Item = (&'a Rational, &'a Point)>,
{
    let mut out = vec![Rational::zero(); dim];
    for (w, p) in terms {
        if w.is_zero() {
            continue;
        }
        for (o, c) in out.iter_mut().zip(p) {
            *o += w * c;
        }
    }
    out
}

pub fn centroid(points: &[&Point]) -> Point {
    let dim = points.first().map_or(0, |p| p.len());
    let w = rat(1, points.len() as i64);
    let mut out = vec![Rational::zero(); dim];
    for p in points {
        for (o, c) in out.iter_mut().zip(p.iter()) {
            *o += c * &w;
        }
    }
    out
}

/// Max-metric distance.
pub fn linf(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_opt_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(format_rational).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_point {
    use super::*;

    pub fn serialize<S: Serializer>(p: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        p.iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_points {
    use super::*;

    pub fn serialize<S: Serializer>(ps: &[Point], s: S) -> Result<S::Ok, S::Error> {
        ps.iter()
            .map(|p| p.iter().map(format_rational).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|p| {
                p.iter()
                    .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// A point pair serialized as two coordinate arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointPair {
    #[serde(with = "serde_point")]
    pub first: Point,
    #[serde(with = "serde_point")]
    pub second: Point,
}
