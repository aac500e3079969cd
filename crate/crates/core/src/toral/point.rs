use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quadratic::{format_rational, parse_rational, QuadElem};

/// Radicand tag for points whose coordinates are plain rationals.
const RATIONAL_FIELD: i64 = 0;

pub(crate) fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 || f == 0.0 {
        0.0
    } else {
        f
    }
}

/// Sup-norm quotient distance on `ℝ²/ℤ²` for coordinates in `[0, 1)`.
pub fn torus_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..2 {
        let t = (p[k] - q[k]).abs();
        m = m.max(t.min(1.0 - t));
    }
    m
}

/// An exact point of the torus with coordinates in `ℚ(√D) ∩ [0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadPoint {
    x: QuadElem,
    y: QuadElem,
}

impl QuadPoint {
    /// Reduces both coordinates mod 1.
    pub fn new(x: QuadElem, y: QuadElem) -> Self {
        debug_assert_eq!(x.radicand(), y.radicand());
        Self { x: x.frac(), y: y.frac() }
    }

    pub fn rational(x: BigRational, y: BigRational) -> Self {
        Self::new(
            QuadElem::raw(x, BigRational::zero(), RATIONAL_FIELD),
            QuadElem::raw(y, BigRational::zero(), RATIONAL_FIELD),
        )
    }

    pub fn x(&self) -> &QuadElem {
        &self.x
    }

    pub fn y(&self) -> &QuadElem {
        &self.y
    }

    pub fn radicand(&self) -> i64 {
        self.x.radicand()
    }

    pub fn is_rational(&self) -> bool {
        self.x.is_rational() && self.y.is_rational()
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [frac(self.x.to_f64()), frac(self.y.to_f64())]
    }

    /// The same point viewed in `ℚ(√d)`, when that makes sense.
    pub fn in_field(&self, d: i64) -> Option<QuadPoint> {
        if self.radicand() == d {
            return Some(self.clone());
        }
        if self.is_rational() {
            let lift = |e: &QuadElem| QuadElem::raw(e.rational_part().clone(), BigRational::zero(), d);
            return Some(QuadPoint {
                x: lift(&self.x),
                y: lift(&self.y),
            });
        }
        None
    }

    fn same_value(&self, o: &QuadPoint) -> bool {
        let eq = |a: &QuadElem, b: &QuadElem| {
            a.rational_part() == b.rational_part()
                && a.sqrt_coeff() == b.sqrt_coeff()
                && (a.is_rational() || a.radicand() == b.radicand())
        };
        eq(&self.x, &o.x) && eq(&self.y, &o.y)
    }

    pub fn height_bits(&self) -> u64 {
        self.x.height_bits().max(self.y.height_bits())
    }
}

impl fmt::Debug for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.x, self.y)
    }
}

/// A point of `ℝ²/ℤ²`. Floating-point coordinates are always present; an
/// exact form is kept when the point was built from one.
#[derive(Clone)]
pub struct TorusPoint {
    coords: [f64; 2],
    exact: Option<Arc<QuadPoint>>,
}

impl TorusPoint {
    pub fn from_coords(c: [f64; 2]) -> Self {
        Self {
            coords: [frac(c[0]), frac(c[1])],
            exact: None,
        }
    }

    pub fn new(x: f64, y: f64) -> Self {
        Self::from_coords([x, y])
    }

    pub fn from_exact(q: QuadPoint) -> Self {
        Self {
            coords: q.to_f64(),
            exact: Some(Arc::new(q)),
        }
    }

    /// Exact rational point `(x.0/x.1, y.0/y.1)` mod 1.
    pub fn rational(x: (i64, i64), y: (i64, i64)) -> Result<Self> {
        if x.1 == 0 || y.1 == 0 {
            return Err(Error::Input("zero denominator in torus point".into()));
        }
        Ok(Self::from_exact(QuadPoint::rational(
            BigRational::new(x.0.into(), x.1.into()),
            BigRational::new(y.0.into(), y.1.into()),
        )))
    }

    pub fn origin() -> Self {
        Self::rational((0, 1), (0, 1)).expect("nonzero denominators")
    }

    pub fn coords(&self) -> [f64; 2] {
        self.coords
    }

    pub fn exact(&self) -> Option<&QuadPoint> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub(crate) fn exact_in(&self, d: i64) -> Option<QuadPoint> {
        self.exact.as_ref().and_then(|q| q.in_field(d))
    }

    /// Drops the exact form.
    pub fn to_float(&self) -> Self {
        Self {
            coords: self.coords,
            exact: None,
        }
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a.same_value(b),
            _ => self.coords == other.coords,
        }
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => write!(f, "TorusPoint({:?} ≈ {:?})", q, self.coords),
            None => write!(f, "TorusPoint({:?})", self.coords),
        }
    }
}

fn coord_json(e: &QuadElem) -> Value {
    if e.is_rational() {
        let r = e.rational_part();
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            return json!([n, d]);
        }
    }
    json!({
        "a": format_rational(e.rational_part()),
        "b": format_rational(e.sqrt_coeff()),
        "d": if e.is_rational() { RATIONAL_FIELD } else { e.radicand() },
    })
}

enum Coord {
    Float(f64),
    Exact(QuadElem),
}

fn parse_coord(v: &Value) -> Result<Coord> {
    let bad = || Error::Input(format!("unrecognised torus coordinate {v}"));
    match v {
        Value::String(s) => {
            if s.contains('/') {
                let r = parse_rational(s)?;
                Ok(Coord::Exact(QuadElem::raw(r, BigRational::zero(), RATIONAL_FIELD)))
            } else {
                s.trim().parse::<f64>().map(Coord::Float).map_err(|_| bad())
            }
        }
        Value::Number(n) => n.as_f64().map(Coord::Float).ok_or_else(bad),
        Value::Array(a) if a.len() == 2 => {
            let n = a[0].as_i64().ok_or_else(bad)?;
            let d = a[1].as_i64().ok_or_else(bad)?;
            if d == 0 {
                return Err(Error::Input("zero denominator in torus point".into()));
            }
            let r = BigRational::new(BigInt::from(n), BigInt::from(d));
            Ok(Coord::Exact(QuadElem::raw(r, BigRational::zero(), RATIONAL_FIELD)))
        }
        Value::Object(o) => {
            let field = |k: &str| -> Result<BigRational> {
                match o.get(k) {
                    Some(Value::String(s)) => parse_rational(s),
                    Some(Value::Number(n)) => n
                        .as_i64()
                        .map(|i| BigRational::from_integer(i.into()))
                        .ok_or_else(bad),
                    None if k == "b" => Ok(BigRational::zero()),
                    _ => Err(bad()),
                }
            };
            let a = field("a")?;
            let b = field("b")?;
            let d = o.get("d").and_then(Value::as_i64).unwrap_or(RATIONAL_FIELD);
            if b.is_zero() {
                Ok(Coord::Exact(QuadElem::raw(a, b, RATIONAL_FIELD)))
            } else {
                Ok(Coord::Exact(QuadElem::new(a, b, d)?))
            }
        }
        _ => Err(bad()),
    }
}

fn unify(x: QuadElem, y: QuadElem) -> Option<QuadPoint> {
    let d = match (x.is_rational(), y.is_rational()) {
        (true, true) => RATIONAL_FIELD,
        (false, true) => x.radicand(),
        (true, false) => y.radicand(),
        (false, false) if x.radicand() == y.radicand() => x.radicand(),
        _ => return None,
    };
    let re = |e: QuadElem| {
        if e.is_rational() {
            QuadElem::raw(e.rational_part().clone(), BigRational::zero(), d)
        } else {
            e
        }
    };
    Some(QuadPoint::new(re(x), re(y)))
}

impl TryFrom<&Value> for TorusPoint {
    type Error = Error;

    fn try_from(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Input(format!("torus point must be a 2-element array, got {v}")))?;
        let x = parse_coord(&arr[0])?;
        let y = parse_coord(&arr[1])?;
        Ok(match (x, y) {
            (Coord::Exact(x), Coord::Exact(y)) => match unify(x, y) {
                Some(q) => TorusPoint::from_exact(q),
                None => return Err(Error::Input("torus coordinates from different fields".into())),
            },
            (x, y) => {
                let f = |c: Coord| match c {
                    Coord::Float(v) => v,
                    Coord::Exact(e) => e.to_f64(),
                };
                TorusPoint::from_coords([f(x), f(y)])
            }
        })
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = match &self.exact {
            Some(q) => json!([coord_json(q.x()), coord_json(q.y())]),
            None => json!([format!("{:?}", self.coords[0]), format!("{:?}", self.coords[1])]),
        };
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        TorusPoint::try_from(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_wraps() {
        assert!((torus_distance([0.05, 0.5], [0.95, 0.5]) - 0.1).abs() < 1e-15);
        assert_eq!(torus_distance([0.25, 0.0], [0.25, 0.0]), 0.0);
        assert!((torus_distance([0.0, 0.0], [0.5, 0.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frac_handles_negative_and_tiny() {
        assert_eq!(frac(-1e-20), 0.0);
        assert!((frac(-0.25) - 0.75).abs() < 1e-15);
        assert_eq!(frac(3.0), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let p = TorusPoint::new(0.125, 0.7);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<TorusPoint>(&s).unwrap(), p);

        let r = TorusPoint::rational((-1, 3), (5, 2)).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "[[2,3],[1,2]]");
        let back: TorusPoint = serde_json::from_str(&s).unwrap();
        assert!(back.is_exact());
        assert_eq!(back, r);

        let half_sqrt5 = QuadElem::new(BigRational::zero(), BigRational::new(1.into(), 4.into()), 5).unwrap();
        let q = TorusPoint::from_exact(QuadPoint::new(half_sqrt5, QuadElem::from_ratio(1, 3, 5)));
        let s = serde_json::to_string(&q).unwrap();
        let back: TorusPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        assert_eq!(back.exact().unwrap().radicand(), 5);
    }

    #[test]
    fn mixed_input_falls_back_to_float() {
        let v: Value = serde_json::from_str(r#"["0.5", [1, 4]]"#).unwrap();
        let p = TorusPoint::try_from(&v).unwrap();
        assert!(!p.is_exact());
        assert_eq!(p.coords(), [0.5, 0.25]);
    }
}
