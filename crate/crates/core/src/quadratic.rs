//! Exact arithmetic in a real quadratic field `ℚ(√D)`.
//!
//! Elements are `a + b√D` with arbitrary-precision rational `a`, `b` and a
//! square-free-or-not (but non-square) radicand `D > 0`. Sign, floor and
//! high-precision conversion to `f64` are decided exactly with integer square
//! roots, so reduction modulo 1 of points on the torus never guesses.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    a: BigRational,
    b: BigRational,
    d: i64,
}

fn is_perfect_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i64;
    (r.saturating_sub(1)..=r + 1).any(|s| s >= 0 && s * s == n)
}

/// `⌊x √D⌋` for an integer `x`, exact (`D` non-square, so `x√D` is never an
/// integer unless `x = 0`).
fn floor_times_sqrt(x: &BigInt, d: i64) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let sq = (x * x * BigInt::from(d)).sqrt();
    if x.is_positive() {
        sq
    } else {
        -sq - 1
    }
}

impl QuadElem {
    /// `a + b√D`. Fails if `D` is not a positive non-square.
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Result<Self> {
        if d <= 1 || is_perfect_square(d) {
            return Err(Error::Domain(format!("radicand {d} must be a positive non-square")));
        }
        Ok(Self { a, b, d })
    }

    pub(crate) fn raw(a: BigRational, b: BigRational, d: i64) -> Self {
        Self { a, b, d }
    }

    pub fn from_int(v: i64, d: i64) -> Self {
        Self::raw(BigRational::from_integer(v.into()), BigRational::zero(), d)
    }

    pub fn from_ratio(num: i64, den: i64, d: i64) -> Self {
        Self::raw(BigRational::new(num.into(), den.into()), BigRational::zero(), d)
    }

    pub fn zero(d: i64) -> Self {
        Self::from_int(0, d)
    }

    /// `√D` itself.
    pub fn sqrt_d(d: i64) -> Self {
        Self::raw(BigRational::zero(), BigRational::one(), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt_coeff(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> i64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn same_field(&self, o: &Self) {
        debug_assert_eq!(self.d, o.d, "mixing elements of different quadratic fields");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::raw(&self.a + &o.a, &self.b + &o.b, self.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.same_field(o);
        Self::raw(&self.a - &o.a, &self.b - &o.b, self.d)
    }

    pub fn neg(&self) -> Self {
        Self::raw(-&self.a, -&self.b, self.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_field(o);
        let dd = BigRational::from_integer(self.d.into());
        Self::raw(
            &self.a * &o.a + &self.b * &o.b * dd,
            &self.a * &o.b + &self.b * &o.a,
            self.d,
        )
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = BigRational::from_integer(k.into());
        Self::raw(&self.a * &k, &self.b * &k, self.d)
    }

    /// Galois conjugate `a − b√D`.
    pub fn conj(&self) -> Self {
        Self::raw(self.a.clone(), -&self.b, self.d)
    }

    /// Field norm `a² − D b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("division by zero in quadratic field".into()));
        }
        let n = self.norm();
        let c = self.conj();
        Ok(Self::raw(&c.a / &n, &c.b / &n, self.d))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // Opposite signs: the larger of a² and D b² wins.
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(self.d.into());
                match a2.cmp(&b2d) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn cmp_exact(&self, o: &Self) -> Ordering {
        self.sub(o).signum()
    }

    /// Writes the element as `(A + B√D) / L` with integers and `L > 0`.
    fn common_form(&self) -> (BigInt, BigInt, BigInt) {
        let l = self.a.denom().lcm(self.b.denom());
        let a = self.a.numer() * (&l / self.a.denom());
        let b = self.b.numer() * (&l / self.b.denom());
        (a, b, l)
    }

    /// Exact `⌊a + b√D⌋`.
    pub fn floor(&self) -> BigInt {
        let (a, b, l) = self.common_form();
        let s = floor_times_sqrt(&b, self.d);
        (a + s).div_floor(&l)
    }

    /// `x − ⌊x⌋ ∈ [0, 1)`.
    pub fn frac(&self) -> Self {
        let f = self.floor();
        Self::raw(&self.a - BigRational::from_integer(f), self.b.clone(), self.d)
    }

    /// `x − ⌊x + 1/2⌋ ∈ [−1/2, 1/2)`.
    pub fn centered(&self) -> Self {
        let half = BigRational::new(1.into(), 2.into());
        let f = Self::raw(&self.a + half, self.b.clone(), self.d).floor();
        Self::raw(&self.a - BigRational::from_integer(f), self.b.clone(), self.d)
    }

    /// Conversion to `f64` accurate to about `2⁻⁶⁴` absolute, without the
    /// cancellation a naive `a + b·√D` evaluation suffers for large `b`.
    pub fn to_f64(&self) -> f64 {
        let (a, b, l) = self.common_form();
        let shift = 64usize;
        let s = floor_times_sqrt(&(b << shift), self.d);
        let n = ((a << shift) + s).div_floor(&l);
        // n / 2^64; split to keep precision for large magnitudes.
        let (sign, mag) = (n.sign(), n.magnitude().clone());
        let hi = (&mag >> shift).to_f64().unwrap_or(f64::INFINITY);
        let lo_mask = (num_bigint::BigUint::one() << shift) - 1u32;
        let lo = (&mag & lo_mask).to_f64().unwrap_or(0.0) / 2f64.powi(shift as i32);
        let v = hi + lo;
        if sign == Sign::Minus {
            -v
        } else {
            v
        }
    }

    /// Bit size of the largest numerator or denominator; a growth diagnostic.
    pub fn height_bits(&self) -> u64 {
        [self.a.numer(), self.a.denom(), self.b.numer(), self.b.denom()]
            .iter()
            .map(|x| x.bits())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}√{})", self.a, self.b, self.d)
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Input(format!("bad rational numerator in '{s}'")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Input(format!("bad rational denominator in '{s}'")))?;
    if d.is_zero() {
        return Err(Error::Input(format!("zero denominator in '{s}'")));
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64), d: i64) -> QuadElem {
        QuadElem::new(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
            d,
        )
        .unwrap()
    }

    #[test]
    fn rejects_square_radicand() {
        assert!(QuadElem::new(BigRational::zero(), BigRational::one(), 4).is_err());
        assert!(QuadElem::new(BigRational::zero(), BigRational::one(), 1).is_err());
    }

    #[test]
    fn golden_ratio_identities() {
        // φ = (1 + √5)/2 satisfies φ² = φ + 1.
        let phi = q((1, 2), (1, 2), 5);
        let one = QuadElem::from_int(1, 5);
        assert_eq!(phi.mul(&phi), phi.add(&one));
        assert_eq!(phi.mul(&phi.inv().unwrap()), one);
        assert_eq!(phi.floor(), BigInt::from(1));
        assert!((phi.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn sign_and_floor_with_cancellation() {
        // 1000 − 447√5 = 1000 − 999.5... > 0 ; floor 0
        let x = q((1000, 1), (-447, 1), 5);
        assert_eq!(x.signum(), Ordering::Greater);
        assert_eq!(x.floor(), BigInt::zero());
        let y = x.neg();
        assert_eq!(y.floor(), BigInt::from(-1));
        assert!((x.to_f64() - (1000.0 - 447.0 * 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn frac_and_centered_ranges() {
        let x = q((7, 3), (-5, 2), 5); // 7/3 − 2.5√5 ≈ −3.257
        let f = x.frac().to_f64();
        assert!((0.0..1.0).contains(&f));
        let c = x.centered().to_f64();
        assert!((-0.5..0.5).contains(&c));
        assert!((f - (x.to_f64() - x.to_f64().floor())).abs() < 1e-12);
    }

    #[test]
    fn large_height_conversion_is_accurate() {
        // (φ')^60 is tiny while its coefficients are ~ 2^41.
        let phic = q((1, 2), (-1, 2), 5);
        let mut p = QuadElem::from_int(1, 5);
        for _ in 0..60 {
            p = p.mul(&phic);
        }
        let expected = ((1.0 - 5f64.sqrt()) / 2.0).powi(60);
        assert!((p.to_f64() - expected).abs() < 1e-18);
    }

    #[test]
    fn rational_round_trip() {
        let r = parse_rational("-3/9").unwrap();
        assert_eq!(format_rational(&r), "-1/3");
        assert!(parse_rational("1/0").is_err());
    }
}
