//! System-agnostic contracts: homeomorphisms of compact metric spaces, orbits,
//! pseudo-orbits, δ-chains and the plateau test function used by the Bohr
//! certificate.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A homeomorphism `f` of a compact metric space `(X, d)`.
pub trait MetricSystem: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;

    fn system_id(&self) -> &str;

    /// `f(p)`.
    fn forward(&self, p: &Self::Point) -> Self::Point;

    /// `f⁻¹(p)`.
    fn backward(&self, p: &Self::Point) -> Self::Point;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> f64;

    /// Upper bound for `d(p, q)` over the whole space.
    fn diameter_bound(&self) -> f64;

    /// Expansive constant `e`, if the system is expansive.
    fn expansive_constant(&self) -> Option<f64>;

    /// Bound `L` with `d(f p, f q) ≤ L·d(p, q)`.
    fn lipschitz_bound(&self) -> f64;

    /// Slack tolerated when a computed image is compared with a stored point.
    /// Zero for systems with exact arithmetic.
    fn step_tolerance(&self) -> f64 {
        0.0
    }

    /// `fⁿ(p)` for any integer `n`.
    fn iterate(&self, p: &Self::Point, n: i64) -> Self::Point {
        let mut q = p.clone();
        if n >= 0 {
            for _ in 0..n {
                q = self.forward(&q);
            }
        } else {
            for _ in 0..(-n) {
                q = self.backward(&q);
            }
        }
        q
    }
}

/// A finite window `(x_i)_{i_min ≤ i ≤ i_max}` of a pseudo-orbit together with
/// its claimed defect bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbit<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    pub i_min: i64,
    pub points: Vec<P>,
    pub delta: f64,
}

impl<P: Clone> PseudoOrbit<P> {
    pub fn new(system_id: impl Into<String>, i_min: i64, points: Vec<P>, delta: f64) -> Self {
        Self {
            system_id: system_id.into(),
            i_min,
            points,
            delta,
        }
    }

    pub fn i_max(&self) -> i64 {
        self.i_min + self.points.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point at orbit index `i`, if `i` lies in the window.
    pub fn get(&self, i: i64) -> Option<&P> {
        if i < self.i_min {
            return None;
        }
        self.points.get((i - self.i_min) as usize)
    }

    /// Consecutive defects `d(f(x_i), x_{i+1})`, in index order.
    pub fn defects<S: MetricSystem<Point = P>>(&self, sys: &S) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| sys.distance(&sys.forward(&w[0]), &w[1]))
            .collect()
    }

    pub fn max_defect<S: MetricSystem<Point = P>>(&self, sys: &S) -> f64 {
        self.defects(sys).into_iter().fold(0.0, f64::max)
    }
}

/// A δ-chain `(x_0, …, x_k)`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    pub points: Vec<P>,
    pub delta: f64,
}

impl<P: Clone + PartialEq> Chain<P> {
    pub fn new(system_id: impl Into<String>, points: Vec<P>, delta: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("a chain needs at least two points".into()));
        }
        Ok(Self {
            system_id: system_id.into(),
            points,
            delta,
        })
    }

    /// Number of steps `k`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn first(&self) -> &P {
        &self.points[0]
    }

    pub fn last(&self) -> &P {
        &self.points[self.points.len() - 1]
    }

    pub fn max_defect<S: MetricSystem<Point = P>>(&self, sys: &S) -> f64 {
        self.points
            .windows(2)
            .map(|w| sys.distance(&sys.forward(&w[0]), &w[1]))
            .fold(0.0, f64::max)
    }

    /// Checks `d(f(x_i), x_{i+1}) ≤ δ` for every step.
    pub fn is_valid<S: MetricSystem<Point = P>>(&self, sys: &S) -> bool {
        self.system_id == sys.system_id() && self.max_defect(sys) <= self.delta + sys.step_tolerance()
    }

    /// Concatenates a chain ending at `w` with one starting at `w`; the result
    /// is a `max(δ₁, δ₂)`-chain.
    pub fn concat(&self, other: &Chain<P>) -> Result<Chain<P>> {
        if self.last() != other.first() {
            return Err(Error::Domain(
                "chains can only be joined at a shared point".into(),
            ));
        }
        let mut points = self.points.clone();
        points.extend(other.points[1..].iter().cloned());
        Chain::new(self.system_id.clone(), points, self.delta.max(other.delta))
    }
}

/// Returns `true` iff every consecutive defect of `po` is at most `po.delta`.
pub fn is_pseudo_orbit<S: MetricSystem>(sys: &S, po: &PseudoOrbit<S::Point>) -> Result<bool> {
    if po.system_id != sys.system_id() {
        return Err(Error::Config(format!(
            "pseudo-orbit belongs to system '{}', not '{}'",
            po.system_id,
            sys.system_id()
        )));
    }
    let slack = sys.step_tolerance();
    Ok(po
        .points
        .windows(2)
        .all(|w| sys.distance(&sys.forward(&w[0]), &w[1]) <= po.delta + slack))
}

/// Returns `true` iff `d(x_i, fⁱ(p)) ≤ ε` on the whole window, iterating
/// forward and backward from index 0.
pub fn is_shadowed_by<S: MetricSystem>(
    sys: &S,
    po: &PseudoOrbit<S::Point>,
    p: &S::Point,
    epsilon: f64,
) -> bool {
    let slack = sys.step_tolerance();
    let check = |i: i64, q: &S::Point| match po.get(i) {
        Some(x) => sys.distance(x, q) <= epsilon + slack,
        None => true,
    };
    // Forward half: indices max(0, i_min)..=i_max.
    let start = po.i_min.max(0);
    if start <= po.i_max() {
        let mut q = sys.iterate(p, start);
        for i in start..=po.i_max() {
            if !check(i, &q) {
                return false;
            }
            if i < po.i_max() {
                q = sys.forward(&q);
            }
        }
    }
    // Backward half: indices i_min..=min(i_max, -1).
    if po.i_min < 0 {
        let mut q = p.clone();
        for i in (po.i_min..0).rev() {
            q = sys.backward(&q);
            if !check(i, &q) {
                return false;
            }
        }
    }
    true
}

/// Like [`is_shadowed_by`], but compares against an already computed orbit
/// window `orbit[i - i_min] = fⁱ(p)`.
pub fn is_shadowed_by_orbit<S: MetricSystem>(
    sys: &S,
    po: &PseudoOrbit<S::Point>,
    orbit: &[S::Point],
    orbit_i_min: i64,
    epsilon: f64,
) -> bool {
    let slack = sys.step_tolerance();
    (po.i_min..=po.i_max()).all(|i| {
        let k = i - orbit_i_min;
        k >= 0
            && (k as usize) < orbit.len()
            && sys.distance(po.get(i).expect("index in window"), &orbit[k as usize]) <= epsilon + slack
    })
}

/// The true orbit window `(fⁱ(p))_{i_min ≤ i ≤ i_max}` as a pseudo-orbit.
///
/// The recorded `delta` is 0 for exact systems and the largest observed
/// round-off defect otherwise.
pub fn orbit_window<S: MetricSystem>(
    sys: &S,
    p: &S::Point,
    i_min: i64,
    i_max: i64,
) -> Result<PseudoOrbit<S::Point>> {
    if !(i_min <= 0 && 0 <= i_max) {
        return Err(Error::Domain(format!(
            "orbit window [{i_min}, {i_max}] must contain 0"
        )));
    }
    let mut back = Vec::with_capacity((-i_min) as usize);
    let mut q = p.clone();
    for _ in i_min..0 {
        q = sys.backward(&q);
        back.push(q.clone());
    }
    back.reverse();
    let mut points = back;
    let mut q = p.clone();
    points.push(q.clone());
    for _ in 0..i_max {
        q = sys.forward(&q);
        points.push(q.clone());
    }
    let mut po = PseudoOrbit::new(sys.system_id(), i_min, points, 0.0);
    if sys.step_tolerance() > 0.0 {
        po.delta = po.max_defect(sys);
    }
    Ok(po)
}

/// Outcome of a two-sided expansiveness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub separated: bool,
    /// First `i` (ordered 0, 1, −1, 2, −2, …) with `d(fⁱp, fⁱq) > e`.
    pub index: Option<i64>,
    pub max_distance: f64,
}

/// Scans `|i| ≤ n` for a time at which the orbits of `p` and `q` are more
/// than `e` apart.
pub fn expansive_separation<S: MetricSystem>(sys: &S, p: &S::Point, q: &S::Point, e: f64, n: u64) -> Separation {
    let mut fp = p.clone();
    let mut fq = q.clone();
    let mut bp = p.clone();
    let mut bq = q.clone();
    let mut max_distance = sys.distance(p, q);
    if max_distance > e {
        return Separation {
            separated: true,
            index: Some(0),
            max_distance,
        };
    }
    for i in 1..=n as i64 {
        fp = sys.forward(&fp);
        fq = sys.forward(&fq);
        let d = sys.distance(&fp, &fq);
        max_distance = max_distance.max(d);
        if d > e {
            return Separation {
                separated: true,
                index: Some(i),
                max_distance,
            };
        }
        bp = sys.backward(&bp);
        bq = sys.backward(&bq);
        let d = sys.distance(&bp, &bq);
        max_distance = max_distance.max(d);
        if d > e {
            return Separation {
                separated: true,
                index: Some(-i),
                max_distance,
            };
        }
    }
    Separation {
        separated: false,
        index: None,
        max_distance,
    }
}

/// Radial plateau profile: 1 on `[0, ε]`, linear on `(ε, 2ε)`, 0 from `2ε` on.
pub fn bump(t: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("bump width must be positive, got {epsilon}")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("bump argument must be nonnegative, got {t}")));
    }
    Ok(if t <= epsilon {
        1.0
    } else if t >= 2.0 * epsilon {
        0.0
    } else {
        (2.0 * epsilon - t) / epsilon
    })
}

/// Centers and width of the test function `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunctionSpec<P> {
    pub center_x: P,
    pub center_y: P,
    pub epsilon: f64,
}

impl<P: Clone> BumpFunctionSpec<P> {
    /// Requires `d(x, y) ≥ 3ε` so the two plateaus are far apart.
    pub fn new<S: MetricSystem<Point = P>>(sys: &S, center_x: P, center_y: P, epsilon: f64) -> Result<Self> {
        let spec = Self {
            center_x,
            center_y,
            epsilon,
        };
        spec.validate(sys)?;
        Ok(spec)
    }

    pub fn validate<S: MetricSystem<Point = P>>(&self, sys: &S) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Construction("φ needs a positive ε".into()));
        }
        let d = sys.distance(&self.center_x, &self.center_y);
        if d < 3.0 * self.epsilon {
            return Err(Error::Construction(format!(
                "φ centers are {d} apart, need at least 3ε = {}",
                3.0 * self.epsilon
            )));
        }
        Ok(())
    }
}

/// `φ(q) = bump(d(q, x)) − bump(d(q, y))`: 1 on `B_ε(x)`, −1 on `B_ε(y)`, 0 away
/// from both `2ε`-balls.
pub fn phi<S: MetricSystem>(sys: &S, q: &S::Point, spec: &BumpFunctionSpec<S::Point>) -> Result<f64> {
    spec.validate(sys)?;
    Ok(phi_unchecked(sys, q, spec))
}

/// [`phi`] without re-validating the spec; for hot loops over a validated spec.
pub fn phi_unchecked<S: MetricSystem>(sys: &S, q: &S::Point, spec: &BumpFunctionSpec<S::Point>) -> f64 {
    let bx = bump(sys.distance(q, &spec.center_x), spec.epsilon).unwrap_or(0.0);
    let by = bump(sys.distance(q, &spec.center_y), spec.epsilon).unwrap_or(0.0);
    bx - by
}

/// Output of a shadowing construction: a true orbit window `orbit[i - i_min] =
/// fⁱ(base)` within `certified_epsilon` of the input pseudo-orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Shadow<P> {
    pub base: P,
    pub i_min: i64,
    pub orbit: Vec<P>,
    pub certified_epsilon: f64,
}

/// Systems with a constructive shadowing property.
pub trait Shadowing: MetricSystem {
    /// A δ such that every δ-pseudo-orbit is ε-shadowed.
    fn shadowing_delta(&self, epsilon: f64) -> Result<f64>;

    /// Rounds ε down to the grid on which the system works (dyadic for shifts).
    fn admissible_epsilon(&self, epsilon: f64) -> f64;

    /// Shadows a finite pseudo-orbit, extended by true orbits beyond the window.
    fn shadow(&self, po: &PseudoOrbit<Self::Point>) -> Result<Shadow<Self::Point>>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_cases() {
        let e = 0.25;
        assert_eq!(bump(0.0, e).unwrap(), 1.0);
        assert_eq!(bump(2.0 * e, e).unwrap(), 0.0);
        assert_eq!(bump(1.5 * e, e).unwrap(), 0.5);
        assert_eq!(bump(e, e).unwrap(), 1.0);
        assert!(bump(-1e-3, e).is_err());
        assert!(bump(0.1, 0.0).is_err());
    }

    #[test]
    fn bump_is_nonincreasing() {
        let e = 0.1;
        let mut prev = 1.0;
        for k in 0..400 {
            let v = bump(k as f64 * 0.001, e).unwrap();
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }
}
