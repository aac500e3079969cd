//! Hyperbolic automorphisms of the 2-torus.
//!
//! Eigenvalues, eigenvectors and homoclinic points live in the real quadratic
//! field `ℚ(√D)`, `D = tr² − 4·det`. Points may carry that exact form next to
//! their `f64` coordinates; maps applied to exact points stay exact, which is
//! what keeps long two-sided homoclinic orbits trustworthy.

mod homoclinic;
mod point;
mod solver;

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use homoclinic::homoclinic_point_toral;
pub use point::{torus_distance, QuadPoint, TorusPoint};
pub use solver::{shadow_toral, shadow_toral_exact, shadow_toral_float, ToralShadow, EXACT_WINDOW_LIMIT};

use crate::dynamics::{expansive_separation, MetricSystem, PseudoOrbit, Separation, Shadow, Shadowing};
use crate::error::{Error, Result};
use crate::quadratic::QuadElem;

/// Per-step tolerance for iterated floating-point orbits.
pub const TORAL_STEP_TOL: f64 = 1e-12;

/// A hyperbolic toral automorphism `p ↦ M p mod 1` with its eigen-splitting.
#[derive(Debug, Clone)]
pub struct ToralMap {
    name: String,
    matrix: [[i64; 2]; 2],
    det: i64,
    disc: i64,
    lambda_u: QuadElem,
    lambda_s: QuadElem,
    v_u: [QuadElem; 2],
    v_s: [QuadElem; 2],
    /// Rows of the inverse eigenbasis: `e = c_u v_u + c_s v_s`.
    coeff: [[QuadElem; 2]; 2],
    lu: f64,
    ls: f64,
    vu_f: [f64; 2],
    vs_f: [f64; 2],
    coeff_f: [[f64; 2]; 2],
    kappa: f64,
    shadowing_constant: f64,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    matrix: [[i64; 2]; 2],
    name: String,
}

impl Serialize for ToralMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapJson {
            matrix: self.matrix,
            name: self.name.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ToralMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MapJson::deserialize(d)?;
        ToralMap::new(j.name, j.matrix).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for ToralMap {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.matrix == other.matrix
    }
}

fn half(k: i64) -> BigRational {
    BigRational::new(k.into(), 2.into())
}

impl ToralMap {
    /// Fails unless `det = ±1` and no eigenvalue has modulus 1.
    pub fn new(name: impl Into<String>, matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(Error::Construction(format!("determinant {det} is not ±1")));
        }
        let tr = a + d;
        let hyperbolic = if det == 1 { tr.abs() > 2 } else { tr != 0 };
        if !hyperbolic {
            return Err(Error::Construction(format!(
                "matrix {matrix:?} is not hyperbolic (trace {tr}, det {det})"
            )));
        }
        let disc = tr * tr - 4 * det;
        let sgn = if tr > 0 { 1 } else { -1 };
        let lambda_u = QuadElem::new(half(tr), half(sgn), disc)?;
        let lambda_s = QuadElem::new(half(tr), half(-sgn), disc)?;
        // b ≠ 0 for hyperbolic maps (otherwise the eigenvalues are a, d ∈ {±1}).
        let eigvec = |l: &QuadElem| [QuadElem::from_int(b, disc), l.sub(&QuadElem::from_int(a, disc))];
        let v_u = eigvec(&lambda_u);
        let v_s = eigvec(&lambda_s);
        let det_v = v_u[0].mul(&v_s[1]).sub(&v_s[0].mul(&v_u[1]));
        let inv_det = det_v.inv()?;
        let coeff = [
            [v_s[1].mul(&inv_det), v_s[0].neg().mul(&inv_det)],
            [v_u[1].neg().mul(&inv_det), v_u[0].mul(&inv_det)],
        ];

        let lu = lambda_u.to_f64();
        let ls = lambda_s.to_f64();
        let vu_f = [v_u[0].to_f64(), v_u[1].to_f64()];
        let vs_f = [v_s[0].to_f64(), v_s[1].to_f64()];
        let coeff_f = [
            [coeff[0][0].to_f64(), coeff[0][1].to_f64()],
            [coeff[1][0].to_f64(), coeff[1][1].to_f64()],
        ];

        // Condition factor of the eigenbasis with columns scaled to unit sup-norm.
        let nu = vu_f[0].abs().max(vu_f[1].abs());
        let ns = vs_f[0].abs().max(vs_f[1].abs());
        let vn = [[vu_f[0] / nu, vs_f[0] / ns], [vu_f[1] / nu, vs_f[1] / ns]];
        let dn = vn[0][0] * vn[1][1] - vn[0][1] * vn[1][0];
        let vn_inv = [[vn[1][1] / dn, -vn[0][1] / dn], [-vn[1][0] / dn, vn[0][0] / dn]];
        let kappa = row_sum_norm(&vn) * row_sum_norm(&vn_inv);
        let shadowing_constant = kappa * (lu.abs() + 1.0) / (lu.abs() - 1.0);

        Ok(Self {
            name: name.into(),
            matrix,
            det,
            disc,
            lambda_u,
            lambda_s,
            v_u,
            v_s,
            coeff,
            lu,
            ls,
            vu_f,
            vs_f,
            coeff_f,
            kappa,
            shadowing_constant,
        })
    }

    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub fn cat() -> Self {
        Self::new("cat", [[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn inverse_matrix(&self) -> [[i64; 2]; 2] {
        let [[a, b], [c, d]] = self.matrix;
        let s = self.det;
        [[s * d, -s * b], [-s * c, s * a]]
    }

    pub fn determinant(&self) -> i64 {
        self.det
    }

    /// Radicand `D` of the eigenvalue field.
    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn lambda_u(&self) -> &QuadElem {
        &self.lambda_u
    }

    pub fn lambda_s(&self) -> &QuadElem {
        &self.lambda_s
    }

    pub fn v_u(&self) -> &[QuadElem; 2] {
        &self.v_u
    }

    pub fn v_s(&self) -> &[QuadElem; 2] {
        &self.v_s
    }

    pub fn lambda_u_f64(&self) -> f64 {
        self.lu
    }

    pub fn lambda_s_f64(&self) -> f64 {
        self.ls
    }

    pub fn v_u_f64(&self) -> [f64; 2] {
        self.vu_f
    }

    pub fn v_s_f64(&self) -> [f64; 2] {
        self.vs_f
    }

    /// Sup-norm condition factor of the (column-normalized) eigenbasis.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `C = κ (|λ_u| + 1)/(|λ_u| − 1)`: a δ-pseudo-orbit is `Cδ`-shadowed.
    pub fn shadowing_constant(&self) -> f64 {
        self.shadowing_constant
    }

    /// Row-sum norm `‖M‖_∞`, the Lipschitz constant for the sup-norm metric.
    pub fn operator_norm(&self) -> f64 {
        row_sum_norm(&self.matrix.map(|r| r.map(|v| v as f64)))
    }

    /// Largest δ accepted by the shadowing solver: `C δ < 1/4`.
    pub fn max_shadow_delta(&self) -> f64 {
        0.25 / self.shadowing_constant
    }

    /// Exact eigen-identity residuals `M v − λ v` (all zero).
    pub fn eigen_residuals(&self) -> [[QuadElem; 2]; 2] {
        let apply = |v: &[QuadElem; 2]| -> [QuadElem; 2] {
            let [[a, b], [c, d]] = self.matrix;
            [
                v[0].scale(a).add(&v[1].scale(b)),
                v[0].scale(c).add(&v[1].scale(d)),
            ]
        };
        let ru = apply(&self.v_u);
        let rs = apply(&self.v_s);
        [
            [ru[0].sub(&self.lambda_u.mul(&self.v_u[0])), ru[1].sub(&self.lambda_u.mul(&self.v_u[1]))],
            [rs[0].sub(&self.lambda_s.mul(&self.v_s[0])), rs[1].sub(&self.lambda_s.mul(&self.v_s[1]))],
        ]
    }

    pub(crate) fn coeff_exact(&self) -> &[[QuadElem; 2]; 2] {
        &self.coeff
    }

    pub(crate) fn coeff_f64(&self) -> [[f64; 2]; 2] {
        self.coeff_f
    }

    fn apply_f64(m: [[i64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
        [
            point::frac(m[0][0] as f64 * p[0] + m[0][1] as f64 * p[1]),
            point::frac(m[1][0] as f64 * p[0] + m[1][1] as f64 * p[1]),
        ]
    }

    fn apply_exact(&self, m: [[i64; 2]; 2], q: &QuadPoint) -> QuadPoint {
        QuadPoint::new(
            q.x().scale(m[0][0]).add(&q.y().scale(m[0][1])),
            q.x().scale(m[1][0]).add(&q.y().scale(m[1][1])),
        )
    }

    fn apply(&self, m: [[i64; 2]; 2], p: &TorusPoint) -> TorusPoint {
        match p.exact_in(self.disc) {
            Some(q) => TorusPoint::from_exact(self.apply_exact(m, &q)),
            None => TorusPoint::from_coords(Self::apply_f64(m, p.coords())),
        }
    }

    /// `M p mod 1`.
    pub fn apply_toral(&self, p: &TorusPoint) -> TorusPoint {
        self.apply(self.matrix, p)
    }

    /// `M⁻¹ p mod 1`.
    pub fn apply_toral_inverse(&self, p: &TorusPoint) -> TorusPoint {
        self.apply(self.inverse_matrix(), p)
    }

    /// `M p mod 1` in plain floating point, ignoring any exact form.
    pub fn apply_float(&self, p: [f64; 2]) -> [f64; 2] {
        Self::apply_f64(self.matrix, p)
    }

    /// A random `δ`-pseudo-orbit on `[0, len)`: `w_{i+1} = A w_i + u_i` with
    /// `u_i` uniform in the sup-norm ball of radius `δ`.
    pub fn random_pseudo_orbit<R: Rng + ?Sized>(&self, rng: &mut R, len: usize, delta: f64) -> Result<PseudoOrbit<TorusPoint>> {
        if len == 0 || !(delta >= 0.0) {
            return Err(Error::Parameter("need a positive length and δ ≥ 0".into()));
        }
        // Keeps the recomputed defect at or below δ after rounding.
        let r = delta * (1.0 - 1e-9);
        let mut pts = vec![TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>())];
        for _ in 1..len {
            let img = self.apply_float(pts.last().expect("nonempty").coords());
            let u = if r > 0.0 {
                [rng.gen_range(-r..=r), rng.gen_range(-r..=r)]
            } else {
                [0.0, 0.0]
            };
            pts.push(TorusPoint::new(img[0] + u[0], img[1] + u[1]));
        }
        Ok(PseudoOrbit::new(self.name.clone(), 0, pts, delta))
    }

    pub fn expansive_constant_toral(&self) -> f64 {
        // For sup-distance ≤ e the lifted differences obey Δ_{i+1} = MΔ_i, and a
        // bounded linear orbit of a hyperbolic matrix is zero.
        1.0 / (2.0 * self.operator_norm() + 2.0)
    }
}

/// Two-sided separation test for the toral map; `separated` is true iff
/// `max_{|i|≤n} d(fⁱp, fⁱq) > e`, with the first witnessing index.
pub fn expansive_separation_toral(map: &ToralMap, p: &TorusPoint, q: &TorusPoint, e: f64, n: u64) -> Separation {
    expansive_separation(map, p, q, e, n)
}

fn row_sum_norm(m: &[[f64; 2]; 2]) -> f64 {
    m.iter().map(|r| r[0].abs() + r[1].abs()).fold(0.0, f64::max)
}

impl MetricSystem for ToralMap {
    type Point = TorusPoint;

    fn system_id(&self) -> &str {
        &self.name
    }

    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        self.apply_toral(p)
    }

    fn backward(&self, p: &TorusPoint) -> TorusPoint {
        self.apply_toral_inverse(p)
    }

    fn distance(&self, p: &TorusPoint, q: &TorusPoint) -> f64 {
        torus_distance(p.coords(), q.coords())
    }

    fn diameter_bound(&self) -> f64 {
        0.5
    }

    fn expansive_constant(&self) -> Option<f64> {
        Some(self.expansive_constant_toral())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.operator_norm()
    }

    fn step_tolerance(&self) -> f64 {
        TORAL_STEP_TOL
    }
}

impl Shadowing for ToralMap {
    fn shadowing_delta(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("ε must be positive, got {epsilon}")));
        }
        let delta = (epsilon / self.shadowing_constant).min(self.max_shadow_delta() * 0.999);
        Ok(delta)
    }

    fn admissible_epsilon(&self, epsilon: f64) -> f64 {
        epsilon
    }

    fn shadow(&self, po: &PseudoOrbit<TorusPoint>) -> Result<Shadow<TorusPoint>> {
        let sh = shadow_toral(self, po)?;
        Ok(Shadow {
            base: sh.base,
            i_min: sh.i_min,
            orbit: sh.orbit,
            certified_epsilon: sh.certified_epsilon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_map_eigendata_is_exact() {
        let m = ToralMap::cat();
        for row in m.eigen_residuals() {
            for r in row {
                assert!(r.is_zero());
            }
        }
        assert_eq!(m.lambda_u().mul(m.lambda_s()), QuadElem::from_int(1, 5));
        assert!(m.lambda_u_f64() > 1.0 && m.lambda_s_f64().abs() < 1.0);
        assert!((m.lambda_u_f64() - 2.618_033_988_749_895).abs() < 1e-15);
        // (λ_u + 1)/(λ_u − 1) = √5 for the cat map.
        assert!((m.shadowing_constant() - m.kappa() * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hyperbolic() {
        assert!(ToralMap::new("rot", [[0, -1], [1, 0]]).is_err());
        assert!(ToralMap::new("shear", [[1, 1], [0, 1]]).is_err());
        assert!(ToralMap::new("big", [[2, 0], [0, 1]]).is_err());
        assert!(ToralMap::new("flip", [[1, 1], [1, 0]]).is_ok());
    }

    #[test]
    fn apply_examples() {
        let m = ToralMap::cat();
        let z = TorusPoint::from_coords([0.0, 0.0]);
        assert_eq!(m.apply_toral(&z), z);
        let p = TorusPoint::from_coords([0.2, 0.3]);
        let q = m.apply_toral(&p);
        assert!(torus_distance(q.coords(), [0.7, 0.5]) < 1e-15);
        let back = m.apply_toral_inverse(&q);
        assert!(torus_distance(back.coords(), p.coords()) < 1e-12);
    }

    #[test]
    fn separation_examples() {
        let m = ToralMap::cat();
        let p = TorusPoint::new(0.3, 0.6);
        assert!(!expansive_separation_toral(&m, &p, &p, 0.25, 40).separated);
        let q = TorusPoint::new(0.3 + 1e-6, 0.6);
        let s = expansive_separation_toral(&m, &p, &q, 0.25, 40);
        assert!(s.separated);
        let i = s.index.unwrap();
        assert!(i.abs() <= 15, "{i}");
        // Offset along the stable direction only separates backward.
        let vs = m.v_s_f64();
        let r = TorusPoint::new(0.3 + 1e-6 * vs[0], 0.6 + 1e-6 * vs[1]);
        let s = expansive_separation_toral(&m, &p, &r, 0.25, 40);
        assert!(s.separated && s.index.unwrap() < 0);
    }

    #[test]
    fn exact_rational_orbit() {
        let m = ToralMap::cat();
        let p = TorusPoint::rational((1, 5), (3, 10)).unwrap();
        let q = m.apply_toral(&p);
        assert_eq!(q, TorusPoint::rational((7, 10), (1, 2)).unwrap());
        assert_eq!(m.apply_toral_inverse(&q), p);
    }
}
