use super::point::{QuadPoint, TorusPoint};
use super::ToralMap;
use crate::error::{Error, Result};
use crate::quadratic::QuadElem;

/// Exact point homoclinic to the fixed point `0`.
///
/// Writes the lattice vector `n = α v_u + β v_s`; the point `α v_u mod 1`
/// lies on the unstable line through 0 and, shifted by `−n`, on the stable
/// one, so its orbit tends to 0 in both time directions.
pub fn homoclinic_point_toral(map: &ToralMap, lattice: [i64; 2]) -> Result<TorusPoint> {
    if lattice == [0, 0] {
        return Err(Error::Parameter("lattice vector must be nonzero".into()));
    }
    let c = map.coeff_exact();
    let d = map.discriminant();
    let n = [QuadElem::from_int(lattice[0], d), QuadElem::from_int(lattice[1], d)];
    let alpha = c[0][0].mul(&n[0]).add(&c[0][1].mul(&n[1]));
    let vu = map.v_u();
    Ok(TorusPoint::from_exact(QuadPoint::new(alpha.mul(&vu[0]), alpha.mul(&vu[1]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MetricSystem;

    #[test]
    fn cat_homoclinic_point_converges_both_ways() {
        let map = ToralMap::cat();
        let q = homoclinic_point_toral(&map, [1, 0]).unwrap();
        let c = q.coords();
        assert!((c[0] - 0.723_606_797_749_979).abs() < 1e-12, "{c:?}");
        assert!((c[1] - 0.447_213_595_499_958).abs() < 1e-12, "{c:?}");
        let origin = TorusPoint::origin();
        assert!(map.distance(&q, &origin) > 0.2);
        let fwd = map.iterate(&q, 40);
        let bwd = map.iterate(&q, -40);
        assert!(map.distance(&fwd, &origin) < 1e-15);
        assert!(map.distance(&bwd, &origin) < 1e-15);
    }

    #[test]
    fn other_maps_and_lattice_vectors() {
        let map = ToralMap::new("m31", [[3, 1], [2, 1]]).unwrap();
        for n in [[1, 0], [0, 1], [2, -1]] {
            let q = homoclinic_point_toral(&map, n).unwrap();
            let o = TorusPoint::origin();
            assert!(map.distance(&map.iterate(&q, 30), &o) < 1e-12);
            assert!(map.distance(&map.iterate(&q, -30), &o) < 1e-12);
        }
        assert!(homoclinic_point_toral(&map, [0, 0]).is_err());
    }
}
