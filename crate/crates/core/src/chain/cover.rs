use super::{BoxCover, Cells, Discretized, MAX_BOXES};
use crate::error::{Error, Result};
use crate::symbolic::{dyadic, BiInfSeq, SftSystem};
use crate::toral::{ToralMap, TorusPoint};

/// Largest cylinder cover the symbolic discretization accepts.
pub const MAX_CYLINDERS: usize = 1 << 14;

/// `q` such that `d(u, v) ≤ δ` iff `u`, `v` agree on `[-q, q]`; `None` when
/// `δ ≥ 1` and every pair qualifies.
pub(crate) fn agreement_radius(delta: f64) -> Option<i64> {
    if delta >= 1.0 {
        return None;
    }
    // Smallest j with 2^-j ≤ δ; agreement on [-(j-1), j-1].
    let mut j = 0u64;
    while dyadic(j) > delta {
        j += 1;
        if j > 1074 {
            break;
        }
    }
    Some(j as i64 - 1)
}

fn cylinder_parts(cover: &BoxCover) -> (usize, i64, &[Vec<u8>]) {
    match &cover.cells {
        Cells::Cylinders { depth, first, words, .. } => (*depth, *first, words),
        Cells::Grid { .. } => panic!("symbolic system given a grid cover"),
    }
}

impl Discretized for SftSystem {
    /// `resolution` is the cylinder depth.
    fn build_cover(&self, resolution: f64) -> Result<BoxCover> {
        if resolution.fract() != 0.0 || resolution < 1.0 {
            return Err(Error::Config(format!(
                "symbolic resolution is a cylinder depth ≥ 1, got {resolution}"
            )));
        }
        let depth = resolution as usize;
        let count = self.count_words(depth);
        if count > MAX_CYLINDERS as u128 {
            return Err(Error::Config(format!(
                "depth {depth} needs {count} cylinders, above the limit {MAX_CYLINDERS}"
            )));
        }
        Ok(BoxCover {
            system_id: self.name.clone(),
            resolution,
            cells: Cells::Cylinders {
                depth,
                first: -((depth / 2) as i64),
                alphabet: self.alphabet_size,
                words: self.admissible_words(depth),
            },
        })
    }

    fn box_successors(&self, cover: &BoxCover, i: usize, delta: f64) -> Vec<u32> {
        let (depth, a, words) = cylinder_parts(cover);
        let d = depth as i64;
        let wi = &words[i];
        let q = agreement_radius(delta);
        let in_i = |k: i64| q.is_some_and(|q| -q <= k && k <= q);
        // σu is known on P = [a-1, a+d-2] (from wi), v on Q = [a, a+d-1].
        let su = |k: i64| wi[(k - (a - 1)) as usize];
        (0..words.len())
            .filter(|&j| {
                let wj = &words[j];
                let v = |k: i64| wj[(k - a) as usize];
                if (a..=a + d - 2).any(|k| in_i(k) && su(k) != v(k)) {
                    return false;
                }
                // σu's word on P ∪ (I ∩ Q) and v's word on (I ∩ P) ∪ Q must be
                // admissible; both are intervals, and admissible words extend.
                let mut uw: Vec<u8> = wi.clone();
                if in_i(a + d - 1) {
                    uw.push(v(a + d - 1));
                }
                let mut vw: Vec<u8> = Vec::with_capacity(depth + 1);
                if in_i(a - 1) {
                    vw.push(su(a - 1));
                }
                vw.extend_from_slice(wj);
                self.word_is_admissible(&uw) && self.word_is_admissible(&vw)
            })
            .map(|j| j as u32)
            .collect()
    }

    fn locate(&self, cover: &BoxCover, p: &BiInfSeq) -> Option<usize> {
        let (depth, a, words) = cylinder_parts(cover);
        let w = p.word(a, a + depth as i64 - 1);
        words.binary_search(&w).ok()
    }

    fn representative(&self, cover: &BoxCover, i: usize) -> BiInfSeq {
        let (_, a, words) = cylinder_parts(cover);
        self.point_in_cylinder(&words[i], a)
            .expect("cover words are admissible")
    }
}

fn grid_n(cover: &BoxCover) -> usize {
    match cover.cells {
        Cells::Grid { n } => n,
        Cells::Cylinders { .. } => panic!("toral system given a cylinder cover"),
    }
}

const SAT_TOL: f64 = 1e-12;

fn project(pts: &[[f64; 2]], axis: [f64; 2]) -> (f64, f64) {
    pts.iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Separating-axis test for two convex quadrilaterals, closed and slightly
/// inflated so that touching counts as meeting.
fn convex_overlap(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> bool {
    let mut axes = Vec::with_capacity(8);
    for poly in [a, b] {
        for k in 0..4 {
            let p = poly[k];
            let q = poly[(k + 1) % 4];
            axes.push([p[1] - q[1], q[0] - p[0]]);
        }
    }
    axes.into_iter().all(|ax| {
        let scale = ax[0].abs() + ax[1].abs();
        if scale == 0.0 {
            return true;
        }
        let (alo, ahi) = project(a, ax);
        let (blo, bhi) = project(b, ax);
        let tol = SAT_TOL * scale;
        alo <= bhi + tol && blo <= ahi + tol
    })
}

impl Discretized for ToralMap {
    /// `resolution` is the box side; it is rounded to `1/n`.
    fn build_cover(&self, resolution: f64) -> Result<BoxCover> {
        let inv = 1.0 / resolution;
        let n = if (inv - inv.round()).abs() < 1e-9 {
            inv.round() as usize
        } else {
            inv.ceil() as usize
        };
        if n < 2 {
            return Err(Error::Config(format!(
                "resolution {resolution} is too coarse for a torus cover (need ≤ 1/2)"
            )));
        }
        if n.saturating_mul(n) > MAX_BOXES {
            return Err(Error::Config(format!(
                "resolution {resolution} needs {n}² boxes, above the limit {MAX_BOXES}"
            )));
        }
        Ok(BoxCover {
            system_id: self.name().to_string(),
            resolution: 1.0 / n as f64,
            cells: Cells::Grid { n },
        })
    }

    fn box_successors(&self, cover: &BoxCover, i: usize, delta: f64) -> Vec<u32> {
        let n = grid_n(cover);
        let h = 1.0 / n as f64;
        let (ix, iy) = ((i / n) as f64, (i % n) as f64);
        let m = self.matrix().map(|r| r.map(|v| v as f64));
        let img = |x: f64, y: f64| [m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y];
        let (x0, y0) = (ix * h, iy * h);
        let par = [
            img(x0, y0),
            img(x0 + h, y0),
            img(x0 + h, y0 + h),
            img(x0, y0 + h),
        ];
        let (xlo, xhi) = project(&par, [1.0, 0.0]);
        let (ylo, yhi) = project(&par, [0.0, 1.0]);
        let cell_range = |lo: f64, hi: f64| {
            let a = ((lo - delta) / h - 1e-9).floor() as i64;
            let b = ((hi + delta) / h + 1e-9).floor() as i64;
            a..=b
        };
        let mut out = Vec::new();
        for gx in cell_range(xlo, xhi) {
            for gy in cell_range(ylo, yhi) {
                let (rx, ry) = (gx as f64 * h, gy as f64 * h);
                let rect = [
                    [rx - delta, ry - delta],
                    [rx + h + delta, ry - delta],
                    [rx + h + delta, ry + h + delta],
                    [rx - delta, ry + h + delta],
                ];
                if convex_overlap(&par, &rect) {
                    let jx = gx.rem_euclid(n as i64) as usize;
                    let jy = gy.rem_euclid(n as i64) as usize;
                    out.push((jx * n + jy) as u32);
                }
            }
        }
        out
    }

    fn locate(&self, cover: &BoxCover, p: &TorusPoint) -> Option<usize> {
        let n = grid_n(cover);
        let c = p.coords();
        let ix = ((c[0] * n as f64).floor() as usize).min(n - 1);
        let iy = ((c[1] * n as f64).floor() as usize).min(n - 1);
        Some(ix * n + iy)
    }

    fn representative(&self, cover: &BoxCover, i: usize) -> TorusPoint {
        TorusPoint::from_coords(cover.center(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_matches_metric() {
        assert_eq!(agreement_radius(1.0), None);
        assert_eq!(agreement_radius(0.5), Some(0));
        assert_eq!(agreement_radius(0.3), Some(1));
        assert_eq!(agreement_radius(0.25), Some(1));
        assert_eq!(agreement_radius(1.0 / 16.0), Some(3));
        assert!(agreement_radius(0.0).unwrap() > 1000);
    }

    #[test]
    fn sat_basics() {
        let sq = |x: f64, y: f64, s: f64| [[x, y], [x + s, y], [x + s, y + s], [x, y + s]];
        assert!(convex_overlap(&sq(0.0, 0.0, 1.0), &sq(0.5, 0.5, 1.0)));
        assert!(convex_overlap(&sq(0.0, 0.0, 1.0), &sq(1.0, 0.0, 1.0)));
        assert!(!convex_overlap(&sq(0.0, 0.0, 1.0), &sq(1.1, 0.0, 1.0)));
        let diamond = [[1.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]];
        assert!(!convex_overlap(&diamond, &sq(1.6, 1.6, 1.0)));
        assert!(convex_overlap(&diamond, &sq(1.4, 1.4, 1.0)));
    }
}
