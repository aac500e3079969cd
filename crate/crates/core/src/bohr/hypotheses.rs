use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{grid_epsilon, periodic_orbit, BohrSystem, Theorem1Input};
use crate::dynamics::MetricSystem;
use crate::error::{Error, HypothesisCondition, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: HypothesisCondition,
    pub passed: bool,
    pub justification: String,
}

/// `d(fⁱx, S)` and `d(fⁱy, S)` at one sampled time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub i: i64,
    pub dist_x: f64,
    pub dist_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n_window: u64,
    pub tol: f64,
    pub verdicts: Vec<ConditionVerdict>,
    pub decay: Vec<DecaySample>,
    /// `min_{0 ≤ i ≤ N} d(fⁱx, fⁱy)`.
    pub min_gap_forward: f64,
    /// `min_{-N ≤ i ≤ 0} d(fⁱx, fⁱy)`.
    pub min_gap_backward: f64,
    /// Distance from `x` to the rest of `E = S ∪ O(x) ∪ O(y)`, as far as known.
    pub separation_x: f64,
    pub separation_y: f64,
    /// Grid-rounded third of the smaller separation; 0 if none is admissible.
    pub epsilon: f64,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionVerdict> {
        self.verdicts.iter().find(|v| !v.passed)
    }

    /// The refusal for the first failing condition, if any.
    pub fn refusal(&self) -> Option<Error> {
        self.first_failure()
            .map(|v| Error::hypothesis(v.condition, v.justification.clone()))
    }
}

/// `f^{-N}(p), …, f^N(p)`, indexed by `i + N`.
fn orbit_segment<S: MetricSystem>(sys: &S, p: &S::Point, n: u64) -> Vec<S::Point> {
    let n = n as usize;
    let mut back = Vec::with_capacity(n);
    let mut q = p.clone();
    for _ in 0..n {
        q = sys.backward(&q);
        back.push(q.clone());
    }
    back.reverse();
    back.push(p.clone());
    let mut q = p.clone();
    for _ in 0..n {
        q = sys.forward(&q);
        back.push(q.clone());
    }
    back
}

fn dist_to_set<S: MetricSystem>(sys: &S, p: &S::Point, set: &[S::Point]) -> (f64, usize) {
    set.iter()
        .enumerate()
        .map(|(k, s)| (sys.distance(p, s), k))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Finite-horizon checks of the four hypotheses, plus the separation radius ε.
///
/// Errors only on malformed input (non-invariant `S`, `x = y`, empty window);
/// failed hypotheses are reported as verdicts.
pub fn verify_theorem1_hypotheses<S: BohrSystem>(sys: &S, input: &Theorem1Input<S::Point>) -> Result<HypothesisReport>
where
    S::Point: Serialize + DeserializeOwned,
{
    if input.system_id != sys.system_id() {
        return Err(Error::Config(format!(
            "input is for system '{}', not '{}'",
            input.system_id,
            sys.system_id()
        )));
    }
    if input.n_window == 0 {
        return Err(Error::Parameter("the window N must be positive".into()));
    }
    if !(input.tol > 0.0) {
        return Err(Error::Parameter("the hypothesis tolerance must be positive".into()));
    }
    if sys.same_point(&input.x, &input.y) {
        return Err(Error::Input("x and y coincide".into()));
    }
    let s_orbit = periodic_orbit(sys, &input.s_base, input.s_period)?;
    let n = input.n_window;
    let ni = n as i64;
    let ox = orbit_segment(sys, &input.x, n);
    let oy = orbit_segment(sys, &input.y, n);
    let at = |o: &[S::Point], i: i64| o[(i + ni) as usize].clone();

    // (1) membership in both manifolds of S, outside S.
    let (dx0, _) = dist_to_set(sys, &input.x, &s_orbit);
    let (dy0, _) = dist_to_set(sys, &input.y, &s_orbit);
    let off = sys.step_tolerance();
    let mut decay = Vec::new();
    let mut samples: Vec<i64> = [8, 4, 2, 1].iter().map(|d| ni / d).filter(|&i| i > 0).collect();
    samples.dedup();
    for &i in samples.iter().rev().map(|i| -i).collect::<Vec<_>>().iter().chain(samples.iter()) {
        decay.push(DecaySample {
            i,
            dist_x: dist_to_set(sys, &at(&ox, i), &s_orbit).0,
            dist_y: dist_to_set(sys, &at(&oy, i), &s_orbit).0,
        });
    }
    let ends: Vec<&DecaySample> = decay.iter().filter(|d| d.i.abs() == ni).collect();
    let ends_close = ends.iter().all(|d| d.dist_x <= input.tol && d.dist_y <= input.tol);
    let outside = dx0 > off && dy0 > off;
    let c1 = ConditionVerdict {
        condition: HypothesisCondition::Homoclinic,
        passed: ends_close && outside,
        justification: if !outside {
            format!("x or y lies in S (d(x,S) = {dx0:e}, d(y,S) = {dy0:e})")
        } else if !ends_close {
            format!("orbits are not within tol = {:e} of S at i = ±{n}", input.tol)
        } else {
            format!("d(f^i x, S), d(f^i y, S) ≤ {:e} at i = ±{n}; d(x,S) = {dx0:e}, d(y,S) = {dy0:e}", input.tol)
        },
    };

    // (2) the orbits of x and y come together in both time directions.
    let gap = |i: i64| sys.distance(&at(&ox, i), &at(&oy, i));
    let min_fwd = (0..=ni).map(gap).fold(f64::INFINITY, f64::min);
    let min_bwd = (-ni..=0).map(gap).fold(f64::INFINITY, f64::min);
    let same_limit = [ni, -ni].iter().all(|&i| {
        let (dx, kx) = dist_to_set(sys, &at(&ox, i), &s_orbit);
        let (dy, ky) = dist_to_set(sys, &at(&oy, i), &s_orbit);
        kx == ky && dx <= input.tol && dy <= input.tol
    });
    let c2_ok = min_fwd <= input.tol && min_bwd <= input.tol;
    let c2 = ConditionVerdict {
        condition: HypothesisCondition::Proximal,
        passed: c2_ok,
        justification: if !c2_ok {
            format!("min gaps {min_fwd:e} (forward), {min_bwd:e} (backward) exceed tol")
        } else if same_limit {
            "both orbits converge to the same point of S at i = ±N".into()
        } else {
            format!("direct scan: min gaps {min_fwd:e} (forward), {min_bwd:e} (backward)")
        },
    };

    // (3) and (4) hold by construction for a periodic S and a supported system.
    let c3 = ConditionVerdict {
        condition: HypothesisCondition::ChainTransitive,
        passed: true,
        justification: format!("S is a single periodic orbit of period {}", input.s_period),
    };
    let c4 = ConditionVerdict {
        condition: HypothesisCondition::Shadowing,
        passed: true,
        justification: sys.shadowing_justification(),
    };

    // Separation of x (resp. y) from the rest of E. Orbit points beyond the
    // window sit within tol of S, hence at least d(·, S) - tol away.
    let separation = |p: &S::Point, own: &[S::Point], other: &[S::Point], d_s: f64| -> f64 {
        let mut best = d_s - input.tol;
        for q in own.iter().chain(other.iter()).chain(s_orbit.iter()) {
            if !sys.same_point(p, q) {
                best = best.min(sys.distance(p, q));
            }
        }
        best
    };
    let sep_x = separation(&input.x, &ox, &oy, dx0);
    let sep_y = separation(&input.y, &oy, &ox, dy0);
    let raw = sep_x.min(sep_y) / 3.0;
    let epsilon = if raw > 0.0 { grid_epsilon(sys, raw) } else { 0.0 };

    Ok(HypothesisReport {
        n_window: n,
        tol: input.tol,
        verdicts: vec![c1, c2, c3, c4],
        decay,
        min_gap_forward: min_fwd,
        min_gap_backward: min_bwd,
        separation_x: sep_x,
        separation_y: sep_y,
        epsilon,
    })
}
