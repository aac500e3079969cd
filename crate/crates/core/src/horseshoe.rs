//! The shift on two symbols `{x, y}` embedded in `f^m`: codings become
//! block-concatenated pseudo-orbits, their shadows give the embedding, and the
//! three distinguished codings yield a periodic point with two homoclinic
//! points ready for the Bohr certifier.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bohr::{BohrSystem, SignSequenceSpec, Theorem1Input, DEFAULT_N_WINDOW};
use crate::chain::{homoclinic_proximal_witness, verify_proximal_witness, ProximalSearch, ProximalWitness, DEFAULT_M_MAX};
use crate::dynamics::{is_pseudo_orbit, is_shadowed_by_orbit, MetricSystem, PseudoOrbit, Shadow, Shadowing};
use crate::error::{Error, HypothesisCondition, Result};
use crate::symbolic::{shadow_sft_tailed, BiInfSeq, SftSystem};
use crate::toral::{homoclinic_point_toral, shadow_toral_exact, shadow_toral_float, ToralMap, TorusPoint};

/// Largest number of codings `build_coding_map` enumerates by default.
pub const DEFAULT_CODING_BUDGET: usize = 1 << 12;

/// Keeps `C·δ` strictly below `ε` for float solvers.
const DELTA_MARGIN: f64 = 1.0 - 1e-6;

/// What the horseshoe construction needs beyond Bohr certification.
pub trait HorseshoeSystem: BohrSystem + ProximalSearch
where
    Self::Point: Serialize + DeserializeOwned,
{
    /// Membership in the chain-transitive set `C`.
    fn in_set(&self, p: &Self::Point) -> bool;

    /// Shadows a window whose pseudo-orbit repeats `tail` (an `m`-block
    /// starting at a multiple of `m`) forever on both sides.
    fn shadow_coding(
        &self,
        tail: &[Self::Point],
        po: &PseudoOrbit<Self::Point>,
        delta: f64,
        exact: bool,
    ) -> Result<Shadow<Self::Point>>;
}

impl HorseshoeSystem for SftSystem {
    fn in_set(&self, p: &BiInfSeq) -> bool {
        self.contains(p)
    }

    fn shadow_coding(&self, tail: &[BiInfSeq], po: &PseudoOrbit<BiInfSeq>, delta: f64, _exact: bool) -> Result<Shadow<BiInfSeq>> {
        shadow_sft_tailed(self, tail, po, tail, delta)
    }
}

impl HorseshoeSystem for ToralMap {
    fn in_set(&self, _p: &TorusPoint) -> bool {
        true
    }

    fn shadow_coding(&self, tail: &[TorusPoint], po: &PseudoOrbit<TorusPoint>, _delta: f64, exact: bool) -> Result<Shadow<TorusPoint>> {
        // With a true-orbit tail the window solution is already bi-infinite.
        let t = tail.len();
        if (0..t).any(|i| !self.same_point(&self.forward(&tail[i]), &tail[(i + 1) % t])) {
            return Err(Error::Domain(
                "toral codings need the x-to-x chain to be a true periodic orbit".into(),
            ));
        }
        let sh = if exact {
            shadow_toral_exact(self, po)?
        } else {
            shadow_toral_float(self, po)?
        };
        Ok(Shadow {
            base: sh.base,
            i_min: sh.i_min,
            orbit: sh.orbit,
            certified_epsilon: sh.certified_epsilon,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeInput<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    pub c_description: String,
    /// Radius of the neighborhood of `C` on which expansivity and shadowing hold.
    pub b: f64,
    /// Expansive constant on that neighborhood.
    pub e: f64,
    pub proximal: ProximalWitness<P>,
}

/// `min{b, e/2, d(x, y)/3}`, rounded down to the system's grid.
pub fn horseshoe_epsilon<S: Shadowing>(sys: &S, b: f64, e: f64, x: &S::Point, y: &S::Point) -> f64 {
    let raw = b.min(e / 2.0).min(sys.distance(x, y) / 3.0);
    let eps = sys.admissible_epsilon(raw);
    if eps > raw {
        0.0
    } else {
        eps
    }
}

/// Checks the input and returns `(ε, δ)`, where `δ` is the witness's chain bound.
pub fn validate_input<S: HorseshoeSystem>(sys: &S, input: &HorseshoeInput<S::Point>) -> Result<(f64, f64)>
where
    S::Point: Serialize + DeserializeOwned,
{
    let w = &input.proximal;
    if input.system_id != sys.system_id() || w.system_id != sys.system_id() {
        return Err(Error::Config("horseshoe input belongs to another system".into()));
    }
    if !verify_proximal_witness(sys, w) {
        return Err(Error::Input("the proximal witness does not verify".into()));
    }
    if let Some(c) = w.chains().iter().find(|c| c.points.iter().any(|p| !sys.in_set(p))) {
        return Err(Error::Input(format!(
            "a proximal chain from {:?} leaves C",
            c.first()
        )));
    }
    let eps = horseshoe_epsilon(sys, input.b, input.e, &w.x, &w.y);
    if !(eps > 0.0) {
        return Err(Error::Parameter("ε = min{b, e/2, d(x,y)/3} is not positive".into()));
    }
    let need = sys.shadowing_delta(eps)?;
    if w.delta > need {
        return Err(Error::Parameter(format!(
            "witness chains are {}-chains; ε = {eps} needs δ ≤ {need}",
            w.delta
        )));
    }
    Ok((eps, w.delta))
}

fn parse_coding(c: &str) -> Result<Vec<bool>> {
    if c.is_empty() || c.len() % 2 == 0 {
        return Err(Error::Input(format!("coding '{c}' must have odd length 2W+1")));
    }
    c.chars()
        .map(|ch| match ch {
            'x' => Ok(false),
            'y' => Ok(true),
            _ => Err(Error::Input(format!("coding symbol '{ch}' is neither x nor y"))),
        })
        .collect()
}

/// `Γ_c` on `[-(W+1)m, (W+1)m)`: block `j` is `γ_{c_j c_{j+1}}` without its
/// last point, with `c_j = x` for `|j| > W`.
pub fn build_gamma_c<S: HorseshoeSystem>(sys: &S, input: &HorseshoeInput<S::Point>, c: &str) -> Result<PseudoOrbit<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    let bits = parse_coding(c)?;
    let w = &input.proximal;
    let m = w.m;
    let big_w = (bits.len() / 2) as i64;
    let sym = |j: i64| -> bool {
        if j.abs() > big_w {
            false
        } else {
            bits[(j + big_w) as usize]
        }
    };
    let mut pts = Vec::with_capacity((2 * big_w as usize + 2) * m);
    for j in -big_w - 1..=big_w {
        pts.extend_from_slice(&w.chain(sym(j), sym(j + 1)).points[..m]);
    }
    let po = PseudoOrbit::new(sys.system_id(), -(big_w + 1) * m as i64, pts, w.delta);
    if !is_pseudo_orbit(sys, &po)? {
        return Err(Error::Internal(format!("Γ_{c} is not a δ-pseudo-orbit")));
    }
    if po.points.iter().any(|p| !sys.in_set(p)) {
        return Err(Error::Internal(format!("Γ_{c} leaves C")));
    }
    Ok(po)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingEntry<P> {
    pub coding: String,
    /// `π⁻¹(c)`.
    pub point: P,
    /// `f^{jm}(π⁻¹(c))` for `j = -W, …, W`.
    pub checkpoints: Vec<P>,
    pub shadow_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingChecks {
    /// Every `Γ_c` is ε-shadowed by its entry (re-checked by iteration).
    pub shadow_tube: bool,
    /// Checkpoint `j` lies in `B_ε(x)` or `B_ε(y)` as `c_j` says.
    pub checkpoint_plateau: bool,
    /// `f^m(π⁻¹(c)) = π⁻¹(σc)` wherever `σc` is in the window.
    pub semiconjugacy: bool,
    pub semiconjugacy_pairs: usize,
    pub semiconjugacy_max_distance: f64,
    /// Distinct codings separate by at least `d(x,y) - 2ε` at some checkpoint.
    pub separation: bool,
    pub min_separation: f64,
    pub separation_bound: f64,
}

impl CodingChecks {
    pub fn all_passed(&self) -> bool {
        self.shadow_tube && self.checkpoint_plateau && self.semiconjugacy && self.separation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingMap<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    pub window_radius: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub x: P,
    pub y: P,
    pub entries: Vec<CodingEntry<P>>,
    pub checks: CodingChecks,
}

impl<P> CodingMap<P> {
    pub fn entry(&self, coding: &str) -> Option<&CodingEntry<P>> {
        coding_index(coding).and_then(|i| self.entries.get(i))
    }
}

/// Entries are ordered by reading the coding as a binary number (`x = 0`).
fn coding_index(c: &str) -> Option<usize> {
    c.chars().try_fold(0usize, |acc, ch| match ch {
        'x' => Some(acc * 2),
        'y' => Some(acc * 2 + 1),
        _ => None,
    })
}

fn coding_word(index: usize, len: usize) -> String {
    (0..len)
        .map(|i| if (index >> (len - 1 - i)) & 1 == 1 { 'y' } else { 'x' })
        .collect()
}

fn shadow_entry<S: HorseshoeSystem>(
    sys: &S,
    input: &HorseshoeInput<S::Point>,
    c: &str,
    delta: f64,
    exact: bool,
) -> Result<Shadow<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    let po = build_gamma_c(sys, input, c)?;
    let w = &input.proximal;
    sys.shadow_coding(&w.chain_xx.points[..w.m], &po, delta, exact)
}

/// `f^t(base)` read off a shadow window.
fn orbit_at<P: Clone>(sh: &Shadow<P>, t: i64) -> Option<P> {
    let k = t - sh.i_min;
    (k >= 0).then(|| sh.orbit.get(k as usize).cloned()).flatten()
}

/// Shadows every coding of radius `W` and runs the three window checks.
pub fn build_coding_map<S: HorseshoeSystem>(
    sys: &S,
    input: &HorseshoeInput<S::Point>,
    window_radius: usize,
    budget: usize,
) -> Result<CodingMap<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    let (eps, delta) = validate_input(sys, input)?;
    let len = 2 * window_radius + 1;
    let count = 1usize.checked_shl(len as u32).filter(|&n| len < usize::BITS as usize && n > 0);
    let count = match count {
        Some(n) if n <= budget => n,
        _ => {
            return Err(Error::Budget(format!(
                "W = {window_radius} needs 2^{len} codings; budget is {budget}"
            )))
        }
    };
    let shadow_delta = sys.shadowing_delta(eps)?;
    let w = &input.proximal;
    let m = w.m as i64;
    let big_w = window_radius as i64;

    let entries: Vec<(CodingEntry<S::Point>, bool, bool)> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let c = coding_word(idx, len);
            let sh = shadow_entry(sys, input, &c, shadow_delta, false)?;
            let po = build_gamma_c(sys, input, &c)?;
            // Compare with the solver's window, not with re-iterates of the base:
            // float iteration of an expanding map loses all digits over a long window.
            let true_orbit = sh
                .orbit
                .windows(2)
                .all(|p| sys.distance(&sys.forward(&p[0]), &p[1]) <= sys.step_tolerance());
            let tube = true_orbit && is_shadowed_by_orbit(sys, &po, &sh.orbit, sh.i_min, eps);
            let checkpoints: Vec<S::Point> = (-big_w..=big_w)
                .map(|j| orbit_at(&sh, j * m).ok_or_else(|| Error::Internal("shadow window too short".into())))
                .collect::<Result<_>>()?;
            let plateau = c.chars().zip(&checkpoints).all(|(ch, p)| {
                let centre = if ch == 'x' { &w.x } else { &w.y };
                sys.distance(p, centre) <= eps + sys.step_tolerance()
            });
            Ok((
                CodingEntry {
                    coding: c,
                    point: sh.base,
                    checkpoints,
                    shadow_epsilon: sh.certified_epsilon,
                },
                tube,
                plateau,
            ))
        })
        .collect::<Result<_>>()?;
    let shadow_tube = entries.iter().all(|e| e.1);
    let checkpoint_plateau = entries.iter().all(|e| e.2);
    let entries: Vec<CodingEntry<S::Point>> = entries.into_iter().map(|e| e.0).collect();

    // Semiconjugacy on codings whose shift stays in the window.
    let point_tol = sys.identity_tolerance();
    let semi: Vec<f64> = entries
        .par_iter()
        .filter(|e| e.coding.starts_with('x'))
        .map(|e| {
            let shifted = format!("{}x", &e.coding[1..]);
            let target = &entries[coding_index(&shifted).expect("valid coding")];
            let img = sys.iterate(&e.point, m);
            if sys.same_point(&img, &target.point) {
                0.0
            } else {
                sys.distance(&img, &target.point).max(f64::MIN_POSITIVE)
            }
        })
        .collect();
    let semiconjugacy_max_distance = semi.iter().copied().fold(0.0, f64::max);
    let semiconjugacy = semiconjugacy_max_distance <= point_tol;

    // Injectivity surrogate.
    let dxy = sys.distance(&w.x, &w.y);
    let bound = dxy - 2.0 * eps;
    let min_sep = (0..entries.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for k in i + 1..entries.len() {
                let sep = entries[i]
                    .checkpoints
                    .iter()
                    .zip(&entries[k].checkpoints)
                    .map(|(a, b)| sys.distance(a, b))
                    .fold(0.0, f64::max);
                best = best.min(sep);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let separation = bound > 0.0 && min_sep >= bound - sys.step_tolerance();

    Ok(CodingMap {
        system_id: sys.system_id().to_string(),
        window_radius,
        m: w.m,
        epsilon: eps,
        delta,
        x: w.x.clone(),
        y: w.y.clone(),
        entries,
        checks: CodingChecks {
            shadow_tube,
            checkpoint_plateau,
            semiconjugacy,
            semiconjugacy_pairs: semi.len(),
            semiconjugacy_max_distance,
            separation,
            min_separation: min_sep,
            separation_bound: bound,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoints<P> {
    pub m: usize,
    pub window_radius: usize,
    /// `π⁻¹(A)`, all `x`.
    pub p: P,
    /// `π⁻¹(B)`, `y` at block 0.
    pub q: P,
    /// `π⁻¹(C)`, `y` at blocks 0 and 1.
    pub r: P,
    /// `d(f^{±Wm} q, O(p))`, `d(f^{±Wm} r, O(p))`.
    pub decay_q: [f64; 2],
    pub decay_r: [f64; 2],
    pub dist_q_orbit_p: f64,
    pub dist_r_orbit_p: f64,
}

fn orbit_of<S: MetricSystem>(sys: &S, p: &S::Point, n: usize) -> Vec<S::Point> {
    let mut out = Vec::with_capacity(n);
    let mut q = p.clone();
    for _ in 0..n {
        out.push(q.clone());
        q = sys.forward(&q);
    }
    out
}

/// `p`, `q`, `r`, shadowed exactly (symbolic, or toral in `ℚ(√D)`), with the
/// periodicity and window membership checks.
pub fn special_points<S: HorseshoeSystem>(
    sys: &S,
    input: &HorseshoeInput<S::Point>,
    window_radius: usize,
) -> Result<SpecialPoints<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    if window_radius < 2 {
        return Err(Error::Parameter("special points need a coding window W ≥ 2".into()));
    }
    let (eps, _) = validate_input(sys, input)?;
    let shadow_delta = sys.shadowing_delta(eps)?;
    // Position i of a coding is block i - W.
    let word = |y_blocks: &[usize]| -> String {
        (0..2 * window_radius + 1)
            .map(|i| if y_blocks.iter().any(|b| b + window_radius == i) { 'y' } else { 'x' })
            .collect()
    };
    let a = word(&[]);
    let b = word(&[0]);
    let c = word(&[0, 1]);
    let m = input.proximal.m;
    let get = |code: &str| shadow_entry(sys, input, code, shadow_delta, true);
    let (sa, sb, sc) = (get(&a)?, get(&b)?, get(&c)?);
    let (p, q, r) = (sa.base.clone(), sb.base.clone(), sc.base.clone());

    if !sys.same_point(&sys.iterate(&p, m as i64), &p) {
        return Err(Error::Construction("f^m(p) ≠ p".into()));
    }
    if sys.same_point(&q, &r) {
        return Err(Error::Construction("q = r".into()));
    }
    let orbit_p = orbit_of(sys, &p, m);
    let dist_to = |z: &S::Point| orbit_p.iter().map(|s| sys.distance(z, s)).fold(f64::INFINITY, f64::min);
    let horizon = (window_radius * m) as i64;
    let decay = |z: &S::Point| [dist_to(&sys.iterate(z, -horizon)), dist_to(&sys.iterate(z, horizon))];
    let (decay_q, decay_r) = (decay(&q), decay(&r));
    let off_q = dist_to(&q);
    let off_r = dist_to(&r);
    let slack = sys.step_tolerance();
    if decay_q.iter().chain(decay_r.iter()).any(|d| *d > eps + slack) {
        return Err(Error::Construction(format!(
            "q or r does not return to the ε-tube of O(p) by ±Wm (q: {decay_q:?}, r: {decay_r:?})"
        )));
    }
    if off_q <= slack || off_r <= slack {
        return Err(Error::Construction("q or r lies on the orbit of p".into()));
    }
    Ok(SpecialPoints {
        m,
        window_radius,
        p,
        q,
        r,
        decay_q,
        decay_r,
        dist_q_orbit_p: off_q,
        dist_r_orbit_p: off_r,
    })
}

/// Packages `S = O(p)`, `x = q`, `y = r` for the Bohr certifier.
pub fn theorem2_to_corollary1<P: Clone>(
    system_id: &str,
    sp: &SpecialPoints<P>,
    sequence: SignSequenceSpec,
    n_max: usize,
) -> Theorem1Input<P> {
    let mut input = Theorem1Input::new(system_id, sp.p.clone(), sp.m, sp.q.clone(), sp.r.clone(), sequence, n_max);
    // q and r differ from p's orbit on about two blocks around 0.
    input.n_window = DEFAULT_N_WINDOW + 2 * (sp.m as u64);
    input
}

/// Default input for an SFT: the whole shift as `C`, and the first pair of
/// periodic points of period ≤ 2 that is chain proximal.
pub fn default_horseshoe_input_sft(sys: &SftSystem) -> Result<HorseshoeInput<BiInfSeq>> {
    let cands = sys.periodic_points(2);
    let b = 1.0;
    let e = sys.expansive_constant().unwrap_or(0.5);
    for i in 0..cands.len() {
        for k in i + 1..cands.len() {
            let (x, y) = (&cands[i], &cands[k]);
            let eps = horseshoe_epsilon(sys, b, e, x, y);
            if !(eps > 0.0) {
                continue;
            }
            let delta = sys.shadowing_delta(eps)?;
            if let Some(w) = sys.proximal_witness(x, y, &[delta], DEFAULT_M_MAX)? {
                return Ok(HorseshoeInput {
                    system_id: sys.name.clone(),
                    c_description: format!("the SFT {}", sys.name),
                    b,
                    e,
                    proximal: w,
                });
            }
        }
    }
    Err(Error::hypothesis(
        HypothesisCondition::Proximal,
        format!("no chain-proximal pair among the periodic points of period ≤ 2 of {}", sys.name),
    ))
}

/// Default input for a toral map: the whole torus as `C`, `x = 0` and `y` the
/// homoclinic point of the lattice vector `(1, 0)`.
pub fn default_horseshoe_input_toral(map: &ToralMap) -> Result<HorseshoeInput<TorusPoint>> {
    let h = homoclinic_point_toral(map, [1, 0])?;
    let b = map.diameter_bound();
    let e = map.expansive_constant_toral();
    let eps = horseshoe_epsilon(map, b, e, &TorusPoint::origin(), &h);
    let delta = map.shadowing_delta(eps)? * DELTA_MARGIN;
    let w = homoclinic_proximal_witness(map, &h, &[delta], DEFAULT_M_MAX)?;
    Ok(HorseshoeInput {
        system_id: map.name().to_string(),
        c_description: "the whole torus".into(),
        b,
        e,
        proximal: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohr::{certify_bohr, check_certificate};

    #[test]
    fn coding_words_round_trip() {
        for i in 0..32 {
            assert_eq!(coding_index(&coding_word(i, 5)), Some(i));
        }
        assert_eq!(coding_word(0, 3), "xxx");
        assert_eq!(coding_word(2, 3), "xyx");
        assert!(parse_coding("xx").is_err());
        assert!(parse_coding("xzx").is_err());
    }

    #[test]
    fn golden_mean_gamma_blocks() {
        let sys = SftSystem::golden_mean();
        let input = default_horseshoe_input_sft(&sys).unwrap();
        let m = input.proximal.m;
        let a = build_gamma_c(&sys, &input, "xxxxx").unwrap();
        let b = build_gamma_c(&sys, &input, "xxyxx").unwrap();
        assert_eq!(a.len(), 6 * m);
        // Γ_B differs from Γ_A only in blocks -1 and 0.
        let differs: Vec<i64> = (a.i_min..=a.i_max())
            .filter(|&i| a.get(i) != b.get(i))
            .map(|i| i.div_euclid(m as i64))
            .collect();
        assert!(!differs.is_empty());
        assert!(differs.iter().all(|&j| j == -1 || j == 0));
    }

    #[test]
    fn golden_mean_window_one() {
        let sys = SftSystem::golden_mean();
        let input = default_horseshoe_input_sft(&sys).unwrap();
        let map = build_coding_map(&sys, &input, 1, DEFAULT_CODING_BUDGET).unwrap();
        assert_eq!(map.entries.len(), 8);
        assert!(map.checks.all_passed(), "{:?}", map.checks);
        assert_eq!(map.checks.semiconjugacy_max_distance, 0.0);
        assert!(build_coding_map(&sys, &input, 7, 1000).is_err());
    }

    #[test]
    fn golden_mean_pipeline() {
        let sys = SftSystem::golden_mean();
        let input = default_horseshoe_input_sft(&sys).unwrap();
        let sp = special_points(&sys, &input, 2).unwrap();
        assert_eq!(sys.iterate(&sp.p, sp.m as i64), sp.p);
        let t1 = theorem2_to_corollary1(&sys.name, &sp, SignSequenceSpec::constant_one(), 50);
        let cert = certify_bohr(&sys, &t1).unwrap();
        assert!(check_certificate(&sys, &cert).ok);
        for row in &cert.partial_sums {
            assert_eq!(row.weighted, row.checkpoint);
        }
    }

    #[test]
    fn cat_pipeline() {
        let map = ToralMap::cat();
        let input = default_horseshoe_input_toral(&map).unwrap();
        let cm = build_coding_map(&map, &input, 1, DEFAULT_CODING_BUDGET).unwrap();
        assert!(cm.checks.all_passed(), "{:?}", cm.checks);
        let sp = special_points(&map, &input, 2).unwrap();
        assert!(sp.p.is_exact() && sp.q.is_exact() && sp.r.is_exact());
        let t1 = theorem2_to_corollary1(map.name(), &sp, SignSequenceSpec::constant_one(), 30);
        let cert = certify_bohr(&map, &t1).unwrap();
        assert!(check_certificate(&map, &cert).ok);
    }
}
