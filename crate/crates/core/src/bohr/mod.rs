//! Bohr-chaos certificates: from a pair of points homoclinic to a periodic
//! orbit, build a true orbit `p` and a test function `φ` such that the weighted
//! Birkhoff sums `Σ a_i φ(fⁱp)` equal `Σ_h |a_{r+hm}|` on the nose.

mod build;
mod check;
mod hypotheses;
mod sequence;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BumpFunctionSpec, Chain, MetricSystem, Shadowing};
use crate::error::{Error, Result};
use crate::registry::SystemSpec;
use crate::symbolic::{BiInfSeq, SftSystem};
use crate::toral::{homoclinic_point_toral, ToralMap, TorusPoint};

pub use build::{build_gamma, build_theorem1_chains, certify_bohr, select_residue, ResidueChoice, TheoremChains};
pub use check::{check_certificate, check_certificate_value, CheckReport};
pub use hypotheses::{verify_theorem1_hypotheses, ConditionVerdict, DecaySample, HypothesisReport};
pub use sequence::{DensityPoint, SequenceKind, SignSequenceSpec};

/// Residue averages below this count as "no positive density at this horizon".
pub const MIN_DENSITY: f64 = 1e-2;

/// Default finite horizon standing in for the limits `i → ±∞`.
pub const DEFAULT_N_WINDOW: u64 = 64;

/// Default closeness threshold for the limit surrogates.
pub const DEFAULT_HYPOTHESIS_TOL: f64 = 1.0 / 4_294_967_296.0;

/// What the certifier needs from a system beyond shadowing.
pub trait BohrSystem: Shadowing
where
    Self::Point: Serialize + DeserializeOwned,
{
    fn system_spec(&self) -> SystemSpec;

    /// Allowed error per summed term; 0 for exact systems.
    fn identity_tolerance(&self) -> f64;

    /// `δ` such that every `2δ`-pseudo-orbit is `ε`-shadowed.
    fn bohr_delta(&self, epsilon: f64) -> Result<f64>;

    fn shadowing_justification(&self) -> String;

    /// Whether certificates carry the shadow orbit (float systems) or let the
    /// checker iterate the base point itself (exact systems).
    fn stores_orbit(&self) -> bool;

    fn same_point(&self, a: &Self::Point, b: &Self::Point) -> bool;
}

impl BohrSystem for SftSystem {
    fn system_spec(&self) -> SystemSpec {
        SystemSpec::Sft(self.clone())
    }

    fn identity_tolerance(&self) -> f64 {
        0.0
    }

    fn bohr_delta(&self, epsilon: f64) -> Result<f64> {
        let eps = self.admissible_epsilon(epsilon);
        if eps != epsilon || epsilon > 0.25 {
            return Err(Error::Parameter(format!("ε = {epsilon} is not a dyadic 2^-(k+1), k ≥ 1")));
        }
        Ok(eps / 2.0)
    }

    fn shadowing_justification(&self) -> String {
        "exact symbolic shadowing: a 2^-(k+1)-pseudo-orbit is 2^-(k+1)-shadowed by the sequence of its 0-th symbols".into()
    }

    fn stores_orbit(&self) -> bool {
        false
    }

    fn same_point(&self, a: &BiInfSeq, b: &BiInfSeq) -> bool {
        a == b
    }
}

/// Keeps `C·2δ` strictly below `ε` despite round-off in the solver.
const TORAL_DELTA_MARGIN: f64 = 1.0 - 1e-6;

impl BohrSystem for ToralMap {
    fn system_spec(&self) -> SystemSpec {
        SystemSpec::Toral(self.clone())
    }

    fn identity_tolerance(&self) -> f64 {
        crate::CERT_TOL
    }

    fn bohr_delta(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("ε must be positive, got {epsilon}")));
        }
        let delta = epsilon * TORAL_DELTA_MARGIN / (2.0 * self.shadowing_constant());
        if 2.0 * delta >= self.max_shadow_delta() {
            return Err(Error::HyperbolicityMargin(format!(
                "2δ = {} is beyond the solver's range {}",
                2.0 * delta,
                self.max_shadow_delta()
            )));
        }
        Ok(delta)
    }

    fn shadowing_justification(&self) -> String {
        format!(
            "hyperbolic splitting: δ-pseudo-orbits are Cδ-shadowed with C = {:.6}",
            self.shadowing_constant()
        )
    }

    fn stores_orbit(&self) -> bool {
        true
    }

    fn same_point(&self, a: &TorusPoint, b: &TorusPoint) -> bool {
        match (a.exact(), b.exact()) {
            (Some(_), Some(_)) => a == b,
            _ => self.distance(a, b) <= crate::CERT_TOL,
        }
    }
}

/// Input of the certificate builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Input<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    /// A point of the periodic orbit `S`.
    pub s_base: P,
    pub s_period: usize,
    pub x: P,
    pub y: P,
    pub sequence: SignSequenceSpec,
    pub n_window: u64,
    pub n_max: usize,
    pub tol: f64,
}

impl<P> Theorem1Input<P> {
    pub fn new(system_id: impl Into<String>, s_base: P, s_period: usize, x: P, y: P, sequence: SignSequenceSpec, n_max: usize) -> Self {
        Self {
            system_id: system_id.into(),
            s_base,
            s_period,
            x,
            y,
            sequence,
            n_window: DEFAULT_N_WINDOW,
            n_max,
            tol: DEFAULT_HYPOTHESIS_TOL,
        }
    }
}

/// The orbit `S = {s, f(s), …, f^{T-1}(s)}`, after checking `f^T(s) = s`.
pub fn periodic_orbit<S: BohrSystem>(sys: &S, base: &S::Point, period: usize) -> Result<Vec<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    if period == 0 {
        return Err(Error::Input("the period of S must be positive".into()));
    }
    let mut pts = Vec::with_capacity(period);
    let mut q = base.clone();
    for _ in 0..period {
        pts.push(q.clone());
        q = sys.forward(&q);
    }
    if !sys.same_point(&q, base) {
        return Err(Error::Input(format!(
            "S is not invariant: f^{period}(s) is {} away from s",
            sys.distance(&q, base)
        )));
    }
    Ok(pts)
}

/// Compact form of `Γ` on `[0, r+l+n_max·m]`: a stretch of `S` ending at `z`,
/// then one block per checkpoint (`x` for `chain_x`, `y` for `chain_y`), then `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaWindow {
    pub delta: f64,
    pub len: usize,
    /// Index of `z` in the orbit of `s_base`.
    pub z_index: usize,
    pub blocks: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSumRow {
    pub n: usize,
    /// `Σ_{i < r+l+nm} a_i φ(fⁱp)`.
    pub weighted: f64,
    /// `Σ_{h ≤ n} |a_{r+hm}|`.
    pub checkpoint: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hypothesis: f64,
    pub identity_per_term: f64,
    pub step: f64,
    pub min_density: f64,
    pub cert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohrCertificate<P> {
    pub tool_version: String,
    pub system: SystemSpec,
    pub sequence: SignSequenceSpec,
    pub n_window: u64,
    pub n_max: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub k: usize,
    pub l: usize,
    pub j: usize,
    pub m: usize,
    pub r: usize,
    pub s_base: P,
    pub s_period: usize,
    pub phi: BumpFunctionSpec<P>,
    pub chain_x: Chain<P>,
    pub chain_y: Chain<P>,
    pub gamma_window: GammaWindow,
    pub shadow_base: P,
    pub shadow_epsilon: f64,
    #[serde(default = "no_orbit", skip_serializing_if = "Option::is_none")]
    pub shadow_orbit: Option<Vec<P>>,
    pub partial_sums: Vec<PartialSumRow>,
    /// `(1/n_max) Σ_{h ≤ n_max} |a_{r+hm}|`.
    pub checkpoint_average: f64,
    pub lower_bound: f64,
    pub tolerances: Tolerances,
    pub hypotheses: HypothesisReport,
}

fn no_orbit<P>() -> Option<Vec<P>> {
    None
}

/// `Γ_i` for `0 ≤ i < len`, rebuilt from the compact window.
pub fn expand_gamma<P: Clone>(
    s_orbit: &[P],
    chain_x: &Chain<P>,
    chain_y: &Chain<P>,
    window: &GammaWindow,
    prefix: usize,
    m: usize,
) -> Result<Vec<P>> {
    let t = s_orbit.len();
    if t == 0 || window.z_index >= t || chain_x.points.len() != m + 1 || chain_y.points.len() != m + 1 {
        return Err(Error::Input("inconsistent Γ description".into()));
    }
    if window.len != prefix + 1 + window.blocks.len() * m {
        return Err(Error::Input("Γ length does not match its blocks".into()));
    }
    let mut pts = Vec::with_capacity(window.len);
    // w_i = f^{i - prefix}(z) for 0 ≤ i ≤ prefix.
    for i in 0..=prefix {
        let idx = (window.z_index as i64 + i as i64 - prefix as i64).rem_euclid(t as i64) as usize;
        pts.push(s_orbit[idx].clone());
    }
    pts.pop();
    for c in window.blocks.chars() {
        let chain = match c {
            'x' => chain_x,
            'y' => chain_y,
            _ => return Err(Error::Input(format!("block selector '{c}' is neither x nor y"))),
        };
        pts.extend_from_slice(&chain.points[..m]);
    }
    pts.push(s_orbit[window.z_index].clone());
    Ok(pts)
}

/// Default pair for an SFT: `S` a fixed point `s^∞`, `x` carrying one symbol
/// `a ≠ s` at 0, `y` carrying `aa` (or `a s a`) at 0.
pub fn default_input_sft(sys: &SftSystem, sequence: SignSequenceSpec, n_max: usize) -> Result<Theorem1Input<BiInfSeq>> {
    let n = sys.alphabet_size as u8;
    for s in 0..n {
        if !sys.allowed(s, s) {
            continue;
        }
        for a in (0..n).filter(|&a| a != s) {
            if !(sys.allowed(s, a) && sys.allowed(a, s)) {
                continue;
            }
            let y_word = [vec![a, a], vec![a, s, a]]
                .into_iter()
                .find(|w| sys.word_is_admissible(w));
            if let Some(yw) = y_word {
                return Ok(Theorem1Input::new(
                    sys.name.clone(),
                    BiInfSeq::constant(s),
                    1,
                    BiInfSeq::with_word(s, &[a], 0),
                    BiInfSeq::with_word(s, &yw, 0),
                    sequence,
                    n_max,
                ));
            }
        }
    }
    Err(Error::Config(format!(
        "{} has no fixed point with a homoclinic excursion; give the pair explicitly",
        sys.name
    )))
}

/// Default pair for a toral map: `S = {0}`, `x`, `y` the homoclinic points of
/// the lattice vectors `(1,0)` and `(0,1)`.
pub fn default_input_toral(map: &ToralMap, sequence: SignSequenceSpec, n_max: usize) -> Result<Theorem1Input<TorusPoint>> {
    Ok(Theorem1Input::new(
        map.name(),
        TorusPoint::origin(),
        1,
        homoclinic_point_toral(map, [1, 0])?,
        homoclinic_point_toral(map, [0, 1])?,
        sequence,
        n_max,
    ))
}

/// Grid-rounded `ε` for a raw separation bound; 0 when the grid has nothing below it.
pub(crate) fn grid_epsilon<S: Shadowing>(sys: &S, raw: f64) -> f64 {
    let e = sys.admissible_epsilon(raw);
    if e > raw || !(e > 0.0) {
        0.0
    } else {
        e
    }
}
