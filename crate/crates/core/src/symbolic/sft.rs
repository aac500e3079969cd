use rand::Rng;
use serde::{Deserialize, Serialize};

use super::seq::{dyadic, shift_metric, BiInfSeq};
use crate::dynamics::{
    is_pseudo_orbit, is_shadowed_by_orbit, MetricSystem, PseudoOrbit, Shadow, Shadowing,
};
use crate::error::{Error, Result};

/// A memory-1 subshift of finite type (vertex shift): `x_i → x_{i+1}` must be
/// an allowed transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftSystem {
    pub name: String,
    #[serde(rename = "alphabet")]
    pub alphabet_size: usize,
    pub transitions: Vec<Vec<u8>>,
}

/// Expansive constant of every shift with the `2⁻ᵏ` metric.
pub const SHIFT_EXPANSIVE_CONSTANT: f64 = 0.5;

impl SftSystem {
    pub fn new(name: impl Into<String>, transitions: Vec<Vec<u8>>) -> Result<Self> {
        let sys = Self {
            name: name.into(),
            alphabet_size: transitions.len(),
            transitions,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alphabet_size;
        if n < 2 || n > 36 {
            return Err(Error::Config(format!("alphabet size {n} outside 2..=36")));
        }
        if self.transitions.len() != n || self.transitions.iter().any(|r| r.len() != n) {
            return Err(Error::Config("transition matrix must be square of alphabet size".into()));
        }
        if self.transitions.iter().flatten().any(|&v| v > 1) {
            return Err(Error::Config("transition matrix must be 0/1".into()));
        }
        for a in 0..n {
            if self.transitions[a].iter().all(|&v| v == 0) {
                return Err(Error::Config(format!("symbol {a} has no successor")));
            }
            if (0..n).all(|b| self.transitions[b][a] == 0) {
                return Err(Error::Config(format!("symbol {a} has no predecessor")));
            }
        }
        Ok(())
    }

    /// The full shift on `n` symbols.
    pub fn full_shift(n: usize) -> Self {
        Self::new(format!("fullshift{n}"), vec![vec![1; n]; n]).expect("full shift is valid")
    }

    /// Binary sequences without the word `11`.
    pub fn golden_mean() -> Self {
        Self::new("golden-mean", vec![vec![1, 1], vec![1, 0]]).expect("valid")
    }

    /// Only `00` and `11` allowed: two fixed points, nothing else.
    pub fn two_fixed_points() -> Self {
        Self::new("two-fixed", vec![vec![1, 0], vec![0, 1]]).expect("valid")
    }

    /// Only `01` and `10` allowed: a single orbit of period 2.
    pub fn period_two() -> Self {
        Self::new("periodic01", vec![vec![0, 1], vec![1, 0]]).expect("valid")
    }

    pub fn allowed(&self, a: u8, b: u8) -> bool {
        self.transitions
            .get(a as usize)
            .and_then(|r| r.get(b as usize))
            .is_some_and(|&v| v == 1)
    }

    pub fn word_is_admissible(&self, w: &[u8]) -> bool {
        w.iter().all(|&s| (s as usize) < self.alphabet_size) && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    /// Whether the represented sequence lies in the shift space.
    pub fn contains(&self, x: &BiInfSeq) -> bool {
        (x.max_symbol() as usize) < self.alphabet_size
            && x.adjacent_pairs().into_iter().all(|(a, b)| self.allowed(a, b))
    }

    /// Number of admissible words of length `n`.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let k = self.alphabet_size;
        let mut ends = vec![1u128; k];
        for _ in 1..n {
            let mut next = vec![0u128; k];
            for (a, &c) in ends.iter().enumerate() {
                for (b, slot) in next.iter_mut().enumerate() {
                    if self.transitions[a][b] == 1 {
                        *slot += c;
                    }
                }
            }
            ends = next;
        }
        ends.into_iter().sum()
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn admissible_words(&self, n: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        self.extend_words(n, &mut cur, &mut out);
        out
    }

    /// An eventually periodic point of the SFT carrying `word` on
    /// `[start, start + len)`, extended greedily by smallest allowed symbols.
    pub fn point_in_cylinder(&self, word: &[u8], start: i64) -> Result<BiInfSeq> {
        if word.is_empty() || !self.word_is_admissible(word) {
            return Err(Error::Domain(format!("word {word:?} is not admissible in {}", self.name)));
        }
        let n = self.alphabet_size as u8;
        let walk = |from: u8, step: &dyn Fn(u8) -> u8| -> (Vec<u8>, usize) {
            let mut seen = vec![from];
            loop {
                let next = step(*seen.last().expect("nonempty"));
                if let Some(j) = seen.iter().position(|&s| s == next) {
                    return (seen, j);
                }
                seen.push(next);
            }
        };
        let succ = |a: u8| (0..n).find(|&b| self.allowed(a, b)).expect("validated: every symbol has a successor");
        let pred = |b: u8| (0..n).find(|&a| self.allowed(a, b)).expect("validated: every symbol has a predecessor");

        let (r, rj) = walk(*word.last().expect("nonempty"), &succ);
        let (l, lj) = walk(word[0], &pred);
        let mut core: Vec<u8> = l[1..].iter().rev().copied().collect();
        let lead = core.len() as i64;
        core.extend_from_slice(word);
        core.extend_from_slice(&r[1..]);
        let left: Vec<u8> = l[lj..].iter().rev().copied().collect();
        let right: Vec<u8> = r[rj..].to_vec();
        BiInfSeq::new(left, core, right, -(start - lead))
    }

    /// Periodic points of period at most `max_period`, one per distinct point,
    /// ordered by period and then by the word read from coordinate 0.
    pub fn periodic_points(&self, max_period: usize) -> Vec<BiInfSeq> {
        let mut out: Vec<BiInfSeq> = Vec::new();
        for p in 1..=max_period {
            for w in self.admissible_words(p) {
                if !self.allowed(*w.last().expect("nonempty"), w[0]) {
                    continue;
                }
                let pt = BiInfSeq::periodic(&w).expect("nonempty word");
                if !out.contains(&pt) {
                    out.push(pt);
                }
            }
        }
        out
    }

    /// A random `δ`-pseudo-orbit on `[0, len)` for dyadic `δ = 2^-(k+1)`, `k ≥ 1`:
    /// each step keeps `σ(w_i)` on `[-k, k]` and redraws the symbols at `±(k+1)`.
    pub fn random_pseudo_orbit<R: Rng + ?Sized>(&self, rng: &mut R, len: usize, delta: f64) -> Result<PseudoOrbit<BiInfSeq>> {
        let k = radius_for(delta)? as i64;
        if len == 0 {
            return Err(Error::Parameter("pseudo-orbit length must be positive".into()));
        }
        let n = self.alphabet_size as u8;
        let pick = |rng: &mut R, opts: Vec<u8>| -> Result<u8> {
            if opts.is_empty() {
                return Err(Error::Domain(format!("{} has a symbol without neighbours", self.name)));
            }
            Ok(opts[rng.gen_range(0..opts.len())])
        };
        let mut word = vec![rng.gen_range(0..n)];
        while word.len() < (2 * k + 3) as usize {
            let last = *word.last().expect("nonempty");
            let next = pick(rng, (0..n).filter(|&b| self.allowed(last, b)).collect())?;
            word.push(next);
        }
        let mut pts = vec![self.point_in_cylinder(&word, -k - 1)?];
        for _ in 1..len {
            let kept = pts.last().expect("nonempty").word(-k + 1, k + 1);
            let first = kept[0];
            let last = *kept.last().expect("nonempty");
            let mut w = vec![pick(rng, (0..n).filter(|&a| self.allowed(a, first)).collect())?];
            w.extend_from_slice(&kept);
            w.push(pick(rng, (0..n).filter(|&b| self.allowed(last, b)).collect())?);
            pts.push(self.point_in_cylinder(&w, -k - 1)?);
        }
        Ok(PseudoOrbit::new(self.name.clone(), 0, pts, delta))
    }

    fn extend_words(&self, n: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for s in 0..self.alphabet_size as u8 {
            if cur.last().is_none_or(|&p| self.allowed(p, s)) {
                cur.push(s);
                self.extend_words(n, cur, out);
                cur.pop();
            }
        }
    }
}

impl MetricSystem for SftSystem {
    type Point = BiInfSeq;

    fn system_id(&self) -> &str {
        &self.name
    }

    fn forward(&self, p: &BiInfSeq) -> BiInfSeq {
        p.shift(1)
    }

    fn backward(&self, p: &BiInfSeq) -> BiInfSeq {
        p.shift(-1)
    }

    fn distance(&self, p: &BiInfSeq, q: &BiInfSeq) -> f64 {
        shift_metric(p, q)
    }

    fn diameter_bound(&self) -> f64 {
        1.0
    }

    fn expansive_constant(&self) -> Option<f64> {
        Some(SHIFT_EXPANSIVE_CONSTANT)
    }

    fn lipschitz_bound(&self) -> f64 {
        2.0
    }

    fn iterate(&self, p: &BiInfSeq, n: i64) -> BiInfSeq {
        p.shift(n)
    }
}

/// `expansive_constant_sft`: the shift metric makes `1/2` an expansive constant.
pub fn expansive_constant_sft(_sys: &SftSystem) -> f64 {
    SHIFT_EXPANSIVE_CONSTANT
}

/// If `δ = 2^-(k+1)` exactly, returns `k`.
pub fn dyadic_radius(delta: f64) -> Option<u64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return None;
    }
    let k = (-delta.log2()).round() as i64 - 1;
    (k >= 0 && dyadic((k + 1) as u64) == delta).then_some(k as u64)
}

/// Largest `2^-(k+1) ≤ δ` with `k ≥ min_k`.
pub fn round_down_dyadic(delta: f64, min_k: u64) -> f64 {
    let mut k = min_k;
    while dyadic(k + 1) > delta && k < 1000 {
        k += 1;
    }
    dyadic(k + 1)
}

/// Exact symbolic shadowing. For a pseudo-orbit `(w_i)` whose consecutive
/// defects are at most `δ = 2^-(k+1)`, `k ≥ 1`, the point `z` with
/// `z_i = (w_i)_0` on the window (and the first/last point's own orbit outside)
/// satisfies `d(σⁱz, w_i) ≤ δ` everywhere, so the certified ε is δ itself.
pub fn shadow_sft(sys: &SftSystem, po: &PseudoOrbit<BiInfSeq>, delta: f64) -> Result<Shadow<BiInfSeq>> {
    check_window(sys, po, delta)?;
    let first = po.points.first().ok_or_else(|| Error::Domain("empty pseudo-orbit".into()))?;
    let last = po.points.last().expect("nonempty");
    let i_min = po.i_min;
    let i_max = po.i_max();
    let middle: Vec<u8> = po.points.iter().map(|w| w.at(0)).collect();
    let z = BiInfSeq::splice(&first.shift(-i_min), &middle, i_min, &last.shift(-i_max));
    finish_shadow(sys, po, z, delta)
}

/// Shadowing for a pseudo-orbit that repeats `left_block` forever before the
/// window and `right_block` forever after it (indices `i_min - |left|..` and
/// `i_max + 1..`). The output is exact and eventually periodic.
pub fn shadow_sft_tailed(
    sys: &SftSystem,
    left_block: &[BiInfSeq],
    po: &PseudoOrbit<BiInfSeq>,
    right_block: &[BiInfSeq],
    delta: f64,
) -> Result<Shadow<BiInfSeq>> {
    if left_block.is_empty() || right_block.is_empty() {
        return Err(Error::Domain("periodic tail blocks must be nonempty".into()));
    }
    let k = radius_for(delta)?;
    // Unroll enough periods that every index whose agreement window touches
    // the junctions gets checked.
    let reps = |b: &[BiInfSeq]| (k as usize) / b.len() + 2;
    let (lr, rr) = (reps(left_block), reps(right_block));
    let mut pts = Vec::new();
    for _ in 0..lr {
        pts.extend_from_slice(left_block);
    }
    pts.extend_from_slice(&po.points);
    for _ in 0..rr {
        pts.extend_from_slice(right_block);
    }
    let ext_min = po.i_min - (lr * left_block.len()) as i64;
    let ext = PseudoOrbit::new(po.system_id.clone(), ext_min, pts, po.delta);
    check_window(sys, &ext, delta)?;
    // Closing the periodic loops must be admissible too.
    let wrap = |b: &[BiInfSeq]| sys.distance(&sys.forward(b.last().expect("nonempty")), &b[0]);
    if wrap(left_block) > delta || wrap(right_block) > delta {
        return Err(Error::Domain("tail blocks are not δ-periodic".into()));
    }

    let sym = |b: &[BiInfSeq]| b.iter().map(|w| w.at(0)).collect::<Vec<u8>>();
    let core: Vec<u8> = sym(&po.points);
    let z = BiInfSeq::new(sym(left_block), core, sym(right_block), -po.i_min)?;
    finish_shadow(sys, &ext, z, delta)
}

fn radius_for(delta: f64) -> Result<u64> {
    match dyadic_radius(delta) {
        Some(k) if k >= 1 => Ok(k),
        _ => Err(Error::Parameter(format!(
            "δ = {delta} is not of the form 2^-(k+1) with k ≥ 1"
        ))),
    }
}

fn check_window(sys: &SftSystem, po: &PseudoOrbit<BiInfSeq>, delta: f64) -> Result<()> {
    if delta != 0.0 {
        radius_for(delta)?;
    }
    if po.delta > delta {
        return Err(Error::Parameter(format!(
            "pseudo-orbit claims δ = {}, above the shadowing δ = {delta}",
            po.delta
        )));
    }
    if let Some(bad) = po.points.iter().position(|w| !sys.contains(w)) {
        return Err(Error::Domain(format!("point {} is not in {}", po.i_min + bad as i64, sys.name)));
    }
    if !is_pseudo_orbit(sys, po)? {
        return Err(Error::Domain(format!(
            "input is not a {}-pseudo-orbit (max defect {})",
            po.delta,
            po.max_defect(sys)
        )));
    }
    Ok(())
}

fn finish_shadow(
    sys: &SftSystem,
    po: &PseudoOrbit<BiInfSeq>,
    z: BiInfSeq,
    delta: f64,
) -> Result<Shadow<BiInfSeq>> {
    if !sys.contains(&z) {
        return Err(Error::Internal(format!("shadow point {z:?} leaves {}", sys.name)));
    }
    let orbit: Vec<BiInfSeq> = (po.i_min..=po.i_max()).map(|i| z.shift(i)).collect();
    if !is_shadowed_by_orbit(sys, po, &orbit, po.i_min, delta) {
        return Err(Error::Internal("symbolic shadow fails the telescoping bound".into()));
    }
    Ok(Shadow {
        base: z,
        i_min: po.i_min,
        orbit,
        certified_epsilon: delta,
    })
}

impl Shadowing for SftSystem {
    fn shadowing_delta(&self, epsilon: f64) -> Result<f64> {
        if epsilon < 0.25 && dyadic_radius(self.admissible_epsilon(epsilon)).is_none() {
            return Err(Error::Parameter(format!("no admissible δ for ε = {epsilon}")));
        }
        Ok(self.admissible_epsilon(epsilon))
    }

    fn admissible_epsilon(&self, epsilon: f64) -> f64 {
        round_down_dyadic(epsilon, 1)
    }

    fn shadow(&self, po: &PseudoOrbit<BiInfSeq>) -> Result<Shadow<BiInfSeq>> {
        let delta = if po.max_defect(self) == 0.0 && po.delta == 0.0 {
            0.0
        } else {
            round_down_dyadic(po.delta, 1)
        };
        let mut po = po.clone();
        po.delta = delta;
        shadow_sft(self, &po, delta)
    }
}

/// The homoclinic pair of the full 2-shift used as the default Bohr input:
/// `S = {0^∞}`, `x` with a single 1 at coordinate 0, `y` with 1s at 0 and 1.
pub fn homoclinic_pair_fullshift() -> (Vec<BiInfSeq>, BiInfSeq, BiInfSeq) {
    (
        vec![BiInfSeq::constant(0)],
        BiInfSeq::with_word(0, &[1], 0),
        BiInfSeq::with_word(0, &[1, 1], 0),
    )
}
