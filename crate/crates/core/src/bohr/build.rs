use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    expand_gamma, periodic_orbit, verify_theorem1_hypotheses, BohrCertificate, BohrSystem, GammaWindow,
    PartialSumRow, SignSequenceSpec, Theorem1Input, Tolerances, MIN_DENSITY,
};
use crate::dynamics::{is_pseudo_orbit, is_shadowed_by_orbit, phi_unchecked, BumpFunctionSpec, Chain, MetricSystem, PseudoOrbit};
use crate::error::{Error, HypothesisCondition, Result};

/// The two `2δ`-chains from `z` through `x` (resp. `y`) back to `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremChains<P> {
    pub k: usize,
    pub l: usize,
    pub j: usize,
    pub m: usize,
    /// Indices of `z` and `w` in the orbit of `s_base`.
    pub z_index: usize,
    pub w_index: usize,
    pub chain_x: Chain<P>,
    pub chain_y: Chain<P>,
}

fn first_close<S: MetricSystem>(sys: &S, s_orbit: &[S::Point], a: &S::Point, b: &S::Point, delta: f64) -> Option<usize> {
    s_orbit
        .iter()
        .position(|s| sys.distance(s, a) <= delta && sys.distance(s, b) <= delta)
}

/// Scans `k, l = 1, 2, …, N` for the first times at which both backward
/// (resp. forward) orbits are `δ`-close to a common point of `S`, then closes
/// the loop inside `S`.
pub fn build_theorem1_chains<S: BohrSystem>(
    sys: &S,
    input: &Theorem1Input<S::Point>,
    delta: f64,
) -> Result<TheoremChains<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("δ must be positive, got {delta}")));
    }
    let s_orbit = periodic_orbit(sys, &input.s_base, input.s_period)?;
    let t = s_orbit.len();
    let n = input.n_window as usize;

    let scan = |dir: i64| -> Option<(usize, usize, Vec<S::Point>, Vec<S::Point>)> {
        // Collects f^{dir·1..dir·k}(x), f^{..}(y) as it goes.
        let mut qx = input.x.clone();
        let mut qy = input.y.clone();
        let (mut px, mut py) = (Vec::new(), Vec::new());
        for step in 1..=n {
            let (nx, ny) = if dir < 0 {
                (sys.backward(&qx), sys.backward(&qy))
            } else {
                (sys.forward(&qx), sys.forward(&qy))
            };
            if let Some(s) = first_close(sys, &s_orbit, &nx, &ny, delta) {
                return Some((step, s, px, py));
            }
            px.push(nx.clone());
            py.push(ny.clone());
            qx = nx;
            qy = ny;
        }
        None
    };
    let (k, w_index, bx, by) = scan(-1).ok_or_else(|| {
        Error::WindowTooSmall(format!("no k ≤ {n} with f^-k(x), f^-k(y) δ-close to S (δ = {delta:e})"))
    })?;
    let (l, z_index, fx, fy) = scan(1).ok_or_else(|| {
        Error::WindowTooSmall(format!("no l ≤ {n} with f^l(x), f^l(y) δ-close to S (δ = {delta:e})"))
    })?;

    // z = S[z_index] → … → S[w_index] = w, at least one step.
    let mut j = (w_index + t - z_index) % t;
    if j == 0 {
        j = t;
    }
    let m = j + k + l;

    let assemble = |p: &S::Point, back: &[S::Point], fwd: &[S::Point], far_back: S::Point| -> Vec<S::Point> {
        let mut pts: Vec<S::Point> = (0..j).map(|i| s_orbit[(z_index + i) % t].clone()).collect();
        // f^{-k}(p) itself was not pushed by the scan.
        pts.push(far_back);
        pts.extend(back.iter().rev().cloned());
        pts.push(p.clone());
        pts.extend(fwd.iter().cloned());
        pts.push(s_orbit[z_index].clone());
        pts
    };
    let far_x = sys.iterate(&input.x, -(k as i64));
    let far_y = sys.iterate(&input.y, -(k as i64));
    let px = assemble(&input.x, &bx, &fx, far_x);
    let py = assemble(&input.y, &by, &fy, far_y);
    debug_assert_eq!(px.len(), m + 1);

    let chain_x = Chain::new(sys.system_id(), px, 2.0 * delta)?;
    let chain_y = Chain::new(sys.system_id(), py, 2.0 * delta)?;
    for (name, c) in [("x", &chain_x), ("y", &chain_y)] {
        if !c.is_valid(sys) {
            return Err(Error::Internal(format!(
                "chain through {name} has defect {:e} > 2δ",
                c.max_defect(sys)
            )));
        }
    }
    Ok(TheoremChains {
        k,
        l,
        j,
        m,
        z_index,
        w_index,
        chain_x,
        chain_y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueChoice {
    pub r: usize,
    /// `(1/n_max) Σ_{h=1}^{n_max} |a_{r+hm}|`.
    pub average: f64,
}

/// The residue class mod `m` carrying the most weight at the checkpoints.
///
/// Refuses when even the best class averages below `min_density`.
pub fn select_residue(seq: &SignSequenceSpec, m: usize, n_max: usize, min_density: f64) -> Result<ResidueChoice> {
    if m == 0 || n_max == 0 {
        return Err(Error::Parameter("select_residue needs m ≥ 1 and n_max ≥ 1".into()));
    }
    let a = seq.generate(m + n_max * m);
    let mut best = ResidueChoice { r: 0, average: -1.0 };
    for r in 0..m {
        let sum: f64 = (1..=n_max).map(|h| a[r + h * m].abs()).sum();
        let avg = sum / n_max as f64;
        if avg > best.average {
            best = ResidueChoice { r, average: avg };
        }
    }
    if !(best.average >= min_density) || best.average == 0.0 {
        return Err(Error::hypothesis(
            HypothesisCondition::Density,
            format!(
                "hypothesis limsup > 0 not witnessed at this horizon: best residue average {:e} < {min_density:e} (m = {m}, n_max = {n_max})",
                best.average
            ),
        ));
    }
    Ok(best)
}

/// `Γ` on `[0, r+l+n_max·m]` in compact form, plus its expansion.
pub fn build_gamma<S: BohrSystem>(
    sys: &S,
    input: &Theorem1Input<S::Point>,
    chains: &TheoremChains<S::Point>,
    r: usize,
) -> Result<(GammaWindow, PseudoOrbit<S::Point>)>
where
    S::Point: Serialize + DeserializeOwned,
{
    let m = chains.m;
    let a = input.sequence.generate(r + input.n_max * m + 1);
    let blocks: String = (1..=input.n_max)
        .map(|h| if a[r + h * m] > 0.0 { 'x' } else { 'y' })
        .collect();
    let prefix = r + chains.l;
    let window = GammaWindow {
        delta: chains.chain_x.delta,
        len: prefix + 1 + input.n_max * m,
        z_index: chains.z_index,
        blocks,
    };
    let s_orbit = periodic_orbit(sys, &input.s_base, input.s_period)?;
    let pts = expand_gamma(&s_orbit, &chains.chain_x, &chains.chain_y, &window, prefix, m)?;
    let po = PseudoOrbit::new(sys.system_id(), 0, pts, window.delta);
    if !is_pseudo_orbit(sys, &po)? {
        return Err(Error::Internal(format!(
            "Γ is not a 2δ-pseudo-orbit (defect {:e})",
            po.max_defect(sys)
        )));
    }
    // Checkpoints w_{r+hm} carry x or y as selected.
    let xi = chains.j + chains.k;
    for (h, c) in window.blocks.chars().enumerate() {
        let chain = if c == 'x' { &chains.chain_x } else { &chains.chain_y };
        if po.points[r + (h + 1) * m] != chain.points[xi] {
            return Err(Error::Internal(format!("checkpoint {} is misplaced", h + 1)));
        }
    }
    Ok((window, po))
}

/// Runs the whole construction and returns a certificate whose partial-sum
/// columns agree for every `n ≤ n_max`.
pub fn certify_bohr<S: BohrSystem>(sys: &S, input: &Theorem1Input<S::Point>) -> Result<BohrCertificate<S::Point>>
where
    S::Point: Serialize + DeserializeOwned,
{
    if input.n_max == 0 {
        return Err(Error::Parameter("n_max must be positive".into()));
    }
    let report = verify_theorem1_hypotheses(sys, input)?;
    if let Some(e) = report.refusal() {
        return Err(e);
    }
    let epsilon = report.epsilon;
    if !(epsilon > 0.0) {
        return Err(Error::hypothesis(
            HypothesisCondition::Homoclinic,
            "no admissible ε separates x and y from the rest of E",
        ));
    }
    let delta = sys.bohr_delta(epsilon)?;
    let chains = build_theorem1_chains(sys, input, delta)?;
    let m = chains.m;
    let choice = select_residue(&input.sequence, m, input.n_max, MIN_DENSITY)?;
    let r = choice.r;
    let (window, gamma) = build_gamma(sys, input, &chains, r)?;

    // Guard against chain entries other than x, y falling in their 3ε-balls.
    let spec = BumpFunctionSpec::new(sys, input.x.clone(), input.y.clone(), epsilon)?;
    let xi = chains.j + chains.k;
    for chain in [&chains.chain_x, &chains.chain_y] {
        for (i, p) in chain.points.iter().enumerate() {
            if i == xi {
                continue;
            }
            let d = sys.distance(p, &input.x).min(sys.distance(p, &input.y));
            if d < 3.0 * epsilon {
                return Err(Error::Construction(format!(
                    "chain entry {i} is {d:e} from x or y, inside 3ε = {:e}",
                    3.0 * epsilon
                )));
            }
        }
    }

    let shadow = sys.shadow(&gamma)?;
    let tol = sys.identity_tolerance();
    if shadow.certified_epsilon > epsilon + tol || !is_shadowed_by_orbit(sys, &gamma, &shadow.orbit, 0, epsilon) {
        return Err(Error::Internal(format!(
            "Γ is shadowed only to {:e}, above ε = {epsilon:e}",
            shadow.certified_epsilon
        )));
    }

    let end = r + chains.l + input.n_max * m;
    let a = input.sequence.generate(end);
    let mut weighted = 0.0;
    let mut checkpoint = 0.0;
    let mut rows = Vec::with_capacity(input.n_max);
    for i in 0..end {
        let ph = phi_unchecked(sys, &shadow.orbit[i], &spec);
        let is_cp = i > r && (i - r) % m == 0;
        let expected = if is_cp {
            if a[i] > 0.0 {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        };
        if (ph - expected).abs() > tol {
            return Err(Error::Internal(format!(
                "φ(f^{i} p) = {ph}, expected {expected} (plateau violated)"
            )));
        }
        weighted += a[i] * ph;
        if is_cp {
            checkpoint += a[i].abs();
        }
        if i + 1 > r + chains.l && (i + 1 - r - chains.l) % m == 0 {
            let n = (i + 1 - r - chains.l) / m;
            if (weighted - checkpoint).abs() > tol * (i + 1) as f64 {
                return Err(Error::Internal(format!(
                    "partial-sum identity fails at n = {n}: {weighted} vs {checkpoint}"
                )));
            }
            rows.push(PartialSumRow { n, weighted, checkpoint });
        }
    }
    let checkpoint_average = checkpoint / input.n_max as f64;
    let lower_bound = checkpoint_average / m as f64;

    Ok(BohrCertificate {
        tool_version: crate::TOOL_VERSION.to_string(),
        system: sys.system_spec(),
        sequence: input.sequence.clone(),
        n_window: input.n_window,
        n_max: input.n_max,
        epsilon,
        delta,
        k: chains.k,
        l: chains.l,
        j: chains.j,
        m,
        r,
        s_base: input.s_base.clone(),
        s_period: input.s_period,
        phi: spec,
        chain_x: chains.chain_x,
        chain_y: chains.chain_y,
        gamma_window: window,
        shadow_base: shadow.base,
        shadow_epsilon: shadow.certified_epsilon,
        shadow_orbit: sys.stores_orbit().then_some(shadow.orbit),
        partial_sums: rows,
        checkpoint_average,
        lower_bound,
        tolerances: Tolerances {
            hypothesis: input.tol,
            identity_per_term: tol,
            step: sys.step_tolerance(),
            min_density: MIN_DENSITY,
            cert: crate::CERT_TOL,
        },
        hypotheses: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohr::{default_input_sft, default_input_toral};
    use crate::symbolic::SftSystem;
    use crate::toral::ToralMap;

    #[test]
    fn full_shift_chain_lengths() {
        let sys = SftSystem::full_shift(2);
        let input = default_input_sft(&sys, SignSequenceSpec::constant_one(), 10).unwrap();
        let ch = build_theorem1_chains(&sys, &input, 1.0 / 16.0).unwrap();
        // f^-k(x) and f^-k(y) have their 1s at k (and k+1): 2^-k ≤ 1/16 needs k = 4.
        // f^l(y) has a 1 at 1-l: 2^-(l-1) ≤ 1/16 needs l = 5.
        assert_eq!((ch.k, ch.l, ch.j, ch.m), (4, 5, 1, 10));
        assert_eq!(ch.chain_x.points[ch.j + ch.k], input.x);
        assert_eq!(ch.chain_y.points[ch.j + ch.k], input.y);
        assert_eq!(ch.chain_x.delta, 0.125);
    }

    #[test]
    fn residues() {
        let c = select_residue(&SignSequenceSpec::constant_one(), 7, 50, MIN_DENSITY).unwrap();
        assert_eq!((c.r, c.average), (0, 1.0));
        let p = SignSequenceSpec::periodic(vec![0.0, 1.0, 0.0]).unwrap();
        let c = select_residue(&p, 3, 40, MIN_DENSITY).unwrap();
        assert_eq!((c.r, c.average), (1, 1.0));
        let sq = SignSequenceSpec::sparse_squares();
        assert!(select_residue(&sq, 10, 100, MIN_DENSITY).is_ok());
        let e = select_residue(&sq, 10, 100_000, MIN_DENSITY).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { condition: HypothesisCondition::Density, .. }));
    }

    #[test]
    fn alternating_blocks() {
        let sys = SftSystem::full_shift(2);
        let seq = SignSequenceSpec::periodic(vec![1.0, -1.0]).unwrap();
        let input = default_input_sft(&sys, seq, 6).unwrap();
        let ch = build_theorem1_chains(&sys, &input, 1.0 / 16.0).unwrap();
        let (w, po) = build_gamma(&sys, &input, &ch, 1).unwrap();
        // m = 10 is even, so r + hm keeps the parity of r = 1: all y.
        assert_eq!(w.blocks, "yyyyyy");
        let (w0, _) = build_gamma(&sys, &input, &ch, 0).unwrap();
        assert_eq!(w0.blocks, "xxxxxx");
        assert_eq!(po.len(), 1 + ch.l + 6 * 10 + 1);
    }

    #[test]
    fn full_shift_constant_one_identity() {
        let sys = SftSystem::full_shift(2);
        let input = default_input_sft(&sys, SignSequenceSpec::constant_one(), 200).unwrap();
        let cert = certify_bohr(&sys, &input).unwrap();
        assert_eq!(cert.epsilon, 0.125);
        assert_eq!(cert.delta, 1.0 / 16.0);
        for row in &cert.partial_sums {
            assert_eq!(row.weighted, row.n as f64);
            assert_eq!(row.checkpoint, row.n as f64);
        }
        assert_eq!(cert.lower_bound, 1.0 / cert.m as f64);
        assert!(cert.shadow_orbit.is_none());
    }

    #[test]
    fn cat_identity_to_tolerance() {
        let map = ToralMap::cat();
        let seq = SignSequenceSpec::bernoulli(0.5, 3).unwrap();
        let input = default_input_toral(&map, seq, 100).unwrap();
        let cert = certify_bohr(&map, &input).unwrap();
        let last = cert.partial_sums.last().unwrap();
        assert!((last.weighted - last.checkpoint).abs() <= 1e-9 * 100.0);
        assert_eq!(cert.shadow_orbit.as_ref().unwrap().len(), cert.gamma_window.len);
        assert!(cert.shadow_epsilon <= cert.epsilon);
    }
}
