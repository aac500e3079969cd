//! Chain-proximal pairs: `x ∼ y` at scale δ when all four chains `a → b`,
//! `a, b ∈ {x, y}`, exist with one common length `m`.

use serde::{Deserialize, Serialize};

use super::cover::agreement_radius;
use super::{build_transition_graph, tarjan_scc, Discretized, TransitionGraph, MAX_BOXES};
use crate::dynamics::{Chain, MetricSystem};
use crate::error::{Error, Result};
use crate::symbolic::{BiInfSeq, SftSystem};
use crate::toral::{ToralMap, TorusPoint};

/// Default bound on the common chain length.
pub const DEFAULT_M_MAX: usize = 4096;

/// Attached to witnesses found in systems that are not chain transitive.
pub const EXTENSION_NOTE: &str =
    "extension beyond the chain transitive setting: the search ran inside one chain component";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalWitness<P> {
    #[serde(rename = "system")]
    pub system_id: String,
    pub x: P,
    pub y: P,
    /// The smallest requested δ; every chain is a δ-chain for it.
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub m: usize,
    pub chain_xx: Chain<P>,
    pub chain_xy: Chain<P>,
    pub chain_yx: Chain<P>,
    pub chain_yy: Chain<P>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<P> ProximalWitness<P> {
    /// `γ_ab` for `a, b ∈ {x, y}`, selected by `from_y`, `to_y`.
    pub fn chain(&self, from_y: bool, to_y: bool) -> &Chain<P> {
        match (from_y, to_y) {
            (false, false) => &self.chain_xx,
            (false, true) => &self.chain_xy,
            (true, false) => &self.chain_yx,
            (true, true) => &self.chain_yy,
        }
    }

    pub fn chains(&self) -> [&Chain<P>; 4] {
        [&self.chain_xx, &self.chain_xy, &self.chain_yx, &self.chain_yy]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProximalOutcome<P> {
    Found { witness: ProximalWitness<P> },
    NoneFound { pairs_tried: usize, m_max: usize },
}

impl<P> ProximalOutcome<P> {
    pub fn witness(&self) -> Option<&ProximalWitness<P>> {
        match self {
            ProximalOutcome::Found { witness } => Some(witness),
            ProximalOutcome::NoneFound { .. } => None,
        }
    }
}

/// Checks every chain: length `m`, correct end points, `δ`-chain for the
/// smallest requested `δ`.
pub fn verify_proximal_witness<S: MetricSystem>(sys: &S, w: &ProximalWitness<S::Point>) -> bool {
    let min_delta = w.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    w.system_id == sys.system_id()
        && w.delta <= min_delta
        && [(false, false), (false, true), (true, false), (true, true)]
            .into_iter()
            .all(|(a, b)| {
                let c = w.chain(a, b);
                let start = if a { &w.y } else { &w.x };
                let end = if b { &w.y } else { &w.x };
                c.steps() == w.m && c.first() == start && c.last() == end && c.delta <= w.delta && c.is_valid(sys)
            })
}

fn min_delta(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Parameter("δ list must be nonempty and positive".into()));
    }
    Ok(deltas.iter().copied().fold(f64::INFINITY, f64::min))
}

pub trait ProximalSearch: MetricSystem {
    /// Searches a common length `m ≤ m_max` for the pair `(x, y)`.
    fn proximal_witness(
        &self,
        x: &Self::Point,
        y: &Self::Point,
        deltas: &[f64],
        m_max: usize,
    ) -> Result<Option<ProximalWitness<Self::Point>>>;

    /// First pair of distinct candidates (in index order) with a witness valid
    /// for every δ in `deltas`.
    fn find_chain_proximal_pair(
        &self,
        candidates: &[Self::Point],
        deltas: &[f64],
        m_max: usize,
    ) -> Result<ProximalOutcome<Self::Point>> {
        min_delta(deltas)?;
        let mut tried = 0;
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                if candidates[i] == candidates[j] {
                    continue;
                }
                tried += 1;
                if let Some(witness) = self.proximal_witness(&candidates[i], &candidates[j], deltas, m_max)? {
                    return Ok(ProximalOutcome::Found { witness });
                }
            }
        }
        Ok(ProximalOutcome::NoneFound {
            pairs_tried: tried,
            m_max,
        })
    }
}

fn orbit_chain<S: MetricSystem>(sys: &S, x: &S::Point, m: usize, delta: f64) -> Result<Chain<S::Point>> {
    let mut pts = vec![x.clone()];
    for _ in 0..m {
        let next = sys.forward(pts.last().expect("nonempty"));
        pts.push(next);
    }
    Chain::new(sys.system_id(), pts, delta)
}

impl SftSystem {
    fn is_irreducible(&self) -> bool {
        let adj: Vec<Vec<u32>> = (0..self.alphabet_size)
            .map(|a| {
                (0..self.alphabet_size as u8)
                    .filter(|&b| self.allowed(a as u8, b))
                    .map(u32::from)
                    .collect()
            })
            .collect();
        tarjan_scc(&adj).iter().all(|&c| c == 0)
    }

    /// `reach[L][s][t]`: an admissible path of exactly `L` steps from `s` to `t`.
    fn step_reach(&self, prev: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let k = self.alphabet_size;
        let mut next = vec![vec![false; k]; k];
        for s in 0..k {
            for mid in 0..k {
                if prev[s][mid] {
                    for t in 0..k {
                        if self.allowed(mid as u8, t as u8) {
                            next[s][t] = true;
                        }
                    }
                }
            }
        }
        next
    }
}

impl ProximalSearch for SftSystem {
    /// Chains are exact: `x_0 = a`, `x_i = σⁱ(t)` for `0 < i < m`, `x_m = b`,
    /// where `t` copies `a` up to coordinate `q+1`, follows an admissible
    /// path, and copies `σ⁻ᵐ(b)` from coordinate `m-q` on.
    fn proximal_witness(
        &self,
        x: &BiInfSeq,
        y: &BiInfSeq,
        deltas: &[f64],
        m_max: usize,
    ) -> Result<Option<ProximalWitness<BiInfSeq>>> {
        let delta = min_delta(deltas)?;
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::Domain(format!("{p:?} is not a point of {}", self.name)));
            }
        }
        let note = (!self.is_irreducible()).then(|| EXTENSION_NOTE.to_string());
        let make = |m: usize, chains: [Chain<BiInfSeq>; 4]| {
            let [xx, xy, yx, yy] = chains;
            ProximalWitness {
                system_id: self.name.clone(),
                x: x.clone(),
                y: y.clone(),
                delta,
                deltas: deltas.to_vec(),
                m,
                chain_xx: xx,
                chain_xy: xy,
                chain_yx: yx,
                chain_yy: yy,
                note: note.clone(),
            }
        };

        if x == y {
            if let Some(p) = x.period() {
                if p <= m_max {
                    let c = orbit_chain(self, x, p, delta)?;
                    return Ok(Some(make(p, [c.clone(), c.clone(), c.clone(), c])));
                }
            }
        }

        let q = agreement_radius(delta).unwrap_or(0).max(0);
        let ends = |a: &BiInfSeq, b: &BiInfSeq| (a.at(q + 1) as usize, b.at(-q) as usize);
        let pairs = [(x, x), (x, y), (y, x), (y, y)];
        let k = self.alphabet_size;
        let mut reach: Vec<Vec<Vec<bool>>> = vec![(0..k).map(|s| (0..k).map(|t| s == t).collect()).collect()];
        let base = 2 * q as usize + 1;
        let mut len = 0usize;
        loop {
            let m = base + len;
            if m > m_max {
                return Ok(None);
            }
            let r = &reach[len];
            if pairs.iter().all(|(a, b)| {
                let (s, t) = ends(a, b);
                r[s][t]
            }) {
                let mut chains = Vec::with_capacity(4);
                for (a, b) in pairs {
                    let (s, t) = ends(a, b);
                    let mut path = vec![s as u8];
                    for step in 0..len {
                        let cur = *path.last().expect("nonempty");
                        let rem = len - step - 1;
                        let nxt = (0..k)
                            .find(|&d| self.allowed(cur, d as u8) && reach[rem][d][t])
                            .expect("reachability table is consistent");
                        path.push(nxt as u8);
                    }
                    let tpt = BiInfSeq::splice(a, &path, q + 1, &b.shift(-(m as i64)));
                    let mut pts = Vec::with_capacity(m + 1);
                    pts.push(a.clone());
                    for i in 1..m {
                        pts.push(tpt.shift(i as i64));
                    }
                    pts.push(b.clone());
                    let c = Chain::new(self.name.clone(), pts, delta)?;
                    if !c.is_valid(self) {
                        return Err(Error::Internal("constructed symbolic chain is not a δ-chain".into()));
                    }
                    chains.push(c);
                }
                let chains: [Chain<BiInfSeq>; 4] = chains.try_into().expect("four chains");
                return Ok(Some(make(m, chains)));
            }
            let next = self.step_reach(&reach[len]);
            reach.push(next);
            len += 1;
        }
    }
}

/// Boxes reachable from `start` in exactly `t` steps, for `t = 0, 1, …`.
fn layers(graph: &TransitionGraph, start: usize, upto: usize) -> Vec<Vec<bool>> {
    let n = graph.num_boxes();
    let mut out = Vec::with_capacity(upto + 1);
    let mut cur = vec![false; n];
    cur[start] = true;
    out.push(cur);
    for _ in 0..upto {
        let prev = out.last().expect("nonempty");
        let mut next = vec![false; n];
        for (i, on) in prev.iter().enumerate() {
            if *on {
                for &j in graph.successors(i) {
                    next[j as usize] = true;
                }
            }
        }
        out.push(next);
    }
    out
}

fn box_path(graph: &TransitionGraph, rev: &[Vec<u32>], fwd: &[Vec<bool>], target: usize, m: usize) -> Vec<usize> {
    let mut path = vec![target];
    for t in (1..=m).rev() {
        let cur = *path.last().expect("nonempty");
        let prev = rev[cur]
            .iter()
            .map(|&p| p as usize)
            .find(|&p| fwd[t - 1][p])
            .expect("layered reachability is consistent");
        path.push(prev);
    }
    debug_assert!(graph.num_boxes() > 0);
    path.reverse();
    path
}

impl ProximalSearch for ToralMap {
    /// Box-graph search with `δ/2` edges on boxes small enough that chains of
    /// box centers are δ-chains.
    fn proximal_witness(
        &self,
        x: &TorusPoint,
        y: &TorusPoint,
        deltas: &[f64],
        m_max: usize,
    ) -> Result<Option<ProximalWitness<TorusPoint>>> {
        let delta = min_delta(deltas)?;
        let lip = self.lipschitz_bound();
        let n = ((2.0 * lip + 2.0) / delta).ceil() as usize;
        if n.saturating_mul(n) > MAX_BOXES {
            return Err(Error::Budget(format!(
                "δ = {delta} needs a {n}×{n} grid, above the limit {MAX_BOXES} boxes"
            )));
        }
        let graph = build_transition_graph(self, 1.0 / n as f64, delta / 2.0)?;
        let bx = self.locate(&graph.cover, x).expect("grid covers the torus");
        let by = self.locate(&graph.cover, y).expect("grid covers the torus");
        let rev = graph.reversed();
        let mut lx = layers(&graph, bx, 0);
        let mut ly = layers(&graph, by, 0);
        for m in 1..=m_max {
            for (l, _) in [(&mut lx, bx), (&mut ly, by)] {
                let prev = l.last().expect("nonempty");
                let mut next = vec![false; graph.num_boxes()];
                for (i, on) in prev.iter().enumerate() {
                    if *on {
                        for &j in graph.successors(i) {
                            next[j as usize] = true;
                        }
                    }
                }
                l.push(next);
            }
            if !(lx[m][bx] && lx[m][by] && ly[m][bx] && ly[m][by]) {
                continue;
            }
            let mut chains = Vec::with_capacity(4);
            for (a, ba, la) in [(x, bx, &lx), (y, by, &ly)] {
                for (b, bb) in [(x, bx), (y, by)] {
                    let boxes = box_path(&graph, &rev, la, bb, m);
                    let mut pts = vec![a.clone()];
                    pts.extend(boxes[1..m].iter().map(|&i| self.representative(&graph.cover, i)));
                    pts.push(b.clone());
                    debug_assert_eq!(boxes[0], ba);
                    let c = Chain::new(self.name(), pts, delta)?;
                    if !c.is_valid(self) {
                        return Err(Error::Internal(format!(
                            "box path realizes a {}-chain, above δ = {delta}",
                            c.max_defect(self)
                        )));
                    }
                    chains.push(c);
                }
            }
            let [xx, xy, yx, yy]: [Chain<TorusPoint>; 4] = chains.try_into().expect("four chains");
            return Ok(Some(ProximalWitness {
                system_id: self.name().to_string(),
                x: x.clone(),
                y: y.clone(),
                delta,
                deltas: deltas.to_vec(),
                m,
                chain_xx: xx,
                chain_xy: xy,
                chain_yx: yx,
                chain_yy: yy,
                note: None,
            }));
        }
        Ok(None)
    }
}

/// Exact witness for the fixed point `0` and a point `h` homoclinic to it:
/// the chains follow `h`'s orbit until it is δ-close to `0`, wait at `0`, and
/// jump back onto `h`'s orbit where its past is δ-close to `0`.
pub fn homoclinic_proximal_witness(
    map: &ToralMap,
    h: &TorusPoint,
    deltas: &[f64],
    max_steps: usize,
) -> Result<ProximalWitness<TorusPoint>> {
    let delta = min_delta(deltas)?;
    if !h.is_exact() {
        return Err(Error::Domain("homoclinic point must be exact".into()));
    }
    let zero = TorusPoint::origin();
    if *h == zero {
        return Err(Error::Domain("homoclinic point must differ from the fixed point".into()));
    }
    let first_close = |backward: bool| -> Result<(usize, Vec<TorusPoint>)> {
        let mut pts = vec![h.clone()];
        for s in 1..=max_steps {
            let last = pts.last().expect("nonempty");
            let next = if backward { map.backward(last) } else { map.forward(last) };
            if map.distance(&next, &zero) <= delta {
                return Ok((s, pts));
            }
            pts.push(next);
        }
        Err(Error::WindowTooSmall(format!(
            "orbit of h does not come within δ = {delta} of 0 in {max_steps} steps"
        )))
    };
    // f^{-k} h is δ-close to 0; f^{l+1} h is δ-close to 0.
    let (k, mut past) = first_close(true)?;
    let past_k = map.backward(past.last().expect("nonempty"));
    past.push(past_k);
    past.reverse(); // f^{-k} h, …, h
    let (l1, future) = first_close(false)?; // future = h, …, f^{l} h
    let l = l1 - 1;
    let m = k + l + 2;

    let zeros = |c: usize| vec![zero.clone(); c];
    let mk = |pts: Vec<TorusPoint>| {
        debug_assert_eq!(pts.len(), m + 1);
        Chain::new(map.name(), pts, delta)
    };
    let xx = mk(zeros(m + 1))?;
    let xy = mk([zeros(m - k), past.clone()].concat())?;
    let yx = mk([future.clone(), zeros(m - l)].concat())?;
    let yy = mk([future, zeros(m - l - k - 1), past].concat())?;
    let w = ProximalWitness {
        system_id: map.name().to_string(),
        x: zero,
        y: h.clone(),
        delta,
        deltas: deltas.to_vec(),
        m,
        chain_xx: xx,
        chain_xy: xy,
        chain_yx: yx,
        chain_yy: yy,
        note: None,
    };
    if !verify_proximal_witness(map, &w) {
        return Err(Error::Internal("homoclinic witness failed verification".into()));
    }
    Ok(w)
}
