//! Chain recurrence at finite granularity.
//!
//! The state space is covered by boxes (cylinders for shifts, grid squares on
//! the torus); box `i → j` is an edge when some `δ`-step leads from box `i`
//! into box `j`. Chain components are then strongly connected components of
//! that graph, always reported together with the resolution and `δ` they were
//! computed at.

mod cover;
mod limit;
mod proximal;
mod scc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::MetricSystem;
use crate::error::{Error, Result};

pub use limit::{limit_set_component, LimitSetReport, LimitVerdict};
pub use proximal::{
    homoclinic_proximal_witness, verify_proximal_witness, ProximalOutcome, ProximalSearch, ProximalWitness,
    DEFAULT_M_MAX, EXTENSION_NOTE,
};
pub use scc::tarjan_scc;

/// Largest number of boxes a cover may have.
pub const MAX_BOXES: usize = 1 << 20;

/// The cells of a cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cells {
    /// Cylinders `[w]` fixing coordinates `first..first + depth`, sorted
    /// lexicographically.
    Cylinders {
        depth: usize,
        first: i64,
        alphabet: usize,
        words: Vec<Vec<u8>>,
    },
    /// Squares of side `1/n`; box `ix·n + iy` is `[ix/n, (ix+1)/n) × [iy/n, (iy+1)/n)`.
    Grid { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCover {
    pub system_id: String,
    pub resolution: f64,
    pub cells: Cells,
}

impl BoxCover {
    pub fn len(&self) -> usize {
        match &self.cells {
            Cells::Cylinders { words, .. } => words.len(),
            Cells::Grid { n } => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper bound on the diameter of every box.
    pub fn box_diameter(&self) -> f64 {
        match &self.cells {
            Cells::Cylinders { depth, first, .. } => {
                // Points of one cylinder agree on [-k, k] with k as below.
                let k = (-first).min(*first + *depth as i64 - 1);
                if k < 0 {
                    1.0
                } else {
                    crate::symbolic::dyadic(k as u64 + 1)
                }
            }
            Cells::Grid { n } => 1.0 / *n as f64,
        }
    }

    /// A planar position for plotting: the square's center on the torus, or
    /// the future/past halves of the cylinder word read as base-`n` fractions.
    pub fn center(&self, i: usize) -> [f64; 2] {
        match &self.cells {
            Cells::Grid { n } => {
                let n = *n;
                [((i / n) as f64 + 0.5) / n as f64, ((i % n) as f64 + 0.5) / n as f64]
            }
            Cells::Cylinders {
                words, first, alphabet, ..
            } => {
                let w = &words[i];
                let base = *alphabet as f64;
                let (mut fx, mut sx) = (0.0, 1.0 / base);
                let (mut fy, mut sy) = (0.0, 1.0 / base);
                for (t, &s) in w.iter().enumerate() {
                    if first + t as i64 >= 0 {
                        fx += s as f64 * sx;
                        sx /= base;
                    }
                }
                for (t, &s) in w.iter().enumerate().rev() {
                    if first + (t as i64) < 0 {
                        fy += s as f64 * sy;
                        sy /= base;
                    }
                }
                [fx + sx * base / 2.0, fy + sy * base / 2.0]
            }
        }
    }

    pub fn label(&self, i: usize) -> String {
        match &self.cells {
            Cells::Grid { n } => format!("{},{}", i / n, i % n),
            Cells::Cylinders { words, .. } => words[i].iter().map(|&s| crate::symbolic::symbol_char(s)).collect(),
        }
    }
}

/// Systems that can be discretized into a box cover.
pub trait Discretized: MetricSystem {
    fn build_cover(&self, resolution: f64) -> Result<BoxCover>;

    /// Boxes `j` such that some `p` in box `i` has `d(f(p), q) ≤ δ` for some
    /// `q` in box `j`. May over-approximate, never under-approximates.
    fn box_successors(&self, cover: &BoxCover, i: usize, delta: f64) -> Vec<u32>;

    fn locate(&self, cover: &BoxCover, p: &Self::Point) -> Option<usize>;

    /// Some point of box `i`.
    fn representative(&self, cover: &BoxCover, i: usize) -> Self::Point;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionGraph {
    pub cover: BoxCover,
    pub delta: f64,
    pub adjacency: Vec<Vec<u32>>,
}

impl TransitionGraph {
    pub fn num_boxes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn reversed(&self) -> Vec<Vec<u32>> {
        let mut rev = vec![Vec::new(); self.num_boxes()];
        for (i, succ) in self.adjacency.iter().enumerate() {
            for &j in succ {
                rev[j as usize].push(i as u32);
            }
        }
        rev
    }

    /// Every box has an outgoing and an incoming edge.
    pub fn degrees_ok(&self) -> bool {
        let mut has_in = vec![false; self.num_boxes()];
        for succ in &self.adjacency {
            for &j in succ {
                has_in[j as usize] = true;
            }
        }
        self.adjacency.iter().all(|s| !s.is_empty()) && has_in.into_iter().all(|b| b)
    }

    /// Defect bound for chains of box representatives along a graph path:
    /// `δ + (L + 1)·diam`.
    pub fn path_slack(&self, lipschitz: f64) -> f64 {
        self.delta + (lipschitz + 1.0) * self.cover.box_diameter()
    }
}

pub fn build_transition_graph<S: Discretized>(sys: &S, resolution: f64, delta: f64) -> Result<TransitionGraph> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!("δ must be non-negative, got {delta}")));
    }
    let cover = sys.build_cover(resolution)?;
    let adjacency: Vec<Vec<u32>> = (0..cover.len())
        .into_par_iter()
        .map(|i| {
            let mut s = sys.box_successors(&cover, i, delta);
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    Ok(TransitionGraph {
        cover,
        delta,
        adjacency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub id: u32,
    pub size: usize,
    /// Contains a cycle (more than one box, or a self-loop).
    pub recurrent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainComponentResult {
    pub system_id: String,
    pub resolution: f64,
    pub delta: f64,
    /// Component id of every box; ids are ordered by smallest member box.
    pub scc_id: Vec<u32>,
    pub components: Vec<ComponentInfo>,
    /// Boxes lying in recurrent components.
    pub recurrent: Vec<u32>,
}

impl ChainComponentResult {
    pub fn recurrent_components(&self) -> impl Iterator<Item = &ComponentInfo> {
        self.components.iter().filter(|c| c.recurrent)
    }

    pub fn num_recurrent_components(&self) -> usize {
        self.recurrent_components().count()
    }
}

pub fn chain_components(graph: &TransitionGraph) -> ChainComponentResult {
    let scc_id = tarjan_scc(&graph.adjacency);
    let count = scc_id.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut sizes = vec![0usize; count];
    for &c in &scc_id {
        sizes[c as usize] += 1;
    }
    let mut recurrent_comp = vec![false; count];
    for (i, succ) in graph.adjacency.iter().enumerate() {
        let c = scc_id[i] as usize;
        if sizes[c] > 1 || succ.binary_search(&(i as u32)).is_ok() {
            recurrent_comp[c] = true;
        }
    }
    let components = (0..count)
        .map(|c| ComponentInfo {
            id: c as u32,
            size: sizes[c],
            recurrent: recurrent_comp[c],
        })
        .collect();
    let recurrent = (0..scc_id.len())
        .filter(|&i| recurrent_comp[scc_id[i] as usize])
        .map(|i| i as u32)
        .collect();
    ChainComponentResult {
        system_id: graph.cover.system_id.clone(),
        resolution: graph.cover.resolution,
        delta: graph.delta,
        scc_id,
        components,
        recurrent,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    /// The graph is one strongly connected component containing a cycle.
    pub transitive: bool,
    pub resolution: f64,
    pub delta: f64,
    pub boxes: usize,
    pub components: usize,
    pub recurrent_boxes: usize,
    pub caveat: String,
}

pub fn is_chain_transitive<S: Discretized>(sys: &S, resolution: f64, delta: f64) -> Result<TransitivityReport> {
    let graph = build_transition_graph(sys, resolution, delta)?;
    let comps = chain_components(&graph);
    let transitive = comps.components.len() == 1 && comps.components[0].recurrent;
    Ok(TransitivityReport {
        transitive,
        resolution,
        delta,
        boxes: graph.num_boxes(),
        components: comps.components.len(),
        recurrent_boxes: comps.recurrent.len(),
        caveat: format!(
            "verdict at box granularity {resolution} and δ = {delta}; finer covers may split components"
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub resolution: f64,
    pub boxes: usize,
    pub recurrent_components: usize,
    pub recurrent_boxes: usize,
    /// Fraction of boxes that are recurrent.
    pub recurrent_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLadder {
    pub delta: f64,
    pub rungs: Vec<LadderRung>,
    /// Recurrent fraction never grows along the ladder.
    pub monotone: bool,
}

/// Recomputes chain components on successively finer covers.
pub fn refinement_ladder<S: Discretized>(sys: &S, resolutions: &[f64], delta: f64) -> Result<RefinementLadder> {
    let mut rungs = Vec::with_capacity(resolutions.len());
    for &r in resolutions {
        let g = build_transition_graph(sys, r, delta)?;
        let c = chain_components(&g);
        rungs.push(LadderRung {
            resolution: r,
            boxes: g.num_boxes(),
            recurrent_components: c.num_recurrent_components(),
            recurrent_boxes: c.recurrent.len(),
            recurrent_fraction: c.recurrent.len() as f64 / g.num_boxes() as f64,
        });
    }
    let monotone = rungs
        .windows(2)
        .all(|w| w[1].recurrent_fraction <= w[0].recurrent_fraction + 1e-12);
    Ok(RefinementLadder { delta, rungs, monotone })
}

/// Adjacency JSON with component ids.
pub fn graph_json(graph: &TransitionGraph, comps: &ChainComponentResult) -> Value {
    json!({
        "system": graph.cover.system_id,
        "resolution": graph.cover.resolution,
        "delta": graph.delta,
        "box_diameter": graph.cover.box_diameter(),
        "boxes": graph.num_boxes(),
        "edges": graph.num_edges(),
        "cover": graph.cover.cells,
        "adjacency": graph.adjacency,
        "scc_id": comps.scc_id,
        "components": comps.components,
        "recurrent_boxes": comps.recurrent.len(),
    })
}

/// Plot-ready CSV: `box_id,center_x,center_y,scc_id`.
pub fn graph_csv(graph: &TransitionGraph, comps: &ChainComponentResult) -> String {
    let mut out = String::from("box_id,center_x,center_y,scc_id\n");
    for i in 0..graph.num_boxes() {
        let c = graph.cover.center(i);
        out.push_str(&format!("{i},{:.9},{:.9},{}\n", c[0], c[1], comps.scc_id[i]));
    }
    out
}
