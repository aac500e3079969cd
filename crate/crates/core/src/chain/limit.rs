use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ChainComponentResult, Discretized, TransitionGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LimitVerdict {
    Component { id: u32 },
    /// The sampled tail meets several components at this resolution.
    Unresolved { ids: Vec<u32> },
}

impl LimitVerdict {
    pub fn component(&self) -> Option<u32> {
        match self {
            LimitVerdict::Component { id } => Some(*id),
            LimitVerdict::Unresolved { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetReport {
    pub n_tail: u64,
    pub resolution: f64,
    pub delta: f64,
    /// Component of the boxes met by `fⁱ(p)`, `N ≤ i ≤ 2N`.
    pub omega: LimitVerdict,
    /// Component of the boxes met by `f⁻ⁱ(p)`, `N ≤ i ≤ 2N`.
    pub alpha: LimitVerdict,
}

fn verdict(ids: BTreeSet<u32>) -> LimitVerdict {
    if ids.len() == 1 {
        LimitVerdict::Component {
            id: *ids.iter().next().expect("one element"),
        }
    } else {
        LimitVerdict::Unresolved {
            ids: ids.into_iter().collect(),
        }
    }
}

/// Maps the forward and backward orbit tails of `p` to chain components.
pub fn limit_set_component<S: Discretized>(
    sys: &S,
    graph: &TransitionGraph,
    comps: &ChainComponentResult,
    p: &S::Point,
    n_tail: u64,
) -> Result<LimitSetReport> {
    if n_tail == 0 {
        return Err(Error::Parameter("tail length must be positive".into()));
    }
    let n = n_tail as i64;
    let tail = |dir: i64| -> Result<BTreeSet<u32>> {
        let mut ids = BTreeSet::new();
        let mut q = sys.iterate(p, dir * n);
        for t in 0..=n {
            let b = sys.locate(&graph.cover, &q).ok_or_else(|| {
                Error::Domain("orbit point lies outside the cover".into())
            })?;
            ids.insert(comps.scc_id[b]);
            if t < n {
                q = if dir > 0 { sys.forward(&q) } else { sys.backward(&q) };
            }
        }
        Ok(ids)
    };
    let omega = verdict(tail(1)?);
    let alpha = verdict(tail(-1)?);
    Ok(LimitSetReport {
        n_tail,
        resolution: graph.cover.resolution,
        delta: graph.delta,
        omega,
        alpha,
    })
}
