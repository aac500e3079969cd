use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The weight sequences `(a_i)_{i ≥ 0}` the certifier understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    ConstantOne,
    /// `a_i = pattern[i mod len]`.
    Periodic { pattern: Vec<f64> },
    /// Independent signs: `+1` with probability `p`, else `-1`.
    Bernoulli { p: f64, seed: u64 },
    /// `a_i = 1` if `i` is a perfect square, else 0.
    SparseSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSequenceSpec {
    #[serde(flatten)]
    pub kind: SequenceKind,
    /// `sup |a_i|`.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: usize,
    /// `(1/n) Σ_{i<n} |a_i|`.
    pub average: f64,
}

fn is_square(i: usize) -> bool {
    let r = (i as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1).any(|s| s * s == i)
}

impl SignSequenceSpec {
    pub fn new(kind: SequenceKind) -> Result<Self> {
        let bound = match &kind {
            SequenceKind::ConstantOne | SequenceKind::SparseSquares => 1.0,
            SequenceKind::Periodic { pattern } => {
                if pattern.is_empty() || pattern.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("periodic pattern must be nonempty and finite".into()));
                }
                pattern.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
            SequenceKind::Bernoulli { p, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Parameter(format!("Bernoulli p = {p} outside [0, 1]")));
                }
                1.0
            }
        };
        Ok(Self { kind, bound })
    }

    pub fn constant_one() -> Self {
        Self::new(SequenceKind::ConstantOne).expect("valid")
    }

    pub fn bernoulli(p: f64, seed: u64) -> Result<Self> {
        Self::new(SequenceKind::Bernoulli { p, seed })
    }

    pub fn periodic(pattern: Vec<f64>) -> Result<Self> {
        Self::new(SequenceKind::Periodic { pattern })
    }

    pub fn sparse_squares() -> Self {
        Self::new(SequenceKind::SparseSquares).expect("valid")
    }

    /// `a_0, …, a_{n-1}`. Prefixes are stable: `generate(n)` starts with `generate(k)` for `k ≤ n`.
    pub fn generate(&self, n: usize) -> Vec<f64> {
        match &self.kind {
            SequenceKind::ConstantOne => vec![1.0; n],
            SequenceKind::Periodic { pattern } => (0..n).map(|i| pattern[i % pattern.len()]).collect(),
            SequenceKind::Bernoulli { p, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| if rng.gen::<f64>() < *p { 1.0 } else { -1.0 })
                    .collect()
            }
            SequenceKind::SparseSquares => (0..n).map(|i| if is_square(i) { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Window averages of `|a_i|` at `n = 1, 2, 4, …, len`.
    pub fn density_report(&self, len: usize) -> Vec<DensityPoint> {
        let a = self.generate(len);
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut next = 1;
        for (i, v) in a.iter().enumerate() {
            acc += v.abs();
            if i + 1 == next || i + 1 == len {
                out.push(DensityPoint {
                    n: i + 1,
                    average: acc / (i + 1) as f64,
                });
                if i + 1 == next {
                    next *= 2;
                }
            }
        }
        out
    }
}

impl fmt::Display for SignSequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SequenceKind::ConstantOne => write!(f, "constant_one"),
            SequenceKind::SparseSquares => write!(f, "sparse_squares"),
            SequenceKind::Bernoulli { p, seed } => write!(f, "bernoulli:p={p},seed={seed}"),
            SequenceKind::Periodic { pattern } => {
                let s: Vec<String> = pattern.iter().map(|v| v.to_string()).collect();
                write!(f, "periodic:{}", s.join(","))
            }
        }
    }
}

/// Parses `constant_one`, `sparse_squares`, `periodic:1,0,0` and
/// `bernoulli:p=0.5,seed=7` (seed defaults to 0).
impl FromStr for SignSequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), a.trim()),
            None => (s.trim(), ""),
        };
        let bad = |why: &str| Error::Parameter(format!("bad sequence '{s}': {why}"));
        match head {
            "constant_one" => Ok(Self::constant_one()),
            "sparse_squares" => Ok(Self::sparse_squares()),
            "periodic" => {
                let pattern = args
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| bad("pattern entries must be numbers")))
                    .collect::<Result<Vec<_>>>()?;
                Self::periodic(pattern)
            }
            "bernoulli" => {
                let mut p = None;
                let mut seed = 0u64;
                for kv in args.split(',').filter(|t| !t.trim().is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    match k.trim() {
                        "p" => p = Some(v.trim().parse::<f64>().map_err(|_| bad("p must be a number"))?),
                        "seed" => seed = v.trim().parse::<u64>().map_err(|_| bad("seed must be an integer"))?,
                        other => return Err(bad(&format!("unknown key '{other}'"))),
                    }
                }
                Self::bernoulli(p.ok_or_else(|| bad("missing p"))?, seed)
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["constant_one", "sparse_squares", "periodic:1,0,0", "bernoulli:p=0.5,seed=7"] {
            let spec: SignSequenceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("bernoulli:p=2".parse::<SignSequenceSpec>().is_err());
        assert!("periodic:".parse::<SignSequenceSpec>().is_err());
        assert!("nope".parse::<SignSequenceSpec>().is_err());
    }

    #[test]
    fn values_respect_bound_and_prefixes() {
        let b = SignSequenceSpec::bernoulli(0.5, 7).unwrap();
        let long = b.generate(1000);
        assert_eq!(&long[..100], &b.generate(100)[..]);
        assert!(long.iter().all(|v| v.abs() <= b.bound));
        let plus = long.iter().filter(|&&v| v > 0.0).count();
        assert!((400..600).contains(&plus));
        let sq = SignSequenceSpec::sparse_squares().generate(17);
        let ones: Vec<usize> = (0..17).filter(|&i| sq[i] == 1.0).collect();
        assert_eq!(ones, vec![0, 1, 4, 9, 16]);
    }

    #[test]
    fn density_ladder() {
        let r = SignSequenceSpec::sparse_squares().density_report(1 << 12);
        assert_eq!(r.first().unwrap().n, 1);
        assert_eq!(r.last().unwrap().n, 1 << 12);
        assert!(r.last().unwrap().average < 0.02);
        let c = SignSequenceSpec::constant_one().density_report(10);
        assert!(c.iter().all(|d| d.average == 1.0));
        assert_eq!(c.last().unwrap().n, 10);
    }
}
