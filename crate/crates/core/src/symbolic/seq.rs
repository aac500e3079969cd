use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An eventually periodic point of `A^ℤ`:
/// `⋯ L L L · core · R R R ⋯`, with `core[0]` sitting at coordinate `-offset`.
///
/// Values are always kept in canonical form (primitive periods, minimal core,
/// canonical phase), so structural equality is equality of the represented
/// sequences. Words are shared, so shifting is O(1) for non-periodic points.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BiInfSeq {
    left: Arc<[u8]>,
    core: Arc<[u8]>,
    right: Arc<[u8]>,
    offset: i64,
}

fn primitive_root(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    for p in 1..=n {
        if n % p == 0 && (p..n).all(|i| w[i] == w[i - p]) {
            return w[..p].to_vec();
        }
    }
    w.to_vec()
}

/// `2⁻ᵏ`, exact for every `k` a finite scan can produce.
pub fn dyadic(k: u64) -> f64 {
    if k > 1074 {
        0.0
    } else {
        2f64.powi(-(k as i32))
    }
}

impl BiInfSeq {
    /// Builds and canonicalizes `⋯ left left · core · right right ⋯` with
    /// `core[0]` at coordinate `-offset`.
    pub fn new(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, offset: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::Domain("periodic words must be nonempty".into()));
        }
        Ok(Self::canonical(left, core, right, -offset))
    }

    /// The constant sequence `s^∞`.
    pub fn constant(s: u8) -> Self {
        Self::canonical(vec![s], vec![], vec![s], 0)
    }

    /// The periodic point `w^∞` with `w[0]` at coordinate 0.
    pub fn periodic(word: &[u8]) -> Result<Self> {
        Self::new(word.to_vec(), vec![], word.to_vec(), 0)
    }

    /// `background^∞` with `word` written starting at coordinate `start`.
    pub fn with_word(background: u8, word: &[u8], start: i64) -> Self {
        Self::canonical(vec![background], word.to_vec(), vec![background], start)
    }

    /// Coordinates `< at` from `left_src`, then `middle` on
    /// `[at, at + middle.len())`, then `right_src` from there on.
    pub fn splice(left_src: &BiInfSeq, middle: &[u8], at: i64, right_src: &BiInfSeq) -> Self {
        let end = at + middle.len() as i64;

        let cut_l = at.min(left_src.start());
        let p = left_src.left.len() as i64;
        let left: Vec<u8> = (0..p).map(|t| left_src.at(cut_l - p + t)).collect();
        let mut core: Vec<u8> = (cut_l..at).map(|i| left_src.at(i)).collect();
        core.extend_from_slice(middle);

        let cut_r = end.max(right_src.core_end());
        core.extend((end..cut_r).map(|i| right_src.at(i)));
        let q = right_src.right.len() as i64;
        let right: Vec<u8> = (0..q).map(|t| right_src.at(cut_r + t)).collect();

        Self::canonical(left, core, right, cut_l)
    }

    fn canonical(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, start: i64) -> Self {
        let mut left = primitive_root(&left);
        let mut right = primitive_root(&right);
        let mut core = core;
        let mut start = start;

        // Pull the right periodic tail as far left as it goes.
        while let Some(&c) = core.last() {
            if c != *right.last().expect("nonempty") {
                break;
            }
            core.pop();
            right.rotate_right(1);
        }

        if core.is_empty() {
            if left == right {
                // Globally periodic: pin the phase at coordinate 0.
                let p = right.len() as i64;
                let shift = start.rem_euclid(p) as usize;
                let mut w = right.clone();
                w.rotate_right(shift);
                return Self::assemble(w.clone(), vec![], w, 0);
            }
            let guard = left.len().lcm(&right.len());
            let mut steps = 0;
            while left.last() == right.last() {
                left.rotate_right(1);
                right.rotate_right(1);
                start -= 1;
                steps += 1;
                debug_assert!(steps <= guard, "non-periodic tails cannot agree for a full common period");
                if steps > guard {
                    break;
                }
            }
        } else {
            // Pull the left periodic tail as far right as it goes.
            let mut drop = 0;
            while drop < core.len() && core[drop] == left[0] {
                left.rotate_left(1);
                drop += 1;
            }
            core.drain(..drop);
            start += drop as i64;
        }
        Self::assemble(left, core, right, start)
    }

    fn assemble(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, start: i64) -> Self {
        Self {
            left: left.into(),
            core: core.into(),
            right: right.into(),
            offset: -start,
        }
    }

    /// Coordinate of `core[0]`.
    fn start(&self) -> i64 {
        -self.offset
    }

    /// First coordinate of the right periodic tail.
    fn core_end(&self) -> i64 {
        self.start() + self.core.len() as i64
    }

    pub fn left_period(&self) -> &[u8] {
        &self.left
    }

    pub fn core(&self) -> &[u8] {
        &self.core
    }

    pub fn right_period(&self) -> &[u8] {
        &self.right
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// The symbol `x_i`.
    pub fn at(&self, i: i64) -> u8 {
        let s = self.start();
        if i < s {
            let l = self.left.len() as i64;
            self.left[(i - s).rem_euclid(l) as usize]
        } else if i < self.core_end() {
            self.core[(i - s) as usize]
        } else {
            let r = self.right.len() as i64;
            self.right[(i - self.core_end()).rem_euclid(r) as usize]
        }
    }

    /// Symbols on `[from, to]`.
    pub fn word(&self, from: i64, to: i64) -> Vec<u8> {
        (from..=to).map(|i| self.at(i)).collect()
    }

    pub fn is_periodic(&self) -> bool {
        self.core.is_empty() && self.left == self.right
    }

    /// Minimal period if the point is periodic.
    pub fn period(&self) -> Option<usize> {
        self.is_periodic().then(|| self.right.len())
    }

    /// `σⁿ(x)`, where `σ(x)_i = x_{i+1}`.
    pub fn shift(&self, n: i64) -> Self {
        if self.is_periodic() {
            let p = self.right.len() as i64;
            let mut w = self.right.to_vec();
            w.rotate_left(n.rem_euclid(p) as usize);
            let w: Arc<[u8]> = w.into();
            Self {
                left: w.clone(),
                core: self.core.clone(),
                right: w,
                offset: 0,
            }
        } else {
            Self {
                left: self.left.clone(),
                core: self.core.clone(),
                right: self.right.clone(),
                offset: self.offset + n,
            }
        }
    }

    /// Largest symbol appearing anywhere in the sequence.
    pub fn max_symbol(&self) -> u8 {
        self.left
            .iter()
            .chain(self.core.iter())
            .chain(self.right.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Every adjacent symbol pair occurring in the sequence (with repeats).
    pub fn adjacent_pairs(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        let cyc = |w: &[u8], out: &mut Vec<(u8, u8)>| {
            for i in 0..w.len() {
                out.push((w[i], w[(i + 1) % w.len()]));
            }
        };
        cyc(&self.left, &mut out);
        cyc(&self.right, &mut out);
        let mut seq: Vec<u8> = vec![*self.left.last().expect("nonempty")];
        seq.extend_from_slice(&self.core);
        seq.push(self.right[0]);
        for w in seq.windows(2) {
            out.push((w[0], w[1]));
        }
        out
    }

    /// Smallest `k ≥ 0` with `x_k ≠ y_k` or `x_{-k} ≠ y_{-k}`; `None` if equal.
    pub fn first_disagreement(&self, other: &BiInfSeq) -> Option<u64> {
        if self == other {
            return None;
        }
        // Beyond these bounds both sequences run through their periodic tails,
        // so one common period without disagreement means none ever.
        let r_lcm = self.right.len().lcm(&other.right.len()) as i64;
        let l_lcm = self.left.len().lcm(&other.left.len()) as i64;
        let hi = self.core_end().max(other.core_end()).max(0) + r_lcm;
        let lo = self.start().min(other.start()).min(0) - l_lcm;
        let reach = hi.max(-lo);
        (0..=reach)
            .find(|&k| self.at(k) != other.at(k) || self.at(-k) != other.at(-k))
            .map(|k| k as u64)
    }
}

/// `d(x, y) = 2⁻ᵏ` with `k = min{|i| : x_i ≠ y_i}`, and 0 for equal points.
pub fn shift_metric(x: &BiInfSeq, y: &BiInfSeq) -> f64 {
    match x.first_disagreement(y) {
        None => 0.0,
        Some(k) => dyadic(k),
    }
}

pub(crate) fn symbol_char(s: u8) -> char {
    std::char::from_digit(s as u32, 36).expect("alphabet up to 36 symbols")
}

fn encode_word(w: &[u8]) -> String {
    w.iter().map(|&s| symbol_char(s)).collect()
}

fn decode_word(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Input(format!("bad symbol '{c}'")))
        })
        .collect()
}

impl fmt::Debug for BiInfSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // ⋯(L)[core](R)⋯ @offset
        write!(
            f,
            "({})^∞[{}]({})^∞@{}",
            encode_word(&self.left),
            encode_word(&self.core),
            encode_word(&self.right),
            self.offset
        )
    }
}

#[derive(Serialize, Deserialize)]
struct SeqJson {
    left_period: String,
    core: String,
    right_period: String,
    offset: i64,
}

impl Serialize for BiInfSeq {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeqJson {
            left_period: encode_word(&self.left),
            core: encode_word(&self.core),
            right_period: encode_word(&self.right),
            offset: self.offset,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BiInfSeq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = SeqJson::deserialize(deserializer)?;
        let parse = |s: &str| decode_word(s).map_err(D::Error::custom);
        BiInfSeq::new(parse(&j.left_period)?, parse(&j.core)?, parse(&j.right_period)?, j.offset)
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms_agree() {
        let a = BiInfSeq::new(vec![0, 0], vec![0, 1, 0], vec![0], 2).unwrap();
        let b = BiInfSeq::with_word(0, &[1], -1);
        assert_eq!(a, b);
        assert_eq!(a.at(-1), 1);
        assert_eq!(a.at(0), 0);
        let p1 = BiInfSeq::new(vec![0, 1], vec![0, 1, 0, 1], vec![0, 1, 0, 1], 3).unwrap();
        let p2 = BiInfSeq::periodic(&[1, 0]).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.is_periodic());
        assert_eq!(p1.period(), Some(2));
    }

    #[test]
    fn overlapping_tails_are_canonical() {
        // ⋯0000 1 0101⋯ seen two different ways.
        let a = BiInfSeq::new(vec![0], vec![0, 1], vec![0, 1], 0).unwrap();
        let b = BiInfSeq::new(vec![0], vec![], vec![0, 1], 0).unwrap();
        assert_eq!(a, b);
        for i in -10..10 {
            assert_eq!(a.at(i), if i >= 0 && i % 2 == 1 { 1 } else { 0 });
        }
    }

    #[test]
    fn shift_moves_coordinates() {
        let x = BiInfSeq::with_word(0, &[1, 1], 0);
        let sx = x.shift(1);
        for i in -5..5 {
            assert_eq!(sx.at(i), x.at(i + 1));
        }
        assert_eq!(x.shift(3).shift(-3), x);
        let p = BiInfSeq::periodic(&[0, 1, 1]).unwrap();
        assert_eq!(p.shift(3), p);
        assert_eq!(p.shift(1).at(0), 1);
    }

    #[test]
    fn metric_examples() {
        let z = BiInfSeq::constant(0);
        assert_eq!(shift_metric(&z, &z), 0.0);
        assert_eq!(shift_metric(&z, &BiInfSeq::with_word(0, &[1], 0)), 1.0);
        assert_eq!(shift_metric(&z, &BiInfSeq::with_word(0, &[1], 3)), 0.125);
        assert_eq!(shift_metric(&z, &BiInfSeq::with_word(0, &[1], -3)), 0.125);
    }

    #[test]
    fn splice_takes_each_side() {
        let zeros = BiInfSeq::constant(0);
        let ones = BiInfSeq::constant(1);
        let s = BiInfSeq::splice(&zeros, &[1, 0, 1], -1, &ones);
        for i in -6..6 {
            let want = match i {
                i if i < -1 => 0,
                -1 => 1,
                0 => 0,
                1 => 1,
                _ => 1,
            };
            assert_eq!(s.at(i), want, "coordinate {i}");
        }
    }

    #[test]
    fn json_round_trip() {
        let x = BiInfSeq::new(vec![0, 1], vec![1, 1, 0], vec![0], 1).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: BiInfSeq = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert!(s.contains("left_period"));
    }
}
