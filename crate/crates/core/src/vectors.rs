//! Finitely supported vectors, index intervals, and block sequences.

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::arith::{format_rat, parse_rat, Rat};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("range of the zero vector is undefined")]
    ZeroVectorRange,
    #[error("positions must be >= 1, got {0}")]
    ZeroPosition(u64),
    #[error("positions must be strictly increasing, got {0} after {1}")]
    NonIncreasingPositions(u64, u64),
    #[error("blocks are not strictly successive: block {0} overlaps or precedes block {1}")]
    NotSuccessive(usize, usize),
    #[error("malformed vector: {0}")]
    Malformed(String),
}

/// Element of c00: a finite map from 1-based positions to nonzero rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteVector {
    entries: BTreeMap<u64, Rat>,
}

/// A closed integer interval `[lo, hi]`, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInterval {
    pub lo: u64,
    pub hi: u64,
}

impl IndexInterval {
    pub fn new(lo: u64, hi: u64) -> Self {
        assert!(lo >= 1 && lo <= hi, "invalid interval [{lo}, {hi}]");
        IndexInterval { lo, hi }
    }

    pub fn contains(&self, pos: u64) -> bool {
        self.lo <= pos && pos <= self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `E < F` in the paper's sense: every index of `self` precedes `F`.
    pub fn before(&self, other: &IndexInterval) -> bool {
        self.hi < other.lo
    }
}

impl fmt::Display for IndexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl FiniteVector {
    pub fn zero() -> Self {
        FiniteVector { entries: BTreeMap::new() }
    }

    /// Build from (position, coefficient) pairs; zero coefficients are
    /// dropped, repeated positions are summed.
    pub fn from_entries(
        pairs: impl IntoIterator<Item = (u64, Rat)>,
    ) -> Result<Self, VectorError> {
        let mut entries: BTreeMap<u64, Rat> = BTreeMap::new();
        for (pos, c) in pairs {
            if pos == 0 {
                return Err(VectorError::ZeroPosition(pos));
            }
            let slot = entries.entry(pos).or_insert_with(Rat::zero);
            *slot += c;
            if slot.is_zero() {
                entries.remove(&pos);
            }
        }
        Ok(FiniteVector { entries })
    }

    /// Unit vector `e_pos`.
    pub fn unit(pos: u64) -> Self {
        assert!(pos >= 1);
        let mut entries = BTreeMap::new();
        entries.insert(pos, Rat::from_integer(1.into()));
        FiniteVector { entries }
    }

    /// Dense construction: `coeffs[i]` goes to position `start + i`.
    pub fn dense(start: u64, coeffs: impl IntoIterator<Item = Rat>) -> Self {
        let pairs = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| (start + i as u64, c));
        Self::from_entries(pairs).expect("start >= 1 required")
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, pos: u64) -> Rat {
        self.entries.get(&pos).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rat)> + '_ {
        self.entries.iter().map(|(p, c)| (*p, c))
    }

    pub fn support(&self) -> Vec<u64> {
        self.entries.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn range(&self) -> Result<IndexInterval, VectorError> {
        let lo = *self.entries.keys().next().ok_or(VectorError::ZeroVectorRange)?;
        let hi = *self.entries.keys().next_back().unwrap();
        Ok(IndexInterval { lo, hi })
    }

    pub fn restrict(&self, interval: &IndexInterval) -> FiniteVector {
        FiniteVector {
            entries: self
                .entries
                .range(interval.lo..=interval.hi)
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &FiniteVector) -> FiniteVector {
        let mut entries = self.entries.clone();
        for (p, c) in &other.entries {
            let slot = entries.entry(*p).or_insert_with(Rat::zero);
            *slot += c;
            if slot.is_zero() {
                entries.remove(p);
            }
        }
        FiniteVector { entries }
    }

    pub fn sub(&self, other: &FiniteVector) -> FiniteVector {
        self.add(&other.scale(&-Rat::from_integer(1.into())))
    }

    pub fn scale(&self, c: &Rat) -> FiniteVector {
        if c.is_zero() {
            return FiniteVector::zero();
        }
        FiniteVector {
            entries: self.entries.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }

    /// Shift all positions right by `k` (the 1-spreading move).
    pub fn shift(&self, k: u64) -> FiniteVector {
        FiniteVector {
            entries: self.entries.iter().map(|(p, v)| (p + k, v.clone())).collect(),
        }
    }

    /// Place the coefficients, in support order, at the given positions.
    pub fn spread_to(&self, positions: &[u64]) -> Result<FiniteVector, VectorError> {
        if positions.len() != self.entries.len() {
            return Err(VectorError::Malformed(format!(
                "spread_to needs {} positions, got {}",
                self.entries.len(),
                positions.len()
            )));
        }
        let mut prev = 0u64;
        for &p in positions {
            if p == 0 {
                return Err(VectorError::ZeroPosition(p));
            }
            if p <= prev {
                return Err(VectorError::NonIncreasingPositions(p, prev));
            }
            prev = p;
        }
        Ok(FiniteVector {
            entries: positions
                .iter()
                .copied()
                .zip(self.entries.values().cloned())
                .collect(),
        })
    }

    pub fn same_distribution(&self, other: &FiniteVector) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .values()
                .zip(other.entries.values())
                .all(|(a, b)| a == b)
    }

    /// Absolute coefficients sorted descending.
    pub fn decreasing_rearrangement(&self) -> Vec<Rat> {
        let mut v: Vec<Rat> = self.entries.values().map(|c| c.abs()).collect();
        v.sort_by(|a, b| b.cmp(a));
        v
    }

    pub fn l1_norm(&self) -> Rat {
        self.entries.values().map(|c| c.abs()).sum()
    }

    pub fn sup_norm(&self) -> Rat {
        self.entries
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,value\n");
        for (p, c) in &self.entries {
            out.push_str(&format!("{p},{}\n", format_rat(c)));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self, VectorError> {
        let mut pairs = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("position,value")) {
                continue;
            }
            let (p, v) = line
                .split_once(',')
                .ok_or_else(|| VectorError::Malformed(format!("bad CSV row {line:?}")))?;
            let pos: u64 = p
                .trim()
                .parse()
                .map_err(|_| VectorError::Malformed(format!("bad position {p:?}")))?;
            let coeff = parse_rat(v.trim())
                .map_err(|e| VectorError::Malformed(e.to_string()))?;
            pairs.push((pos, coeff));
        }
        Self::from_entries(pairs)
    }
}

impl fmt::Display for FiniteVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, c)| format!("{}·e{}", format_rat(c), p))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for FiniteVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            entries: Vec<(u64, String)>,
        }
        Repr {
            entries: self.entries.iter().map(|(p, c)| (*p, format_rat(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            entries: Vec<(u64, String)>,
        }
        let repr = Repr::deserialize(d)?;
        let mut prev = 0u64;
        for (p, _) in &repr.entries {
            if *p <= prev {
                return Err(D::Error::custom(format!(
                    "positions must be strictly increasing, got {p} after {prev}"
                )));
            }
            prev = *p;
        }
        let pairs: Result<Vec<(u64, Rat)>, _> = repr
            .entries
            .into_iter()
            .map(|(p, s)| parse_rat(&s).map(|r| (p, r)))
            .collect();
        FiniteVector::from_entries(pairs.map_err(D::Error::custom)?)
            .map_err(D::Error::custom)
    }
}

/// Strictly successive blocks: `ran(x_i) < ran(x_{i+1})`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSequence {
    blocks: Vec<FiniteVector>,
}

impl BlockSequence {
    pub fn new(blocks: Vec<FiniteVector>) -> Result<Self, VectorError> {
        for i in 1..blocks.len() {
            let prev = blocks[i - 1].range().map_err(|_| {
                VectorError::Malformed(format!("block {} is the zero vector", i - 1))
            })?;
            let cur = blocks[i].range().map_err(|_| {
                VectorError::Malformed(format!("block {i} is the zero vector"))
            })?;
            if !prev.before(&cur) {
                return Err(VectorError::NotSuccessive(i - 1, i));
            }
        }
        Ok(BlockSequence { blocks })
    }

    pub fn blocks(&self) -> &[FiniteVector] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn sum(&self) -> FiniteVector {
        self.blocks
            .iter()
            .fold(FiniteVector::zero(), |acc, b| acc.add(b))
    }
}
