//! Complementary-pair subsample plans.
//!
//! A plan is B independent pairs of disjoint index sets over {0, ..., n-1},
//! each of size floor(n/2) (per class for the stratified variant, where any
//! leftover index is simply left out of that pair). Pair j is drawn from
//! stream j of a counter-based generator seeded with the recorded 64-bit
//! seed, so plans are reproducible and pairs can be generated independently.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// B disjoint complementary subsample pairs over {0, ..., n-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsamplePlan {
    n: usize,
    seed: u64,
    stratified: bool,
    pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

/// RNG for stream `stream` of the seed/domain pair. Domains keep different
/// uses of the same seed (plans, datasets, permutations) off each other's
/// streams.
pub(crate) fn stream_rng(seed: u64, domain: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) ^ stream);
    rng
}

const PLAN_DOMAIN: u64 = 1;

/// Draws B pairs of disjoint subsets of size floor(n/2) by splitting a
/// fresh uniform permutation per pair.
pub fn complementary_pairs(n: usize, b: usize, seed: u64) -> Result<SubsamplePlan> {
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {n}")));
    }
    if b < 1 {
        return Err(Error::domain("need at least one pair"));
    }
    let half = n / 2;
    let mut pairs = Vec::with_capacity(b);
    for j in 0..b {
        let mut rng = stream_rng(seed, PLAN_DOMAIN, j as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut first: Vec<usize> = perm[..half].to_vec();
        let mut second: Vec<usize> = perm[half..2 * half].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        pairs.push((first, second));
    }
    Ok(SubsamplePlan { n, seed, stratified: false, pairs })
}

/// Stratified variant: each half receives floor(n_c/2) members of every
/// class c, so class proportions match the full data up to rounding.
pub fn stratified_pairs<L: Ord>(labels: &[L], b: usize, seed: u64) -> Result<SubsamplePlan> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {n}")));
    }
    if b < 1 {
        return Err(Error::domain("need at least one pair"));
    }
    let mut classes: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        classes.entry(label).or_default().push(i);
    }
    for (label_idx, members) in classes.values().enumerate() {
        if members.len() < 2 {
            return Err(Error::domain(format!(
                "class #{label_idx} has fewer than 2 observations"
            )));
        }
    }
    let mut pairs = Vec::with_capacity(b);
    for j in 0..b {
        let mut rng = stream_rng(seed, PLAN_DOMAIN, j as u64);
        let mut first = Vec::new();
        let mut second = Vec::new();
        for members in classes.values() {
            let mut perm = members.clone();
            perm.shuffle(&mut rng);
            let half = perm.len() / 2;
            first.extend_from_slice(&perm[..half]);
            second.extend_from_slice(&perm[half..2 * half]);
        }
        first.sort_unstable();
        second.sort_unstable();
        pairs.push((first, second));
    }
    Ok(SubsamplePlan { n, seed, stratified: true, pairs })
}

impl SubsamplePlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.pairs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stratified(&self) -> bool {
        self.stratified
    }

    pub fn pairs(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.pairs
    }

    /// Size of every half (identical across the plan).
    pub fn half_size(&self) -> usize {
        self.pairs.first().map_or(0, |(a, _)| a.len())
    }

    /// Checks the structural invariants: equal half sizes everywhere,
    /// disjoint halves within a pair, indices in range.
    pub fn validate(&self) -> Result<()> {
        let half = self.half_size();
        for (j, (a, b)) in self.pairs.iter().enumerate() {
            if a.len() != half || b.len() != half {
                return Err(Error::domain(format!("pair {j} has unequal half sizes")));
            }
            if a.iter().chain(b).any(|&i| i >= self.n) {
                return Err(Error::domain(format!("pair {j} has an index out of range")));
            }
            let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
            merged.sort_unstable();
            merged.dedup();
            if merged.len() != 2 * half {
                return Err(Error::domain(format!("pair {j} halves are not disjoint")));
            }
        }
        Ok(())
    }

    /// Line-based audit format: a header line, then one line per half as
    /// `pair half index...` with 1-based pair numbers and sorted indices.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# subsample-plan n={} b={} seed={} stratified={}\n",
            self.n,
            self.b(),
            self.seed,
            self.stratified
        );
        for (j, (a, b)) in self.pairs.iter().enumerate() {
            for (half, ids) in [(1, a), (2, b)] {
                out.push_str(&format!("{} {}", j + 1, half));
                for i in ids {
                    out.push_str(&format!(" {i}"));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty plan text".into()))?;
        let mut n = None;
        let mut seed = None;
        let mut stratified = false;
        for token in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = token.strip_prefix("n=") {
                n = v.parse::<usize>().ok();
            } else if let Some(v) = token.strip_prefix("seed=") {
                seed = v.parse::<u64>().ok();
            } else if let Some(v) = token.strip_prefix("stratified=") {
                stratified = v == "true";
            }
        }
        let n = n.ok_or_else(|| Error::Parse("plan header missing n=".into()))?;
        let seed = seed.ok_or_else(|| Error::Parse("plan header missing seed=".into()))?;
        let mut halves: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let pair: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad plan line: {line}")))?;
            let half: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad plan line: {line}")))?;
            let ids = tokens
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<usize>, _>>()
                .map_err(|_| Error::Parse(format!("bad index in plan line: {line}")))?;
            halves.insert((pair, half), ids);
        }
        let b = halves.keys().map(|&(p, _)| p).max().unwrap_or(0);
        let mut pairs = Vec::with_capacity(b);
        for j in 1..=b {
            let a = halves
                .remove(&(j, 1))
                .ok_or_else(|| Error::Parse(format!("plan missing pair {j} half 1")))?;
            let bb = halves
                .remove(&(j, 2))
                .ok_or_else(|| Error::Parse(format!("plan missing pair {j} half 2")))?;
            pairs.push((a, bb));
        }
        let plan = SubsamplePlan { n, seed, stratified, pairs };
        plan.validate()?;
        Ok(plan)
    }
}
