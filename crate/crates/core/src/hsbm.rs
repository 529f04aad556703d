//! Two-block k-uniform hypergraph stochastic block model.
//!
//! Every k-subset is an independent hyperedge. Its probability depends on how
//! many of its nodes fall in the first block: `p` when all or none do, and
//! `q[j - 1]` when the smaller side of the split has `j` nodes.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::cutcost::CutCost;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};

/// Split classes with at most this many subsets are enumerated exhaustively;
/// larger ones draw a binomial count and sample distinct subsets.
pub const ENUMERATION_LIMIT: u128 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsbmParams {
    pub k: usize,
    pub n: usize,
    /// Size of the first block; defaults to `n / 2`.
    #[serde(default)]
    pub first_block: Option<usize>,
    pub p: f64,
    /// Inter-cluster probabilities indexed by the smaller side's cardinality.
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Assign block labels by a random permutation instead of contiguous ranges.
    #[serde(default)]
    pub shuffle_labels: bool,
}

impl HsbmParams {
    pub fn new(k: usize, n: usize, p: f64, q: Vec<f64>, rng_seed: u64) -> Self {
        Self { k, n, first_block: None, p, q, rng_seed, shuffle_labels: false }
    }

    pub fn block_sizes(&self) -> (usize, usize) {
        let a = self.first_block.unwrap_or(self.n / 2);
        (a, self.n - a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param(format!("hyperedge size k must be >= 2, got {}", self.k)));
        }
        let (a, b) = self.block_sizes();
        if a == 0 || a >= self.n || self.n < self.k {
            return Err(Error::param(format!("blocks of sizes ({a}, {b}) cannot host {}-uniform hyperedges", self.k)));
        }
        if self.q.len() != self.k / 2 {
            return Err(Error::param(format!("expected {} inter-cluster probabilities, got {}", self.k / 2, self.q.len())));
        }
        for &v in std::iter::once(&self.p).chain(&self.q) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(format!("probability {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Probability of a hyperedge with `i` nodes in the first block.
    pub fn class_probability(&self, i: usize) -> f64 {
        let j = i.min(self.k - i);
        if j == 0 {
            self.p
        } else {
            self.q[j - 1]
        }
    }
}

#[derive(Clone, Debug)]
pub struct HsbmInstance {
    pub hypergraph: Hypergraph,
    /// Block label (0 or 1) of every node.
    pub labels: Vec<usize>,
}

impl HsbmInstance {
    pub fn block(&self, label: usize) -> NodeSet {
        NodeSet::from_mask(&self.labels.iter().map(|&l| l == label).collect::<Vec<_>>())
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Advances `c` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Samples a hypergraph and its block labels.
pub fn generate(params: &HsbmParams) -> Result<HsbmInstance> {
    params.validate()?;
    let (a, b) = params.block_sizes();
    let k = params.k;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut role: Vec<usize> = (0..params.n).collect();
    if params.shuffle_labels {
        role.shuffle(&mut rng);
    }
    // role[i] is the node playing position i; positions 0..a form the first block.
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for i in 0..=k {
        let prob = params.class_probability(i);
        if prob == 0.0 || i > a || k - i > b {
            continue;
        }
        let size = binomial(a, i) * binomial(b, k - i);
        let to_edge = |ca: &[usize], cb: &[usize]| -> Vec<usize> {
            let mut e: Vec<usize> = ca.iter().map(|&x| role[x]).chain(cb.iter().map(|&y| role[a + y])).collect();
            e.sort_unstable();
            e
        };
        if size <= ENUMERATION_LIMIT {
            let mut ca: Vec<usize> = (0..i).collect();
            loop {
                let mut cb: Vec<usize> = (0..k - i).collect();
                loop {
                    if prob >= 1.0 || rng.gen_bool(prob) {
                        edges.push(to_edge(&ca, &cb));
                    }
                    if !next_combination(&mut cb, b) {
                        break;
                    }
                }
                if !next_combination(&mut ca, a) {
                    break;
                }
            }
        } else {
            let trials = u64::try_from(size).map_err(|_| Error::SizeLimit { size: k, limit: 64 })?;
            let count = Binomial::new(trials, prob)
                .map_err(|e| Error::param(format!("binomial draw failed: {e}")))?
                .sample(&mut rng);
            if count as f64 > 0.5 * trials as f64 {
                return Err(Error::param(format!(
                    "split class with {i} first-block nodes is too dense ({count} of {trials}) to sample"
                )));
            }
            let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(count as usize);
            let mut drawn = Vec::with_capacity(count as usize);
            while (seen.len() as u64) < count {
                let mut ca = rand::seq::index::sample(&mut rng, a, i).into_vec();
                let mut cb = rand::seq::index::sample(&mut rng, b, k - i).into_vec();
                ca.sort_unstable();
                cb.sort_unstable();
                let e = to_edge(&ca, &cb);
                if seen.insert(e.clone()) {
                    drawn.push(e);
                }
            }
            edges.extend(drawn);
        }
    }
    let mut labels = vec![0; params.n];
    for (pos, &v) in role.iter().enumerate() {
        labels[v] = usize::from(pos >= a);
    }
    let hypergraph = Hypergraph::new(params.n, edges, None)?;
    Ok(HsbmInstance { hypergraph, labels })
}

/// Expected `(cut, volume)` of the first block when only `q_1` is nonzero.
fn expected_cut_volume(k: usize, a: usize, b: usize, p: f64, q1: f64, cost: &CutCost) -> Result<(f64, f64, f64)> {
    let half = (k / 2) as f64;
    let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
    for i in 0..=k {
        let j = i.min(k - i);
        let prob = match j {
            0 => p,
            1 => q1,
            _ => 0.0,
        };
        let count = (binomial(a, i) * binomial(b, k - i)) as f64 * prob;
        vol_a += count * i as f64;
        vol_b += count * (k - i) as f64;
        if j > 0 {
            let w = match cost {
                CutCost::Unit => 1.0,
                CutCost::Cardinality => j as f64 / half,
                other => return Err(Error::param(format!("calibration supports unit and cardinality costs, not {}", other.name()))),
            };
            cut += count * w;
        }
    }
    Ok((cut, vol_a, vol_b))
}

/// Expected-graph conductance of the first of two equal blocks.
pub fn expected_conductance(k: usize, n: usize, p: f64, q1: f64, cost: &CutCost) -> Result<f64> {
    let (cut, vol_a, vol_b) = expected_cut_volume(k, n / 2, n - n / 2, p, q1, cost)?;
    let denom = vol_a.min(vol_b);
    if denom <= 0.0 {
        return Err(Error::UndefinedConductance("expected block volume is zero"));
    }
    Ok(cut / denom)
}

/// Finds `q_1` (with `q_{>=2} = 0`) so that the expected conductance of a block
/// matches `target`, by bisection.
pub fn calibrate_q(k: usize, n: usize, p: f64, target: f64, cost: &CutCost) -> Result<f64> {
    if k < 2 || n < 2 * k {
        return Err(Error::param(format!("cannot calibrate k = {k}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) || !(target >= 0.0) {
        return Err(Error::param("p must lie in [0, 1] and the target must be nonnegative"));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let cap = expected_conductance(k, n, p, 1.0, cost)?;
    if target > cap {
        return Err(Error::Unachievable(format!(
            "target conductance {target} exceeds the largest achievable value {cap:.6}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let phi = expected_conductance(k, n, p, mid, cost)?;
        if (phi - target).abs() <= 1e-12 {
            return Ok(mid);
        }
        if phi < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
