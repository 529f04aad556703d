//! Seeded local-clustering runs and their aggregate statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutcost::CostModel;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};
use crate::rounding::{check_assumptions, evaluate, sweep_cut, AssumptionReport};
use crate::solver::{am_solve, make_source, DiffusionConfig, DiffusionState, StopReason};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: usize,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub output_conductance: f64,
    pub truth_conductance: f64,
    pub cluster_size: usize,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub relative_gap: f64,
    pub support_size: usize,
    pub assumptions: AssumptionReport,
}

/// Diffuses from one seed with total mass `seed_mass_factor * vol(target)`,
/// rounds by sweep cut and scores the result against `target`.
pub fn run_seed(h: &Hypergraph, costs: &CostModel, target: &NodeSet, seed: usize, cfg: &DiffusionConfig) -> Result<(SeedRun, DiffusionState)> {
    let seeds = NodeSet::new(vec![seed], h.num_nodes())?;
    let mass = cfg.seed_mass_factor * h.volume(target);
    let source = make_source(h, &seeds, mass)?;
    let state = am_solve(h, costs, &source, cfg)?;
    let pred = match sweep_cut(h, costs, &state.x) {
        Ok(sweep) => sweep.best,
        Err(Error::ZeroEmbedding) => seeds.clone(),
        Err(e) => return Err(e),
    };
    let report = evaluate(h, costs, &pred, target)?;
    let assumptions = check_assumptions(h, costs, &seeds, target, cfg.sigma, cfg.seed_mass_factor)?;
    let run = SeedRun {
        seed,
        f1: report.f1,
        precision: report.precision,
        recall: report.recall,
        output_conductance: report.output_conductance,
        truth_conductance: report.truth_conductance,
        cluster_size: pred.len(),
        iterations: state.iterations,
        stop_reason: state.stop_reason,
        relative_gap: state.relative_gap(),
        support_size: state.support(cfg.support_eps).len(),
        assumptions,
    };
    Ok((run, state))
}

/// Runs every seed in parallel; results keep the order of `seeds`.
pub fn run_seeds(h: &Hypergraph, costs: &CostModel, target: &NodeSet, seeds: &[usize], cfg: &DiffusionConfig) -> Result<Vec<SeedRun>> {
    seeds
        .par_iter()
        .map(|&s| run_seed(h, costs, target, s, cfg).map(|(run, _)| run))
        .collect()
}

/// Draws `count` distinct seeds from `target` (all of it if smaller), sorted.
pub fn choose_seeds(target: &NodeSet, count: usize, rng_seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pool = target.as_slice();
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), count.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Linear-interpolation quantile of unsorted data; `NaN` for empty input.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        Self { median: quantile(values, 0.5), p25: quantile(values, 0.25), p75: quantile(values, 0.75) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub f1: Spread,
    pub conductance: Spread,
}

pub fn summarize(runs: &[SeedRun]) -> Summary {
    let f1: Vec<f64> = runs.iter().map(|r| r.f1).collect();
    let cond: Vec<f64> = runs.iter().map(|r| r.output_conductance).collect();
    Summary { runs: runs.len(), f1: Spread::of(&f1), conductance: Spread::of(&cond) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn seeds_come_from_target() {
        let target = NodeSet::new((10..30).collect(), 40).unwrap();
        let seeds = choose_seeds(&target, 5, 3);
        assert_eq!(seeds.len(), 5);
        assert!(seeds.iter().all(|&s| target.contains(s)));
        assert_eq!(seeds, choose_seeds(&target, 5, 3));
        assert_eq!(choose_seeds(&target, 100, 3).len(), 20);
    }
}
