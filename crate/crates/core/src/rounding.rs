//! Sweep-cut rounding, node ranking and cluster scoring.

use serde::{Deserialize, Serialize};

use crate::cutcost::CostModel;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub threshold: f64,
    pub size: usize,
    pub volume: f64,
    pub cut: f64,
    /// `INFINITY` when the complement has zero volume.
    pub conductance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Distinct positive values of `x`, decreasing.
    pub thresholds: Vec<f64>,
    pub profile: Vec<ProfileEntry>,
    pub best: NodeSet,
    pub best_conductance: f64,
    pub best_index: usize,
}

/// Evaluates every level set `{v : x_v >= h}` over the distinct positive values
/// `h` of `x` and returns the one of smallest conductance (earliest on ties).
///
/// Cut values are maintained incrementally: when a group of tied nodes enters,
/// only the hyperedges touching it are re-evaluated.
pub fn sweep_cut(h: &Hypergraph, costs: &CostModel, x: &[f64]) -> Result<SweepResult> {
    let n = h.num_nodes();
    if x.len() != n {
        return Err(Error::LengthMismatch { what: "embedding", expected: n, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("embedding contains non-finite values"));
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| x[v] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::ZeroEmbedding);
    }
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));

    let total = h.total_volume();
    let mut inside = vec![false; n];
    let mut edge_value = vec![0.0; h.num_edges()];
    let mut members: Vec<bool> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    let mut touched_flag = vec![false; h.num_edges()];
    let (mut volume, mut cut) = (0.0, 0.0);
    let mut thresholds = Vec::new();
    let mut profile = Vec::new();

    let mut i = 0;
    while i < order.len() {
        let level = x[order[i]];
        let mut j = i;
        while j < order.len() && x[order[j]] == level {
            let v = order[j];
            inside[v] = true;
            volume += h.degree(v);
            for &e in h.incident(v) {
                if !touched_flag[e] {
                    touched_flag[e] = true;
                    touched.push(e);
                }
            }
            j += 1;
        }
        for e in touched.drain(..) {
            touched_flag[e] = false;
            members.clear();
            members.extend(h.edge(e).iter().map(|&u| inside[u]));
            let w = h.theta()[e] * costs.cost(e).evaluate_members(&members)?;
            cut += w - edge_value[e];
            edge_value[e] = w;
        }
        let denom = volume.min(total - volume);
        let conductance = if denom > 0.0 { cut.max(0.0) / denom } else { f64::INFINITY };
        thresholds.push(level);
        profile.push(ProfileEntry { threshold: level, size: j, volume, cut: cut.max(0.0), conductance });
        i = j;
    }

    let best_index = profile
        .iter()
        .enumerate()
        .fold(0, |best, (k, p)| if p.conductance < profile[best].conductance { k } else { best });
    let size = profile[best_index].size;
    let best = NodeSet::new(order[..size].to_vec(), n)?;
    Ok(SweepResult {
        thresholds,
        best_conductance: profile[best_index].conductance,
        profile,
        best,
        best_index,
    })
}

/// Nodes with positive `x` in decreasing order, ties by index.
pub fn rank_nodes(x: &[f64], exclude: Option<&NodeSet>) -> Vec<usize> {
    let mut ranked: Vec<usize> = (0..x.len())
        .filter(|&v| x[v] > 0.0 && !exclude.is_some_and(|s| s.contains(v)))
        .collect();
    ranked.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    ranked
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of a predicted node set.
pub fn f1(pred: &NodeSet, truth: &NodeSet) -> Result<ClusterScores> {
    if pred.is_empty() || truth.is_empty() {
        return Err(Error::InvalidNodeSet("prediction and ground truth must be non-empty".into()));
    }
    let hit = pred.intersection_len(truth) as f64;
    let precision = hit / pred.len() as f64;
    let recall = hit / truth.len() as f64;
    let f1 = if hit == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(ClusterScores { precision, recall, f1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub output_conductance: f64,
    pub truth_conductance: f64,
    /// Output conductance over ground-truth conductance.
    pub conductance_ratio: f64,
}

pub fn evaluate(h: &Hypergraph, costs: &CostModel, pred: &NodeSet, truth: &NodeSet) -> Result<EvalReport> {
    let scores = f1(pred, truth)?;
    let output_conductance = h.conductance(costs, pred)?;
    let truth_conductance = h.conductance(costs, truth)?;
    let conductance_ratio = if truth_conductance > 0.0 {
        output_conductance / truth_conductance
    } else if output_conductance == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(EvalReport {
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
        output_conductance,
        truth_conductance,
        conductance_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `vol(S ∩ C) / vol(C)`.
    pub alpha: f64,
    /// `vol(S ∩ C) / vol(S)`.
    pub beta: f64,
    pub target_conductance: f64,
    /// Source mass factor at least `3 / alpha`.
    pub mass_ok: bool,
    /// `sigma <= beta * Phi(C) / 3`.
    pub sigma_ok: bool,
    pub overlap_ok: bool,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.overlap_ok && self.mass_ok && self.sigma_ok
    }

    /// Upper bound `12 Phi(C)^(1/q) / (alpha beta)` on the best sweep conductance.
    pub fn sweep_bound(&self, q: f64) -> f64 {
        12.0 * self.target_conductance.powf(1.0 / q) / (self.alpha * self.beta)
    }
}

/// Computes the seed/target overlap parameters and checks the conditions under
/// which the sweep-cut guarantee applies. `mass_factor` is `||Delta||_1 / vol(C)`.
pub fn check_assumptions(
    h: &Hypergraph,
    costs: &CostModel,
    seeds: &NodeSet,
    target: &NodeSet,
    sigma: f64,
    mass_factor: f64,
) -> Result<AssumptionReport> {
    if target.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidNodeSet("seed and target sets must be non-empty".into()));
    }
    let overlap = h.volume(&seeds.intersection(target));
    let vol_c = h.volume(target);
    let vol_s = h.volume(seeds);
    if vol_c == 0.0 || vol_s == 0.0 {
        return Err(Error::UndefinedConductance("seed or target set has zero volume"));
    }
    let alpha = overlap / vol_c;
    let beta = overlap / vol_s;
    let target_conductance = h.conductance(costs, target)?;
    Ok(AssumptionReport {
        alpha,
        beta,
        target_conductance,
        overlap_ok: alpha > 0.0,
        mass_ok: alpha > 0.0 && mass_factor >= 3.0 / alpha,
        sigma_ok: sigma <= beta * target_conductance / 3.0,
    })
}
