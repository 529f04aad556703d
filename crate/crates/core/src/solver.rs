//! Alternating minimisation for hyper-flow diffusion.
//!
//! The solver works on the separable form of the primal problem: each hyperedge
//! carries a scale `phi_e`, a routing `r_e` and a shifted routing `s_e`. One
//! iteration solves every routing sub-problem with `s` fixed, then recomputes `s`
//! in closed form. Only hyperedges that ever touched excess mass are visited, so
//! the work stays proportional to the explored region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutcost::CostModel;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};
use crate::projection::{edge_objective, pow_abs, project_edge, select_method, ProjectionMethod, ProjectionOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionConfig {
    pub sigma: f64,
    pub p: f64,
    pub max_iters: usize,
    /// Stop once `(primal - dual) / max(1, |primal|)` drops below this.
    pub gap_tol: f64,
    /// Entries at or below this count as zero in support statistics.
    pub support_eps: f64,
    /// Total source mass as a multiple of the target volume.
    pub seed_mass_factor: f64,
    /// Stop after this many consecutive iterations with negligible progress.
    pub stall_iters: usize,
    /// Relative objective change treated as negligible.
    pub stall_tol: f64,
    pub projection: ProjectionOptions,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            p: 2.0,
            max_iters: 2000,
            gap_tol: 1e-6,
            support_eps: 1e-8,
            seed_mass_factor: 3.0,
            stall_iters: 10,
            stall_tol: 1e-10,
            projection: ProjectionOptions::default(),
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::param(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::param(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.support_eps > 0.0) {
            return Err(Error::param("support_eps must be positive"));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(Error::param("gap_tol must be nonnegative"));
        }
        if !(self.seed_mass_factor > 0.0) {
            return Err(Error::param("seed_mass_factor must be positive"));
        }
        if self.projection.subgradient_iters < 1 {
            return Err(Error::param("subgradient iterations must be at least 1"));
        }
        Ok(())
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// Source mass placed on a seed set proportionally to degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceVector {
    pub delta: Vec<f64>,
    pub seeds: NodeSet,
}

impl SourceVector {
    pub fn total_mass(&self) -> f64 {
        self.delta.iter().sum()
    }
}

/// Spreads `total_mass` over `seeds` proportionally to their degrees.
pub fn make_source(h: &Hypergraph, seeds: &NodeSet, total_mass: f64) -> Result<SourceVector> {
    if seeds.is_empty() {
        return Err(Error::InvalidNodeSet("seed set is empty".into()));
    }
    if !(total_mass > 0.0) || !total_mass.is_finite() {
        return Err(Error::param(format!("total mass must be positive, got {total_mass}")));
    }
    let mut delta = vec![0.0; h.num_nodes()];
    if let Some(v) = seeds.iter().find(|&v| v >= h.num_nodes()) {
        return Err(Error::NodeOutOfRange { index: v, num_nodes: h.num_nodes() });
    }
    if let Some(v) = seeds.iter().find(|&v| h.degree(v) == 0.0) {
        return Err(Error::InvalidNodeSet(format!("seed {} has zero degree", h.node_label(v))));
    }
    if seeds.len() == 1 {
        delta[seeds.as_slice()[0]] = total_mass;
    } else {
        let vol = h.volume(seeds);
        for v in seeds.iter() {
            delta[v] = h.degree(v) * total_mass / vol;
        }
    }
    Ok(SourceVector { delta, seeds: seeds.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The source fits within the sink capacities; zero is optimal.
    NoExcess,
    GapReached,
    Stalled,
    MaxIters,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    /// Number of nodes with `x_v > support_eps`.
    pub nnz: usize,
    pub active_edges: usize,
}

#[derive(Clone, Debug)]
pub struct DiffusionState {
    /// Per-hyperedge scale.
    pub phi: Vec<f64>,
    /// Routings along the hypergraph's flat incidence array.
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    /// Dual embedding `x = z^(p-1)`.
    pub x: Vec<f64>,
    pub active_edges: Vec<usize>,
    pub active_nodes: Vec<usize>,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub primal: f64,
    pub dual: f64,
}

impl DiffusionState {
    pub fn relative_gap(&self) -> f64 {
        relative_gap(self.primal, self.dual)
    }

    pub fn support(&self, eps: f64) -> Vec<usize> {
        (0..self.x.len()).filter(|&v| self.x[v] > eps).collect()
    }
}

pub fn duality_gap(primal: f64, dual: f64) -> f64 {
    primal - dual
}

pub fn relative_gap(primal: f64, dual: f64) -> f64 {
    duality_gap(primal, dual) / primal.abs().max(1.0)
}

/// Primal objective `(1/p) sum theta phi^p + (sigma/p) sum d z^p`.
pub fn primal_objective(h: &Hypergraph, phi: &[f64], z: &[f64], cfg: &DiffusionConfig) -> f64 {
    let p = cfg.p;
    let flow: f64 = phi.iter().zip(h.theta()).map(|(f, t)| t * pow_abs(*f, p)).sum();
    let excess: f64 = z.iter().zip(h.degrees()).map(|(z, d)| d * pow_abs(*z, p)).sum();
    (flow + cfg.sigma * excess) / p
}

/// Dual objective `(Delta - d)^T x - (1/q) sum theta f_e(x)^q - (sigma/q) sum d x^q`.
pub fn dual_objective(h: &Hypergraph, costs: &CostModel, delta: &[f64], x: &[f64], cfg: &DiffusionConfig) -> Result<f64> {
    let nodes: Vec<usize> = (0..x.len()).filter(|&v| x[v] != 0.0).collect();
    let mut edges: Vec<usize> = nodes.iter().flat_map(|&v| h.incident(v).iter().copied()).collect();
    edges.sort_unstable();
    edges.dedup();
    dual_on(h, costs, delta, x, &nodes, &edges, cfg)
}

fn dual_on(
    h: &Hypergraph,
    costs: &CostModel,
    delta: &[f64],
    x: &[f64],
    nodes: &[usize],
    edges: &[usize],
    cfg: &DiffusionConfig,
) -> Result<f64> {
    let q = cfg.q();
    let mut val = 0.0;
    for &v in nodes {
        let d = h.degree(v);
        val += (delta[v] - d) * x[v] - cfg.sigma / q * d * pow_abs(x[v], q);
    }
    let mut order = Vec::new();
    let mut rho = Vec::new();
    let mut xe = Vec::new();
    for &e in edges {
        let nodes_e = h.edge(e);
        xe.clear();
        xe.extend(nodes_e.iter().map(|&v| x[v]));
        rho.resize(nodes_e.len(), 0.0);
        let f = costs.cost(e).lovasz_with(nodes_e, &xe, &mut order, &mut rho);
        val -= h.theta()[e] / q * pow_abs(f.max(0.0), q);
    }
    Ok(val)
}

/// Recovers `(z, x)` from routings: `z = D^{-1} [Delta - sum theta r - d]_+ / sigma`,
/// `x = z^(p-1)`.
pub fn recover_dual(h: &Hypergraph, r: &[f64], delta: &[f64], cfg: &DiffusionConfig) -> (Vec<f64>, Vec<f64>) {
    let ex = crate::projection::excess(h, r, delta);
    let z: Vec<f64> = ex
        .iter()
        .zip(h.degrees())
        .map(|(e, d)| if *e > 0.0 { e / (cfg.sigma * d) } else { 0.0 })
        .collect();
    let x = z.iter().map(|&z| dual_from_z(z, cfg.p)).collect();
    (z, x)
}

fn dual_from_z(z: f64, p: f64) -> f64 {
    if p == 2.0 {
        z
    } else {
        pow_abs(z, p - 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub support_size: usize,
    pub support_volume: f64,
    pub total_mass: f64,
    /// Total weight of hyperedges with `phi_e > eps`.
    pub flow_edge_weight: f64,
    /// `vol(supp x) <= ||Delta||_1`.
    pub volume_bound_holds: bool,
    /// `sum_{phi_e > eps} theta_e <= vol(supp x)`.
    pub edge_bound_holds: bool,
}

/// Checks the support bounds satisfied by an optimal diffusion.
pub fn check_locality(h: &Hypergraph, state: &DiffusionState, delta: &[f64], eps: f64) -> LocalityReport {
    let support = state.support(eps);
    let support_volume: f64 = support.iter().map(|&v| h.degree(v)).sum();
    let total_mass: f64 = delta.iter().sum();
    let flow_edge_weight: f64 = (0..h.num_edges())
        .filter(|&e| state.phi[e] > eps)
        .map(|e| h.theta()[e])
        .sum();
    let slack = 1e-9 * total_mass.max(1.0);
    LocalityReport {
        support_size: support.len(),
        support_volume,
        total_mass,
        flow_edge_weight,
        volume_bound_holds: support_volume <= total_mass + slack,
        edge_bound_holds: flow_edge_weight <= support_volume + slack,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    /// `max_e |phi_e^p - f_e(x)^q| / max(1, phi_e^p)` over active edges.
    pub edge_residual: f64,
    /// `max_v |z_v^p - x_v^q|`.
    pub node_residual: f64,
}

/// Residuals of the optimality relations linking primal and dual variables.
pub fn conjugate_residuals(h: &Hypergraph, costs: &CostModel, state: &DiffusionState, cfg: &DiffusionConfig) -> Result<ConjugateReport> {
    let (p, q) = (cfg.p, cfg.q());
    let mut edge_residual: f64 = 0.0;
    for &e in &state.active_edges {
        let xe: Vec<f64> = h.edge(e).iter().map(|&v| state.x[v]).collect();
        let f = costs.cost(e).lovasz(h.edge(e), &xe)?.max(0.0);
        let lhs = pow_abs(state.phi[e], p);
        edge_residual = edge_residual.max((lhs - pow_abs(f, q)).abs() / lhs.max(1.0));
    }
    let node_residual = state
        .z
        .iter()
        .zip(&state.x)
        .map(|(z, x)| (pow_abs(*z, p) - pow_abs(*x, q)).abs())
        .fold(0.0, f64::max);
    Ok(ConjugateReport { edge_residual, node_residual })
}

/// Runs alternating minimisation from the zero routing.
pub fn am_solve(h: &Hypergraph, costs: &CostModel, source: &SourceVector, cfg: &DiffusionConfig) -> Result<DiffusionState> {
    cfg.validate()?;
    costs.validate(h)?;
    let n = h.num_nodes();
    let delta = &source.delta;
    if delta.len() != n {
        return Err(Error::LengthMismatch { what: "source vector", expected: n, got: delta.len() });
    }
    for (v, &m) in delta.iter().enumerate() {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::param(format!("source mass at node {v} must be finite and nonnegative")));
        }
        if m > 0.0 && h.degree(v) == 0.0 {
            return Err(Error::InvalidNodeSet(format!("source on zero-degree node {}", h.node_label(v))));
        }
    }
    match costs {
        CostModel::Uniform(c) => {
            select_method(c, cfg.p)?;
        }
        CostModel::PerEdge(list) => {
            for c in list {
                select_method(c, cfg.p)?;
            }
        }
    }
    let mut solver = Solver::new(h, costs, delta, cfg);
    solver.run()?;
    Ok(solver.finish())
}

struct Solver<'a> {
    h: &'a Hypergraph,
    costs: &'a CostModel,
    delta: &'a [f64],
    cfg: &'a DiffusionConfig,
    /// Projection effort; raised when the iterates stall.
    projection: ProjectionOptions,
    phi: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    /// `Delta - sum theta r` on active nodes.
    mass: Vec<f64>,
    ex: Vec<f64>,
    /// Scratch dual embedding, nonzero only while objectives are evaluated.
    xbuf: Vec<f64>,
    edge_active: Vec<bool>,
    node_active: Vec<bool>,
    active_edges: Vec<usize>,
    active_nodes: Vec<usize>,
    trace: Vec<TraceEntry>,
    iterations: usize,
    stop_reason: StopReason,
    primal: f64,
    dual: f64,
}

impl<'a> Solver<'a> {
    fn new(h: &'a Hypergraph, costs: &'a CostModel, delta: &'a [f64], cfg: &'a DiffusionConfig) -> Self {
        let n = h.num_nodes();
        let mut solver = Self {
            h,
            costs,
            delta,
            cfg,
            projection: cfg.projection.clone(),
            phi: vec![0.0; h.num_edges()],
            r: vec![0.0; h.incidence_len()],
            s: vec![0.0; h.incidence_len()],
            mass: vec![0.0; n],
            ex: vec![0.0; n],
            xbuf: vec![0.0; n],
            edge_active: vec![false; h.num_edges()],
            node_active: vec![false; n],
            active_edges: Vec::new(),
            active_nodes: Vec::new(),
            trace: Vec::new(),
            iterations: 0,
            stop_reason: StopReason::MaxIters,
            primal: 0.0,
            dual: 0.0,
        };
        for v in 0..n {
            if delta[v] > 0.0 {
                solver.activate_node(v);
            }
        }
        solver
    }

    fn activate_node(&mut self, v: usize) {
        if !self.node_active[v] {
            self.node_active[v] = true;
            self.active_nodes.push(v);
            self.mass[v] = self.delta[v];
        }
    }

    /// Adds every hyperedge incident to a node with positive excess.
    fn grow_active_set(&mut self) {
        let mut k = 0;
        while k < self.active_nodes.len() {
            let v = self.active_nodes[k];
            k += 1;
            if self.ex[v] <= 0.0 {
                continue;
            }
            for &e in self.h.incident(v) {
                if !self.edge_active[e] {
                    self.edge_active[e] = true;
                    self.active_edges.push(e);
                    for &u in self.h.edge(e) {
                        self.activate_node(u);
                    }
                }
            }
        }
    }

    /// Recomputes excess on active nodes and the shifted routings on active edges.
    fn s_step(&mut self) {
        let h = self.h;
        for &v in &self.active_nodes {
            self.mass[v] = self.delta[v];
        }
        for &e in &self.active_edges {
            let w = h.theta()[e];
            for (i, &v) in h.edge_range(e).zip(h.edge(e)) {
                self.mass[v] -= w * self.r[i];
            }
        }
        for &v in &self.active_nodes {
            self.ex[v] = (self.mass[v] - h.degree(v)).max(0.0);
        }
        for &e in &self.active_edges {
            for (i, &v) in h.edge_range(e).zip(h.edge(e)) {
                self.s[i] = self.r[i] + self.ex[v] / h.degree(v);
            }
        }
    }

    fn z_of(&self, v: usize) -> f64 {
        if self.ex[v] > 0.0 {
            self.ex[v] / (self.cfg.sigma * self.h.degree(v))
        } else {
            0.0
        }
    }

    fn objectives(&mut self) -> Result<(f64, f64, usize)> {
        let (h, cfg) = (self.h, self.cfg);
        let p = cfg.p;
        let mut primal = 0.0;
        for &e in &self.active_edges {
            primal += h.theta()[e] * pow_abs(self.phi[e], p);
        }
        let mut support = Vec::new();
        for &v in &self.active_nodes {
            let z = self.z_of(v);
            if z > 0.0 {
                primal += cfg.sigma * h.degree(v) * pow_abs(z, p);
                support.push(v);
            }
        }
        primal /= p;
        // The support and every hyperedge touching it are active.
        let mut nnz = 0;
        for &v in &support {
            let xv = dual_from_z(self.z_of(v), p);
            self.xbuf[v] = xv;
            if xv > cfg.support_eps {
                nnz += 1;
            }
        }
        let mut edges: Vec<usize> = support.iter().flat_map(|&v| h.incident(v).iter().copied()).collect();
        edges.sort_unstable();
        edges.dedup();
        let dual = dual_on(h, self.costs, self.delta, &self.xbuf, &support, &edges, cfg);
        for &v in &support {
            self.xbuf[v] = 0.0;
        }
        Ok((primal, dual?, nnz))
    }

    fn routing_step(&mut self) -> Result<()> {
        let (h, cfg) = (self.h, self.cfg);
        let (r, s, phi, opts) = (&self.r, &self.s, &self.phi, &self.projection);
        let updates: Vec<(usize, f64, Vec<f64>)> = self
            .active_edges
            .par_iter()
            .map(|&e| -> Result<Option<(usize, f64, Vec<f64>)>> {
                let range = h.edge_range(e);
                let (se, re) = (&s[range.clone()], &r[range]);
                let res = project_edge(self.costs.cost(e), h.edge(e), se, cfg.sigma, cfg.p, opts, Some(re))?;
                let new = edge_objective(se, res.phi, &res.r, cfg.sigma, cfg.p);
                let old = edge_objective(se, phi[e], re, cfg.sigma, cfg.p);
                Ok((new < old).then_some((e, res.phi, res.r)))
            })
            .filter_map(|u| u.transpose())
            .collect::<Result<_>>()?;
        for (e, phi_e, r_e) in updates {
            self.phi[e] = phi_e;
            self.r[h.edge_range(e)].copy_from_slice(&r_e);
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let cfg = self.cfg;
        for &v in &self.active_nodes.clone() {
            self.ex[v] = (self.delta[v] - self.h.degree(v)).max(0.0);
        }
        if self.active_nodes.iter().all(|&v| self.ex[v] <= 0.0) {
            self.stop_reason = StopReason::NoExcess;
            return Ok(());
        }
        self.grow_active_set();
        self.s_step();
        let (primal, dual, _) = self.objectives()?;
        self.primal = primal;
        self.dual = dual;
        let mut stalled = 0;
        for iter in 1..=cfg.max_iters {
            self.routing_step()?;
            self.s_step();
            self.grow_active_set();
            // Newly activated edges have zero routing; their shifted routing
            // still needs the current excess.
            self.s_step();
            let (primal, dual, nnz) = self.objectives()?;
            let change = (self.primal - primal).abs();
            self.primal = primal;
            self.dual = dual;
            self.iterations = iter;
            self.trace.push(TraceEntry {
                iter,
                primal,
                dual,
                gap: duality_gap(primal, dual),
                nnz,
                active_edges: self.active_edges.len(),
            });
            if relative_gap(primal, dual) <= cfg.gap_tol {
                self.stop_reason = StopReason::GapReached;
                return Ok(());
            }
            if change <= cfg.stall_tol * primal.abs().max(1.0) {
                stalled += 1;
                if stalled >= cfg.stall_iters && self.escalate() {
                    stalled = 0;
                } else if stalled >= cfg.stall_iters {
                    self.stop_reason = StopReason::Stalled;
                    return Ok(());
                }
            } else {
                stalled = 0;
            }
        }
        self.stop_reason = StopReason::MaxIters;
        Ok(())
    }

    /// Inexact projections can stall the iterates short of the gap target.
    /// Spends more subgradient iterations per edge, up to a fixed factor.
    fn escalate(&mut self) -> bool {
        const MAX_FACTOR: usize = 64;
        let limit = self.cfg.projection.subgradient_iters.saturating_mul(MAX_FACTOR);
        let uses_subgradient = self.active_edges.iter().any(|&e| {
            matches!(select_method(self.costs.cost(e), self.cfg.p), Ok(ProjectionMethod::Subgradient))
        });
        if !uses_subgradient || self.projection.subgradient_iters >= limit {
            return false;
        }
        self.projection.subgradient_iters = (self.projection.subgradient_iters * 4).min(limit);
        log::debug!("stalled; subgradient iterations raised to {}", self.projection.subgradient_iters);
        true
    }

    fn finish(self) -> DiffusionState {
        let n = self.h.num_nodes();
        let mut z = vec![0.0; n];
        let mut x = vec![0.0; n];
        for &v in &self.active_nodes {
            z[v] = self.z_of(v);
            x[v] = dual_from_z(z[v], self.cfg.p);
        }
        let mut active_edges = self.active_edges;
        active_edges.sort_unstable();
        let mut active_nodes = self.active_nodes;
        active_nodes.sort_unstable();
        DiffusionState {
            phi: self.phi,
            r: self.r,
            s: self.s,
            z,
            x,
            active_edges,
            active_nodes,
            trace: self.trace,
            iterations: self.iterations,
            stop_reason: self.stop_reason,
            primal: self.primal,
            dual: self.dual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutcost::CutCost;

    fn path() -> Hypergraph {
        Hypergraph::from_edges(vec![vec![0, 1], vec![1, 2]], None).unwrap()
    }

    fn unit() -> CostModel {
        CostModel::Uniform(CutCost::Unit)
    }

    #[test]
    fn source_is_degree_proportional() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![1, 2], vec![2, 0]], None).unwrap();
        let src = make_source(&h, &NodeSet::new(vec![0, 1], 3).unwrap(), 10.0).unwrap();
        assert_eq!(src.delta, vec![5.0, 5.0, 0.0]);
        let single = make_source(&h, &NodeSet::new(vec![2], 3).unwrap(), 7.0).unwrap();
        assert_eq!(single.delta, vec![0.0, 0.0, 7.0]);
        assert!(make_source(&h, &NodeSet::empty(), 1.0).is_err());
        assert!(make_source(&h, &NodeSet::new(vec![0], 3).unwrap(), 0.0).is_err());
    }

    #[test]
    fn source_rejects_isolated_seed() {
        let h = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2]], None).unwrap();
        assert!(make_source(&h, &NodeSet::new(vec![3], 4).unwrap(), 1.0).is_err());
    }

    #[test]
    fn cluster_seeding_scales_with_volume() {
        let h = path();
        let c = NodeSet::new(vec![0, 1], 3).unwrap();
        let src = make_source(&h, &c, 3.0 * h.volume(&c)).unwrap();
        assert!((src.total_mass() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn no_excess_returns_zero() {
        let h = path();
        let src = SourceVector { delta: vec![1.0, 0.5, 0.0], seeds: NodeSet::new(vec![0, 1], 3).unwrap() };
        let st = am_solve(&h, &unit(), &src, &DiffusionConfig::default()).unwrap();
        assert_eq!(st.stop_reason, StopReason::NoExcess);
        assert!(st.x.iter().all(|&v| v == 0.0));
        assert!(st.phi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_dual_at_origin() {
        let h = path();
        let d = dual_objective(&h, &unit(), &[3.0, 0.0, 0.0], &[0.0; 3], &DiffusionConfig::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn recover_dual_without_excess_is_zero() {
        let h = path();
        let (z, x) = recover_dual(&h, &[0.0; 4], &[0.5, 0.0, 1.0], &DiffusionConfig::default());
        assert_eq!(z, vec![0.0; 3]);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn path_instance_converges() {
        let h = path();
        let src = make_source(&h, &NodeSet::new(vec![0], 3).unwrap(), 3.0).unwrap();
        let cfg = DiffusionConfig { gap_tol: 1e-9, max_iters: 100_000, ..Default::default() };
        let st = am_solve(&h, &unit(), &src, &cfg).unwrap();
        assert_eq!(st.stop_reason, StopReason::GapReached);
        // Node 0 keeps one unit, node 1 holds its capacity of two, so node 2 gets nothing.
        assert!(st.x[2] <= 1e-6);
        let report = check_locality(&h, &st, &src.delta, 1e-8);
        assert!(report.volume_bound_holds && report.edge_bound_holds);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let h = path();
        let src = make_source(&h, &NodeSet::new(vec![0], 3).unwrap(), 3.0).unwrap();
        let cfg = DiffusionConfig { sigma: 0.0, ..Default::default() };
        assert!(am_solve(&h, &unit(), &src, &cfg).is_err());
        let cfg = DiffusionConfig { p: 4.0, ..Default::default() };
        let card = CostModel::Uniform(CutCost::Cardinality);
        assert!(matches!(am_solve(&h, &card, &src, &cfg), Err(Error::UnsupportedCombination { .. })));
    }
}
