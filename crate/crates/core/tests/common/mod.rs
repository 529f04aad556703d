#![allow(dead_code)]

use std::sync::OnceLock;

use hyperflow::{CostModel, CutCost, Hypergraph};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct DualCase {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
    pub theta: Vec<f64>,
    pub cost: String,
    pub delta: Vec<f64>,
    pub sigma: f64,
    pub dual: f64,
    pub x: Vec<f64>,
}

impl DualCase {
    pub fn hypergraph(&self) -> Hypergraph {
        Hypergraph::new(self.n, self.edges.clone(), Some(self.theta.clone())).unwrap()
    }

    pub fn costs(&self) -> CostModel {
        CostModel::Uniform(cost_named(&self.cost))
    }
}

#[derive(Debug, Deserialize)]
pub struct RoutingCase {
    pub cost: String,
    pub s: Vec<f64>,
    pub sigma: f64,
    pub objective: f64,
    pub phi: f64,
    pub r: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct ExcessCase {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
    pub theta: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub s: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
pub struct Oracle {
    pub duals: Vec<DualCase>,
    pub path: DualCase,
    pub routing: Vec<RoutingCase>,
    pub excess: Vec<ExcessCase>,
}

pub fn oracle() -> &'static Oracle {
    static ORACLE: OnceLock<Oracle> = OnceLock::new();
    ORACLE.get_or_init(|| {
        let text = include_str!("../fixtures/oracle.json");
        serde_json::from_str(text).expect("oracle fixture parses")
    })
}

pub fn cost_named(name: &str) -> CutCost {
    match name {
        "unit" => CutCost::Unit,
        "cardinality" => CutCost::Cardinality,
        "motif" => CutCost::MOTIF_DEFAULT,
        other => panic!("unknown cost {other}"),
    }
}

/// Exhaustive check of `r(S) <= phi w(S)` and `sum r = 0`.
pub fn in_scaled_base(cost: &CutCost, phi: f64, r: &[f64], tol: f64) -> bool {
    let n = r.len();
    let total: f64 = r.iter().sum();
    if total.abs() > tol {
        return false;
    }
    (1..(1u32 << n) - 1).all(|m| {
        let inside: Vec<bool> = (0..n).map(|i| m & (1 << i) != 0).collect();
        let sum: f64 = (0..n).filter(|&i| inside[i]).map(|i| r[i]).sum();
        sum <= phi * cost.evaluate_members(&inside).unwrap() + tol
    })
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
