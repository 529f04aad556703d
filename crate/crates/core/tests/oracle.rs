//! Comparisons against reference solutions from a generic conic solver
//! (see fixtures/generate.py).

mod common;

use common::{cost_named, in_scaled_base, oracle, rel_diff};
use hyperflow::projection::{
    edge_objective, project_cardinality_exact, project_motif4, project_subgradient, project_unit_exact,
    project_unit_lp, s_step,
};
use hyperflow::solver::{am_solve, DiffusionConfig, SourceVector, StopReason};
use hyperflow::{Hypergraph, NodeSet};

#[test]
fn unit_routing_matches_reference() {
    for case in oracle().routing.iter().filter(|c| c.cost == "unit") {
        let res = project_unit_exact(&case.s, case.sigma);
        let obj = edge_objective(&case.s, res.phi, &res.r, case.sigma, 2.0);
        assert!(rel_diff(obj, case.objective) < 1e-6, "{obj} vs {}", case.objective);
        assert!(in_scaled_base(&cost_named("unit"), res.phi, &res.r, 1e-12 * (1.0 + res.phi)));
        let lp = project_unit_lp(&case.s, case.sigma, 2.0, 1e-12).unwrap();
        let obj_lp = edge_objective(&case.s, lp.phi, &lp.r, case.sigma, 2.0);
        assert!(rel_diff(obj_lp, case.objective) < 1e-6, "{obj_lp} vs {}", case.objective);
    }
}

#[test]
fn motif_routing_matches_reference() {
    for case in oracle().routing.iter().filter(|c| c.cost == "motif") {
        let res = project_motif4(&case.s, case.sigma);
        let obj = edge_objective(&case.s, res.phi, &res.r, case.sigma, 2.0);
        assert!(rel_diff(obj, case.objective) < 1e-6, "{obj} vs {}", case.objective);
        assert!(in_scaled_base(&cost_named("motif"), res.phi, &res.r, 1e-12 * (1.0 + res.phi)));
    }
}

#[test]
fn cardinality_routing_matches_reference() {
    let cost = cost_named("cardinality");
    for case in oracle().routing.iter().filter(|c| c.cost == "cardinality") {
        let e: Vec<usize> = (0..case.s.len()).collect();
        let res = project_subgradient(&cost, &e, &case.s, case.sigma, 20_000).unwrap();
        let obj = edge_objective(&case.s, res.phi, &res.r, case.sigma, 2.0);
        assert!(obj >= case.objective * (1.0 - 1e-7), "below optimum: {obj} vs {}", case.objective);
        assert!(rel_diff(obj, case.objective) < 1e-4, "{obj} vs {} (sigma {})", case.objective, case.sigma);
        assert!(in_scaled_base(&cost, res.phi, &res.r, 1e-9 * (1.0 + res.phi)));
    }
}

#[test]
fn excess_step_matches_reference() {
    for case in &oracle().excess {
        let h = Hypergraph::new(case.n, case.edges.clone(), Some(case.theta.clone())).unwrap();
        let r: Vec<f64> = case.r.iter().flatten().copied().collect();
        let s = s_step(&h, &r, &case.delta);
        let expected: Vec<f64> = case.s.iter().flatten().copied().collect();
        for (a, b) in s.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn path_diffusion_matches_reference() {
    let case = &oracle().path;
    let h = case.hypergraph();
    let source = SourceVector { delta: case.delta.clone(), seeds: NodeSet::new(vec![0], 3).unwrap() };
    let cfg = DiffusionConfig { sigma: case.sigma, gap_tol: 1e-9, max_iters: 100_000, ..Default::default() };
    let st = am_solve(&h, &case.costs(), &source, &cfg).unwrap();
    assert_eq!(st.stop_reason, StopReason::GapReached);
    assert!(st.relative_gap() <= 1e-6);
    for (a, b) in st.x.iter().zip(&case.x) {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
    assert!(rel_diff(st.dual, case.dual) < 1e-6);
}

#[test]
fn cardinality_exact_routing_matches_reference() {
    let cost = cost_named("cardinality");
    for case in oracle().routing.iter().filter(|c| c.cost == "cardinality") {
        let res = project_cardinality_exact(&case.s, case.sigma);
        let obj = edge_objective(&case.s, res.phi, &res.r, case.sigma, 2.0);
        assert!(rel_diff(obj, case.objective) < 1e-6, "{obj} vs {} (sigma {})", case.objective, case.sigma);
        assert!(in_scaled_base(&cost, res.phi, &res.r, 1e-12 * (1.0 + res.phi)));
    }
}
