//! Immutable sparse hypergraph with cached degrees and node-to-edge incidence.
//!
//! Hyperedges are stored in compressed form (`edge_offsets` / `edge_nodes`) in the
//! order they were supplied, so per-edge data elsewhere in the crate (routings,
//! shifted routings, sweep bookkeeping) can live in flat arrays aligned with
//! `edge_nodes`. Node order inside a hyperedge is preserved because some cut-cost
//! models (the 4-node motif) assign roles by position.

use crate::cutcost::CostModel;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Hypergraph {
    num_nodes: usize,
    edge_offsets: Vec<usize>,
    edge_nodes: Vec<usize>,
    theta: Vec<f64>,
    degrees: Vec<f64>,
    node_offsets: Vec<usize>,
    node_edges: Vec<usize>,
    node_ids: Option<Vec<String>>,
    dropped_singletons: usize,
}

impl Hypergraph {
    /// Builds a hypergraph over `num_nodes` nodes.
    ///
    /// Hyperedges with fewer than two nodes are dropped (and counted in
    /// [`Hypergraph::dropped_singletons`]); repeated hyperedges are kept as distinct
    /// edges. `theta` defaults to one per edge and must align with `edges`.
    pub fn new(num_nodes: usize, edges: Vec<Vec<usize>>, theta: Option<Vec<f64>>) -> Result<Self> {
        if let Some(t) = &theta {
            if t.len() != edges.len() {
                return Err(Error::LengthMismatch {
                    what: "theta vs hyperedges",
                    expected: edges.len(),
                    got: t.len(),
                });
            }
        }
        let mut edge_offsets = vec![0];
        let mut edge_nodes = Vec::new();
        let mut kept_theta = Vec::new();
        let mut dropped = 0;
        for (i, edge) in edges.iter().enumerate() {
            let w = theta.as_ref().map_or(1.0, |t| t[i]);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveTheta { edge: i, value: w });
            }
            for &v in edge {
                if v >= num_nodes {
                    return Err(Error::NodeOutOfRange { index: v, num_nodes });
                }
            }
            let mut sorted = edge.clone();
            sorted.sort_unstable();
            if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
                return Err(Error::DuplicateNode { edge: i, node: pair[0] });
            }
            if edge.len() < 2 {
                dropped += 1;
                continue;
            }
            edge_nodes.extend_from_slice(edge);
            edge_offsets.push(edge_nodes.len());
            kept_theta.push(w);
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} hyperedge(s) with fewer than two nodes");
        }
        if kept_theta.is_empty() {
            return Err(Error::EmptyHypergraph);
        }

        let mut degrees = vec![0.0; num_nodes];
        let mut counts = vec![0usize; num_nodes];
        for (e, w) in kept_theta.iter().enumerate() {
            for &v in &edge_nodes[edge_offsets[e]..edge_offsets[e + 1]] {
                degrees[v] += w;
                counts[v] += 1;
            }
        }
        let mut node_offsets = Vec::with_capacity(num_nodes + 1);
        node_offsets.push(0);
        for c in &counts {
            node_offsets.push(node_offsets.last().unwrap() + c);
        }
        let mut fill = node_offsets.clone();
        let mut node_edges = vec![0; edge_nodes.len()];
        for e in 0..kept_theta.len() {
            for &v in &edge_nodes[edge_offsets[e]..edge_offsets[e + 1]] {
                node_edges[fill[v]] = e;
                fill[v] += 1;
            }
        }

        Ok(Self {
            num_nodes,
            edge_offsets,
            edge_nodes,
            theta: kept_theta,
            degrees,
            node_offsets,
            node_edges,
            node_ids: None,
            dropped_singletons: dropped,
        })
    }

    /// Builds a hypergraph whose node count is one more than the largest index used.
    pub fn from_edges(edges: Vec<Vec<usize>>, theta: Option<Vec<f64>>) -> Result<Self> {
        let n = edges.iter().flatten().max().map_or(0, |&m| m + 1);
        Self::new(n, edges, theta)
    }

    pub fn with_node_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.num_nodes {
            return Err(Error::LengthMismatch {
                what: "node ids vs nodes",
                expected: self.num_nodes,
                got: ids.len(),
            });
        }
        self.node_ids = Some(ids);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.theta.len()
    }

    /// Node indices of hyperedge `e`, in the order supplied at build time.
    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edge_nodes[self.edge_offsets[e]..self.edge_offsets[e + 1]]
    }

    /// Range of hyperedge `e` inside the flat incidence array.
    pub fn edge_range(&self, e: usize) -> std::ops::Range<usize> {
        self.edge_offsets[e]..self.edge_offsets[e + 1]
    }

    /// Total number of (edge, node) incidences.
    pub fn incidence_len(&self) -> usize {
        self.edge_nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.num_edges()).map(move |e| self.edge(e))
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    /// Hyperedges incident to node `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.node_edges[self.node_offsets[v]..self.node_offsets[v + 1]]
    }

    pub fn node_ids(&self) -> Option<&[String]> {
        self.node_ids.as_deref()
    }

    /// External identifier of node `v` (its index when no id map is attached).
    pub fn node_label(&self, v: usize) -> String {
        match &self.node_ids {
            Some(ids) => ids[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn dropped_singletons(&self) -> usize {
        self.dropped_singletons
    }

    pub fn max_edge_size(&self) -> usize {
        (0..self.num_edges()).map(|e| self.edge(e).len()).max().unwrap_or(0)
    }

    pub fn total_volume(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn volume(&self, set: &NodeSet) -> f64 {
        set.iter().map(|v| self.degrees[v]).sum()
    }

    /// Hyperedges with at least one node inside `set` and one outside, ascending.
    pub fn cut_set(&self, set: &NodeSet) -> Vec<usize> {
        let mask = set.to_mask(self.num_nodes);
        let mut touched: Vec<usize> = set.iter().flat_map(|v| self.incident(v).iter().copied()).collect();
        touched.sort_unstable();
        touched.dedup();
        touched
            .into_iter()
            .filter(|&e| {
                let inside = self.edge(e).iter().filter(|&&v| mask[v]).count();
                inside > 0 && inside < self.edge(e).len()
            })
            .collect()
    }

    /// Weighted cut value `sum_e theta_e * w_e(S ∩ e)` over the cut-set.
    pub fn cut_value(&self, costs: &CostModel, set: &NodeSet) -> Result<f64> {
        let mask = set.to_mask(self.num_nodes);
        let mut total = 0.0;
        for e in self.cut_set(set) {
            let inside: Vec<bool> = self.edge(e).iter().map(|&v| mask[v]).collect();
            total += self.theta[e] * costs.cost(e).evaluate_members(&inside)?;
        }
        Ok(total)
    }

    /// Conductance: cut value over the smaller of the two side volumes.
    pub fn conductance(&self, costs: &CostModel, set: &NodeSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::UndefinedConductance("empty set"));
        }
        if set.len() == self.num_nodes {
            return Err(Error::UndefinedConductance("set equals the whole node set"));
        }
        let vol = self.volume(set);
        let denom = vol.min(self.total_volume() - vol);
        if denom <= 0.0 {
            return Err(Error::UndefinedConductance("one side has zero volume"));
        }
        Ok(self.cut_value(costs, set)? / denom)
    }

    /// Sizes of the connected components (nodes joined by a common hyperedge),
    /// largest first. Isolated nodes form singleton components.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.num_nodes).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for e in 0..self.num_edges() {
            let nodes = self.edge(e);
            let root = find(&mut parent, nodes[0]);
            for &v in &nodes[1..] {
                let rv = find(&mut parent, v);
                if rv != root {
                    parent[rv] = root;
                }
            }
        }
        let mut sizes = vec![0usize; self.num_nodes];
        for v in 0..self.num_nodes {
            let r = find(&mut parent, v);
            sizes[r] += 1;
        }
        let mut out: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}

/// A set of node indices kept sorted and free of duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodeSet {
    nodes: Vec<usize>,
}

impl NodeSet {
    /// Sorts and deduplicates `nodes`; every index must be below `num_nodes`.
    pub fn new(mut nodes: Vec<usize>, num_nodes: usize) -> Result<Self> {
        if let Some(&bad) = nodes.iter().find(|&&v| v >= num_nodes) {
            return Err(Error::NodeOutOfRange { index: bad, num_nodes });
        }
        nodes.sort_unstable();
        nodes.dedup();
        Ok(Self { nodes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(num_nodes: usize) -> Self {
        Self { nodes: (0..num_nodes).collect() }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            nodes: mask.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v).collect(),
        }
    }

    pub fn complement(&self, num_nodes: usize) -> Self {
        let mask = self.to_mask(num_nodes);
        Self {
            nodes: (0..num_nodes).filter(|&v| !mask[v]).collect(),
        }
    }

    pub fn to_mask(&self, num_nodes: usize) -> Vec<bool> {
        let mut mask = vec![false; num_nodes];
        for &v in &self.nodes {
            mask[v] = true;
        }
        mask
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.nodes
    }

    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.nodes.len() && j < other.nodes.len() {
            match self.nodes[i].cmp(&other.nodes[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            nodes: self.nodes.iter().copied().filter(|&v| other.contains(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutcost::{CostModel, CutCost};

    fn path() -> Hypergraph {
        Hypergraph::from_edges(vec![vec![0, 1], vec![1, 2]], None).unwrap()
    }

    #[test]
    fn degrees_of_two_unit_edges() {
        assert_eq!(path().degrees(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn weighted_single_edge() {
        let h = Hypergraph::from_edges(vec![vec![0, 1, 2]], Some(vec![2.0])).unwrap();
        assert_eq!(h.degrees(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn singleton_only_is_empty() {
        let err = Hypergraph::from_edges(vec![vec![0]], None).unwrap_err();
        assert!(matches!(err, Error::EmptyHypergraph));
    }

    #[test]
    fn singletons_dropped_and_counted() {
        let h = Hypergraph::new(4, vec![vec![0], vec![1, 2], vec![3]], None).unwrap();
        assert_eq!(h.num_edges(), 1);
        assert_eq!(h.dropped_singletons(), 2);
        assert_eq!(h.degrees(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn duplicate_edges_count_twice() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(h.num_edges(), 2);
        assert_eq!(h.degrees(), &[2.0, 2.0]);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            Hypergraph::new(2, vec![vec![0, 5]], None),
            Err(Error::NodeOutOfRange { index: 5, .. })
        ));
        assert!(matches!(
            Hypergraph::new(3, vec![vec![0, 1]], Some(vec![0.0])),
            Err(Error::NonPositiveTheta { .. })
        ));
        assert!(matches!(
            Hypergraph::new(3, vec![vec![0, 1, 1]], None),
            Err(Error::DuplicateNode { .. })
        ));
    }

    #[test]
    fn incidence_matches_edges() {
        let h = Hypergraph::from_edges(vec![vec![0, 1, 2], vec![2, 3], vec![3, 0]], None).unwrap();
        for v in 0..h.num_nodes() {
            for &e in h.incident(v) {
                assert!(h.edge(e).contains(&v));
            }
            let count = h.edges().filter(|e| e.contains(&v)).count();
            assert_eq!(count, h.incident(v).len());
        }
    }

    #[test]
    fn volumes_and_cuts_on_path() {
        let h = path();
        assert_eq!(h.volume(&NodeSet::empty()), 0.0);
        assert_eq!(h.volume(&NodeSet::full(3)), 4.0);
        assert!(h.cut_set(&NodeSet::empty()).is_empty());
        assert!(h.cut_set(&NodeSet::full(3)).is_empty());
        let s = NodeSet::new(vec![0, 1], 3).unwrap();
        assert_eq!(h.cut_set(&s), vec![1]);
    }

    #[test]
    fn conductance_zero_cut_and_errors() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![2, 3]], None).unwrap();
        let costs = CostModel::Uniform(CutCost::Unit);
        let s = NodeSet::new(vec![0, 1], 4).unwrap();
        assert_eq!(h.conductance(&costs, &s).unwrap(), 0.0);
        assert!(h.conductance(&costs, &NodeSet::empty()).is_err());
        assert!(h.conductance(&costs, &NodeSet::full(4)).is_err());
    }

    #[test]
    fn degree_zero_only_set_rejected() {
        let h = Hypergraph::new(3, vec![vec![0, 1]], None).unwrap();
        let costs = CostModel::Uniform(CutCost::Unit);
        let s = NodeSet::new(vec![2], 3).unwrap();
        assert!(matches!(h.conductance(&costs, &s), Err(Error::UndefinedConductance(_))));
    }

    #[test]
    fn node_set_normalises() {
        let s = NodeSet::new(vec![3, 1, 3, 0], 4).unwrap();
        assert_eq!(s.as_slice(), &[0, 1, 3]);
        assert_eq!(s.complement(4).as_slice(), &[2]);
        assert!(NodeSet::new(vec![4], 4).is_err());
    }

    #[test]
    fn components() {
        let h = Hypergraph::new(6, vec![vec![0, 1], vec![1, 2], vec![3, 4]], None).unwrap();
        assert_eq!(h.component_sizes(), vec![3, 2, 1]);
    }
}
