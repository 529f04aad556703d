//! Submodular hyperedge cut-costs.
//!
//! Every model works on *local positions*: a hyperedge with nodes `e = [v0, v1, ...]`
//! is evaluated on subsets encoded as bitmasks over positions (bit `i` means `e[i]`
//! is inside). Unit and cardinality costs only depend on the subset size; the 4-node
//! motif cost depends on the role order `(v1, v2, v3, v4)` given by the position.
//! All models are normalised so the largest subset value is 1; the original scale
//! lives in the hypergraph's per-edge weight.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};

/// Largest hyperedge an explicit subset table may describe.
pub const MAX_TABLE_SIZE: usize = 16;
/// Largest hyperedge for exhaustive pairwise checks.
pub const MAX_CHECK_SIZE: usize = 12;

const ZERO_TOL: f64 = 1e-12;

/// Explicit set-function values on all `2^size` subsets of a hyperedge.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetTable {
    size: usize,
    values: Vec<f64>,
}

impl SubsetTable {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_TABLE_SIZE).contains(&size) {
            return Err(Error::SizeLimit { size, limit: MAX_TABLE_SIZE });
        }
        if values.len() != 1 << size {
            return Err(Error::LengthMismatch {
                what: "subset table entries",
                expected: 1 << size,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidTable(format!("entries must be finite and nonnegative, found {bad}")));
        }
        if values[0] != 0.0 || values[(1 << size) - 1] != 0.0 {
            return Err(Error::InvalidTable("value of the empty set and of the full edge must be 0".into()));
        }
        Ok(Self { size, values })
    }

    /// Builds the table of `cost` on a hyperedge with `size` nodes.
    pub fn from_cost(cost: &CutCost, size: usize) -> Result<Self> {
        cost.check_size(size)?;
        if size > MAX_TABLE_SIZE {
            return Err(Error::SizeLimit { size, limit: MAX_TABLE_SIZE });
        }
        let values = (0..1u64 << size).map(|m| cost.value_mask(size, m)).collect();
        Self::new(size, values)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutCost {
    /// `w(S) = 1` for every proper nonempty `S`.
    Unit,
    /// `w(S) = min(|S|, |e \ S|) / floor(|e| / 2)`.
    Cardinality,
    /// Four-node motif with roles `(v1, v2 | v3, v4)` given by position:
    /// singletons cost `gamma1`, splitting off a role pair costs `gamma2`,
    /// any other balanced split costs 1.
    Motif4 { gamma1: f64, gamma2: f64 },
    Custom(Arc<SubsetTable>),
}

impl CutCost {
    /// The motif parameters used by the specialised exhaustive projection.
    pub const MOTIF_DEFAULT: CutCost = CutCost::Motif4 { gamma1: 0.5, gamma2: 0.0 };

    pub fn name(&self) -> &'static str {
        match self {
            CutCost::Unit => "unit",
            CutCost::Cardinality => "cardinality",
            CutCost::Motif4 { .. } => "motif4",
            CutCost::Custom(_) => "custom",
        }
    }

    pub fn motif4(gamma1: f64, gamma2: f64) -> Result<Self> {
        for g in [gamma1, gamma2] {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::param(format!("motif parameters must lie in [0, 1], got {g}")));
            }
        }
        Ok(CutCost::Motif4 { gamma1, gamma2 })
    }

    pub fn custom(table: SubsetTable) -> Self {
        CutCost::Custom(Arc::new(table))
    }

    /// Checks that the model is defined on hyperedges with `size` nodes.
    pub fn check_size(&self, size: usize) -> Result<()> {
        let ok = match self {
            CutCost::Unit | CutCost::Cardinality => size >= 2,
            CutCost::Motif4 { .. } => size == 4,
            CutCost::Custom(t) => t.size == size,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::CutCostSize { cost: self.name(), size })
        }
    }

    fn depends_on_count_only(&self) -> bool {
        matches!(self, CutCost::Unit | CutCost::Cardinality)
    }

    pub(crate) fn value_count(&self, size: usize, count: usize) -> f64 {
        if count == 0 || count >= size {
            return 0.0;
        }
        match self {
            CutCost::Unit => 1.0,
            CutCost::Cardinality => count.min(size - count) as f64 / (size / 2) as f64,
            _ => unreachable!("count-based evaluation on a table cost"),
        }
    }

    /// Value on the subset encoded by `mask`. Size must already be validated.
    pub(crate) fn value_mask(&self, size: usize, mask: u64) -> f64 {
        match self {
            CutCost::Unit | CutCost::Cardinality => self.value_count(size, mask.count_ones() as usize),
            CutCost::Motif4 { gamma1, gamma2 } => match mask.count_ones() {
                0 | 4 => 0.0,
                1 | 3 => *gamma1,
                _ if mask == 0b0011 || mask == 0b1100 => *gamma2,
                _ => 1.0,
            },
            CutCost::Custom(t) => t.get(mask),
        }
    }

    /// Value of the subset marked by `inside` (one flag per hyperedge position).
    pub fn evaluate_members(&self, inside: &[bool]) -> Result<f64> {
        let size = inside.len();
        self.check_size(size)?;
        if self.depends_on_count_only() {
            return Ok(self.value_count(size, inside.iter().filter(|&&b| b).count()));
        }
        let mask = inside
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | (1 << i) } else { m });
        Ok(self.value_mask(size, mask))
    }

    /// `w_e(S ∩ e)` for hyperedge nodes `e` and a node set `S`.
    pub fn evaluate(&self, e: &[usize], set: &NodeSet) -> Result<f64> {
        let inside: Vec<bool> = e.iter().map(|&v| set.contains(v)).collect();
        self.evaluate_members(&inside)
    }

    /// Greedy maximiser of `rho^T y` over the base polytope.
    ///
    /// Positions are visited by decreasing `y`, ties by increasing node index, and
    /// each receives the marginal gain of the growing prefix set.
    pub fn greedy_max_base(&self, e: &[usize], y: &[f64]) -> Result<Vec<f64>> {
        self.check_size(e.len())?;
        if y.len() != e.len() {
            return Err(Error::LengthMismatch { what: "values vs hyperedge", expected: e.len(), got: y.len() });
        }
        let mut order = Vec::with_capacity(e.len());
        let mut rho = vec![0.0; e.len()];
        self.greedy_into(e, y, &mut order, &mut rho);
        Ok(rho)
    }

    pub(crate) fn greedy_into(&self, e: &[usize], y: &[f64], order: &mut Vec<usize>, rho: &mut [f64]) {
        greedy_order(e, y, order);
        let n = e.len();
        let mut prev = 0.0;
        let mut mask = 0u64;
        let count_only = self.depends_on_count_only();
        for (i, &pos) in order.iter().enumerate() {
            let cur = if count_only {
                self.value_count(n, i + 1)
            } else {
                mask |= 1 << pos;
                self.value_mask(n, mask)
            };
            rho[pos] = cur - prev;
            prev = cur;
        }
    }

    /// Lovász extension `f_e(x) = max_{rho in B_e} rho^T x`.
    pub fn lovasz(&self, e: &[usize], x: &[f64]) -> Result<f64> {
        let rho = self.greedy_max_base(e, x)?;
        Ok(rho.iter().zip(x).map(|(r, v)| r * v).sum())
    }

    pub(crate) fn lovasz_with(&self, e: &[usize], x: &[f64], order: &mut Vec<usize>, rho: &mut [f64]) -> f64 {
        if matches!(self, CutCost::Unit) {
            let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            return hi - lo;
        }
        self.greedy_into(e, x, order, rho);
        rho.iter().zip(x).map(|(r, v)| r * v).sum()
    }

    /// Smallest `phi >= 0` with `r in phi * B_e`, assuming `1^T r = 0`.
    ///
    /// Returns infinity when `r` puts positive mass on a subset of zero cost.
    pub fn gauge(&self, r: &[f64]) -> f64 {
        let n = r.len();
        match self {
            CutCost::Unit => r.iter().filter(|&&v| v > 0.0).sum::<f64>(),
            CutCost::Cardinality => {
                let mut sorted = r.to_vec();
                sorted.sort_unstable_by(|a, b| b.total_cmp(a));
                let mut best = 0.0f64;
                let mut acc = 0.0;
                for (j, v) in sorted.iter().take(n - 1).enumerate() {
                    acc += v;
                    best = best.max(acc / self.value_count(n, j + 1));
                }
                best
            }
            _ => {
                let tol = 1e-10 * (1.0 + r.iter().map(|v| v.abs()).sum::<f64>());
                let full = (1u64 << n) - 1;
                let mut sums = vec![0.0; 1 << n];
                let mut best = 0.0f64;
                for mask in 1..full {
                    let low = mask.trailing_zeros() as usize;
                    let s = sums[(mask & (mask - 1)) as usize] + r[low];
                    sums[mask as usize] = s;
                    let w = self.value_mask(n, mask);
                    if w > ZERO_TOL {
                        best = best.max(s / w);
                    } else if s > tol {
                        return f64::INFINITY;
                    }
                }
                best
            }
        }
    }

    /// Partition of the positions into the atoms generated by proper subsets `S`
    /// with `w(S) = w(e \ S) = 0`. Any `r` in a scaled base polytope sums to zero
    /// on every atom. `None` when no such subset exists.
    pub fn zero_blocks(&self, size: usize) -> Option<Vec<usize>> {
        if self.depends_on_count_only() || size > MAX_TABLE_SIZE {
            return None;
        }
        let full = (1u64 << size) - 1;
        let zero_sets: Vec<u64> = (1..full)
            .filter(|&m| self.value_mask(size, m) <= ZERO_TOL && self.value_mask(size, full ^ m) <= ZERO_TOL)
            .collect();
        if zero_sets.is_empty() {
            return None;
        }
        let signature = |pos: usize| -> Vec<bool> { zero_sets.iter().map(|&m| m & (1 << pos) != 0).collect() };
        let mut sigs: Vec<Vec<bool>> = Vec::new();
        let mut blocks = Vec::with_capacity(size);
        for pos in 0..size {
            let s = signature(pos);
            let id = match sigs.iter().position(|x| *x == s) {
                Some(i) => i,
                None => {
                    sigs.push(s);
                    sigs.len() - 1
                }
            };
            blocks.push(id);
        }
        Some(blocks)
    }

    /// Exhaustive submodularity check on a hyperedge with nodes `e`.
    ///
    /// Returns the first pair `(A, B)` (as node lists) with
    /// `w(A) + w(B) < w(A ∪ B) + w(A ∩ B)`, or `None` when `w` is submodular.
    pub fn check_submodular(&self, e: &[usize]) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let n = e.len();
        if n > MAX_CHECK_SIZE {
            return Err(Error::SizeLimit { size: n, limit: MAX_CHECK_SIZE });
        }
        self.check_size(n)?;
        let values: Vec<f64> = (0..1u64 << n).map(|m| self.value_mask(n, m)).collect();
        for a in 0..1usize << n {
            for b in (a + 1)..1usize << n {
                if values[a] + values[b] < values[a | b] + values[a & b] - ZERO_TOL {
                    let nodes = |m: usize| (0..n).filter(|i| m & (1 << i) != 0).map(|i| e[i]).collect();
                    return Ok(Some((nodes(a), nodes(b))));
                }
            }
        }
        Ok(None)
    }
}

/// Sorts positions by decreasing value, ties by increasing node index.
pub(crate) fn greedy_order(e: &[usize], y: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..e.len());
    order.sort_unstable_by(|&i, &j| y[j].total_cmp(&y[i]).then(e[i].cmp(&e[j])));
}

/// Divides a raw table by its maximum; returns the normalised cost and that maximum.
pub fn normalize(raw: SubsetTable) -> Result<(CutCost, f64)> {
    let theta = raw.max();
    if theta <= 0.0 {
        return Err(Error::InvalidTable("table is identically zero".into()));
    }
    let values = raw.values.iter().map(|v| v / theta).collect();
    Ok((CutCost::custom(SubsetTable::new(raw.size, values)?), theta))
}

/// Assignment of a cut-cost to every hyperedge.
#[derive(Clone, Debug)]
pub enum CostModel {
    Uniform(CutCost),
    PerEdge(Vec<CutCost>),
}

impl CostModel {
    pub fn cost(&self, e: usize) -> &CutCost {
        match self {
            CostModel::Uniform(c) => c,
            CostModel::PerEdge(v) => &v[e],
        }
    }

    /// Verifies every hyperedge size is supported by its model.
    pub fn validate(&self, h: &Hypergraph) -> Result<()> {
        if let CostModel::PerEdge(v) = self {
            if v.len() != h.num_edges() {
                return Err(Error::LengthMismatch { what: "cut-costs vs hyperedges", expected: h.num_edges(), got: v.len() });
            }
        }
        for e in 0..h.num_edges() {
            self.cost(e).check_size(h.edge(e).len())?;
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            CostModel::Uniform(c) => c.name(),
            CostModel::PerEdge(_) => "per-edge",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E4: [usize; 4] = [0, 1, 2, 3];

    fn motif() -> CutCost {
        CutCost::MOTIF_DEFAULT
    }

    fn set(nodes: &[usize]) -> NodeSet {
        NodeSet::new(nodes.to_vec(), 16).unwrap()
    }

    #[test]
    fn unit_evaluation() {
        let e = [0, 1, 2];
        assert_eq!(CutCost::Unit.evaluate(&e, &set(&[1])).unwrap(), 1.0);
        assert_eq!(CutCost::Unit.evaluate(&e, &set(&[0, 2, 7])).unwrap(), 1.0);
        assert_eq!(CutCost::Unit.evaluate(&e, &set(&[])).unwrap(), 0.0);
        assert_eq!(CutCost::Unit.evaluate(&e, &set(&[0, 1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn motif_pair_split_is_free() {
        assert_eq!(motif().evaluate(&E4, &set(&[0, 1])).unwrap(), 0.0);
        assert_eq!(motif().evaluate(&E4, &set(&[0])).unwrap(), 0.5);
        assert_eq!(motif().evaluate(&E4, &set(&[0, 2])).unwrap(), 1.0);
        assert_eq!(motif().evaluate(&E4, &set(&[1, 3])).unwrap(), 1.0);
    }

    #[test]
    fn motif_wrong_size() {
        assert!(matches!(
            motif().evaluate(&[0, 1, 2], &set(&[0])),
            Err(Error::CutCostSize { size: 3, .. })
        ));
    }

    #[test]
    fn cardinality_evaluation() {
        let e = [0, 1, 2, 3, 4];
        assert_eq!(CutCost::Cardinality.evaluate(&e, &set(&[0, 1])).unwrap(), 1.0);
        assert_eq!(CutCost::Cardinality.evaluate(&e, &set(&[3])).unwrap(), 0.5);
    }

    #[test]
    fn greedy_unit_distinct() {
        let rho = CutCost::Unit.greedy_max_base(&E4, &[0.3, 2.0, -1.0, 0.5]).unwrap();
        assert_eq!(rho, vec![0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn greedy_constant_input() {
        for cost in [CutCost::Unit, CutCost::Cardinality, motif()] {
            let y = [1.5; 4];
            let rho = cost.greedy_max_base(&E4, &y).unwrap();
            assert!(rho.iter().sum::<f64>().abs() < 1e-15);
            assert!(rho.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn greedy_cardinality_frozen() {
        let rho = CutCost::Cardinality.greedy_max_base(&E4, &[3.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(rho, vec![0.5, 0.5, -0.5, -0.5]);
    }

    #[test]
    fn greedy_ties_by_node_index() {
        // Equal values: node 5 (position 1) precedes node 7 (position 0).
        let rho = CutCost::Unit.greedy_max_base(&[7, 5, 9], &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(rho, vec![0.0, 1.0, -1.0]);
    }

    #[test]
    fn lovasz_examples() {
        assert_eq!(CutCost::Unit.lovasz(&[0, 1], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(CutCost::Cardinality.lovasz(&E4, &[3.0, 2.0, 1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(CutCost::Cardinality.lovasz(&E4, &[2.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn submodularity_checks() {
        assert!(CutCost::Unit.check_submodular(&E4).unwrap().is_none());
        assert!(motif().check_submodular(&E4).unwrap().is_none());
        assert!(CutCost::Cardinality.check_submodular(&[0, 1, 2, 3, 4, 5, 6]).unwrap().is_none());
        // w({a}) = 0, w({b}) = 0, w({a,b}) = 1 on a 3-node edge.
        let mut values = vec![0.0; 8];
        values[0b011] = 1.0;
        values[0b100] = 1.0;
        let bad = CutCost::custom(SubsetTable::new(3, values).unwrap());
        let (a, b) = bad.check_submodular(&[10, 11, 12]).unwrap().expect("violation");
        let wa = bad.evaluate(&[10, 11, 12], &NodeSet::new(a.clone(), 13).unwrap()).unwrap();
        let wb = bad.evaluate(&[10, 11, 12], &NodeSet::new(b.clone(), 13).unwrap()).unwrap();
        assert!(wa + wb < 1.0);
        assert!(CutCost::Unit.check_submodular(&(0..13).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn normalize_scales_table() {
        let raw = SubsetTable::new(2, vec![0.0, 3.0, 3.0, 0.0]).unwrap();
        let (cost, theta) = normalize(raw).unwrap();
        assert_eq!(theta, 3.0);
        assert_eq!(cost.evaluate_members(&[true, false]).unwrap(), 1.0);
        let unit = SubsetTable::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let (cost, theta) = normalize(unit.clone()).unwrap();
        assert_eq!(theta, 1.0);
        assert_eq!(cost, CutCost::custom(unit));
        assert!(normalize(SubsetTable::new(2, vec![0.0; 4]).unwrap()).is_err());
    }

    #[test]
    fn table_validation() {
        assert!(SubsetTable::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(SubsetTable::new(2, vec![0.0, -1.0, 1.0, 0.0]).is_err());
        assert!(SubsetTable::new(2, vec![0.0; 3]).is_err());
        assert!(SubsetTable::new(17, vec![]).is_err());
    }

    #[test]
    fn gauge_matches_enumeration() {
        let r = [0.4, -0.1, 0.2, -0.5];
        for cost in [CutCost::Unit, CutCost::Cardinality] {
            let table = CutCost::custom(SubsetTable::from_cost(&cost, 4).unwrap());
            assert!((cost.gauge(&r) - table.gauge(&r)).abs() < 1e-12);
        }
        assert!((CutCost::Unit.gauge(&r) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn motif_zero_blocks_and_gauge() {
        assert_eq!(motif().zero_blocks(4), Some(vec![0, 0, 1, 1]));
        assert_eq!(CutCost::Unit.zero_blocks(4), None);
        assert!(motif().gauge(&[0.2, 0.1, -0.1, -0.2]).is_infinite());
        assert!((motif().gauge(&[0.2, -0.2, 0.1, -0.1]) - 0.4).abs() < 1e-12);
    }
}
