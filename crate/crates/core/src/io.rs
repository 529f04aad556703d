//! Plain-text formats: hypergraphs, labels, embeddings, traces and profiles.
//!
//! A hypergraph file has one hyperedge per line with node ids separated by
//! whitespace or commas. Blank lines and lines starting with `#` are skipped.
//! Ids are arbitrary strings interned to dense indices in order of first
//! appearance. An optional weights file holds one `theta_e` per hyperedge line,
//! and an optional roles file lists, per hyperedge, its four nodes in motif role
//! order.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cutcost::{normalize, CutCost, SubsetTable};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSet};
use crate::rounding::SweepResult;
use crate::solver::TraceEntry;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { location: format!("{}:{}", path.display(), line), message: message.into() }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

/// Maps external ids to dense indices.
#[derive(Clone, Debug, Default)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn from_hypergraph(h: &Hypergraph) -> Self {
        let ids: Vec<String> = (0..h.num_nodes()).map(|v| h.node_label(v)).collect();
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { ids, index }
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), self.ids.len() - 1);
        self.ids.len() - 1
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Reads a hypergraph, optionally with per-edge weights and motif role orders.
pub fn read_hypergraph(path: &Path, weights: Option<&Path>, roles: Option<&Path>) -> Result<Hypergraph> {
    let text = fs::read_to_string(path)?;
    let mut ids = IdMap::default();
    let mut edges = Vec::new();
    for (ln, line) in data_lines(&text) {
        let edge: Vec<usize> = tokens(line).map(|t| ids.intern(t)).collect();
        let mut sorted = edge.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(path, ln, "hyperedge lists a node twice"));
        }
        edges.push(edge);
    }
    let theta = match weights {
        Some(wp) => {
            let text = fs::read_to_string(wp)?;
            let values = data_lines(&text)
                .map(|(ln, l)| l.parse::<f64>().map_err(|e| parse_err(wp, ln, e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != edges.len() {
                return Err(Error::LengthMismatch { what: "weights file lines vs hyperedges", expected: edges.len(), got: values.len() });
            }
            Some(values)
        }
        None => None,
    };
    if let Some(rp) = roles {
        let text = fs::read_to_string(rp)?;
        let lines: Vec<(usize, &str)> = data_lines(&text).collect();
        if lines.len() != edges.len() {
            return Err(Error::LengthMismatch { what: "roles file lines vs hyperedges", expected: edges.len(), got: lines.len() });
        }
        for ((ln, line), edge) in lines.into_iter().zip(edges.iter_mut()) {
            let order: Vec<usize> = tokens(line)
                .map(|t| ids.get(t).ok_or_else(|| parse_err(rp, ln, format!("unknown node id {t}"))))
                .collect::<Result<_>>()?;
            let (mut a, mut b) = (order.clone(), edge.clone());
            a.sort_unstable();
            b.sort_unstable();
            if order.len() != 4 || a != b {
                return Err(parse_err(rp, ln, "roles must list the hyperedge's four nodes"));
            }
            *edge = order;
        }
    }
    let n = ids.len();
    Hypergraph::new(n, edges, theta)?.with_node_ids(ids.ids)
}

/// Writes one hyperedge per line using external ids, plus a weights file when
/// any weight differs from one.
pub fn write_hypergraph(h: &Hypergraph, path: &Path, weights: Option<&Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(|&v| h.node_label(v)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    if let Some(wp) = weights {
        let mut out = BufWriter::new(fs::File::create(wp)?);
        for t in h.theta() {
            writeln!(out, "{t}")?;
        }
        out.flush()?;
    }
    Ok(())
}

/// Reads `id label` lines. Returns the label of every node (`None` if unlabeled).
pub fn read_labels(path: &Path, h: &Hypergraph) -> Result<Vec<Option<String>>> {
    let ids = IdMap::from_hypergraph(h);
    let text = fs::read_to_string(path)?;
    let mut labels = vec![None; h.num_nodes()];
    for (ln, line) in data_lines(&text) {
        let parts: Vec<&str> = tokens(line).collect();
        if parts.len() != 2 {
            return Err(parse_err(path, ln, "expected `id label`"));
        }
        let v = ids.get(parts[0]).ok_or_else(|| parse_err(path, ln, format!("unknown node id {}", parts[0])))?;
        labels[v] = Some(parts[1].to_string());
    }
    Ok(labels)
}

pub fn write_labels<L: std::fmt::Display>(h: &Hypergraph, labels: &[L], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (v, l) in labels.iter().enumerate() {
        writeln!(out, "{} {l}", h.node_label(v))?;
    }
    out.flush()?;
    Ok(())
}

/// Nodes carrying `label`.
pub fn label_set(labels: &[Option<String>], label: &str) -> NodeSet {
    NodeSet::from_mask(&labels.iter().map(|l| l.as_deref() == Some(label)).collect::<Vec<_>>())
}

/// Resolves external ids to a node set.
pub fn resolve_nodes<S: AsRef<str>>(h: &Hypergraph, ids: &[S]) -> Result<NodeSet> {
    let map = IdMap::from_hypergraph(h);
    let nodes = ids
        .iter()
        .map(|id| {
            map.get(id.as_ref())
                .ok_or_else(|| Error::InvalidNodeSet(format!("unknown node id {}", id.as_ref())))
        })
        .collect::<Result<Vec<_>>>()?;
    NodeSet::new(nodes, h.num_nodes())
}

/// Reads a whitespace/comma separated id list (the first column of CSV-like
/// files is used, headers `id` are skipped).
pub fn read_node_set(path: &Path, h: &Hypergraph) -> Result<NodeSet> {
    let text = fs::read_to_string(path)?;
    let ids: Vec<&str> = data_lines(&text)
        .flat_map(|(_, l)| tokens(l).take(1))
        .filter(|&t| t != "id")
        .collect();
    resolve_nodes(h, &ids)
}

pub fn write_node_set(h: &Hypergraph, set: &NodeSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for v in set.iter() {
        writeln!(out, "{}", h.node_label(v))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `id,x` rows for every node.
pub fn write_embedding(h: &Hypergraph, x: &[f64], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "id,x")?;
    for (v, val) in x.iter().enumerate() {
        writeln!(out, "{},{val:e}", h.node_label(v))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `id,x` rows; nodes not listed get zero.
pub fn read_embedding(path: &Path, h: &Hypergraph) -> Result<Vec<f64>> {
    let ids = IdMap::from_hypergraph(h);
    let text = fs::read_to_string(path)?;
    let mut x = vec![0.0; h.num_nodes()];
    for (ln, line) in data_lines(&text) {
        let parts: Vec<&str> = tokens(line).collect();
        if parts == ["id", "x"] {
            continue;
        }
        if parts.len() != 2 {
            return Err(parse_err(path, ln, "expected `id,x`"));
        }
        let v = ids.get(parts[0]).ok_or_else(|| parse_err(path, ln, format!("unknown node id {}", parts[0])))?;
        x[v] = parts[1].parse().map_err(|e: std::num::ParseFloatError| parse_err(path, ln, e.to_string()))?;
    }
    Ok(x)
}

pub fn write_trace(trace: &[TraceEntry], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "iter,primal,dual,gap,nnz,active_edges")?;
    for t in trace {
        writeln!(out, "{},{:e},{:e},{:e},{},{}", t.iter, t.primal, t.dual, t.gap, t.nnz, t.active_edges)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile(sweep: &SweepResult, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "h,size,vol,cut,cond")?;
    for p in &sweep.profile {
        writeln!(out, "{:e},{},{},{},{}", p.threshold, p.size, p.volume, p.cut, p.conductance)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a subset table: the hyperedge size followed by `2^size` values indexed
/// by membership bitmask (bit `i` is position `i`).
pub fn read_table(path: &Path) -> Result<SubsetTable> {
    let text = fs::read_to_string(path)?;
    let mut vals = data_lines(&text).flat_map(|(ln, l)| tokens(l).map(move |t| (ln, t)));
    let (ln, first) = vals.next().ok_or_else(|| parse_err(path, 1, "empty table file"))?;
    let size: usize = first.parse().map_err(|_| parse_err(path, ln, "first entry must be the hyperedge size"))?;
    let values = vals
        .map(|(ln, t)| t.parse::<f64>().map_err(|e| parse_err(path, ln, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    SubsetTable::new(size, values)
}

/// Parses `unit`, `cardinality`, `motif4`, `motif4:g1,g2` or `custom:PATH`.
/// Returns the cost and the factor by which hyperedge weights must be scaled
/// (the maximum of a custom table before normalisation).
pub fn parse_cutcost(spec: &str) -> Result<(CutCost, f64)> {
    let (name, arg) = spec.split_once(':').map_or((spec, None), |(a, b)| (a, Some(b)));
    match (name, arg) {
        ("unit", None) => Ok((CutCost::Unit, 1.0)),
        ("cardinality", None) => Ok((CutCost::Cardinality, 1.0)),
        ("motif4", None) => Ok((CutCost::MOTIF_DEFAULT, 1.0)),
        ("motif4", Some(args)) => {
            let g: Vec<f64> = tokens(args)
                .map(|t| t.parse::<f64>().map_err(|e| Error::param(format!("bad motif parameter {t}: {e}"))))
                .collect::<Result<_>>()?;
            if g.len() != 2 {
                return Err(Error::param("motif4 takes two parameters g1,g2"));
            }
            Ok((CutCost::motif4(g[0], g[1])?, 1.0))
        }
        ("custom", Some(path)) => normalize(read_table(Path::new(path))?),
        _ => Err(Error::param(format!("unknown cut-cost {spec:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutcost_names() {
        assert_eq!(parse_cutcost("unit").unwrap().0, CutCost::Unit);
        assert_eq!(parse_cutcost("cardinality").unwrap().0, CutCost::Cardinality);
        assert_eq!(parse_cutcost("motif4").unwrap().0, CutCost::MOTIF_DEFAULT);
        assert_eq!(parse_cutcost("motif4:0.3,0.1").unwrap().0, CutCost::Motif4 { gamma1: 0.3, gamma2: 0.1 });
        assert!(parse_cutcost("hamming").is_err());
        assert!(parse_cutcost("motif4:1").is_err());
    }

    #[test]
    fn tokens_split_on_commas_and_spaces() {
        assert_eq!(tokens("a, b\tc,,d").collect::<Vec<_>>(), vec!["a", "b", "c", "d"]);
    }
}
