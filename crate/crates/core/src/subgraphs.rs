//! Isomorphism classes of subgraphs and scans over vertex supports.

use std::collections::BTreeMap;

use crate::canon::{canonical_form, canonical_graph, twin_classes, CanonicalForm};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// One representative per isomorphism class of subgraphs `J ⊆ H` with
/// `e(J) >= min_edges`, without isolated vertices, ordered by decreasing edge
/// count and then by canonical form.
///
/// Classes are generated top-down: every class on `k` edges arises from a
/// class on `k + 1` edges by deleting one edge.
pub fn enumerate_subgraphs(h: &Graph, min_edges: usize) -> Result<Vec<(Graph, CanonicalForm)>> {
    enumerate_subgraphs_with_budget(h, min_edges, usize::MAX)
}

pub fn enumerate_subgraphs_with_budget(h: &Graph, min_edges: usize, budget: usize) -> Result<Vec<(Graph, CanonicalForm)>> {
    let e = h.edge_count();
    if min_edges == 0 || min_edges > e {
        return Err(Error::InvalidParameter(format!(
            "min_edges must lie in 1..={e}, got {min_edges}"
        )));
    }
    let mut out = Vec::new();
    let mut level: BTreeMap<Vec<(u32, u32)>, Graph> = BTreeMap::new();
    let top = canonical_graph(&h.without_isolated())?;
    level.insert(top.edges().to_vec(), top);
    let mut work = 0usize;
    for k in (min_edges..=e).rev() {
        let mut next: BTreeMap<Vec<(u32, u32)>, Graph> = BTreeMap::new();
        for g in level.values() {
            out.push((g.clone(), canonical_form(g)?));
            if k == min_edges {
                continue;
            }
            for skip in 0..g.edge_count() {
                work += 1;
                if work > budget {
                    return Err(Error::BudgetExceeded(format!(
                        "subgraph enumeration visited more than {budget} nodes"
                    )));
                }
                let rest: Vec<(u32, u32)> = g
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &x)| x)
                    .collect();
                let c = canonical_graph(&Graph::spanned_by(&rest))?;
                next.entry(c.edges().to_vec()).or_insert(c);
            }
        }
        level = next;
    }
    Ok(out)
}

/// A vertex support `W` of `H` (as a bitmask) with its induced edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub mask: u64,
    pub vertices: usize,
    pub induced_edges: usize,
}

/// Visits one support per orbit of the twin-transposition group: supports that
/// take the same number of vertices from each twin class induce isomorphic
/// subgraphs, so only the first members of each class are used.
///
/// The empty support is skipped. Returns an error when the number of
/// representatives would exceed `budget`.
pub fn scan_supports<F>(h: &Graph, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(Support),
{
    let adj = h
        .adjacency_bits()
        .map_err(|_| Error::TooManyVertices(h.vertex_count()))?;
    let n = adj.len();
    let twins = twin_classes(&adj);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (v, &class) in twins.iter().enumerate() {
        if class.trailing_zeros() as usize == v {
            classes.push((0..n).filter(|&w| class >> w & 1 == 1).collect());
        }
    }
    let total = classes
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64 + 1));
    match total {
        Some(t) if t <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "more than {budget} vertex supports to scan"
            )))
        }
    }
    let mut counts = vec![0usize; classes.len()];
    loop {
        // advance the mixed-radix counter
        let mut i = 0;
        while i < counts.len() && counts[i] == classes[i].len() {
            counts[i] = 0;
            i += 1;
        }
        if i == counts.len() {
            return Ok(());
        }
        counts[i] += 1;
        let mut mask = 0u64;
        for (c, &k) in classes.iter().zip(&counts) {
            for &v in &c[..k] {
                mask |= 1 << v;
            }
        }
        visit(Support {
            mask,
            vertices: mask.count_ones() as usize,
            induced_edges: induced_edge_count(&adj, mask),
        });
    }
}

pub(crate) fn induced_edge_count(adj: &[u64], mask: u64) -> usize {
    let mut m = mask;
    let mut twice = 0;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        twice += (adj[v] & mask).count_ones() as usize;
        m &= m - 1;
    }
    twice / 2
}
