//! Finite simple graphs on vertices `0..n`, the edge-list format, and the
//! pattern families used throughout the crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

/// A finite simple undirected graph. Edges are stored sorted with `u < v`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(v={}, {:?})", self.vertex_count, self.edges)
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge {a}-{b} exceeds vertex count {vertex_count}"
                )));
            }
            let e = (a.min(b) as u32, a.max(b) as u32);
            if !set.insert(e) {
                return Err(Error::InvalidParameter(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(Graph {
            vertex_count,
            edges: set.into_iter().collect(),
        })
    }

    pub(crate) fn from_sorted_unchecked(vertex_count: usize, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u < v && (v as usize) < vertex_count));
        Graph { vertex_count, edges }
    }

    pub fn empty(vertex_count: usize) -> Self {
        Graph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v) as u32, u.max(v) as u32);
        self.edges.binary_search(&e).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    pub fn neighbor_lists(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Neighborhood bitsets; only for graphs with at most 64 vertices.
    pub fn adjacency_bits(&self) -> Result<Vec<u64>> {
        if self.vertex_count > 64 {
            return Err(Error::TooManyVertices(self.vertex_count));
        }
        let mut adj = vec![0u64; self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        Ok(adj)
    }

    pub fn has_isolated_vertices(&self) -> bool {
        self.degrees().contains(&0)
    }

    /// Subgraph induced by the vertices in `mask`, relabelled in increasing order.
    pub fn induced(&self, mask: u64) -> Graph {
        let mut index = vec![u32::MAX; self.vertex_count];
        let mut next = 0u32;
        for (v, slot) in index.iter_mut().enumerate() {
            if v < 64 && mask >> v & 1 == 1 {
                *slot = next;
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u as usize] != u32::MAX && index[v as usize] != u32::MAX)
            .map(|&(u, v)| (index[u as usize], index[v as usize]))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Graph::from_sorted_unchecked(next as usize, edges)
    }

    /// The graph spanned by a set of edges: its vertices are exactly the endpoints,
    /// relabelled in increasing order of the original indices.
    pub fn spanned_by(edges: &[(u32, u32)]) -> Graph {
        let verts: BTreeSet<u32> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        let index: std::collections::HashMap<u32, u32> =
            verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut e: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (index[&u], index[&v]);
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        Graph::from_sorted_unchecked(verts.len(), e)
    }

    /// Removes isolated vertices.
    pub fn without_isolated(&self) -> Graph {
        Graph::spanned_by(&self.edges)
    }

    /// Applies `perm` (old vertex -> new vertex), which must be a permutation.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.vertex_count);
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u as usize] as u32, perm[v as usize] as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Graph::from_sorted_unchecked(self.vertex_count, edges)
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.vertex_count as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + off, v + off)));
        Graph::from_sorted_unchecked(self.vertex_count + other.vertex_count, edges)
    }

    /// Connected components as vertex lists (isolated vertices are singleton components).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.neighbor_lists();
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                for &y in &adj[x] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        comp.push(y as usize);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph on an explicit vertex list (relabelled in list order).
    pub fn subgraph_on(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![u32::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i as u32;
        }
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u as usize] != u32::MAX && index[v as usize] != u32::MAX)
            .map(|&(u, v)| {
                let (a, b) = (index[u as usize], index[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Graph::from_sorted_unchecked(vertices.len(), edges)
    }

    /// Serializes in the edge-list format: the vertex count, then one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.vertex_count);
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::from_sorted_unchecked(n, edges)
    }
}

/// Parses the edge-list format.
///
/// The first significant line is the vertex count. Every later non-empty line
/// that does not start with `#` holds `u v`. Text after a `#` is ignored. If
/// the first significant line already holds two indices there is no declared
/// count and the vertex count is one more than the largest index.
pub fn parse_graph(text: &str) -> std::result::Result<Graph, ParseError> {
    let mut declared: Option<usize> = None;
    let mut seen_header = false;
    let mut edges = BTreeSet::new();
    let mut max_index: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let malformed = || ParseError::Malformed {
            line,
            text: raw.chars().take(80).collect(),
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !seen_header {
            seen_header = true;
            if tokens.len() == 1 {
                declared = Some(tokens[0].parse().map_err(|_| malformed())?);
                continue;
            }
        }
        if tokens.len() != 2 {
            return Err(malformed());
        }
        let u: usize = tokens[0].parse().map_err(|_| malformed())?;
        let v: usize = tokens[1].parse().map_err(|_| malformed())?;
        if u == v {
            return Err(ParseError::SelfLoop { line, vertex: u });
        }
        if let Some(count) = declared {
            for vertex in [u, v] {
                if vertex >= count {
                    return Err(ParseError::EndpointOutOfRange { line, vertex, count });
                }
            }
        }
        if u > u32::MAX as usize - 1 || v > u32::MAX as usize - 1 {
            return Err(malformed());
        }
        let e = (u.min(v) as u32, u.max(v) as u32);
        if !edges.insert(e) {
            return Err(ParseError::DuplicateEdge { line, u, v });
        }
        max_index = Some(max_index.map_or(u.max(v), |m: usize| m.max(u).max(v)));
    }
    let vertex_count = declared.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    Ok(Graph::from_sorted_unchecked(vertex_count, edges.into_iter().collect()))
}

/// Named pattern families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Clique(usize),
    Cycle(usize),
    /// Path on `k` vertices.
    Path(usize),
    /// Perfect matching on `n` vertices.
    PerfectMatching(usize),
    /// Clique on `k` vertices plus one pendant edge per clique vertex.
    Sun(usize),
    DisjointCliques(Vec<usize>),
    /// `k`-cycle plus one pendant edge per cycle vertex.
    CycleWithOutEdges(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Clique(k) => write!(f, "clique({k})"),
            Family::Cycle(k) => write!(f, "cycle({k})"),
            Family::Path(k) => write!(f, "path({k})"),
            Family::PerfectMatching(n) => write!(f, "matching({n})"),
            Family::Sun(k) => write!(f, "sun({k})"),
            Family::DisjointCliques(s) => {
                let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                write!(f, "disjoint-cliques({})", parts.join(","))
            }
            Family::CycleWithOutEdges(k) => write!(f, "cycle-out({k})"),
        }
    }
}

fn positive(name: &str, k: usize, min: usize) -> Result<()> {
    if k < min {
        return Err(Error::InvalidParameter(format!("{name} needs a parameter of at least {min}, got {k}")));
    }
    Ok(())
}

/// Builds a member of a pattern family.
pub fn generate(family: &Family) -> Result<Graph> {
    match *family {
        Family::Clique(k) => {
            positive("clique", k, 1)?;
            Ok(Graph::complete(k))
        }
        Family::Cycle(k) => {
            positive("cycle", k, 3)?;
            Graph::new(k, (0..k).map(|i| (i, (i + 1) % k)))
        }
        Family::Path(k) => {
            positive("path", k, 2)?;
            Graph::new(k, (0..k - 1).map(|i| (i, i + 1)))
        }
        Family::PerfectMatching(n) => {
            positive("matching", n, 2)?;
            if n % 2 == 1 {
                return Err(Error::InvalidParameter(format!("a perfect matching needs an even vertex count, got {n}")));
            }
            Graph::new(n, (0..n / 2).map(|i| (2 * i, 2 * i + 1)))
        }
        Family::Sun(k) => {
            positive("sun", k, 1)?;
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for u in 0..k {
                for v in u + 1..k {
                    edges.push((u, v));
                }
            }
            edges.extend((0..k).map(|i| (i, k + i)));
            Graph::new(2 * k, edges)
        }
        Family::DisjointCliques(ref sizes) => {
            if sizes.is_empty() {
                return Err(Error::InvalidParameter("disjoint cliques need at least one size".into()));
            }
            let mut g = Graph::empty(0);
            for &s in sizes {
                positive("clique size", s, 1)?;
                g = g.disjoint_union(&Graph::complete(s));
            }
            Ok(g)
        }
        Family::CycleWithOutEdges(k) => {
            positive("cycle-out", k, 3)?;
            let mut edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
            edges.extend((0..k).map(|i| (i, k + i)));
            Graph::new(2 * k, edges)
        }
    }
}

/// Convenience constructors used by tests and the CLI.
pub mod families {
    use super::*;

    pub fn clique(k: usize) -> Graph {
        generate(&Family::Clique(k)).expect("valid clique")
    }
    pub fn cycle(k: usize) -> Graph {
        generate(&Family::Cycle(k)).expect("valid cycle")
    }
    pub fn path(k: usize) -> Graph {
        generate(&Family::Path(k)).expect("valid path")
    }
    pub fn matching(n: usize) -> Graph {
        generate(&Family::PerfectMatching(n)).expect("valid matching")
    }
    pub fn sun(k: usize) -> Graph {
        generate(&Family::Sun(k)).expect("valid sun")
    }
    pub fn disjoint_cliques(sizes: &[usize]) -> Graph {
        generate(&Family::DisjointCliques(sizes.to_vec())).expect("valid cliques")
    }
    pub fn cycle_with_out_edges(k: usize) -> Graph {
        generate(&Family::CycleWithOutEdges(k)).expect("valid cycle-out")
    }
    pub fn edge() -> Graph {
        clique(2)
    }
}
