//! Canonical labelling and automorphism groups for graphs on at most 64 vertices.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::embed::{count_embeddings_colored, for_each_embedding};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::factorial;

/// An isomorphism-class representative together with its automorphism count.
///
/// Equality, ordering and hashing look only at the canonical edge set.
#[derive(Clone, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub vertex_count: usize,
    pub edges: Vec<(u32, u32)>,
    #[serde(with = "biguint_string")]
    pub automorphism_order: BigUint,
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl CanonicalForm {
    pub fn graph(&self) -> Graph {
        Graph::from_sorted_unchecked(self.vertex_count, self.edges.clone())
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn key(&self) -> (usize, usize, &[(u32, u32)]) {
        (self.vertex_count, self.edges.len(), &self.edges)
    }
}

impl PartialEq for CanonicalForm {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for CanonicalForm {}

impl Hash for CanonicalForm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for CanonicalForm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalForm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Canon(v={}, aut={}, {:?})", self.vertex_count, self.automorphism_order, self.edges)
    }
}

/// For every vertex, the mask of vertices it can be swapped with by a transposition
/// automorphism (equal neighbourhoods apart from each other). Includes itself.
pub fn twin_classes(adj: &[u64]) -> Vec<u64> {
    let n = adj.len();
    let mut class = vec![0u64; n];
    let mut assigned = 0u64;
    for u in 0..n {
        if assigned >> u & 1 == 1 {
            continue;
        }
        let mut mask = 1u64 << u;
        for w in u + 1..n {
            if assigned >> w & 1 == 0 && adj[u] & !(1 << w) == adj[w] & !(1 << u) {
                mask |= 1 << w;
            }
        }
        assigned |= mask;
        let mut m = mask;
        while m != 0 {
            class[m.trailing_zeros() as usize] = mask;
            m &= m - 1;
        }
    }
    class
}

/// Refines an ordered partition until every cell is equitable with respect to
/// every other. Fragments are ordered by neighbour count, so the result is
/// invariant under relabelling.
fn refine(adj: &[u64], cells: &mut Vec<Vec<usize>>) {
    loop {
        let mut changed = false;
        let mut si = 0;
        while si < cells.len() {
            let smask = cells[si].iter().fold(0u64, |m, &v| m | 1 << v);
            let mut ci = 0;
            while ci < cells.len() {
                if cells[ci].len() > 1 {
                    let mut keyed: Vec<(u32, usize)> = cells[ci]
                        .iter()
                        .map(|&v| ((adj[v] & smask).count_ones(), v))
                        .collect();
                    keyed.sort_unstable();
                    if keyed[0].0 != keyed[keyed.len() - 1].0 {
                        let mut parts: Vec<Vec<usize>> = Vec::new();
                        let mut last = u32::MAX;
                        for (k, v) in keyed {
                            if k != last {
                                parts.push(Vec::new());
                                last = k;
                            }
                            parts.last_mut().expect("pushed").push(v);
                        }
                        let added = parts.len() - 1;
                        cells.splice(ci..=ci, parts);
                        ci += added;
                        changed = true;
                    }
                }
                ci += 1;
            }
            si += 1;
        }
        if !changed {
            return;
        }
    }
}

fn equitable_cells(adj: &[u64]) -> Vec<Vec<usize>> {
    let mut cells = vec![(0..adj.len()).collect::<Vec<_>>()];
    if !adj.is_empty() {
        refine(adj, &mut cells);
    }
    cells
}

/// Colour (cell index) of each vertex in the coarsest equitable partition.
pub fn equitable_colors(g: &Graph) -> Result<Vec<usize>> {
    let adj = adjacency(g)?;
    let mut color = vec![0; adj.len()];
    for (i, cell) in equitable_cells(&adj).iter().enumerate() {
        for &v in cell {
            color[v] = i;
        }
    }
    Ok(color)
}

fn adjacency(g: &Graph) -> Result<Vec<u64>> {
    g.adjacency_bits()
        .map_err(|_| Error::TooManyVertices(g.vertex_count()))
}

struct Search<'a> {
    adj: &'a [u64],
    best: Option<(Vec<u64>, Vec<usize>)>,
    gens: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn certificate(&self, lab: &[usize]) -> Vec<u64> {
        let n = lab.len();
        let mut pos = vec![0usize; n];
        for (i, &v) in lab.iter().enumerate() {
            pos[v] = i;
        }
        lab.iter()
            .map(|&v| {
                let mut row = 0u64;
                let mut m = self.adj[v];
                while m != 0 {
                    row |= 1 << pos[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                row
            })
            .collect()
    }

    fn leaf(&mut self, cells: &[Vec<usize>]) {
        let lab: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let cert = self.certificate(&lab);
        match &self.best {
            None => self.best = Some((cert, lab)),
            Some((b, blab)) => match cert.cmp(b) {
                Ordering::Less => self.best = Some((cert, lab)),
                Ordering::Equal => {
                    let mut gamma = vec![0usize; lab.len()];
                    for (i, &v) in blab.iter().enumerate() {
                        gamma[v] = lab[i];
                    }
                    if gamma.iter().enumerate().any(|(i, &x)| i != x) {
                        self.gens.push(gamma);
                    }
                }
                Ordering::Greater => {}
            },
        }
    }

    fn orbit_roots(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.adj.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in &self.gens {
            if prefix.iter().all(|&p| g[p] == p) {
                for (i, &j) in g.iter().enumerate() {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    fn descend(&mut self, cells: Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
        let target = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .min_by_key(|(i, c)| (c.len(), *i))
            .map(|(i, _)| i);
        let Some(ti) = target else {
            self.leaf(&cells);
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for &w in &cells[ti] {
            if !tried.is_empty() {
                let roots = self.orbit_roots(prefix);
                if tried.iter().any(|&t| roots[t] == roots[w]) {
                    continue;
                }
            }
            tried.push(w);
            let mut child = Vec::with_capacity(cells.len() + 1);
            child.extend_from_slice(&cells[..ti]);
            child.push(vec![w]);
            child.push(cells[ti].iter().copied().filter(|&x| x != w).collect());
            child.extend_from_slice(&cells[ti + 1..]);
            refine(self.adj, &mut child);
            prefix.push(w);
            self.descend(child, prefix);
            prefix.pop();
        }
    }
}

/// A canonical relabelling `perm` (old vertex -> new vertex): isomorphic graphs
/// map to identical graphs.
pub fn canonical_labeling(g: &Graph) -> Result<Vec<usize>> {
    let adj = adjacency(g)?;
    let n = adj.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let twins = twin_classes(&adj);
    let mut gens = Vec::new();
    for (u, &class) in twins.iter().enumerate() {
        if class.trailing_zeros() as usize == u {
            let members: Vec<usize> = (0..n).filter(|&v| class >> v & 1 == 1).collect();
            for w in members.windows(2) {
                let mut t: Vec<usize> = (0..n).collect();
                t.swap(w[0], w[1]);
                gens.push(t);
            }
        }
    }
    let mut search = Search { adj: &adj, best: None, gens };
    search.descend(equitable_cells(&adj), &mut Vec::new());
    let (_, lab) = search.best.expect("at least one leaf");
    let mut perm = vec![0usize; n];
    for (i, &v) in lab.iter().enumerate() {
        perm[v] = i;
    }
    Ok(perm)
}

/// The canonical representative graph (no automorphism count).
pub fn canonical_graph(g: &Graph) -> Result<Graph> {
    Ok(g.relabel(&canonical_labeling(g)?))
}

pub fn canonical_form(g: &Graph) -> Result<CanonicalForm> {
    let c = canonical_graph(g)?;
    let automorphism_order = automorphism_order(&c)?;
    Ok(CanonicalForm {
        vertex_count: c.vertex_count(),
        edges: c.edges().to_vec(),
        automorphism_order,
    })
}

pub fn are_isomorphic(a: &Graph, b: &Graph) -> Result<bool> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    Ok(canonical_graph(a)? == canonical_graph(b)?)
}

fn connected_automorphism_order(c: &Graph) -> Result<BigUint> {
    let colors = equitable_colors(c)?;
    Ok(count_embeddings_colored(c, c, Some((&colors, &colors))))
}

/// `|Aut G|`: components are grouped by isomorphism type, and each type with
/// multiplicity `m` contributes `m! |Aut C|^m`.
pub fn automorphism_order(g: &Graph) -> Result<BigUint> {
    if g.vertex_count() > 64 {
        return Err(Error::TooManyVertices(g.vertex_count()));
    }
    let mut groups: BTreeMap<Vec<(u32, u32)>, (usize, Graph)> = BTreeMap::new();
    let mut isolated = 0usize;
    for comp in g.components() {
        if comp.len() == 1 {
            isolated += 1;
            continue;
        }
        let sub = g.subgraph_on(&comp);
        let canon = canonical_graph(&sub)?;
        let key = canon.edges().to_vec();
        groups.entry(key).or_insert((0, canon)).0 += 1;
    }
    let mut order = factorial(isolated);
    for (_, (mult, comp)) in groups {
        let a = connected_automorphism_order(&comp)?;
        order *= factorial(mult) * num_traits::pow(a, mult);
    }
    Ok(order)
}

/// Every automorphism as a vertex map, or `None` when there are more than `cap`.
pub fn automorphisms(g: &Graph, cap: usize) -> Result<Option<Vec<Vec<u32>>>> {
    let order = automorphism_order(g)?;
    match order.to_usize() {
        Some(k) if k <= cap => {}
        _ => return Ok(None),
    }
    let mut out = Vec::new();
    for_each_embedding(g, g, &[], |img| {
        out.push(img.to_vec());
        ControlFlow::Continue(())
    });
    out.sort();
    debug_assert_eq!(BigUint::from(out.len()), order);
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn automorphism_orders() {
        assert_eq!(automorphism_order(&clique(8)).unwrap(), big(40320));
        assert_eq!(automorphism_order(&cycle(5)).unwrap(), big(10));
        assert_eq!(automorphism_order(&path(4)).unwrap(), big(2));
        assert_eq!(automorphism_order(&matching(8)).unwrap(), big(384));
        assert_eq!(automorphism_order(&sun(5)).unwrap(), big(120));
        assert_eq!(automorphism_order(&cycle_with_out_edges(4)).unwrap(), big(8));
        assert_eq!(automorphism_order(&Graph::empty(3)).unwrap(), big(6));
        // K8 plus four K4: 8! * 4! * (4!)^4
        let g = disjoint_cliques(&[8, 4, 4, 4, 4]);
        assert_eq!(automorphism_order(&g).unwrap(), big(40320 * 24 * 331_776));
        // Petersen graph: no twins, vertex-transitive.
        let pet = Graph::new(
            10,
            [
                (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
                (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
                (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
            ],
        )
        .unwrap();
        assert_eq!(automorphism_order(&pet).unwrap(), big(120));
    }

    #[test]
    fn canonical_form_is_labeling_invariant() {
        let g = sun(4);
        let c = canonical_graph(&g).unwrap();
        let n = g.vertex_count();
        for shift in 1..n {
            let perm: Vec<usize> = (0..n).map(|i| (i * 5 + shift) % n).collect();
            if perm.iter().collect::<std::collections::HashSet<_>>().len() != n {
                continue;
            }
            assert_eq!(canonical_graph(&g.relabel(&perm)).unwrap(), c);
        }
        assert!(!are_isomorphic(&path(4), &Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap()).unwrap());
        assert!(are_isomorphic(&cycle(6), &Graph::new(6, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)]).unwrap()).unwrap());
    }

    #[test]
    fn automorphism_lists_match_orders() {
        for g in [cycle(6), sun(3), path(5), clique(4)] {
            let auts = automorphisms(&g, 1000).unwrap().unwrap();
            assert_eq!(big(auts.len() as u64), automorphism_order(&g).unwrap());
        }
        assert!(automorphisms(&clique(8), 100).unwrap().is_none());
    }

    #[test]
    fn twins_found() {
        let adj = clique(3).disjoint_union(&Graph::empty(2)).adjacency_bits().unwrap();
        let t = twin_classes(&adj);
        assert_eq!(t[0], 0b111);
        assert_eq!(t[3], 0b11000);
    }

    #[test]
    fn serializes_order_as_string() {
        let f = canonical_form(&clique(3)).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"automorphism_order\":\"6\""), "{s}");
    }
}
