//! Subgraph embeddings and copy counting.
//!
//! An embedding maps pattern vertices injectively to host vertices so that
//! every pattern edge lands on a host edge (occurrences are not required to be
//! induced). A copy is the image edge set of an embedding; each copy arises
//! from exactly `|Aut(pattern)|` embeddings.

use std::collections::HashSet;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::canon::{automorphism_order, automorphisms, twin_classes};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::falling_factorial;

/// Automorphism groups up to this order are listed explicitly and turned into
/// symmetry-breaking conditions; larger groups fall back to hashing copies.
pub const SYMMETRY_BREAKING_MAX_GROUP: u64 = 40_320;

/// Search order for the pattern: each step picks the unplaced vertex with the
/// most placed neighbours, then the highest degree.
struct Plan {
    order: Vec<usize>,
    /// For each position, positions of earlier pattern neighbours.
    back: Vec<Vec<usize>>,
    degree: Vec<usize>,
    /// For each position, `(earlier position, image must be greater)` pairs.
    bounds: Vec<Vec<(usize, bool)>>,
}

impl Plan {
    fn new(pattern: &Graph, conditions: &[(usize, usize)]) -> Plan {
        let n = pattern.vertex_count();
        let adj = pattern.neighbor_lists();
        let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut placed = vec![false; n];
        let mut links = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let next = (0..n)
                .filter(|&v| !placed[v])
                .max_by(|&a, &b| {
                    (links[a], deg[a])
                        .cmp(&(links[b], deg[b]))
                        .then(b.cmp(&a))
                })
                .expect("unplaced vertex");
            placed[next] = true;
            order.push(next);
            for &w in &adj[next] {
                links[w as usize] += 1;
            }
        }
        let mut pos = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let back = order
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                adj[v]
                    .iter()
                    .map(|&w| pos[w as usize])
                    .filter(|&p| p < i)
                    .collect()
            })
            .collect();
        let mut bounds = vec![Vec::new(); n];
        for &(a, b) in conditions {
            // image(a) < image(b)
            let (pa, pb) = (pos[a], pos[b]);
            if pa < pb {
                bounds[pb].push((pa, true));
            } else {
                bounds[pa].push((pb, false));
            }
        }
        let degree = order.iter().map(|&v| deg[v]).collect();
        Plan {
            order,
            back,
            degree,
            bounds,
        }
    }
}

enum Host {
    Dense { adj: Vec<u64>, deg_at_least: Vec<u64>, all: u64 },
    Sparse { adj: Vec<Vec<u32>>, deg: Vec<usize>, edges: HashSet<(u32, u32)> },
}

impl Host {
    fn new(host: &Graph) -> Host {
        let n = host.vertex_count();
        if n <= 64 {
            let adj = host.adjacency_bits().expect("checked size");
            let deg: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
            let maxd = deg.iter().copied().max().unwrap_or(0) as usize;
            let deg_at_least = (0..=maxd + 1)
                .map(|d| {
                    deg.iter()
                        .enumerate()
                        .filter(|&(_, &x)| x as usize >= d)
                        .fold(0u64, |m, (i, _)| m | 1 << i)
                })
                .collect();
            let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            Host::Dense { adj, deg_at_least, all }
        } else {
            let adj = host.neighbor_lists();
            let deg = adj.iter().map(Vec::len).collect();
            Host::Sparse {
                adj,
                deg,
                edges: host.edges().iter().copied().collect(),
            }
        }
    }
}

/// Candidate mask for `pos` given the images of earlier positions (dense hosts).
#[inline]
fn dense_candidates(plan: &Plan, adj: &[u64], deg_at_least: &[u64], all: u64, used: u64, img: &[u32], pos: usize) -> u64 {
    let d = plan.degree[pos].min(deg_at_least.len() - 1);
    let mut cand = all & !used & deg_at_least[d];
    for &p in &plan.back[pos] {
        cand &= adj[img[p] as usize];
    }
    for &(p, greater) in &plan.bounds[pos] {
        let t = img[p];
        if greater {
            cand &= if t >= 63 { 0 } else { !((2u64 << t) - 1) };
        } else {
            cand &= (1u64 << t) - 1;
        }
    }
    cand
}

/// Number of embeddings of `pattern` into `host`. Interchangeable host vertices
/// (twins with identical neighbourhoods) are explored once and weighted by
/// how many of them are still free.
pub fn count_embeddings(pattern: &Graph, host: &Graph) -> BigUint {
    count_embeddings_colored(pattern, host, None)
}

/// As [`count_embeddings`], restricted to maps that preserve the given vertex colours.
pub(crate) fn count_embeddings_colored(pattern: &Graph, host: &Graph, colors: Option<(&[usize], &[usize])>) -> BigUint {
    let (pn, hn) = (pattern.vertex_count(), host.vertex_count());
    if pn > hn {
        return BigUint::zero();
    }
    if pn == 0 {
        return BigUint::one();
    }
    let plan = Plan::new(pattern, &[]);
    match Host::new(host) {
        Host::Dense { adj, deg_at_least, all } => {
            let twins = twin_classes(&adj);
            let color_masks: Option<(Vec<u64>, Vec<usize>)> = colors.map(|(pc, hc)| {
                let k = hc.iter().chain(pc.iter()).copied().max().unwrap_or(0) + 1;
                let mut masks = vec![0u64; k];
                for (v, &c) in hc.iter().enumerate() {
                    masks[c] |= 1 << v;
                }
                (masks, plan.order.iter().map(|&v| pc[v]).collect())
            });
            let mut img = vec![0u32; pn];
            let ctx = DenseCount {
                plan: &plan,
                adj: &adj,
                deg_at_least: &deg_at_least,
                all,
                twins: &twins,
                colors: color_masks.as_ref(),
            };
            match ctx.count_u128(0, 0, &mut img) {
                Some(c) => BigUint::from(c),
                None => ctx.count_big(0, 0, &mut img),
            }
        }
        Host::Sparse { adj, deg, edges } => {
            let mut img = vec![0u32; pn];
            let mut used = vec![false; hn];
            let mut total = BigUint::zero();
            let _ = sparse_walk(&plan, &adj, &deg, &edges, colors, 0, &mut img, &mut used, &mut |_| {
                total += 1u32;
                ControlFlow::Continue(())
            });
            total
        }
    }
}

struct DenseCount<'a> {
    plan: &'a Plan,
    adj: &'a [u64],
    deg_at_least: &'a [u64],
    all: u64,
    twins: &'a [u64],
    colors: Option<&'a (Vec<u64>, Vec<usize>)>,
}

impl DenseCount<'_> {
    fn candidates(&self, pos: usize, used: u64, img: &[u32]) -> u64 {
        let mut cand = dense_candidates(self.plan, self.adj, self.deg_at_least, self.all, used, img, pos);
        if let Some((masks, pcolor)) = self.colors {
            cand &= masks.get(pcolor[pos]).copied().unwrap_or(0);
        }
        cand
    }

    fn count_u128(&self, pos: usize, used: u64, img: &mut [u32]) -> Option<u128> {
        if pos == img.len() {
            return Some(1);
        }
        let mut cand = self.candidates(pos, used, img);
        let mut total: u128 = 0;
        while cand != 0 {
            let u = cand.trailing_zeros();
            let class = self.twins[u as usize] & cand;
            cand &= !class;
            img[pos] = u;
            let sub = self.count_u128(pos + 1, used | 1 << u, img)?;
            total = total.checked_add(sub.checked_mul(class.count_ones() as u128)?)?;
        }
        Some(total)
    }

    fn count_big(&self, pos: usize, used: u64, img: &mut [u32]) -> BigUint {
        if pos == img.len() {
            return BigUint::one();
        }
        let mut cand = self.candidates(pos, used, img);
        let mut total = BigUint::zero();
        while cand != 0 {
            let u = cand.trailing_zeros();
            let class = self.twins[u as usize] & cand;
            cand &= !class;
            img[pos] = u;
            total += self.count_big(pos + 1, used | 1 << u, img) * class.count_ones();
        }
        total
    }
}

#[allow(clippy::too_many_arguments)]
fn sparse_walk(
    plan: &Plan,
    adj: &[Vec<u32>],
    deg: &[usize],
    edges: &HashSet<(u32, u32)>,
    colors: Option<(&[usize], &[usize])>,
    pos: usize,
    img: &mut [u32],
    used: &mut [bool],
    f: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if pos == img.len() {
        return f(img);
    }
    let pv = plan.order[pos];
    let pool: Box<dyn Iterator<Item = u32>> = match plan.back[pos].first() {
        Some(&p) => Box::new(adj[img[p] as usize].clone().into_iter()),
        None => Box::new(0..adj.len() as u32),
    };
    for u in pool {
        let ui = u as usize;
        if used[ui] || deg[ui] < plan.degree[pos] {
            continue;
        }
        if let Some((pc, hc)) = colors {
            if pc[pv] != hc[ui] {
                continue;
            }
        }
        let ok_adj = plan.back[pos].iter().all(|&p| {
            let w = img[p];
            edges.contains(&(w.min(u), w.max(u)))
        });
        let ok_bounds = plan.bounds[pos]
            .iter()
            .all(|&(p, greater)| if greater { u > img[p] } else { u < img[p] });
        if !ok_adj || !ok_bounds {
            continue;
        }
        img[pos] = u;
        used[ui] = true;
        let r = sparse_walk(plan, adj, deg, edges, colors, pos + 1, img, used, f);
        used[ui] = false;
        r?;
    }
    ControlFlow::Continue(())
}

/// Visits every embedding satisfying `conditions` (`image(a) < image(b)` for each
/// pair). The callback receives the image of each pattern vertex, indexed by
/// pattern vertex.
pub fn for_each_embedding<F>(pattern: &Graph, host: &Graph, conditions: &[(usize, usize)], mut f: F)
where
    F: FnMut(&[u32]) -> ControlFlow<()>,
{
    let (pn, hn) = (pattern.vertex_count(), host.vertex_count());
    if pn > hn {
        return;
    }
    let plan = Plan::new(pattern, conditions);
    let mut by_vertex = vec![0u32; pn];
    let mut emit = |img: &[u32]| {
        for (i, &v) in plan.order.iter().enumerate() {
            by_vertex[v] = img[i];
        }
        f(&by_vertex)
    };
    let mut img = vec![0u32; pn];
    match Host::new(host) {
        Host::Dense { adj, deg_at_least, all } => {
            let _ = dense_walk(&plan, &adj, &deg_at_least, all, 0, 0, &mut img, &mut emit);
        }
        Host::Sparse { adj, deg, edges } => {
            let mut used = vec![false; hn];
            let _ = sparse_walk(&plan, &adj, &deg, &edges, None, 0, &mut img, &mut used, &mut emit);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dense_walk(
    plan: &Plan,
    adj: &[u64],
    deg_at_least: &[u64],
    all: u64,
    pos: usize,
    used: u64,
    img: &mut [u32],
    f: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if pos == img.len() {
        return f(img);
    }
    let mut cand = dense_candidates(plan, adj, deg_at_least, all, used, img, pos);
    while cand != 0 {
        let u = cand.trailing_zeros();
        cand &= cand - 1;
        img[pos] = u;
        dense_walk(plan, adj, deg_at_least, all, pos + 1, used | 1 << u, img, f)?;
    }
    ControlFlow::Continue(())
}

/// Symmetry-breaking conditions from an explicit automorphism group: repeatedly
/// take the vertex with the largest orbit, require it to carry the smallest
/// image in that orbit, and pass to its stabiliser. Exactly one embedding per
/// copy satisfies the resulting conditions.
pub fn symmetry_conditions(group: &[Vec<u32>]) -> Vec<(usize, usize)> {
    let mut g: Vec<&Vec<u32>> = group.iter().collect();
    let n = group.first().map_or(0, Vec::len);
    let mut conds = Vec::new();
    while g.len() > 1 {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for v in 0..n {
            let mut orbit: Vec<usize> = g.iter().map(|p| p[v] as usize).collect();
            orbit.sort_unstable();
            orbit.dedup();
            if best.as_ref().is_none_or(|(_, o)| orbit.len() > o.len()) {
                best = Some((v, orbit));
            }
        }
        let (v, orbit) = best.expect("nonempty group");
        for w in orbit {
            if w != v {
                conds.push((v, w));
            }
        }
        g.retain(|p| p[v] as usize == v);
    }
    conds
}

/// How copies are deduplicated during enumeration.
enum Dedup {
    Conditions(Vec<(usize, usize)>),
    Hash,
}

fn dedup_strategy(pattern: &Graph) -> Result<Dedup> {
    let order = automorphism_order(pattern)?;
    if order <= BigUint::from(SYMMETRY_BREAKING_MAX_GROUP) {
        let group = automorphisms(pattern, SYMMETRY_BREAKING_MAX_GROUP as usize)?
            .expect("group fits the cap");
        Ok(Dedup::Conditions(symmetry_conditions(&group)))
    } else {
        Ok(Dedup::Hash)
    }
}

/// Copy enumeration for a fixed pattern, reusable across hosts.
pub struct CopyFinder {
    pattern: Graph,
    dedup: Dedup,
}

impl CopyFinder {
    pub fn new(pattern: &Graph) -> Result<CopyFinder> {
        Ok(CopyFinder {
            pattern: pattern.clone(),
            dedup: dedup_strategy(pattern)?,
        })
    }

    pub fn pattern(&self) -> &Graph {
        &self.pattern
    }

    /// Visits every copy in `host` exactly once, as a sorted list of host
    /// edges, in a deterministic order.
    pub fn for_each<F>(&self, host: &Graph, mut f: F)
    where
        F: FnMut(&[(u32, u32)]) -> ControlFlow<()>,
    {
        let pedges = self.pattern.edges();
        let mut buf: Vec<(u32, u32)> = Vec::with_capacity(pedges.len());
        let image = |img: &[u32], buf: &mut Vec<(u32, u32)>| {
            buf.clear();
            buf.extend(pedges.iter().map(|&(a, b)| {
                let (x, y) = (img[a as usize], img[b as usize]);
                (x.min(y), x.max(y))
            }));
            buf.sort_unstable();
        };
        match &self.dedup {
            Dedup::Conditions(conds) => {
                for_each_embedding(&self.pattern, host, conds, |img| {
                    image(img, &mut buf);
                    f(&buf)
                });
            }
            Dedup::Hash => {
                let mut seen: HashSet<Vec<(u32, u32)>> = HashSet::new();
                for_each_embedding(&self.pattern, host, &[], |img| {
                    image(img, &mut buf);
                    if seen.insert(buf.clone()) {
                        f(&buf)
                    } else {
                        ControlFlow::Continue(())
                    }
                });
            }
        }
    }
}

/// Visits every copy of `pattern` in `host` exactly once, as a sorted list of
/// host edges, in a deterministic order.
pub fn for_each_copy<F>(pattern: &Graph, host: &Graph, f: F) -> Result<()>
where
    F: FnMut(&[(u32, u32)]) -> ControlFlow<()>,
{
    CopyFinder::new(pattern)?.for_each(host, f);
    Ok(())
}

/// All copies of `pattern` in `host`, each as a sorted edge list.
pub fn enumerate_copies(pattern: &Graph, host: &Graph) -> Result<Vec<Vec<(u32, u32)>>> {
    let mut out = Vec::new();
    for_each_copy(pattern, host, |c| {
        out.push(c.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// `M_{J,H}`: the number of copies of `j` inside `h`.
pub fn count_copies_in(j: &Graph, h: &Graph) -> Result<BigUint> {
    let aut = automorphism_order(j)?;
    let emb = count_embeddings(j, h);
    debug_assert!((&emb % &aut).is_zero());
    Ok(emb / aut)
}

/// `M_H = (n)_{v(H)} / |Aut H|`, the number of copies of `h` in `K_n`.
pub fn count_copies_in_complete(h: &Graph, n: &BigUint) -> Result<BigUint> {
    if BigUint::from(h.vertex_count()) > *n {
        return Err(Error::PatternTooLarge {
            pattern: h.vertex_count(),
            host: n.to_string(),
        });
    }
    let aut = automorphism_order(h)?;
    Ok(falling_factorial(n, h.vertex_count()) / aut)
}

/// Index of the pair `{u, v}` in the lexicographic listing of pairs of `K_n`.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = (u.min(v), u.max(v));
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    /// Brute force: all injective maps by exhaustive recursion, no pruning.
    fn brute_embeddings(p: &Graph, h: &Graph) -> u64 {
        fn go(i: usize, p: &Graph, h: &Graph, img: &mut Vec<usize>, used: &mut Vec<bool>) -> u64 {
            if i == p.vertex_count() {
                let ok = p.edges().iter().all(|&(a, b)| h.has_edge(img[a as usize], img[b as usize]));
                return ok as u64;
            }
            let mut t = 0;
            for u in 0..h.vertex_count() {
                if !used[u] {
                    used[u] = true;
                    img.push(u);
                    t += go(i + 1, p, h, img, used);
                    img.pop();
                    used[u] = false;
                }
            }
            t
        }
        go(0, p, h, &mut Vec::new(), &mut vec![false; h.vertex_count()])
    }

    #[test]
    fn counts_match_brute_force() {
        let hosts = [clique(5), cycle(6), sun(3), disjoint_cliques(&[3, 3]), path(5)];
        let pats = [edge(), path(3), clique(3), cycle(4), matching(4)];
        for h in &hosts {
            for p in &pats {
                assert_eq!(
                    count_embeddings(p, h),
                    BigUint::from(brute_embeddings(p, h)),
                    "{p:?} in {h:?}"
                );
            }
        }
    }

    #[test]
    fn copy_examples() {
        assert_eq!(enumerate_copies(&clique(3), &clique(4)).unwrap().len(), 4);
        assert_eq!(enumerate_copies(&clique(3), &cycle(5)).unwrap().len(), 0);
        assert_eq!(enumerate_copies(&edge(), &clique(3)).unwrap().len(), 3);
        assert_eq!(count_copies_in(&edge(), &clique(4)).unwrap(), BigUint::from(6u32));
        assert_eq!(count_copies_in(&clique(3), &clique(5)).unwrap(), BigUint::from(10u32));
        assert_eq!(count_copies_in(&path(3), &clique(3)).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn complete_host_counts() {
        let n = |x: u32| BigUint::from(x);
        assert_eq!(count_copies_in_complete(&clique(3), &n(4)).unwrap(), n(4));
        assert_eq!(count_copies_in_complete(&clique(5), &n(20)).unwrap(), n(15504));
        assert_eq!(count_copies_in_complete(&matching(8), &n(8)).unwrap(), n(105));
        assert!(count_copies_in_complete(&clique(5), &n(4)).is_err());
    }

    #[test]
    fn copies_are_distinct_and_match_hash_dedup() {
        for p in [clique(3), path(4), cycle(4), matching(4), sun(2)] {
            let host = Graph::complete(7);
            let copies = enumerate_copies(&p, &host).unwrap();
            let set: HashSet<_> = copies.iter().cloned().collect();
            assert_eq!(set.len(), copies.len());
            let mut hashed = HashSet::new();
            for_each_embedding(&p, &host, &[], |img| {
                let mut e: Vec<(u32, u32)> = p
                    .edges()
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (img[a as usize], img[b as usize]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                e.sort_unstable();
                hashed.insert(e);
                ControlFlow::Continue(())
            });
            assert_eq!(set, hashed);
        }
    }

    #[test]
    fn sparse_host_path_agrees() {
        // 70 vertices forces the adjacency-list host.
        let big = clique(4).disjoint_union(&cycle(66));
        assert_eq!(count_copies_in(&clique(3), &big).unwrap(), BigUint::from(4u32));
        assert_eq!(count_copies_in(&path(3), &big).unwrap(), BigUint::from(12u32 + 66));
        assert_eq!(enumerate_copies(&clique(3), &big).unwrap().len(), 4);
    }

    #[test]
    fn pair_indices_are_dense() {
        let n = 7;
        let mut seen = vec![false; n * (n - 1) / 2];
        for u in 0..n {
            for v in u + 1..n {
                let i = pair_index(n, u, v);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }
}
