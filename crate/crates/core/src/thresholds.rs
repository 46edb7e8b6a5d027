//! First-moment thresholds, generalized expectation thresholds `ψ_q`, the
//! density optimum `α_q` and log-thresholds `λ_q`.
//!
//! `λ(J) = ln M_J / e(J)` and `ψ_q = exp(-min λ(J))` over subgraphs with at least
//! `max(1, ceil(q e(H)))` edges. The minimum is found by an exact branch and
//! bound: for a vertex support `W` every `J` on `W` has
//! `λ(J) >= ln C(n, |W|) / e(H[W])` because `|Aut J| <= |W|!`.

use std::collections::{BTreeMap, HashSet};
use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::canon::{automorphism_order, canonical_graph, CanonicalForm};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{falling_factorial, ln_biguint, ln_binomial, ln_falling_factorial, min_edges_for, rational_in_unit_interval};
use crate::subgraphs::{scan_supports, Support};

/// Work limits for the subgraph searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Subgraph nodes (canonicalisations) the ψ search may visit.
    pub nodes: usize,
    /// Vertex-support representatives a scan may visit.
    pub supports: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            nodes: 1_000_000,
            supports: 1 << 28,
        }
    }
}

/// `p₁M(J) = M_J^{-1/e(J)}` with the exact copy count.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstMoment {
    pub copies: BigUint,
    pub log_copies: f64,
    pub value: f64,
    pub log_value: f64,
}

fn check_pattern(h: &Graph, n: &BigUint) -> Result<()> {
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    if BigUint::from(h.vertex_count()) > *n {
        return Err(Error::PatternTooLarge {
            pattern: h.vertex_count(),
            host: n.to_string(),
        });
    }
    Ok(())
}

fn check_q(q: &BigRational) -> Result<()> {
    if !rational_in_unit_interval(q) {
        return Err(Error::InvalidParameter(format!("q must lie in [0, 1], got {q}")));
    }
    Ok(())
}

/// `ln M_J` from the automorphism order, without forming `M_J`.
pub fn log_copies(j: &Graph, n: &BigUint, aut: &BigUint) -> f64 {
    ln_falling_factorial(n, j.vertex_count()) - ln_biguint(aut)
}

pub fn p1m(j: &Graph, n: &BigUint) -> Result<FirstMoment> {
    check_pattern(j, n)?;
    let aut = automorphism_order(j)?;
    let copies = falling_factorial(n, j.vertex_count()) / &aut;
    let log_copies = log_copies(j, n, &aut);
    let log_value = -log_copies / j.edge_count() as f64;
    Ok(FirstMoment {
        copies,
        log_copies,
        value: log_value.exp(),
        log_value,
    })
}

/// A maximiser of `p₁M` over a feasible family.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiWitness {
    pub min_edges: usize,
    /// `λ = -ln ψ`.
    pub lambda: f64,
    pub psi: f64,
    pub log_copies: f64,
    pub witness: CanonicalForm,
}

struct Candidate {
    lambda: f64,
    log_copies: f64,
    graph: Graph,
    aut: BigUint,
}

fn exact_copies(c: &Candidate, n: &BigUint) -> BigUint {
    falling_factorial(n, c.graph.vertex_count()) / &c.aut
}

/// Orders candidates by `λ` (smaller is better), exactly when the floats are close,
/// then by canonical form.
fn better(a: &Candidate, b: &Candidate, n: &BigUint) -> bool {
    let tol = 1e-9 * a.lambda.abs().max(b.lambda.abs()).max(1.0);
    let ord = if (a.lambda - b.lambda).abs() > tol {
        a.lambda.partial_cmp(&b.lambda).unwrap_or(Ordering::Equal)
    } else {
        // M_a^{1/e_a} vs M_b^{1/e_b}
        let lhs = num_traits::pow(exact_copies(a, n), b.graph.edge_count());
        let rhs = num_traits::pow(exact_copies(b, n), a.graph.edge_count());
        lhs.cmp(&rhs)
    };
    match ord {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => {
            let ka = (a.graph.vertex_count(), a.graph.edge_count(), a.graph.edges());
            let kb = (b.graph.vertex_count(), b.graph.edge_count(), b.graph.edges());
            ka < kb
        }
    }
}

/// Minimises `λ(J)` over subgraphs `J ⊆ H` with `e(J) >= min_edges`.
pub fn psi_search(h: &Graph, n: &BigUint, min_edges: usize, budget: &SearchBudget) -> Result<PsiWitness> {
    check_pattern(h, n)?;
    let e_h = h.edge_count();
    let m = min_edges.clamp(1, e_h);
    if min_edges > e_h {
        return Err(Error::InvalidParameter(format!("min_edges {min_edges} exceeds e(H) = {e_h}")));
    }
    let ln_binom: Vec<f64> = (0..=h.vertex_count()).map(|v| ln_binomial(n, v)).collect();

    let mut supports: Vec<(f64, Support)> = Vec::new();
    scan_supports(h, budget.supports, |s| {
        if s.induced_edges >= m {
            supports.push((ln_binom[s.vertices] / s.induced_edges as f64, s));
        }
    })?;
    supports.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.mask.cmp(&b.1.mask)));

    let mut best: Option<Candidate> = None;
    let mut visited: HashSet<Vec<(u32, u32)>> = HashSet::new();
    let mut nodes = 0usize;
    let slack = |best: &Option<Candidate>| best.as_ref().map_or(f64::INFINITY, |b| b.lambda + 1e-9 * b.lambda.abs().max(1.0));

    for (lb, s) in supports {
        if lb > slack(&best) {
            break;
        }
        let g = h.induced(s.mask);
        if g.has_isolated_vertices() {
            continue;
        }
        let top = canonical_graph(&g)?;
        if !visited.insert(top.edges().to_vec()) {
            continue;
        }
        let v = top.vertex_count();
        let mut level = vec![top];
        let mut e = s.induced_edges;
        loop {
            for j in &level {
                let aut = automorphism_order(j)?;
                let lc = log_copies(j, n, &aut);
                let cand = Candidate {
                    lambda: lc / e as f64,
                    log_copies: lc,
                    graph: j.clone(),
                    aut,
                };
                if best.as_ref().is_none_or(|b| better(&cand, b, n)) {
                    best = Some(cand);
                }
            }
            if e <= m || ln_binom[v] / (e - 1) as f64 > slack(&best) {
                break;
            }
            let mut next: BTreeMap<Vec<(u32, u32)>, Graph> = BTreeMap::new();
            for j in &level {
                let deg = j.degrees();
                for (skip, &(a, b)) in j.edges().iter().enumerate() {
                    if deg[a as usize] == 1 || deg[b as usize] == 1 {
                        continue;
                    }
                    nodes += 1;
                    if nodes > budget.nodes {
                        return Err(Error::BudgetExceeded(format!(
                            "threshold search visited more than {} subgraphs",
                            budget.nodes
                        )));
                    }
                    let rest: Vec<(u32, u32)> = j
                        .edges()
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    let c = canonical_graph(&Graph::from_sorted_unchecked(v, rest))?;
                    if visited.insert(c.edges().to_vec()) {
                        next.insert(c.edges().to_vec(), c);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            level = next.into_values().collect();
            e -= 1;
        }
    }
    let b = best.expect("H itself is feasible");
    Ok(PsiWitness {
        min_edges: m,
        lambda: b.lambda,
        psi: (-b.lambda).exp(),
        log_copies: b.log_copies,
        witness: CanonicalForm {
            vertex_count: b.graph.vertex_count(),
            edges: b.graph.edges().to_vec(),
            automorphism_order: b.aut,
        },
    })
}

/// `ψ_q(H)` at ambient size `n`.
pub fn psi_q(h: &Graph, n: &BigUint, q: &BigRational) -> Result<PsiWitness> {
    psi_q_with_budget(h, n, q, &SearchBudget::default())
}

pub fn psi_q_with_budget(h: &Graph, n: &BigUint, q: &BigRational, budget: &SearchBudget) -> Result<PsiWitness> {
    check_q(q)?;
    check_pattern(h, n)?;
    psi_search(h, n, min_edges_for(q, h.edge_count()), budget)
}

/// `p_E(H) = ψ₀(H)`.
pub fn expectation_threshold(h: &Graph, n: &BigUint) -> Result<PsiWitness> {
    psi_q(h, n, &BigRational::zero())
}

pub fn lambda_q(h: &Graph, n: &BigUint, q: &BigRational) -> Result<f64> {
    Ok(psi_q(h, n, q)?.lambda)
}

/// `α_q = min v(J)/e(J)` over induced subgraphs with enough edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Alpha {
    pub min_edges: usize,
    pub alpha: BigRational,
    /// Minimising vertex set, ascending.
    pub witness: Vec<usize>,
}

impl Alpha {
    pub fn witness_graph(&self, h: &Graph) -> Graph {
        h.subgraph_on(&self.witness)
    }
}

pub fn alpha_q(h: &Graph, q: &BigRational) -> Result<Alpha> {
    alpha_q_with_budget(h, q, &SearchBudget::default())
}

pub fn alpha_q_with_budget(h: &Graph, q: &BigRational, budget: &SearchBudget) -> Result<Alpha> {
    check_q(q)?;
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    alpha_min_edges(h, min_edges_for(q, h.edge_count()), budget)
}

pub(crate) fn alpha_min_edges(h: &Graph, m: usize, budget: &SearchBudget) -> Result<Alpha> {
    // (v, e, mask) of the incumbent; compare v/e by cross-multiplication
    let mut best: Option<(usize, usize, u64)> = None;
    let mut ties: Vec<u64> = Vec::new();
    scan_supports(h, budget.supports, |s| {
        if s.induced_edges < m {
            return;
        }
        let (v, e) = (s.vertices, s.induced_edges);
        match best {
            None => {
                best = Some((v, e, s.mask));
                ties = vec![s.mask];
            }
            Some((bv, be, _)) => match (v * be).cmp(&(bv * e)) {
                Ordering::Less => {
                    best = Some((v, e, s.mask));
                    ties = vec![s.mask];
                }
                Ordering::Equal => ties.push(s.mask),
                Ordering::Greater => {}
            },
        }
    })?;
    let (v, e, _) = best.ok_or(Error::Edgeless)?;
    // smallest canonical form among tied supports, then smallest mask
    type Key = (Vec<(u32, u32)>, usize, u64);
    let mut chosen: Option<Key> = None;
    for mask in ties {
        let c = canonical_graph(&h.induced(mask))?;
        let key = (c.edges().to_vec(), c.vertex_count(), mask);
        let k_ord = |a: &Key| (a.1, a.0.len(), a.0.clone(), a.2);
        if chosen.as_ref().is_none_or(|cur| k_ord(&key) < k_ord(cur)) {
            chosen = Some(key);
        }
    }
    let mask = chosen.expect("at least one tie").2;
    Ok(Alpha {
        min_edges: m,
        alpha: BigRational::new(v.into(), e.into()),
        witness: (0..64).filter(|&i| mask >> i & 1 == 1).collect(),
    })
}

/// `n^{-v(H)/e(H)}`, the dense-regime approximation of `p₁M(H)`.
pub fn dense_approx_p1m(h: &Graph, n: &BigUint) -> Result<f64> {
    Ok(dense_approx_log(h, n)?.exp())
}

pub fn dense_approx_log(h: &Graph, n: &BigUint) -> Result<f64> {
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    Ok(-(h.vertex_count() as f64 / h.edge_count() as f64) * ln_biguint(n))
}

#[derive(Debug, Clone)]
pub struct ThresholdQuery {
    pub pattern: Graph,
    pub n: BigUint,
    pub q_grid: Vec<BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    #[serde(serialize_with = "ser_rational")]
    pub q: BigRational,
    pub min_edges: usize,
    pub psi: Option<f64>,
    pub log_psi: Option<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    /// `n^{-α_q}`, a lower bound on `ψ_q`.
    pub psi_lower: f64,
    pub witness: Option<CanonicalForm>,
    pub alpha_witness: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCurve {
    #[serde(serialize_with = "ser_display")]
    pub n: BigUint,
    pub p1m: f64,
    pub log_p1m: f64,
    pub p_e: Option<f64>,
    pub points: Vec<CurvePoint>,
    /// Set when the ψ search ran out of budget; α-based values are still present.
    pub budget_exceeded: Option<String>,
}

fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::numeric::format_rational(x))
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// `ψ_q`, `α_q` and witnesses on every grid point, plus `p₁M(H)` and `p_E(H)`.
pub fn threshold_curve(query: &ThresholdQuery, budget: &SearchBudget) -> Result<ThresholdCurve> {
    let h = &query.pattern;
    check_pattern(h, &query.n)?;
    let mut grid = query.q_grid.clone();
    for q in &grid {
        check_q(q)?;
    }
    grid.sort();
    grid.dedup();
    let first = p1m(h, &query.n)?;
    let ln_n = ln_biguint(&query.n);
    let mut exceeded: Option<String> = None;
    let mut by_m: BTreeMap<usize, PsiWitness> = BTreeMap::new();
    let mut search = |m: usize, exceeded: &mut Option<String>| -> Result<Option<PsiWitness>> {
        if exceeded.is_some() {
            return Ok(None);
        }
        if let Some(w) = by_m.get(&m) {
            return Ok(Some(w.clone()));
        }
        match psi_search(h, &query.n, m, budget) {
            Ok(w) => {
                by_m.insert(m, w.clone());
                Ok(Some(w))
            }
            Err(Error::BudgetExceeded(msg)) => {
                *exceeded = Some(msg);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let mut points = Vec::with_capacity(grid.len());
    for q in &grid {
        let m = min_edges_for(q, h.edge_count());
        let alpha = alpha_min_edges(h, m, budget)?;
        let w = search(m, &mut exceeded)?;
        let a = alpha.alpha.to_f64().unwrap_or(f64::NAN);
        points.push(CurvePoint {
            q: q.clone(),
            min_edges: m,
            psi: w.as_ref().map(|w| w.psi),
            log_psi: w.as_ref().map(|w| -w.lambda),
            alpha: alpha.alpha.clone(),
            psi_lower: (-a * ln_n).exp(),
            witness: w.map(|w| w.witness),
            alpha_witness: alpha.witness,
        });
    }
    let p_e = search(1, &mut exceeded)?.map(|w| w.psi);
    Ok(ThresholdCurve {
        n: query.n.clone(),
        p1m: first.value,
        log_p1m: first.log_value,
        p_e,
        points,
        budget_exceeded: exceeded,
    })
}
