//! Overlap distribution of two independent uniform copies, growth functionals,
//! truncated moment certificates and the `v_ℓ` statistic.

use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::canon::automorphism_order;
use crate::embed::{count_copies_in_complete, for_each_copy, for_each_embedding, pair_index};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{binomial, factorial, format_rational, ln_biguint, ln_rational, rational_to_f64};
use crate::subgraphs::enumerate_subgraphs;

/// Largest host on which the overlap distribution is enumerated.
pub const OVERLAP_MAX_N: usize = 12;
/// Largest copy count streamed during enumeration.
pub const OVERLAP_MAX_COPIES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMethod {
    Enumeration,
    CliqueFormula,
    MatchingFormula,
}

/// Law of `|H₀ ∩ H'|` for a fixed copy `H₀` and a uniform copy `H'`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapDistribution {
    pub edges: usize,
    pub n: BigUint,
    pub total_copies: BigUint,
    /// `counts[ℓ]` copies share exactly `ℓ` edges with `H₀`.
    pub counts: Vec<BigUint>,
    pub method: OverlapMethod,
}

impl OverlapDistribution {
    pub fn probability(&self, ell: usize) -> BigRational {
        match self.counts.get(ell) {
            Some(c) => BigRational::new(BigInt::from(c.clone()), BigInt::from(self.total_copies.clone())),
            None => BigRational::zero(),
        }
    }

    pub fn probability_f64(&self, ell: usize) -> f64 {
        rational_to_f64(&self.probability(ell))
    }

    pub fn log_probability(&self, ell: usize) -> f64 {
        match self.counts.get(ell) {
            Some(c) if !c.is_zero() => ln_biguint(c) - ln_biguint(&self.total_copies),
            _ => f64::NEG_INFINITY,
        }
    }

    /// `ℓ = 0` plus every overlap with positive probability.
    pub fn rows(&self) -> Vec<usize> {
        (0..=self.edges)
            .filter(|&l| l == 0 || !self.counts[l].is_zero())
            .collect()
    }

    pub fn total_probability(&self) -> BigRational {
        (0..=self.edges).map(|l| self.probability(l)).fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn mean(&self) -> BigRational {
        (0..=self.edges)
            .map(|l| self.probability(l) * BigRational::from_integer(l.into()))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn log_copies(&self) -> f64 {
        ln_biguint(&self.total_copies)
    }
}

fn is_clique(h: &Graph) -> bool {
    let v = h.vertex_count();
    v >= 2 && h.edge_count() == v * (v - 1) / 2
}

fn is_matching(h: &Graph) -> bool {
    h.edge_count() > 0 && h.degrees().iter().all(|&d| d == 1)
}

/// Exact overlap distribution: closed forms for cliques and matchings, otherwise
/// enumeration of all copies in `K_n` against one fixed copy.
pub fn prior_overlap_distribution(h: &Graph, n: &BigUint) -> Result<OverlapDistribution> {
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    if is_clique(h) {
        return clique_overlap(h.vertex_count(), n);
    }
    if is_matching(h) {
        return matching_overlap(h.edge_count(), n);
    }
    overlap_by_enumeration(h, n)
}

pub fn overlap_by_enumeration(h: &Graph, n: &BigUint) -> Result<OverlapDistribution> {
    let total = count_copies_in_complete(h, n)?;
    let nn = n.to_usize().filter(|&x| x <= OVERLAP_MAX_N).ok_or_else(|| {
        Error::BudgetExceeded(format!("overlap enumeration needs n <= {OVERLAP_MAX_N}, got {n}"))
    })?;
    if total > BigUint::from(OVERLAP_MAX_COPIES) {
        return Err(Error::BudgetExceeded(format!(
            "{total} copies exceed the overlap enumeration guard of {OVERLAP_MAX_COPIES}"
        )));
    }
    let mut fixed = 0u128;
    for &(a, b) in h.edges() {
        fixed |= 1 << pair_index(nn, a as usize, b as usize);
    }
    let mut counts = vec![0u64; h.edge_count() + 1];
    for_each_copy(h, &Graph::complete(nn), |copy| {
        let shared = copy
            .iter()
            .filter(|&&(a, b)| fixed >> pair_index(nn, a as usize, b as usize) & 1 == 1)
            .count();
        counts[shared] += 1;
        ControlFlow::Continue(())
    })?;
    let dist = OverlapDistribution {
        edges: h.edge_count(),
        n: n.clone(),
        total_copies: total,
        counts: counts.into_iter().map(BigUint::from).collect(),
        method: OverlapMethod::Enumeration,
    };
    debug_assert!(dist.total_probability().is_one());
    Ok(dist)
}

/// Two `k`-cliques sharing `w` vertices share `C(w, 2)` edges.
fn clique_overlap(k: usize, n: &BigUint) -> Result<OverlapDistribution> {
    let kb = BigUint::from(k);
    if kb > *n {
        return Err(Error::PatternTooLarge { pattern: k, host: n.to_string() });
    }
    let e = k * (k - 1) / 2;
    let mut counts = vec![BigUint::zero(); e + 1];
    let rest = n - &kb;
    for w in 0..=k {
        counts[w * w.saturating_sub(1) / 2] += binomial(&kb, w) * binomial(&rest, k - w);
    }
    Ok(OverlapDistribution {
        edges: e,
        n: n.clone(),
        total_copies: binomial(n, k),
        counts,
        method: OverlapMethod::CliqueFormula,
    })
}

/// Number of `s`-edge matchings in `K_m`.
fn matchings(m: &BigUint, s: usize) -> BigUint {
    if BigUint::from(2 * s) > *m {
        return BigUint::zero();
    }
    binomial(m, 2 * s) * factorial(2 * s) / (factorial(s) << s)
}

/// `t`-edge matchings: fix the shared `j` edges, then count matchings on the
/// remaining vertices that avoid the other `t - j` edges of `H₀` by
/// inclusion-exclusion.
fn matching_overlap(t: usize, n: &BigUint) -> Result<OverlapDistribution> {
    if BigUint::from(2 * t) > *n {
        return Err(Error::PatternTooLarge { pattern: 2 * t, host: n.to_string() });
    }
    let mut counts = vec![BigUint::zero(); t + 1];
    for (j, slot) in counts.iter_mut().enumerate() {
        let r = t - j;
        let m = n - BigUint::from(2 * j);
        let mut acc = BigInt::zero();
        for i in 0..=r {
            let term = BigInt::from(binomial(&BigUint::from(r), i) * matchings(&(&m - BigUint::from(2 * i)), r - i));
            if i % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let avoid = acc.to_biguint().expect("inclusion-exclusion count is nonnegative");
        *slot = binomial(&BigUint::from(t), j) * avoid;
    }
    Ok(OverlapDistribution {
        edges: t,
        n: n.clone(),
        total_copies: matchings(n, t),
        counts,
        method: OverlapMethod::MatchingFormula,
    })
}

/// `(1/K) ln(P(ℓ) / p₁M^ℓ)`; `-inf` when `P(ℓ) = 0`.
pub fn growth_functional(d: &OverlapDistribution, ell: usize) -> f64 {
    growth_log(d, ell) / d.edges as f64
}

/// `ln(P(ℓ) / p₁M^ℓ) / ln M`.
pub fn weak_growth_functional(d: &OverlapDistribution, ell: usize) -> f64 {
    growth_log(d, ell) / d.log_copies()
}

fn growth_log(d: &OverlapDistribution, ell: usize) -> f64 {
    let lp = d.log_probability(ell);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    // p₁M^ℓ = M^{-ℓ/K}
    lp + ell as f64 / d.edges as f64 * d.log_copies()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTerm {
    pub ell: usize,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSum {
    pub p: f64,
    #[serde(serialize_with = "ser_rational")]
    pub delta: BigRational,
    pub sum: f64,
    pub terms: Vec<MomentTerm>,
}

fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub first_moment: MomentSum,
    pub second_moment: MomentSum,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

fn check_delta(delta: &BigRational) -> Result<()> {
    if delta.is_negative() || *delta > BigRational::one() {
        return Err(Error::InvalidParameter(format!("δ must lie in [0, 1], got {delta}")));
    }
    Ok(())
}

fn sum_terms(p: f64, delta: &BigRational, terms: Vec<MomentTerm>) -> MomentSum {
    let sum = terms.iter().map(|t| t.term).collect::<crate::numeric::KahanSum>().total();
    MomentSum {
        p,
        delta: delta.clone(),
        sum,
        terms,
    }
}

/// `Σ_{ℓ <= (1-δ)K} P(ℓ) M p^{K-ℓ}`.
pub fn truncated_first_moment(d: &OverlapDistribution, p: f64, delta: &BigRational) -> Result<MomentSum> {
    check_p(p)?;
    check_delta(delta)?;
    let k = d.edges;
    let cut = (BigRational::one() - delta) * BigRational::from_integer(k.into());
    let terms = d
        .rows()
        .into_iter()
        .filter(|&l| BigRational::from_integer(l.into()) <= cut)
        .map(|l| {
            let c = &d.counts[l];
            let term = if c.is_zero() {
                0.0
            } else {
                (ln_biguint(c) + (k - l) as f64 * p.ln()).exp()
            };
            MomentTerm { ell: l, term }
        })
        .collect();
    Ok(sum_terms(p, delta, terms))
}

/// `Σ_{ℓ >= Kδ} P(ℓ) / p^ℓ`.
pub fn truncated_second_moment(d: &OverlapDistribution, p: f64, delta: &BigRational) -> Result<MomentSum> {
    check_p(p)?;
    check_delta(delta)?;
    let cut = delta * BigRational::from_integer(d.edges.into());
    let terms = d
        .rows()
        .into_iter()
        .filter(|&l| BigRational::from_integer(l.into()) >= cut)
        .map(|l| {
            let lp = d.log_probability(l);
            let term = if lp == f64::NEG_INFINITY { 0.0 } else { (lp - l as f64 * p.ln()).exp() };
            MomentTerm { ell: l, term }
        })
        .collect();
    Ok(sum_terms(p, delta, terms))
}

pub fn moment_report(d: &OverlapDistribution, p: f64, delta_first: &BigRational, delta_second: &BigRational) -> Result<MomentReport> {
    Ok(MomentReport {
        first_moment: truncated_first_moment(d, p, delta_first)?,
        second_moment: truncated_second_moment(d, p, delta_second)?,
    })
}

/// `E_P Z = Σ_ℓ P(ℓ) M p^{K-ℓ}`, the planted-model mean of the copy count.
pub fn planted_mean_copies(d: &OverlapDistribution, p: f64) -> f64 {
    (0..=d.edges)
        .filter(|&l| !d.counts[l].is_zero())
        .map(|l| (ln_biguint(&d.counts[l]) + (d.edges - l) as f64 * p.ln()).exp())
        .collect::<crate::numeric::KahanSum>()
        .total()
}

/// Fewest vertices of an `ℓ`-edge graph that is a subgraph of both `h` and `h2`;
/// `None` when no such graph exists.
pub fn v_ell(h: &Graph, h2: &Graph, ell: usize) -> Result<Option<usize>> {
    if ell == 0 {
        return Ok(Some(0));
    }
    if ell > h.edge_count().min(h2.edge_count()) {
        return Err(Error::InvalidParameter(format!(
            "ℓ = {ell} exceeds min(e(H), e(H')) = {}",
            h.edge_count().min(h2.edge_count())
        )));
    }
    let mut best: Option<usize> = None;
    for (j, _) in enumerate_subgraphs(h, ell)? {
        if j.edge_count() != ell || best.is_some_and(|b| j.vertex_count() >= b) {
            continue;
        }
        let mut found = false;
        for_each_embedding(&j, h2, &[], |_| {
            found = true;
            ControlFlow::Break(())
        });
        if found {
            best = Some(j.vertex_count());
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountBound {
    pub exact: BigRational,
    pub value: f64,
    /// `v_ℓ`, or `None` when infeasible (the sum then starts at `w = 0`).
    pub v_ell: Option<usize>,
}

/// `(1/M_H) Σ_{w >= v_ℓ} C(v(H'), w) C(n - v(H'), v(H) - w) Ψ_H` with `Ψ_H = v(H)!/|Aut H|`.
pub fn count_bound_exact(h: &Graph, h2: &Graph, ell: usize, n: &BigUint) -> Result<CountBound> {
    let (v, v2) = (h.vertex_count(), h2.vertex_count());
    if v > v2 || BigUint::from(v2) > *n {
        return Err(Error::InvalidParameter(format!("need v(H) <= v(H') <= n, got {v}, {v2}, {n}")));
    }
    let vl = v_ell(h, h2, ell)?;
    let aut = automorphism_order(h)?;
    let psi = factorial(v) / &aut;
    let m_h = count_copies_in_complete(h, n)?;
    let rest = n - BigUint::from(v2);
    let mut total = BigUint::zero();
    for w in vl.unwrap_or(0)..=v {
        total += binomial(&BigUint::from(v2), w) * binomial(&rest, v - w) * &psi;
    }
    let exact = BigRational::new(BigInt::from(total), BigInt::from(m_h));
    let value = ln_rational(&exact).exp();
    Ok(CountBound { exact, value, v_ell: vl })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::numeric::parse_rational;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn small_distributions() {
        let d = prior_overlap_distribution(&clique(3), &big(4)).unwrap();
        assert_eq!(d.probability(3), r("1/4"));
        assert_eq!(d.probability(1), r("3/4"));
        assert_eq!(d.probability(0), r("0"));
        assert_eq!(d.rows(), vec![0, 1, 3]);
        let d = prior_overlap_distribution(&edge(), &big(3)).unwrap();
        assert_eq!((d.probability(1), d.probability(0)), (r("1/3"), r("2/3")));
        let d = prior_overlap_distribution(&matching(4), &big(4)).unwrap();
        assert_eq!((d.probability(2), d.probability(0)), (r("1/3"), r("2/3")));
        assert_eq!(d.rows(), vec![0, 2]);
    }

    #[test]
    fn closed_forms_match_enumeration() {
        for n in 2..=8u64 {
            for k in 2..=4usize {
                if k as u64 <= n {
                    let a = clique_overlap(k, &big(n)).unwrap();
                    let b = overlap_by_enumeration(&clique(k), &big(n)).unwrap();
                    assert_eq!(a.counts, b.counts, "K{k} n={n}");
                }
            }
            for t in 1..=3usize {
                if 2 * t as u64 <= n {
                    let a = matching_overlap(t, &big(n)).unwrap();
                    let b = overlap_by_enumeration(&matching(2 * t), &big(n)).unwrap();
                    assert_eq!(a.counts, b.counts, "matching {t} n={n}");
                    assert_eq!(a.total_copies, b.total_copies);
                }
            }
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        for h in [sun(3), cycle(5), path(4), cycle_with_out_edges(3)] {
            for n in [h.vertex_count() as u64, 9] {
                let d = prior_overlap_distribution(&h, &big(n)).unwrap();
                assert!(d.total_probability().is_one());
                assert_eq!(d.probability(d.edges), BigRational::new(1.into(), d.total_copies.clone().into()));
            }
        }
        let d = prior_overlap_distribution(&clique(3), &big(40)).unwrap();
        assert_eq!(d.method, OverlapMethod::CliqueFormula);
        assert!(d.total_probability().is_one());
        assert!(overlap_by_enumeration(&cycle(4), &big(13)).is_err());
    }

    #[test]
    fn growth_examples() {
        let d = prior_overlap_distribution(&clique(3), &big(4)).unwrap();
        assert!(growth_functional(&d, 3).abs() < 1e-12);
        assert_eq!(growth_functional(&d, 0), f64::NEG_INFINITY);
        let d = prior_overlap_distribution(&clique(5), &big(20)).unwrap();
        for l in d.rows() {
            let g = growth_functional(&d, l);
            if l == 0 {
                assert!(g <= 0.0);
            }
            assert!(g.is_finite());
        }
    }

    #[test]
    fn moment_examples() {
        let d = prior_overlap_distribution(&clique(3), &big(4)).unwrap();
        let f = truncated_first_moment(&d, 0.1, &r("1/3")).unwrap();
        assert!((f.sum - 0.03).abs() < 1e-12);
        let s = truncated_second_moment(&d, 0.9, &r("1/3")).unwrap();
        assert!((s.sum - (0.75 / 0.9 + 0.25 / 0.729)).abs() < 1e-12);
        let m = prior_overlap_distribution(&matching(4), &big(4)).unwrap();
        let f = truncated_first_moment(&m, 0.05, &r("1/2")).unwrap();
        assert!((f.sum - 0.005).abs() < 1e-12);
        let s = truncated_second_moment(&m, 0.9, &r("1")).unwrap();
        assert!((s.sum - (1.0 / 3.0) / 0.81).abs() < 1e-12);
        // p = 1
        let f = truncated_first_moment(&d, 1.0, &r("1/3")).unwrap();
        assert!((f.sum - 3.0).abs() < 1e-12);
        let s = truncated_second_moment(&d, 1.0, &r("1/3")).unwrap();
        assert!(s.sum <= 1.0 + 1e-12);
    }

    #[test]
    fn moments_monotone_in_delta() {
        let d = prior_overlap_distribution(&cycle(5), &big(8)).unwrap();
        let deltas = ["0", "1/5", "2/5", "3/5", "4/5", "1"];
        for p in [0.2, 0.5, 0.9] {
            let mut lf = f64::INFINITY;
            let mut ls = f64::INFINITY;
            for x in deltas {
                let f = truncated_first_moment(&d, p, &r(x)).unwrap().sum;
                let s = truncated_second_moment(&d, p, &r(x)).unwrap().sum;
                assert!(f <= lf + 1e-15 && s <= ls + 1e-15);
                lf = f;
                ls = s;
            }
        }
    }

    #[test]
    fn v_ell_examples() {
        assert_eq!(v_ell(&clique(4), &clique(4), 2).unwrap(), Some(3));
        assert_eq!(v_ell(&cycle(5), &cycle(5), 2).unwrap(), Some(3));
        assert_eq!(v_ell(&sun(3), &sun(3), 6).unwrap(), Some(6));
        assert_eq!(v_ell(&clique(3), &matching(4), 2).unwrap(), None);
    }

    #[test]
    fn count_bound_examples() {
        let b = count_bound_exact(&clique(3), &clique(3), 1, &big(4)).unwrap();
        assert!(b.exact >= r("3/4"));
        let b = count_bound_exact(&clique(3), &clique(3), 3, &big(4)).unwrap();
        assert_eq!(b.exact, r("1/4"));
        let b = count_bound_exact(&clique(3), &matching(4), 2, &big(5)).unwrap();
        assert_eq!(b.v_ell, None);
        assert!(b.exact.is_one());
        assert!(count_bound_exact(&matching(4), &clique(3), 1, &big(5)).is_err());
    }
}
