//! Structural conditions on a pattern and the resulting all-or-nothing verdict.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::canon::CanonicalForm;
use crate::embed::count_copies_in;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{format_rational, ln_biguint, min_edges_for, rational_in_unit_interval};
use crate::subgraphs::{enumerate_subgraphs_with_budget, scan_supports};
use crate::thresholds::{alpha_q_with_budget, p1m, psi_q_with_budget, PsiWitness, SearchBudget};

/// Finite-n stand-ins for the asymptotic conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceConfig {
    pub ratio_tol: f64,
    pub deloc_c: f64,
    pub deloc_q: BigRational,
    pub stable_delta: BigRational,
    pub flat_pairs: Vec<(BigRational, BigRational)>,
    pub dense_threshold: f64,
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            ratio_tol: 0.1,
            deloc_c: 10.0,
            deloc_q: rat(1, 2),
            stable_delta: rat(1, 10),
            flat_pairs: vec![(rat(1, 10), rat(9, 10)), (rat(1, 10), rat(19, 20))],
            dense_threshold: 3.0,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let open = |q: &BigRational| q.is_positive() && *q < BigRational::one();
        if !(self.ratio_tol > 0.0 && self.deloc_c > 0.0 && self.dense_threshold > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !open(&self.deloc_q) || !open(&self.stable_delta) {
            return Err(Error::InvalidParameter("deloc_q and stable_delta must lie in (0, 1)".into()));
        }
        if self.flat_pairs.is_empty() {
            return Err(Error::InvalidParameter("flat_pairs must not be empty".into()));
        }
        for (a, b) in &self.flat_pairs {
            if !open(a) || !open(b) || a > b {
                return Err(Error::InvalidParameter(format!(
                    "flat pair ({a}, {b}) must satisfy 0 < q <= q' < 1"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a densest-subgraph style check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceCheck {
    pub holds: bool,
    /// Largest value of the compared density over subgraphs, as `"num/den"`.
    pub max_density: String,
    /// Vertex set attaining it (empty when `holds`).
    pub witness: Vec<usize>,
}

fn ratio_scan(h: &Graph, budget: &SearchBudget, shift: &BigRational) -> Result<(BigRational, u64)> {
    let mut best: Option<(BigRational, u64)> = None;
    scan_supports(h, budget.supports, |s| {
        if s.induced_edges == 0 {
            return;
        }
        let den = BigRational::from_integer(s.vertices.into()) - shift;
        let r = BigRational::from_integer(s.induced_edges.into()) / den;
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, s.mask));
        }
    })?;
    best.ok_or(Error::Edgeless)
}

fn mask_vertices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn shifted_check(h: &Graph, c: &BigRational, budget: &SearchBudget) -> Result<BalanceCheck> {
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    let (best, mask) = ratio_scan(h, budget, c)?;
    let own = BigRational::from_integer(h.edge_count().into())
        / (BigRational::from_integer(h.vertex_count().into()) - c);
    let holds = best <= own;
    Ok(BalanceCheck {
        holds,
        max_density: format_rational(&best),
        witness: if holds { Vec::new() } else { mask_vertices(mask) },
    })
}

/// `e(H)/v(H)` is the largest density among nonempty subgraphs.
pub fn is_balanced(h: &Graph) -> Result<BalanceCheck> {
    shifted_check(h, &BigRational::zero(), &SearchBudget::default())
}

/// `e(J)/(v(J)-c) <= e(H)/(v(H)-c)` for every nonempty `J ⊆ H`.
pub fn is_strongly_balanced(h: &Graph, c: &BigRational) -> Result<BalanceCheck> {
    if !c.is_positive() || *c >= rat(2, 1) {
        return Err(Error::InvalidParameter(format!("c must lie in (0, 2), got {c}")));
    }
    shifted_check(h, c, &SearchBudget::default())
}

/// Largest `c` in `(0, 2)` for which `H` is strongly balanced, or `None`.
///
/// Each support `W` with `f` induced edges gives `c (E - f) <= E |W| - f V`.
/// A result of exactly 2 means every `c < 2` works.
pub fn max_strongly_balanced_c(h: &Graph) -> Result<Option<BigRational>> {
    let (e_h, v_h) = (h.edge_count(), h.vertex_count());
    if e_h == 0 {
        return Err(Error::Edgeless);
    }
    let mut sup = rat(2, 1);
    let mut impossible = false;
    scan_supports(h, SearchBudget::default().supports, |s| {
        let (w, f) = (s.vertices as i64, s.induced_edges as i64);
        if f == 0 {
            return;
        }
        let (e, v) = (e_h as i64, v_h as i64);
        let rhs = e * w - f * v;
        if e > f {
            let bound = rat(rhs, e - f);
            if bound < sup {
                sup = bound;
            }
        } else if rhs < 0 {
            impossible = true;
        }
    })?;
    if impossible || !sup.is_positive() {
        return Ok(None);
    }
    Ok(Some(sup))
}

/// `e(H) / (v(H) ln v(H))`.
pub fn dense_diagnostic(h: &Graph) -> Result<f64> {
    let v = h.vertex_count();
    if v < 2 {
        return Err(Error::InvalidParameter("dense diagnostic needs at least 2 vertices".into()));
    }
    Ok(h.edge_count() as f64 / (v as f64 * (v as f64).ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delocalization {
    pub holds: bool,
    /// `(α_q - α_0) ln n`.
    pub gap: f64,
    pub alpha_q: String,
    pub alpha_0: String,
}

/// `α_q <= α_0 + C / ln n` at the configured `q` and `C`.
pub fn is_delocalized(h: &Graph, n: &BigUint, cfg: &ToleranceConfig) -> Result<Delocalization> {
    if *n < BigUint::from(3u32) {
        return Err(Error::InvalidParameter("n must be at least 3".into()));
    }
    let b = SearchBudget::default();
    let aq = alpha_q_with_budget(h, &cfg.deloc_q, &b)?.alpha;
    let a0 = alpha_q_with_budget(h, &BigRational::zero(), &b)?.alpha;
    let diff = (&aq - &a0).to_f64().unwrap_or(f64::NAN);
    let gap = diff * ln_biguint(n);
    Ok(Delocalization {
        holds: gap <= cfg.deloc_c,
        gap,
        alpha_q: format_rational(&aq),
        alpha_0: format_rational(&a0),
    })
}

fn check_pair(q: &BigRational, q2: &BigRational) -> Result<()> {
    if !rational_in_unit_interval(q) || !rational_in_unit_interval(q2) || q > q2 {
        return Err(Error::InvalidParameter(format!("need 0 <= q <= q' <= 1, got ({q}, {q2})")));
    }
    Ok(())
}

/// `ψ_q / ψ_{q'}` (at least 1).
pub fn almost_balanced_gap(h: &Graph, n: &BigUint, q: &BigRational, q2: &BigRational, budget: &SearchBudget) -> Result<f64> {
    check_pair(q, q2)?;
    let a = psi_q_with_budget(h, n, q, budget)?;
    let b = psi_q_with_budget(h, n, q2, budget)?;
    Ok((b.lambda - a.lambda).exp())
}

/// `λ_{q'} / λ_q` for `q <= q'` (at least 1); `None` when `λ_q = 0`.
pub fn first_moment_flat_gap(h: &Graph, n: &BigUint, q: &BigRational, q2: &BigRational, budget: &SearchBudget) -> Result<Option<f64>> {
    check_pair(q, q2)?;
    let a = psi_q_with_budget(h, n, q, budget)?;
    let b = psi_q_with_budget(h, n, q2, budget)?;
    Ok(flat_ratio(&a, &b))
}

fn flat_ratio(a: &PsiWitness, b: &PsiWitness) -> Option<f64> {
    (a.lambda > 0.0).then(|| b.lambda / a.lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableGap {
    /// `λ_{1-δ} / λ_1` (at most 1); `None` when `λ_1 = 0`.
    pub gap: Option<f64>,
    /// `max ln M_{H|J} / ln M_H` over `J` with `e(J) >= (1-δ) e(H)`; `None` when the
    /// subgraph enumeration exceeds its budget or `M_H = 1`.
    pub max_conditional_ratio: Option<f64>,
    pub witness: Option<CanonicalForm>,
}

pub fn first_moment_stable_gap(h: &Graph, n: &BigUint, delta: &BigRational, budget: &SearchBudget) -> Result<StableGap> {
    if !delta.is_positive() || *delta >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    let top = psi_q_with_budget(h, n, &BigRational::one(), budget)?;
    let below = psi_q_with_budget(h, n, &(BigRational::one() - delta), budget)?;
    let gap = (top.lambda > 0.0).then(|| below.lambda / top.lambda);
    let (max_conditional_ratio, witness) = match conditional_extension_ratio(h, n, &(BigRational::one() - delta), budget) {
        Ok(Some((r, w))) => (Some(r), Some(w)),
        Ok(None) | Err(Error::BudgetExceeded(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(StableGap {
        gap,
        max_conditional_ratio,
        witness,
    })
}

/// `max ln M_{H|J} / ln M_H` with `M_{H|J} = M_H M_{J,H} / M_J`.
fn conditional_extension_ratio(h: &Graph, n: &BigUint, q: &BigRational, budget: &SearchBudget) -> Result<Option<(f64, CanonicalForm)>> {
    let m = min_edges_for(q, h.edge_count());
    let first = p1m(h, n)?;
    if first.copies <= BigUint::one() {
        return Ok(None);
    }
    let mut best: Option<(f64, CanonicalForm)> = None;
    for (j, form) in enumerate_subgraphs_with_budget(h, m, budget.nodes)? {
        let inside = count_copies_in(&j, h)?;
        let mj = p1m(&j, n)?;
        let log_cond = first.log_copies + ln_biguint(&inside) - mj.log_copies;
        let r = log_cond / first.log_copies;
        if best.as_ref().is_none_or(|(b, _)| r > *b + 1e-12) {
            best = Some((r, form));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadCertificate {
    pub p_bar: f64,
    pub min_edges: usize,
    pub witness: CanonicalForm,
}

/// Smallest `p̄` with `P(A ⊆ S) <= p̄^{|A|}` for every `A` of at least `δ e(H)` edges:
/// `max (M_{J,H} / M_J)^{1/e(J)}` over subgraph classes `J`.
pub fn spread_certificate(h: &Graph, n: &BigUint, delta: &BigRational, budget: &SearchBudget) -> Result<SpreadCertificate> {
    if !delta.is_positive() || *delta > BigRational::one() {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1], got {delta}")));
    }
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    let m = min_edges_for(delta, h.edge_count());
    let mut best: Option<(f64, CanonicalForm)> = None;
    for (j, form) in enumerate_subgraphs_with_budget(h, m, budget.nodes)? {
        let inside = count_copies_in(&j, h)?;
        let mj = p1m(&j, n)?;
        let lv = (ln_biguint(&inside) - mj.log_copies) / j.edge_count() as f64;
        if best.as_ref().is_none_or(|(b, _)| lv > *b + 1e-12) {
            best = Some((lv, form));
        }
    }
    let (lv, witness) = best.expect("H itself qualifies");
    Ok(SpreadCertificate {
        p_bar: lv.exp(),
        min_edges: m,
        witness,
    })
}

/// `3 p̄(δ) / δ`: above this edge density the planted copy is not recoverable.
pub fn nothing_regime_bound(h: &Graph, n: &BigUint, delta: &BigRational, budget: &SearchBudget) -> Result<f64> {
    let s = spread_certificate(h, n, delta, budget)?;
    Ok(3.0 * s.p_bar / delta.to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub name: String,
    pub operation: String,
    pub holds: Option<bool>,
    pub numeric_gap: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Linear,
    Exponential,
    NoneDetected,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Linear => "linear",
            Regime::Exponential => "exponential",
            Regime::NoneDetected => "none-detected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub regime: Regime,
    pub route: Option<String>,
    pub predicted_threshold: Option<f64>,
    pub theorem: Option<String>,
    pub failing_conditions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub vertices: usize,
    pub edges: usize,
    pub n: String,
    pub conditions: Vec<ConditionEntry>,
    pub aon_verdict: Verdict,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionEntry> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub const THEOREM_SPARSE: &str = "linear AoN for small strongly balanced patterns";
pub const THEOREM_DENSE: &str = "linear AoN for dense delocalized almost-balanced patterns";
pub const THEOREM_EXPONENTIAL: &str = "exponential AoN for first-moment-flat and stable patterns";

fn entry(name: &str, operation: &str, holds: Option<bool>, gap: Option<f64>, detail: String) -> ConditionEntry {
    ConditionEntry {
        name: name.into(),
        operation: operation.into(),
        holds,
        numeric_gap: gap,
        detail,
    }
}

/// `c ln n / (3 ln ln n)`, the size bound of the sparse route.
pub fn sparse_size_bound(c: &BigRational, n: &BigUint) -> f64 {
    let ln_n = ln_biguint(n);
    c.to_f64().unwrap_or(f64::NAN) * ln_n / (3.0 * ln_n.ln())
}

/// Evaluates every condition and applies the sparse, dense and exponential
/// routes in that order.
pub fn aon_verdict(h: &Graph, n: &BigUint, cfg: &ToleranceConfig, budget: &SearchBudget) -> Result<ClassificationReport> {
    cfg.validate()?;
    if h.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    if *n < BigUint::from(h.vertex_count().max(3)) {
        return Err(Error::PatternTooLarge {
            pattern: h.vertex_count(),
            host: n.to_string(),
        });
    }
    let mut conditions = Vec::new();
    let mut notes = vec![
        "none-detected means no implemented sufficient condition applied; it does not assert that AoN fails".to_string(),
        "asymptotic conditions are checked at this n with the configured tolerances and q grid".to_string(),
    ];

    let balanced = is_balanced(h)?;
    conditions.push(entry("balanced", "is_balanced", Some(balanced.holds), None, format!("max density {}", balanced.max_density)));

    let c_star = max_strongly_balanced_c(h)?;
    let size = (h.vertex_count() + h.edge_count()) as f64;
    let sparse = match &c_star {
        Some(c) => {
            let bound = sparse_size_bound(c, n);
            conditions.push(entry(
                "strongly-balanced",
                "max_strongly_balanced_c",
                Some(true),
                c.to_f64(),
                format!("supremum c = {}", format_rational(c)),
            ));
            let fits = size <= bound;
            conditions.push(entry(
                "sparse-size-bound",
                "aon_verdict",
                Some(fits),
                Some(bound),
                format!("v(H)+e(H) = {size} against c ln n/(3 ln ln n) = {bound:.6}"),
            ));
            fits
        }
        None => {
            conditions.push(entry("strongly-balanced", "max_strongly_balanced_c", Some(false), None, "no c > 0 works".into()));
            false
        }
    };

    let dense = dense_diagnostic(h)?;
    let dense_ok = dense >= cfg.dense_threshold;
    conditions.push(entry("dense", "dense_diagnostic", Some(dense_ok), Some(dense), format!("threshold {}", cfg.dense_threshold)));

    let deloc = is_delocalized(h, n, cfg)?;
    conditions.push(entry(
        "delocalized",
        "is_delocalized",
        Some(deloc.holds),
        Some(deloc.gap),
        format!("alpha_q = {}, alpha_0 = {}, C = {}", deloc.alpha_q, deloc.alpha_0, cfg.deloc_c),
    ));

    // ψ at every grid point, shared by the remaining checks
    let mut grid: Vec<BigRational> = cfg.flat_pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    grid.push(cfg.deloc_q.clone());
    grid.push(BigRational::one());
    grid.push(BigRational::one() - &cfg.stable_delta);
    grid.sort();
    grid.dedup();
    let mut psi: Vec<(BigRational, PsiWitness)> = Vec::new();
    let mut budget_note = None;
    for q in &grid {
        match psi_q_with_budget(h, n, q, budget) {
            Ok(w) => psi.push((q.clone(), w)),
            Err(Error::BudgetExceeded(msg)) => {
                budget_note = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let at = |q: &BigRational| psi.iter().find(|(x, _)| x == q).map(|(_, w)| w);

    let mut almost = Some(true);
    let mut flat = Some(true);
    let mut worst_ratio: Option<f64> = None;
    let mut worst_flat: Option<f64> = None;
    let mut flat_detail = Vec::new();
    for (a, b) in &cfg.flat_pairs {
        match (at(a), at(b)) {
            (Some(wa), Some(wb)) => {
                let ratio = (wb.lambda - wa.lambda).exp();
                worst_ratio = Some(worst_ratio.map_or(ratio, |r: f64| r.max(ratio)));
                if ratio > 1.0 + cfg.ratio_tol {
                    almost = Some(false);
                }
                match flat_ratio(wa, wb) {
                    Some(g) => {
                        worst_flat = Some(worst_flat.map_or(g, |r: f64| r.max(g)));
                        if g > 1.0 + cfg.ratio_tol {
                            flat = Some(false);
                        }
                        flat_detail.push(format!("({}, {}): {g:.6}", format_rational(a), format_rational(b)));
                    }
                    None => {
                        flat = Some(false);
                        flat_detail.push(format!("({}, {}): degenerate, λ_q = 0", format_rational(a), format_rational(b)));
                    }
                }
            }
            _ => {
                almost = None;
                flat = None;
            }
        }
    }
    conditions.push(entry(
        "almost-balanced",
        "almost_balanced_gap",
        almost,
        worst_ratio,
        format!("max ψ_q/ψ_q' over pairs, tolerance 1 + {}", cfg.ratio_tol),
    ));
    conditions.push(entry(
        "first-moment-flat",
        "first_moment_flat_gap",
        flat,
        worst_flat,
        format!("λ_q'/λ_q per pair: {}", flat_detail.join("; ")),
    ));

    let stable_q = BigRational::one() - &cfg.stable_delta;
    let (stable, stable_gap) = match (at(&stable_q), at(&BigRational::one())) {
        (Some(lo), Some(top)) if top.lambda > 0.0 => {
            let g = lo.lambda / top.lambda;
            (Some(g >= 1.0 - cfg.ratio_tol), Some(g))
        }
        (Some(_), Some(_)) => (Some(false), None),
        _ => (None, None),
    };
    conditions.push(entry(
        "first-moment-stable",
        "first_moment_stable_gap",
        stable,
        stable_gap,
        format!("λ_(1-δ)/λ_1 at δ = {}, tolerance 1 - {}", format_rational(&cfg.stable_delta), cfg.ratio_tol),
    ));
    if let Some(msg) = &budget_note {
        notes.push(format!("threshold search stopped early: {msg}"));
    }

    let first = p1m(h, n)?;
    let mut failing = Vec::new();
    let verdict = if sparse {
        Verdict {
            regime: Regime::Linear,
            route: Some("sparse".into()),
            predicted_threshold: Some(first.value),
            theorem: Some(THEOREM_SPARSE.into()),
            failing_conditions: failing,
        }
    } else if dense_ok && deloc.holds && almost == Some(true) {
        Verdict {
            regime: Regime::Linear,
            route: Some("dense".into()),
            predicted_threshold: at(&cfg.deloc_q).map(|w| w.psi),
            theorem: Some(THEOREM_DENSE.into()),
            failing_conditions: failing,
        }
    } else if flat == Some(true) && stable == Some(true) {
        Verdict {
            regime: Regime::Exponential,
            route: Some("exponential".into()),
            predicted_threshold: Some(first.value),
            theorem: Some(THEOREM_EXPONENTIAL.into()),
            failing_conditions: failing,
        }
    } else {
        for c in &conditions {
            if c.name != "balanced" && c.holds != Some(true) {
                failing.push(c.name.clone());
            }
        }
        Verdict {
            regime: Regime::NoneDetected,
            route: None,
            predicted_threshold: None,
            theorem: None,
            failing_conditions: failing,
        }
    };
    Ok(ClassificationReport {
        vertices: h.vertex_count(),
        edges: h.edge_count(),
        n: n.to_string(),
        conditions,
        aon_verdict: verdict,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::numeric::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn balance() {
        assert!(is_balanced(&clique(6)).unwrap().holds);
        assert!(is_balanced(&cycle(7)).unwrap().holds);
        let s = is_balanced(&sun(5)).unwrap();
        assert!(!s.holds);
        assert_eq!(s.witness, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.max_density, "2/1");
    }

    #[test]
    fn strong_balance() {
        assert!(is_strongly_balanced(&cycle(4), &q("1")).unwrap().holds);
        assert!(is_strongly_balanced(&clique(4), &q("1")).unwrap().holds);
        let co = is_strongly_balanced(&cycle_with_out_edges(4), &q("1")).unwrap();
        assert!(!co.holds);
        assert_eq!(co.witness, vec![0, 1, 2, 3]);
        assert!(is_strongly_balanced(&clique(4), &q("2")).is_err());
        assert!(is_strongly_balanced(&path(3), &q("1")).unwrap().holds);
        assert!(is_strongly_balanced(&cycle(5), &q("1")).unwrap().holds);
    }

    #[test]
    fn strong_balance_supremum() {
        assert_eq!(max_strongly_balanced_c(&path(3)).unwrap(), Some(q("1")));
        assert_eq!(max_strongly_balanced_c(&clique(3)).unwrap(), Some(q("3/2")));
        assert_eq!(max_strongly_balanced_c(&cycle(4)).unwrap(), Some(q("4/3")));
        assert_eq!(max_strongly_balanced_c(&cycle(5)).unwrap(), Some(q("5/4")));
        assert_eq!(max_strongly_balanced_c(&cycle_with_out_edges(5)).unwrap(), None);
        assert_eq!(max_strongly_balanced_c(&sun(4)).unwrap(), None);
        // the supremum is itself feasible, anything above is not
        for h in [path(4), clique(4), cycle(6)] {
            let c = max_strongly_balanced_c(&h).unwrap().unwrap();
            if c < q("2") {
                assert!(is_strongly_balanced(&h, &c).unwrap().holds);
                let above = &c + q("1/1000");
                if above < q("2") {
                    assert!(!is_strongly_balanced(&h, &above).unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn dense_values() {
        assert!((dense_diagnostic(&clique(20)).unwrap() - 3.17118).abs() < 1e-4);
        assert!((dense_diagnostic(&matching(100)).unwrap() - 0.10857).abs() < 1e-4);
        assert!((dense_diagnostic(&cycle(10)).unwrap() - std::f64::consts::LOG10_E).abs() < 1e-4);
    }

    #[test]
    fn delocalization() {
        let cfg = ToleranceConfig::default();
        let d = is_delocalized(&sun(5), &big(100), &cfg).unwrap();
        assert!(d.holds);
        assert_eq!(d.alpha_0, "1/2");
        let d = is_delocalized(&clique(7), &big(1000), &cfg).unwrap();
        assert!(d.holds && d.gap == 0.0);
    }

    #[test]
    fn spread_examples() {
        let b = SearchBudget::default();
        let s = spread_certificate(&matching(4), &big(4), &q("1/2"), &b).unwrap();
        assert!((s.p_bar - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let s = spread_certificate(&clique(3), &big(5), &q("1"), &b).unwrap();
        assert!((s.p_bar - 0.1f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let nb = nothing_regime_bound(&clique(3), &big(5), &q("1"), &b).unwrap();
        assert!((nb - 1.3925).abs() < 1e-3);
        let nb = nothing_regime_bound(&matching(4), &big(4), &q("1/2"), &b).unwrap();
        assert!((nb - 3.4641).abs() < 1e-3);
        for h in [sun(3), cycle(5), path(4)] {
            let n = big(20);
            let p = p1m(&h, &n).unwrap().value;
            let mut last = f64::INFINITY;
            for d in ["1/10", "1/3", "1/2", "1"] {
                let s = spread_certificate(&h, &n, &q(d), &b).unwrap().p_bar;
                assert!(s >= p * (1.0 - 1e-12));
                assert!(s <= last * (1.0 + 1e-12));
                last = s;
            }
        }
    }

    #[test]
    fn verdicts() {
        let cfg = ToleranceConfig::default();
        let b = SearchBudget::default();
        let n = big(1_000_000);
        let r = aon_verdict(&cycle_with_out_edges(6), &n, &cfg, &b).unwrap();
        assert_eq!(r.aon_verdict.regime, Regime::Exponential);
        let r = aon_verdict(&disjoint_cliques(&[12, 4]), &n, &cfg, &b).unwrap();
        assert_eq!(r.aon_verdict.regime, Regime::NoneDetected);
        assert!(r.aon_verdict.failing_conditions.contains(&"first-moment-flat".to_string()));
        let flat = r.condition("first-moment-flat").unwrap().numeric_gap.unwrap();
        assert!(flat > 1.1, "{flat}");
    }
}
