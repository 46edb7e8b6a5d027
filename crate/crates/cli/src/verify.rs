//! Self-checks behind `aon verify`.

use std::collections::HashSet;

use aon_core::canon::canonical_form;
use aon_core::classify::{aon_verdict, first_moment_flat_gap, is_strongly_balanced, Regime, ToleranceConfig};
use aon_core::embed::count_copies_in_complete;
use aon_core::graph::families::*;
use aon_core::numeric::{parse_biguint, parse_rational};
use aon_core::overlap::{count_bound_exact, overlap_by_enumeration, prior_overlap_distribution};
use aon_core::sim::{exhaustive_expectations, nishimori_check, planting_ratio_check, posterior_exact, Estimator, SimLimits, Simulator};
use aon_core::thresholds::{p1m, psi_q, SearchBudget};
use aon_core::Graph;
use num_bigint::BigUint;
use num_rational::BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Oracle,
    Identities,
    #[value(name = "paper-examples")]
    Examples,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn corpus() -> Vec<(&'static str, Graph)> {
    vec![
        ("K3", clique(3)),
        ("K4", clique(4)),
        ("C4", cycle(4)),
        ("C5", cycle(5)),
        ("path3", path(3)),
        ("matching4", matching(4)),
        ("matching6", matching(6)),
        ("sun4", sun(4)),
    ]
}

/// Copies of `h` in `K_n` by trying every injective vertex map.
pub fn brute_force_copies(h: &Graph, n: usize) -> usize {
    fn rec(h: &Graph, n: usize, map: &mut Vec<usize>, used: &mut Vec<bool>, seen: &mut HashSet<Vec<(usize, usize)>>) {
        if map.len() == h.vertex_count() {
            let mut e: Vec<(usize, usize)> = h
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (map[a as usize], map[b as usize]);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort_unstable();
            seen.insert(e);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                map.push(v);
                rec(h, n, map, used, seen);
                map.pop();
                used[v] = false;
            }
        }
    }
    let mut seen = HashSet::new();
    rec(h, n, &mut Vec::new(), &mut vec![false; n], &mut seen);
    seen.len()
}

fn q(s: &str) -> BigRational {
    parse_rational(s).expect("literal rational")
}

fn oracle() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (name, h) in corpus() {
        for n in h.vertex_count()..=7 {
            let formula = count_copies_in_complete(&h, &BigUint::from(n))?;
            if formula != BigUint::from(brute_force_copies(&h, n)) {
                bad.push(format!("{name}@{n}"));
            }
        }
    }
    out.push(Check::new("copy-counts", bad.is_empty(), format!("corpus, n <= 7; mismatches {bad:?}")));

    let k3 = prior_overlap_distribution(&clique(3), &BigUint::from(4u32))?;
    let m4 = prior_overlap_distribution(&matching(4), &BigUint::from(4u32))?;
    let ok = k3.probability(3) == q("1/4") && k3.probability(1) == q("3/4") && m4.probability(2) == q("1/3") && m4.probability(0) == q("2/3");
    out.push(Check::new("overlap-small", ok, "K3@4 {3:1/4, 1:3/4}, matching4@4 {2:1/3, 0:2/3}"));

    let mut bad = Vec::new();
    for h in [clique(3), clique(4), matching(4), matching(6)] {
        for n in h.vertex_count()..=8 {
            let nn = BigUint::from(n);
            if prior_overlap_distribution(&h, &nn)?.counts != overlap_by_enumeration(&h, &nn)?.counts {
                bad.push(format!("{}v@{n}", h.vertex_count()));
            }
        }
    }
    out.push(Check::new("overlap-closed-forms", bad.is_empty(), format!("cliques and matchings vs enumeration; mismatches {bad:?}")));

    let mut worst = f64::INFINITY;
    for (h, n) in [(clique(3), 5), (path(3), 4)] {
        let sim = Simulator::new(&h, n, SimLimits::default())?;
        for (i, p) in [0.1, 0.3, 0.5, 0.8].into_iter().enumerate() {
            let exact = exhaustive_expectations(&h, n, p)?;
            let est = aon_core::sim::estimate(p, &sim.run(p, 2000, 1, i)?, Estimator::ConditionalVariance);
            let slack = 3.0 * est.stderr - (est.mean - exact.mmse).abs();
            worst = worst.min(slack);
        }
    }
    out.push(Check::new("exhaustive-mmse", worst >= 0.0, format!("min slack to 3 stderr {worst:.4}")));

    let mut bad = Vec::new();
    for (name, h) in corpus() {
        for n in h.vertex_count()..=9 {
            let nn = BigUint::from(n);
            let d = overlap_by_enumeration(&h, &nn)?;
            for ell in 0..=h.edge_count() {
                if count_bound_exact(&h, &h, ell, &nn)?.exact < d.probability(ell) {
                    bad.push(format!("{name}@{n} l={ell}"));
                }
            }
        }
    }
    out.push(Check::new("count-bound", bad.is_empty(), format!("corpus, n <= 9; violations {bad:?}")));
    Ok(out)
}

fn identities() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let h = cycle(4);
    let k = BigRational::from_integer(4.into());
    let sim = Simulator::new(&h, 7, SimLimits::default())?;
    let mut bad = 0;
    for t in 0..500 {
        let inst = sim.instance(0.4, 3, t)?;
        let post = posterior_exact(&h, &inst.observation)?;
        let zero = BigRational::from_integer(0.into());
        if post.marginal_sum() != k || post.conditional_mmse < zero || post.conditional_mmse > k {
            bad += 1;
        }
    }
    out.push(Check::new("marginals-sum-to-K", bad == 0, format!("500 instances, {bad} violations")));

    let mut worst: f64 = 0.0;
    for (i, p) in [0.2, 0.5, 0.9].into_iter().enumerate() {
        for o in sim.run(p, 500, 5, i)? {
            worst = worst.max((o.kl_term + o.mi_term + 4.0 * p.ln()).abs());
        }
    }
    out.push(Check::new("D-plus-I", worst < 1e-12, format!("max |D + I - K ln(1/p)| = {worst:e}")));

    for p in [0.2, 0.5] {
        let r = nishimori_check(&clique(3), 6, p, 5000, 11)?;
        out.push(Check::new(&format!("nishimori p={p}"), r.z_score.abs() <= 3.0, format!("z = {:.3}", r.z_score)));
        let r = planting_ratio_check(&clique(3), 6, p, 5000, 12, 0.1)?;
        out.push(Check::new(
            &format!("planting p={p}"),
            r.holds,
            format!("frequency {} vs {:.4}", r.frequency, r.threshold),
        ));
    }
    Ok(out)
}

fn examples() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let n8 = BigUint::from(8u32);
    let f = p1m(&matching(8), &n8)?;
    out.push(Check::new(
        "matching8-first-moment",
        f.copies == BigUint::from(105u32) && (f.value - 105f64.powf(-0.25)).abs() < 1e-12,
        format!("M = {}, p1M = {:.6}", f.copies, f.value),
    ));

    let n100 = BigUint::from(100u32);
    let k5 = canonical_form(&clique(5))?;
    let mut ok = true;
    for s in ["0", "1/3", "1/2", "2/3"] {
        ok &= psi_q(&sun(5), &n100, &q(s))?.witness == k5;
    }
    let more = p1m(&clique(5), &n100)?.value > p1m(&sun(5), &n100)?.value;
    out.push(Check::new("sun5-witness", ok && more, "K5 for q <= 2/3 and p1M(K5) > p1M(sun5) at n = 100"));

    let k3 = psi_q(&clique(3), &BigUint::from(4u32), &q("0"))?;
    out.push(Check::new("K3-psi", (k3.psi - 4f64.powf(-1.0 / 3.0)).abs() < 1e-12, format!("{:.6}", k3.psi)));

    let one = q("1");
    let ok = is_strongly_balanced(&cycle(5), &one)?.holds && is_strongly_balanced(&path(3), &one)?.holds;
    out.push(Check::new("strongly-balanced-c1", ok, "C5 and path3 at c = 1"));

    let big = parse_biguint("1e6")?;
    let cfg = ToleranceConfig::default();
    let budget = SearchBudget::default();
    let r = aon_verdict(&cycle_with_out_edges(6), &big, &cfg, &budget)?;
    out.push(Check::new("cycle-out-exponential", r.aon_verdict.regime == Regime::Exponential, r.aon_verdict.regime.to_string()));

    let g = first_moment_flat_gap(&disjoint_cliques(&[12, 4]), &big, &q("1/10"), &q("19/20"), &budget)?.unwrap_or(f64::NAN);
    out.push(Check::new("two-cliques-flat-gap", (g - 1.2170).abs() < 1e-3, format!("{g:.4}")));

    let k8 = canonical_form(&clique(8))?;
    let h = disjoint_cliques(&[8, 4, 4, 4, 4]);
    let ok = psi_q(&h, &big, &q("0"))?.witness == k8 && psi_q(&h, &big, &q("1/2"))?.witness == k8;
    out.push(Check::new("disjoint-cliques-witnesses", ok, "K8 at q = 0 and q = 1/2"));
    Ok(out)
}

pub fn run_suite(suite: Suite) -> anyhow::Result<Vec<Check>> {
    match suite {
        Suite::Oracle => oracle(),
        Suite::Identities => identities(),
        Suite::Examples => examples(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_agrees_on_small_cases() {
        assert_eq!(brute_force_copies(&clique(3), 4), 4);
        assert_eq!(brute_force_copies(&matching(4), 4), 3);
        assert_eq!(brute_force_copies(&path(3), 3), 3);
    }
}
