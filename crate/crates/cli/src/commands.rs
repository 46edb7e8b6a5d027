//! Command implementations. Each returns the artifacts it produced, primary first.

use aon_core::canon::CanonicalForm;
use aon_core::classify::aon_verdict;
use aon_core::numeric::{format_float, format_rational, parse_rational};
use aon_core::overlap::{growth_functional, weak_growth_functional, moment_report, prior_overlap_distribution, MomentReport};
use aon_core::sim::{mmse_curve_with_limits, MmsePoint};
use aon_core::thresholds::{expectation_threshold, p1m, threshold_curve, SearchBudget, ThresholdCurve, ThresholdQuery};
use aon_core::{Error, Family, Graph};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::grid::{parse_p_grid, parse_unit_grid};
use crate::output::{svg_line_chart, Artifact, Csv, Overlay};

pub const DEFAULT_Q_GRID: &str = "0:1:11";
pub const DEFAULT_P_GRID: &str = "0:1:21";
pub const DEFAULT_TRIALS: usize = 1000;

pub fn cmd_generate(family: &Family) -> anyhow::Result<Vec<Artifact>> {
    let g = aon_core::generate(family)?;
    Ok(vec![Artifact::new("pattern.txt", Format::Csv, g.to_edge_list())])
}

fn edge_string(edges: &[(u32, u32)]) -> String {
    edges.iter().map(|(u, v)| format!("{u}-{v}")).collect::<Vec<_>>().join(" ")
}

fn witness_fields(w: Option<&CanonicalForm>) -> [String; 4] {
    match w {
        Some(w) => [
            w.vertex_count.to_string(),
            w.edge_count().to_string(),
            w.automorphism_order.to_string(),
            edge_string(&w.edges),
        ],
        None => Default::default(),
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn thresholds_csv(curve: &ThresholdCurve) -> String {
    let mut csv = Csv::with_header(&[
        "q",
        "min_edges",
        "psi",
        "lambda",
        "alpha",
        "psi_lower",
        "witness_vertices",
        "witness_edges",
        "witness_aut",
        "witness",
    ]);
    for pt in &curve.points {
        let mut row = vec![
            format_rational(&pt.q),
            pt.min_edges.to_string(),
            opt_float(pt.psi),
            opt_float(pt.log_psi.map(|l| -l)),
            format_rational(&pt.alpha),
            format_float(pt.psi_lower),
        ];
        row.extend(witness_fields(pt.witness.as_ref()));
        csv.row(row);
    }
    csv.finish()
}

pub fn compute_thresholds(cfg: &ExperimentConfig) -> anyhow::Result<ThresholdCurve> {
    let pattern = cfg.resolve_pattern()?;
    let q_grid = match &cfg.q_grid {
        Some(g) => g.clone(),
        None => parse_unit_grid(DEFAULT_Q_GRID)?,
    };
    let query = ThresholdQuery {
        pattern,
        n: cfg.require_n()?,
        q_grid,
    };
    let budget = if cfg.alpha_only {
        SearchBudget { nodes: 0, ..cfg.budget }
    } else {
        cfg.budget
    };
    let mut curve = threshold_curve(&query, &budget)?;
    if cfg.alpha_only {
        curve.p_e = None;
        curve.budget_exceeded = None;
        for pt in &mut curve.points {
            pt.psi = None;
            pt.log_psi = None;
            pt.witness = None;
        }
    } else if let Some(msg) = &curve.budget_exceeded {
        return Err(Error::BudgetExceeded(format!("{msg}; rerun with --alpha-only for α_q alone")).into());
    }
    Ok(curve)
}

pub fn cmd_thresholds(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let curve = compute_thresholds(cfg)?;
    Ok(vec![
        Artifact::json("thresholds.json", &curve)?,
        Artifact::new("thresholds.csv", Format::Csv, thresholds_csv(&curve)),
    ])
}

pub fn cmd_classify(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let pattern = cfg.resolve_pattern()?;
    let report = aon_verdict(&pattern, &cfg.require_n()?, &cfg.tolerances, &cfg.budget)?;
    let mut csv = Csv::with_header(&["condition", "operation", "holds", "numeric_gap", "detail"]);
    for c in &report.conditions {
        csv.row([
            c.name.clone(),
            c.operation.clone(),
            c.holds.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into()),
            opt_float(c.numeric_gap),
            c.detail.clone(),
        ]);
    }
    let v = &report.aon_verdict;
    csv.row([
        "verdict".to_string(),
        v.route.clone().unwrap_or_default(),
        v.regime.to_string(),
        opt_float(v.predicted_threshold),
        v.failing_conditions.join(" "),
    ]);
    Ok(vec![
        Artifact::json("classify.json", &report)?,
        Artifact::new("classify.csv", Format::Csv, csv.finish()),
    ])
}

#[derive(Serialize)]
struct OverlapJson {
    edges: usize,
    n: String,
    total_copies: String,
    method: aon_core::overlap::OverlapMethod,
    mean: String,
    moments: Vec<MomentReport>,
}

pub fn cmd_overlap(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let pattern = cfg.resolve_pattern()?;
    let d = prior_overlap_distribution(&pattern, &cfg.require_n()?)?;
    let mut csv = Csv::with_header(&[
        "ell",
        "probability",
        "probability_float",
        "growth_functional",
        "weak_growth_functional",
        "count",
    ]);
    for ell in d.rows() {
        csv.row([
            ell.to_string(),
            format_rational(&d.probability(ell)),
            format_float(d.probability_f64(ell)),
            format_float(growth_functional(&d, ell)),
            format_float(weak_growth_functional(&d, ell)),
            d.counts[ell].to_string(),
        ]);
    }
    let df = cfg.delta_first.clone().unwrap_or(parse_rational("1/5")?);
    let ds = cfg.delta_second.clone().unwrap_or(parse_rational("4/5")?);
    let moments = cfg
        .p_grid
        .iter()
        .flatten()
        .filter(|&&p| p > 0.0)
        .map(|&p| moment_report(&d, p, &df, &ds))
        .collect::<aon_core::Result<Vec<_>>>()?;
    let json = OverlapJson {
        edges: d.edges,
        n: d.n.to_string(),
        total_copies: d.total_copies.to_string(),
        method: d.method,
        mean: format_rational(&d.mean()),
        moments,
    };
    Ok(vec![
        Artifact::new("overlap.csv", Format::Csv, csv.finish()),
        Artifact::json("moments.json", &json)?,
    ])
}

pub fn simulate_csv(points: &[MmsePoint]) -> String {
    let mut csv = Csv::with_header(&[
        "p",
        "mmse_mean",
        "mmse_norm",
        "stderr",
        "D",
        "I",
        "trials",
        "signal_dot_mean",
        "signal_dot_stderr",
        "D_stderr",
        "I_stderr",
    ]);
    for pt in points {
        csv.row([
            format_float(pt.p),
            format_float(pt.conditional.mean),
            format_float(pt.normalized),
            format_float(pt.conditional.stderr),
            format_float(pt.kl.mean),
            format_float(pt.mi.mean),
            pt.conditional.trials.to_string(),
            format_float(pt.signal_dot.mean),
            format_float(pt.signal_dot.stderr),
            format_float(pt.kl.stderr),
            format_float(pt.mi.stderr),
        ]);
    }
    csv.finish()
}

/// First-moment and classification markers for the MMSE chart.
pub fn overlays(pattern: &Graph, cfg: &ExperimentConfig) -> Vec<Overlay> {
    let Ok(n) = cfg.require_n() else { return Vec::new() };
    let mut out = Vec::new();
    if let Ok(f) = p1m(pattern, &n) {
        out.push(Overlay {
            label: "p1M(H)".into(),
            p: f.value,
        });
    }
    if let Ok(w) = expectation_threshold(pattern, &n) {
        out.push(Overlay {
            label: "pE(H)".into(),
            p: w.psi,
        });
    }
    if let Ok(r) = aon_verdict(pattern, &n, &cfg.tolerances, &cfg.budget) {
        if let Some(p) = r.aon_verdict.predicted_threshold {
            out.push(Overlay {
                label: format!("p_AoN ({})", r.aon_verdict.regime),
                p,
            });
        }
    }
    out
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    n: String,
    edges: usize,
    seed: u64,
    overlays: &'a [Overlay],
    points: &'a [MmsePoint],
}

pub fn run_simulation(cfg: &ExperimentConfig) -> anyhow::Result<(Graph, Vec<MmsePoint>)> {
    let pattern = cfg.resolve_pattern()?;
    let n = cfg.require_n()?;
    let n: usize = n
        .try_into()
        .map_err(|_| Error::BudgetExceeded("simulation host is too large".into()))?;
    let grid = match &cfg.p_grid {
        Some(g) => g.clone(),
        None => parse_p_grid(DEFAULT_P_GRID)?,
    };
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let points = mmse_curve_with_limits(&pattern, n, &grid, trials, cfg.seed(), cfg.limits)?;
    Ok((pattern, points))
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let (pattern, points) = run_simulation(cfg)?;
    let marks = overlays(&pattern, cfg);
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.p, p.normalized)).collect();
    let title = format!("normalized MMSE, v(H)={}, e(H)={}, n={}", pattern.vertex_count(), pattern.edge_count(), cfg.require_n()?);
    let json = SimulateJson {
        n: cfg.require_n()?.to_string(),
        edges: pattern.edge_count(),
        seed: cfg.seed(),
        overlays: &marks,
        points: &points,
    };
    Ok(vec![
        Artifact::new("curve.csv", Format::Csv, simulate_csv(&points)),
        Artifact::new("curve.svg", Format::Svg, svg_line_chart(&title, "p", "MMSE / e(H)", &xy, &marks)),
        Artifact::json("curve.json", &json)?,
    ])
}

