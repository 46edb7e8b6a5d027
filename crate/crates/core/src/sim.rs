//! Planted-model sampling, exact posteriors by copy enumeration, and Monte
//! Carlo estimates of MMSE, KL divergence and mutual information.
//!
//! Trial `t` of a run draws from its own ChaCha stream keyed by the master
//! seed and `t`, so results do not depend on how trials are scheduled.

use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{count_copies_in_complete, pair_index, CopyFinder};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{ln_biguint, mean_stderr, KahanSum};

/// Pair masks are `u128`, so hosts stop at 16 vertices (120 pairs).
pub const SIM_HARD_MAX_N: usize = 16;
/// Exhaustive expectations sum over `2^C(n,2)` noise sets; capped here.
pub const ORACLE_MAX_PAIRS: usize = 15;

/// Enumeration guards for simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimLimits {
    pub max_n: usize,
    pub max_copies: u64,
}

impl Default for SimLimits {
    fn default() -> Self {
        SimLimits {
            max_n: 12,
            max_copies: 10_000_000,
        }
    }
}

/// Per-trial random stream.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` at grid point `point`.
pub fn grid_stream(point: usize, trial: usize) -> u64 {
    ((point as u64) << 32) | trial as u64
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// One draw from the planted model.
#[derive(Debug, Clone, Serialize)]
pub struct PlantedInstance {
    pub n: usize,
    pub pattern: Graph,
    pub hidden_copy: Vec<(u32, u32)>,
    pub noise: Vec<(u32, u32)>,
    pub observation: Graph,
    pub p: f64,
    pub seed: u64,
}

/// Exact posterior given an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub z: BigUint,
    /// `m_i` for every edge of the observation, in edge order.
    pub marginals: Vec<((u32, u32), BigRational)>,
    pub conditional_mmse: BigRational,
}

impl PosteriorSummary {
    /// `m_i` for any pair; zero off the observation.
    pub fn marginal(&self, u: u32, v: u32) -> BigRational {
        let key = (u.min(v), u.max(v));
        match self.marginals.binary_search_by(|(e, _)| e.cmp(&key)) {
            Ok(i) => self.marginals[i].1.clone(),
            Err(_) => BigRational::from_integer(0.into()),
        }
    }

    pub fn marginal_sum(&self) -> BigRational {
        self.marginals
            .iter()
            .fold(BigRational::from_integer(0.into()), |acc, (_, m)| acc + m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    ConditionalVariance,
    SignalDot,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::ConditionalVariance => "conditional-variance",
            Estimator::SignalDot => "signal-dot",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmseEstimate {
    pub p: f64,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl McEstimate {
    fn of(values: &[f64]) -> McEstimate {
        let (mean, stderr) = mean_stderr(values);
        McEstimate { mean, stderr }
    }
}

/// Everything one planted trial contributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub z: u64,
    /// `Σ m_i (1 − m_i)`.
    pub conditional_mmse: f64,
    /// `K − Σ_{i ∈ θ*} m_i`.
    pub signal_dot: f64,
    /// `ln(Z / (M p^K))`.
    pub kl_term: f64,
    /// `ln(M / Z)`.
    pub mi_term: f64,
}

/// Copies of the observation, as pair masks.
#[derive(Debug, Clone)]
pub struct CopySet {
    pub copies: Vec<u128>,
    pub counts: Vec<u64>,
}

impl CopySet {
    pub fn z(&self) -> u64 {
        self.copies.len() as u64
    }
}

/// Cached state for repeated trials on one `(H, n)`.
pub struct Simulator {
    n: usize,
    pattern: Graph,
    finder: CopyFinder,
    pairs: Vec<(u32, u32)>,
    copies_total: BigUint,
    ln_copies_total: f64,
    limits: SimLimits,
}

impl Simulator {
    pub fn new(pattern: &Graph, n: usize, limits: SimLimits) -> Result<Simulator> {
        if pattern.edge_count() == 0 {
            return Err(Error::Edgeless);
        }
        if n > limits.max_n.min(SIM_HARD_MAX_N) {
            return Err(Error::BudgetExceeded(format!(
                "simulation host has {n} vertices; limit is {}",
                limits.max_n.min(SIM_HARD_MAX_N)
            )));
        }
        let copies_total = count_copies_in_complete(pattern, &BigUint::from(n))?;
        if copies_total > BigUint::from(limits.max_copies) {
            return Err(Error::BudgetExceeded(format!(
                "{copies_total} copies in K_{n} exceed the limit {}",
                limits.max_copies
            )));
        }
        let mut pairs = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                pairs.push((u, v));
            }
        }
        Ok(Simulator {
            n,
            pattern: pattern.clone(),
            finder: CopyFinder::new(pattern)?,
            pairs,
            ln_copies_total: ln_biguint(&copies_total),
            copies_total,
            limits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern(&self) -> &Graph {
        &self.pattern
    }

    pub fn edges(&self) -> usize {
        self.pattern.edge_count()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// `M_H` in `K_n`.
    pub fn copies_total(&self) -> &BigUint {
        &self.copies_total
    }

    pub fn mask_of(&self, edges: &[(u32, u32)]) -> u128 {
        edges
            .iter()
            .fold(0u128, |m, &(u, v)| m | 1u128 << pair_index(self.n, u as usize, v as usize))
    }

    pub fn edges_of(&self, mask: u128) -> Vec<(u32, u32)> {
        (0..self.pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| self.pairs[i]).collect()
    }

    pub fn graph_of(&self, mask: u128) -> Graph {
        Graph::from_sorted_unchecked(self.n, self.edges_of(mask))
    }

    /// Hidden copy and noise as pair masks.
    pub fn sample_masks(&self, p: f64, rng: &mut ChaCha8Rng) -> (u128, u128) {
        let mut perm: Vec<u32> = (0..self.n as u32).collect();
        perm.shuffle(rng);
        let hidden = self.pattern.edges().iter().fold(0u128, |m, &(a, b)| {
            let (u, v) = (perm[a as usize] as usize, perm[b as usize] as usize);
            m | 1u128 << pair_index(self.n, u, v)
        });
        let mut noise = 0u128;
        for i in 0..self.pairs.len() {
            if rng.gen::<f64>() < p {
                noise |= 1u128 << i;
            }
        }
        (hidden, noise)
    }

    pub fn instance(&self, p: f64, seed: u64, stream: u64) -> Result<PlantedInstance> {
        check_p(p)?;
        let (hidden, noise) = self.sample_masks(p, &mut trial_rng(seed, stream));
        Ok(PlantedInstance {
            n: self.n,
            pattern: self.pattern.clone(),
            hidden_copy: self.edges_of(hidden),
            noise: self.edges_of(noise),
            observation: self.graph_of(hidden | noise),
            p,
            seed,
        })
    }

    /// All copies of the pattern inside the observation `y`.
    pub fn copies_in(&self, y: u128) -> Result<CopySet> {
        let mut copies = Vec::new();
        let mut counts = vec![0u64; self.pairs.len()];
        let cap = self.limits.max_copies as usize;
        let mut over = false;
        self.finder.for_each(&self.graph_of(y), |c| {
            if copies.len() == cap {
                over = true;
                return ControlFlow::Break(());
            }
            let mut m = 0u128;
            for &(u, v) in c {
                let i = pair_index(self.n, u as usize, v as usize);
                m |= 1u128 << i;
                counts[i] += 1;
            }
            copies.push(m);
            ControlFlow::Continue(())
        });
        if over {
            return Err(Error::BudgetExceeded(format!("more than {cap} copies in the observation")));
        }
        Ok(CopySet { copies, counts })
    }

    fn outcome(&self, p: f64, hidden: u128, set: &CopySet) -> Result<TrialOutcome> {
        let z = set.z();
        if z == 0 {
            return Err(Error::NoCopies);
        }
        let k = self.edges() as u64;
        let zz = z as u128;
        let mut var_num: u128 = 0;
        let mut hit: u128 = 0;
        for (i, &c) in set.counts.iter().enumerate() {
            var_num += c as u128 * (zz - c as u128);
            if hidden >> i & 1 == 1 {
                hit += c as u128;
            }
        }
        let ln_z = (z as f64).ln();
        let ln_pk = if p == 0.0 { f64::NEG_INFINITY } else { k as f64 * p.ln() };
        Ok(TrialOutcome {
            z,
            conditional_mmse: ratio(var_num, zz * zz),
            signal_dot: ratio(k as u128 * zz - hit, zz),
            kl_term: ln_z - self.ln_copies_total - ln_pk,
            mi_term: self.ln_copies_total - ln_z,
        })
    }

    /// One full trial on stream `stream`.
    pub fn trial(&self, p: f64, seed: u64, stream: u64) -> Result<TrialOutcome> {
        let mut rng = trial_rng(seed, stream);
        let (hidden, noise) = self.sample_masks(p, &mut rng);
        let set = self.copies_in(hidden | noise)?;
        self.outcome(p, hidden, &set)
    }

    /// Trials `0..trials` at one grid point, in trial order.
    pub fn run(&self, p: f64, trials: usize, seed: u64, point: usize) -> Result<Vec<TrialOutcome>> {
        check_p(p)?;
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        (0..trials)
            .into_par_iter()
            .map(|t| self.trial(p, seed, grid_stream(point, t)))
            .collect()
    }
}

/// `a / b` with the fraction reduced first, so small ratios convert exactly rounded.
fn ratio(a: u128, b: u128) -> f64 {
    let g = a.gcd(&b).max(1);
    (a / g) as f64 / (b / g) as f64
}

pub fn sample_instance(h: &Graph, n: usize, p: f64, seed: u64) -> Result<PlantedInstance> {
    Simulator::new(h, n, SimLimits::default())?.instance(p, seed, 0)
}

/// Exact posterior of the planted copy given the observation `y`.
pub fn posterior_exact(h: &Graph, y: &Graph) -> Result<PosteriorSummary> {
    posterior_exact_with_limits(h, y, SimLimits::default())
}

pub fn posterior_exact_with_limits(h: &Graph, y: &Graph, limits: SimLimits) -> Result<PosteriorSummary> {
    if y.vertex_count() > limits.max_n {
        return Err(Error::BudgetExceeded(format!(
            "observation has {} vertices; limit is {}",
            y.vertex_count(),
            limits.max_n
        )));
    }
    if h.vertex_count() > y.vertex_count() {
        return Err(Error::NoCopies);
    }
    let finder = CopyFinder::new(h)?;
    let edges = y.edges();
    let mut counts = vec![0u64; edges.len()];
    let mut z: u64 = 0;
    let mut over = false;
    finder.for_each(y, |c| {
        if z == limits.max_copies {
            over = true;
            return ControlFlow::Break(());
        }
        z += 1;
        for e in c {
            let i = edges.binary_search(e).expect("copy edges lie in the host");
            counts[i] += 1;
        }
        ControlFlow::Continue(())
    });
    if over {
        return Err(Error::BudgetExceeded(format!("more than {} copies in the observation", limits.max_copies)));
    }
    if z == 0 {
        return Err(Error::NoCopies);
    }
    let zb = BigUint::from(z);
    let marginals: Vec<((u32, u32), BigRational)> = edges
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| (e, BigRational::new(BigUint::from(c).into(), zb.clone().into())))
        .collect();
    let var_num: BigUint = counts.iter().map(|&c| BigUint::from(c) * (&zb - c)).sum();
    let conditional_mmse = BigRational::new(var_num.into(), (&zb * &zb).into());
    Ok(PosteriorSummary {
        z: zb,
        marginals,
        conditional_mmse,
    })
}

/// Monte Carlo MMSE estimate with the chosen estimator.
pub fn mmse_monte_carlo(h: &Graph, n: usize, p: f64, trials: usize, seed: u64, estimator: Estimator) -> Result<MmseEstimate> {
    let sim = Simulator::new(h, n, SimLimits::default())?;
    let out = sim.run(p, trials, seed, 0)?;
    Ok(estimate(p, &out, estimator))
}

pub fn estimate(p: f64, out: &[TrialOutcome], estimator: Estimator) -> MmseEstimate {
    let values: Vec<f64> = out
        .iter()
        .map(|o| match estimator {
            Estimator::ConditionalVariance => o.conditional_mmse,
            Estimator::SignalDot => o.signal_dot,
        })
        .collect();
    let (mean, stderr) = mean_stderr(&values);
    MmseEstimate {
        p,
        trials: out.len(),
        mean,
        stderr,
        estimator,
    }
}

/// One grid point of an MMSE curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsePoint {
    pub p: f64,
    pub conditional: MmseEstimate,
    pub signal_dot: MmseEstimate,
    /// Conditional-variance mean over `e(H)`.
    pub normalized: f64,
    pub normalized_stderr: f64,
    pub kl: McEstimate,
    pub mi: McEstimate,
}

impl MmsePoint {
    fn from_outcomes(p: f64, k: usize, out: &[TrialOutcome]) -> MmsePoint {
        let conditional = estimate(p, out, Estimator::ConditionalVariance);
        let kl: Vec<f64> = out.iter().map(|o| o.kl_term).collect();
        let mi: Vec<f64> = out.iter().map(|o| o.mi_term).collect();
        MmsePoint {
            p,
            conditional,
            signal_dot: estimate(p, out, Estimator::SignalDot),
            normalized: conditional.mean / k as f64,
            normalized_stderr: conditional.stderr / k as f64,
            kl: McEstimate::of(&kl),
            mi: McEstimate::of(&mi),
        }
    }
}

pub fn mmse_curve(h: &Graph, n: usize, p_grid: &[f64], trials: usize, seed: u64) -> Result<Vec<MmsePoint>> {
    mmse_curve_with_limits(h, n, p_grid, trials, seed, SimLimits::default())
}

pub fn mmse_curve_with_limits(
    h: &Graph,
    n: usize,
    p_grid: &[f64],
    trials: usize,
    seed: u64,
    limits: SimLimits,
) -> Result<Vec<MmsePoint>> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter("empty p grid".into()));
    }
    let sim = Simulator::new(h, n, limits)?;
    p_grid
        .iter()
        .enumerate()
        .map(|(g, &p)| {
            let out = sim.run(p, trials, seed, g)?;
            Ok(MmsePoint::from_outcomes(p, sim.edges(), &out))
        })
        .collect()
}

/// Monte Carlo estimate of `D(p) = KL(P_p ‖ Q_p)`.
pub fn kl_divergence_mc(h: &Graph, n: usize, p: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    let out = Simulator::new(h, n, SimLimits::default())?.run(p, trials, seed, 0)?;
    Ok(McEstimate::of(&out.iter().map(|o| o.kl_term).collect::<Vec<_>>()))
}

/// Monte Carlo estimate of `I(p)`, the mutual information between copy and observation.
pub fn mutual_information_mc(h: &Graph, n: usize, p: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    let out = Simulator::new(h, n, SimLimits::default())?.run(p, trials, seed, 0)?;
    Ok(McEstimate::of(&out.iter().map(|o| o.mi_term).collect::<Vec<_>>()))
}

/// Uniform draw from the copies contained in `y`.
pub fn sample_posterior(set: &CopySet, rng: &mut ChaCha8Rng) -> u128 {
    set.copies[rng.gen_range(0..set.copies.len())]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NishimoriReport {
    pub p: f64,
    pub trials: usize,
    /// Mean `|θ* ∩ θ′|`.
    pub signal_posterior: f64,
    /// Mean `|θ′ ∩ θ″|`.
    pub posterior_posterior: f64,
    pub difference_stderr: f64,
    pub z_score: f64,
}

pub fn nishimori_check(h: &Graph, n: usize, p: f64, trials: usize, seed: u64) -> Result<NishimoriReport> {
    check_p(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let sim = Simulator::new(h, n, SimLimits::default())?;
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, grid_stream(0, t));
            let (hidden, noise) = sim.sample_masks(p, &mut rng);
            let set = sim.copies_in(hidden | noise)?;
            let a = sample_posterior(&set, &mut rng);
            let b = sample_posterior(&set, &mut rng);
            Ok(((hidden & a).count_ones() as f64, (a & b).count_ones() as f64))
        })
        .collect::<Result<_>>()?;
    let sp: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let pp: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|x| x.0 - x.1).collect();
    let (d, se) = mean_stderr(&diff);
    let z_score = if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    };
    Ok(NishimoriReport {
        p,
        trials,
        signal_posterior: mean_stderr(&sp).0,
        posterior_posterior: mean_stderr(&pp).0,
        difference_stderr: se,
        z_score,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantingReport {
    pub p: f64,
    pub epsilon: f64,
    pub trials: usize,
    /// Fraction of trials with `Z ≤ ε M p^K`.
    pub frequency: f64,
    /// `ε + 3 sqrt(ε(1 − ε)/trials)`.
    pub threshold: f64,
    pub holds: bool,
}

pub fn planting_ratio_check(h: &Graph, n: usize, p: f64, trials: usize, seed: u64, epsilon: f64) -> Result<PlantingReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let sim = Simulator::new(h, n, SimLimits::default())?;
    let out = sim.run(p, trials, seed, 0)?;
    // ln Z ≤ ln ε + ln(M p^K)  ⇔  ln(Z/(M p^K)) ≤ ln ε
    let ln_eps = epsilon.ln();
    let hits = out.iter().filter(|o| o.kl_term <= ln_eps).count();
    let frequency = hits as f64 / trials as f64;
    let threshold = epsilon + 3.0 * (epsilon * (1.0 - epsilon) / trials as f64).sqrt();
    Ok(PlantingReport {
        p,
        epsilon,
        trials,
        frequency,
        threshold,
        holds: frequency <= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImmseReport {
    pub p1: f64,
    pub p2: f64,
    pub kl_p1: McEstimate,
    pub kl_p2: McEstimate,
    /// `(D(p1) − D(p2)) / (ln(1/p1) − ln(1/p2))`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub mmse_p1: MmseEstimate,
    pub mmse_p2: MmseEstimate,
    /// `K − MMSE(p1)`: bounds the slope over the whole interval.
    pub bound_p1: f64,
    /// `K − MMSE(p2)`, reported for comparison.
    pub bound_p2: f64,
    pub holds: bool,
}

pub fn imsse_inequality_check(h: &Graph, n: usize, p1: f64, p2: f64, trials: usize, seed: u64) -> Result<ImmseReport> {
    if !(p1 > 0.0 && p1 < p2 && p2 <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < p1 < p2 ≤ 1, got {p1}, {p2}")));
    }
    let sim = Simulator::new(h, n, SimLimits::default())?;
    let k = sim.edges() as f64;
    let a = sim.run(p1, trials, seed, 0)?;
    let b = sim.run(p2, trials, seed, 1)?;
    let kl = |o: &[TrialOutcome]| McEstimate::of(&o.iter().map(|x| x.kl_term).collect::<Vec<_>>());
    let (kl_p1, kl_p2) = (kl(&a), kl(&b));
    let gap = p2.ln() - p1.ln();
    let slope = (kl_p1.mean - kl_p2.mean) / gap;
    let slope_stderr = (kl_p1.stderr.powi(2) + kl_p2.stderr.powi(2)).sqrt() / gap;
    let mmse_p1 = estimate(p1, &a, Estimator::ConditionalVariance);
    let mmse_p2 = estimate(p2, &b, Estimator::ConditionalVariance);
    let bound_p1 = k - mmse_p1.mean;
    let margin = 3.0 * (slope_stderr.powi(2) + mmse_p1.stderr.powi(2)).sqrt();
    Ok(ImmseReport {
        p1,
        p2,
        kl_p1,
        kl_p2,
        slope,
        slope_stderr,
        mmse_p1,
        mmse_p2,
        bound_p1,
        bound_p2: k - mmse_p2.mean,
        holds: slope <= bound_p1 + margin,
    })
}

/// Expectations computed by summing over every hidden copy and every noise set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactExpectations {
    pub p: f64,
    pub mmse: f64,
    pub kl: f64,
    pub mi: f64,
}

pub fn exhaustive_expectations(h: &Graph, n: usize, p: f64) -> Result<ExactExpectations> {
    check_p(p)?;
    let sim = Simulator::new(h, n, SimLimits::default())?;
    let pairs = sim.pair_count();
    if pairs > ORACLE_MAX_PAIRS {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive oracle needs C(n,2) ≤ {ORACLE_MAX_PAIRS}, got {pairs}"
        )));
    }
    let all = sim.copies_in((1u128 << pairs) - 1)?.copies;
    let k = sim.edges();
    let free = pairs - k;
    let (mut mmse, mut kl, mut mi) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
    let mut counts = vec![0u64; pairs];
    for &hidden in &all {
        let rest = !hidden & ((1u128 << pairs) - 1);
        // every subset of the free pairs
        let mut sub: u128 = 0;
        loop {
            let y = hidden | sub;
            let extra = sub.count_ones() as i32;
            let w = p.powi(extra) * (1.0 - p).powi(free as i32 - extra);
            if w > 0.0 {
                counts.iter_mut().for_each(|c| *c = 0);
                let mut z = 0u64;
                for &c in &all {
                    if c & !y == 0 {
                        z += 1;
                        for (i, cnt) in counts.iter_mut().enumerate() {
                            *cnt += (c >> i & 1) as u64;
                        }
                    }
                }
                let set = CopySet {
                    copies: vec![0; z as usize],
                    counts: counts.clone(),
                };
                let o = sim.outcome(p, hidden, &set)?;
                mmse.add(w * o.conditional_mmse);
                kl.add(w * o.kl_term);
                mi.add(w * o.mi_term);
            }
            if sub == rest {
                break;
            }
            sub = (sub.wrapping_sub(rest)) & rest;
        }
    }
    let m = all.len() as f64;
    Ok(ExactExpectations {
        p,
        mmse: mmse.total() / m,
        kl: kl.total() / m,
        mi: mi.total() / m,
    })
}

/// `K (1 − K/N)`: the MMSE at `p = 1`.
pub fn prior_mmse(k: usize, pairs: usize) -> BigRational {
    let (k, n) = (BigUint::from(k), BigUint::from(pairs));
    BigRational::new((&k * (&n - &k)).into(), n.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use num_traits::{One, Zero};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn posterior_examples() {
        let k3 = clique(3);
        let s = posterior_exact(&k3, &k3).unwrap();
        assert_eq!(s.z, BigUint::one());
        assert!(s.marginals.iter().all(|(_, m)| m.is_one()));
        assert!(s.conditional_mmse.is_zero());

        let s = posterior_exact(&k3, &clique(4)).unwrap();
        assert_eq!(s.z, BigUint::from(4u32));
        assert_eq!(s.marginals.len(), 6);
        assert!(s.marginals.iter().all(|(_, m)| *m == q(1, 2)));
        assert_eq!(s.conditional_mmse, q(3, 2));
        assert_eq!(s.marginal_sum(), q(3, 1));

        let s = posterior_exact(&cycle(4), &Graph::complete(6)).unwrap();
        assert_eq!(s.conditional_mmse, prior_mmse(4, 15));

        let y = Graph::new(4, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(posterior_exact(&k3, &y), Err(Error::NoCopies)));
    }

    #[test]
    fn off_observation_marginal_is_zero() {
        let y = Graph::new(5, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let s = posterior_exact(&clique(3), &y).unwrap();
        assert!(s.marginal(0, 3).is_zero());
        assert!(s.marginal(3, 4).is_zero());
        assert!(s.marginal(2, 0).is_one());
    }

    #[test]
    fn endpoints() {
        let k3 = clique(3);
        let inst = sample_instance(&k3, 6, 0.0, 7).unwrap();
        assert!(inst.noise.is_empty());
        assert_eq!(inst.observation.edges(), &inst.hidden_copy[..]);
        let inst = sample_instance(&k3, 6, 1.0, 7).unwrap();
        assert_eq!(inst.observation.edge_count(), 15);

        for est in [Estimator::ConditionalVariance, Estimator::SignalDot] {
            let e = mmse_monte_carlo(&k3, 6, 0.0, 50, 1, est).unwrap();
            assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        }
        let e = mmse_monte_carlo(&k3, 4, 1.0, 50, 1, Estimator::ConditionalVariance).unwrap();
        assert_eq!((e.mean, e.stderr), (1.5, 0.0));
        let e = mmse_monte_carlo(&clique(4), 12, 1.0, 20, 1, Estimator::ConditionalVariance).unwrap();
        assert_eq!(e.mean, crate::numeric::rational_to_f64(&prior_mmse(6, 66)));
    }

    #[test]
    fn instance_is_deterministic_and_valid() {
        let h = cycle(5);
        let a = sample_instance(&h, 9, 0.3, 42).unwrap();
        let b = sample_instance(&h, 9, 0.3, 42).unwrap();
        assert_eq!(a.observation, b.observation);
        assert_eq!(a.hidden_copy, b.hidden_copy);
        let hidden = Graph::spanned_by(&a.hidden_copy);
        assert!(crate::canon::are_isomorphic(&hidden, &h).unwrap());
        assert!(a.hidden_copy.iter().all(|&(u, v)| a.observation.has_edge(u as usize, v as usize)));
    }

    #[test]
    fn kl_and_mi_limits() {
        let k3 = clique(3);
        let d = kl_divergence_mc(&k3, 5, 1.0, 10, 3).unwrap();
        let i = mutual_information_mc(&k3, 5, 1.0, 10, 3).unwrap();
        assert_eq!((d.mean, i.mean), (0.0, 0.0));
        let i = mutual_information_mc(&k3, 5, 0.0, 10, 3).unwrap();
        assert!((i.mean - 10f64.ln()).abs() < 1e-12);
        let sim = Simulator::new(&k3, 6, SimLimits::default()).unwrap();
        for t in sim.run(0.37, 200, 9, 0).unwrap() {
            assert!((t.kl_term + t.mi_term - 3.0 * (1.0 / 0.37f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn nishimori_endpoints() {
        let r = nishimori_check(&clique(3), 5, 0.0, 100, 1).unwrap();
        assert_eq!((r.signal_posterior, r.posterior_posterior, r.z_score), (3.0, 3.0, 0.0));
        let r = nishimori_check(&clique(3), 5, 1.0, 2000, 1).unwrap();
        // prior overlap mean K²/N = 0.9
        assert!((r.signal_posterior - 0.9).abs() < 0.1);
        assert!(r.z_score.abs() <= 3.0);
    }

    #[test]
    fn planting_endpoints() {
        let r = planting_ratio_check(&clique(3), 6, 1.0, 100, 1, 0.5).unwrap();
        assert_eq!(r.frequency, 0.0);
        let r = planting_ratio_check(&clique(3), 6, 0.3, 100, 1, 1.0).unwrap();
        assert!(r.frequency <= 1.0 && r.holds);
    }

    #[test]
    fn imsse_at_one() {
        let r = imsse_inequality_check(&clique(3), 5, 0.6, 1.0, 500, 5).unwrap();
        assert_eq!(r.kl_p2.mean, 0.0);
        assert!((r.slope - r.kl_p1.mean / (1.0 / 0.6f64).ln()).abs() < 1e-12);
        assert!(r.slope <= 3.0);
        assert!(r.holds);
        assert!(imsse_inequality_check(&clique(3), 5, 0.5, 0.5, 10, 5).is_err());
    }

    #[test]
    fn exhaustive_matches_closed_ends() {
        let e = exhaustive_expectations(&clique(3), 5, 1.0).unwrap();
        assert!((e.mmse - 2.1).abs() < 1e-12);
        let e = exhaustive_expectations(&clique(3), 5, 0.0).unwrap();
        assert_eq!(e.mmse, 0.0);
        assert!(exhaustive_expectations(&clique(3), 7, 0.5).is_err());
    }

    #[test]
    fn estimators_agree() {
        let sim = Simulator::new(&clique(3), 6, SimLimits::default()).unwrap();
        let out = sim.run(0.4, 3000, 11, 0).unwrap();
        let a = estimate(0.4, &out, Estimator::ConditionalVariance);
        let b = estimate(0.4, &out, Estimator::SignalDot);
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se, "{a:?} {b:?}");
    }

    #[test]
    fn thread_count_does_not_matter() {
        let h = clique(3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let grid = [0.1, 0.5, 0.9];
        let a = one.install(|| mmse_curve(&h, 7, &grid, 300, 17).unwrap());
        let b = many.install(|| mmse_curve(&h, 7, &grid, 300, 17).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn limits() {
        assert!(matches!(Simulator::new(&clique(3), 13, SimLimits::default()), Err(Error::BudgetExceeded(_))));
        assert!(matches!(Simulator::new(&Graph::empty(3), 5, SimLimits::default()), Err(Error::Edgeless)));
        let tight = SimLimits { max_n: 12, max_copies: 5 };
        assert!(Simulator::new(&clique(3), 6, tight).is_err());
        assert!(sample_instance(&clique(3), 6, 1.5, 0).is_err());
    }
}
