//! Spanning containment in binomial random hypergraphs: a decision engine,
//! Monte Carlo containment probabilities, bisection for the crossing point
//! `p_half`, and log-log exponent fits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use petgraph::algo::maximum_matching;
use petgraph::graphmap::UnGraphMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::embed::{Embedder, SearchMode};
use crate::error::{Budget, Error, NodeCounter, Result};
use crate::hypercore::{binomial, Hypergraph};
use crate::structgen::{derive_seed, gnp, TargetSpec};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
pub const DEFAULT_TIMEOUT_GATE: f64 = 0.2;
pub const DEFAULT_CONTAINMENT_BUDGET: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Contained,
    NotContained,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Matching for graph perfect matchings, exact cover for other unions of
    /// equal cliques, generic search otherwise.
    #[default]
    Auto,
    Generic,
    Matching,
    ExactCover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Containment {
    pub outcome: Outcome,
    pub strategy: Strategy,
    pub nodes: u64,
}

/// If `pattern` is a vertex-disjoint union of complete `k`-graphs on `s`
/// vertices each, covering every vertex, returns `s`.
pub fn clique_block_size(pattern: &Hypergraph) -> Option<usize> {
    let comps = pattern.components();
    let s = comps.first()?.len();
    if s < pattern.k() || comps.iter().any(|c| c.len() != s) {
        return None;
    }
    let per_block = binomial(s as u64, pattern.k() as u64);
    (pattern.edge_count() as u64 == per_block * comps.len() as u64).then_some(s)
}

pub fn contains_spanning(host: &Hypergraph, pattern: &Hypergraph, budget: Budget) -> Result<Containment> {
    contains_spanning_with(host, pattern, Strategy::Auto, budget)
}

pub fn contains_spanning_with(host: &Hypergraph, pattern: &Hypergraph, strategy: Strategy, budget: Budget) -> Result<Containment> {
    if host.n() != pattern.n() || host.k() != pattern.k() {
        return Err(Error::param(format!(
            "spanning containment needs equal n and k: host ({}, {}), pattern ({}, {})",
            host.n(),
            host.k(),
            pattern.n(),
            pattern.k()
        )));
    }
    let block = clique_block_size(pattern);
    let strategy = match strategy {
        Strategy::Auto => match block {
            Some(2) if pattern.k() == 2 => Strategy::Matching,
            Some(_) => Strategy::ExactCover,
            None => Strategy::Generic,
        },
        s => s,
    };
    let decided = |found: bool, nodes: u64| Containment {
        outcome: if found { Outcome::Contained } else { Outcome::NotContained },
        strategy,
        nodes,
    };
    match strategy {
        Strategy::Matching => {
            if pattern.k() != 2 || block != Some(2) {
                return Err(Error::param("matching strategy needs a graph perfect matching pattern"));
            }
            Ok(decided(has_perfect_matching(host), host.n() as u64))
        }
        Strategy::ExactCover => {
            let s = block.ok_or_else(|| Error::param("exact cover strategy needs a union of equal cliques"))?;
            match clique_cover(host, s, budget)? {
                Some((found, nodes)) => Ok(decided(found, nodes)),
                None => Ok(Containment { outcome: Outcome::Timeout, strategy, nodes: budget.max_nodes }),
            }
        }
        Strategy::Generic | Strategy::Auto => {
            match Embedder::new(pattern, host)?.run(SearchMode::SpanningDecision, budget, &mut |_| false) {
                Ok(stats) => Ok(decided(stats.found > 0, stats.nodes)),
                Err(e) if e.is_budget() => Ok(Containment { outcome: Outcome::Timeout, strategy, nodes: budget.max_nodes }),
                Err(e) => Err(e),
            }
        }
    }
}

fn has_perfect_matching(host: &Hypergraph) -> bool {
    let mut g: UnGraphMap<usize, ()> = UnGraphMap::with_capacity(host.n(), host.edge_count());
    for v in 0..host.n() {
        g.add_node(v);
    }
    for e in host.edges() {
        g.add_edge(e[0], e[1], ());
    }
    maximum_matching(&g).is_perfect()
}

/// Vertex sets of all complete `k`-subgraphs of `host` on `s` vertices.
fn host_cliques(host: &Hypergraph, s: usize) -> Vec<u64> {
    let k = host.k();
    let edges: std::collections::HashSet<u64> = host.edge_masks().into_iter().collect();
    let mut out = Vec::new();
    fn grow(
        set: &mut Vec<usize>,
        next: usize,
        s: usize,
        k: usize,
        n: usize,
        edges: &std::collections::HashSet<u64>,
        out: &mut Vec<u64>,
    ) {
        if set.len() == s {
            out.push(set.iter().fold(0u64, |m, &v| m | (1 << v)));
            return;
        }
        for v in next..n {
            let ok = set.len() + 1 < k
                || crate::hypercore::k_subsets(set.len(), k - 1).iter().all(|sub| {
                    edges.contains(&sub.iter().fold(1u64 << v, |m, &i| m | (1 << set[i])))
                });
            if ok {
                set.push(v);
                grow(set, v + 1, s, k, n, edges, out);
                set.pop();
            }
        }
    }
    grow(&mut Vec::new(), 0, s, k, host.n(), &edges, &mut out);
    out
}

/// Exact cover of `V(host)` by host cliques on `s` vertices. `None` on budget exhaustion.
fn clique_cover(host: &Hypergraph, s: usize, budget: Budget) -> Result<Option<(bool, u64)>> {
    host.require_mask_size("exact cover")?;
    let n = host.n();
    if n % s != 0 {
        return Ok(Some((false, 0)));
    }
    let blocks = host_cliques(host, s);
    let mut by_vertex: Vec<Vec<u64>> = vec![Vec::new(); n];
    for &b in &blocks {
        let mut m = b;
        while m != 0 {
            by_vertex[m.trailing_zeros() as usize].push(b);
            m &= m - 1;
        }
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut counter = NodeCounter::new(budget);
    fn search(covered: u64, full: u64, by_vertex: &[Vec<u64>], counter: &mut NodeCounter) -> Option<bool> {
        if covered == full {
            return Some(true);
        }
        if !counter.tick() {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        let mut free = !covered & full;
        while free != 0 {
            let v = free.trailing_zeros() as usize;
            free &= free - 1;
            let options = by_vertex[v].iter().filter(|&&b| b & covered == 0).count();
            if options == 0 {
                return Some(false);
            }
            if best.map_or(true, |(_, c)| options < c) {
                best = Some((v, options));
            }
        }
        let (v, _) = best?;
        for &b in &by_vertex[v] {
            if b & covered == 0 {
                match search(covered | b, full, by_vertex, counter) {
                    Some(false) => {}
                    other => return other,
                }
            }
        }
        Some(false)
    }
    Ok(search(0, full, &by_vertex, &mut counter).map(|found| (found, counter.nodes)))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config_hash: String,
    pub n: usize,
    pub p: f64,
    pub trial: u64,
    pub seed: u64,
    pub outcome: Outcome,
    pub strategy: Strategy,
    pub nodes: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_us: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub contained: u64,
    pub not_contained: u64,
    pub timeouts: u64,
    /// Fraction contained among decided trials.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub timeout_fraction: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub budget: Budget,
    pub strategy: Strategy,
    pub timeout_gate: f64,
    pub timing: bool,
    pub config_hash: String,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            budget: Budget::nodes(DEFAULT_CONTAINMENT_BUDGET),
            strategy: Strategy::Auto,
            timeout_gate: DEFAULT_TIMEOUT_GATE,
            timing: false,
            config_hash: String::new(),
        }
    }
}

/// Host seed for one trial. Depends on `(seed, n, trial)` but not on `p`, so
/// hosts at different `p` are coupled and containment is monotone per trial.
pub fn trial_seed(seed: u64, n: usize, trial: u64) -> u64 {
    derive_seed(seed, n as u64, trial)
}

pub fn run_trial(pattern: &Hypergraph, p: f64, seed: u64, trial: u64, settings: &TrialSettings) -> Result<TrialRecord> {
    let host_seed = trial_seed(seed, pattern.n(), trial);
    let start = settings.timing.then(Instant::now);
    let host = gnp(pattern.n(), pattern.k(), p, host_seed)?;
    let c = contains_spanning_with(&host, pattern, settings.strategy, settings.budget)?;
    Ok(TrialRecord {
        config_hash: settings.config_hash.clone(),
        n: pattern.n(),
        p,
        trial,
        seed: host_seed,
        outcome: c.outcome,
        strategy: c.strategy,
        nodes: c.nodes,
        elapsed_us: start.map(|s| s.elapsed().as_micros() as u64),
    })
}

pub fn summarize(n: usize, p: f64, records: &[TrialRecord], timeout_gate: f64) -> ProbabilityEstimate {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count() as u64;
    let (contained, not_contained, timeouts) = (count(Outcome::Contained), count(Outcome::NotContained), count(Outcome::Timeout));
    let decided = contained + not_contained;
    let trials = records.len() as u64;
    let (ci_lo, ci_hi) = wilson_interval(contained, decided);
    let timeout_fraction = if trials == 0 { 0.0 } else { timeouts as f64 / trials as f64 };
    ProbabilityEstimate {
        n,
        p,
        trials,
        contained,
        not_contained,
        timeouts,
        estimate: if decided == 0 { 0.0 } else { contained as f64 / decided as f64 },
        ci_lo,
        ci_hi,
        timeout_fraction,
        reliable: decided > 0 && timeout_fraction <= timeout_gate,
    }
}

/// Runs `trials` independent hosts `G^(k)(n, p)`; trials run on the current
/// rayon pool and records come back in trial order.
pub fn containment_probability(
    pattern: &Hypergraph,
    p: f64,
    trials: u64,
    seed: u64,
    settings: &TrialSettings,
) -> Result<(ProbabilityEstimate, Vec<TrialRecord>)> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p must lie in [0,1], got {p}")));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(pattern, p, seed, t, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok((summarize(pattern.n(), p, &records, settings.timeout_gate), records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub p_half: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Trials per evaluated `p`.
    pub trials: u64,
    pub evaluations: usize,
    pub timeouts: u64,
    pub timeout_fraction: f64,
    /// Set when an evaluation failed the reliability gate; the interval is
    /// then the bracket reached so far.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectRun {
    pub estimate: ThresholdEstimate,
    /// In evaluation order.
    pub points: Vec<ProbabilityEstimate>,
    pub records: Vec<TrialRecord>,
}

struct Memo<'a> {
    pattern: &'a Hypergraph,
    trials: u64,
    seed: u64,
    settings: &'a TrialSettings,
    cache: HashMap<u64, ProbabilityEstimate>,
    points: Vec<ProbabilityEstimate>,
    records: Vec<TrialRecord>,
}

impl Memo<'_> {
    fn eval(&mut self, p: f64) -> Result<ProbabilityEstimate> {
        if let Some(e) = self.cache.get(&p.to_bits()) {
            return Ok(e.clone());
        }
        let (e, recs) = containment_probability(self.pattern, p, self.trials, self.seed, self.settings)?;
        self.cache.insert(p.to_bits(), e.clone());
        self.points.push(e.clone());
        self.records.extend(recs);
        Ok(e)
    }
}

enum Step {
    Up,
    Down,
    Stop,
}

/// Bisection on `[0, 1]` down to width `resolution`. `Err(bracket)` when an
/// evaluation is unreliable.
fn bisect(
    memo: &mut Memo<'_>,
    resolution: f64,
    decide: impl Fn(&ProbabilityEstimate) -> Step,
) -> Result<std::result::Result<(f64, f64, Option<f64>), (f64, f64)>> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > resolution {
        let mid = (lo + hi) / 2.0;
        let e = memo.eval(mid)?;
        if !e.reliable {
            return Ok(Err((lo, hi)));
        }
        match decide(&e) {
            Step::Up => lo = mid,
            Step::Down => hi = mid,
            Step::Stop => return Ok(Ok((lo, hi, Some(mid)))),
        }
    }
    Ok(Ok((lo, hi, None)))
}

/// Finds `p_half` by bisection, stopping when the interval at the midpoint
/// contains 1/2 or the bracket is narrower than `1/n²`. The interval is the
/// set of `p` whose Wilson interval contains 1/2, located by two further
/// bisections that reuse cached evaluations.
pub fn threshold_bisect(pattern: &Hypergraph, trials: u64, seed: u64, settings: &TrialSettings) -> Result<ThresholdEstimate> {
    Ok(threshold_bisect_run(pattern, trials, seed, settings)?.estimate)
}

pub fn threshold_bisect_run(pattern: &Hypergraph, trials: u64, seed: u64, settings: &TrialSettings) -> Result<BisectRun> {
    let n = pattern.n();
    if n < 2 {
        return Err(Error::param("threshold bisection needs n ≥ 2"));
    }
    let resolution = 1.0 / (n * n) as f64;
    let mut memo = Memo { pattern, trials, seed, settings, cache: HashMap::new(), points: Vec::new(), records: Vec::new() };
    let finish = |memo: Memo<'_>, p_half: f64, ci_lo: f64, ci_hi: f64, flagged: bool| {
        let timeouts: u64 = memo.points.iter().map(|e| e.timeouts).sum();
        let total: u64 = memo.points.iter().map(|e| e.trials).sum();
        BisectRun {
            estimate: ThresholdEstimate {
                n,
                p_half,
                ci_lo,
                ci_hi,
                trials,
                evaluations: memo.points.len(),
                timeouts,
                timeout_fraction: if total == 0 { 0.0 } else { timeouts as f64 / total as f64 },
                flagged,
            },
            points: memo.points,
            records: memo.records,
        }
    };
    let half = match bisect(&mut memo, resolution, |e| {
        if e.ci_lo > 0.5 {
            Step::Down
        } else if e.ci_hi < 0.5 {
            Step::Up
        } else {
            Step::Stop
        }
    })? {
        Ok((lo, hi, stop)) => stop.unwrap_or((lo + hi) / 2.0),
        Err((lo, hi)) => return Ok(finish(memo, (lo + hi) / 2.0, lo, hi, true)),
    };
    let ci_lo = match bisect(&mut memo, resolution, |e| if e.ci_hi < 0.5 { Step::Up } else { Step::Down })? {
        Ok((lo, _, _)) => lo,
        Err((lo, hi)) => return Ok(finish(memo, half, lo, hi.max(half), true)),
    };
    let ci_hi = match bisect(&mut memo, resolution, |e| if e.ci_lo > 0.5 { Step::Down } else { Step::Up })? {
        Ok((_, hi, _)) => hi,
        Err((lo, hi)) => return Ok(finish(memo, half, ci_lo.min(lo), hi, true)),
    };
    Ok(finish(memo, half, ci_lo.min(half), ci_hi.max(half), false))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub beta: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals in log space.
    pub residual: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub points: usize,
}

/// Least-squares slope of `ln p_half` against `ln n`, with a 95% Student-t interval.
pub fn exponent_fit(series: &[(usize, f64)]) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::param(format!("exponent fit needs at least 3 points, got {}", series.len())));
    }
    let mut ns: Vec<usize> = series.iter().map(|s| s.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() != series.len() {
        return Err(Error::param("exponent fit needs distinct n"));
    }
    if series.iter().any(|&(n, p)| n == 0 || !(p > 0.0 && p.is_finite())) {
        return Err(Error::param("exponent fit needs n ≥ 1 and p_half > 0"));
    }
    let xs: Vec<f64> = series.iter().map(|s| (s.0 as f64).ln()).collect();
    let ys: Vec<f64> = series.iter().map(|s| s.1.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - beta * x).powi(2)).sum();
    let dof = m - 2.0;
    let stderr = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::param(e.to_string()))?.inverse_cdf(0.975);
    Ok(ExponentFit {
        beta,
        intercept,
        residual: ssr.sqrt(),
        stderr,
        ci_lo: beta - t * stderr,
        ci_hi: beta + t * stderr,
        points: series.len(),
    })
}

/// Everything that determines the output of a threshold experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub n_list: Vec<usize>,
    /// Fixed `p` values to scan; bisection for `p_half` when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_grid: Option<Vec<f64>>,
    pub trials: u64,
    pub seed: u64,
    pub budget_nodes: u64,
    pub timeout_gate: f64,
    #[serde(default)]
    pub strategy: Strategy,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.n_list.is_empty() {
            return Err(Error::param("n list is empty"));
        }
        if let Some(grid) = &self.p_grid {
            if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::param("p grid must be a nonempty list of values in [0,1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.timeout_gate) {
            return Err(Error::param("timeout gate must lie in [0,1]"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    fn settings(&self, timing: bool) -> TrialSettings {
        TrialSettings {
            budget: Budget::nodes(self.budget_nodes),
            strategy: self.strategy,
            timeout_gate: self.timeout_gate,
            timing,
            config_hash: self.hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config_hash: String,
    pub estimates: Vec<ThresholdEstimate>,
    pub grid: Vec<ProbabilityEstimate>,
    /// Sorted by `(n, p, trial)`.
    pub records: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn reliable(&self) -> bool {
        self.estimates.iter().all(|e| !e.flagged) && self.grid.iter().all(|g| g.reliable)
    }

    /// `n,p_half,ci_lo,ci_hi,timeouts`, one row per estimate.
    pub fn csv_summary(&self) -> String {
        let mut out = String::from("n,p_half,ci_lo,ci_hi,timeouts\n");
        for e in &self.estimates {
            let _ = writeln!(out, "{},{},{},{},{}", e.n, e.p_half, e.ci_lo, e.ci_hi, e.timeouts);
        }
        out
    }
}

/// Runs on the current rayon pool; wrap in `ThreadPool::install` to cap workers.
pub fn run_experiment(config: &ExperimentConfig, timing: bool) -> Result<ExperimentResult> {
    config.validate()?;
    let settings = config.settings(timing);
    let mut estimates = Vec::new();
    let mut grid = Vec::new();
    let mut records = Vec::new();
    for &n in &config.n_list {
        let pattern = config.target.pattern(n)?;
        match &config.p_grid {
            Some(ps) => {
                for &p in ps {
                    let (e, recs) = containment_probability(&pattern, p, config.trials, config.seed, &settings)?;
                    grid.push(e);
                    records.extend(recs);
                }
            }
            None => {
                let run = threshold_bisect_run(&pattern, config.trials, config.seed, &settings)?;
                estimates.push(run.estimate);
                records.extend(run.records);
            }
        }
    }
    records.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)).then(a.trial.cmp(&b.trial)));
    Ok(ExperimentResult { config_hash: settings.config_hash, estimates, grid, records })
}

/// Re-runs the single trial behind `record`.
pub fn replay_trial(config: &ExperimentConfig, record: &TrialRecord) -> Result<TrialRecord> {
    if record.config_hash != config.hash() {
        return Err(Error::param("record was produced by a different configuration"));
    }
    let pattern = config.target.pattern(record.n)?;
    let mut out = run_trial(&pattern, record.p, config.seed, record.trial, &config.settings(false))?;
    out.elapsed_us = record.elapsed_us;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use crate::structgen::{clique_factor, cycle_power, perfect_matching};
    use proptest::prelude::*;

    fn bipartite33() -> Hypergraph {
        Hypergraph::build(2, 6, (0..3).flat_map(|a| (3..6).map(move |b| [a, b]))).unwrap()
    }

    #[test]
    fn examples() {
        let k6 = Hypergraph::complete(2, 6).unwrap();
        let pm = perfect_matching(6, 2).unwrap();
        assert_eq!(contains_spanning(&k6, &pm, Budget::default()).unwrap().outcome, Outcome::Contained);
        let empty = Hypergraph::empty(2, 6).unwrap();
        assert_eq!(contains_spanning(&empty, &pm, Budget::default()).unwrap().outcome, Outcome::NotContained);
        let tf = clique_factor(6, 3).unwrap();
        for s in [Strategy::Auto, Strategy::Generic, Strategy::ExactCover] {
            let c = contains_spanning_with(&bipartite33(), &tf, s, Budget::default()).unwrap();
            assert_eq!(c.outcome, Outcome::NotContained);
        }
        assert_eq!(contains_spanning(&bipartite33(), &tf, Budget::default()).unwrap().strategy, Strategy::ExactCover);
        assert_eq!(contains_spanning(&k6, &pm, Budget::default()).unwrap().strategy, Strategy::Matching);
    }

    #[test]
    fn mismatched_sizes_and_strategies() {
        let k6 = Hypergraph::complete(2, 6).unwrap();
        assert!(contains_spanning(&k6, &perfect_matching(4, 2).unwrap(), Budget::default()).is_err());
        let c6 = cycle_power(6, 1).unwrap();
        assert!(contains_spanning_with(&k6, &c6, Strategy::Matching, Budget::default()).is_err());
        assert!(contains_spanning_with(&k6, &c6, Strategy::ExactCover, Budget::default()).is_err());
    }

    #[test]
    fn timeout_is_explicit() {
        let host = Hypergraph::complete(2, 12).unwrap();
        let pat = cycle_power(12, 2).unwrap();
        let c = contains_spanning_with(&host, &pat, Strategy::Generic, Budget::nodes(3)).unwrap();
        assert_eq!(c.outcome, Outcome::Timeout);
    }

    #[test]
    fn three_uniform_matching_by_exact_cover() {
        let pm = perfect_matching(6, 3).unwrap();
        let host = Hypergraph::build(3, 6, [[0, 1, 2], [1, 2, 3], [3, 4, 5]]).unwrap();
        let c = contains_spanning(&host, &pm, Budget::default()).unwrap();
        assert_eq!((c.outcome, c.strategy), (Outcome::Contained, Strategy::ExactCover));
        let host = Hypergraph::build(3, 6, [[0, 1, 2], [2, 3, 4], [1, 4, 5]]).unwrap();
        assert_eq!(contains_spanning(&host, &pm, Budget::default()).unwrap().outcome, Outcome::NotContained);
    }

    #[test]
    fn wilson_matches_closed_form() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.40383153).abs() < 1e-6 && (hi - 0.59616847).abs() < 1e-6);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(100, 100);
        assert!(hi == 1.0 && lo > 0.96);
    }

    #[test]
    fn probability_examples() {
        let s = TrialSettings::default();
        let pm = perfect_matching(6, 2).unwrap();
        let (e, _) = containment_probability(&pm, 1.0, 100, 1, &s).unwrap();
        assert_eq!(e.estimate, 1.0);
        let (e, _) = containment_probability(&clique_factor(6, 3).unwrap(), 0.0, 100, 1, &s).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(containment_probability(&pm, 1.5, 10, 1, &s).is_err());
        assert!(containment_probability(&pm, 0.5, 0, 1, &s).is_err());
    }

    #[test]
    fn unreliable_when_timeouts_dominate() {
        let s = TrialSettings { budget: Budget::nodes(1), strategy: Strategy::Generic, ..TrialSettings::default() };
        let (e, _) = containment_probability(&cycle_power(10, 2).unwrap(), 0.9, 20, 3, &s).unwrap();
        assert!(e.timeouts > 4 && !e.reliable);
        let t = threshold_bisect(&cycle_power(10, 2).unwrap(), 20, 3, &s).unwrap();
        assert!(t.flagged);
    }

    #[test]
    fn exponent_fit_examples() {
        let exact: Vec<(usize, f64)> = [8usize, 16, 32].iter().map(|&n| (n, (n as f64).powf(-0.5))).collect();
        let f = exponent_fit(&exact).unwrap();
        assert!((f.beta + 0.5).abs() < 1e-12 && f.residual < 1e-12);
        let f = exponent_fit(&[(8, 0.354), (16, 0.25), (32, 0.177)]).unwrap();
        assert!((f.beta + 0.5).abs() < 0.01);
        assert!(f.ci_lo <= f.beta && f.beta <= f.ci_hi);
        assert!(exponent_fit(&[(8, 0.3), (8, 0.2), (8, 0.1)]).is_err());
        assert!(exponent_fit(&[(8, 0.3), (9, 0.2)]).is_err());
    }

    #[test]
    fn bisect_is_deterministic_and_brackets() {
        let pm = perfect_matching(8, 2).unwrap();
        let s = TrialSettings::default();
        let a = threshold_bisect(&pm, 400, 11, &s).unwrap();
        let b = threshold_bisect(&pm, 400, 11, &s).unwrap();
        assert_eq!(a, b);
        assert!(0.0 < a.p_half && a.p_half < 1.0);
        assert!(a.ci_lo <= a.p_half && a.p_half <= a.ci_hi && !a.flagged);
    }

    #[test]
    fn experiment_replays() {
        let cfg = ExperimentConfig {
            target: "perfect_matching".parse().unwrap(),
            n_list: vec![6, 8],
            p_grid: Some(vec![0.3, 0.6]),
            trials: 30,
            seed: 5,
            budget_nodes: 1 << 20,
            timeout_gate: 0.2,
            strategy: Strategy::Auto,
        };
        let r = run_experiment(&cfg, false).unwrap();
        assert_eq!(r.records.len(), 120);
        for rec in r.records.iter().step_by(7) {
            assert_eq!(&replay_trial(&cfg, rec).unwrap(), rec);
        }
        let other = ExperimentConfig { seed: 6, ..cfg.clone() };
        assert_ne!(other.hash(), cfg.hash());
        assert!(replay_trial(&other, &r.records[0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coupled_hosts_are_monotone(seed in any::<u64>(), p1 in 0.0f64..1.0, p2 in 0.0f64..1.0) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let pat = cycle_power(8, 2).unwrap();
            let s = TrialSettings::default();
            for t in 0..4 {
                let a = run_trial(&pat, lo, seed, t, &s).unwrap();
                let b = run_trial(&pat, hi, seed, t, &s).unwrap();
                prop_assert!(!(a.outcome == Outcome::Contained && b.outcome == Outcome::NotContained));
            }
        }

        #[test]
        fn strategies_agree(n in prop::sample::select(vec![6usize, 9, 12]), p in 0.3f64..0.9, seed in any::<u64>()) {
            let host = gnp(n, 2, p, seed).unwrap();
            let pat = clique_factor(n, 3).unwrap();
            let a = contains_spanning_with(&host, &pat, Strategy::Generic, Budget::default()).unwrap();
            let b = contains_spanning_with(&host, &pat, Strategy::ExactCover, Budget::default()).unwrap();
            prop_assert_eq!(a.outcome, b.outcome);
        }
    }
}
