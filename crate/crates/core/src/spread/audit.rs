//! Spreadness audits. Exhaustive mode evaluates every event of the notion's
//! family; sampled mode evaluates a seeded adversarial subset and so only
//! certifies a lower bound on the true `q*`.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CopyDistribution, EmbeddingDistribution, LevelSchedule};
use crate::degeneracy::Verdict;
use crate::error::{Error, Result};
use crate::hypercore::binomial;
use crate::rational::{self, serde_rational};
use crate::Rational;

const VERDICT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notion {
    Vertex,
    Edge,
    Multilevel,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeRequest {
    /// Exhaustive when the event count estimate fits `max_events`.
    #[default]
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub mode: ModeRequest,
    pub max_events: u64,
    /// Beam width and number of random draws in sampled mode.
    pub samples: usize,
    pub seed: u64,
    /// Events the sampler evaluates in addition to its own.
    pub hints: Vec<SpreadWitness>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { mode: ModeRequest::Auto, max_events: 1 << 26, samples: 256, seed: 0, hints: Vec::new() }
    }
}

/// The event attaining an audit's worst case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpreadWitness {
    /// `ψ(xs[i]) = ys[i]` for all `i`.
    Vertex { xs: Vec<usize>, ys: Vec<usize> },
    /// `|A ∩ S| ≥ t` for the host edges `S`.
    EdgeSet { t: usize, edge_ids: Vec<usize>, edges: Vec<Vec<usize>> },
}

/// Nonzero-probability events of one size (`s`, `|S|` or `t`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSummary {
    pub size: usize,
    pub events: u64,
    #[serde(with = "serde_rational")]
    pub max_probability: Rational,
    #[serde(with = "serde_rational")]
    pub min_probability: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadAuditReport {
    pub notion: Notion,
    pub search_mode: AuditMode,
    /// Largest `μ(event)^{1/exponent}` over audited events.
    pub achieved_q: f64,
    /// Probability of the witness event.
    #[serde(with = "serde_rational")]
    pub probability: Rational,
    pub exponent: usize,
    pub witness: SpreadWitness,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    /// Smallest `γ` with `μ(event) ≤ γ q^t` on every audited event.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma_achieved: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<Verdict>,
    pub events: u64,
    pub per_size: Vec<EventSummary>,
}

fn root(p: Rational, t: usize) -> f64 {
    let x = rational::to_f64(&p);
    if t == 1 {
        x
    } else {
        x.powf(1.0 / t as f64)
    }
}

struct Best {
    value: f64,
    probability: Rational,
    exponent: usize,
    witness: SpreadWitness,
}

/// Accumulates audited events; ties keep the first event seen.
struct Tracker {
    q_for_gamma: Option<f64>,
    best_q: Option<Best>,
    best_gamma: Option<Best>,
    per_size: BTreeMap<usize, EventSummary>,
    events: u64,
}

impl Tracker {
    fn new(q_for_gamma: Option<f64>) -> Self {
        Tracker { q_for_gamma, best_q: None, best_gamma: None, per_size: BTreeMap::new(), events: 0 }
    }

    fn record(&mut self, probability: Rational, exponent: usize, size: usize, witness: impl Fn() -> SpreadWitness) {
        if probability == Rational::from_integer(0) {
            return;
        }
        self.events += 1;
        let summary = self.per_size.entry(size).or_insert(EventSummary {
            size,
            events: 0,
            max_probability: probability,
            min_probability: probability,
        });
        summary.events += 1;
        summary.max_probability = summary.max_probability.max(probability);
        summary.min_probability = summary.min_probability.min(probability);

        let value = root(probability, exponent);
        if self.best_q.as_ref().map_or(true, |b| value > b.value) {
            self.best_q = Some(Best { value, probability, exponent, witness: witness() });
        }
        if let Some(q) = self.q_for_gamma {
            let ratio = rational::to_f64(&probability) / q.powi(exponent as i32);
            if self.best_gamma.as_ref().map_or(true, |b| ratio > b.value) {
                self.best_gamma = Some(Best { value: ratio, probability, exponent, witness: witness() });
            }
        }
    }

    fn finish(self, notion: Notion, mode: AuditMode) -> Result<SpreadAuditReport> {
        let best = self.best_q.ok_or_else(|| Error::EmptySupport("no event of positive probability".into()))?;
        let gamma_achieved = self.best_gamma.as_ref().map(|b| b.value);
        let (probability, exponent, witness) = match (notion, self.best_gamma) {
            (Notion::Gamma, Some(g)) => (g.probability, g.exponent, g.witness),
            _ => (best.probability, best.exponent, best.witness),
        };
        Ok(SpreadAuditReport {
            notion,
            search_mode: mode,
            achieved_q: best.value,
            probability,
            exponent,
            witness,
            q: None,
            gamma: None,
            gamma_achieved,
            verdict: None,
            events: self.events,
            per_size: self.per_size.into_values().collect(),
        })
    }
}

fn choose_mode(request: ModeRequest, estimate: u64, max_events: u64) -> AuditMode {
    match request {
        ModeRequest::Exhaustive => AuditMode::Exhaustive,
        ModeRequest::Sampled => AuditMode::Sampled,
        ModeRequest::Auto if estimate <= max_events => AuditMode::Exhaustive,
        ModeRequest::Auto => AuditMode::Sampled,
    }
}

/// Picks a support index with probability proportional to its weight.
fn weighted_index(rng: &mut ChaCha8Rng, weights: &[u64], total: u64) -> usize {
    let mut x = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Indices of the heaviest support elements, heaviest first.
fn heaviest(weights: &[u64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(weights[i]), i));
    idx.truncate(count);
    idx
}

/// Worst `μ(ψ(x_i) = y_i ∀i)^{1/s}` over `s ≤ s_max` constraints.
pub fn vertex_spread_audit(d: &EmbeddingDistribution, s_max: usize, config: &AuditConfig) -> Result<SpreadAuditReport> {
    let v = d.pattern().n();
    if s_max == 0 || s_max > v {
        return Err(Error::param(format!("s_max must lie in 1..={v}")));
    }
    let estimate = (1..=s_max as u64)
        .map(|s| binomial(v as u64, s))
        .fold(0u64, u64::saturating_add)
        .saturating_mul(d.support().len() as u64);
    let mode = choose_mode(config.mode, estimate, config.max_events);
    let mut tracker = Tracker::new(None);
    let mut audit = VertexAudit { d, s_max, tracker: &mut tracker };
    match mode {
        AuditMode::Exhaustive => {
            let all: Vec<usize> = (0..d.support().len()).collect();
            audit.exhaustive(&all, 0, &mut Vec::new());
        }
        AuditMode::Sampled => audit.sampled(config),
    }
    tracker.finish(Notion::Vertex, mode)
}

struct VertexAudit<'a> {
    d: &'a EmbeddingDistribution,
    s_max: usize,
    tracker: &'a mut Tracker,
}

impl VertexAudit<'_> {
    fn record(&mut self, pairs: &[(usize, usize)], weight: u64) {
        let p = Rational::new(weight as i64, self.d.total() as i64);
        self.tracker.record(p, pairs.len(), pairs.len(), || SpreadWitness::Vertex {
            xs: pairs.iter().map(|p| p.0).collect(),
            ys: pairs.iter().map(|p| p.1).collect(),
        });
    }

    /// Splits `members` by the image of `x`.
    fn split(&self, members: &[usize], x: usize) -> Vec<(usize, Vec<usize>)> {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); self.d.host().n()];
        for &i in members {
            buckets[self.d.support()[i][x]].push(i);
        }
        buckets.into_iter().enumerate().filter(|(_, b)| !b.is_empty()).collect()
    }

    fn weight(&self, members: &[usize]) -> u64 {
        members.iter().map(|&i| self.d.weights()[i]).sum()
    }

    fn exhaustive(&mut self, members: &[usize], start: usize, pairs: &mut Vec<(usize, usize)>) {
        for x in start..self.d.pattern().n() {
            for (y, group) in self.split(members, x) {
                pairs.push((x, y));
                let w = self.weight(&group);
                self.record(pairs, w);
                if pairs.len() < self.s_max {
                    self.exhaustive(&group, x + 1, pairs);
                }
                pairs.pop();
            }
        }
    }

    fn sampled(&mut self, config: &AuditConfig) {
        let d = self.d;
        for hint in &config.hints {
            if let SpreadWitness::Vertex { xs, ys } = hint {
                if !xs.is_empty() && xs.len() <= self.s_max && xs.len() == ys.len() {
                    let pairs: Vec<(usize, usize)> = xs.iter().copied().zip(ys.iter().copied()).collect();
                    let p = d.vertex_event(xs, ys);
                    let w = (p * Rational::from_integer(d.total() as i64)).to_integer() as u64;
                    self.record(&pairs, w);
                }
            }
        }
        // beam search over partial assignments, heaviest first
        let width = config.samples.max(1);
        let all: Vec<usize> = (0..d.support().len()).collect();
        let mut beam: Vec<(Vec<(usize, usize)>, Vec<usize>)> = vec![(Vec::new(), all)];
        for _ in 0..self.s_max {
            let mut next: Vec<(u64, Vec<(usize, usize)>, Vec<usize>)> = Vec::new();
            for (pairs, members) in &beam {
                for x in 0..d.pattern().n() {
                    if pairs.iter().any(|p| p.0 == x) {
                        continue;
                    }
                    for (y, group) in self.split(members, x) {
                        let mut ext = pairs.clone();
                        ext.push((x, y));
                        ext.sort_unstable();
                        let w = self.weight(&group);
                        next.push((w, ext, group));
                    }
                }
            }
            next.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            next.dedup_by(|a, b| a.1 == b.1);
            next.truncate(width);
            for (w, pairs, _) in &next {
                self.record(pairs, *w);
            }
            beam = next.into_iter().map(|(_, p, m)| (p, m)).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let v = d.pattern().n();
        for _ in 0..config.samples {
            let i = weighted_index(&mut rng, d.weights(), d.total());
            let s = rng.gen_range(1..=self.s_max);
            let mut xs = sample(&mut rng, v, s).into_vec();
            xs.sort_unstable();
            let ys: Vec<usize> = xs.iter().map(|&x| d.support()[i][x]).collect();
            let p = d.vertex_event(&xs, &ys);
            let w = (p * Rational::from_integer(d.total() as i64)).to_integer() as u64;
            let pairs: Vec<(usize, usize)> = xs.into_iter().zip(ys).collect();
            self.record(&pairs, w);
        }
    }
}

/// Inverted index from host edges to the support sets containing them.
struct CopyIndex<'a> {
    d: &'a CopyDistribution,
    by_edge: Vec<Vec<u32>>,
}

impl<'a> CopyIndex<'a> {
    fn new(d: &'a CopyDistribution) -> Self {
        let mut by_edge = vec![Vec::new(); d.host().edge_count()];
        for (i, a) in d.support().iter().enumerate() {
            for &e in a {
                by_edge[e].push(i as u32);
            }
        }
        CopyIndex { d, by_edge }
    }

    /// `tail[t]` = weight of support sets meeting `s` in at least `t` edges.
    fn tail_weights(&self, s: &[usize], scratch: &mut Vec<u32>) -> Vec<u64> {
        scratch.clear();
        scratch.resize(self.d.support().len(), 0);
        let mut touched = Vec::new();
        for &e in s {
            for &i in &self.by_edge[e] {
                if scratch[i as usize] == 0 {
                    touched.push(i);
                }
                scratch[i as usize] += 1;
            }
        }
        let mut hist = vec![0u64; s.len() + 1];
        for &i in &touched {
            hist[scratch[i as usize] as usize] += self.d.weights()[i as usize];
        }
        hist[0] = self.d.total() - hist.iter().sum::<u64>();
        for t in (0..s.len()).rev() {
            hist[t] += hist[t + 1];
        }
        hist
    }

    fn witness(&self, t: usize, s: &[usize]) -> SpreadWitness {
        SpreadWitness::EdgeSet {
            t,
            edge_ids: s.to_vec(),
            edges: s.iter().map(|&e| self.d.host().edge(e).to_vec()).collect(),
        }
    }
}

/// Calls `f` on every `j`-subset of `items`.
fn for_each_subset(items: &[usize], j: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], j: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == j {
            f(cur);
            return;
        }
        for i in start..=items.len() - (j - cur.len()) {
            cur.push(items[i]);
            rec(items, j, i + 1, cur, f);
            cur.pop();
        }
    }
    if j <= items.len() {
        rec(items, j, 0, &mut Vec::with_capacity(j), f);
    }
}

/// Deduplicating candidate list that keeps first-insertion order.
#[derive(Default)]
struct Candidates {
    seen: HashMap<Vec<usize>, usize>,
    list: Vec<Vec<usize>>,
    weight: Vec<u64>,
}

impl Candidates {
    fn add(&mut self, s: &[usize], w: u64) {
        match self.seen.get(s) {
            Some(&i) => self.weight[i] += w,
            None => {
                self.seen.insert(s.to_vec(), self.list.len());
                self.list.push(s.to_vec());
                self.weight.push(w);
            }
        }
    }
}

/// Worst `μ(S ⊆ A)^{1/|S|}` over `S` inside a support set with
/// `|S| ≤ t_max`, plus every full support set.
pub fn edge_spread_audit(d: &CopyDistribution, t_max: usize, config: &AuditConfig) -> Result<SpreadAuditReport> {
    if t_max == 0 {
        return Err(Error::param("t_max must be at least 1"));
    }
    let estimate = d
        .support()
        .iter()
        .map(|a| (1..=t_max.min(a.len()) as u64).map(|j| binomial(a.len() as u64, j)).fold(1u64, u64::saturating_add))
        .fold(0u64, u64::saturating_add);
    let mode = choose_mode(config.mode, estimate, config.max_events);
    let index = CopyIndex::new(d);
    let mut tracker = Tracker::new(None);
    let total = d.total() as i64;
    match mode {
        AuditMode::Exhaustive => {
            // containment weight of S is the total weight of support sets holding it
            let mut cands = Candidates::default();
            for (a, &w) in d.support().iter().zip(d.weights()) {
                for j in 1..=t_max.min(a.len()) {
                    for_each_subset(a, j, &mut |s| cands.add(s, w));
                }
                if a.len() > t_max {
                    cands.add(a, w);
                }
            }
            for (s, &w) in cands.list.iter().zip(&cands.weight) {
                tracker.record(Rational::new(w as i64, total), s.len(), s.len(), || index.witness(s.len(), s));
            }
        }
        AuditMode::Sampled => {
            let mut scratch = Vec::new();
            let mut eval = |s: &[usize], tracker: &mut Tracker| {
                let tail = index.tail_weights(s, &mut scratch);
                let p = Rational::new(tail[s.len()] as i64, total);
                tracker.record(p, s.len(), s.len(), || index.witness(s.len(), s));
            };
            for hint in &config.hints {
                if let SpreadWitness::EdgeSet { edge_ids, .. } = hint {
                    let mut s = edge_ids.clone();
                    s.sort_unstable();
                    s.dedup();
                    if !s.is_empty() && s.iter().all(|&e| e < d.host().edge_count()) {
                        eval(&s, &mut tracker);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut picks = heaviest(d.weights(), config.samples);
            picks.extend((0..config.samples).map(|_| weighted_index(&mut rng, d.weights(), d.total())));
            for i in picks {
                let a = &d.support()[i];
                eval(a, &mut tracker);
                let j = rng.gen_range(1..=t_max.min(a.len()));
                let mut s: Vec<usize> = sample(&mut rng, a.len(), j).into_iter().map(|p| a[p]).collect();
                s.sort_unstable();
                eval(&s, &mut tracker);
            }
        }
    }
    tracker.finish(Notion::Edge, mode)
}

/// For `|S| = j`, the thresholds `t` audited together with it: `t ≤ j` and
/// `t, j` in a common window.
fn thresholds_for(windows: &[(usize, usize)], j: usize) -> Vec<usize> {
    let mut ts: Vec<usize> = windows
        .iter()
        .filter(|&&(lo, hi)| lo <= j && j <= hi)
        .flat_map(|&(lo, hi)| lo..=hi.min(j))
        .collect();
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn window_audit(
    d: &CopyDistribution,
    windows: &[(usize, usize)],
    q_for_gamma: Option<f64>,
    config: &AuditConfig,
) -> Result<(Tracker, AuditMode)> {
    let sizes: Vec<usize> = (1..=d.r0()).filter(|&j| !thresholds_for(windows, j).is_empty()).collect();
    let estimate = d
        .support()
        .iter()
        .map(|a| sizes.iter().map(|&j| binomial(a.len() as u64, j as u64)).fold(0u64, u64::saturating_add))
        .fold(0u64, u64::saturating_add);
    let mode = choose_mode(config.mode, estimate, config.max_events);
    let index = CopyIndex::new(d);
    let mut tracker = Tracker::new(q_for_gamma);
    let total = d.total() as i64;
    let mut scratch = Vec::new();
    let mut eval = |s: &[usize], tracker: &mut Tracker| {
        let ts = thresholds_for(windows, s.len());
        if ts.is_empty() {
            return;
        }
        let tail = index.tail_weights(s, &mut scratch);
        for t in ts {
            tracker.record(Rational::new(tail[t] as i64, total), t, t, || index.witness(t, s));
        }
    };
    match mode {
        AuditMode::Exhaustive => {
            let mut cands = Candidates::default();
            for a in d.support() {
                for &j in &sizes {
                    for_each_subset(a, j, &mut |s| cands.add(s, 0));
                }
            }
            for s in &cands.list {
                eval(s, &mut tracker);
            }
        }
        AuditMode::Sampled => {
            for hint in &config.hints {
                if let SpreadWitness::EdgeSet { edge_ids, .. } = hint {
                    let mut s = edge_ids.clone();
                    s.sort_unstable();
                    s.dedup();
                    if !s.is_empty() && s.iter().all(|&e| e < d.host().edge_count()) {
                        eval(&s, &mut tracker);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut picks = heaviest(d.weights(), config.samples);
            picks.extend((0..config.samples).map(|_| weighted_index(&mut rng, d.weights(), d.total())));
            for i in picks {
                let a = &d.support()[i];
                let fits: Vec<usize> = sizes.iter().copied().filter(|&j| j <= a.len()).collect();
                if fits.is_empty() {
                    continue;
                }
                if fits.contains(&a.len()) {
                    eval(a, &mut tracker);
                }
                let j = fits[rng.gen_range(0..fits.len())];
                let mut s: Vec<usize> = sample(&mut rng, a.len(), j).into_iter().map(|p| a[p]).collect();
                s.sort_unstable();
                eval(&s, &mut tracker);
            }
        }
    }
    Ok((tracker, mode))
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("q must be positive, got {q}")))
    }
}

/// `μ(|A∩S| ≥ t) ≤ q^t` for `t` in each window `[r_i, r_{i−1}]`, with `S` a
/// `j`-subset of one support set and `j` in the same window.
pub fn multilevel_spread_audit(
    d: &CopyDistribution,
    q: f64,
    schedule: &LevelSchedule,
    config: &AuditConfig,
) -> Result<SpreadAuditReport> {
    check_q(q)?;
    if schedule.r0() < d.r0() {
        return Err(Error::param(format!(
            "r_0 = {} is below the largest support set ({})",
            schedule.r0(),
            d.r0()
        )));
    }
    let (tracker, mode) = window_audit(d, &schedule.windows(), None, config)?;
    let mut report = tracker.finish(Notion::Multilevel, mode)?;
    report.q = Some(q);
    report.verdict = Some(Verdict::from_bool(report.achieved_q <= q * (1.0 + VERDICT_SLACK)));
    Ok(report)
}

/// `μ(|A∩S| ≥ t) ≤ γ q^t` on the single window `[r_prime, r]`.
pub fn gamma_spread_audit(
    d: &CopyDistribution,
    q: f64,
    gamma: f64,
    r: usize,
    r_prime: usize,
    config: &AuditConfig,
) -> Result<SpreadAuditReport> {
    check_q(q)?;
    if !(r > r_prime && r_prime >= 1) {
        return Err(Error::param(format!("window needs r > r' ≥ 1, got r = {r}, r' = {r_prime}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    let (tracker, mode) = window_audit(d, &[(r_prime, r)], Some(q), config)?;
    let mut report = tracker.finish(Notion::Gamma, mode)?;
    report.q = Some(q);
    report.gamma = Some(gamma);
    let achieved = report.gamma_achieved.expect("gamma tracked");
    report.verdict = Some(Verdict::from_bool(achieved <= gamma * (1.0 + VERDICT_SLACK)));
    Ok(report)
}
