//! Counting-bound checks: exact enumeration on one side, the closed-form
//! bound on the other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::factorial::ln_binomial;

use crate::degeneracy::Verdict;
use crate::embed::{Embedder, SearchMode};
use crate::error::{Budget, Error, Result};
use crate::hypercore::{Hypergraph, VertexSet};
use crate::rational::{self, serde_rational};
use crate::Rational;

const LOG_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundName {
    Lemma31,
    Lemma32,
    Ineq2,
    Spiro26,
    Kelly42,
}

/// One evaluated inequality `lhs ≤ rhs`. Exact integers are kept when both
/// sides fit; otherwise the verdict compares natural logarithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: BoundName,
    pub inputs: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_lhs: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_rhs: Option<u128>,
    pub verdict: Verdict,
}

impl BoundCheck {
    fn new(
        name: BoundName,
        inputs: BTreeMap<String, Value>,
        log_lhs: f64,
        log_rhs: f64,
        exact_lhs: Option<u128>,
        exact_rhs: Option<u128>,
    ) -> Self {
        let mut c = BoundCheck {
            name,
            inputs,
            lhs: exact_lhs.map_or(log_lhs.exp(), |x| x as f64),
            rhs: exact_rhs.map_or(log_rhs.exp(), |x| x as f64),
            log_lhs,
            log_rhs,
            exact_lhs,
            exact_rhs,
            verdict: Verdict::Pass,
        };
        c.verdict = c.recompute_verdict();
        c
    }

    pub fn recompute_verdict(&self) -> Verdict {
        match (self.exact_lhs, self.exact_rhs) {
            (Some(a), Some(b)) => Verdict::from_bool(a <= b),
            _ => Verdict::from_bool(self.log_lhs <= self.log_rhs + LOG_SLACK * self.log_rhs.abs().max(1.0)),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

fn ln_u128(x: u128) -> f64 {
    if x == 0 {
        f64::NEG_INFINITY
    } else {
        (x as f64).ln()
    }
}

fn pow_u128(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n, k)
    }
}

/// How "`F ⊆ H[ψ(X)]`" restricts the embeddings counted by [`lemma31_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma31Reading {
    /// Every bijection `X → V(F)` sending edges of `G[X]` to edges of `H[V(F)]`.
    #[default]
    Literal,
    /// Additionally every edge of `F` must be the image of an edge of `G[X]`.
    Covering,
}

impl FromStr for Lemma31Reading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Lemma31Reading::Literal),
            "covering" => Ok(Lemma31Reading::Covering),
            _ => Err(Error::param(format!("unknown reading {s:?} (literal | covering)"))),
        }
    }
}

impl fmt::Display for Lemma31Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma31Reading::Literal => "literal",
            Lemma31Reading::Covering => "covering",
        })
    }
}

fn edge_mask128(ids: &[usize]) -> u128 {
    ids.iter().fold(0u128, |m, &e| m | (1u128 << e))
}

/// For every `X ⊆ V(G)` with `|X| = |V(F)|` and every embedding of `G[X]`
/// onto `H[V(F)]`, the set of `H`-edges hit, as a mask over `H`'s edge ids.
fn lemma31_images(g: &Hypergraph, h: &Hypergraph, vf: &VertexSet, budget: Budget) -> Result<Vec<u128>> {
    let target = h.induced(vf)?;
    let target_ids: Vec<usize> = target
        .edges()
        .iter()
        .map(|e| {
            let orig: Vec<usize> = e.iter().map(|&i| vf.as_slice()[i]).collect();
            h.edge_index(&orig).expect("induced edge exists")
        })
        .collect();
    let mut out = Vec::new();
    let mut spent = 0u64;
    for x in crate::hypercore::k_subsets(g.n(), vf.len()) {
        let gx = g.induced(&VertexSet::new(x))?;
        let remaining = Budget::nodes(budget.max_nodes.saturating_sub(spent));
        let stats = Embedder::new(&gx, &target)?.run(SearchMode::Enumerate, remaining, &mut |map| {
            let hit = gx.edges().iter().fold(0u128, |m, e| {
                let img: Vec<usize> = e.iter().map(|&v| map[v]).collect();
                m | (1u128 << target_ids[target.edge_index(&img).expect("embedding")])
            });
            out.push(hit);
            true
        })?;
        spent += stats.nodes;
    }
    Ok(out)
}

fn lemma31_from_images(
    g: &Hypergraph,
    h: &Hypergraph,
    f: &[usize],
    images: &[u128],
    reading: Lemma31Reading,
) -> BoundCheck {
    let (fg, verts) = h.edge_subgraph(f);
    let v = verts.len();
    let c = fg.components().len();
    let fmask = edge_mask128(f);
    let count = match reading {
        Lemma31Reading::Literal => images.len() as u128,
        Lemma31Reading::Covering => images.iter().filter(|&&m| m & fmask == fmask).count() as u128,
    };
    let n = g.n() as u128;
    let kd = (g.k() * g.max_degree()) as u128;
    let exact = pow_u128(n, c).and_then(|a| pow_u128(kd, v - c).and_then(|b| a.checked_mul(b)));
    let log_rhs = c as f64 * (n as f64).ln() + (v - c) as f64 * (kd as f64).ln();
    let log_rhs = if kd == 0 && v > c { f64::NEG_INFINITY } else { log_rhs };
    let inputs = BTreeMap::from([
        ("n".to_string(), json!(g.n())),
        ("k".to_string(), json!(g.k())),
        ("max_degree".to_string(), json!(g.max_degree())),
        ("v".to_string(), json!(v)),
        ("c".to_string(), json!(c)),
        ("f".to_string(), json!(f.iter().map(|&e| h.edge(e).to_vec()).collect::<Vec<_>>())),
        ("reading".to_string(), json!(reading.to_string())),
    ]);
    BoundCheck::new(BoundName::Lemma31, inputs, ln_u128(count), log_rhs, Some(count), exact)
}

/// Embeddings `G[X] → H[V(F)]` over `X ∈ C(V(G), v)` against
/// `n^c (kΔ(G))^{v−c}`, where `F` is given by host edge ids.
pub fn lemma31_check(g: &Hypergraph, h: &Hypergraph, f: &[usize], reading: Lemma31Reading, budget: Budget) -> Result<BoundCheck> {
    if g.n() != h.n() || g.k() != h.k() {
        return Err(Error::param("G and H must share n and k"));
    }
    if f.is_empty() || f.iter().any(|&e| e >= h.edge_count()) {
        return Err(Error::param("F must be a nonempty set of host edges"));
    }
    if h.edge_count() > 128 {
        return Err(Error::param("host has more than 128 edges"));
    }
    let (_, verts) = h.edge_subgraph(f);
    let images = lemma31_images(g, h, &VertexSet::new(verts), budget)?;
    Ok(lemma31_from_images(g, h, f, &images, reading))
}

/// Aggregate of many checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub name: BoundName,
    pub checks: u64,
    pub violations: u64,
    /// Largest `log lhs − log rhs` seen.
    pub worst_log_gap: f64,
    /// The first few failing checks.
    pub examples: Vec<BoundCheck>,
}

const SWEEP_EXAMPLES: usize = 5;

impl SweepSummary {
    pub fn new(name: BoundName) -> Self {
        SweepSummary { name, checks: 0, violations: 0, worst_log_gap: f64::NEG_INFINITY, examples: Vec::new() }
    }

    pub fn add(&mut self, check: &BoundCheck) {
        self.checks += 1;
        let gap = check.log_lhs - check.log_rhs;
        if gap > self.worst_log_gap {
            self.worst_log_gap = gap;
        }
        if !check.passed() {
            self.violations += 1;
            if self.examples.len() < SWEEP_EXAMPLES {
                self.examples.push(check.clone());
            }
        }
    }

    pub fn merge(&mut self, other: SweepSummary) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.worst_log_gap = self.worst_log_gap.max(other.worst_log_gap);
        for e in other.examples {
            if self.examples.len() < SWEEP_EXAMPLES {
                self.examples.push(e);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Every nonempty `F ⊆ E(H)` for one `(G, H)` pair, with the embedding
/// images cached per vertex set `V(F)`.
pub fn lemma31_sweep(g: &Hypergraph, h: &Hypergraph, reading: Lemma31Reading, budget: Budget) -> Result<SweepSummary> {
    if g.n() != h.n() || g.k() != h.k() {
        return Err(Error::param("G and H must share n and k"));
    }
    let m = h.edge_count();
    if m > 20 {
        return Err(Error::param(format!("sweep over all F needs at most 20 host edges, got {m}")));
    }
    let emask = h.edge_masks();
    let mut cache: HashMap<u64, Vec<u128>> = HashMap::new();
    let mut summary = SweepSummary::new(BoundName::Lemma31);
    for fm in 1u64..1 << m {
        let f: Vec<usize> = (0..m).filter(|&e| fm >> e & 1 == 1).collect();
        let vmask = f.iter().fold(0u64, |a, &e| a | emask[e]);
        if !cache.contains_key(&vmask) {
            let images = lemma31_images(g, h, &VertexSet::from_mask(vmask), budget)?;
            cache.insert(vmask, images);
        }
        summary.add(&lemma31_from_images(g, h, &f, &cache[&vmask], reading));
    }
    Ok(summary)
}

/// Number of connected components spanned by the edge set `mask`.
fn edge_components(emask: &[u64], mask: u64) -> usize {
    let mut comps: Vec<u64> = Vec::new();
    let mut m = mask;
    while m != 0 {
        let e = m.trailing_zeros() as usize;
        m &= m - 1;
        let mut merged = emask[e];
        comps.retain(|&c| {
            if c & merged != 0 {
                merged |= c;
                false
            } else {
                true
            }
        });
        comps.push(merged);
    }
    comps.len()
}

fn lemma32_bound(g: &Hypergraph, size_s: usize, t: usize, c: usize) -> (f64, Option<u128>) {
    let k = g.k();
    let delta = g.max_degree() as u128;
    let exact = pow_u128(2, (k + 1) * t)
        .and_then(|a| pow_u128(delta, t).and_then(|b| a.checked_mul(b)))
        .and_then(|a| binomial_u128((k * size_s) as u64, c as u64).and_then(|b| a.checked_mul(b)));
    let log = ((k + 1) * t) as f64 * 2f64.ln()
        + if delta == 0 { f64::NEG_INFINITY } else { t as f64 * (delta as f64).ln() }
        + ln_binom((k * size_s) as u64, c as u64);
    (log, exact)
}

fn lemma32_make(g: &Hypergraph, s: &[usize], t: usize, c: usize, count: u128) -> BoundCheck {
    let (log_rhs, exact) = lemma32_bound(g, s.len(), t, c);
    let inputs = BTreeMap::from([
        ("k".to_string(), json!(g.k())),
        ("max_degree".to_string(), json!(g.max_degree())),
        ("size_s".to_string(), json!(s.len())),
        ("s".to_string(), json!(s.iter().map(|&e| g.edge(e).to_vec()).collect::<Vec<_>>())),
        ("t".to_string(), json!(t)),
        ("c".to_string(), json!(c)),
    ]);
    BoundCheck::new(BoundName::Lemma32, inputs, ln_u128(count), log_rhs, Some(count), exact)
}

/// Subgraphs made of `t` edges of `S` with exactly `c` components, against
/// `2^{(k+1)t} Δ^t C(k|S|, c)`.
pub fn lemma32_check(g: &Hypergraph, s: &[usize], t: usize, c: usize, budget: Budget) -> Result<BoundCheck> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() || s.iter().any(|&e| e >= g.edge_count()) {
        return Err(Error::param("S must be a nonempty set of edges of G"));
    }
    if !(1 <= c && c <= t && t <= s.len()) {
        return Err(Error::param(format!("need 1 ≤ c ≤ t ≤ |S|, got c = {c}, t = {t}, |S| = {}", s.len())));
    }
    if g.n() > 64 {
        return Err(Error::param("at most 64 vertices"));
    }
    let subsets = crate::hypercore::binomial(s.len() as u64, t as u64);
    if subsets > budget.max_nodes {
        return Err(Error::BudgetExceeded { operation: "subgraph count", budget: budget.max_nodes, best: None });
    }
    let emask = g.edge_masks();
    let mut count = 0u128;
    for pick in crate::hypercore::k_subsets(s.len(), t) {
        let mask = pick.iter().fold(0u64, |m, &i| m | (1u64 << i));
        let local: Vec<u64> = s.iter().map(|&e| emask[e]).collect();
        if edge_components(&local, mask) == c {
            count += 1;
        }
    }
    Ok(lemma32_make(g, &s, t, c, count))
}

/// All nonempty `S ⊆ E(G)` with `|S| ≤ max_s` and all `(t, c)`. Counts come
/// from one pass over the submasks of each `S`.
pub fn lemma32_sweep(g: &Hypergraph, max_s: usize) -> Result<SweepSummary> {
    let m = g.edge_count();
    if m > 30 {
        return Err(Error::param(format!("sweep supports at most 30 edges, got {m}")));
    }
    let emask = g.edge_masks();
    let mut summary = SweepSummary::new(BoundName::Lemma32);
    let max_s = max_s.min(m);
    // bound[size][t][c]
    let bound: Vec<Vec<Vec<(f64, Option<u128>)>>> = (0..=max_s)
        .map(|size| (0..=size).map(|t| (0..=t).map(|c| lemma32_bound(g, size, t, c)).collect()).collect())
        .collect();
    let mut counts = vec![vec![0u128; max_s + 1]; max_s + 1];
    let full_table: Option<Vec<u8>> =
        (m <= 20).then(|| (0u64..1 << m).map(|t| edge_components(&emask, t) as u8).collect());
    let mut comp_cache: HashMap<u64, u8> = HashMap::new();
    for size in 1..=max_s {
        for ids in crate::hypercore::k_subsets(m, size) {
            let s_mask = ids.iter().fold(0u64, |a, &e| a | (1u64 << e));
            for row in counts.iter_mut() {
                row.iter_mut().for_each(|x| *x = 0);
            }
            let mut t_mask = s_mask;
            while t_mask != 0 {
                let comps = match &full_table {
                    Some(tab) => tab[t_mask as usize] as usize,
                    None => *comp_cache.entry(t_mask).or_insert_with(|| edge_components(&emask, t_mask) as u8) as usize,
                };
                counts[t_mask.count_ones() as usize][comps] += 1;
                t_mask = (t_mask - 1) & s_mask;
            }
            for t in 1..=size {
                for c in 1..=t {
                    let count = counts[t][c];
                    let (log_rhs, exact) = bound[size][t][c];
                    let passed = exact.map_or(ln_u128(count) <= log_rhs + LOG_SLACK * log_rhs.abs().max(1.0), |b| count <= b);
                    let gap = ln_u128(count) - log_rhs;
                    if !passed || gap > summary.worst_log_gap {
                        let check = lemma32_make(g, &ids, t, c, count);
                        summary.add(&check);
                    } else {
                        summary.checks += 1;
                    }
                }
            }
        }
    }
    Ok(summary)
}

/// `C(k|S|, c)` against the two-regime right-hand side.
#[allow(clippy::too_many_arguments)]
pub fn ineq2_check(
    size_s: usize,
    t: usize,
    c: usize,
    n: u64,
    k: usize,
    d: Rational,
    alpha: Rational,
    eps: Rational,
) -> Result<BoundCheck> {
    if !(1 <= c && c <= t) || size_s == 0 {
        return Err(Error::param(format!("need 1 ≤ c ≤ t and |S| ≥ 1, got c = {c}, t = {t}, |S| = {size_s}")));
    }
    if d <= Rational::zero() || alpha <= Rational::zero() || eps <= Rational::zero() || k == 0 || n < 2 {
        return Err(Error::param("n, k, d, alpha and eps must be positive"));
    }
    let (df, af, ef, nf) = (rational::to_f64(&d), rational::to_f64(&alpha), rational::to_f64(&eps), n as f64);
    let cap = ef * nf / k as f64;
    if size_s as f64 > cap || t as f64 > cap {
        return Err(Error::param(format!("|S| and t must be at most εn/k = {cap}")));
    }
    let small_cap = ef * nf.powf(9.0 * af / (10.0 * df)) / k as f64;
    let small = (size_s as f64) <= small_cap && (t as f64) <= small_cap;
    let log_rhs = if small {
        9.0 * af * c as f64 / (10.0 * df) * nf.ln()
    } else {
        t as f64 * 2f64.ln() + af * c as f64 / df * nf.ln()
    };
    let c_above = c as f64 >= std::f64::consts::E * (k * size_s) as f64 / nf.powf(af / df);
    let inputs = BTreeMap::from([
        ("size_s".to_string(), json!(size_s)),
        ("t".to_string(), json!(t)),
        ("c".to_string(), json!(c)),
        ("n".to_string(), json!(n)),
        ("k".to_string(), json!(k)),
        ("d".to_string(), json!(rational::render(&d))),
        ("alpha".to_string(), json!(rational::render(&alpha))),
        ("eps".to_string(), json!(rational::render(&eps))),
        ("regime".to_string(), json!(if small { "small" } else { "large" })),
        ("branch".to_string(), json!(if c_above { "c_at_least_ek|S|/n^(alpha/d)" } else { "c_below_ek|S|/n^(alpha/d)" })),
    ]);
    let lhs = binomial_u128((k * size_s) as u64, c as u64);
    let log_lhs = ln_binom((k * size_s) as u64, c as u64);
    Ok(BoundCheck::new(BoundName::Ineq2, inputs, log_lhs, log_rhs, lhs, None))
}

/// One `(k, d, α, n)` cell of the inequality-(2) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ineq2Cell {
    pub n: u64,
    pub k: usize,
    #[serde(with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub small_regime: SweepSummary,
    pub large_regime: SweepSummary,
}

/// The window index of `x` in the partition `[1, εn^{β}/k]`,
/// `[εn^{1−iβ}/k, εn^{1−(i−1)β}/k]` with `β = 9α/(10d)`; `0` is the small window.
fn ineq2_window(x: f64, n: f64, k: usize, beta: f64, eps: f64) -> i64 {
    let small_cap = eps * n.powf(beta) / k as f64;
    if x <= small_cap {
        return 0;
    }
    // x ≥ εn^{1−iβ}/k ⇔ i ≥ (1 − ln(kx/ε)/ln n)/β
    let i = ((1.0 - (k as f64 * x / eps).ln() / n.ln()) / beta).ceil();
    i.max(1.0) as i64
}

/// Samples admissible `(|S|, t, c)` for one cell: `1 ≤ c ≤ t` and `|S|, t`
/// in the same window of the partition used by the regime argument.
pub fn ineq2_cell(n: u64, k: usize, d: Rational, alpha: Rational, eps: Rational, points: usize, seed: u64) -> Result<Ineq2Cell> {
    let nf = n as f64;
    let cap = (rational::to_f64(&eps) * nf / k as f64).floor() as usize;
    if cap == 0 {
        return Err(Error::param("εn/k < 1: no admissible |S|"));
    }
    let beta = 9.0 * rational::to_f64(&alpha) / (10.0 * rational::to_f64(&d));
    let ef = rational::to_f64(&eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut small = SweepSummary::new(BoundName::Ineq2);
    let mut large = SweepSummary::new(BoundName::Ineq2);
    let mut record = |s: usize, t: usize, c: usize| -> Result<()> {
        let check = ineq2_check(s, t, c, n, k, d, alpha, eps)?;
        if check.inputs["regime"] == "small" {
            small.add(&check);
        } else {
            large.add(&check);
        }
        Ok(())
    };
    // corners of every window, then uniform samples
    // the window index is nonincreasing in x, so each window is an interval
    let window = |x: usize| ineq2_window(x as f64, nf, k, beta, ef);
    let mut windows: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    let mut x = 1;
    while x <= cap {
        let w = window(x);
        let (mut lo, mut hi) = (x, cap);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if window(mid) == w {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        windows.insert(w, (x, lo));
        x = lo + 1;
    }
    for &(lo, hi) in windows.values() {
        for s in [lo, hi] {
            for t in [lo, hi] {
                for c in [1, t] {
                    record(s, t, c)?;
                }
            }
        }
    }
    let spans: Vec<(usize, usize)> = windows.values().copied().collect();
    for _ in 0..points {
        let (lo, hi) = spans[rng.gen_range(0..spans.len())];
        let s = rng.gen_range(lo..=hi);
        let t = rng.gen_range(lo..=hi);
        let c = rng.gen_range(1..=t);
        record(s, t, c)?;
    }
    Ok(Ineq2Cell { n, k, d, alpha, eps, small_regime: small, large_regime: large })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuccessMode {
    /// `1 − K/(Cl)` with sample size `Clq|V|`.
    Spiro26,
    /// `1 − 6ℓ²(C/4)^{−r/2} − 2exp(−ℓCq|V|/4) − 8γ/(Cℓ)` with sample size `2ℓCq|V|`.
    Kelly42,
}

impl FromStr for SuccessMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiro26" => Ok(SuccessMode::Spiro26),
            "kelly42" => Ok(SuccessMode::Kelly42),
            _ => Err(Error::param(format!("unknown mode {s:?} (spiro26 | kelly42)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    pub mode: SuccessMode,
    /// Value of the formula before clamping to `[0, 1]`.
    pub raw: f64,
    pub bound: f64,
    pub sample_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessInputs {
    pub l: f64,
    pub c: f64,
    pub q: f64,
    pub v_size: f64,
    /// `r_{ℓ−1}`, used by `kelly42`.
    pub r: f64,
    pub gamma: f64,
    /// The unspecified absolute constant of `spiro26`.
    pub k_const: f64,
}

pub fn spiro_success_bound(inputs: SuccessInputs, mode: SuccessMode) -> Result<SuccessBound> {
    let SuccessInputs { l, c, q, v_size, r, gamma, k_const } = inputs;
    if [l, c, q, v_size].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::param("l, C, q and |V| must be positive"));
    }
    let (raw, sample_size) = match mode {
        SuccessMode::Spiro26 => {
            if !(k_const.is_finite() && k_const >= 0.0) {
                return Err(Error::param("K must be nonnegative"));
            }
            (1.0 - k_const / (c * l), c * l * q * v_size)
        }
        SuccessMode::Kelly42 => {
            if c < 8.0 {
                return Err(Error::param(format!("kelly42 needs C ≥ 8, got {c}")));
            }
            if !(r >= 0.0 && gamma >= 0.0) {
                return Err(Error::param("r and gamma must be nonnegative"));
            }
            let raw = 1.0 - 6.0 * l * l * (c / 4.0).powf(-r / 2.0) - 2.0 * (-l * c * q * v_size / 4.0).exp()
                - 8.0 * gamma / (c * l);
            (raw, 2.0 * l * c * q * v_size)
        }
    };
    Ok(SuccessBound { mode, raw, bound: raw.clamp(0.0, 1.0), sample_size })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyStepReport {
    #[serde(with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub max_vertices: usize,
    pub subgraphs: u64,
    pub violations: u64,
    /// Smallest `v − t/d − 1 − α/d` over checked subgraphs.
    #[serde(with = "serde_rational")]
    pub min_slack: Rational,
    /// Edges of the subgraph attaining `min_slack`.
    pub witness: Vec<Vec<usize>>,
}

/// Checks `v ≥ t/d + 1 + α/d` for every connected edge subset of `g`
/// spanning at most `⌊eps·n⌋` vertices.
pub fn deficiency_step_check(g: &Hypergraph, d: Rational, alpha: Rational, eps: Rational, budget: Budget) -> Result<DeficiencyStepReport> {
    g.require_mask_size("deficiency step check")?;
    if d <= Rational::zero() {
        return Err(Error::param("d must be positive"));
    }
    let max_vertices = rational::floor_mul(&eps, g.n());
    let emask = g.edge_masks();
    let mut report = DeficiencyStepReport {
        d,
        alpha,
        max_vertices,
        subgraphs: 0,
        violations: 0,
        min_slack: Rational::from_integer(i64::MAX / 4),
        witness: Vec::new(),
    };
    let mut spent = 0u64;
    for size in g.k()..=max_vertices.min(g.n()) {
        for u in crate::hypercore::k_subsets(g.n(), size) {
            let umask = u.iter().fold(0u64, |a, &v| a | (1u64 << v));
            let inside: Vec<usize> = (0..g.edge_count()).filter(|&e| emask[e] & !umask == 0).collect();
            if inside.len() > 30 {
                return Err(Error::param("a vertex subset spans more than 30 edges"));
            }
            spent += 1u64 << inside.len();
            if spent > budget.max_nodes {
                return Err(Error::BudgetExceeded { operation: "deficiency step check", budget: budget.max_nodes, best: None });
            }
            let local: Vec<u64> = inside.iter().map(|&e| emask[e]).collect();
            for tm in 1u64..1 << inside.len() {
                let span = (0..inside.len()).filter(|&i| tm >> i & 1 == 1).fold(0u64, |a, i| a | local[i]);
                if span != umask || edge_components(&local, tm) != 1 {
                    continue;
                }
                let t = tm.count_ones() as i64;
                let slack = Rational::from_integer(size as i64) - Rational::from_integer(t) / d - Rational::from_integer(1) - alpha / d;
                report.subgraphs += 1;
                if slack < Rational::zero() {
                    report.violations += 1;
                }
                if slack < report.min_slack {
                    report.min_slack = slack;
                    report.witness = (0..inside.len()).filter(|&i| tm >> i & 1 == 1).map(|i| g.edge(inside[i]).to_vec()).collect();
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structgen;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Hypergraph {
        Hypergraph::build(2, n, (0..n).map(|i| [i, (i + 1) % n])).unwrap()
    }

    /// Literal reading by brute force over all injections of `X` into `V(F)`.
    fn lemma31_oracle(g: &Hypergraph, h: &Hypergraph, f: &[usize], covering: bool) -> u128 {
        let (_, vf) = h.edge_subgraph(f);
        let v = vf.len();
        let mut count = 0;
        for x in crate::hypercore::k_subsets(g.n(), v) {
            let mut perm: Vec<usize> = (0..v).collect();
            loop {
                let map = |a: usize| vf[perm[x.iter().position(|&y| y == a).unwrap()]];
                let inner: Vec<&Vec<usize>> = g.edges().iter().filter(|e| e.iter().all(|a| x.contains(a))).collect();
                let images: Vec<Vec<usize>> = inner.iter().map(|e| e.iter().map(|&a| map(a)).collect()).collect();
                let ok = images.iter().all(|img| h.has_edge(img));
                let covers = f.iter().all(|&e| {
                    images.iter().any(|img| {
                        let mut s = img.clone();
                        s.sort_unstable();
                        s == h.edge(e)
                    })
                });
                if ok && (!covering || covers) {
                    count += 1;
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        count
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn lemma31_examples() {
        let k4 = Hypergraph::complete(2, 4).unwrap();
        let c = lemma31_check(&cycle(4), &k4, &[0], Lemma31Reading::Literal, Budget::default()).unwrap();
        assert_eq!((c.exact_lhs, c.exact_rhs, c.verdict), (Some(12), Some(16), Verdict::Pass));
        let k3 = Hypergraph::complete(2, 3).unwrap();
        let c = lemma31_check(&k3, &k3, &[0, 1, 2], Lemma31Reading::Literal, Budget::default()).unwrap();
        assert_eq!((c.exact_lhs, c.exact_rhs), (Some(6), Some(48)));
        // each 3-set of C4 induces a path, which maps onto a triangle six ways but never covers it
        let tri: Vec<usize> = [[0, 1], [0, 2], [1, 2]].iter().map(|e| k4.edge_index(e).unwrap()).collect();
        let c = lemma31_check(&cycle(4), &k4, &tri, Lemma31Reading::Literal, Budget::default()).unwrap();
        assert_eq!((c.exact_lhs, c.exact_rhs), (Some(24), Some(64)));
        let c = lemma31_check(&cycle(4), &k4, &tri, Lemma31Reading::Covering, Budget::default()).unwrap();
        assert_eq!(c.exact_lhs, Some(0));
    }

    #[test]
    fn lemma31_literal_reading_can_exceed_the_bound() {
        let g = structgen::perfect_matching(4, 2).unwrap();
        let k4 = Hypergraph::complete(2, 4).unwrap();
        let tri: Vec<usize> = [[0, 1], [0, 2], [1, 2]].iter().map(|e| k4.edge_index(e).unwrap()).collect();
        let lit = lemma31_check(&g, &k4, &tri, Lemma31Reading::Literal, Budget::default()).unwrap();
        assert_eq!((lit.exact_lhs, lit.exact_rhs, lit.verdict), (Some(24), Some(16), Verdict::Fail));
        let cov = lemma31_check(&g, &k4, &tri, Lemma31Reading::Covering, Budget::default()).unwrap();
        assert_eq!((cov.exact_lhs, cov.verdict), (Some(0), Verdict::Pass));
    }

    #[test]
    fn lemma32_examples() {
        let c4 = cycle(4);
        let all = [0, 1, 2, 3];
        let a = lemma32_check(&c4, &all, 2, 1, Budget::default()).unwrap();
        assert_eq!((a.exact_lhs, a.exact_rhs), (Some(4), Some(2048)));
        let b = lemma32_check(&c4, &all, 2, 2, Budget::default()).unwrap();
        assert_eq!((b.exact_lhs, b.exact_rhs), (Some(2), Some(7168)));
        let single = lemma32_check(&c4, &[1, 3], 1, 1, Budget::default()).unwrap();
        assert_eq!(single.exact_lhs, Some(2));
        assert!(lemma32_check(&c4, &all, 2, 3, Budget::default()).is_err());
        assert!(lemma32_check(&c4, &[], 1, 1, Budget::default()).is_err());
    }

    #[test]
    fn ineq2_examples() {
        let r = Rational::new;
        let a = ineq2_check(3, 3, 1, 10_000, 2, r(2, 1), r(1, 1), r(1, 2)).unwrap();
        assert_eq!(a.inputs["regime"], "small");
        assert_eq!(a.exact_lhs, Some(6));
        assert!((a.rhs - 10_000f64.powf(0.45)).abs() < 1e-9);
        assert!(a.passed());
        let b = ineq2_check(1, 1, 1, 10_000, 2, r(2, 1), r(1, 1), r(1, 2)).unwrap();
        assert!(b.passed());
        assert!(ineq2_check(1, 2, 3, 10_000, 2, r(2, 1), r(1, 1), r(1, 2)).is_err());
        assert!(ineq2_check(10_000, 1, 1, 10_000, 2, r(2, 1), r(1, 1), r(1, 2)).is_err());
    }

    #[test]
    fn success_bound_examples() {
        let base = SuccessInputs { l: 3.0, c: 16.0, q: 0.01, v_size: 1000.0, r: 6.0, gamma: 0.1, k_const: 1.0 };
        let b = spiro_success_bound(base, SuccessMode::Kelly42).unwrap();
        let want = 1.0 - 54.0 / 64.0 - 2.0 * (-120f64).exp() - 0.8 / 48.0;
        assert!((b.bound - want).abs() < 1e-12);
        assert!((b.bound - 0.1396).abs() < 5e-4);
        assert_eq!(b.sample_size, 960.0);

        let far = SuccessInputs { r: 1e6, gamma: 0.0, v_size: 1e9, ..base };
        assert!((spiro_success_bound(far, SuccessMode::Kelly42).unwrap().bound - 1.0).abs() < 1e-12);

        let s1 = spiro_success_bound(base, SuccessMode::Spiro26).unwrap();
        let s2 = spiro_success_bound(SuccessInputs { c: 32.0, ..base }, SuccessMode::Spiro26).unwrap();
        assert!(((1.0 - s2.bound) * 2.0 - (1.0 - s1.bound)).abs() < 1e-15);
        assert!(spiro_success_bound(SuccessInputs { c: 4.0, ..base }, SuccessMode::Kelly42).is_err());
        let clamped = spiro_success_bound(SuccessInputs { r: 0.0, ..base }, SuccessMode::Kelly42).unwrap();
        assert_eq!(clamped.bound, 0.0);
        assert!(clamped.raw < 0.0);
    }

    #[test]
    fn deficiency_step_on_cycle_power() {
        let g = structgen::cycle_power(12, 2).unwrap();
        let r = Rational::new;
        let rep = deficiency_step_check(&g, r(2, 1), r(1, 1), r(1, 2), Budget::default()).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.subgraphs > 0);
        // α = 2 is too much for an edge: 2 < 1/2 + 1 + 1
        let rep = deficiency_step_check(&g, r(2, 1), r(2, 1), r(1, 2), Budget::default()).unwrap();
        assert!(rep.violations > 0);
    }

    #[test]
    fn verdict_recomputes() {
        let c = lemma32_check(&cycle(5), &[0, 1, 2], 2, 1, Budget::default()).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: BoundCheck = serde_json::from_str(&json).unwrap();
        assert_eq!(back.recompute_verdict(), back.verdict);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn lemma31_matches_oracle(n in 3usize..6, pg in 0.2f64..0.9, ph in 0.3f64..1.0, seed in any::<u64>(), pick in any::<u64>()) {
            let g = structgen::gnp(n, 2, pg, seed).unwrap();
            let h = structgen::gnp(n, 2, ph, seed ^ 3).unwrap();
            let m = h.edge_count();
            prop_assume!(m > 0);
            let fm = 1 + pick % ((1u64 << m) - 1);
            let f: Vec<usize> = (0..m).filter(|&e| fm >> e & 1 == 1).collect();
            for (reading, covering) in [(Lemma31Reading::Literal, false), (Lemma31Reading::Covering, true)] {
                let c = lemma31_check(&g, &h, &f, reading, Budget::default()).unwrap();
                prop_assert_eq!(c.exact_lhs.unwrap(), lemma31_oracle(&g, &h, &f, covering));
            }
        }

        #[test]
        fn sweep_counts_match_direct_counts(n in 3usize..7, p in 0.2f64..0.9, seed in any::<u64>()) {
            let g = structgen::gnp(n, 2, p, seed).unwrap();
            prop_assume!(g.edge_count() > 0 && g.edge_count() <= 10);
            let sweep = lemma32_sweep(&g, g.edge_count()).unwrap();
            let mut direct = SweepSummary::new(BoundName::Lemma32);
            for size in 1..=g.edge_count() {
                for s in crate::hypercore::k_subsets(g.edge_count(), size) {
                    for t in 1..=size {
                        for c in 1..=t {
                            direct.add(&lemma32_check(&g, &s, t, c, Budget::default()).unwrap());
                        }
                    }
                }
            }
            prop_assert_eq!(sweep.checks, direct.checks);
            prop_assert_eq!(sweep.violations, direct.violations);
            prop_assert!((sweep.worst_log_gap - direct.worst_log_gap).abs() < 1e-9);
        }

        #[test]
        fn ineq2_small_regime_always_holds(n in 100u64..1_000_000, k in 2usize..4, d in 1i64..4, a in 1i64..4, s in 1usize..50, t in 1usize..50, cf in 0.0f64..1.0) {
            let (dr, ar, er) = (Rational::from_integer(d), Rational::new(a, 2), Rational::new(1, 2));
            let c = 1 + ((t - 1) as f64 * cf) as usize;
            if let Ok(check) = ineq2_check(s, t, c, n, k, dr, ar, er) {
                if check.inputs["regime"] == "small" {
                    prop_assert!(check.passed(), "{:?}", check);
                }
            }
        }
    }
}
