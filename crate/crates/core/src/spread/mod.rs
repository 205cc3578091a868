//! Exactly enumerated embedding and copy distributions, audits of the four
//! spreadness notions, and the level schedule.

mod audit;
mod schedule;

use std::collections::HashMap;

use crate::embed::enumerate_embeddings;
use crate::error::{BestSoFar, Budget, Error, NodeCounter, Result};
use crate::hypercore::{canonical_form, Hypergraph};
use crate::Rational;

pub use audit::{
    edge_spread_audit, gamma_spread_audit, multilevel_spread_audit, vertex_spread_audit, AuditConfig, AuditMode,
    EventSummary, ModeRequest, Notion, SpreadAuditReport, SpreadWitness,
};
pub use schedule::{level_schedule, LevelSchedule};

/// Finite distribution over embeddings of `pattern` into `host` with integer
/// weights, so every event probability is an exact rational.
#[derive(Debug, Clone)]
pub struct EmbeddingDistribution {
    pattern: Hypergraph,
    host: Hypergraph,
    support: Vec<Vec<usize>>,
    weights: Vec<u64>,
    total: u64,
}

impl EmbeddingDistribution {
    pub fn from_weights(pattern: Hypergraph, host: Hypergraph, support: Vec<Vec<usize>>, weights: Vec<u64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport("no embeddings".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::param("support and weights differ in length"));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::param("weights must be positive"));
        }
        if let Some(bad) = support.iter().find(|m| !crate::embed::is_embedding(&pattern, &host, m)) {
            return Err(Error::param(format!("{bad:?} is not an embedding")));
        }
        let total = weights.iter().try_fold(0u64, |a, &w| a.checked_add(w)).filter(|&t| t <= i64::MAX as u64);
        let total = total.ok_or_else(|| Error::param("total weight overflows"))?;
        Ok(EmbeddingDistribution { pattern, host, support, weights, total })
    }

    /// Uniform over all embeddings.
    pub fn uniform(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<Self> {
        let support = enumerate_embeddings(pattern, host, budget)?;
        if support.is_empty() {
            return Err(Error::EmptySupport("pattern does not embed in host".into()));
        }
        let weights = vec![1; support.len()];
        let total = support.len() as u64;
        Ok(EmbeddingDistribution { pattern: pattern.clone(), host: host.clone(), support, weights, total })
    }

    pub fn point_mass(pattern: Hypergraph, host: Hypergraph, map: Vec<usize>) -> Result<Self> {
        Self::from_weights(pattern, host, vec![map], vec![1])
    }

    pub fn pattern(&self) -> &Hypergraph {
        &self.pattern
    }

    pub fn host(&self) -> &Hypergraph {
        &self.host
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probability(&self, idx: usize) -> Rational {
        Rational::new(self.weights[idx] as i64, self.total as i64)
    }

    /// `μ(ψ(x_i) = y_i for all i)`.
    pub fn vertex_event(&self, xs: &[usize], ys: &[usize]) -> Rational {
        let w: u64 = self
            .support
            .iter()
            .zip(&self.weights)
            .filter(|(m, _)| xs.iter().zip(ys).all(|(&x, &y)| m[x] == y))
            .map(|(_, &w)| w)
            .sum();
        Rational::new(w as i64, self.total as i64)
    }

    /// Image edge set of support element `idx`, as sorted host edge ids.
    pub fn image_edges(&self, idx: usize) -> Vec<usize> {
        let map = &self.support[idx];
        let mut ids: Vec<usize> = self
            .pattern
            .edges()
            .iter()
            .map(|e| {
                let img: Vec<usize> = e.iter().map(|&v| map[v]).collect();
                self.host.edge_index(&img).expect("support maps are embeddings")
            })
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Finite distribution over copies of a pattern in a host; each copy is a
/// sorted list of host edge ids.
#[derive(Debug, Clone)]
pub struct CopyDistribution {
    host: Hypergraph,
    support: Vec<Vec<usize>>,
    weights: Vec<u64>,
    total: u64,
}

impl CopyDistribution {
    /// Support sets are sorted and must be distinct.
    pub fn from_weights(host: Hypergraph, support: Vec<Vec<usize>>, weights: Vec<u64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport("no copies".into()));
        }
        if support.len() != weights.len() || weights.iter().any(|&w| w == 0) {
            return Err(Error::param("weights must be positive and match the support"));
        }
        let mut seen = std::collections::HashSet::new();
        let mut sorted = Vec::with_capacity(support.len());
        for mut s in support {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&e| e >= host.edge_count()) {
                return Err(Error::param(format!("support set {s:?} is empty or names a missing edge")));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::param(format!("support set {s:?} repeated")));
            }
            sorted.push(s);
        }
        let total = weights.iter().try_fold(0u64, |a, &w| a.checked_add(w)).filter(|&t| t <= i64::MAX as u64);
        let total = total.ok_or_else(|| Error::param("total weight overflows"))?;
        Ok(CopyDistribution { host, support: sorted, weights, total })
    }

    /// Uniform over all edge subsets of `host` isomorphic to `pattern`
    /// (isolated pattern vertices ignored).
    pub fn uniform(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<Self> {
        let support = enumerate_copies(pattern, host, budget)?;
        if support.is_empty() {
            return Err(Error::EmptySupport("host has no copy of the pattern".into()));
        }
        let weights = vec![1; support.len()];
        let total = support.len() as u64;
        Ok(CopyDistribution { host: host.clone(), support, weights, total })
    }

    pub fn point_mass(host: Hypergraph, copy: Vec<usize>) -> Result<Self> {
        Self::from_weights(host, vec![copy], vec![1])
    }

    pub fn host(&self) -> &Hypergraph {
        &self.host
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probability(&self, idx: usize) -> Rational {
        Rational::new(self.weights[idx] as i64, self.total as i64)
    }

    /// Largest support set size.
    pub fn r0(&self) -> usize {
        self.support.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `μ(S ⊆ A)` for sorted host edge ids `s`.
    pub fn containment(&self, s: &[usize]) -> Rational {
        let w: u64 = self
            .support
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| s.iter().all(|e| a.binary_search(e).is_ok()))
            .map(|(_, &w)| w)
            .sum();
        Rational::new(w as i64, self.total as i64)
    }

    /// Probability of each support set, keyed by the set.
    pub fn as_map(&self) -> HashMap<Vec<usize>, Rational> {
        (0..self.support.len()).map(|i| (self.support[i].clone(), self.probability(i))).collect()
    }
}

pub fn uniform_embedding_distribution(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<EmbeddingDistribution> {
    EmbeddingDistribution::uniform(pattern, host, budget)
}

/// Image of an embedding distribution on edge sets: each `ψ` maps to
/// `ψ(E(G))`, and coinciding images pool their weight.
pub fn pushforward_copies(d: &EmbeddingDistribution) -> Result<CopyDistribution> {
    if d.pattern.edge_count() == 0 {
        return Err(Error::param("pattern has no edges"));
    }
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut support: Vec<Vec<usize>> = Vec::new();
    let mut weights: Vec<u64> = Vec::new();
    for i in 0..d.support.len() {
        let img = d.image_edges(i);
        match index.get(&img) {
            Some(&j) => weights[j] += d.weights[i],
            None => {
                index.insert(img.clone(), support.len());
                support.push(img);
                weights.push(d.weights[i]);
            }
        }
    }
    Ok(CopyDistribution { host: d.host.clone(), support, weights, total: d.total })
}

/// All edge subsets of `host` forming a copy of `pattern`, as sorted edge id
/// lists.
///
/// Vertices are visited in increasing order and each one picks which of the
/// edges it is the smallest member of to include, so a vertex's degree is
/// final once visited and must fit the pattern's degree multiset.
pub fn enumerate_copies(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<Vec<Vec<usize>>> {
    if pattern.k() != host.k() {
        return Err(Error::param("pattern and host differ in uniformity"));
    }
    let core = pattern.without_isolated();
    if core.edge_count() == 0 {
        return Err(Error::param("pattern has no edges"));
    }
    if core.n() > host.n() {
        return Ok(Vec::new());
    }
    let max_deg = core.max_degree();
    let mut slots = vec![0usize; max_deg + 1];
    slots[0] = host.n() - core.n();
    for &x in core.degrees() {
        slots[x] += 1;
    }
    let mut owned = vec![Vec::new(); host.n()];
    for (i, e) in host.edges().iter().enumerate() {
        owned[e[0]].push(i);
    }
    let mut search = CopySearch {
        host,
        target: canonical_form(&core)?,
        need_edges: core.edge_count(),
        max_deg,
        slots,
        owned,
        deg: vec![0; host.n()],
        chosen: Vec::new(),
        out: Vec::new(),
        counter: NodeCounter::new(budget),
    };
    search.visit(0)?;
    if search.counter.exceeded() {
        return Err(Error::BudgetExceeded {
            operation: "copy enumeration",
            budget: budget.max_nodes,
            best: Some(BestSoFar::Count(search.out.len() as u64)),
        });
    }
    search.out.sort();
    Ok(search.out)
}

struct CopySearch<'a> {
    host: &'a Hypergraph,
    target: crate::hypercore::CanonicalForm,
    need_edges: usize,
    max_deg: usize,
    /// remaining vertices allowed to finish with each degree
    slots: Vec<usize>,
    owned: Vec<Vec<usize>>,
    deg: Vec<usize>,
    chosen: Vec<usize>,
    out: Vec<Vec<usize>>,
    counter: NodeCounter,
}

impl CopySearch<'_> {
    fn visit(&mut self, u: usize) -> Result<()> {
        if !self.counter.tick() {
            return Ok(());
        }
        if u == self.host.n() {
            if self.chosen.len() == self.need_edges {
                let (sub, _) = self.host.edge_subgraph(&self.chosen);
                if canonical_form(&sub)? == self.target {
                    let mut copy = self.chosen.clone();
                    copy.sort_unstable();
                    self.out.push(copy);
                }
            }
            return Ok(());
        }
        let cands: Vec<usize> = self.owned[u]
            .iter()
            .copied()
            .filter(|&e| self.host.edge(e)[1..].iter().all(|&w| self.deg[w] < self.max_deg))
            .collect();
        let room = self.need_edges - self.chosen.len();
        for extra in 0..=cands.len().min(room) {
            let fin = self.deg[u] + extra;
            if fin > self.max_deg {
                break;
            }
            if self.slots[fin] == 0 {
                continue;
            }
            self.slots[fin] -= 1;
            self.pick(u, &cands, 0, extra)?;
            self.slots[fin] += 1;
            if self.counter.exceeded() {
                break;
            }
        }
        Ok(())
    }

    /// Chooses `left` more edges from `cands[from..]` for vertex `u`.
    fn pick(&mut self, u: usize, cands: &[usize], from: usize, left: usize) -> Result<()> {
        if left == 0 {
            return self.visit(u + 1);
        }
        for i in from..=cands.len() - left {
            let e = cands[i];
            let edge = self.host.edge(e);
            if edge[1..].iter().any(|&w| self.deg[w] >= self.max_deg) {
                continue;
            }
            for &w in edge {
                self.deg[w] += 1;
            }
            self.chosen.push(e);
            self.pick(u, cands, i + 1, left - 1)?;
            self.chosen.pop();
            for &w in self.host.edge(e) {
                self.deg[w] -= 1;
            }
        }
        Ok(())
    }
}
