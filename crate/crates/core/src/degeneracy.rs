//! Exact density and degeneracy parameters by branch-and-bound over vertex
//! subsets, and the expectation threshold by subgraph enumeration.
//!
//! Ties between subsets are broken by smaller size, then by the
//! lexicographically smaller sorted vertex list.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{BestSoFar, Budget, Error, NodeCounter, Result};
use crate::hypercore::iso::canonical_form_with_aut;
use crate::hypercore::{Hypergraph, VertexSet};
use crate::rational::{self, serde_rational};
use crate::Rational;

const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.passed() { "pass" } else { "fail" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyParams {
    #[serde(with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub u_min: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub i: usize,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub witness: VertexSet,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    #[serde(with = "serde_rational")]
    pub d: Rational,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub u_min: usize,
    #[serde(with = "serde_rational")]
    pub alpha_star: Rational,
    /// Minimizer of the deficiency `d(|U|−1) − e(H[U])`.
    pub witness: VertexSet,
    /// Set by [`certify_degenerate`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub m1: DensityReport,
    pub verdict: Verdict,
    /// Subset falsifying the verdict: the `m_1` maximizer when `m_1 > d`,
    /// otherwise the deficiency minimizer.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub falsified_by: Option<VertexSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSparsityReport {
    pub d: usize,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub min_boundary: usize,
    pub witness: VertexSet,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeMode {
    /// `(|Aut F|·(n−v)!/n!)^{1/e}`: expected copy count in `G(n,p)` equal to one.
    Standard,
    /// `(|Aut F|/v!)^{1/e}`.
    Literal,
}

impl FromStr for PeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(PeMode::Standard),
            "literal" => Ok(PeMode::Literal),
            _ => Err(Error::param(format!("unknown p_E mode {s:?} (standard | literal)"))),
        }
    }
}

impl fmt::Display for PeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeMode::Standard => "standard",
            PeMode::Literal => "literal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationThresholdReport {
    pub mode: PeMode,
    pub n: usize,
    pub value: f64,
    /// Edges of the maximizing subgraph, as edges of the input.
    pub witness_edges: Vec<Vec<usize>>,
    pub witness_vertices: usize,
    pub witness_aut: u128,
    /// Isomorphism classes of subgraphs examined.
    pub classes: usize,
    pub subsets: u64,
}

/// Per-subgraph candidate value: `(|Aut|·(n−v)!/n!)^{1/e}` or `(|Aut|/v!)^{1/e}`.
pub fn expectation_root(mode: PeMode, n: usize, v: usize, e: usize, aut: u128) -> f64 {
    let ln_fall: f64 = match mode {
        PeMode::Standard => (n - v + 1..=n).map(|j| (j as f64).ln()).sum(),
        PeMode::Literal => (1..=v).map(|j| (j as f64).ln()).sum(),
    };
    (((aut as f64).ln() - ln_fall) / e as f64).exp()
}

/// `a` beats `b` at equal objective value: smaller, then lexicographically first.
fn tie_better(a: u64, b: u64) -> bool {
    match a.count_ones().cmp(&b.count_ones()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => {
            let diff = a ^ b;
            diff != 0 && a & (diff & diff.wrapping_neg()) != 0
        }
    }
}

/// Shared state for subset searches: vertices are added in a fixed order and
/// each node is the set of vertices chosen so far.
struct SubsetSearch<'a> {
    h: &'a Hypergraph,
    order: Vec<usize>,
    /// suffix[j] = mask of order[j..]
    suffix: Vec<u64>,
    emask: Vec<u64>,
    counter: NodeCounter,
}

impl<'a> SubsetSearch<'a> {
    fn new(h: &'a Hypergraph, budget: Budget, what: &str) -> Result<Self> {
        h.require_mask_size(what)?;
        let mut order: Vec<usize> = (0..h.n()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(h.degree(v)), v));
        let mut suffix = vec![0u64; h.n() + 1];
        for j in (0..h.n()).rev() {
            suffix[j] = suffix[j + 1] | (1 << order[j]);
        }
        Ok(SubsetSearch { h, order, suffix, emask: h.edge_masks(), counter: NodeCounter::new(budget) })
    }

    /// Edges completed by adding `v` to `chosen`.
    fn closed_by(&self, chosen: u64, v: usize) -> u64 {
        let with = chosen | (1 << v);
        self.h.incident(v).iter().filter(|&&e| self.emask[e] & !with == 0).count() as u64
    }

    /// Upper bounds on the number of edges each candidate can add, sorted
    /// descending. An edge inside `chosen ∪ rest` meeting `rest` in `j`
    /// vertices gives `1/j` to each of them.
    fn gains(&self, chosen: u64, rest: u64) -> Vec<f64> {
        let pool = chosen | rest;
        let mut g: Vec<f64> = Vec::with_capacity(rest.count_ones() as usize);
        let mut m = rest;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let s: f64 = self
                .h
                .incident(v)
                .iter()
                .map(|&e| self.emask[e])
                .filter(|&em| em & !pool == 0)
                .map(|em| 1.0 / (em & rest).count_ones() as f64)
                .sum();
            g.push(s);
        }
        g.sort_by(|a, b| b.partial_cmp(a).unwrap());
        g
    }
}

struct DensityState {
    i: usize,
    best: Option<(Rational, u64)>,
}

/// `m_i(H)`: the maximum of `e(H[U])/(|U|−i)` over `|U| > i`.
pub fn density_mi(h: &Hypergraph, i: usize, budget: Budget) -> Result<DensityReport> {
    if i < 1 {
        return Err(Error::param("density index i must be at least 1"));
    }
    if h.n() <= i {
        return Err(Error::param(format!("no subset has more than {i} vertices (n = {})", h.n())));
    }
    let mut search = SubsetSearch::new(h, budget, "density search")?;
    let mut st = DensityState { i, best: None };
    density_rec(&mut search, &mut st, 0, 0, 0);
    if search.counter.exceeded() {
        return Err(Error::BudgetExceeded {
            operation: "density search",
            budget: budget.max_nodes,
            best: st.best.map(|(value, _)| BestSoFar::Rational(value)),
        });
    }
    let (value, mask) = st.best.expect("some subset has more than i vertices");
    Ok(DensityReport { i, value, witness: VertexSet::from_mask(mask), nodes: search.counter.nodes })
}

fn density_rec(s: &mut SubsetSearch, st: &mut DensityState, start: usize, chosen: u64, edges: u64) {
    if !s.counter.tick() {
        return;
    }
    let c = chosen.count_ones() as usize;
    if c > st.i {
        let value = Rational::new(edges as i64, (c - st.i) as i64);
        let better = match &st.best {
            None => true,
            Some((b, m)) => value > *b || (value == *b && tie_better(chosen, *m)),
        };
        if better {
            st.best = Some((value, chosen));
        }
    }
    let rest = s.suffix[start];
    if rest == 0 {
        return;
    }
    if let Some((b, _)) = &st.best {
        let best = rational::to_f64(b);
        let gains = s.gains(chosen, rest);
        let mut acc = edges as f64;
        let mut bound = f64::NEG_INFINITY;
        for (a, g) in gains.iter().enumerate() {
            acc += g;
            let size = c + a + 1;
            if size > st.i {
                bound = bound.max(acc / (size - st.i) as f64);
            }
        }
        if bound < best - BOUND_SLACK {
            return;
        }
    }
    for j in start..s.order.len() {
        let v = s.order[j];
        let add = s.closed_by(chosen, v);
        density_rec(s, st, j + 1, chosen | (1 << v), edges + add);
        if s.counter.exceeded() {
            return;
        }
    }
}

struct AlphaState {
    /// d = num/den
    num: i128,
    den: i128,
    u_min: usize,
    u_max: usize,
    /// best scaled deficiency `den·(d(|U|−1) − e)` and its set
    best: Option<(i128, u64)>,
}

/// Minimum deficiency `d(|U|−1) − e(H[U])` over `u_min ≤ |U| ≤ ⌊eps·n⌋`.
pub fn alpha_star(h: &Hypergraph, d: Rational, eps: Rational, u_min: usize, budget: Budget) -> Result<DegeneracyReport> {
    let u_max = check_window(h, d, eps, u_min)?;
    let mut search = SubsetSearch::new(h, budget, "deficiency search")?;
    let mut st = AlphaState {
        num: *d.numer() as i128,
        den: *d.denom() as i128,
        u_min,
        u_max,
        best: None,
    };
    alpha_rec(&mut search, &mut st, 0, 0, 0);
    let den = st.den as i64;
    if search.counter.exceeded() {
        return Err(Error::BudgetExceeded {
            operation: "deficiency search",
            budget: budget.max_nodes,
            best: st.best.map(|(scaled, _)| BestSoFar::Rational(Rational::new(scaled as i64, den))),
        });
    }
    let (scaled, mask) = st.best.expect("window is nonempty");
    let alpha = Rational::new(scaled as i64, den);
    Ok(DegeneracyReport {
        d,
        eps,
        u_min,
        alpha_star: alpha,
        witness: VertexSet::from_mask(mask),
        certificate: None,
    })
}

fn check_window(h: &Hypergraph, d: Rational, eps: Rational, u_min: usize) -> Result<usize> {
    if d <= Rational::zero() {
        return Err(Error::param("d must be positive"));
    }
    if eps <= Rational::zero() || eps > Rational::one() {
        return Err(Error::param("eps must lie in (0, 1]"));
    }
    if u_min < 2 {
        return Err(Error::param("u_min must be at least 2"));
    }
    let u_max = rational::floor_mul(&eps, h.n());
    if u_min > u_max {
        return Err(Error::param(format!(
            "empty window: u_min = {u_min} exceeds ⌊eps·n⌋ = {u_max}"
        )));
    }
    Ok(u_max)
}

fn alpha_rec(s: &mut SubsetSearch, st: &mut AlphaState, start: usize, chosen: u64, edges: u64) {
    if !s.counter.tick() {
        return;
    }
    let c = chosen.count_ones() as usize;
    if c >= st.u_min {
        let value = st.num * (c as i128 - 1) - st.den * edges as i128;
        let better = match st.best {
            None => true,
            Some((b, m)) => value < b || (value == b && tie_better(chosen, m)),
        };
        if better {
            st.best = Some((value, chosen));
        }
    }
    if c == st.u_max {
        return;
    }
    let rest = s.suffix[start];
    if rest == 0 {
        return;
    }
    if let Some((b, _)) = st.best {
        let best = b as f64 / st.den as f64;
        let d = st.num as f64 / st.den as f64;
        let gains = s.gains(chosen, rest);
        let mut acc = edges as f64;
        let mut bound = f64::INFINITY;
        for (a, g) in gains.iter().enumerate().take(st.u_max - c) {
            acc += g;
            let size = c + a + 1;
            if size >= st.u_min {
                bound = bound.min(d * (size - 1) as f64 - acc);
            }
        }
        if bound > best + BOUND_SLACK {
            return;
        }
    }
    for j in start..s.order.len() {
        let v = s.order[j];
        let add = s.closed_by(chosen, v);
        alpha_rec(s, st, j + 1, chosen | (1 << v), edges + add);
        if s.counter.exceeded() {
            return;
        }
    }
}

/// Pass iff `m_1(H) ≤ d` and `α* ≥ α`.
pub fn certify_degenerate(h: &Hypergraph, params: &DegeneracyParams, budget: Budget) -> Result<DegeneracyReport> {
    let mut report = alpha_star(h, params.d, params.eps, params.u_min, budget)?;
    let m1 = density_mi(h, 1, budget)?;
    let dense = m1.value > params.d;
    let deficient = report.alpha_star < params.alpha;
    let falsified_by = if dense {
        Some(m1.witness.clone())
    } else if deficient {
        Some(report.witness.clone())
    } else {
        None
    };
    report.certificate = Some(Certificate {
        alpha: params.alpha,
        m1,
        verdict: Verdict::from_bool(!dense && !deficient),
        falsified_by,
    });
    Ok(report)
}

struct BoundaryState {
    u_min: usize,
    u_max: usize,
    best: Option<(i64, u64)>,
}

/// Minimum edge boundary `|∂U|` over `d ≤ |U| ≤ ⌊eps·n⌋` for a graph; passes
/// iff the minimum is at least `d + 1`.
pub fn locally_sparse_audit(h: &Hypergraph, d: usize, eps: Rational, budget: Budget) -> Result<LocalSparsityReport> {
    if h.k() != 2 {
        return Err(Error::param(format!("local sparsity audit needs a graph (k = 2), got k = {}", h.k())));
    }
    if d == 0 {
        return Err(Error::param("d must be positive"));
    }
    if eps <= Rational::zero() || eps > Rational::one() {
        return Err(Error::param("eps must lie in (0, 1]"));
    }
    let u_max = rational::floor_mul(&eps, h.n());
    if d > u_max {
        return Err(Error::param(format!("empty window: d = {d} exceeds ⌊eps·n⌋ = {u_max}")));
    }
    let mut search = SubsetSearch::new(h, budget, "boundary search")?;
    let adj = h.neighbour_masks();
    let mut st = BoundaryState { u_min: d, u_max, best: None };
    boundary_rec(&mut search, &adj, &mut st, 0, 0, 0);
    if search.counter.exceeded() {
        return Err(Error::BudgetExceeded {
            operation: "boundary search",
            budget: budget.max_nodes,
            best: st.best.map(|(value, _)| BestSoFar::Count(value as u64)),
        });
    }
    let (value, mask) = st.best.expect("window is nonempty");
    Ok(LocalSparsityReport {
        d,
        eps,
        min_boundary: value as usize,
        witness: VertexSet::from_mask(mask),
        verdict: Verdict::from_bool(value as usize > d),
    })
}

fn boundary_rec(s: &mut SubsetSearch, adj: &[u64], st: &mut BoundaryState, start: usize, chosen: u64, boundary: i64) {
    if !s.counter.tick() {
        return;
    }
    let c = chosen.count_ones() as usize;
    if c >= st.u_min {
        let better = match st.best {
            None => true,
            Some((b, m)) => boundary < b || (boundary == b && tie_better(chosen, m)),
        };
        if better {
            st.best = Some((boundary, chosen));
        }
    }
    if c == st.u_max {
        return;
    }
    let rest = s.suffix[start];
    if rest == 0 {
        return;
    }
    if let Some((b, _)) = st.best {
        // adding A changes the boundary by Σ_{v∈A} (deg v − 2 deg_C v) − 2e(A)
        // ≥ Σ_{v∈A} (deg v − 2 deg_C v − deg_R v)
        let mut h: Vec<i64> = Vec::new();
        let mut m = rest;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let deg = adj[v].count_ones() as i64;
            h.push(deg - 2 * (adj[v] & chosen).count_ones() as i64 - (adj[v] & rest).count_ones() as i64);
        }
        h.sort_unstable();
        let mut acc = boundary;
        let mut bound = i64::MAX;
        for (a, x) in h.iter().enumerate().take(st.u_max - c) {
            acc += x;
            if c + a + 1 >= st.u_min {
                bound = bound.min(acc);
            }
        }
        if bound > b {
            return;
        }
    }
    for j in start..s.order.len() {
        let v = s.order[j];
        let inside = (adj[v] & chosen).count_ones() as i64;
        let delta = adj[v].count_ones() as i64 - 2 * inside;
        boundary_rec(s, adj, st, j + 1, chosen | (1 << v), boundary + delta);
        if s.counter.exceeded() {
            return;
        }
    }
}

/// Default cap on edge subsets examined by [`expectation_threshold`].
pub const PE_DEFAULT_BUDGET: u64 = 1 << 16;

/// `p_E(H)`: the largest root over subgraphs `F` (no isolated vertices, up to
/// isomorphism) of the expected-count expression selected by `mode`.
pub fn expectation_threshold(h: &Hypergraph, mode: PeMode, budget: Budget) -> Result<ExpectationThresholdReport> {
    let m = h.edge_count();
    if m == 0 {
        return Err(Error::param("p_E needs at least one edge"));
    }
    if m >= 64 {
        return Err(Error::param(format!("p_E enumeration supports fewer than 64 edges, got {m}")));
    }
    let mut classes: HashMap<crate::hypercore::CanonicalForm, f64> = HashMap::new();
    let mut best: Option<(f64, u64, usize, u128)> = None;
    let mut subsets = 0u64;
    let mut cut = false;
    // subsets by increasing size, so among equal values the smallest wins
    'sizes: for size in 1..=m {
        for ids in crate::hypercore::k_subsets(m, size) {
            subsets += 1;
            if subsets > budget.max_nodes {
                cut = true;
                break 'sizes;
            }
            let (f, _) = h.edge_subgraph(&ids);
            let v = f.n();
            let (form, aut) = canonical_form_with_aut(&f, Budget::default())?;
            if classes.contains_key(&form) {
                continue;
            }
            let value = expectation_root(mode, h.n(), v, size, aut);
            classes.insert(form, value);
            let mask = ids.iter().fold(0u64, |acc, &e| acc | (1 << e));
            if best.map_or(true, |(b, ..)| value > b + 1e-12 * b.max(1.0)) {
                best = Some((value, mask, v, aut));
            }
        }
    }
    if cut {
        return Err(Error::BudgetExceeded {
            operation: "expectation threshold",
            budget: budget.max_nodes,
            best: best.map(|(value, ..)| BestSoFar::Real(value)),
        });
    }
    let (value, mask, v, aut) = best.expect("at least one edge subset");
    let witness_edges = (0..m).filter(|&e| mask >> e & 1 == 1).map(|e| h.edge(e).to_vec()).collect();
    Ok(ExpectationThresholdReport {
        mode,
        n: h.n(),
        value,
        witness_edges,
        witness_vertices: v,
        witness_aut: aut,
        classes: classes.len(),
        subsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::aut_count;
    use crate::structgen;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn cycle(n: usize) -> Hypergraph {
        Hypergraph::build(2, n, (0..n).map(|i| [i, (i + 1) % n])).unwrap()
    }

    #[test]
    fn tiny_budgets_end_in_budget_errors() {
        let g = structgen::cycle_power(8, 2).unwrap();
        for nodes in 0..4 {
            let b = Budget::nodes(nodes);
            assert!(density_mi(&g, 1, b).unwrap_err().is_budget());
            assert!(alpha_star(&g, r(2, 1), r(1, 1), 2, b).unwrap_err().is_budget());
            assert!(locally_sparse_audit(&g, 2, r(1, 1), b).unwrap_err().is_budget());
            assert!(expectation_threshold(&g, PeMode::Standard, b).unwrap_err().is_budget());
        }
    }

    fn petersen() -> Hypergraph {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push([i, (i + 1) % 5]);
            e.push([i, i + 5]);
            e.push([5 + i, 5 + (i + 2) % 5]);
        }
        Hypergraph::build(2, 10, e).unwrap()
    }

    /// Unpruned oracle: every subset in the window.
    fn brute<T: PartialOrd + Copy>(n: usize, lo: usize, hi: usize, f: impl Fn(u64) -> T, maximize: bool) -> T {
        let mut best: Option<T> = None;
        for mask in 0u64..1 << n {
            let c = mask.count_ones() as usize;
            if c < lo || c > hi {
                continue;
            }
            let v = f(mask);
            best = Some(match best {
                None => v,
                Some(b) if (maximize && v > b) || (!maximize && v < b) => v,
                Some(b) => b,
            });
        }
        best.unwrap()
    }

    fn brute_density(h: &Hypergraph, i: usize) -> Rational {
        brute(h.n(), i + 1, h.n(), |m| r(h.induced_edge_count(&VertexSet::from_mask(m)) as i64, m.count_ones() as i64 - i as i64), true)
    }

    fn brute_alpha(h: &Hypergraph, d: Rational, lo: usize, hi: usize) -> Rational {
        brute(h.n(), lo, hi, |m| d * r(m.count_ones() as i64 - 1, 1) - r(h.induced_edge_count(&VertexSet::from_mask(m)) as i64, 1), false)
    }

    #[test]
    fn density_examples() {
        let k3 = Hypergraph::complete(2, 3).unwrap();
        assert_eq!(density_mi(&k3, 2, Budget::default()).unwrap().value, r(3, 1));
        assert_eq!(density_mi(&k3, 1, Budget::default()).unwrap().value, r(3, 2));
        let c5 = density_mi(&cycle(5), 1, Budget::default()).unwrap();
        assert_eq!((c5.value, c5.witness), (r(5, 4), VertexSet::full(5)));
        assert!(density_mi(&k3, 3, Budget::default()).is_err());
        assert!(density_mi(&k3, 0, Budget::default()).is_err());
    }

    #[test]
    fn density_witness_attains_value() {
        let g = structgen::cycle_power(9, 2).unwrap();
        let rep = density_mi(&g, 1, Budget::default()).unwrap();
        let e = g.induced_edge_count(&rep.witness) as i64;
        assert_eq!(rep.value, r(e, rep.witness.len() as i64 - 1));
    }

    #[test]
    fn alpha_examples() {
        let matching = structgen::perfect_matching(8, 2).unwrap();
        let a = alpha_star(&matching, r(1, 1), r(1, 1), 2, Budget::default()).unwrap();
        assert_eq!(a.alpha_star, r(0, 1));
        assert_eq!(matching.induced_edge_count(&a.witness), 1);
        assert_eq!(a.witness.len(), 2);

        let cp = structgen::cycle_power(16, 2).unwrap();
        let a = alpha_star(&cp, r(2, 1), r(1, 2), 2, Budget::default()).unwrap();
        assert_eq!(a.alpha_star, r(1, 1));
        assert_eq!(a.witness, VertexSet::new(vec![0, 1]));

        let k4 = Hypergraph::complete(2, 4).unwrap();
        let a = alpha_star(&k4, r(3, 1), r(1, 1), 2, Budget::default()).unwrap();
        assert_eq!((a.alpha_star, a.witness.len()), (r(2, 1), 2));
    }

    #[test]
    fn certify_examples() {
        let k4 = Hypergraph::complete(2, 4).unwrap();
        let p = |u_min| DegeneracyParams { d: r(3, 1), alpha: r(3, 1), eps: r(1, 1), u_min };
        let fail = certify_degenerate(&k4, &p(2), Budget::default()).unwrap();
        let cert = fail.certificate.unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert_eq!(cert.falsified_by.unwrap().len(), 2);
        let pass = certify_degenerate(&k4, &p(3), Budget::default()).unwrap();
        let cert = pass.certificate.unwrap();
        assert_eq!((cert.verdict, cert.m1.value), (Verdict::Pass, r(2, 1)));
        assert_eq!(pass.alpha_star, r(3, 1));
    }

    #[test]
    fn certify_reports_density_witness() {
        let k5 = Hypergraph::complete(2, 5).unwrap();
        let p = DegeneracyParams { d: r(2, 1), alpha: r(0, 1), eps: r(1, 1), u_min: 2 };
        let cert = certify_degenerate(&k5, &p, Budget::default()).unwrap().certificate.unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert_eq!(cert.falsified_by, Some(VertexSet::full(5)));
    }

    #[test]
    fn window_errors() {
        let k4 = Hypergraph::complete(2, 4).unwrap();
        assert!(alpha_star(&k4, r(1, 1), r(1, 4), 2, Budget::default()).is_err());
        assert!(alpha_star(&k4, r(1, 1), r(1, 1), 1, Budget::default()).is_err());
        assert!(alpha_star(&k4, r(0, 1), r(1, 1), 2, Budget::default()).is_err());
        let t = structgen::tight_cycle_power(6, 3, 1).unwrap();
        assert!(locally_sparse_audit(&t, 2, r(1, 2), Budget::default()).is_err());
    }

    #[test]
    fn budget_signal_carries_bound() {
        let g = structgen::cycle_power(14, 3).unwrap();
        match density_mi(&g, 1, Budget::nodes(20)) {
            Err(Error::BudgetExceeded { best: Some(BestSoFar::Rational(_)), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundary_examples() {
        let p = locally_sparse_audit(&petersen(), 3, r(45, 100), Budget::default()).unwrap();
        assert_eq!((p.min_boundary, p.verdict), (5, Verdict::Pass));
        let c = locally_sparse_audit(&cycle(8), 2, r(1, 2), Budget::default()).unwrap();
        assert_eq!((c.min_boundary, c.verdict), (2, Verdict::Fail));
        let g = structgen::locally_sparse_regular(12, 3).unwrap();
        let l = locally_sparse_audit(&g, 3, r(2, 5), Budget::default()).unwrap();
        assert_eq!((l.min_boundary, l.verdict), (3, Verdict::Fail));
        assert_eq!(l.witness, VertexSet::new(vec![0, 1, 2]));
    }

    #[test]
    fn boundary_matches_oracle() {
        for seed in 0..20 {
            let g = structgen::gnp(11, 2, 0.35, seed).unwrap();
            let got = locally_sparse_audit(&g, 2, r(1, 2), Budget::default()).unwrap().min_boundary;
            let want = brute(11, 2, 5, |m| g.edge_boundary(&VertexSet::from_mask(m)).len(), false);
            assert_eq!(got, want, "seed {seed}");
        }
    }

    #[test]
    fn pe_examples() {
        let k3 = Hypergraph::complete(2, 3).unwrap();
        let lit = expectation_threshold(&k3, PeMode::Literal, Budget::nodes(PE_DEFAULT_BUDGET)).unwrap();
        assert!((lit.value - 1.0).abs() < 1e-12);
        assert_eq!(lit.classes, 3);

        let edge = Hypergraph::build(2, 4, [[0, 1]]).unwrap();
        let one = expectation_threshold(&edge, PeMode::Standard, Budget::nodes(PE_DEFAULT_BUDGET)).unwrap();
        assert!((one.value - 1.0 / 6.0).abs() < 1e-12);

        let cp = structgen::cycle_power(7, 2).unwrap();
        let rep = expectation_threshold(&cp, PeMode::Standard, Budget::nodes(PE_DEFAULT_BUDGET)).unwrap();
        let full = (14.0f64 / 5040.0).powf(1.0 / 14.0);
        assert!((rep.value - full).abs() < 1e-12, "{}", rep.value);
        assert!((rep.value - 0.657).abs() < 5e-4);
        assert_eq!(rep.witness_edges.len(), 14);
        assert_eq!(rep.witness_aut, 14);
    }

    #[test]
    fn pe_budget() {
        let cp = structgen::cycle_power(7, 2).unwrap();
        let err = expectation_threshold(&cp, PeMode::Standard, Budget::nodes(50)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { best: Some(BestSoFar::Real(_)), .. }));
    }

    /// Every edge subset has expected count at least one at p = p_E.
    #[test]
    fn pe_dominates_every_subgraph() {
        for (g, mode) in [
            (structgen::cycle_power(6, 2).unwrap(), PeMode::Standard),
            (structgen::tight_cycle_power(7, 3, 1).unwrap(), PeMode::Standard),
            (petersen().induced(&VertexSet::new((0..7).collect())).unwrap(), PeMode::Literal),
        ] {
            let rep = expectation_threshold(&g, mode, Budget::nodes(PE_DEFAULT_BUDGET)).unwrap();
            let m = g.edge_count();
            for mask in 1u64..1 << m {
                let ids: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
                let (f, _) = g.edge_subgraph(&ids);
                let aut = aut_count(&f).unwrap();
                let root = expectation_root(mode, g.n(), f.n(), ids.len(), aut);
                assert!(root <= rep.value * (1.0 + 1e-12));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pruned_matches_unpruned(n in 3usize..10, k in 2usize..4, p in 0.1f64..0.9, seed in any::<u64>(), dn in 1i64..7, dd in 1i64..3) {
            prop_assume!(k <= n);
            let g = structgen::gnp(n, k, p, seed).unwrap();
            for i in 1..k.min(n) {
                prop_assert_eq!(density_mi(&g, i, Budget::default()).unwrap().value, brute_density(&g, i));
            }
            let d = r(dn, dd);
            let eps = r(2, 3);
            let hi = rational::floor_mul(&eps, n);
            prop_assume!(hi >= 2);
            let rep = alpha_star(&g, d, eps, 2, Budget::default()).unwrap();
            prop_assert_eq!(rep.alpha_star, brute_alpha(&g, d, 2, hi));
            let e = g.induced_edge_count(&rep.witness) as i64;
            prop_assert_eq!(rep.alpha_star, d * r(rep.witness.len() as i64 - 1, 1) - r(e, 1));
        }

        #[test]
        fn adding_an_edge_is_monotone(n in 4usize..9, p in 0.1f64..0.7, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
            let g = structgen::gnp(n, 2, p, seed).unwrap();
            let missing: Vec<Vec<usize>> = crate::hypercore::k_subsets(n, 2).into_iter().filter(|e| !g.has_edge(e)).collect();
            prop_assume!(!missing.is_empty());
            let mut edges = g.edges().to_vec();
            edges.push(pick.get(&missing).clone());
            let g2 = Hypergraph::build(2, n, edges).unwrap();
            let b = Budget::default();
            prop_assert!(density_mi(&g2, 1, b).unwrap().value >= density_mi(&g, 1, b).unwrap().value);
            let (d, eps) = (r(3, 2), r(1, 1));
            prop_assert!(alpha_star(&g2, d, eps, 2, b).unwrap().alpha_star <= alpha_star(&g, d, eps, 2, b).unwrap().alpha_star);
        }

        #[test]
        fn d_degenerate_graphs_have_half_d_deficiency(n in 4usize..12, d in 2usize..4, seed in any::<u64>()) {
            prop_assume!(n > d);
            let g = structgen::random_d_degenerate(n, d, seed).unwrap();
            let params = DegeneracyParams { d: r(d as i64, 1), alpha: r(d as i64, 2), eps: r(1, 1), u_min: 2 };
            let rep = certify_degenerate(&g, &params, Budget::default()).unwrap();
            prop_assert!(rep.certificate.unwrap().verdict.passed());
        }
    }
}
