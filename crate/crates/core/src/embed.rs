//! Backtracking search for hypergraph embeddings (injective vertex maps
//! sending pattern edges onto host edges).
//!
//! Candidates for a pattern vertex are host vertices of sufficient degree
//! adjacent to the images of its mapped neighbours; for `k ≥ 3` each fully
//! mapped pattern edge is also looked up in the host. The next vertex is
//! always the frontier vertex with the fewest candidates.

use std::collections::HashSet;

use crate::error::{Budget, Error, NodeCounter, Result};
use crate::hypercore::iso::{canonical_form, vertex_orbits};
use crate::hypercore::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Visit every embedding.
    Enumerate,
    /// Stop at the first embedding of a spanning pattern. Components of the
    /// pattern are placed one at a time, each one covering the lowest
    /// uncovered host vertex, with interchangeable components and
    /// equivalent vertices inside a component tried once.
    SpanningDecision,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub found: u64,
}

struct ComponentInfo {
    vertices: Vec<usize>,
    class: usize,
    /// vertices that represent the orbits of the component's automorphism group
    reps: Vec<usize>,
}

pub struct Embedder<'a> {
    pattern: &'a Hypergraph,
    host: &'a Hypergraph,
    p_adj: Vec<u64>,
    h_adj: Vec<u64>,
    host_edges: HashSet<u64>,
    p_edge_masks: Vec<u64>,
    deg_ok: Vec<u64>,
    components: Vec<ComponentInfo>,
}

struct State {
    map: Vec<usize>,
    used: u64,
    mapped: u64,
    count: usize,
}

impl<'a> Embedder<'a> {
    pub fn new(pattern: &'a Hypergraph, host: &'a Hypergraph) -> Result<Self> {
        pattern.require_mask_size("embedding search")?;
        host.require_mask_size("embedding search")?;
        if pattern.k() != host.k() {
            return Err(Error::param(format!(
                "pattern is {}-uniform but host is {}-uniform",
                pattern.k(),
                host.k()
            )));
        }
        let deg_ok = (0..pattern.n())
            .map(|x| {
                (0..host.n())
                    .filter(|&y| host.degree(y) >= pattern.degree(x))
                    .fold(0u64, |m, y| m | (1 << y))
            })
            .collect();
        Ok(Embedder {
            pattern,
            host,
            p_adj: pattern.neighbour_masks(),
            h_adj: host.neighbour_masks(),
            host_edges: host.edge_masks().into_iter().collect(),
            p_edge_masks: pattern.edge_masks(),
            deg_ok,
            components: Vec::new(),
        })
    }

    fn prepare_components(&mut self) -> Result<()> {
        let mut classes: Vec<crate::hypercore::CanonicalForm> = Vec::new();
        for comp in self.pattern.components() {
            let sub = self.pattern.induced(&crate::hypercore::VertexSet::new(comp.clone()))?;
            let form = canonical_form(&sub)?;
            let class = match classes.iter().position(|c| *c == form) {
                Some(i) => i,
                None => {
                    classes.push(form);
                    classes.len() - 1
                }
            };
            let orbits = vertex_orbits(&sub, Budget::default())?;
            let reps = comp.iter().enumerate().filter(|&(i, _)| orbits[i] == i).map(|(_, &v)| v).collect();
            self.components.push(ComponentInfo { vertices: comp, class, reps });
        }
        Ok(())
    }

    fn candidates(&self, st: &State, x: usize) -> u64 {
        let mut mask = self.deg_ok[x] & !st.used;
        let mut nb = self.p_adj[x] & st.mapped;
        while nb != 0 {
            let z = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            mask &= self.h_adj[st.map[z]];
        }
        if self.pattern.k() == 2 || mask == 0 {
            return mask;
        }
        // k ≥ 3: every pattern edge through x that becomes fully mapped must exist
        let closing: Vec<u64> = self
            .pattern
            .incident(x)
            .iter()
            .filter(|&&ei| self.p_edge_masks[ei] & !(1 << x) & !st.mapped == 0)
            .map(|&ei| {
                self.pattern.edge(ei).iter().filter(|&&u| u != x).fold(0u64, |m, &u| m | (1 << st.map[u]))
            })
            .collect();
        if closing.is_empty() {
            return mask;
        }
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let y = m.trailing_zeros() as usize;
            m &= m - 1;
            if closing.iter().all(|&img| self.host_edges.contains(&(img | (1 << y)))) {
                out |= 1 << y;
            }
        }
        out
    }

    fn assign(st: &mut State, x: usize, y: usize) {
        st.map[x] = y;
        st.used |= 1 << y;
        st.mapped |= 1 << x;
        st.count += 1;
    }

    fn unassign(st: &mut State, x: usize, y: usize) {
        st.map[x] = usize::MAX;
        st.used &= !(1 << y);
        st.mapped &= !(1 << x);
        st.count -= 1;
    }

    /// Runs the search; `visit` returns `false` to stop early.
    pub fn run(
        mut self,
        mode: SearchMode,
        budget: Budget,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<SearchStats> {
        if self.pattern.n() > self.host.n() {
            return Ok(SearchStats::default());
        }
        if mode == SearchMode::SpanningDecision {
            if self.pattern.n() != self.host.n() {
                return Err(Error::param("spanning search needs equal vertex counts"));
            }
            if !degrees_dominated(self.pattern, self.host) {
                return Ok(SearchStats { nodes: 0, found: 0 });
            }
            self.prepare_components()?;
        }
        let mut st = State { map: vec![usize::MAX; self.pattern.n()], used: 0, mapped: 0, count: 0 };
        let mut counter = NodeCounter::new(budget);
        let mut found = 0u64;
        self.rec(mode, &mut st, &mut counter, &mut found, visit);
        if counter.exceeded() {
            return Err(Error::BudgetExceeded {
                operation: "embedding search",
                budget: budget.max_nodes,
                best: Some(crate::error::BestSoFar::Count(found)),
            });
        }
        Ok(SearchStats { nodes: counter.nodes, found })
    }

    /// Returns true when the search must stop.
    fn rec(
        &self,
        mode: SearchMode,
        st: &mut State,
        counter: &mut NodeCounter,
        found: &mut u64,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if st.count == self.pattern.n() {
            *found += 1;
            return !visit(&st.map);
        }
        if !counter.tick() {
            return true;
        }
        let mut frontier = 0u64;
        let mut m = st.mapped;
        while m != 0 {
            let z = m.trailing_zeros() as usize;
            m &= m - 1;
            frontier |= self.p_adj[z];
        }
        frontier &= !st.mapped;

        if frontier != 0 {
            let (x, cands) = self.most_constrained(st, frontier);
            return self.branch(mode, st, counter, found, visit, x, cands);
        }

        match mode {
            SearchMode::SpanningDecision => {
                let u = (!st.used).trailing_zeros() as usize;
                let mut seen_class = Vec::new();
                for comp in &self.components {
                    if st.map[comp.vertices[0]] != usize::MAX || seen_class.contains(&comp.class) {
                        continue;
                    }
                    seen_class.push(comp.class);
                    for &x in &comp.reps {
                        if self.deg_ok[x] & (1 << u) == 0 {
                            continue;
                        }
                        Self::assign(st, x, u);
                        let stop = self.rec(mode, st, counter, found, visit);
                        Self::unassign(st, x, u);
                        if stop {
                            return true;
                        }
                    }
                }
                false
            }
            SearchMode::Enumerate => {
                let all = (0..self.pattern.n()).fold(0u64, |m, x| m | (1 << x));
                let (x, cands) = self.most_constrained(st, all & !st.mapped);
                self.branch(mode, st, counter, found, visit, x, cands)
            }
        }
    }

    fn most_constrained(&self, st: &State, pool: u64) -> (usize, u64) {
        let mut best = (usize::MAX, 0u64, u32::MAX);
        let mut m = pool;
        while m != 0 {
            let x = m.trailing_zeros() as usize;
            m &= m - 1;
            let c = self.candidates(st, x);
            let cnt = c.count_ones();
            if cnt < best.2 {
                best = (x, c, cnt);
                if cnt == 0 {
                    break;
                }
            }
        }
        (best.0, best.1)
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &self,
        mode: SearchMode,
        st: &mut State,
        counter: &mut NodeCounter,
        found: &mut u64,
        visit: &mut dyn FnMut(&[usize]) -> bool,
        x: usize,
        mut cands: u64,
    ) -> bool {
        while cands != 0 {
            let y = cands.trailing_zeros() as usize;
            cands &= cands - 1;
            Self::assign(st, x, y);
            let stop = self.rec(mode, st, counter, found, visit);
            Self::unassign(st, x, y);
            if stop {
                return true;
            }
        }
        false
    }
}

/// Sorted pattern degrees are pointwise at most the sorted host degrees.
/// Necessary for a spanning embedding.
pub fn degrees_dominated(pattern: &Hypergraph, host: &Hypergraph) -> bool {
    let mut p = pattern.degrees().to_vec();
    let mut h = host.degrees().to_vec();
    p.sort_unstable_by(|a, b| b.cmp(a));
    h.sort_unstable_by(|a, b| b.cmp(a));
    p.iter().zip(&h).all(|(a, b)| a <= b)
}

/// All embeddings of `pattern` into `host`.
pub fn enumerate_embeddings(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    Embedder::new(pattern, host)?.run(SearchMode::Enumerate, budget, &mut |m| {
        out.push(m.to_vec());
        true
    })?;
    Ok(out)
}

pub fn count_embeddings(pattern: &Hypergraph, host: &Hypergraph, budget: Budget) -> Result<u64> {
    Ok(Embedder::new(pattern, host)?.run(SearchMode::Enumerate, budget, &mut |_| true)?.found)
}

/// Checks that `map` is an embedding of `pattern` into `host`.
pub fn is_embedding(pattern: &Hypergraph, host: &Hypergraph, map: &[usize]) -> bool {
    if map.len() != pattern.n() || map.iter().any(|&y| y >= host.n()) {
        return false;
    }
    let mut seen = vec![false; host.n()];
    if map.iter().any(|&y| std::mem::replace(&mut seen[y], true)) {
        return false;
    }
    pattern.edges().iter().all(|e| {
        let img: Vec<usize> = e.iter().map(|&v| map[v]).collect();
        host.has_edge(&img)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structgen;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Hypergraph {
        Hypergraph::build(2, n, (0..n).map(|i| [i, (i + 1) % n])).unwrap()
    }

    /// Brute force over all injections.
    fn brute_count(p: &Hypergraph, h: &Hypergraph) -> u64 {
        fn rec(p: &Hypergraph, h: &Hypergraph, map: &mut Vec<usize>) -> u64 {
            if map.len() == p.n() {
                return is_embedding(p, h, map) as u64;
            }
            let mut t = 0;
            for y in 0..h.n() {
                if !map.contains(&y) {
                    map.push(y);
                    t += rec(p, h, map);
                    map.pop();
                }
            }
            t
        }
        rec(p, h, &mut Vec::new())
    }

    #[test]
    fn embedding_examples() {
        let edge = Hypergraph::build(2, 2, [[0, 1]]).unwrap();
        let k3 = Hypergraph::complete(2, 3).unwrap();
        let k4 = Hypergraph::complete(2, 4).unwrap();
        assert_eq!(enumerate_embeddings(&edge, &k3, Budget::default()).unwrap().len(), 6);
        assert_eq!(enumerate_embeddings(&cycle(4), &k4, Budget::default()).unwrap().len(), 24);
        assert_eq!(enumerate_embeddings(&k3, &cycle(5), Budget::default()).unwrap().len(), 0);
    }

    #[test]
    fn budget_is_reported() {
        let k6 = Hypergraph::complete(2, 6).unwrap();
        let err = enumerate_embeddings(&cycle(6), &k6, Budget::nodes(10)).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn three_uniform_count() {
        let tight = structgen::tight_cycle_power(6, 3, 1).unwrap();
        let k = Hypergraph::complete(3, 6).unwrap();
        // every bijection works into the complete host
        assert_eq!(count_embeddings(&tight, &k, Budget::default()).unwrap(), 720);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_brute_force(np in 2usize..5, nh in 3usize..7, k in 2usize..4, pp in 0.2f64..0.8, ph in 0.3f64..1.0, seed in any::<u64>()) {
            prop_assume!(np <= nh && k <= np);
            let p = structgen::gnp(np, k, pp, seed).unwrap();
            let h = structgen::gnp(nh, k, ph, seed ^ 0xabcdef).unwrap();
            prop_assert_eq!(count_embeddings(&p, &h, Budget::default()).unwrap(), brute_count(&p, &h));
        }

        #[test]
        fn spanning_decision_matches_enumeration(n in 3usize..8, k in 2usize..4, pp in 0.1f64..0.6, ph in 0.3f64..1.0, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let p = structgen::gnp(n, k, pp, seed).unwrap();
            let h = structgen::gnp(n, k, ph, seed.rotate_left(17)).unwrap();
            let exists = count_embeddings(&p, &h, Budget::default()).unwrap() > 0;
            let mut witness = None;
            let stats = Embedder::new(&p, &h).unwrap().run(SearchMode::SpanningDecision, Budget::default(), &mut |m| {
                witness = Some(m.to_vec());
                false
            }).unwrap();
            prop_assert_eq!(stats.found > 0, exists);
            if let Some(w) = witness {
                prop_assert!(is_embedding(&p, &h, &w));
            }
        }
    }
}
