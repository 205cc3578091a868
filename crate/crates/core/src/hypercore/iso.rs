//! Isomorphism, automorphism counting and canonical forms.
//!
//! Everything here is built on one colour-refinement routine. A vertex's
//! signature is its colour together with the sorted multiset of colour
//! multisets of its co-edges; new colours are ranks of signatures, so the
//! refined colouring is isomorphism-invariant and colours are comparable
//! across different refinements of the same hypergraph.

use serde::Serialize;

use super::Hypergraph;
use crate::error::{Budget, Error, NodeCounter, Result};

/// Largest vertex count handled by plain permutation backtracking.
pub const NAIVE_AUT_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoReport {
    pub is_isomorphic: bool,
    /// Only filled in by [`aut_report`].
    pub automorphism_count: Option<u128>,
    pub witness_map: Option<Vec<usize>>,
}

/// Canonical relabeling of a hypergraph: isomorphic inputs give equal forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm {
    pub k: usize,
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
}

pub(crate) fn refine(h: &Hypergraph, colors: &mut [u32]) {
    let n = h.n();
    let mut classes = distinct(colors);
    let mut sigs: Vec<(u32, Vec<Vec<u32>>)> = Vec::with_capacity(n);
    loop {
        sigs.clear();
        for v in 0..n {
            let mut es: Vec<Vec<u32>> = h
                .incident(v)
                .iter()
                .map(|&ei| {
                    let mut c: Vec<u32> = h.edge(ei).iter().filter(|&&u| u != v).map(|&u| colors[u]).collect();
                    c.sort_unstable();
                    c
                })
                .collect();
            es.sort_unstable();
            sigs.push((colors[v], es));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut rank = 0u32;
        let mut new = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            if i > 0 && sigs[order[i - 1]] != sigs[v] {
                rank += 1;
            }
            new[v] = rank;
        }
        let count = if n == 0 { 0 } else { rank as usize + 1 };
        colors.copy_from_slice(&new);
        if count == classes {
            return;
        }
        classes = count;
    }
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Moves `v` ahead of the rest of its colour class.
fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    let cv = colors[v];
    colors
        .iter()
        .enumerate()
        .map(|(u, &c)| if c == cv && u != v { 2 * c + 1 } else { 2 * c })
        .collect()
}

fn individualize_pair(colors: &[u32], a: usize, b: usize) -> Vec<u32> {
    let ca = colors[a];
    colors
        .iter()
        .enumerate()
        .map(|(u, &c)| if c == ca && u != a && u != b { 2 * c + 1 } else { 2 * c })
        .collect()
}

/// Smallest colour class with more than `threshold` members (ties: lowest colour).
fn target_cell(colors: &[u32], threshold: usize) -> Option<u32> {
    let classes = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut sizes = vec![0usize; classes];
    for &c in colors {
        sizes[c as usize] += 1;
    }
    sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .min_by_key(|(c, &s)| (s, *c))
        .map(|(c, _)| c as u32)
}

fn disjoint_union(a: &Hypergraph, b: &Hypergraph) -> Hypergraph {
    let na = a.n();
    let edges = a
        .edges()
        .iter()
        .cloned()
        .chain(b.edges().iter().map(|e| e.iter().map(|&v| v + na).collect()));
    Hypergraph::build(a.k(), na + b.n(), edges.collect::<Vec<_>>()).expect("union of valid hypergraphs")
}

/// Searches for an isomorphism from the left half (`0..n`) to the right half
/// (`n..2n`) of `union`, respecting the given joint colouring.
fn union_search(union: &Hypergraph, n: usize, mut colors: Vec<u32>, counter: &mut NodeCounter) -> Option<Vec<usize>> {
    if !counter.tick() {
        return None;
    }
    refine(union, &mut colors);
    let classes = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut balance = vec![0i64; classes];
    for (u, &c) in colors.iter().enumerate() {
        balance[c as usize] += if u < n { 1 } else { -1 };
    }
    if balance.iter().any(|&b| b != 0) {
        return None;
    }
    match target_cell(&colors, 2) {
        None => {
            let mut right_of = vec![usize::MAX; classes];
            for u in n..2 * n {
                right_of[colors[u] as usize] = u - n;
            }
            let map: Vec<usize> = (0..n).map(|u| right_of[colors[u] as usize]).collect();
            verify_iso(union, n, &map).then_some(map)
        }
        Some(cell) => {
            let a = (0..n).find(|&u| colors[u] == cell)?;
            for b in (n..2 * n).filter(|&u| colors[u] == cell) {
                let next = individualize_pair(&colors, a, b);
                if let Some(m) = union_search(union, n, next, counter) {
                    return Some(m);
                }
                if counter.exceeded() {
                    return None;
                }
            }
            None
        }
    }
}

fn verify_iso(union: &Hypergraph, n: usize, map: &[usize]) -> bool {
    union.edges().iter().filter(|e| e[0] < n).all(|e| {
        let img: Vec<usize> = e.iter().map(|&v| map[v] + n).collect();
        union.has_edge(&img)
    })
}

/// Decides isomorphism with the default budget.
pub fn iso(a: &Hypergraph, b: &Hypergraph) -> Result<IsoReport> {
    iso_with_budget(a, b, Budget::default())
}

pub fn iso_with_budget(a: &Hypergraph, b: &Hypergraph, budget: Budget) -> Result<IsoReport> {
    let no = IsoReport { is_isomorphic: false, automorphism_count: None, witness_map: None };
    if a.k() != b.k() || a.n() != b.n() || a.edge_count() != b.edge_count() {
        return Ok(no);
    }
    let mut da = a.degrees().to_vec();
    let mut db = b.degrees().to_vec();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(no);
    }
    let n = a.n();
    let union = disjoint_union(a, b);
    let mut counter = NodeCounter::new(budget);
    let found = union_search(&union, n, vec![0; 2 * n], &mut counter);
    if counter.exceeded() {
        return Err(Error::BudgetExceeded { operation: "isomorphism search", budget: budget.max_nodes, best: None });
    }
    Ok(IsoReport { is_isomorphic: found.is_some(), automorphism_count: None, witness_map: found })
}

/// `|Aut(h)|`: permutation backtracking up to [`NAIVE_AUT_LIMIT`] vertices,
/// orbit–stabilizer search with refinement above that.
pub fn aut_count(h: &Hypergraph) -> Result<u128> {
    if h.n() <= NAIVE_AUT_LIMIT {
        Ok(aut_count_naive(h) as u128)
    } else {
        aut_count_refined(h, Budget::default())
    }
}

pub fn aut_report(h: &Hypergraph) -> Result<IsoReport> {
    Ok(IsoReport {
        is_isomorphic: true,
        automorphism_count: Some(aut_count(h)?),
        witness_map: Some((0..h.n()).collect()),
    })
}

/// Counts automorphisms by trying every vertex permutation, rejecting a
/// branch as soon as a fully-mapped edge has no image edge.
pub fn aut_count_naive(h: &Hypergraph) -> u64 {
    let n = h.n();
    assert!(n <= 12, "naive automorphism count is exponential; n = {n}");
    // edges whose largest vertex is v become checkable once v is mapped
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in h.edges().iter().enumerate() {
        closing[*e.last().unwrap()].push(i);
    }
    fn rec(h: &Hypergraph, closing: &[Vec<usize>], perm: &mut Vec<usize>, used: &mut [bool], img: &mut Vec<usize>) -> u64 {
        let v = perm.len();
        if v == h.n() {
            return 1;
        }
        let mut total = 0;
        for w in 0..h.n() {
            if used[w] || h.degree(w) != h.degree(v) {
                continue;
            }
            perm.push(w);
            let ok = closing[v].iter().all(|&ei| {
                img.clear();
                img.extend(h.edge(ei).iter().map(|&u| perm[u]));
                h.has_edge(img)
            });
            if ok {
                used[w] = true;
                total += rec(h, closing, perm, used, img);
                used[w] = false;
            }
            perm.pop();
        }
        total
    }
    rec(h, &closing, &mut Vec::with_capacity(n), &mut vec![false; n], &mut Vec::new())
}

/// Orbit–stabilizer: `|Aut| = Π |orbit of b_i under Stab(b_1..b_{i-1})|`.
pub fn aut_count_refined(h: &Hypergraph, budget: Budget) -> Result<u128> {
    let n = h.n();
    let union = disjoint_union(h, h);
    let mut counter = NodeCounter::new(budget);
    let mut colors = vec![0u32; n];
    refine(h, &mut colors);
    let mut total: u128 = 1;
    while let Some(cell) = target_cell(&colors, 1) {
        let members: Vec<usize> = (0..n).filter(|&u| colors[u] == cell).collect();
        let v = members[0];
        let mut orbit: u128 = 1;
        for &w in &members[1..] {
            let mut joint: Vec<u32> = colors.iter().chain(colors.iter()).copied().collect();
            joint = individualize_pair(&joint, v, w + n);
            if union_search(&union, n, joint, &mut counter).is_some() {
                orbit += 1;
            }
            if counter.exceeded() {
                return Err(Error::BudgetExceeded {
                    operation: "automorphism count",
                    budget: budget.max_nodes,
                    best: None,
                });
            }
        }
        total = total
            .checked_mul(orbit)
            .ok_or_else(|| Error::param("automorphism group order overflows u128"))?;
        colors = individualize(&colors, v);
        refine(h, &mut colors);
    }
    Ok(total)
}

/// Orbit label (smallest member) of every vertex under `Aut(h)`.
pub fn vertex_orbits(h: &Hypergraph, budget: Budget) -> Result<Vec<usize>> {
    let n = h.n();
    let mut colors = vec![0u32; n];
    refine(h, &mut colors);
    let union = disjoint_union(h, h);
    let mut counter = NodeCounter::new(budget);
    let mut orbit = vec![usize::MAX; n];
    for v in 0..n {
        if orbit[v] != usize::MAX {
            continue;
        }
        orbit[v] = v;
        for w in v + 1..n {
            if orbit[w] != usize::MAX || colors[w] != colors[v] {
                continue;
            }
            let mut joint: Vec<u32> = colors.iter().chain(colors.iter()).copied().collect();
            joint = individualize_pair(&joint, v, w + n);
            if union_search(&union, n, joint, &mut counter).is_some() {
                orbit[w] = v;
            }
            if counter.exceeded() {
                return Err(Error::BudgetExceeded { operation: "vertex orbits", budget: budget.max_nodes, best: None });
            }
        }
    }
    Ok(orbit)
}

/// Canonical form together with `|Aut(h)|`.
///
/// Disconnected inputs are assembled from the sorted forms of their
/// components; `|Aut|` is then the product of the component counts times the
/// factorials of the multiplicities of isomorphic components.
pub fn canonical_form_with_aut(h: &Hypergraph, budget: Budget) -> Result<(CanonicalForm, u128)> {
    let comps = h.components();
    if comps.len() <= 1 {
        return connected_canonical_form(h, budget);
    }
    let mut forms = Vec::with_capacity(comps.len());
    for c in comps {
        forms.push(connected_canonical_form(&h.induced(&super::VertexSet::new(c))?, budget)?);
    }
    forms.sort_by(|a, b| (a.0.n, &a.0.edges).cmp(&(b.0.n, &b.0.edges)));
    let overflow = || Error::param("automorphism group order overflows u128");
    let mut aut: u128 = 1;
    let mut edges = Vec::new();
    let mut offset = 0;
    let mut run = 0u128;
    for (i, (form, a)) in forms.iter().enumerate() {
        run = if i > 0 && forms[i - 1].0 == *form { run + 1 } else { 1 };
        aut = aut.checked_mul(a * run).ok_or_else(overflow)?;
        edges.extend(form.edges.iter().map(|e| e.iter().map(|&v| v + offset).collect::<Vec<_>>()));
        offset += form.n;
    }
    Ok((CanonicalForm { k: h.k(), n: h.n(), edges }, aut))
}

/// Explores the whole individualization–refinement tree; the number of leaves
/// producing the minimal relabeled edge list equals the automorphism count.
fn connected_canonical_form(h: &Hypergraph, budget: Budget) -> Result<(CanonicalForm, u128)> {
    struct State {
        best: Option<Vec<Vec<usize>>>,
        count: u128,
    }
    fn rec(h: &Hypergraph, mut colors: Vec<u32>, st: &mut State, counter: &mut NodeCounter) {
        if !counter.tick() {
            return;
        }
        refine(h, &mut colors);
        match target_cell(&colors, 1) {
            None => {
                let mut cert: Vec<Vec<usize>> = h
                    .edges()
                    .iter()
                    .map(|e| {
                        let mut x: Vec<usize> = e.iter().map(|&v| colors[v] as usize).collect();
                        x.sort_unstable();
                        x
                    })
                    .collect();
                cert.sort_unstable();
                match &st.best {
                    Some(b) if *b < cert => {}
                    Some(b) if *b == cert => st.count += 1,
                    _ => {
                        st.best = Some(cert);
                        st.count = 1;
                    }
                }
            }
            Some(cell) => {
                for v in (0..h.n()).filter(|&u| colors[u] == cell) {
                    rec(h, individualize(&colors, v), st, counter);
                    if counter.exceeded() {
                        return;
                    }
                }
            }
        }
    }
    let mut st = State { best: None, count: 0 };
    let mut counter = NodeCounter::new(budget);
    rec(h, vec![0; h.n()], &mut st, &mut counter);
    if counter.exceeded() {
        return Err(Error::BudgetExceeded { operation: "canonical form", budget: budget.max_nodes, best: None });
    }
    let edges = st.best.unwrap_or_default();
    Ok((CanonicalForm { k: h.k(), n: h.n(), edges }, st.count.max(1)))
}

pub fn canonical_form(h: &Hypergraph) -> Result<CanonicalForm> {
    canonical_form_with_aut(h, Budget::default()).map(|(c, _)| c)
}

/// One representative (in canonical labeling) of every isomorphism class of
/// `k`-uniform hypergraphs on exactly `n` vertices, isolated vertices allowed.
/// Built by adding a vertex with every possible link to each class on `n − 1`.
pub fn isomorphism_classes(k: usize, n: usize) -> Result<Vec<Hypergraph>> {
    if k < 2 {
        return Err(Error::Uniformity(k));
    }
    if n > 8 {
        return Err(Error::param(format!("class enumeration is limited to n ≤ 8, got {n}")));
    }
    let mut classes = vec![Hypergraph::empty(k, 0)?];
    for m in 1..=n {
        let links = super::k_subsets(m - 1, k - 1);
        if links.len() > 24 {
            return Err(Error::param(format!("too many links to enumerate at n = {m}, k = {k}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for base in &classes {
            for pick in 0u64..1 << links.len() {
                let mut edges: Vec<Vec<usize>> = base.edges().to_vec();
                for (i, l) in links.iter().enumerate() {
                    if pick >> i & 1 == 1 {
                        let mut e = l.clone();
                        e.push(m - 1);
                        edges.push(e);
                    }
                }
                seen.insert(canonical_form(&Hypergraph::build(k, m, edges)?)?);
            }
        }
        classes = seen.into_iter().map(|f| Hypergraph::build(k, m, f.edges)).collect::<Result<_>>()?;
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structgen;
    use proptest::prelude::*;

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| isomorphism_classes(2, n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34, 156]);
        assert_eq!(isomorphism_classes(3, 4).unwrap().len(), 5);
        assert_eq!(isomorphism_classes(3, 5).unwrap().len(), 34);
    }

    fn path(n: usize) -> Hypergraph {
        Hypergraph::build(2, n, (0..n - 1).map(|i| [i, i + 1])).unwrap()
    }

    fn cycle(n: usize) -> Hypergraph {
        Hypergraph::build(2, n, (0..n).map(|i| [i, (i + 1) % n])).unwrap()
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

    #[test]
    fn aut_examples() {
        assert_eq!(aut_count(&Hypergraph::complete(2, 3).unwrap()).unwrap(), 6);
        assert_eq!(aut_count(&cycle(5)).unwrap(), 10);
        assert_eq!(aut_count(&path(4)).unwrap(), 2);
        assert_eq!(aut_count(&petersen()).unwrap(), 120);
    }

    #[test]
    fn refined_path_large_instances() {
        assert_eq!(aut_count(&cycle(14)).unwrap(), 28);
        assert_eq!(aut_count(&Hypergraph::complete(2, 12).unwrap()).unwrap(), 479_001_600);
        assert_eq!(aut_count(&Hypergraph::empty(3, 13).unwrap()).unwrap(), 6_227_020_800);
        // K_4-factor on 12 vertices: 4!^3 · 3!
        let f = Hypergraph::build(
            2,
            12,
            (0..3).flat_map(|b| crate::hypercore::k_subsets(4, 2).into_iter().map(move |e| [4 * b + e[0], 4 * b + e[1]])),
        )
        .unwrap();
        assert_eq!(aut_count(&f).unwrap(), 24u128.pow(3) * 6);
    }

    #[test]
    fn canonical_count_matches_naive() {
        for h in [cycle(6), path(5), petersen(), Hypergraph::complete(3, 5).unwrap()] {
            let (_, aut) = canonical_form_with_aut(&h, Budget::default()).unwrap();
            assert_eq!(aut, aut_count_naive(&h) as u128);
        }
    }

    #[test]
    fn iso_finds_witness() {
        let c5 = cycle(5);
        let other = Hypergraph::build(2, 5, [[0, 2], [2, 1], [1, 4], [4, 3], [3, 0]]).unwrap();
        let r = iso(&c5, &other).unwrap();
        assert!(r.is_isomorphic);
        let map = r.witness_map.unwrap();
        assert_eq!(c5.relabel(&map).unwrap(), other);
        assert!(!iso(&c5, &path(5)).unwrap().is_isomorphic);
        // same degree sequence, different structure: C_6 vs two triangles
        let tt = Hypergraph::build(2, 6, [[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5]]).unwrap();
        assert!(!iso(&cycle(6), &tt).unwrap().is_isomorphic);
        assert_eq!(canonical_form(&c5).unwrap(), canonical_form(&other).unwrap());
        assert_ne!(canonical_form(&cycle(6)).unwrap(), canonical_form(&tt).unwrap());
    }

    #[test]
    fn orbits_of_path() {
        assert_eq!(vertex_orbits(&path(4), Budget::default()).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(vertex_orbits(&petersen(), Budget::default()).unwrap(), vec![0; 10]);
    }

    fn shuffled(h: &Hypergraph, seed: u64) -> Hypergraph {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..h.n()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        h.relabel(&perm).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // both automorphism routes agree where they overlap
        #[test]
        fn naive_and_refined_agree(n in 2usize..=9, k in 2usize..4, p in 0.1f64..0.9, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let h = structgen::gnp(n, k, p, seed).unwrap();
            let naive = aut_count_naive(&h) as u128;
            prop_assert_eq!(aut_count_refined(&h, Budget::default()).unwrap(), naive);
            prop_assert_eq!(canonical_form_with_aut(&h, Budget::default()).unwrap().1, naive);
            // |Aut| divides n!
            let fact: u128 = (1..=n as u128).product();
            prop_assert_eq!(fact % naive, 0);
        }

        #[test]
        fn iso_is_invariant_under_relabeling(n in 2usize..=9, p in 0.1f64..0.9, seed in any::<u64>(), s2 in any::<u64>()) {
            let h = structgen::gnp(n, 2, p, seed).unwrap();
            let g = shuffled(&h, s2);
            let r = iso(&h, &g).unwrap();
            prop_assert!(r.is_isomorphic);
            let map = r.witness_map.unwrap();
            prop_assert_eq!(h.relabel(&map).unwrap(), g.clone());
            prop_assert_eq!(canonical_form(&h).unwrap(), canonical_form(&g).unwrap());
            // component count preserved by the witness
            prop_assert_eq!(h.components().len(), g.components().len());
        }

        #[test]
        fn iso_is_transitive(n in 3usize..=7, seed in any::<u64>()) {
            let a = structgen::gnp(n, 2, 0.5, seed).unwrap();
            let b = structgen::gnp(n, 2, 0.5, seed.wrapping_add(1)).unwrap();
            let c = structgen::gnp(n, 2, 0.5, seed.wrapping_add(2)).unwrap();
            let ab = iso(&a, &b).unwrap().is_isomorphic;
            let bc = iso(&b, &c).unwrap().is_isomorphic;
            let ac = iso(&a, &c).unwrap().is_isomorphic;
            prop_assert_eq!(ab, iso(&b, &a).unwrap().is_isomorphic);
            if ab && bc { prop_assert!(ac); }
            let same = canonical_form(&a).unwrap() == canonical_form(&b).unwrap();
            prop_assert_eq!(same, ab);
        }
    }
}
