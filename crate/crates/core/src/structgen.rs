//! Generators for the fixture families: cycle powers, tight-cycle powers,
//! the locally sparse regular construction, seeded degenerate graphs and
//! binomial random hypergraphs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::{k_subsets, Hypergraph};

/// A fully parameterized generator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenSpec {
    CyclePower { n: usize, r: usize },
    TightCyclePower { n: usize, k: usize, r: usize },
    DDegenerateRandom { n: usize, d: usize, seed: u64 },
    LocallySparseRegular { n: usize, d: usize },
    BinomialRandom { n: usize, k: usize, p: f64, seed: u64 },
}

impl GenSpec {
    pub fn generate(&self) -> Result<Hypergraph> {
        match *self {
            GenSpec::CyclePower { n, r } => cycle_power(n, r),
            GenSpec::TightCyclePower { n, k, r } => tight_cycle_power(n, k, r),
            GenSpec::DDegenerateRandom { n, d, seed } => random_d_degenerate(n, d, seed),
            GenSpec::LocallySparseRegular { n, d } => locally_sparse_regular(n, d),
            GenSpec::BinomialRandom { n, k, p, seed } => gnp(n, k, p, seed),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            GenSpec::CyclePower { .. } => "cycle_power",
            GenSpec::TightCyclePower { .. } => "tight_cycle_power",
            GenSpec::DDegenerateRandom { .. } => "d_degenerate_random",
            GenSpec::LocallySparseRegular { .. } => "locally_sparse_regular",
            GenSpec::BinomialRandom { .. } => "binomial_random",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, GenSpec::DDegenerateRandom { .. } | GenSpec::BinomialRandom { .. })
    }
}

/// r-th power of the n-cycle: `{i, j}` is an edge iff the cyclic distance is at most `r`.
pub fn cycle_power(n: usize, r: usize) -> Result<Hypergraph> {
    if r == 0 {
        return Err(Error::param("cycle power needs r ≥ 1"));
    }
    if n <= 2 * r {
        return Err(Error::param(format!("cycle power needs n ≥ 2r+1, got n={n}, r={r}")));
    }
    let edges = (0..n).flat_map(|i| (1..=r).map(move |s| [i, (i + s) % n]));
    Hypergraph::build(2, n, edges.collect::<Vec<_>>())
}

/// r-th power of the k-uniform tight cycle: all k-sets inside some cyclic
/// window of `k + r - 1` consecutive vertices.
pub fn tight_cycle_power(n: usize, k: usize, r: usize) -> Result<Hypergraph> {
    if k < 2 || r == 0 {
        return Err(Error::param("tight cycle power needs k ≥ 2 and r ≥ 1"));
    }
    let window = k + r - 1;
    if window >= n {
        return Err(Error::param(format!("window k+r-1 = {window} must be smaller than n = {n}")));
    }
    // each edge is listed once, from its cyclically-first vertex
    let mut edges = Vec::new();
    for start in 0..n {
        for rest in k_subsets(window - 1, k - 1) {
            let e: Vec<usize> = std::iter::once(start).chain(rest.iter().map(|&j| (start + 1 + j) % n)).collect();
            edges.push(e);
        }
    }
    Hypergraph::build(k, n, edges)
}

/// d-regular graph made of `n/d` disjoint `K_d` plus cyclic cross edges.
///
/// For even `d`, clique `i` sends its second half to the first half of clique
/// `i+1`. For odd `d`, the middle `(d-1)/2` vertices do the same, and the last
/// vertex of clique `i` is joined to the last vertex of clique `i + n/(2d)`;
/// that long edge arises twice and is stored once.
pub fn locally_sparse_regular(n: usize, d: usize) -> Result<Hypergraph> {
    if d < 3 {
        return Err(Error::param("construction needs d ≥ 3"));
    }
    if n == 0 || n % d != 0 {
        return Err(Error::param(format!("construction needs n ≡ 0 (mod d); n={n}, d={d}")));
    }
    if d % 2 == 1 && n % (2 * d) != 0 {
        return Err(Error::param(format!("odd d needs n ≡ 0 (mod 2d); n={n}, d={d}")));
    }
    if n == d {
        return Err(Error::param("construction needs at least two cliques (n ≥ 2d)"));
    }
    let blocks = n / d;
    // 1-based labels with n + j ≡ j, converted to 0-based
    let v = |one_based: usize| (one_based - 1) % n;
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for i in 0..blocks {
        for a in 0..d {
            for b in a + 1..d {
                edges.push([i * d + a, i * d + b]);
            }
        }
    }
    for i in 1..=blocks {
        if d % 2 == 0 {
            for j in 1..=d / 2 {
                edges.push([v((i - 1) * d + d / 2 + j), v(i * d + j)]);
            }
        } else {
            for j in 1..=(d - 1) / 2 {
                edges.push([v((i - 1) * d + (d - 1) / 2 + j), v(i * d + j)]);
            }
            edges.push([v((i - 1) * d + d), v((n / (2 * d) + i - 1) * d + d)]);
        }
    }
    Hypergraph::build(2, n, edges)
}

/// Seeded d-degenerate graph: vertex `i` joins `min(i, d)` distinct earlier
/// vertices chosen uniformly.
pub fn random_d_degenerate(n: usize, d: usize, seed: u64) -> Result<Hypergraph> {
    if d == 0 || n <= d {
        return Err(Error::param(format!("need n > d ≥ 1; n={n}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        for j in rand::seq::index::sample(&mut rng, i, i.min(d)).iter() {
            edges.push([j, i]);
        }
    }
    Hypergraph::build(2, n, edges)
}

/// Binomial random k-uniform hypergraph.
///
/// The k-set with lexicographic index `i` is kept iff the `i`-th uniform draw
/// of the ChaCha8 stream keyed by `seed` is below `p`, so the same seed
/// couples samples monotonically across `p`.
pub fn gnp(n: usize, k: usize, p: f64, seed: u64) -> Result<Hypergraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p must lie in [0,1], got {p}")));
    }
    if k < 2 {
        return Err(Error::Uniformity(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<Vec<usize>> = k_subsets(n, k).into_iter().filter(|_| rng.gen::<f64>() < p).collect();
    Hypergraph::build(k, n, edges)
}

/// Uniform draw attached to the k-set with lexicographic index `index`,
/// reached by seeking the stream rather than replaying it.
pub fn gnp_draw(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * index as u128);
    rng.gen::<f64>()
}

/// Seed for trial `trial` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos(2 * trial as u128);
    rng.next_u64()
}

/// Pattern families for spanning-containment experiments, parameterized by n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TargetSpec {
    CyclePower { r: usize },
    TightCyclePower { k: usize, r: usize },
    DDegenerateRandom { d: usize, seed: u64 },
    LocallySparseRegular { d: usize },
    PerfectMatching { k: usize },
    CliqueFactor { d: usize },
}

impl TargetSpec {
    pub fn k(&self) -> usize {
        match *self {
            TargetSpec::TightCyclePower { k, .. } | TargetSpec::PerfectMatching { k } => k,
            _ => 2,
        }
    }

    pub fn pattern(&self, n: usize) -> Result<Hypergraph> {
        match *self {
            TargetSpec::CyclePower { r } => cycle_power(n, r),
            TargetSpec::TightCyclePower { k, r } => tight_cycle_power(n, k, r),
            TargetSpec::DDegenerateRandom { d, seed } => random_d_degenerate(n, d, seed),
            TargetSpec::LocallySparseRegular { d } => locally_sparse_regular(n, d),
            TargetSpec::PerfectMatching { k } => perfect_matching(n, k),
            TargetSpec::CliqueFactor { d } => clique_factor(n, d),
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::CyclePower { r } => write!(f, "cycle_power:r={r}"),
            TargetSpec::TightCyclePower { k, r } => write!(f, "tight_cycle_power:k={k},r={r}"),
            TargetSpec::DDegenerateRandom { d, seed } => write!(f, "d_degenerate_random:d={d},seed={seed}"),
            TargetSpec::LocallySparseRegular { d } => write!(f, "locally_sparse_regular:d={d}"),
            TargetSpec::PerfectMatching { k } => write!(f, "perfect_matching:k={k}"),
            TargetSpec::CliqueFactor { d } => write!(f, "clique_factor:d={d}"),
        }
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    /// `family` or `family:key=value,...`, e.g. `cycle_power:r=2`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, args) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',').filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::param(format!("target argument {part:?} is not key=value")))?;
            let val: u64 = val.parse().map_err(|_| Error::param(format!("target argument {part:?} is not an integer")))?;
            kv.insert(key.trim().to_string(), val);
        }
        let get = |key: &str, default: Option<u64>| -> Result<u64> {
            kv.get(key).copied().or(default).ok_or_else(|| Error::param(format!("target {family} needs {key}=...")))
        };
        let spec = match family {
            "cycle_power" => TargetSpec::CyclePower { r: get("r", None)? as usize },
            "tight_cycle_power" => TargetSpec::TightCyclePower { k: get("k", None)? as usize, r: get("r", None)? as usize },
            "d_degenerate_random" => TargetSpec::DDegenerateRandom { d: get("d", None)? as usize, seed: get("seed", Some(0))? },
            "locally_sparse_regular" => TargetSpec::LocallySparseRegular { d: get("d", None)? as usize },
            "perfect_matching" => TargetSpec::PerfectMatching { k: get("k", Some(2))? as usize },
            "clique_factor" => TargetSpec::CliqueFactor { d: get("d", None)? as usize },
            other => return Err(Error::param(format!("unknown target family {other:?}"))),
        };
        Ok(spec)
    }
}

/// `n/k` disjoint edges `{0..k-1}, {k..2k-1}, ...`.
pub fn perfect_matching(n: usize, k: usize) -> Result<Hypergraph> {
    if k < 2 || n % k != 0 {
        return Err(Error::param(format!("perfect matching needs k | n; n={n}, k={k}")));
    }
    Hypergraph::build(k, n, (0..n / k).map(|b| (b * k..(b + 1) * k).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// `n/d` disjoint copies of `K_d`.
pub fn clique_factor(n: usize, d: usize) -> Result<Hypergraph> {
    if d < 2 || n % d != 0 {
        return Err(Error::param(format!("clique factor needs d | n; n={n}, d={d}")));
    }
    let edges: BTreeSet<[usize; 2]> = (0..n / d)
        .flat_map(|b| k_subsets(d, 2).into_iter().map(move |e| [b * d + e[0], b * d + e[1]]))
        .collect();
    Hypergraph::build(2, n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::{aut_count, binomial, iso, VertexSet};
    use proptest::prelude::*;

    #[test]
    fn cycle_power_examples() {
        let c5 = cycle_power(5, 1).unwrap();
        assert_eq!(c5.edge_count(), 5);
        let c8 = cycle_power(8, 2).unwrap();
        assert_eq!(c8.edge_count(), 16);
        assert!(c8.degrees().iter().all(|&d| d == 4));
        // n = 2r+1 gives the complete graph
        assert_eq!(cycle_power(7, 3).unwrap(), Hypergraph::complete(2, 7).unwrap());
        assert!(cycle_power(6, 3).is_err());
        assert!(cycle_power(6, 0).is_err());
    }

    #[test]
    fn tight_cycle_power_examples() {
        let t = tight_cycle_power(6, 3, 1).unwrap();
        assert_eq!(t.edge_count(), 6);
        assert!(t.has_edge(&[0, 4, 5]) && t.has_edge(&[0, 1, 5]));
        assert_eq!(tight_cycle_power(8, 3, 2).unwrap().edge_count(), 8 * 3);
        assert!(tight_cycle_power(4, 3, 2).is_err());
        for (n, k, r) in [(9, 3, 2), (10, 4, 3), (11, 3, 3)] {
            let h = tight_cycle_power(n, k, r).unwrap();
            assert_eq!(h.edge_count() as u64, n as u64 * binomial((r + k - 2) as u64, (k - 1) as u64));
        }
    }

    #[test]
    fn tight_power_with_k2_is_cycle_power() {
        for n in 5..14 {
            for r in 1..=(n - 1) / 2 {
                assert_eq!(tight_cycle_power(n, 2, r).unwrap(), cycle_power(n, r).unwrap(), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn locally_sparse_regular_examples() {
        let g = locally_sparse_regular(8, 4).unwrap();
        for e in [[2, 4], [3, 5], [0, 6], [1, 7]] {
            assert!(g.has_edge(&e), "{e:?}");
        }
        assert_eq!(g.edge_count(), 2 * 6 + 4);
        assert!(g.degrees().iter().all(|&d| d == 4));

        let g = locally_sparse_regular(12, 3).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        // last vertex of clique i meets last vertex of clique i+2
        assert!(g.has_edge(&[2, 8]) && g.has_edge(&[5, 11]));
        for b in 0..4 {
            let clique = VertexSet::new((3 * b..3 * b + 3).collect());
            assert_eq!(g.edge_boundary(&clique).len(), 3);
        }

        assert!(locally_sparse_regular(10, 4).is_err());
        assert!(locally_sparse_regular(9, 3).is_err());
        assert!(locally_sparse_regular(8, 2).is_err());
        assert!(locally_sparse_regular(4, 4).is_err());
    }

    #[test]
    fn locally_sparse_regular_is_regular_up_to_48() {
        for d in 3..=8 {
            for n in (2 * d..=48).filter(|n| n % d == 0 && (d % 2 == 0 || n % (2 * d) == 0)) {
                let g = locally_sparse_regular(n, d).unwrap();
                assert!(g.degrees().iter().all(|&x| x == d), "n={n} d={d}: {:?}", g.degrees());
            }
        }
    }

    #[test]
    fn degenerate_examples() {
        assert_eq!(random_d_degenerate(9, 3, 17).unwrap(), random_d_degenerate(9, 3, 17).unwrap());
        for seed in 0..20 {
            let t = random_d_degenerate(5, 1, seed).unwrap();
            assert_eq!(t.edge_count(), 4);
            assert_eq!(t.components().len(), 1);
        }
        assert_eq!(random_d_degenerate(6, 2, 3).unwrap().edge_count(), 9);
        assert!(random_d_degenerate(3, 3, 0).is_err());
    }

    fn min_degree_elimination_bound(h: &Hypergraph) -> usize {
        let mut alive = vec![true; h.n()];
        let mut deg = h.degrees().to_vec();
        let mut worst = 0;
        for _ in 0..h.n() {
            let v = (0..h.n()).filter(|&v| alive[v]).min_by_key(|&v| deg[v]).unwrap();
            worst = worst.max(deg[v]);
            alive[v] = false;
            for &ei in h.incident(v) {
                for &u in h.edge(ei) {
                    if u != v && alive[u] {
                        deg[u] -= 1;
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn gnp_extremes() {
        assert_eq!(gnp(7, 3, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gnp(7, 3, 1.0, 1).unwrap().edge_count(), 35);
        assert!(gnp(5, 2, 1.5, 0).is_err());
    }

    #[test]
    fn gnp_edge_count_mean() {
        let counts: Vec<f64> = (0..200).map(|s| gnp(20, 2, 0.5, s).unwrap().edge_count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / 200.0;
        let sigma = (190.0f64 * 0.25).sqrt();
        // standard error of the mean over 200 samples
        assert!((mean - 95.0).abs() < 3.0 * sigma / (200f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn gnp_draws_are_keyed_by_index() {
        let h = gnp(9, 2, 0.37, 99).unwrap();
        for (i, e) in k_subsets(9, 2).iter().enumerate() {
            assert_eq!(h.has_edge(e), gnp_draw(99, i as u64) < 0.37);
        }
    }

    #[test]
    fn gnp_independent_streams_chi_square() {
        // 2x2 contingency of edge indicators under two seeds
        let mut table = [[0f64; 2]; 2];
        for s in 0..100u64 {
            let a = gnp(20, 2, 0.3, 2 * s).unwrap();
            let b = gnp(20, 2, 0.3, 2 * s + 1).unwrap();
            for e in k_subsets(20, 2) {
                table[a.has_edge(&e) as usize][b.has_edge(&e) as usize] += 1.0;
            }
        }
        let total: f64 = table.iter().flatten().sum();
        let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
        let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let mut chi2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let expect = rows[i] * cols[j] / total;
                chi2 += (table[i][j] - expect).powi(2) / expect;
            }
        }
        // 1 degree of freedom, 99.9% quantile
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn cycle_power_is_vertex_transitive() {
        for (n, r) in [(7, 2), (9, 2), (11, 3), (12, 2)] {
            assert!(aut_count(&cycle_power(n, r).unwrap()).unwrap() >= 2 * n as u128);
        }
    }

    #[test]
    fn target_spec_round_trip() {
        for s in ["cycle_power:r=2", "perfect_matching:k=2", "clique_factor:d=3", "tight_cycle_power:k=3,r=1"] {
            let t: TargetSpec = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert_eq!("perfect_matching".parse::<TargetSpec>().unwrap(), TargetSpec::PerfectMatching { k: 2 });
        assert!("cycle_power".parse::<TargetSpec>().is_err());
        assert!("bogus:r=1".parse::<TargetSpec>().is_err());
        let f = clique_factor(9, 3).unwrap();
        assert_eq!((f.edge_count(), f.components().len()), (9, 3));
        assert!(iso(&perfect_matching(6, 2).unwrap(), &clique_factor(6, 2).unwrap()).unwrap().is_isomorphic);
    }

    proptest! {
        #[test]
        fn degenerate_output_has_small_back_degree(n in 3usize..30, d in 1usize..5, seed in any::<u64>()) {
            prop_assume!(n > d);
            let h = random_d_degenerate(n, d, seed).unwrap();
            prop_assert!(min_degree_elimination_bound(&h) <= d);
            let expected: usize = (1..n).map(|i| i.min(d)).sum();
            prop_assert_eq!(h.edge_count(), expected);
        }
    }
}
