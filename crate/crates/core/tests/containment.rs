use degenspread::structgen::{clique_factor, gnp, locally_sparse_regular, perfect_matching};
use degenspread::threshold::{containment_probability, contains_spanning_with, Outcome, Strategy, TrialSettings};
use degenspread::{Budget, Hypergraph};

fn agree(pattern: &Hypergraph, special: Strategy, instances: u64, seed0: u64) -> (u64, u64) {
    let mut contained = 0;
    for i in 0..instances {
        let p = 0.15 + 0.7 * (i as f64 / instances as f64);
        let host = gnp(pattern.n(), pattern.k(), p, seed0 + i).unwrap();
        let a = contains_spanning_with(&host, pattern, Strategy::Generic, Budget::default()).unwrap();
        let b = contains_spanning_with(&host, pattern, special, Budget::default()).unwrap();
        assert_eq!(a.outcome, b.outcome, "instance {i}, p = {p}");
        assert_ne!(a.outcome, Outcome::Timeout);
        contained += (a.outcome == Outcome::Contained) as u64;
    }
    (contained, instances)
}

#[test]
fn generic_search_agrees_with_matching() {
    for (n, seed) in [(8usize, 0u64), (10, 1000), (12, 2000)] {
        let (yes, total) = agree(&perfect_matching(n, 2).unwrap(), Strategy::Matching, 500 / 3 + 1, seed);
        assert!(yes > 0 && yes < total);
    }
}

#[test]
fn generic_search_agrees_with_exact_cover() {
    for (n, seed) in [(9usize, 5000u64), (12, 6000)] {
        let (yes, total) = agree(&clique_factor(n, 3).unwrap(), Strategy::ExactCover, 250, seed);
        assert!(yes > 0 && yes < total);
    }
    let (yes, _) = agree(&perfect_matching(9, 3).unwrap(), Strategy::ExactCover, 200, 7000);
    assert!(yes > 0);
}

#[test]
fn construction_contains_its_clique_factor() {
    for (n, d) in [(8usize, 4usize), (12, 4), (12, 3), (24, 3)] {
        let host = locally_sparse_regular(n, d).unwrap();
        let pattern = clique_factor(n, d).unwrap();
        for s in [Strategy::Auto, Strategy::ExactCover] {
            let c = contains_spanning_with(&host, &pattern, s, Budget::default()).unwrap();
            assert_eq!(c.outcome, Outcome::Contained, "({n},{d}) via {s:?}");
        }
    }
    let host = locally_sparse_regular(12, 3).unwrap();
    let c = contains_spanning_with(&host, &clique_factor(12, 3).unwrap(), Strategy::Generic, Budget::default()).unwrap();
    assert_eq!(c.outcome, Outcome::Contained);
}

#[test]
fn estimates_are_monotone_on_a_grid() {
    let settings = TrialSettings::default();
    for pattern in [perfect_matching(10, 2).unwrap(), clique_factor(9, 3).unwrap()] {
        let mut last: Option<(f64, f64)> = None;
        for step in 0..=10 {
            let p = step as f64 / 10.0;
            let (e, _) = containment_probability(&pattern, p, 400, 99, &settings).unwrap();
            if let Some((est, lo)) = last {
                assert!(e.estimate >= est, "coupled estimates drop at p = {p}");
                assert!(e.ci_lo >= lo);
            }
            last = Some((e.estimate, e.ci_lo));
        }
        assert_eq!(last.unwrap().0, 1.0);
    }
}
