use super::*;
use crate::measure::LambdaMeasure;
use crate::rng::{replicate_seed, rng_from_seed};
use crate::sim::{simulate, CoalescentHistory, MergeEvent, Scheme, SimConfig, SimMetadata};
use rand::Rng;

fn two_points() -> FiniteMmSpace {
    FiniteMmSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap()
}

fn equilateral() -> FiniteMmSpace {
    FiniteMmSpace::from_fn(3, vec![1.0 / 3.0; 3], |_, _| 1.0).unwrap()
}

fn point() -> FiniteMmSpace {
    FiniteMmSpace::new(vec![0.0], vec![1.0]).unwrap()
}

fn history(n: usize, events: Vec<(f64, Vec<usize>)>, horizon: Option<f64>) -> CoalescentHistory {
    CoalescentHistory {
        n,
        seed: 0,
        scheme: Scheme::Gillespie,
        horizon,
        events: events
            .into_iter()
            .enumerate()
            .map(|(i, (time, merged))| MergeEvent { time, merged, new_block: n + i })
            .collect(),
        metadata: SimMetadata {
            requested_scheme: Scheme::Gillespie,
            x_min: None,
            missed_merger_bound: 0.0,
            kingman_superposition: false,
            poisson_points: 0,
            kingman_events: 0,
            tied_event_times: 0,
            notes: vec![],
        },
    }
}

/// Random finite metric: shortest paths over random positive edge weights.
fn random_space(seed: u64) -> FiniteMmSpace {
    let mut rng = rng_from_seed(seed);
    let m = rng.random_range(1..=10);
    let mut d = vec![f64::INFINITY; m * m];
    for i in 0..m {
        d[i * m + i] = 0.0;
        for j in i + 1..m {
            // Coarse values so that ties occur.
            let w = rng.random_range(0..6) as f64 * 0.25;
            d[i * m + j] = w;
            d[j * m + i] = w;
        }
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let via = d[i * m + k] + d[k * m + j];
                if via < d[i * m + j] {
                    d[i * m + j] = via;
                }
            }
        }
    }
    let mut masses: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() + 0.01 }).collect();
    if masses.iter().all(|&x| x == 0.0) {
        masses[0] = 1.0;
    }
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|x| *x /= total);
    FiniteMmSpace::new(d, masses).unwrap()
}

fn brute_xi(space: &FiniteMmSpace, eps: f64) -> usize {
    let s = space.support();
    let mut best = 0;
    for mask in 1u32..(1 << s.len()) {
        let pts: Vec<usize> = (0..s.len()).filter(|&i| mask >> i & 1 == 1).map(|i| s[i]).collect();
        let ok = pts.iter().enumerate().all(|(a, &i)| pts[a + 1..].iter().all(|&j| space.dist(i, j) > eps));
        if ok {
            best = best.max(pts.len());
        }
    }
    best
}

fn brute_cover(space: &FiniteMmSpace, eps: f64) -> usize {
    let s = space.support();
    let mut best = usize::MAX;
    for mask in 1u32..(1 << s.len()) {
        let centres: Vec<usize> = (0..s.len()).filter(|&i| mask >> i & 1 == 1).map(|i| s[i]).collect();
        if s.iter().all(|&x| centres.iter().any(|&c| space.dist(c, x) <= eps)) {
            best = best.min(centres.len());
        }
    }
    best
}

#[test]
fn distance_distribution_examples() {
    assert_eq!(distance_distribution(&point()).unwrap(), vec![(0.0, 1.0)]);
    assert_eq!(distance_distribution(&two_points()).unwrap(), vec![(0.0, 0.5), (1.0, 0.5)]);
    let w = distance_distribution(&equilateral()).unwrap();
    assert!((w[0].1 - 1.0 / 3.0).abs() < 1e-15 && (w[1].1 - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn ball_mass_examples() {
    assert_eq!(ball_mass(&two_points(), 0, 0.5).unwrap(), 0.5);
    assert_eq!(ball_mass(&two_points(), 0, 1.0).unwrap(), 1.0);
    assert_eq!(ball_mass(&equilateral(), 2, 7.0).unwrap(), 1.0);
}

#[test]
fn moduli_examples() {
    assert_eq!(v_delta(&point(), 0.5).unwrap(), 0.0);
    assert_eq!(v_tilde_delta(&point(), 0.5).unwrap(), 0.0);
    assert_eq!(v_tilde_delta(&two_points(), 0.6).unwrap(), 1.0);
    assert_eq!(v_tilde_delta(&two_points(), 0.4).unwrap(), 0.0);
    // Thin mass is 1 below ε = 1, so F(ε) ≤ ε first holds at ε = 1.
    assert_eq!(v_delta(&two_points(), 0.6).unwrap(), 1.0);
    assert_eq!(v_tilde_delta(&two_points(), 1.0).unwrap(), f64::INFINITY);
    assert!(v_delta(&two_points(), 0.0).is_err());
}

#[test]
fn v_delta_uses_mass_level() {
    // One heavy point far from a light one: F(ε) = 0.1 for ε < 2.
    let s = FiniteMmSpace::new(vec![0.0, 2.0, 2.0, 0.0], vec![0.9, 0.1]).unwrap();
    assert!((v_delta(&s, 0.5).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(v_tilde_delta(&s, 0.5).unwrap(), 2.0);
}

#[test]
fn xi_examples() {
    for eps in [0.1, 1.0, 5.0] {
        assert_eq!(xi_epsilon(&point(), eps).unwrap(), Count::Exact { value: 1 });
    }
    assert_eq!(xi_epsilon(&equilateral(), 0.5).unwrap().exact(), Some(3));
    assert_eq!(xi_epsilon(&equilateral(), 1.0).unwrap().exact(), Some(1));
    assert!(xi_epsilon(&equilateral(), 0.0).is_err());
}

#[test]
fn searches_match_brute_force_on_random_spaces() {
    for seed in 0..300 {
        let s = random_space(seed);
        for eps in [0.1, 0.25, 0.4, 0.5, 0.75, 1.0, 1.3] {
            let xi = xi_epsilon(&s, eps).unwrap().exact().unwrap();
            assert_eq!(xi, brute_xi(&s, eps), "seed {seed} eps {eps}");
            let cover = covering_number(&s, eps).unwrap().exact().unwrap();
            assert_eq!(cover, brute_cover(&s, eps), "seed {seed} eps {eps}");
            let half = covering_number(&s, eps / 2.0).unwrap().exact().unwrap();
            assert!(cover <= xi && xi <= half, "seed {seed} eps {eps}: {cover} {xi} {half}");
        }
    }
}

#[test]
fn budget_exhaustion_reports_bounds() {
    // Points on a line at spacing 1: a path-like conflict graph.
    let m = 60;
    let s = FiniteMmSpace::from_fn(m, vec![1.0 / m as f64; m], |i, j| (j - i) as f64 + 0.001 * ((i * 7 + j * 3) % 5) as f64).ok();
    let s = s.unwrap_or_else(|| FiniteMmSpace::from_fn(m, vec![1.0 / m as f64; m], |i, j| (j - i) as f64).unwrap());
    let c = search::xi_epsilon_with_budget(&s, 1.5, SearchBudget { nodes: 3 }).unwrap();
    match c {
        Count::Bounds { lower, upper } => assert!(lower <= 30 && 30 <= upper),
        Count::Exact { value } => assert_eq!(value, 30),
    }
    assert_eq!(xi_epsilon(&s, 1.5).unwrap().exact(), Some(30));
}

#[test]
fn tree_examples() {
    let t = tree_from_history(&history(2, vec![(0.7, vec![0, 1])], None));
    assert_eq!(t.dist(0, 1), 0.7);
    let t = tree_from_history(&history(3, vec![(0.3, vec![0, 1]), (0.9, vec![2, 3])], None));
    assert_eq!((t.dist(0, 1), t.dist(0, 2), t.dist(1, 2)), (0.3, 0.9, 0.9));
    assert_eq!(t.dist(2, 2), 0.0);
    assert_eq!(t.xi(0.5).unwrap(), 2);
    assert_eq!(t.xi(0.3).unwrap(), 2);
    assert_eq!(t.xi(0.2).unwrap(), 3);
    assert_eq!(t.xi(0.9).unwrap(), 1);
    t.require_complete().unwrap();
}

#[test]
fn censored_tree_refuses_large_scales() {
    let h = history(3, vec![(0.3, vec![0, 1])], Some(1.0));
    let t = tree_from_history(&h);
    assert!(t.require_complete().is_err());
    assert_eq!(t.dist(0, 2), 1.0);
    assert_eq!(t.xi(0.5).unwrap(), 2);
    assert!(matches!(t.xi(1.0), Err(crate::Error::Censored { .. })));
    assert!(t.v_tilde_delta(0.5).is_err());
    assert!(t.distance_distribution().is_err());
    let t = t.allow_censored();
    assert_eq!(t.xi(1.0).unwrap(), 2);
    assert_eq!(t.v_tilde_delta(0.5).unwrap(), f64::INFINITY);
    let w = t.distance_distribution().unwrap();
    assert_eq!(w.last().unwrap().0, 1.0);
}

fn simulated_trees(count: u64) -> Vec<UltrametricSpace> {
    let measures = ["kingman", "bolthausen-sznitman", "beta:1.5,0.5", "atom:0.5,1", "0.5*atom:0,1 + 0.5*uniform:0,1"];
    (0..count)
        .map(|r| {
            let m: LambdaMeasure = measures[(r % 5) as usize].parse().unwrap();
            let n = 2 + (r % 17) as usize;
            let cfg = SimConfig::new(n, replicate_seed(99, r));
            let h = simulate(&m, &cfg).unwrap();
            let t = tree_from_history(&h);
            if r % 3 == 0 {
                t.with_uniform_prefix(1 + (r as usize % n)).unwrap()
            } else {
                t
            }
        })
        .collect()
}

#[test]
fn tree_functionals_agree_with_generic_ones() {
    for (r, t) in simulated_trees(200).into_iter().enumerate() {
        let n = t.leaf_count();
        let dm = t.distance_matrix();
        let fin = FiniteMmSpace::new(dm.clone(), t.leaf_masses().to_vec()).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(t.dist(i, j), dm[i * n + j]);
                for k in 0..n {
                    assert!(t.dist(i, k) <= t.dist(i, j).max(t.dist(j, k)));
                }
            }
        }
        assert!(fin.is_ultrametric());
        let w1 = t.distance_distribution().unwrap();
        let w2 = distance_distribution(&fin).unwrap();
        assert_eq!(w1.len(), w2.len(), "replicate {r}");
        for (a, b) in w1.iter().zip(&w2) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12);
        }
        let mut scales: Vec<f64> = dm.iter().copied().filter(|&d| d > 0.0).collect();
        scales.extend(scales.clone().iter().map(|d| d * 0.999));
        scales.push(1e-9);
        for &eps in &scales {
            assert_eq!(Some(t.xi(eps).unwrap()), xi_epsilon(&fin, eps).unwrap().exact());
            let balls = t.ball_masses(eps).unwrap();
            for (i, b) in balls.iter().enumerate() {
                assert!((b - ball_mass(&fin, i, eps).unwrap()).abs() < 1e-12);
            }
        }
        for delta in [0.01, 0.1, 0.3, 0.5, 0.9, 1.0] {
            assert!((t.v_delta(delta).unwrap() - v_delta(&fin, delta).unwrap()).abs() < 1e-12);
            assert_eq!(t.v_tilde_delta(delta).unwrap(), v_tilde_delta(&fin, delta).unwrap());
        }
    }
}

#[test]
fn ball_masses_are_block_frequencies() {
    for r in 0..50 {
        let m = LambdaMeasure::bolthausen_sznitman();
        let h = simulate(&m, &SimConfig::new(30, r)).unwrap();
        let t = tree_from_history(&h);
        for e in &h.events {
            for eps in [e.time, e.time * 0.999] {
                let freqs = h.block_frequencies(eps);
                let labels = h.leaf_labels_at(eps);
                let balls = t.ball_masses(eps).unwrap();
                for i in 0..30 {
                    assert!((balls[i] - freqs[labels[i]]).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn sampling_examples() {
    let s = sample_distance_matrix(&point(), 5, 1).unwrap();
    assert!(s.entries.iter().all(|&d| d == 0.0));
    let mut ones = 0;
    let reps = 20_000;
    for r in 0..reps {
        let s = sample_distance_matrix(&two_points(), 2, r).unwrap();
        assert!(s.get(0, 1) == 0.0 || s.get(0, 1) == 1.0);
        ones += (s.get(0, 1) == 1.0) as usize;
    }
    let f = ones as f64 / reps as f64;
    assert!((f - 0.5).abs() < 4.0 * (0.25 / reps as f64).sqrt());
    assert!(sample_distance_matrix(&point(), 1, 1).is_err());
    let again = sample_distance_matrix(&equilateral(), 6, 3).unwrap();
    assert_eq!(again, sample_distance_matrix(&equilateral(), 6, 3).unwrap());
}

#[test]
fn delta_restriction_examples() {
    let d = [[0.0, 0.1, 0.9, 0.2], [0.1, 0.0, 0.9, 0.2], [0.9, 0.9, 0.0, 0.9], [0.2, 0.2, 0.9, 0.0]];
    let space = FiniteMmSpace::from_fn(4, vec![0.25; 4], |i, j| d[i][j]).unwrap();
    let sample = DistanceMatrixSample::from_points(&space, vec![0, 1, 2, 3], "fixed");
    let r = delta_restriction(&sample, 0.5).unwrap();
    assert_eq!(r.points, vec![0, 1, 3]);
    assert_eq!(r.get(1, 2), 0.2);
    assert_eq!(delta_restriction(&sample, 1.0).unwrap().entries, sample.entries);
    let r = delta_restriction(&sample, 0.05).unwrap();
    assert_eq!((r.m, r.points.clone()), (1, vec![0]));
    assert_eq!(xi_epsilon(&r, 0.01).unwrap().exact(), Some(1));
    assert!(sample.to_csv().starts_with("i,j,point_i,point_j,distance\n0,1,0,1,0.1\n"));
}

#[test]
fn thin_mass_monotone() {
    for t in simulated_trees(60) {
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let eps = 0.05 * k as f64;
            let f = t.thin_mass(eps, 0.2).unwrap();
            assert!(f <= last + 1e-15);
            last = f;
        }
    }
}
