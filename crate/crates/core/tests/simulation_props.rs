use coalescent_core::sim::{simulate, CoalescentHistory, Scheme, SimConfig};
use coalescent_core::parse_measure;
use proptest::prelude::*;

const SPECS: [&str; 7] = [
    "kingman",
    "bolthausen-sznitman",
    "beta:0.5,1.5",
    "beta:1.5,0.5",
    "uniform:0.25,1",
    "atom:0,0.5+uniform:0.3,1",
    "atom:0.6,1",
];

fn run(spec: &str, n: usize, seed: u64, scheme: Scheme, horizon: Option<f64>) -> CoalescentHistory {
    let mut cfg = SimConfig::new(n, seed).with_scheme(scheme);
    cfg.horizon = horizon;
    simulate(&parse_measure(spec).unwrap(), &cfg).unwrap()
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Gillespie), Just(Scheme::Poisson), Just(Scheme::Auto)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn histories_are_valid_partitions(i in 0usize..SPECS.len(), n in 1usize..60, seed: u64, s in scheme()) {
        let h = run(SPECS[i], n, seed, s, None);
        h.validate().unwrap();
        prop_assert_eq!(h.final_block_count(), 1);
        let mut leaves: Vec<usize> = h.partition_at(f64::INFINITY).concat();
        leaves.sort_unstable();
        prop_assert_eq!(leaves, (0..n).collect::<Vec<_>>());
        let traj = h.block_count_trajectory();
        prop_assert!(traj.values.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(h.events.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn block_frequencies_sum_to_one(i in 0usize..SPECS.len(), n in 1usize..40, seed: u64, t in 0.0f64..3.0) {
        let h = run(SPECS[i], n, seed, Scheme::Gillespie, None);
        let f = h.block_frequencies(t);
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(f.len(), h.block_count_trajectory().at(t));
        prop_assert_eq!(h.partition_at(t).len(), f.len());
    }

    #[test]
    fn horizon_truncates_the_same_path(i in 0usize..SPECS.len(), n in 2usize..40, seed: u64, horizon in 0.01f64..2.0) {
        let full = run(SPECS[i], n, seed, Scheme::Gillespie, None);
        let cut = run(SPECS[i], n, seed, Scheme::Gillespie, Some(horizon));
        cut.validate().unwrap();
        let kept = full.events_until(horizon);
        prop_assert_eq!(&cut.events[..], &full.events[..kept]);
    }

    #[test]
    fn same_seed_same_history(i in 0usize..SPECS.len(), n in 1usize..40, seed: u64, s in scheme()) {
        let a = run(SPECS[i], n, seed, s, None);
        let b = run(SPECS[i], n, seed, s, None);
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn json_round_trip(i in 0usize..SPECS.len(), n in 1usize..30, seed: u64) {
        let h = run(SPECS[i], n, seed, Scheme::Gillespie, Some(0.7));
        let back = CoalescentHistory::from_json(&h.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, h);
    }
}

/// Kingman absorption time from `n` lines has mean `2(1 - 1/n)`.
#[test]
fn kingman_absorption_mean() {
    let n = 30;
    let reps = 6000;
    let times: Vec<f64> =
        (0..reps).map(|r| run("kingman", n, 1000 + r, Scheme::Gillespie, None).absorption_time().unwrap()).collect();
    let mean = times.iter().sum::<f64>() / reps as f64;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let want = 2.0 * (1.0 - 1.0 / n as f64);
    assert!((mean - want).abs() < 4.0 * (var / reps as f64).sqrt(), "{mean} vs {want}");
}

/// With Λ = δ_1 every merger is total: the first event takes all `n` blocks
/// after an Exp(1) wait.
#[test]
fn star_coalescent_merges_everything_at_once() {
    let spec = "atom:0.999999,1";
    for seed in 0..50 {
        let h = run(spec, 12, seed, Scheme::Gillespie, None);
        assert!(h.events.len() <= 2, "{:?}", h.events.len());
        assert!(h.events[0].merged.len() >= 11);
    }
}

#[test]
fn both_schemes_agree_on_mean_block_count() {
    let spec = "beta:1.5,0.5";
    let reps = 3000;
    let t = 0.3;
    let mean = |s: Scheme| {
        (0..reps).map(|r| run(spec, 20, r, s, None).block_count_trajectory().at(t) as f64).sum::<f64>() / reps as f64
    };
    let (g, p) = (mean(Scheme::Gillespie), mean(Scheme::Poisson));
    assert!((g - p).abs() < 0.25, "gillespie {g} poisson {p}");
}
