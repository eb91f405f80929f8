use super::history::{CoalescentHistory, MergeEvent, SimMetadata};
use super::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::measure::LambdaMeasure;
use crate::rng::{rng_from_seed, SimRng};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::sync::OnceLock;

/// Cumulative merger-size weights `Σ_{j ≤ k} C(b,j) λ_{b,j}`, built lazily
/// per block count and shareable across threads.
#[derive(Debug)]
pub struct MergerKernel {
    measure: LambdaMeasure,
    rows: Vec<OnceLock<Vec<f64>>>,
}

impl MergerKernel {
    pub fn new(measure: &LambdaMeasure, n: usize) -> Self {
        Self {
            measure: measure.clone(),
            rows: (0..=n.max(2)).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    /// Entry `k - 2` holds the cumulative weight up to merger size `k`.
    pub fn cumulative(&self, b: usize) -> &[f64] {
        self.rows[b].get_or_init(|| {
            let w = self.measure.merger_weights(b);
            let mut acc = 0.0;
            w[2..]
                .iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect()
        })
    }

    /// `γ_b`.
    pub fn total_rate(&self, b: usize) -> f64 {
        *self.cumulative(b).last().expect("b >= 2")
    }

    fn sample_size(&self, b: usize, rng: &mut SimRng) -> usize {
        let cum = self.cumulative(b);
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        2 + cum.partition_point(|&c| c <= u).min(cum.len() - 1)
    }
}

pub fn simulate_gillespie(measure: &LambdaMeasure, cfg: &SimConfig) -> Result<CoalescentHistory> {
    cfg.validate()?;
    let kernel = MergerKernel::new(measure, cfg.n);
    simulate_gillespie_with(&kernel, cfg)
}

/// Gillespie run reusing a kernel built for at least `cfg.n` lines.
pub fn simulate_gillespie_with(kernel: &MergerKernel, cfg: &SimConfig) -> Result<CoalescentHistory> {
    cfg.validate()?;
    if kernel.n() < cfg.n {
        return Err(Error::InvalidArgument(format!(
            "kernel built for {} lines, simulation needs {}",
            kernel.n(),
            cfg.n
        )));
    }
    let alive: Vec<usize> = (0..cfg.n).collect();
    run(kernel, cfg, alive)
}

pub(crate) fn run(kernel: &MergerKernel, cfg: &SimConfig, mut alive: Vec<usize>) -> Result<CoalescentHistory> {
    let horizon = cfg.horizon_value();
    let mut rng = rng_from_seed(cfg.seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    let mut next_id = cfg.n;
    while alive.len() >= 2 {
        let b = alive.len();
        let rate = kernel.total_rate(b);
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::ZeroMeasure);
        }
        let wait: f64 = Exp1.sample(&mut rng);
        t += wait / rate;
        if t > horizon {
            break;
        }
        let k = kernel.sample_size(b, &mut rng);
        for i in 0..k {
            let j = rng.random_range(0..b - i);
            alive.swap(j, b - 1 - i);
        }
        let mut merged = alive.split_off(b - k);
        merged.sort_unstable();
        alive.push(next_id);
        events.push(MergeEvent {
            time: t,
            merged,
            new_block: next_id,
        });
        next_id += 1;
    }
    Ok(CoalescentHistory {
        n: cfg.n,
        seed: cfg.seed,
        scheme: Scheme::Gillespie,
        horizon: cfg.horizon,
        events,
        metadata: SimMetadata::exact(cfg.scheme),
    }
    .finish())
}
