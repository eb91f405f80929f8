//! Simulation of the n-coalescent.
//!
//! Two independent schemes produce a [`CoalescentHistory`]:
//!
//! * [`simulate_gillespie`] runs the block-counting Markov chain exactly:
//!   with `b` blocks it waits `Exp(γ_b)`, draws a merger size `k` with
//!   probability `C(b,k) λ_{b,k} / γ_b` and merges a uniform `k`-subset.
//! * [`simulate_poisson`] uses the Poisson construction: points `(t, x)` with
//!   intensity `dt ⊗ x⁻² Λ(dx)`, each alive block marked with probability `x`,
//!   marked blocks merged when there are at least two. Points with
//!   `x < x_min` are dropped and the expected number of mergers this misses
//!   is reported. An atom of Λ at 0 runs as a superposed Kingman component.
//!
//! Leaves carry block ids `0..n`; the `i`-th event creates block `n + i`.

mod gillespie;
mod history;
mod poisson;

pub use gillespie::{simulate_gillespie, simulate_gillespie_with, MergerKernel};
pub use history::{CoalescentHistory, MergeEvent, SimMetadata, StepFunction};
pub use poisson::{default_x_min, simulate_poisson, simulate_poisson_with, PoissonKernel, MISSED_MERGER_BUDGET};

use crate::error::{Error, Result};
use crate::measure::LambdaMeasure;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Gillespie,
    Poisson,
    /// Poisson when its cutoff loses nothing (Λ has no mass in `(0, x_min)`),
    /// Gillespie otherwise.
    Auto,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Gillespie => "gillespie",
            Scheme::Poisson => "poisson",
            Scheme::Auto => "auto",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gillespie" => Ok(Scheme::Gillespie),
            "poisson" => Ok(Scheme::Poisson),
            "auto" => Ok(Scheme::Auto),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected gillespie, poisson or auto)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// `None` runs until a single block remains.
    pub horizon: Option<f64>,
    pub seed: u64,
    pub scheme: Scheme,
    /// Poisson cutoff; `None` picks [`default_x_min`].
    pub x_min: Option<f64>,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            horizon: None,
            seed,
            scheme: Scheme::Gillespie,
            x_min: None,
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_x_min(mut self, x_min: f64) -> Self {
        self.x_min = Some(x_min);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("n must be at least 1".into()));
        }
        if let Some(h) = self.horizon {
            if !(h >= 0.0) || h.is_nan() {
                return Err(Error::Validation(format!("horizon {h} must be non-negative")));
            }
        }
        if let Some(x) = self.x_min {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Validation(format!("x_min {x} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Horizon with `None` mapped to infinity.
    pub fn horizon_value(&self) -> f64 {
        self.horizon.unwrap_or(f64::INFINITY)
    }
}

/// Simulate with the scheme named in `cfg`, resolving `Auto` and Poisson
/// fallbacks.
pub fn simulate(measure: &LambdaMeasure, cfg: &SimConfig) -> Result<CoalescentHistory> {
    Simulator::new(measure, cfg)?.run(cfg.seed)
}

#[derive(Debug)]
enum Engine {
    Gillespie(MergerKernel),
    Poisson(PoissonKernel),
}

/// A scheme resolved and its kernel built once, for running many seeds
/// with the same measure, `n` and horizon. `cfg.seed` is ignored here.
#[derive(Debug)]
pub struct Simulator {
    cfg: SimConfig,
    engine: Engine,
    notes: Vec<String>,
}

impl Simulator {
    pub fn new(measure: &LambdaMeasure, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let gillespie = |notes: Vec<String>| Self {
            cfg: cfg.clone(),
            engine: Engine::Gillespie(MergerKernel::new(measure, cfg.n)),
            notes,
        };
        let poisson = |kernel| Self {
            cfg: cfg.clone(),
            engine: Engine::Poisson(kernel),
            notes: Vec::new(),
        };
        match cfg.scheme {
            Scheme::Gillespie => Ok(gillespie(Vec::new())),
            Scheme::Poisson => match poisson::prepare(measure, cfg)? {
                Ok(kernel) => Ok(poisson(kernel)),
                Err(reason) => Ok(gillespie(vec![format!("fell back to the exact scheme: {reason}")])),
            },
            Scheme::Auto => {
                if cfg.x_min.is_none() && poisson::lossless_cutoff(measure).is_some() {
                    if let Ok(kernel) = poisson::prepare(measure, cfg)? {
                        return Ok(poisson(kernel));
                    }
                }
                Ok(gillespie(Vec::new()))
            }
        }
    }

    /// The scheme that actually runs.
    pub fn scheme(&self) -> Scheme {
        match self.engine {
            Engine::Gillespie(_) => Scheme::Gillespie,
            Engine::Poisson(_) => Scheme::Poisson,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn run(&self, seed: u64) -> Result<CoalescentHistory> {
        let cfg = SimConfig { seed, ..self.cfg.clone() };
        let mut h = match &self.engine {
            Engine::Gillespie(k) => simulate_gillespie_with(k, &cfg)?,
            Engine::Poisson(k) => simulate_poisson_with(k, &cfg)?,
        };
        h.metadata.requested_scheme = self.cfg.scheme;
        h.metadata.notes.extend(self.notes.iter().cloned());
        Ok(h)
    }
}
