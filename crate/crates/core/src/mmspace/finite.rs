use super::MmSpace;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite metric space given by its distance matrix, with a probability
/// vector of point masses. Distinct points at distance 0 are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMmSpace {
    m: usize,
    dist: Vec<f64>,
    masses: Vec<f64>,
}

const MASS_TOL: f64 = 1e-9;
const METRIC_TOL: f64 = 1e-12;

impl FiniteMmSpace {
    /// `dist` is row-major `m × m`.
    pub fn new(dist: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let m = masses.len();
        if m == 0 {
            return Err(Error::Validation("a metric measure space needs at least one point".into()));
        }
        if dist.len() != m * m {
            return Err(Error::Validation(format!("distance matrix has {} entries, expected {}", dist.len(), m * m)));
        }
        if masses.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation("masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Validation(format!("masses sum to {total}, not 1")));
        }
        for i in 0..m {
            if dist[i * m + i] != 0.0 {
                return Err(Error::Validation(format!("r({i},{i}) = {} is not 0", dist[i * m + i])));
            }
            for j in 0..m {
                let d = dist[i * m + j];
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::Validation(format!("r({i},{j}) = {d} is not a finite non-negative number")));
                }
                if d != dist[j * m + i] {
                    return Err(Error::Validation(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (a, b, c) = (dist[i * m + k], dist[i * m + j], dist[j * m + k]);
                    if a > b + c + METRIC_TOL * (1.0 + a) {
                        return Err(Error::Validation(format!(
                            "triangle inequality fails: r({i},{k}) > r({i},{j}) + r({j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(Self { m, dist, masses })
    }

    /// Equal masses `1/m`.
    pub fn uniform(dist: Vec<f64>) -> Result<Self> {
        let m = (dist.len() as f64).sqrt().round() as usize;
        Self::new(dist, vec![1.0 / m as f64; m])
    }

    pub fn from_fn(m: usize, masses: Vec<f64>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut dist = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    dist[i * m + j] = f(i.min(j), i.max(j));
                }
            }
        }
        Self::new(dist, masses)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }
}

impl MmSpace for FiniteMmSpace {
    fn len(&self) -> usize {
        self.m
    }

    fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.m + j]
    }
}
