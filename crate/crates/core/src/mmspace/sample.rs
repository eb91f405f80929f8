use super::{check_eps, MmSpace};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Distances among `m` points drawn from a space. Sample slots get equal
/// weight `1/m` when the sample is used as a space itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrixSample {
    pub m: usize,
    /// Index in the source space of each slot.
    pub points: Vec<usize>,
    /// Row-major `m × m`.
    pub entries: Vec<f64>,
    pub source: String,
    pub seed: Option<u64>,
    /// Distances at this level are lower bounds (horizon-limited trees).
    pub censored_at: Option<f64>,
}

impl DistanceMatrixSample {
    /// The matrix of the listed points of `space`, in the order given.
    pub fn from_points<S: MmSpace + ?Sized>(space: &S, points: Vec<usize>, source: impl Into<String>) -> Self {
        let m = points.len();
        let mut entries = vec![0.0; m * m];
        for a in 0..m {
            for b in a + 1..m {
                let d = space.dist(points[a], points[b]);
                entries[a * m + b] = d;
                entries[b * m + a] = d;
            }
        }
        Self {
            m,
            points,
            entries,
            source: source.into(),
            seed: None,
            censored_at: space.censoring(),
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.m + b]
    }

    /// Plot-ready layout: one row `i,j,point_i,point_j,distance` per pair
    /// `i < j` of sample slots.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,point_i,point_j,distance\n");
        for a in 0..self.m {
            for b in a + 1..self.m {
                writeln!(out, "{a},{b},{},{},{}", self.points[a], self.points[b], self.get(a, b)).unwrap();
            }
        }
        out
    }
}

impl MmSpace for DistanceMatrixSample {
    fn len(&self) -> usize {
        self.m
    }

    fn mass(&self, _i: usize) -> f64 {
        1.0 / self.m as f64
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }

    fn censoring(&self) -> Option<f64> {
        self.censored_at
    }
}

/// `m` points drawn i.i.d. from the mass distribution of `space`.
pub fn sample_distance_matrix<S: MmSpace + ?Sized>(space: &S, m: usize, seed: u64) -> Result<DistanceMatrixSample> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("sample size {m} must be at least 2")));
    }
    let masses: Vec<f64> = (0..space.len()).map(|i| space.mass(i)).collect();
    let index = WeightedIndex::new(&masses).map_err(|e| Error::InvalidArgument(format!("point masses: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let points: Vec<usize> = (0..m).map(|_| index.sample(&mut rng)).collect();
    let mut sample = DistanceMatrixSample::from_points(space, points, "iid");
    sample.seed = Some(seed);
    Ok(sample)
}

/// `τ_δ`: slot 0 together with the slots `j` having `r_{0j} ≤ δ`, in order.
pub fn delta_restriction(sample: &DistanceMatrixSample, delta: f64) -> Result<DistanceMatrixSample> {
    check_eps(delta)?;
    if sample.m == 0 {
        return Err(Error::InvalidArgument("empty distance matrix".into()));
    }
    let keep: Vec<usize> = (0..sample.m).filter(|&j| j == 0 || sample.get(0, j) <= delta).collect();
    let k = keep.len();
    let mut entries = vec![0.0; k * k];
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            entries[a * k + b] = sample.get(i, j);
        }
    }
    Ok(DistanceMatrixSample {
        m: k,
        points: keep.iter().map(|&i| sample.points[i]).collect(),
        entries,
        source: format!("{} restricted to r(0, .) <= {delta}", sample.source),
        seed: sample.seed,
        censored_at: sample.censored_at,
    })
}
