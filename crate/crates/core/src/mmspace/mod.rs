//! Finite metric measure spaces and their functionals.
//!
//! Conventions, fixed throughout: balls are closed (`r ≤ ε`); an
//! `ε`-separated set needs pairwise distances strictly greater than `ε`.
//! Only points of positive mass belong to the support.
//!
//! [`UltrametricSpace`] is the tree `H^n(Π)` of a simulated history: leaf
//! distances are coalescence times, and functionals reduce to the partition
//! `Π_ε`. [`FiniteMmSpace`] is a general distance matrix with masses.

mod finite;
mod sample;
mod search;
mod ultrametric;

pub use finite::FiniteMmSpace;
pub use sample::{delta_restriction, sample_distance_matrix, DistanceMatrixSample};
pub use search::{
    covering_number, covering_number_with_budget, xi_epsilon, xi_epsilon_with_budget, SearchBudget, DEFAULT_NODE_BUDGET,
};
pub use ultrametric::{tree_from_history, UltrametricSpace};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Slack in comparisons of a ball mass against `δ`, absorbing rounding in
/// sums of point masses.
pub const MASS_TOLERANCE: f64 = 1e-12;

pub trait MmSpace {
    fn len(&self) -> usize;
    fn mass(&self, i: usize) -> f64;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distances at or above this level are only lower bounds.
    fn censoring(&self) -> Option<f64> {
        None
    }

    /// Whether functionals may treat censored distances as lower bounds
    /// instead of refusing.
    fn allows_censored(&self) -> bool {
        false
    }

    /// Indices of points with positive mass.
    fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mass(i) > 0.0).collect()
    }

    /// `true` when `r ≤ ε` is an equivalence relation on the support.
    fn is_ultrametric(&self) -> bool {
        let s = self.support();
        for (a, &i) in s.iter().enumerate() {
            for (b, &j) in s.iter().enumerate().skip(a + 1) {
                for &k in &s[b + 1..] {
                    let (x, y, z) = (self.dist(i, j), self.dist(j, k), self.dist(i, k));
                    if x > y.max(z) || y > x.max(z) || z > x.max(y) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Result of a search that may stop at its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Count {
    Exact { value: usize },
    Bounds { lower: usize, upper: usize },
}

impl Count {
    pub fn exact(&self) -> Option<usize> {
        match *self {
            Count::Exact { value } => Some(value),
            Count::Bounds { .. } => None,
        }
    }

    pub fn lower(&self) -> usize {
        match *self {
            Count::Exact { value } => value,
            Count::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> usize {
        match *self {
            Count::Exact { value } => value,
            Count::Bounds { upper, .. } => upper,
        }
    }
}

pub(crate) fn check_scale<S: MmSpace + ?Sized>(space: &S, scale: f64, context: &str) -> Result<()> {
    if let Some(h) = space.censoring() {
        if scale >= h && !space.allows_censored() {
            return Err(Error::Censored {
                horizon: h,
                context: format!("{context} at scale {scale}"),
            });
        }
    }
    Ok(())
}

/// The distance distribution `w = r_*(μ ⊗ μ)` as `(distance, mass)` pairs
/// in increasing distance, equal distances merged.
pub fn distance_distribution<S: MmSpace + ?Sized>(space: &S) -> Result<Vec<(f64, f64)>> {
    let s = space.support();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(s.len() * s.len());
    for &i in &s {
        for &j in &s {
            pairs.push((space.dist(i, j), space.mass(i) * space.mass(j)));
        }
    }
    if let Some(&(d, _)) = pairs.iter().max_by(|a, b| a.0.total_cmp(&b.0)) {
        check_scale(space, d, "distance distribution")?;
    }
    Ok(merge_atoms(pairs))
}

pub(crate) fn merge_atoms(mut pairs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (d, m) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == d => last.1 += m,
            _ => out.push((d, m)),
        }
    }
    out
}

/// `μ(B_ε(x_i))` for the closed ball.
pub fn ball_mass<S: MmSpace + ?Sized>(space: &S, i: usize, eps: f64) -> Result<f64> {
    check_scale(space, eps, "ball mass")?;
    Ok((0..space.len())
        .filter(|&j| space.dist(i, j) <= eps)
        .map(|j| space.mass(j))
        .sum())
}

/// Per support point, the smallest `ε` at which its closed ball has mass
/// greater than `δ` (`∞` if never). The point is thin exactly for smaller
/// `ε`.
pub fn thin_thresholds<S: MmSpace + ?Sized>(space: &S, delta: f64) -> Vec<(f64, f64)> {
    let s = space.support();
    s.iter()
        .map(|&i| {
            let mut by_dist: Vec<(f64, f64)> = s.iter().map(|&j| (space.dist(i, j), space.mass(j))).collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            let mut threshold = f64::INFINITY;
            let mut k = 0;
            while k < by_dist.len() {
                let d = by_dist[k].0;
                while k < by_dist.len() && by_dist[k].0 == d {
                    acc += by_dist[k].1;
                    k += 1;
                }
                if acc > delta + MASS_TOLERANCE {
                    threshold = d;
                    break;
                }
            }
            if let Some(h) = space.censoring() {
                if threshold >= h {
                    threshold = f64::INFINITY;
                }
            }
            (threshold, space.mass(i))
        })
        .collect()
}

/// `μ{x : μ(B_ε(x)) ≤ δ}`.
pub fn thin_mass<S: MmSpace + ?Sized>(space: &S, eps: f64, delta: f64) -> Result<f64> {
    check_scale(space, eps, "thin mass")?;
    Ok(thin_thresholds(space, delta)
        .iter()
        .filter(|(t, _)| *t > eps)
        .map(|(_, m)| m)
        .sum())
}

/// `(v_δ, ṽ_δ)` from per-point thin thresholds, exactly: the thin mass
/// `F(ε)` is a right-continuous step function jumping down at the
/// thresholds.
pub(crate) fn moduli_from_thresholds(mut thresholds: Vec<(f64, f64)>) -> (f64, f64) {
    thresholds.retain(|&(_, m)| m > 0.0);
    thresholds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let v_tilde = thresholds.last().map_or(0.0, |t| t.0);
    let mut remaining: f64 = thresholds.iter().map(|t| t.1).sum();
    let mut start = 0.0;
    let mut k = 0;
    let v = loop {
        while k < thresholds.len() && thresholds[k].0 <= start {
            remaining -= thresholds[k].1;
            k += 1;
        }
        let remaining_clamped = if k == thresholds.len() { 0.0 } else { remaining.max(0.0) };
        let end = if k < thresholds.len() { thresholds[k].0 } else { f64::INFINITY };
        let candidate = start.max(remaining_clamped);
        if candidate < end || end.is_infinite() {
            break candidate;
        }
        start = end;
    };
    (v, v_tilde)
}

fn check_modulus<S: MmSpace + ?Sized>(space: &S, value: f64, name: &str) -> Result<f64> {
    if let Some(h) = space.censoring() {
        if value >= h && !space.allows_censored() {
            return Err(Error::Censored {
                horizon: h,
                context: format!("{name} not resolved below the horizon"),
            });
        }
    }
    Ok(value)
}

/// `v_δ = inf{ε > 0 : μ{x : μ(B_ε(x)) ≤ δ} ≤ ε}`.
pub fn v_delta<S: MmSpace + ?Sized>(space: &S, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_modulus(space, moduli_from_thresholds(thin_thresholds(space, delta)).0, "v_delta")
}

/// `ṽ_δ = inf{ε > 0 : μ{x : μ(B_ε(x)) ≤ δ} = 0}`; infinite when `δ ≥ 1`.
pub fn v_tilde_delta<S: MmSpace + ?Sized>(space: &S, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_modulus(space, moduli_from_thresholds(thin_thresholds(space, delta)).1, "v_tilde_delta")
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta {delta} must be positive")))
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon {eps} must be positive")))
    }
}

/// Largest distance between support points.
pub fn diameter<S: MmSpace + ?Sized>(space: &S) -> f64 {
    let s = space.support();
    let mut d: f64 = 0.0;
    for &i in &s {
        for &j in &s {
            d = d.max(space.dist(i, j));
        }
    }
    d
}

#[cfg(test)]
mod tests;
