use super::{check_eps, MASS_TOLERANCE, check_scale, merge_atoms, moduli_from_thresholds, MmSpace};
use crate::error::{Error, Result};
use crate::sim::CoalescentHistory;
use serde::{Deserialize, Serialize};

const ROOT: usize = usize::MAX;

/// The coalescent tree of a history: leaves `0..n`, internal node `n + i`
/// created by event `i` at its time. `r(i, j)` is the height of the lowest
/// common ancestor. In a horizon-limited history, leaves never joined are
/// placed at distance `horizon`, which is then only a lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltrametricSpace {
    n: usize,
    parent: Vec<usize>,
    height: Vec<f64>,
    masses: Vec<f64>,
    censor_level: Option<f64>,
    allow_censored: bool,
}

pub fn tree_from_history(history: &CoalescentHistory) -> UltrametricSpace {
    UltrametricSpace::from_history(history)
}

impl UltrametricSpace {
    /// Tree with uniform leaf masses `1/n`.
    pub fn from_history(history: &CoalescentHistory) -> Self {
        let n = history.n;
        let nodes = n + history.events.len();
        let mut parent = vec![ROOT; nodes];
        let mut height = vec![0.0; nodes];
        for e in &history.events {
            height[e.new_block] = e.time;
            for &b in &e.merged {
                parent[b] = e.new_block;
            }
        }
        let roots = (0..nodes).filter(|&v| parent[v] == ROOT).count();
        let censor_level = (roots > 1).then(|| history.horizon.unwrap_or(f64::INFINITY));
        Self {
            n,
            parent,
            height,
            masses: vec![1.0 / n as f64; n],
            censor_level,
            allow_censored: false,
        }
    }

    /// Replace the leaf masses by a probability vector.
    pub fn with_masses(mut self, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != self.n {
            return Err(Error::Validation(format!("{} masses for {} leaves", masses.len(), self.n)));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::Validation("leaf masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("leaf masses sum to {total}, not 1")));
        }
        self.masses = masses;
        Ok(self)
    }

    /// Mass `1/k` on each of the first `k` leaves: the tree `H^k` of the
    /// same coalescent restricted to `{0, …, k-1}`.
    pub fn with_uniform_prefix(self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidArgument(format!("prefix {k} outside 1..={}", self.n)));
        }
        let mut masses = vec![0.0; self.n];
        masses[..k].iter_mut().for_each(|m| *m = 1.0 / k as f64);
        self.with_masses(masses)
    }

    /// Treat censored distances as lower bounds instead of refusing.
    pub fn allow_censored(mut self) -> Self {
        self.allow_censored = true;
        self
    }

    pub fn is_censored(&self) -> bool {
        self.censor_level.is_some()
    }

    pub fn require_complete(&self) -> Result<()> {
        match self.censor_level {
            Some(h) => Err(Error::Censored {
                horizon: h,
                context: "tree has leaves that never coalesce before the horizon".into(),
            }),
            None => Ok(()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.n
    }

    pub fn leaf_masses(&self) -> &[f64] {
        &self.masses
    }

    /// For every leaf, its highest ancestor of height `≤ eps`.
    fn tops(&self, eps: f64) -> Vec<usize> {
        let nodes = self.parent.len();
        let mut top: Vec<usize> = (0..nodes).collect();
        for v in (0..nodes).rev() {
            let p = self.parent[v];
            if p != ROOT && self.height[p] <= eps {
                top[v] = top[p];
            }
        }
        top.truncate(self.n);
        top
    }

    /// Block label of every leaf in `Π_ε`, numbered by smallest leaf.
    pub fn block_labels(&self, eps: f64) -> Vec<usize> {
        let tops = self.tops(eps);
        let mut label = vec![usize::MAX; self.parent.len()];
        let mut next = 0;
        tops.iter()
            .map(|&t| {
                if label[t] == usize::MAX {
                    label[t] = next;
                    next += 1;
                }
                label[t]
            })
            .collect()
    }

    /// Masses of the blocks of `Π_ε`, numbered as in
    /// [`block_labels`](Self::block_labels).
    pub fn block_masses(&self, eps: f64) -> Vec<f64> {
        let labels = self.block_labels(eps);
        let mut out = vec![0.0; labels.iter().max().map_or(0, |m| m + 1)];
        for (leaf, &l) in labels.iter().enumerate() {
            out[l] += self.masses[leaf];
        }
        out
    }

    /// `ξ_ε`: blocks of `Π_ε` carrying positive mass.
    pub fn xi(&self, eps: f64) -> Result<usize> {
        check_eps(eps)?;
        check_scale(self, eps, "xi_epsilon")?;
        Ok(self.block_masses(eps).iter().filter(|&&m| m > 0.0).count())
    }

    /// `μ(B_ε(i))` for every leaf.
    pub fn ball_masses(&self, eps: f64) -> Result<Vec<f64>> {
        check_scale(self, eps, "ball mass")?;
        let labels = self.block_labels(eps);
        let blocks = self.block_masses(eps);
        Ok(labels.iter().map(|&l| blocks[l]).collect())
    }

    /// Subtree masses of all nodes.
    fn node_masses(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.parent.len()];
        mass[..self.n].copy_from_slice(&self.masses);
        for v in 0..self.parent.len() {
            let p = self.parent[v];
            if p != ROOT {
                mass[p] += mass[v];
            }
        }
        mass
    }

    /// Per leaf, the height of its lowest ancestor (itself included) whose
    /// mass exceeds `δ`; infinite when none exists below the censoring level.
    pub fn thin_thresholds(&self, delta: f64) -> Vec<(f64, f64)> {
        let mass = self.node_masses();
        let nodes = self.parent.len();
        let mut thr = vec![f64::INFINITY; nodes];
        for v in (0..nodes).rev() {
            thr[v] = if mass[v] > delta + MASS_TOLERANCE {
                self.height[v]
            } else if self.parent[v] != ROOT {
                thr[self.parent[v]]
            } else {
                f64::INFINITY
            };
        }
        (0..self.n).map(|i| (thr[i], self.masses[i])).collect()
    }

    fn modulus(&self, value: f64, name: &str) -> Result<f64> {
        match self.censor_level {
            Some(h) if value >= h && !self.allow_censored => Err(Error::Censored {
                horizon: h,
                context: format!("{name} not resolved below the horizon"),
            }),
            _ => Ok(value),
        }
    }

    pub fn v_delta(&self, delta: f64) -> Result<f64> {
        check_eps(delta)?;
        self.modulus(moduli_from_thresholds(self.thin_thresholds(delta)).0, "v_delta")
    }

    pub fn v_tilde_delta(&self, delta: f64) -> Result<f64> {
        check_eps(delta)?;
        self.modulus(moduli_from_thresholds(self.thin_thresholds(delta)).1, "v_tilde_delta")
    }

    /// `μ{x : μ(B_ε(x)) ≤ δ}`.
    pub fn thin_mass(&self, eps: f64, delta: f64) -> Result<f64> {
        Ok(self
            .ball_masses(eps)?
            .iter()
            .zip(&self.masses)
            .filter(|(b, &m)| m > 0.0 && **b <= delta + MASS_TOLERANCE)
            .map(|(_, m)| m)
            .sum())
    }

    /// Distance distribution from subtree masses: a node of height `t`
    /// whose children have masses `m_c` puts `(Σ m_c)² - Σ m_c²` at `t`.
    pub fn distance_distribution(&self) -> Result<Vec<(f64, f64)>> {
        let mass = self.node_masses();
        let mut child_sq = vec![0.0; self.parent.len()];
        for v in 0..self.parent.len() {
            if self.parent[v] != ROOT {
                child_sq[self.parent[v]] += mass[v] * mass[v];
            }
        }
        let mut atoms = vec![(0.0, self.masses.iter().map(|m| m * m).sum::<f64>())];
        let mut placed = atoms[0].1;
        for v in self.n..self.parent.len() {
            let w = mass[v] * mass[v] - child_sq[v];
            if w > 0.0 {
                atoms.push((self.height[v], w));
                placed += w;
            }
        }
        if let Some(h) = self.censor_level {
            let rest = 1.0 - placed;
            if rest > 1e-12 {
                check_scale(self, h, "distance distribution")?;
                atoms.push((h, rest));
            }
        }
        Ok(merge_atoms(atoms))
    }

    /// Full `n × n` leaf distance matrix, filled block by block: `O(n²)`.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let fill = self.censor_level.unwrap_or(0.0);
        let mut d = vec![fill; n * n];
        let mut members: Vec<Vec<usize>> = (0..self.parent.len())
            .map(|v| if v < n { vec![v] } else { Vec::new() })
            .collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.parent.len()];
        for v in 0..self.parent.len() {
            if self.parent[v] != ROOT {
                children[self.parent[v]].push(v);
            }
        }
        for v in n..self.parent.len() {
            let t = self.height[v];
            let kids = std::mem::take(&mut children[v]);
            for (a, &c1) in kids.iter().enumerate() {
                for &c2 in &kids[a + 1..] {
                    for &i in &members[c1] {
                        for &j in &members[c2] {
                            d[i * n + j] = t;
                            d[j * n + i] = t;
                        }
                    }
                }
            }
            let merged: Vec<usize> = kids.iter().flat_map(|&c| std::mem::take(&mut members[c])).collect();
            members[v] = merged;
        }
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        d
    }

    /// Height of the root, or the censoring level for a forest.
    pub fn tree_height(&self) -> f64 {
        match self.censor_level {
            Some(h) => h,
            None => self.height.last().copied().unwrap_or(0.0),
        }
    }
}

impl MmSpace for UltrametricSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let (mut a, mut b) = (i, j);
        while a != b {
            if a < b {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
            if a == ROOT || b == ROOT {
                return self.censor_level.unwrap_or(f64::INFINITY);
            }
        }
        self.height[a]
    }

    fn censoring(&self) -> Option<f64> {
        self.censor_level
    }

    fn allows_censored(&self) -> bool {
        self.allow_censored
    }
}
