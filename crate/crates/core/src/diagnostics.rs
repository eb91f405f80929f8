//! Finite-n evidence for the compactness dichotomy.
//!
//! Every replicate simulates one coalescent on `max(n_grid)` leaves and reads
//! off the trees `H^n` (uniform mass on the first `n` leaves) for all `n` in
//! the grid, so comparisons across `n` are paired. Per replicate and `n`:
//!
//! * `ξ_ε(H^n)` and the block count `N(ε)` of the simulated coalescent, with
//!   the domination `ξ_ε ≤ N(ε)` checked exactly;
//! * the thin-point mass `μ{x : μ(B_ε(x)) ≤ δ}` and `ṽ_δ`;
//! * the local probe `ξ_η(τ_δ)`: leaves in label order form the distance
//!   matrix, rooted at leaf 0.
//!
//! Stabilization is judged by the ratio of medians between the last two
//! grid sizes, growth of the probe by the ratio of means, both against
//! thresholds frozen from pilot runs.

use crate::classification::{classify, ClassificationConfig, CoalescentClass};
use crate::error::{Error, Result};
use crate::measure::LambdaMeasure;
use crate::mmspace::UltrametricSpace;
use crate::rng::replicate_seed;
use crate::sim::{Scheme, SimConfig, Simulator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Largest ratio of median `ξ_ε` between the last two grid sizes still read
/// as stabilized.
pub const DEFAULT_STABILIZATION_RATIO: f64 = 1.25;
/// Same, for medians of the local probe `ξ_η(τ_δ)`. Small integer medians
/// move in steps such as 2 → 3, hence the wider margin.
pub const DEFAULT_PROBE_RATIO: f64 = 1.5;
/// Smallest ratio of probe means between the last two grid sizes read as
/// growth.
pub const DEFAULT_PROBE_GROWTH_RATIO: f64 = 1.5;
/// Share of replicates whose `ξ_ε` must increase strictly along the grid for
/// growth to be declared.
pub const DEFAULT_GROWTH_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub stabilization_ratio: f64,
    pub probe_ratio: f64,
    pub probe_growth_ratio: f64,
    pub growth_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            stabilization_ratio: DEFAULT_STABILIZATION_RATIO,
            probe_ratio: DEFAULT_PROBE_RATIO,
            probe_growth_ratio: DEFAULT_PROBE_GROWTH_RATIO,
            growth_fraction: DEFAULT_GROWTH_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    /// Probe radii.
    pub delta_grid: Vec<f64>,
    /// Probe separations; pairs with `η ≥ δ` are skipped.
    pub eta_grid: Vec<f64>,
    /// Mass levels for the thin-point probe and `ṽ_δ`.
    pub thin_delta_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub x_min: Option<f64>,
    pub thresholds: Thresholds,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![100, 400, 1600],
            eps_grid: vec![0.1],
            delta_grid: vec![0.2, 0.4],
            eta_grid: vec![0.05, 0.1],
            thin_delta_grid: vec![0.005, 0.02],
            replicates: 200,
            seed: 1,
            scheme: Scheme::Gillespie,
            x_min: None,
            thresholds: Thresholds::default(),
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] < 1 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("n_grid must be a non-empty increasing list of positive sizes".into()));
        }
        let positive = |name: &str, g: &[f64]| -> Result<()> {
            if g.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Validation(format!("{name} entries must be positive and finite")));
            }
            Ok(())
        };
        positive("eps_grid", &self.eps_grid)?;
        positive("delta_grid", &self.delta_grid)?;
        positive("eta_grid", &self.eta_grid)?;
        positive("thin_delta_grid", &self.thin_delta_grid)?;
        if self.thin_delta_grid.iter().any(|&d| d >= 1.0) {
            return Err(Error::Validation("thin_delta_grid entries must be below 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Validation("replicates must be at least 1".into()));
        }
        Ok(())
    }

    pub fn probe_pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &d in &self.delta_grid {
            for &e in &self.eta_grid {
                if e < d {
                    out.push((d, e));
                }
            }
        }
        out
    }

    fn n_max(&self) -> usize {
        *self.n_grid.last().expect("validated")
    }
}

/// Order statistics of one cell; quantiles interpolate linearly between
/// order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Self {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: q(0.5),
            q1: q(0.25),
            q3: q(0.75),
            min: v[0],
            max: v[v.len() - 1],
        }
    }
}

/// Everything measured on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    /// `N(ε)` of the simulated coalescent, per `ε`.
    pub block_counts: Vec<usize>,
    /// `[n][ε]`.
    pub xi: Vec<Vec<usize>>,
    /// `[n][ε][δ]` over `thin_delta_grid`.
    pub thin_fraction: Vec<Vec<Vec<f64>>>,
    /// `[n][δ]` over `thin_delta_grid`.
    pub v_tilde: Vec<Vec<f64>>,
    /// `[n][pair]` over [`StudyConfig::probe_pairs`].
    pub probe: Vec<Vec<usize>>,
}

/// `ξ_η(τ_δ)` for the leaves `0..n` of `tree` in label order: the number of
/// blocks of `Π_η` among leaves in leaf 0's block of `Π_δ`.
pub fn probe_value(tree: &UltrametricSpace, n: usize, delta: f64, eta: f64) -> usize {
    let outer = tree.block_labels(delta);
    let inner = tree.block_labels(eta);
    let mut seen = std::collections::HashSet::new();
    for j in 0..n {
        if outer[j] == outer[0] {
            seen.insert(inner[j]);
        }
    }
    seen.len()
}

fn measure_replicate(cfg: &StudyConfig, sim: &Simulator, replicate: usize) -> Result<ReplicateRecord> {
    let seed = replicate_seed(cfg.seed, replicate as u64);
    let history = sim.run(seed)?;
    let traj = history.block_count_trajectory();
    let block_counts: Vec<usize> = cfg.eps_grid.iter().map(|&e| traj.at(e)).collect();
    let full = UltrametricSpace::from_history(&history);
    let pairs = cfg.probe_pairs();
    let mut rec = ReplicateRecord {
        replicate,
        seed,
        block_counts,
        xi: Vec::new(),
        thin_fraction: Vec::new(),
        v_tilde: Vec::new(),
        probe: Vec::new(),
    };
    for &n in &cfg.n_grid {
        let tree = full.clone().with_uniform_prefix(n)?;
        rec.xi.push(cfg.eps_grid.iter().map(|&e| tree.xi(e)).collect::<Result<_>>()?);
        rec.thin_fraction.push(
            cfg.eps_grid
                .iter()
                .map(|&e| cfg.thin_delta_grid.iter().map(|&d| tree.thin_mass(e, d)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
        );
        rec.v_tilde.push(cfg.thin_delta_grid.iter().map(|&d| tree.v_tilde_delta(d)).collect::<Result<_>>()?);
        rec.probe.push(pairs.iter().map(|&(d, e)| probe_value(&tree, n, d, e)).collect());
    }
    Ok(rec)
}

/// Simulate and measure all replicates, in replicate order.
pub fn run_replicates(measure: &LambdaMeasure, cfg: &StudyConfig) -> Result<Vec<ReplicateRecord>> {
    cfg.validate()?;
    let sim_cfg = SimConfig {
        n: cfg.n_max(),
        horizon: None,
        seed: cfg.seed,
        scheme: cfg.scheme,
        x_min: cfg.x_min,
    };
    let sim = Simulator::new(measure, &sim_cfg)?;
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| measure_replicate(cfg, &sim, r))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiCell {
    pub n: usize,
    pub eps: f64,
    pub xi: Summary,
    pub block_count: Summary,
    /// Replicates with `ξ_ε(H^n) > N(ε)`.
    pub domination_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub n_from: usize,
    pub n_to: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTrend {
    pub eps: f64,
    /// Ratio of medians between successive grid sizes.
    pub ratios: Vec<RatioEntry>,
    pub medians_strictly_increasing: bool,
    /// Share of replicates whose `ξ_ε` increases strictly along the grid.
    pub increasing_fraction: f64,
    pub stabilizes: bool,
    pub grows: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiStudy {
    pub cells: Vec<XiCell>,
    pub trends: Vec<XiTrend>,
    pub domination_violations: usize,
}

fn ratios(n_grid: &[usize], medians: &[f64]) -> Vec<RatioEntry> {
    n_grid
        .windows(2)
        .zip(medians.windows(2))
        .map(|(n, m)| RatioEntry {
            n_from: n[0],
            n_to: n[1],
            ratio: m[1] / m[0],
        })
        .collect()
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn summarize_xi(cfg: &StudyConfig, recs: &[ReplicateRecord]) -> XiStudy {
    let mut cells = Vec::new();
    let mut trends = Vec::new();
    let mut total = 0;
    for (ei, &eps) in cfg.eps_grid.iter().enumerate() {
        let counts: Vec<f64> = recs.iter().map(|r| r.block_counts[ei] as f64).collect();
        let mut medians = Vec::new();
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let xs: Vec<f64> = recs.iter().map(|r| r.xi[ni][ei] as f64).collect();
            let violations = recs.iter().filter(|r| r.xi[ni][ei] > r.block_counts[ei]).count();
            total += violations;
            let xi = Summary::of(&xs);
            medians.push(xi.median);
            cells.push(XiCell {
                n,
                eps,
                xi,
                block_count: Summary::of(&counts),
                domination_violations: violations,
            });
        }
        let increasing = recs
            .iter()
            .filter(|r| r.xi.windows(2).all(|w| w[1][ei] > w[0][ei]))
            .count() as f64
            / recs.len() as f64;
        let rs = ratios(&cfg.n_grid, &medians);
        let stabilizes = rs.last().is_some_and(|r| r.ratio <= cfg.thresholds.stabilization_ratio);
        let med_up = strictly_increasing(&medians);
        trends.push(XiTrend {
            eps,
            ratios: rs,
            medians_strictly_increasing: med_up,
            increasing_fraction: increasing,
            stabilizes,
            grows: cfg.n_grid.len() > 1 && med_up && increasing >= cfg.thresholds.growth_fraction,
        });
    }
    XiStudy {
        cells,
        trends,
        domination_violations: total,
    }
}

/// `ξ_ε(H^n)` over the `(n, ε)` grid, with `N(ε)` and the domination check.
pub fn xi_scaling_study(measure: &LambdaMeasure, cfg: &StudyConfig) -> Result<XiStudy> {
    let recs = run_replicates(measure, cfg)?;
    Ok(summarize_xi(cfg, &recs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinCell {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub fraction: Summary,
    /// Share of replicates without thin points.
    pub zero_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTildeCell {
    pub n: usize,
    pub delta: f64,
    pub v_tilde: Summary,
}

fn summarize_thin(cfg: &StudyConfig, recs: &[ReplicateRecord]) -> (Vec<ThinCell>, Vec<VTildeCell>) {
    let mut thin = Vec::new();
    let mut vt = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for (ei, &eps) in cfg.eps_grid.iter().enumerate() {
            for (di, &delta) in cfg.thin_delta_grid.iter().enumerate() {
                let xs: Vec<f64> = recs.iter().map(|r| r.thin_fraction[ni][ei][di]).collect();
                thin.push(ThinCell {
                    n,
                    eps,
                    delta,
                    fraction: Summary::of(&xs),
                    zero_share: xs.iter().filter(|&&x| x == 0.0).count() as f64 / xs.len() as f64,
                });
            }
        }
        for (di, &delta) in cfg.thin_delta_grid.iter().enumerate() {
            let xs: Vec<f64> = recs.iter().map(|r| r.v_tilde[ni][di]).collect();
            vt.push(VTildeCell {
                n,
                delta,
                v_tilde: Summary::of(&xs),
            });
        }
    }
    (thin, vt)
}

/// Thin-point mass `μ{x : μ(B_ε(x)) ≤ δ}` on `H^n` for each `δ`.
pub fn thin_point_probe(
    measure: &LambdaMeasure,
    n: usize,
    eps: f64,
    delta_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<ThinCell>> {
    let cfg = StudyConfig {
        n_grid: vec![n],
        eps_grid: vec![eps],
        delta_grid: vec![],
        eta_grid: vec![],
        thin_delta_grid: delta_grid.to_vec(),
        replicates,
        seed,
        ..StudyConfig::default()
    };
    let recs = run_replicates(measure, &cfg)?;
    Ok(summarize_thin(&cfg, &recs).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCell {
    pub n: usize,
    pub delta: f64,
    pub eta: f64,
    pub xi: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTrend {
    pub delta: f64,
    pub eta: f64,
    /// Ratios of medians between successive grid sizes.
    pub ratios: Vec<RatioEntry>,
    /// Ratios of means between successive grid sizes.
    pub mean_ratios: Vec<RatioEntry>,
    pub medians_strictly_increasing: bool,
    /// Last median ratio within [`Thresholds::probe_ratio`].
    pub stable: bool,
    /// Last mean ratio above [`Thresholds::probe_growth_ratio`].
    pub grows: bool,
}

fn summarize_probe(cfg: &StudyConfig, recs: &[ReplicateRecord]) -> (Vec<ProbeCell>, Vec<ProbeTrend>) {
    let mut cells = Vec::new();
    let mut trends = Vec::new();
    for (pi, &(delta, eta)) in cfg.probe_pairs().iter().enumerate() {
        let (mut medians, mut means) = (Vec::new(), Vec::new());
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let xs: Vec<f64> = recs.iter().map(|r| r.probe[ni][pi] as f64).collect();
            let xi = Summary::of(&xs);
            medians.push(xi.median);
            means.push(xi.mean);
            cells.push(ProbeCell { n, delta, eta, xi });
        }
        let rs = ratios(&cfg.n_grid, &medians);
        let ms = ratios(&cfg.n_grid, &means);
        trends.push(ProbeTrend {
            delta,
            eta,
            stable: rs.last().is_some_and(|r| r.ratio <= cfg.thresholds.probe_ratio),
            grows: ms.last().is_some_and(|r| r.ratio > cfg.thresholds.probe_growth_ratio),
            ratios: rs,
            mean_ratios: ms,
            medians_strictly_increasing: cfg.n_grid.len() > 1 && strictly_increasing(&medians),
        });
    }
    (cells, trends)
}

/// `ξ_η(τ_δ)` on `H^n` for each `(δ, η)` with `η < δ`.
pub fn local_compactness_probe(
    measure: &LambdaMeasure,
    n: usize,
    delta_grid: &[f64],
    eta_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<ProbeCell>> {
    let cfg = StudyConfig {
        n_grid: vec![n],
        eps_grid: vec![],
        delta_grid: delta_grid.to_vec(),
        eta_grid: eta_grid.to_vec(),
        thin_delta_grid: vec![],
        replicates,
        seed,
        ..StudyConfig::default()
    };
    let recs = run_replicates(measure, &cfg)?;
    Ok(summarize_probe(&cfg, &recs).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem1Verdict {
    ConsistentWithCompact,
    ConsistentWithNotLocallyCompact,
    /// Analytic class and finite-n evidence point in opposite directions.
    Disagreement,
    /// The coalescent has dust; the limit tree is not defined.
    DustValidityWarning,
    Inconclusive,
}

impl Theorem1Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem1Verdict::ConsistentWithCompact => "consistent-with-compact",
            Theorem1Verdict::ConsistentWithNotLocallyCompact => "consistent-with-not-locally-compact",
            Theorem1Verdict::Disagreement => "disagreement",
            Theorem1Verdict::DustValidityWarning => "dust-validity-warning",
            Theorem1Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessReport {
    pub measure: String,
    pub analytic_class: CoalescentClass,
    pub analytic_notes: Vec<String>,
    pub config: StudyConfig,
    pub xi: XiStudy,
    pub thin: Vec<ThinCell>,
    pub v_tilde: Vec<VTildeCell>,
    pub probe: Vec<ProbeCell>,
    pub probe_trends: Vec<ProbeTrend>,
    pub verdict: Theorem1Verdict,
    pub verdict_text: String,
    pub warnings: Vec<String>,
}

/// Classify `measure`, run all studies and cross-check the two.
pub fn theorem1_report(measure: &LambdaMeasure, cfg: &StudyConfig) -> Result<CompactnessReport> {
    let classification = classify(measure, &ClassificationConfig::default())?;
    let recs = run_replicates(measure, cfg)?;
    let xi = summarize_xi(cfg, &recs);
    let (thin, v_tilde) = summarize_thin(cfg, &recs);
    let (probe, probe_trends) = summarize_probe(cfg, &recs);

    let stabilizes = !xi.trends.is_empty() && xi.trends.iter().all(|t| t.stabilizes);
    let grows = !xi.trends.is_empty() && xi.trends.iter().all(|t| t.grows);
    let probe_stable = probe_trends.iter().all(|t| t.stable);
    let probe_grows = !probe_trends.is_empty() && probe_trends.iter().all(|t| t.grows);

    let mut warnings = Vec::new();
    if xi.domination_violations > 0 {
        warnings.push(format!(
            "{} replicate cells violate xi_eps <= N(eps); this indicates a bug",
            xi.domination_violations
        ));
    }
    let class = classification.class;
    let (verdict, text) = match class {
        CoalescentClass::HasDust => {
            warnings.push(
                "the coalescent has dust: H^n does not converge Gromov-weakly and the limit tree is undefined; \
                 statistics describe the finite trees only"
                    .into(),
            );
            (
                Theorem1Verdict::DustValidityWarning,
                "has dust; compactness of the limit is not defined".to_string(),
            )
        }
        CoalescentClass::ComesDownFromInfinity if stabilizes && probe_stable => (
            Theorem1Verdict::ConsistentWithCompact,
            "comes down from infinity and xi_eps stabilizes in n: consistent with a compact limit".to_string(),
        ),
        CoalescentClass::DustFreeStaysInfinite if grows && probe_grows => (
            Theorem1Verdict::ConsistentWithNotLocallyCompact,
            "stays infinite and xi_eps, xi_eta(tau_delta) grow in n at every probed scale: consistent with a limit \
             that is not locally compact"
                .to_string(),
        ),
        CoalescentClass::ComesDownFromInfinity if grows => (
            Theorem1Verdict::Disagreement,
            "DISAGREEMENT: analytic class comes down from infinity but xi_eps grows in n".to_string(),
        ),
        CoalescentClass::DustFreeStaysInfinite if stabilizes => (
            Theorem1Verdict::Disagreement,
            "DISAGREEMENT: analytic class stays infinite but xi_eps stabilizes in n".to_string(),
        ),
        _ => (
            Theorem1Verdict::Inconclusive,
            format!("analytic class {} with mixed finite-n evidence", class.as_str()),
        ),
    };
    Ok(CompactnessReport {
        measure: measure.to_string(),
        analytic_class: class,
        analytic_notes: classification.notes,
        config: cfg.clone(),
        xi,
        thin,
        v_tilde,
        probe,
        probe_trends,
        verdict,
        verdict_text: text,
        warnings,
    })
}

impl CompactnessReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("serialize report: {e}")))
    }

    /// One row per grid cell and statistic:
    /// `statistic,n,eps,delta,eta,replicates,seed,mean,median,q1,q3,min,max`.
    /// Columns that do not apply are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,n,eps,delta,eta,replicates,seed,mean,median,q1,q3,min,max\n");
        let seed = self.config.seed;
        let mut row = |stat: &str, n: usize, eps: Option<f64>, delta: Option<f64>, eta: Option<f64>, s: &Summary| {
            let f = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            writeln!(
                out,
                "{stat},{n},{},{},{},{},{seed},{},{},{},{},{},{}",
                f(eps),
                f(delta),
                f(eta),
                s.count,
                s.mean,
                s.median,
                s.q1,
                s.q3,
                s.min,
                s.max
            )
            .unwrap();
        };
        for c in &self.xi.cells {
            row("xi", c.n, Some(c.eps), None, None, &c.xi);
            row("block_count", c.n, Some(c.eps), None, None, &c.block_count);
        }
        for c in &self.thin {
            row("thin_fraction", c.n, Some(c.eps), Some(c.delta), None, &c.fraction);
        }
        for c in &self.v_tilde {
            row("v_tilde", c.n, None, Some(c.delta), None, &c.v_tilde);
        }
        for c in &self.probe {
            row("probe_xi", c.n, None, Some(c.delta), Some(c.eta), &c.xi);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmspace::{delta_restriction, xi_epsilon, DistanceMatrixSample, MmSpace};
    use crate::sim::simulate;

    fn small(replicates: usize) -> StudyConfig {
        StudyConfig {
            n_grid: vec![10, 40],
            replicates,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn summary_quantiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!((s.median, s.q1, s.q3, s.min, s.max, s.mean), (2.5, 1.75, 3.25, 1.0, 4.0, 2.5));
        assert_eq!(Summary::of(&[7.0]).median, 7.0);
    }

    #[test]
    fn probe_matches_matrix_route() {
        for seed in 0..30 {
            let h = simulate(&LambdaMeasure::bolthausen_sznitman(), &SimConfig::new(25, seed)).unwrap();
            let tree = UltrametricSpace::from_history(&h);
            for n in [5, 25] {
                let sub = tree.clone().with_uniform_prefix(n).unwrap();
                let sample = DistanceMatrixSample::from_points(&sub, (0..n).collect(), "leaves");
                for (d, e) in [(0.2, 0.05), (0.4, 0.1), (0.4, 0.05), (5.0, 0.1)] {
                    let r = delta_restriction(&sample, d).unwrap();
                    let direct = xi_epsilon(&r, e).unwrap().exact().unwrap();
                    assert_eq!(probe_value(&sub, n, d, e), direct);
                    if d >= sub.tree_height() {
                        assert_eq!(r.len(), n);
                    }
                }
            }
        }
    }

    #[test]
    fn domination_and_monotonicity() {
        let cfg = StudyConfig {
            eps_grid: vec![0.05, 0.1, 0.3],
            thin_delta_grid: vec![0.01, 0.05, 0.2],
            ..small(40)
        };
        for spec in ["kingman", "bolthausen-sznitman", "power:1"] {
            let m: LambdaMeasure = spec.parse().unwrap();
            let recs = run_replicates(&m, &cfg).unwrap();
            for r in &recs {
                for ni in 0..2 {
                    for ei in 0..3 {
                        assert!(r.xi[ni][ei] <= r.block_counts[ei]);
                        if ei > 0 {
                            assert!(r.xi[ni][ei] <= r.xi[ni][ei - 1]);
                        }
                        for di in 0..3 {
                            if ei > 0 {
                                assert!(r.thin_fraction[ni][ei][di] <= r.thin_fraction[ni][ei - 1][di]);
                            }
                            if di > 0 {
                                assert!(r.thin_fraction[ni][ei][di] >= r.thin_fraction[ni][ei][di - 1]);
                            }
                        }
                    }
                }
                // The largest tree uses every simulated leaf.
                assert_eq!(r.xi[1], r.block_counts);
            }
        }
    }

    #[test]
    fn thin_points_below_leaf_mass() {
        let cells = thin_point_probe(&LambdaMeasure::bolthausen_sznitman(), 50, 0.1, &[0.5 / 50.0], 20, 3).unwrap();
        assert_eq!(cells[0].fraction.max, 0.0);
    }

    #[test]
    fn reports_are_deterministic() {
        let m = LambdaMeasure::kingman();
        let a = theorem1_report(&m, &small(16)).unwrap();
        let b = theorem1_report(&m, &small(16)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.xi.domination_violations, 0);
    }

    #[test]
    fn dust_reports_carry_warning() {
        let m: LambdaMeasure = "power:1".parse().unwrap();
        let r = theorem1_report(&m, &small(8)).unwrap();
        assert_eq!(r.verdict, Theorem1Verdict::DustValidityWarning);
        assert!(r.warnings.iter().any(|w| w.contains("dust")));
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::default();
        c.n_grid = vec![400, 100];
        assert!(c.validate().is_err());
        let mut c = StudyConfig::default();
        c.thin_delta_grid = vec![1.0];
        assert!(c.validate().is_err());
        assert_eq!(StudyConfig::default().probe_pairs().len(), 4);
        let mut c = StudyConfig::default();
        c.delta_grid = vec![0.1];
        assert_eq!(c.probe_pairs(), vec![(0.1, 0.05)]);
    }
}
