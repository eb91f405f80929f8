//! Analytic classification of a Λ-coalescent.
//!
//! Three criteria are evaluated numerically:
//!
//! * the series `Σ_b 1/d_b` with `d_b = Σ_k k C(b,k) λ_{b,k}` (comes down
//!   from infinity iff it converges),
//! * the integral `∫_1^∞ dq / ψ(q)` (same criterion, independent route),
//! * the integral `∫ x^{-1} Λ(dx)` (dust-free iff it diverges).
//!
//! Convergence of an infinite series cannot be decided from finitely many
//! terms, so each criterion yields a three-valued [`Verdict`] backed by the
//! partial sums on a geometric grid of cutoffs and a power-law fit of their
//! increments over the last decades of that grid. Increments of a convergent
//! tail shrink like `X^{-θ}` with `θ > 0`; logarithmic divergence shows up as a
//! slope that only creeps towards zero like `-1/ln X`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{LambdaMeasure, ZeroBehavior};
use crate::quadrature::{self, QuadOptions};

/// Rows `λ_{b,·}` are retained for `b` up to this cap; aggregates go to `B_max`.
pub const DEFAULT_ENTRY_CAP: usize = 2048;

/// Merger rates of a measure up to `B_max` blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    b_max: usize,
    entry_cap: usize,
    /// `rows[b][k] = λ_{b,k}` for `b <= entry_cap`.
    rows: Vec<Vec<f64>>,
    /// `γ_b = Σ_k C(b,k) λ_{b,k}`, indexed by `b`.
    total_rate: Vec<f64>,
    /// `d_b = Σ_k k C(b,k) λ_{b,k}`, indexed by `b`.
    cdi_denominator: Vec<f64>,
}

impl RateTable {
    pub fn build(measure: &LambdaMeasure, b_max: usize) -> Result<Self> {
        Self::build_with_entry_cap(measure, b_max, DEFAULT_ENTRY_CAP)
    }

    pub fn build_with_entry_cap(measure: &LambdaMeasure, b_max: usize, entry_cap: usize) -> Result<Self> {
        if b_max < 2 {
            return Err(Error::InvalidArgument(format!("B_max must be at least 2, got {b_max}")));
        }
        let entry_cap = entry_cap.min(b_max);
        let aggregates: Vec<(f64, f64)> = (0..=b_max)
            .into_par_iter()
            .map(|b| {
                if b < 2 {
                    return (0.0, 0.0);
                }
                let w = measure.merger_weights(b);
                let gamma: f64 = w.iter().sum();
                let d: f64 = w.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
                (gamma, d)
            })
            .collect();
        if let Some(b) = aggregates
            .iter()
            .position(|(g, d)| !g.is_finite() || !d.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "merger rates overflow at b = {b}"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..=entry_cap)
            .into_par_iter()
            .map(|b| if b < 2 { Vec::new() } else { measure.lambda_row(b) })
            .collect();
        let (total_rate, cdi_denominator) = aggregates.into_iter().unzip();
        Ok(Self {
            b_max,
            entry_cap,
            rows,
            total_rate,
            cdi_denominator,
        })
    }

    pub fn b_max(&self) -> usize {
        self.b_max
    }

    pub fn entry_cap(&self) -> usize {
        self.entry_cap
    }

    /// `λ_{b,k}` if the row is retained.
    pub fn lambda(&self, b: usize, k: usize) -> Option<f64> {
        if b > self.entry_cap || k < 2 || k > b {
            return None;
        }
        Some(self.rows[b][k])
    }

    /// Total merger rate `γ_b` with `b` blocks.
    pub fn total_rate(&self, b: usize) -> f64 {
        self.total_rate[b]
    }

    /// `d_b`, the rate at which blocks are consumed by mergers.
    pub fn cdi_denominator(&self, b: usize) -> f64 {
        self.cdi_denominator[b]
    }

    /// `max |λ_{b,k} - λ_{b+1,k} - λ_{b+1,k+1}|` over retained rows.
    pub fn max_consistency_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for b in 2..self.entry_cap {
            for k in 2..=b {
                let defect = self.rows[b][k] - self.rows[b + 1][k] - self.rows[b + 1][k + 1];
                worst = worst.max(defect.abs());
            }
        }
        worst
    }
}

/// Build the rate table of `measure` up to `b_max` blocks.
pub fn build_rate_table(measure: &LambdaMeasure, b_max: usize) -> Result<RateTable> {
    RateTable::build(measure, b_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Thresholds turning a fitted tail exponent into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    /// Slopes at or below this are summable with margin.
    pub converge_below: f64,
    /// Slopes at or above this are non-summable with margin.
    pub diverge_above: f64,
    /// Largest RMS residual of the log-log fit for a decisive verdict.
    pub residual_threshold: f64,
    /// Width of the fitting window, in decades below the largest cutoff.
    pub fit_decades: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        Self {
            converge_below: -0.2,
            diverge_above: -0.15,
            residual_threshold: 0.05,
            fit_decades: 2.0,
        }
    }
}

/// Three-valued convergence verdict with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    /// Cutoffs `X_j` (block count, `q`, or `1/x`), increasing.
    pub cutoffs: Vec<f64>,
    /// Partial sums or integrals up to each cutoff.
    pub partial: Vec<f64>,
    pub tail_exponent: Option<f64>,
    pub fit_residual: Option<f64>,
    /// Limit of the partial values when it is known.
    pub value: Option<f64>,
    pub note: String,
}

impl ConvergenceVerdict {
    fn immediate(verdict: Verdict, note: &str) -> Self {
        Self {
            verdict,
            cutoffs: vec![],
            partial: vec![],
            tail_exponent: None,
            fit_residual: None,
            value: None,
            note: note.to_string(),
        }
    }
}

/// Judge convergence of `partial` (indexed by the increasing `cutoffs`).
pub fn judge_tail(cutoffs: &[f64], partial: &[f64], rule: &VerdictRule) -> ConvergenceVerdict {
    assert_eq!(cutoffs.len(), partial.len());
    let mut out = ConvergenceVerdict {
        verdict: Verdict::Inconclusive,
        cutoffs: cutoffs.to_vec(),
        partial: partial.to_vec(),
        tail_exponent: None,
        fit_residual: None,
        value: None,
        note: String::new(),
    };
    let Some(&x_max) = cutoffs.last() else {
        out.note = "no evidence".into();
        return out;
    };
    let window_start = x_max / 10f64.powf(rule.fit_decades);
    let scale = partial.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut vanishing = 0usize;
    let mut negative = 0usize;
    for j in 1..cutoffs.len() {
        if cutoffs[j - 1] < window_start * (1.0 - 1e-12) {
            continue;
        }
        let inc = partial[j] - partial[j - 1];
        if inc.abs() <= 1e-14 * scale {
            vanishing += 1;
        } else if inc < 0.0 {
            negative += 1;
        } else {
            xs.push(cutoffs[j].ln());
            ys.push(inc.ln());
        }
    }
    let total = xs.len() + vanishing + negative;
    if total == 0 {
        out.note = "fit window is empty".into();
        return out;
    }
    if vanishing == total {
        out.verdict = Verdict::Converges;
        out.value = partial.last().copied();
        out.note = "tail increments vanish".into();
        return out;
    }
    if negative > 0 || vanishing > 0 || xs.len() < 3 {
        out.note = format!(
            "increments in the fit window are not a clean power law \
             ({negative} negative, {vanishing} vanishing, {} usable)",
            xs.len()
        );
        return out;
    }
    let (slope, residual) = least_squares(&xs, &ys);
    out.tail_exponent = Some(slope);
    out.fit_residual = Some(residual);
    if residual > rule.residual_threshold {
        out.note = format!("fit residual {residual:.3} exceeds {}", rule.residual_threshold);
    } else if slope <= rule.converge_below {
        out.verdict = Verdict::Converges;
        out.note = format!("increments decay like X^{slope:.3}");
    } else if slope >= rule.diverge_above {
        out.verdict = Verdict::Diverges;
        out.note = format!("increments decay no faster than X^{slope:.3}");
    } else {
        out.note = format!("slope {slope:.3} inside the undecided band");
    }
    out
}

/// Slope and RMS residual of the least-squares line through `(xs, ys)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    (slope, (ss / n).sqrt())
}

/// Geometric grid `10^{j/per_decade}` from `lo` to `hi`, inclusive.
fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let start = (lo.log10() * per_decade as f64).round() as i64;
    let end = (hi.log10() * per_decade as f64).round() as i64;
    (start..=end)
        .map(|j| 10f64.powf(j as f64 / per_decade as f64))
        .collect()
}

/// Settings for [`classify`] and the individual tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationConfig {
    /// Largest block count in the series test.
    pub b_max: usize,
    /// Smallest admissible `b_max` for a series verdict.
    pub min_b_max: usize,
    /// Upper end of the `q` grid in the ψ test (lower end is 1).
    pub psi_q_max: f64,
    /// Smallest cutoff `x` in the dust test.
    pub dust_x_min: f64,
    pub grid_per_decade: usize,
    pub rule: VerdictRule,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        Self {
            b_max: 10_000,
            min_b_max: 100,
            psi_q_max: 1e8,
            dust_x_min: 1e-12,
            grid_per_decade: 4,
            rule: VerdictRule::default(),
        }
    }
}

/// Series criterion: does `Σ_b 1/d_b` converge?
pub fn cdi_series_test(table: &RateTable, config: &ClassificationConfig) -> Result<ConvergenceVerdict> {
    if table.b_max() < config.min_b_max {
        return Err(Error::InvalidArgument(format!(
            "series test needs B_max >= {}, table has {}",
            config.min_b_max,
            table.b_max()
        )));
    }
    let mut grid: Vec<usize> = geometric_grid(2.0, table.b_max() as f64, config.grid_per_decade)
        .into_iter()
        .map(|x| x.round() as usize)
        .filter(|&b| (2..=table.b_max()).contains(&b))
        .collect();
    // Cutoffs stay on the geometric grid; a partial last step would distort
    // the increment fit.
    grid.dedup();
    let mut partial = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for b in 2..=table.b_max() {
        let d = table.cdi_denominator(b);
        if d <= 0.0 {
            return Err(Error::ZeroMeasure);
        }
        acc += 1.0 / d;
        if next < grid.len() && grid[next] == b {
            partial.push(acc);
            next += 1;
        }
    }
    let cutoffs: Vec<f64> = grid.iter().map(|&b| b as f64).collect();
    Ok(judge_tail(&cutoffs, &partial, &config.rule))
}

/// `(e^{-y} - 1 + y)` without cancellation for small `y`.
fn psi_numerator(y: f64) -> f64 {
    if y < 1e-4 {
        y * y * (0.5 - y * (1.0 / 6.0 - y / 24.0))
    } else {
        (-y).exp_m1() + y
    }
}

/// `ψ(q) = ∫ (e^{-qx} - 1 + qx) x^{-2} Λ(dx)`.
pub fn psi(measure: &LambdaMeasure, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::InvalidArgument(format!("ψ needs q >= 0, got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let mut breakpoints = Vec::new();
    let mut x = 0.1 / q;
    while x < 1.0 {
        breakpoints.push(x);
        x *= 10.0;
    }
    measure.integrate_over(
        |x| psi_numerator(q * x) / (x * x),
        ZeroBehavior::regular(0.5 * q * q),
        0.0,
        1.0,
        &breakpoints,
        &QuadOptions::default(),
    )
}

/// Integral criterion: does `∫_1^∞ dq / ψ(q)` converge?
pub fn cdi_psi_test(measure: &LambdaMeasure, config: &ClassificationConfig) -> Result<ConvergenceVerdict> {
    let grid = geometric_grid(1.0, config.psi_q_max, config.grid_per_decade);
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-10,
        max_intervals: 2_000,
    };
    let segments: Vec<f64> = grid
        .par_windows(2)
        .map(|w| {
            let failure = std::sync::Mutex::new(None);
            // q = e^s, dq = e^s ds
            let r = quadrature::integrate(
                |s: f64| {
                    let q = s.exp();
                    match psi(measure, q) {
                        Ok(v) if v > 0.0 => q / v,
                        Ok(_) => {
                            *failure.lock().unwrap() = Some(Error::ZeroMeasure);
                            0.0
                        }
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            0.0
                        }
                    }
                },
                w[0].ln(),
                w[1].ln(),
                &opts,
            );
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            Ok(r?.value)
        })
        .collect::<Result<_>>()?;
    let mut partial = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    partial.push(0.0);
    for s in segments {
        acc += s;
        partial.push(acc);
    }
    Ok(judge_tail(&grid, &partial, &config.rule))
}

/// Dust criterion: does `∫ x^{-1} Λ(dx)` converge? Convergence means the
/// coalescent has dust; divergence means it is dust-free.
pub fn dust_test(measure: &LambdaMeasure, config: &ClassificationConfig) -> Result<ConvergenceVerdict> {
    if measure.mass_at_zero() > 0.0 {
        return Ok(ConvergenceVerdict::immediate(
            Verdict::Diverges,
            "atom at 0 makes the integral infinite",
        ));
    }
    // cutoffs X = 1/x, increasing
    let cutoffs = geometric_grid(1.0, 1.0 / config.dust_x_min, config.grid_per_decade);
    let xs: Vec<f64> = cutoffs.iter().map(|c| 1.0 / c).collect();
    let opts = QuadOptions::default();
    let mut partial = Vec::with_capacity(xs.len());
    // Mass at or above x = 1 is an atom-free point set; start from zero.
    let mut acc = 0.0;
    partial.push(acc);
    for w in xs.windows(2) {
        let (lo, hi) = (w[1], w[0]);
        let atoms: f64 = measure
            .atoms()
            .iter()
            .filter(|a| a.location >= lo && a.location < hi)
            .map(|a| a.mass / a.location)
            .sum();
        let cont = measure.integrate_continuous_over(&|x: f64| 1.0 / x, 0.0, lo, hi, &[], &opts)?;
        acc += atoms + cont;
        partial.push(acc);
    }
    let mut verdict = judge_tail(&cutoffs, &partial, &config.rule);
    if verdict.verdict == Verdict::Converges {
        verdict.value = measure
            .integrate(|x| 1.0 / x, ZeroBehavior::singular(-1.0))
            .ok();
    }
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoalescentClass {
    ComesDownFromInfinity,
    DustFreeStaysInfinite,
    HasDust,
    /// The criteria contradict each other.
    Inconsistent,
    /// The evidence is not decisive.
    Inconclusive,
}

impl CoalescentClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoalescentClass::ComesDownFromInfinity => "ComesDownFromInfinity",
            CoalescentClass::DustFreeStaysInfinite => "DustFreeStaysInfinite",
            CoalescentClass::HasDust => "HasDust",
            CoalescentClass::Inconsistent => "Inconsistent",
            CoalescentClass::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub measure: String,
    pub config: ClassificationConfig,
    pub cdi_series: ConvergenceVerdict,
    pub cdi_psi: ConvergenceVerdict,
    /// Evidence about `∫ x^{-1} Λ(dx)`; `Diverges` means dust-free.
    pub dust_free: ConvergenceVerdict,
    pub class: CoalescentClass,
    pub notes: Vec<String>,
}

/// Combine the three verdicts into a class.
pub fn combine(series: Verdict, psi: Verdict, dust: Verdict) -> (CoalescentClass, Vec<String>) {
    use Verdict::*;
    let mut notes = Vec::new();
    let cdi = match (series, psi) {
        (Converges, Converges) => Some(true),
        (Diverges, Diverges) => Some(false),
        (Converges, Diverges) | (Diverges, Converges) => {
            notes.push("series and ψ criteria disagree".to_string());
            return (CoalescentClass::Inconsistent, notes);
        }
        _ => None,
    };
    let class = match (cdi, dust) {
        (Some(true), Converges) => {
            notes.push("comes down from infinity but the dust integral converges".to_string());
            CoalescentClass::Inconsistent
        }
        (Some(true), d) => {
            if d == Inconclusive {
                notes.push("dust test inconclusive; dust-freeness implied by coming down".to_string());
            }
            CoalescentClass::ComesDownFromInfinity
        }
        (Some(false), Diverges) => CoalescentClass::DustFreeStaysInfinite,
        (_, Converges) => {
            if cdi.is_none() {
                notes.push("coming-down criteria inconclusive; dust excludes coming down".to_string());
            }
            CoalescentClass::HasDust
        }
        _ => CoalescentClass::Inconclusive,
    };
    (class, notes)
}

/// Run all three criteria and combine them.
pub fn classify(measure: &LambdaMeasure, config: &ClassificationConfig) -> Result<ClassificationReport> {
    let table = RateTable::build_with_entry_cap(measure, config.b_max, 2)?;
    let cdi_series = cdi_series_test(&table, config)?;
    let cdi_psi = cdi_psi_test(measure, config)?;
    let dust_free = dust_test(measure, config)?;
    let (class, notes) = combine(cdi_series.verdict, cdi_psi.verdict, dust_free.verdict);
    Ok(ClassificationReport {
        measure: measure.to_string(),
        config: *config,
        cdi_series,
        cdi_psi,
        dust_free,
        class,
        notes,
    })
}

impl ClassificationReport {
    /// Line-oriented `key = value` rendering with evidence arrays.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "measure = {}", self.measure);
        let _ = writeln!(s, "class = {}", self.class.as_str());
        for (name, v) in [
            ("cdi_series", &self.cdi_series),
            ("cdi_psi", &self.cdi_psi),
            ("dust_integral", &self.dust_free),
        ] {
            let _ = writeln!(s, "{name}.verdict = {:?}", v.verdict);
            if let Some(e) = v.tail_exponent {
                let _ = writeln!(s, "{name}.tail_exponent = {e:.6}");
            }
            if let Some(r) = v.fit_residual {
                let _ = writeln!(s, "{name}.fit_residual = {r:.6}");
            }
            if let Some(x) = v.value {
                let _ = writeln!(s, "{name}.value = {x:.12e}");
            }
            let _ = writeln!(s, "{name}.note = {}", v.note);
            let _ = writeln!(s, "{name}.cutoffs = {}", join(&v.cutoffs));
            let _ = writeln!(s, "{name}.partial = {}", join(&v.partial));
        }
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }
}

fn join(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.10e}")).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::parse_measure;

    fn quick() -> ClassificationConfig {
        ClassificationConfig::default()
    }

    #[test]
    fn kingman_table() {
        let t = build_rate_table(&LambdaMeasure::kingman(), 10).unwrap();
        for b in 2..=10 {
            assert_eq!(t.lambda(b, 2), Some(1.0));
            for k in 3..=b {
                assert_eq!(t.lambda(b, k), Some(0.0));
            }
            let c2 = (b * (b - 1) / 2) as f64;
            assert_eq!(t.total_rate(b), c2);
            assert_eq!(t.cdi_denominator(b), 2.0 * c2);
        }
    }

    #[test]
    fn bolthausen_sznitman_table() {
        let t = build_rate_table(&LambdaMeasure::bolthausen_sznitman(), 4).unwrap();
        let close = |a: Option<f64>, b: f64| (a.unwrap() - b).abs() < 1e-14;
        assert!(close(t.lambda(3, 2), 0.5));
        assert!(close(t.lambda(3, 3), 0.5));
        assert!(close(t.lambda(4, 2), 1.0 / 3.0));
        assert!(close(t.lambda(4, 3), 1.0 / 6.0));
        assert!(close(t.lambda(4, 4), 1.0 / 3.0));
        assert_eq!(t.lambda(4, 5), None);
    }

    #[test]
    fn two_block_table_is_total_mass() {
        let m = parse_measure("atom:0.4,0.7+beta:2,3").unwrap();
        let t = build_rate_table(&m, 2).unwrap();
        assert!((t.lambda(2, 2).unwrap() - 1.7).abs() < 1e-15);
        assert!(matches!(build_rate_table(&m, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn table_aggregate_inequalities() {
        let m = parse_measure("0.3*kingman+beta:0.6,1.4+uniform:0.3,0.9+atom:0.5,0.2").unwrap();
        let t = RateTable::build(&m, 3_000).unwrap();
        for b in 2..3_000 {
            assert!(t.cdi_denominator(b) >= 2.0 * t.total_rate(b) * (1.0 - 1e-12));
            assert!(t.total_rate(b + 1) >= t.total_rate(b) * (1.0 - 1e-12), "b={b}");
        }
    }

    #[test]
    fn judge_tail_rules() {
        let rule = VerdictRule::default();
        let cut: Vec<f64> = (0..=16).map(|j| 10f64.powf(j as f64 / 4.0)).collect();
        let conv: Vec<f64> = cut.iter().map(|x| 1.0 - 1.0 / x).collect();
        assert_eq!(judge_tail(&cut, &conv, &rule).verdict, Verdict::Converges);
        let div: Vec<f64> = cut.iter().map(|x| x.ln()).collect();
        assert_eq!(judge_tail(&cut, &div, &rule).verdict, Verdict::Diverges);
        let flat = vec![3.0; cut.len()];
        let v = judge_tail(&cut, &flat, &rule);
        assert_eq!(v.verdict, Verdict::Converges);
        assert_eq!(v.value, Some(3.0));
        // slope -0.17 sits in the undecided band
        let mid: Vec<f64> = cut.iter().map(|x| -x.powf(-0.17)).collect();
        assert_eq!(judge_tail(&cut, &mid, &rule).verdict, Verdict::Inconclusive);
        // wildly oscillating increments fail the residual check
        let mut acc = 0.0;
        let noisy: Vec<f64> = cut
            .iter()
            .enumerate()
            .map(|(j, _)| {
                acc += if j % 2 == 0 { 1.0 } else { 1e-3 };
                acc
            })
            .collect();
        assert_eq!(judge_tail(&cut, &noisy, &rule).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn series_test_examples() {
        let cfg = quick();
        let k = RateTable::build(&LambdaMeasure::kingman(), cfg.b_max).unwrap();
        let v = cdi_series_test(&k, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Converges);
        // Σ 1/(b(b-1)) telescopes to 1 - 1/B
        let last = *v.partial.last().unwrap();
        let b_last = *v.cutoffs.last().unwrap();
        assert!((last - (1.0 - 1.0 / b_last)).abs() < 1e-12);

        let small = RateTable::build(&LambdaMeasure::kingman(), 50).unwrap();
        assert!(matches!(cdi_series_test(&small, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn psi_examples() {
        let m = parse_measure("atom:0.5,1+beta:0.5,1.5").unwrap();
        assert_eq!(psi(&m, 0.0).unwrap(), 0.0);
        let k = LambdaMeasure::kingman().scaled(2.5).unwrap();
        for q in [0.1, 1.0, 1e3, 1e8] {
            let v = psi(&k, q).unwrap();
            assert!((v - 2.5 * q * q / 2.0).abs() <= 1e-15 * v);
        }
        // oracle: scipy quad on (expm1(-x) + x) / x^2 over [0, 1]
        let v = psi(&LambdaMeasure::bolthausen_sznitman(), 1.0).unwrap();
        assert!((v - 0.428_720_158_125_610_8).abs() < 1e-12, "{v}");
    }

    #[test]
    fn dust_examples() {
        let cfg = quick();
        assert_eq!(dust_test(&LambdaMeasure::kingman(), &cfg).unwrap().verdict, Verdict::Diverges);
        assert_eq!(
            dust_test(&LambdaMeasure::bolthausen_sznitman(), &cfg).unwrap().verdict,
            Verdict::Diverges
        );
        let v = dust_test(&LambdaMeasure::power(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Converges);
        assert!((v.value.unwrap() - 2.0).abs() < 1e-12);
        let v = dust_test(&LambdaMeasure::uniform(0.25, 1.0).unwrap(), &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Converges);
        assert!((v.value.unwrap() - 4.0f64.ln() / 0.75).abs() < 1e-12);
    }

    #[test]
    fn combine_rules() {
        use CoalescentClass as C;
        use Verdict::*;
        assert_eq!(combine(Converges, Converges, Diverges).0, C::ComesDownFromInfinity);
        assert_eq!(combine(Converges, Converges, Inconclusive).0, C::ComesDownFromInfinity);
        assert_eq!(combine(Converges, Converges, Converges).0, C::Inconsistent);
        assert_eq!(combine(Converges, Diverges, Diverges).0, C::Inconsistent);
        assert_eq!(combine(Diverges, Diverges, Diverges).0, C::DustFreeStaysInfinite);
        assert_eq!(combine(Diverges, Diverges, Converges).0, C::HasDust);
        assert_eq!(combine(Inconclusive, Diverges, Converges).0, C::HasDust);
        assert_eq!(combine(Inconclusive, Diverges, Diverges).0, C::Inconclusive);
        assert_eq!(combine(Diverges, Diverges, Inconclusive).0, C::Inconclusive);
    }

    #[test]
    fn classify_presets() {
        let cfg = quick();
        let k = classify(&LambdaMeasure::kingman(), &cfg).unwrap();
        assert_eq!(k.class, CoalescentClass::ComesDownFromInfinity, "{}", k.to_text());
        let bs = classify(&LambdaMeasure::bolthausen_sznitman(), &cfg).unwrap();
        assert_eq!(bs.class, CoalescentClass::DustFreeStaysInfinite, "{}", bs.to_text());
        let dust = classify(&LambdaMeasure::power(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(dust.class, CoalescentClass::HasDust, "{}", dust.to_text());
        assert!(dust.to_text().contains("class = HasDust"));
    }
}
