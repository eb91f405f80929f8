use super::history::{CoalescentHistory, MergeEvent, SimMetadata};
use super::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::measure::{Density, LambdaMeasure};
use crate::quadrature::QuadOptions;
use crate::rng::{rng_from_seed, SimRng};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Target for the expected number of mergers lost to the default cutoff.
pub const MISSED_MERGER_BUDGET: f64 = 1e-3;

/// Largest expected number of Poisson points per run the default cutoff may
/// imply before the simulation falls back to the exact scheme.
const POINT_BUDGET: f64 = 2e7;

#[derive(Debug, Clone, Copy)]
enum Proposal {
    Atom(f64),
    /// Density `∝ x^e` on `[lo, hi]`; acceptance `(1 - x)^a / sup`.
    X { lo: f64, hi: f64, e: f64 },
    /// Density `∝ (1 - x)^e` on `[lo, hi]`; acceptance `x^a / sup`.
    OneMinus { lo: f64, hi: f64, e: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    proposal: Proposal,
    accept_exponent: f64,
    accept_sup: f64,
}

/// The restriction of `x⁻² Λ(dx)` to `[x_min, 1)` as a sampler, together
/// with the Kingman rate from an atom at 0.
#[derive(Debug, Clone)]
pub struct PoissonKernel {
    x_min: f64,
    kingman_mass: f64,
    missed_mass: f64,
    pieces: Vec<Piece>,
    cumulative: Vec<f64>,
}

impl PoissonKernel {
    pub fn new(measure: &LambdaMeasure, x_min: f64) -> Result<Self> {
        if !(x_min > 0.0 && x_min < 1.0) {
            return Err(Error::Validation(format!("x_min {x_min} must lie in (0, 1)")));
        }
        let mut pieces = Vec::new();
        let mut weights = Vec::new();
        for a in measure.atoms() {
            if a.location >= x_min {
                pieces.push(Piece {
                    proposal: Proposal::Atom(a.location),
                    accept_exponent: 0.0,
                    accept_sup: 1.0,
                });
                weights.push(a.mass / (a.location * a.location));
            }
        }
        for wd in measure.densities() {
            match wd.density {
                Density::Uniform { lo, hi } => {
                    let a = lo.max(x_min);
                    if a < hi {
                        pieces.push(Piece {
                            proposal: Proposal::X { lo: a, hi, e: -2.0 },
                            accept_exponent: 0.0,
                            accept_sup: 1.0,
                        });
                        weights.push(wd.weight / (hi - lo) * (1.0 / a - 1.0 / hi));
                    }
                }
                _ => {
                    let (p, q) = wd.density.beta_shape().expect("beta-family density");
                    let single = LambdaMeasure::new(Vec::new(), vec![*wd])?;
                    for piece in beta_pieces(p, q, x_min) {
                        let (lo, hi) = piece.range();
                        let w = single.integrate_continuous_over(
                            &|x: f64| 1.0 / (x * x),
                            0.0,
                            lo,
                            hi,
                            &decade_points(lo, hi),
                            &QuadOptions::default(),
                        )?;
                        pieces.push(piece);
                        weights.push(w);
                    }
                }
            }
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !acc.is_finite() {
            return Err(Error::NonIntegrable(format!("point intensity above x_min = {x_min} is not finite")));
        }
        Ok(Self {
            x_min,
            kingman_mass: measure.mass_at_zero(),
            missed_mass: measure.mass_in_open(x_min)?,
            pieces,
            cumulative,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// `∫_{[x_min, 1)} x⁻² Λ(dx)`.
    pub fn intensity(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `Λ((0, x_min))`.
    pub fn missed_mass(&self) -> f64 {
        self.missed_mass
    }

    /// `Λ({0})`.
    pub fn kingman_mass(&self) -> f64 {
        self.kingman_mass
    }

    /// Draw `x` from the normalized restricted intensity.
    pub fn sample_x(&self, rng: &mut SimRng) -> f64 {
        let u = rng.random::<f64>() * self.intensity();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.pieces.len() - 1);
        let piece = &self.pieces[i];
        loop {
            let x = match piece.proposal {
                Proposal::Atom(x) => return x,
                Proposal::X { lo, hi, e } => power_law(lo, hi, e, rng.random()),
                Proposal::OneMinus { lo, hi, e } => 1.0 - power_law(1.0 - hi, 1.0 - lo, e, rng.random()),
            };
            if piece.accept_exponent == 0.0 {
                return x;
            }
            let g = match piece.proposal {
                Proposal::X { .. } => (1.0 - x).powf(piece.accept_exponent),
                _ => x.powf(piece.accept_exponent),
            };
            if rng.random::<f64>() * piece.accept_sup <= g {
                return x;
            }
        }
    }
}

impl Piece {
    fn range(&self) -> (f64, f64) {
        match self.proposal {
            Proposal::Atom(x) => (x, x),
            Proposal::X { lo, hi, .. } | Proposal::OneMinus { lo, hi, .. } => (lo, hi),
        }
    }
}

/// Pieces for `x^{p-3} (1-x)^{q-1}` on `[x_min, 1]`: left of 1/2 the power of
/// `x` is the proposal, right of it the power of `1 - x`. Each piece is narrow
/// enough that the acceptance factor varies by at most 2.
fn beta_pieces(p: f64, q: f64, x_min: f64) -> Vec<Piece> {
    let mut out = Vec::new();
    if x_min < 0.5 {
        let (ua, ub) = ((-x_min).ln_1p(), 0.5f64.ln());
        let m = ((q - 1.0).abs() * (ua - ub) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
        let xs: Vec<f64> = (0..=m)
            .map(|i| match i {
                0 => x_min,
                i if i == m => 0.5,
                i => -(ua + (ub - ua) * i as f64 / m as f64).exp_m1(),
            })
            .collect();
        for w in xs.windows(2) {
            let sup = if q >= 1.0 { (1.0 - w[0]).powf(q - 1.0) } else { (1.0 - w[1]).powf(q - 1.0) };
            out.push(Piece {
                proposal: Proposal::X { lo: w[0], hi: w[1], e: p - 3.0 },
                accept_exponent: q - 1.0,
                accept_sup: sup,
            });
        }
    }
    let a = x_min.max(0.5);
    let la = a.ln();
    let m = ((p - 3.0).abs() * (-la) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=m)
        .map(|i| match i {
            0 => a,
            i if i == m => 1.0,
            i => (la * (1.0 - i as f64 / m as f64)).exp(),
        })
        .collect();
    for w in xs.windows(2) {
        let sup = if p >= 3.0 { w[1].powf(p - 3.0) } else { w[0].powf(p - 3.0) };
        out.push(Piece {
            proposal: Proposal::OneMinus { lo: w[0], hi: w[1], e: q - 1.0 },
            accept_exponent: p - 3.0,
            accept_sup: sup,
        });
    }
    out
}

fn decade_points(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut x = 10f64.powf(lo.log10().floor() + 1.0);
    while x < hi {
        pts.push(x);
        x *= 10.0;
    }
    pts.push(hi);
    pts
}

/// Inverse-CDF draw from the density `∝ x^e` on `[lo, hi]`.
fn power_law(lo: f64, hi: f64, e: f64, u: f64) -> f64 {
    let x = if (e + 1.0).abs() < 1e-12 {
        lo * (u * (hi / lo).ln()).exp()
    } else {
        let (a, b) = (lo.powf(e + 1.0), hi.powf(e + 1.0));
        (a + u * (b - a)).powf(1.0 / (e + 1.0))
    };
    x.clamp(lo, hi)
}

/// A cutoff below which Λ has no mass apart from an atom at 0, when one
/// exists.
pub(crate) fn lossless_cutoff(measure: &LambdaMeasure) -> Option<f64> {
    let mut s = f64::INFINITY;
    for a in measure.atoms() {
        if a.location > 0.0 {
            s = s.min(a.location);
        }
    }
    for wd in measure.densities() {
        match wd.density {
            Density::Uniform { lo, .. } if lo > 0.0 => s = s.min(lo),
            _ => return None,
        }
    }
    Some(if s.is_finite() { s } else { 0.5 })
}

/// Default Poisson cutoff for `n` lines up to `horizon` (unit time when the
/// horizon is infinite): the largest `x_min` with
/// `C(n,2) Λ((0, x_min)) · horizon ≤` [`MISSED_MERGER_BUDGET`], or the bottom
/// of the support when Λ has none near 0. `None` when no cutoff down to
/// `1e-15` meets the budget.
pub fn default_x_min(measure: &LambdaMeasure, n: usize, horizon: Option<f64>) -> Result<Option<f64>> {
    if let Some(s) = lossless_cutoff(measure) {
        return Ok(Some(s));
    }
    let h = match horizon {
        Some(h) if h.is_finite() && h > 0.0 => h,
        _ => 1.0,
    };
    let pairs = (n as f64) * (n as f64 - 1.0) / 2.0;
    if pairs == 0.0 {
        return Ok(Some(0.5));
    }
    let target = MISSED_MERGER_BUDGET / (pairs * h);
    let (mut lo, mut hi) = (1e-15f64.ln(), 0.5f64.ln());
    if measure.mass_in_open(lo.exp())? > target {
        return Ok(None);
    }
    if measure.mass_in_open(hi.exp())? <= target {
        return Ok(Some(hi.exp()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if measure.mass_in_open(mid.exp())? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo.exp()))
}

pub fn simulate_poisson(measure: &LambdaMeasure, cfg: &SimConfig) -> Result<CoalescentHistory> {
    let cfg = cfg.clone().with_scheme(Scheme::Poisson);
    super::Simulator::new(measure, &cfg)?.run(cfg.seed)
}

/// Kernel for the default or requested cutoff, or the reason the Poisson
/// scheme should not be used.
pub(crate) fn prepare(measure: &LambdaMeasure, cfg: &SimConfig) -> Result<std::result::Result<PoissonKernel, String>> {
    let x_min = match cfg.x_min {
        Some(x) => x,
        None => match default_x_min(measure, cfg.n, cfg.horizon)? {
            Some(x) => x,
            None => return Ok(Err("no cutoff meets the missed-merger budget".into())),
        },
    };
    let kernel = PoissonKernel::new(measure, x_min)?;
    if cfg.x_min.is_none() {
        let h = match cfg.horizon {
            Some(h) if h.is_finite() => h,
            _ => 1.0,
        };
        if kernel.intensity() * h > POINT_BUDGET {
            return Ok(Err(format!(
                "cutoff {x_min:e} implies about {:.3e} Poisson points",
                kernel.intensity() * h
            )));
        }
    }
    Ok(Ok(kernel))
}

/// Poisson-construction run with a prebuilt kernel; `cfg.x_min` is ignored
/// in favour of the kernel's cutoff.
pub fn simulate_poisson_with(kernel: &PoissonKernel, cfg: &SimConfig) -> Result<CoalescentHistory> {
    cfg.validate()?;
    let horizon = cfg.horizon_value();
    let mut rng = rng_from_seed(cfg.seed);
    let mut alive: Vec<usize> = (0..cfg.n).collect();
    let mut events = Vec::new();
    let mut next_id = cfg.n;
    let mut t = 0.0;
    let mut missed = 0.0;
    let (mut points, mut pairs_fired) = (0u64, 0u64);
    let rho = kernel.intensity();
    let mut marked = Vec::new();
    while alive.len() >= 2 {
        let b = alive.len();
        let pairs = (b * (b - 1) / 2) as f64;
        let king = kernel.kingman_mass * pairs;
        let total = king + rho;
        if !(total > 0.0) {
            return Err(Error::ZeroMeasure);
        }
        let wait: f64 = Exp1.sample(&mut rng);
        let t_next = t + wait / total;
        missed += pairs * kernel.missed_mass * (t_next.min(horizon) - t);
        if t_next > horizon {
            break;
        }
        t = t_next;
        marked.clear();
        if rng.random::<f64>() * total < king {
            pairs_fired += 1;
            let i = rng.random_range(0..b);
            let mut j = rng.random_range(0..b - 1);
            if j >= i {
                j += 1;
            }
            marked.extend([i.min(j), i.max(j)]);
        } else {
            points += 1;
            let x = kernel.sample_x(&mut rng);
            mark_blocks(b, x, &mut rng, &mut marked);
            if marked.len() < 2 {
                continue;
            }
        }
        let mut merged: Vec<usize> = marked.iter().rev().map(|&i| alive.swap_remove(i)).collect();
        merged.sort_unstable();
        alive.push(next_id);
        events.push(MergeEvent {
            time: t,
            merged,
            new_block: next_id,
        });
        next_id += 1;
    }
    let mut metadata = SimMetadata::exact(cfg.scheme);
    metadata.x_min = Some(kernel.x_min);
    metadata.missed_merger_bound = missed;
    metadata.poisson_points = points;
    metadata.kingman_events = pairs_fired;
    if kernel.kingman_mass > 0.0 {
        metadata.kingman_superposition = true;
        metadata.notes.push(format!(
            "atom at 0 of mass {} simulated as a superposed Kingman component",
            kernel.kingman_mass
        ));
    }
    Ok(CoalescentHistory {
        n: cfg.n,
        seed: cfg.seed,
        scheme: Scheme::Poisson,
        horizon: cfg.horizon,
        events,
        metadata,
    }
    .finish())
}

/// Ascending positions among `b` blocks, each included independently with
/// probability `x`, drawn by geometric skips.
fn mark_blocks(b: usize, x: f64, rng: &mut SimRng, out: &mut Vec<usize>) {
    if x >= 1.0 {
        out.extend(0..b);
        return;
    }
    let log_miss = (-x).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_miss).floor();
        if skip >= (b - pos) as f64 {
            return;
        }
        pos += skip as usize;
        out.push(pos);
        pos += 1;
        if pos >= b {
            return;
        }
    }
}

#[cfg(test)]
pub(crate) fn mark_blocks_for_test(b: usize, x: f64, rng: &mut SimRng) -> Vec<usize> {
    let mut out = Vec::new();
    mark_blocks(b, x, rng, &mut out);
    out
}
