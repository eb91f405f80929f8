//! Finite measures Λ on `[0, 1]` and integrals against them.
//!
//! A measure is a finite list of atoms plus weighted densities from a small
//! closed family (uniform, beta, power). The family is closed under the
//! merger-rate integrals, so `λ_{b,k}` has an exact path for every component;
//! everything else goes through adaptive quadrature with endpoint
//! singularities removed by a power substitution.
//!
//! Textual specs follow this grammar:
//!
//! ```text
//! measure   = term { "+" term } ;
//! term      = [ number "*" ] component ;
//! component = "kingman" | "bolthausen-sznitman"
//!           | "beta:" number "," number
//!           | "atom:" number "," number        (* location, mass *)
//!           | "uniform:" number "," number     (* lo, hi; weight 1 *)
//!           | "power:" number ;                (* exponent γ > -1; weight 1 *)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::special::{binomial, binomial_pmf_row, ln_beta};

/// Below this block count merger weights use exact binomial coefficients.
pub const LOG_SPACE_THRESHOLD: usize = 60;

/// Largest substitution exponent used to flatten an endpoint singularity.
const MAX_SUBSTITUTION_POWER: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Probability densities on a subinterval of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `Beta(p, q)`, normalized.
    Beta { p: f64, q: f64 },
    /// `(γ + 1) x^γ` on `(0, 1]`.
    Power { exponent: f64 },
}

impl Density {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Density::Uniform { lo, hi } => (lo, hi),
            _ => (0.0, 1.0),
        }
    }

    /// Shape parameters when the density is a member of the beta family on
    /// all of `[0, 1]`.
    pub fn beta_shape(&self) -> Option<(f64, f64)> {
        match *self {
            Density::Uniform { lo, hi } if lo == 0.0 && hi == 1.0 => Some((1.0, 1.0)),
            Density::Uniform { .. } => None,
            Density::Beta { p, q } => Some((p, q)),
            Density::Power { exponent } => Some((exponent + 1.0, 1.0)),
        }
    }

    /// Density at `x`, with `one_minus_x` supplied separately so points close
    /// to 1 keep their precision.
    fn pdf_split(&self, x: f64, one_minus_x: f64) -> f64 {
        match *self {
            Density::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            _ => {
                let (p, q) = self.beta_shape().expect("beta-family density");
                if x <= 0.0 || one_minus_x <= 0.0 {
                    return 0.0;
                }
                ((p - 1.0) * x.ln() + (q - 1.0) * one_minus_x.ln() - ln_beta(p, q)).exp()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.pdf_split(x, 1.0 - x)
    }

    /// Exponent of the density's power behaviour at the lower/upper end of
    /// its support.
    fn end_orders(&self) -> (f64, f64) {
        match self.beta_shape() {
            Some((p, q)) => (p - 1.0, q - 1.0),
            None => (0.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Density::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
                    return Err(Error::Validation(format!(
                        "uniform support [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
                    )));
                }
            }
            Density::Beta { p, q } => {
                if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
                    return Err(Error::Validation(format!(
                        "beta shape parameters ({p}, {q}) must be positive"
                    )));
                }
            }
            Density::Power { exponent } => {
                if !(exponent.is_finite() && exponent > -1.0) {
                    return Err(Error::Validation(format!(
                        "power exponent {exponent} must exceed -1"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedDensity {
    pub weight: f64,
    pub density: Density,
}

/// How an integrand behaves as `x -> 0`: like `x^order`, with `limit` the
/// value at 0 when `order >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroBehavior {
    pub order: f64,
    pub limit: Option<f64>,
}

impl ZeroBehavior {
    pub fn regular(limit: f64) -> Self {
        Self {
            order: 0.0,
            limit: Some(limit),
        }
    }

    pub fn singular(order: f64) -> Self {
        Self { order, limit: None }
    }
}

/// A finite measure on `[0, 1]` without an atom at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaMeasure {
    atoms: Vec<Atom>,
    densities: Vec<WeightedDensity>,
}

impl LambdaMeasure {
    pub fn new(atoms: Vec<Atom>, densities: Vec<WeightedDensity>) -> Result<Self> {
        for a in &atoms {
            if !(a.location.is_finite() && (0.0..=1.0).contains(&a.location)) {
                return Err(Error::Validation(format!(
                    "atom location {} outside [0, 1]",
                    a.location
                )));
            }
            if a.location == 1.0 {
                return Err(Error::Validation("atoms at 1 are not supported".into()));
            }
            if !(a.mass.is_finite() && a.mass > 0.0) {
                return Err(Error::Validation(format!("atom mass {} must be positive", a.mass)));
            }
        }
        for d in &densities {
            if !(d.weight.is_finite() && d.weight > 0.0) {
                return Err(Error::Validation(format!(
                    "density weight {} must be positive",
                    d.weight
                )));
            }
            d.density.validate()?;
        }
        let m = Self { atoms, densities };
        let total = m.total_mass();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Validation("total mass must be positive and finite".into()));
        }
        Ok(m)
    }

    /// `δ_0`.
    pub fn kingman() -> Self {
        Self {
            atoms: vec![Atom {
                location: 0.0,
                mass: 1.0,
            }],
            densities: vec![],
        }
    }

    /// Uniform on `[0, 1]`.
    pub fn bolthausen_sznitman() -> Self {
        Self::uniform(0.0, 1.0).expect("valid support")
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            vec![],
            vec![WeightedDensity {
                weight: 1.0,
                density: Density::Uniform { lo, hi },
            }],
        )
    }

    pub fn beta(p: f64, q: f64) -> Result<Self> {
        Self::new(
            vec![],
            vec![WeightedDensity {
                weight: 1.0,
                density: Density::Beta { p, q },
            }],
        )
    }

    pub fn power(exponent: f64) -> Result<Self> {
        Self::new(
            vec![],
            vec![WeightedDensity {
                weight: 1.0,
                density: Density::Power { exponent },
            }],
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[WeightedDensity] {
        &self.densities
    }

    /// `c Λ` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {c} must be positive")));
        }
        Ok(Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location,
                    mass: a.mass * c,
                })
                .collect(),
            densities: self
                .densities
                .iter()
                .map(|d| WeightedDensity {
                    weight: d.weight * c,
                    density: d.density,
                })
                .collect(),
        })
    }

    /// `Λ + other`.
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.atoms.extend_from_slice(&other.atoms);
        out.densities.extend_from_slice(&other.densities);
        out
    }

    /// `Λ([0, 1])`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.densities.iter().map(|d| d.weight).sum::<f64>()
    }

    /// `Λ({0})`.
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location == 0.0)
            .map(|a| a.mass)
            .sum()
    }

    /// Λ with its atom at 0 removed; `None` when nothing else remains.
    pub fn without_zero_atom(&self) -> Option<Self> {
        let atoms: Vec<_> = self.atoms.iter().copied().filter(|a| a.location > 0.0).collect();
        if atoms.is_empty() && self.densities.is_empty() {
            None
        } else {
            Some(Self {
                atoms,
                densities: self.densities.clone(),
            })
        }
    }

    /// `Λ((0, x))`, excluding any atom at 0.
    pub fn mass_in_open(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location > 0.0 && a.location < x)
            .map(|a| a.mass)
            .sum();
        let mut dens = 0.0;
        for d in &self.densities {
            dens += d.weight
                * density_integral(&d.density, &|_| 1.0, 0.0, 0.0, x.min(1.0), &[], &QuadOptions::default())?;
        }
        Ok(atoms + dens)
    }

    /// `∫ f dΛ` with default quadrature options.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, zero: ZeroBehavior) -> Result<f64> {
        self.integrate_over(f, zero, 0.0, 1.0, &[], &QuadOptions::default())
    }

    /// `∫_{[lo, hi]} f dΛ`.
    ///
    /// Atoms are evaluated exactly; an atom at 0 uses `zero.limit` and is
    /// rejected when `zero.order < 0`. Continuous parts are integrated
    /// adaptively, seeded with `breakpoints`.
    pub fn integrate_over<F: Fn(f64) -> f64>(
        &self,
        f: F,
        zero: ZeroBehavior,
        lo: f64,
        hi: f64,
        breakpoints: &[f64],
        opts: &QuadOptions,
    ) -> Result<f64> {
        let mut total = 0.0;
        for a in &self.atoms {
            if a.location < lo || a.location > hi {
                continue;
            }
            if a.location == 0.0 {
                if zero.order < 0.0 {
                    return Err(Error::NonIntegrable(format!(
                        "integrand of order x^{} at 0 against an atom at 0",
                        zero.order
                    )));
                }
                let limit = zero.limit.ok_or_else(|| {
                    Error::InvalidArgument("integrand value at 0 required for an atom at 0".into())
                })?;
                total += a.mass * limit;
            } else {
                total += a.mass * f(a.location);
            }
        }
        Ok(total + self.integrate_continuous_over(&f, zero.order, lo, hi, breakpoints, opts)?)
    }

    /// The density part of [`integrate_over`](Self::integrate_over); atoms
    /// are ignored.
    pub fn integrate_continuous_over<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        zero_order: f64,
        lo: f64,
        hi: f64,
        breakpoints: &[f64],
        opts: &QuadOptions,
    ) -> Result<f64> {
        let mut total = 0.0;
        for d in &self.densities {
            total += d.weight * density_integral(&d.density, f, zero_order, lo, hi, breakpoints, opts)?;
        }
        Ok(total)
    }

    /// `λ_{b,k} = ∫ x^{k-2} (1-x)^{b-k} Λ(dx)` by the exact path of each
    /// component.
    pub fn lambda_bk(&self, b: usize, k: usize) -> f64 {
        assert!(2 <= k && k <= b, "need 2 <= k <= b, got b={b} k={k}");
        let mut total = 0.0;
        for a in &self.atoms {
            total += a.mass * atom_kernel(a.location, b, k);
        }
        for d in &self.densities {
            total += d.weight * density_lambda(&d.density, b, k);
        }
        total
    }

    /// `λ_{b,k}` for `k = 0..=b` (entries 0 and 1 are zero).
    pub fn lambda_row(&self, b: usize) -> Vec<f64> {
        let mut row = vec![0.0; b + 1];
        if b < 2 {
            return row;
        }
        for a in &self.atoms {
            for (k, r) in row.iter_mut().enumerate().skip(2) {
                *r += a.mass * atom_kernel(a.location, b, k);
            }
        }
        let bf = b as f64;
        for d in &self.densities {
            match d.density.beta_shape() {
                Some((p, q)) => {
                    let norm = ln_beta(p, q);
                    for (k, r) in row.iter_mut().enumerate().skip(2) {
                        let kf = k as f64;
                        *r += d.weight * (ln_beta(p + kf - 2.0, q + bf - kf) - norm).exp();
                    }
                }
                None => {
                    let Density::Uniform { lo, hi } = d.density else {
                        unreachable!("non-beta densities are partial uniforms")
                    };
                    let diffs = uniform_tail_differences(b, lo, hi);
                    for (k, r) in row.iter_mut().enumerate().skip(2) {
                        let kf = k as f64;
                        *r += d.weight * ln_beta(kf - 1.0, bf - kf + 1.0).exp() * diffs[k] / (hi - lo);
                    }
                }
            }
        }
        row
    }

    /// `λ_{b,k}` by quadrature of the kernel against every component.
    pub fn lambda_bk_quadrature(&self, b: usize, k: usize) -> Result<f64> {
        assert!(2 <= k && k <= b, "need 2 <= k <= b, got b={b} k={k}");
        let limit = if k == 2 { 1.0 } else { 0.0 };
        let mut points = Vec::new();
        if b > 2 {
            let mode = (k - 2) as f64 / (b - 2) as f64;
            let spread = (mode * (1.0 - mode) / b as f64).sqrt().max(1.0 / b as f64);
            for s in [-4.0, -1.0, 0.0, 1.0, 4.0] {
                let x = mode + s * spread;
                if x > 0.0 && x < 1.0 {
                    points.push(x);
                }
            }
        }
        self.integrate_over(
            |x| kernel(x, b, k),
            ZeroBehavior::regular(limit),
            0.0,
            1.0,
            &points,
            &QuadOptions::default(),
        )
    }

    /// Merger weights `C(b, k) λ_{b,k}` for `k = 0..=b` (entries 0 and 1 are
    /// zero).
    ///
    /// Up to [`LOG_SPACE_THRESHOLD`] blocks this multiplies exact binomial
    /// coefficients into the closed-form rates. Beyond it each component is
    /// handled so that no huge coefficient meets a tiny rate: atoms through
    /// binomial probabilities, beta densities through a ratio recurrence in
    /// `k`, partial uniforms through binomial tail differences.
    pub fn merger_weights(&self, b: usize) -> Vec<f64> {
        let mut w = vec![0.0; b + 1];
        if b < 2 {
            return w;
        }
        if b <= LOG_SPACE_THRESHOLD {
            for (k, wk) in w.iter_mut().enumerate().skip(2) {
                *wk = binomial(b as u64, k as u64) * self.lambda_bk(b, k);
            }
            return w;
        }
        for a in &self.atoms {
            if a.location == 0.0 {
                w[2] += a.mass * binomial(b as u64, 2);
                continue;
            }
            let pmf = binomial_pmf_row(b as u64, a.location);
            let scale = a.mass / (a.location * a.location);
            for k in 2..=b {
                w[k] += scale * pmf[k];
            }
        }
        for d in &self.densities {
            match d.density.beta_shape() {
                Some((p, q)) => {
                    let bf = b as f64;
                    let mut term =
                        0.5 * bf * (bf - 1.0) * (ln_beta(p, q + bf - 2.0) - ln_beta(p, q)).exp();
                    w[2] += d.weight * term;
                    for k in 2..b {
                        let kf = k as f64;
                        term *= (bf - kf) / (kf + 1.0) * (p + kf - 2.0) / (q + bf - kf - 1.0);
                        w[k + 1] += d.weight * term;
                    }
                }
                None => {
                    let Density::Uniform { lo, hi } = d.density else {
                        unreachable!("non-beta densities are partial uniforms")
                    };
                    let diffs = uniform_tail_differences(b, lo, hi);
                    let bf = b as f64;
                    for k in 2..=b {
                        let kf = k as f64;
                        w[k] += d.weight * bf / (kf * (kf - 1.0)) * diffs[k] / (hi - lo);
                    }
                }
            }
        }
        w
    }
}

/// `x^{k-2} (1-x)^{b-k}`, including its limit at 0.
fn kernel(x: f64, b: usize, k: usize) -> f64 {
    if x == 0.0 {
        return if k == 2 { 1.0 } else { 0.0 };
    }
    if b <= LOG_SPACE_THRESHOLD {
        x.powi((k - 2) as i32) * (1.0 - x).powi((b - k) as i32)
    } else {
        ((k - 2) as f64 * x.ln() + (b - k) as f64 * (-x).ln_1p()).exp()
    }
}

fn atom_kernel(location: f64, b: usize, k: usize) -> f64 {
    kernel(location, b, k)
}

fn density_lambda(d: &Density, b: usize, k: usize) -> f64 {
    let (bf, kf) = (b as f64, k as f64);
    match d.beta_shape() {
        Some((p, q)) => (ln_beta(p + kf - 2.0, q + bf - kf) - ln_beta(p, q)).exp(),
        None => {
            let Density::Uniform { lo, hi } = *d else {
                unreachable!("non-beta densities are partial uniforms")
            };
            let diffs = uniform_tail_differences(b, lo, hi);
            ln_beta(kf - 1.0, bf - kf + 1.0).exp() * diffs[k] / (hi - lo)
        }
    }
}

/// For `k = 2..=b`, `I_hi(k-1, b-k+1) - I_lo(k-1, b-k+1)`, i.e. the
/// difference of `P(Bin(b-1, x) >= k-1)` at `x = hi` and `x = lo`.
fn uniform_tail_differences(b: usize, lo: f64, hi: f64) -> Vec<f64> {
    let trials = (b - 1) as u64;
    let tails = |x: f64| {
        let pmf = binomial_pmf_row(trials, x);
        let n = pmf.len();
        // upper[j] = P(X >= j), lower[j] = P(X <= j)
        let mut upper = vec![0.0; n + 1];
        for j in (0..n).rev() {
            upper[j] = upper[j + 1] + pmf[j];
        }
        let mut lower = vec![0.0; n];
        let mut acc = 0.0;
        for j in 0..n {
            acc += pmf[j];
            lower[j] = acc;
        }
        (upper, lower)
    };
    let (up_hi, low_hi) = tails(hi);
    let (up_lo, low_lo) = tails(lo);
    let mut out = vec![0.0; b + 1];
    for k in 2..=b {
        let j = k - 1;
        let d = if up_hi[j] <= 0.5 {
            up_hi[j] - up_lo[j]
        } else {
            low_lo[j - 1] - low_hi[j - 1]
        };
        out[k] = d.max(0.0);
    }
    out
}

/// `∫_{[lo, hi] ∩ supp} f(x) ρ(x) dx` for a normalized density `ρ`.
fn density_integral<F: Fn(f64) -> f64>(
    d: &Density,
    f: &F,
    zero_order: f64,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<f64> {
    let (s0, s1) = d.support();
    let a = lo.max(s0);
    let b = hi.min(s1);
    if a >= b {
        return Ok(0.0);
    }
    let (dens_lo, dens_hi) = d.end_orders();
    let left_order = if a == 0.0 { zero_order + dens_lo } else { 0.0 };
    let right_order = if b == 1.0 && s1 == 1.0 { dens_hi } else { 0.0 };
    if left_order <= -1.0 {
        return Err(Error::NonIntegrable(format!(
            "integrand behaves like x^{left_order} at 0 against the continuous part"
        )));
    }
    let mut points = vec![a];
    points.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() == 2 && (left_order < 0.0 || right_order < 0.0) {
        points.insert(1, 0.5 * (a + b));
    }
    let last = points.len() - 2;
    let mut total = 0.0;
    for (i, w) in points.windows(2).enumerate() {
        let (x0, x1) = (w[0], w[1]);
        let len = x1 - x0;
        let piece = if i == 0 && left_order < 0.0 {
            let m = (1.0 / (left_order + 1.0)).min(MAX_SUBSTITUTION_POWER);
            quadrature::integrate(
                |u: f64| {
                    let x = x0 + len * u.powf(m);
                    if x <= x0 || x >= x1 {
                        return 0.0;
                    }
                    f(x) * d.pdf(x) * len * m * u.powf(m - 1.0)
                },
                0.0,
                1.0,
                opts,
            )?
        } else if i == last && right_order < 0.0 {
            let m = (1.0 / (right_order + 1.0)).min(MAX_SUBSTITUTION_POWER);
            quadrature::integrate(
                |u: f64| {
                    let gap = len * u.powf(m);
                    let x = x1 - gap;
                    if x <= x0 || gap <= 0.0 {
                        return 0.0;
                    }
                    // x1 == 1 here, so the gap is exactly 1 - x.
                    f(x) * d.pdf_split(x, gap) * len * m * u.powf(m - 1.0)
                },
                0.0,
                1.0,
                opts,
            )?
        } else {
            quadrature::integrate(|x: f64| f(x) * d.pdf(x), x0, x1, opts)?
        };
        total += piece.value;
    }
    Ok(total)
}

/// Parsed form of a textual measure description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSpec(pub String);

impl MeasureSpec {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn parse(&self) -> Result<LambdaMeasure> {
        parse_measure(&self.0)
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse a textual measure description into a validated measure.
pub fn parse_measure(spec: &str) -> Result<LambdaMeasure> {
    let err = |reason: &str| Error::Parse {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Err(err("empty spec"));
    }
    let mut atoms = Vec::new();
    let mut densities = Vec::new();
    for term in trimmed.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(err("empty term"));
        }
        let (weight, component) = match term.split_once('*') {
            Some((w, c)) => (
                parse_number(w.trim()).ok_or_else(|| err(&format!("bad weight `{w}`")))?,
                c.trim(),
            ),
            None => (1.0, term),
        };
        let (name, args) = match component.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (component, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            vec![]
        } else {
            args.split(',')
                .map(|s| parse_number(s.trim()).ok_or_else(|| err(&format!("bad number `{s}`"))))
                .collect::<Result<_>>()?
        };
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(err(&format!("`{name}` takes {n} argument(s), got {}", nums.len())))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "kingman" => {
                arity(0)?;
                atoms.push(Atom {
                    location: 0.0,
                    mass: weight,
                });
            }
            "bolthausen-sznitman" | "bs" => {
                arity(0)?;
                densities.push(WeightedDensity {
                    weight,
                    density: Density::Uniform { lo: 0.0, hi: 1.0 },
                });
            }
            "beta" => {
                arity(2)?;
                densities.push(WeightedDensity {
                    weight,
                    density: Density::Beta {
                        p: nums[0],
                        q: nums[1],
                    },
                });
            }
            "uniform" => {
                arity(2)?;
                densities.push(WeightedDensity {
                    weight,
                    density: Density::Uniform {
                        lo: nums[0],
                        hi: nums[1],
                    },
                });
            }
            "power" => {
                arity(1)?;
                densities.push(WeightedDensity {
                    weight,
                    density: Density::Power { exponent: nums[0] },
                });
            }
            "atom" => {
                arity(2)?;
                atoms.push(Atom {
                    location: nums[0],
                    mass: weight * nums[1],
                });
            }
            other => return Err(err(&format!("unknown component `{other}`"))),
        }
    }
    LambdaMeasure::new(atoms, densities)
}

fn parse_number(s: &str) -> Option<f64> {
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        return Some(n / d);
    }
    s.parse().ok()
}

impl FromStr for LambdaMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_measure(s)
    }
}

impl fmt::Display for LambdaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for a in &self.atoms {
            parts.push(format!("atom:{},{}", a.location, a.mass));
        }
        for d in &self.densities {
            let body = match d.density {
                Density::Uniform { lo, hi } => format!("uniform:{lo},{hi}"),
                Density::Beta { p, q } => format!("beta:{p},{q}"),
                Density::Power { exponent } => format!("power:{exponent}"),
            };
            if d.weight == 1.0 {
                parts.push(body);
            } else {
                parts.push(format!("{}*{body}", d.weight));
            }
        }
        f.write_str(&parts.join("+"))
    }
}
