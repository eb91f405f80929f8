//! Log-space special functions used by the rate computations.

use statrs::function::gamma::ln_gamma;

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `C(n, k)` as a float, computed by the multiplicative formula. Exact up to
/// rounding while the result stays below 2^53 and accurate to a few ulps
/// beyond that; intended for `n <= 60`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    // Exact integers below 2^53 survive the divisions up to rounding.
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Probability mass function of `Binomial(trials, p)` for every outcome
/// `0..=trials`.
///
/// Evaluated from the mode outwards by the ratio recurrence, so tails that
/// underflow do so gracefully instead of poisoning the bulk.
pub fn binomial_pmf_row(trials: u64, p: f64) -> Vec<f64> {
    let n = trials as usize;
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let mode = (((trials + 1) as f64 * p).floor() as usize).min(n);
    let ln_mode = ln_binomial(trials, mode as u64)
        + mode as f64 * p.ln()
        + (n - mode) as f64 * (-p).ln_1p();
    pmf[mode] = ln_mode.exp();
    let odds = p / (1.0 - p);
    for i in mode..n {
        pmf[i + 1] = pmf[i] * ((n - i) as f64 / (i + 1) as f64) * odds;
    }
    for i in (1..=mode).rev() {
        pmf[i - 1] = pmf[i] * (i as f64 / (n - i + 1) as f64) / odds;
    }
    pmf
}
