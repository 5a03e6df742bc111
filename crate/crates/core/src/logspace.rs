//! Log-domain helpers shared by the binomial Fisher sums and Blahut–Arimoto.

use statrs::function::gamma::ln_gamma;

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(x_i)`; `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Log pmf of `Binomial(n_trials, p)` over `k = 0..=n_trials`.
///
/// `q` must be `1 - p` computed by the caller in whatever way avoids
/// cancellation. The row is renormalised in log space so that it sums to one
/// to rounding, which absorbs the small constant error of `ln Γ` at large `n`.
pub fn binomial_log_pmf(n_trials: u64, p: f64, q: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
    let n = n_trials as f64;
    let ln_p = p.ln();
    let ln_q = q.ln();
    let ln_n_fact = ln_gamma(n + 1.0);
    let mut row: Vec<f64> = (0..=n_trials)
        .map(|k| {
            let k = k as f64;
            let ln_choose = ln_n_fact - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
            // 0 * ln(0) is taken as 0 so that p = 0 or q = 0 stay well defined.
            let a = if k == 0.0 { 0.0 } else { k * ln_p };
            let b = if k == n { 0.0 } else { (n - k) * ln_q };
            ln_choose + a + b
        })
        .collect();
    let z = log_sum_exp(&row);
    for v in &mut row {
        *v -= z;
    }
    row
}
