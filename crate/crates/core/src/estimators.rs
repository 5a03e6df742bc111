//! Receiver-side estimators of the transmitted symbol.

use serde::{Deserialize, Serialize};

use crate::binding::{log_likelihood, BoundTimeSamples, LigandPair, RatioSymbol, ReceptorEnsemble};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Maximum likelihood over the exact bound times.
    #[serde(rename = "ml")]
    Ml,
    /// Inversion of the long-binding count of a proofreading receiver.
    #[serde(rename = "kpr")]
    Kpr,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Ml => "ml",
            EstimatorKind::Kpr => "kpr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    /// Estimate clamped to `[0, 1]`.
    pub alpha_hat: f64,
    /// Estimate before clamping. Equals `alpha_hat` for ML.
    pub raw: f64,
    pub method: EstimatorKind,
    /// Log-likelihood at `alpha_hat` (ML only).
    pub log_likelihood_at_opt: Option<f64>,
}

const ML_TOLERANCE: f64 = 1e-12;
const ML_MAX_ITER: usize = 200;

/// Score and curvature of the log-likelihood in the normalised labelling
/// (`g_i = γ e^{(1-γ) k2 τ_i} <= γ`, `γ > 1`).
fn score(g: &[f64], a: f64) -> (f64, f64) {
    g.iter().fold((0.0, 0.0), |(d1, d2), &gi| {
        let r = (gi - 1.0) / (1.0 - a + a * gi);
        (d1 + r, d2 - r * r)
    })
}

/// Maximum-likelihood estimate of the ratio from exact bound times.
///
/// The log-likelihood is concave in `α`, so its derivative is monotone; the
/// maximiser on `[0, 1]` is either an endpoint (when the derivative does not
/// change sign) or the root of the derivative, found by safeguarded Newton.
pub fn ml_ratio_estimate(samples: &BoundTimeSamples, pair: &LigandPair) -> Result<RatioEstimate> {
    if samples.is_empty() {
        return domain("ML estimation needs at least one bound time");
    }
    let gamma = pair.similarity();
    if gamma == 1.0 {
        return Err(Error::Degenerate("identical unbinding rates leave the ratio unidentifiable".into()));
    }
    // Relabel so that type 1 is the faster-unbinding ligand; the estimate of
    // the relabelled ratio is then mapped back.
    let (norm, flipped) = if gamma < 1.0 { (pair.swapped(), true) } else { (*pair, false) };
    let g_ratio = norm.similarity();
    let k_slow = norm.k2_off();
    let g: Vec<f64> = samples
        .durations()
        .iter()
        .map(|&t| g_ratio * ((1.0 - g_ratio) * k_slow * t).exp())
        .collect();

    let a = if score(&g, 0.0).0 <= 0.0 {
        0.0
    } else if score(&g, 1.0).0 >= 0.0 {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut a = 0.5;
        for _ in 0..ML_MAX_ITER {
            let (d1, d2) = score(&g, a);
            if d1 > 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            let newton = a - d1 / d2;
            let next = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let step = (next - a).abs();
            a = next;
            if step < ML_TOLERANCE || hi - lo < ML_TOLERANCE {
                break;
            }
        }
        a
    };
    let alpha_hat = if flipped { 1.0 - a } else { a };
    let ll = log_likelihood(samples, RatioSymbol::new(alpha_hat)?, pair)?;
    Ok(RatioEstimate {
        alpha_hat,
        raw: alpha_hat,
        method: EstimatorKind::Ml,
        log_likelihood_at_opt: Some(ll),
    })
}

/// Number of bound times strictly longer than `threshold`.
///
/// A duration exactly equal to the threshold counts as short.
pub fn count_long_bindings(samples: &BoundTimeSamples, threshold: f64) -> Result<u64> {
    if !(threshold > 0.0) {
        return domain(format!("threshold must be positive, got {threshold}"));
    }
    Ok(samples.durations().iter().filter(|&&t| t > threshold).count() as u64)
}

/// Ratio estimate from a proofreading count, inverting the affine
/// `p_T(α) = α e^{-k1 T} + (1 - α) e^{-k2 T}` at `p_T = n_long / N_R`.
pub fn kpr_ratio_estimate(n_long: u64, ensemble: &ReceptorEnsemble, pair: &LigandPair) -> Result<RatioEstimate> {
    let n = ensemble.n_receptors();
    if n_long > n {
        return domain(format!("long-binding count {n_long} exceeds receptor count {n}"));
    }
    let t = ensemble.kpr_threshold();
    let p1 = (-pair.k1_off() * t).exp();
    let p0 = (-pair.k2_off() * t).exp();
    let slope = p1 - p0;
    if slope == 0.0 {
        return Err(Error::Degenerate("identical unbinding rates leave the ratio unidentifiable".into()));
    }
    let raw = (n_long as f64 / n as f64 - p0) / slope;
    Ok(RatioEstimate {
        alpha_hat: raw.clamp(0.0, 1.0),
        raw,
        method: EstimatorKind::Kpr,
        log_likelihood_at_opt: None,
    })
}

/// ML concentration from a bound-receptor count: `K_D n / (N_R - n)`;
/// `+∞` when every receptor is bound.
pub fn csk_concentration_estimate(n_bound: u64, ensemble: &ReceptorEnsemble) -> Result<f64> {
    let n = ensemble.n_receptors();
    if n_bound > n {
        return domain(format!("bound count {n_bound} exceeds receptor count {n}"));
    }
    if n_bound == n {
        return Ok(f64::INFINITY);
    }
    Ok(ensemble.k_d() * n_bound as f64 / (n - n_bound) as f64)
}
