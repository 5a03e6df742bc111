use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binding::{BoundTimeSamples, LigandPair, RatioSymbol, ReceptorEnsemble, SeedRecord};
use crate::error::{domain, Result};
use crate::estimators::{count_long_bindings, kpr_ratio_estimate, ml_ratio_estimate};
use crate::fisher::{fisher_rsk_optimal, fisher_rsk_suboptimal};
use crate::quadrature::QuadSettings;

pub const BOOTSTRAP_RESAMPLES: usize = 400;

/// Stream reserved for bootstrap resampling; trial `i` uses stream `i`.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub mean: f64,
    pub empirical_var: f64,
    pub mse: f64,
    pub inverse_fisher: f64,
    /// `empirical_var / inverse_fisher`, i.e. `Var · I`.
    pub ratio: f64,
    /// 95% percentile-bootstrap interval on `ratio`.
    pub ratio_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbReport {
    pub alpha: f64,
    pub gamma: f64,
    pub n_receptors: u64,
    pub trials: usize,
    pub seed: u64,
    pub ml: EstimatorStats,
    pub kpr: EstimatorStats,
}

fn variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn stats(estimates: &[f64], truth: f64, fisher: f64, seed: u64) -> EstimatorStats {
    let (mean, empirical_var) = variance(estimates);
    let mse = estimates.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    let inverse_fisher = 1.0 / fisher;
    let mut rng = SeedRecord::with_stream(seed, BOOTSTRAP_STREAM).rng();
    let n = estimates.len();
    let mut ratios: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let resample: Vec<f64> = (0..n).map(|_| estimates[rng.random_range(0..n)]).collect();
            variance(&resample).1 * fisher
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let pick = |q: f64| ratios[((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize).min(BOOTSTRAP_RESAMPLES - 1)];
    EstimatorStats {
        mean,
        empirical_var,
        mse,
        inverse_fisher,
        ratio: empirical_var * fisher,
        ratio_ci: (pick(0.025), pick(0.975)),
    }
}

/// Monte-Carlo Cramér–Rao check of both ratio estimators.
///
/// Each trial draws one bound time per receptor from its own random stream
/// `(seed, trial)`, then feeds the same draws to the ML estimator and, after
/// thresholding, to the proofreading estimator. Results depend only on the
/// arguments, not on how trials are scheduled across threads.
pub fn crlb_experiment(
    alpha: RatioSymbol,
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
    trials: usize,
    seed: u64,
) -> Result<CrlbReport> {
    if trials < 100 {
        return domain(format!("a CRLB experiment needs at least 100 trials, got {trials}"));
    }
    let n = ensemble.n_receptors() as usize;
    let threshold = ensemble.kpr_threshold();
    let estimates = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeedRecord::with_stream(seed, i as u64).rng();
            let durations = crate::binding::sample_durations(alpha, pair, n, &mut rng);
            let samples = BoundTimeSamples::from_durations(durations)?;
            let ml = ml_ratio_estimate(&samples, pair)?.alpha_hat;
            let n_long = count_long_bindings(&samples, threshold)?;
            let kpr = kpr_ratio_estimate(n_long, ensemble, pair)?.alpha_hat;
            Ok((ml, kpr))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ml, kpr): (Vec<f64>, Vec<f64>) = estimates.into_iter().unzip();

    let quad = QuadSettings::new(1e-13, 1e-11)?;
    let i_opt = fisher_rsk_optimal(alpha, pair, ensemble.n_receptors(), &quad)?;
    let i_sub = fisher_rsk_suboptimal(alpha, pair, ensemble)?;
    Ok(CrlbReport {
        alpha: alpha.value(),
        gamma: pair.similarity(),
        n_receptors: ensemble.n_receptors(),
        trials,
        seed,
        ml: stats(&ml, alpha.value(), i_opt, seed),
        kpr: stats(&kpr, alpha.value(), i_sub, seed ^ 0x9e37_79b9_7f4a_7c15),
    })
}
