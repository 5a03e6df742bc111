//! Equilibrium ligand-receptor statistics.
//!
//! Concentrations are expressed in units of the dissociation constant `K_D`
//! unless a caller passes a different `k_d`. Receptors are independent and the
//! ligand concentration is stationary over the sampling window, so each
//! receptor contributes one bound-time draw per channel use.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::logspace::log_add_exp;

/// Unbinding rates (1/s) of the two ligand types sharing one receptor type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LigandPair {
    k1_off: f64,
    k2_off: f64,
}

impl LigandPair {
    pub fn new(k1_off: f64, k2_off: f64) -> Result<Self> {
        if !(k1_off.is_finite() && k1_off > 0.0 && k2_off.is_finite() && k2_off > 0.0) {
            return domain(format!("unbinding rates must be finite and positive, got {k1_off}, {k2_off}"));
        }
        Ok(LigandPair { k1_off, k2_off })
    }

    /// Pair with `k2_off = 1/s` and `k1_off = gamma`.
    pub fn from_similarity(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    pub fn k1_off(&self) -> f64 {
        self.k1_off
    }

    pub fn k2_off(&self) -> f64 {
        self.k2_off
    }

    /// Similarity parameter `gamma = k1_off / k2_off`.
    pub fn similarity(&self) -> f64 {
        self.k1_off / self.k2_off
    }

    /// The same physical pair with the ligand labels exchanged.
    pub fn swapped(&self) -> Self {
        LigandPair {
            k1_off: self.k2_off,
            k2_off: self.k1_off,
        }
    }

    /// Both rates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.k1_off * factor, self.k2_off * factor)
    }
}

/// Independent receptors observed by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceptorEnsemble {
    n_receptors: u64,
    k_d: f64,
    kpr_threshold: f64,
}

/// Proportionality constant of the default proofreading threshold `nu / k1_off`.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 3.0;

impl ReceptorEnsemble {
    pub fn new(n_receptors: u64, k_d: f64, kpr_threshold: f64) -> Result<Self> {
        if n_receptors == 0 {
            return domain("receptor count must be at least 1");
        }
        if !(k_d.is_finite() && k_d > 0.0) {
            return domain(format!("dissociation constant must be finite and positive, got {k_d}"));
        }
        if !(kpr_threshold.is_finite() && kpr_threshold > 0.0) {
            return domain(format!("proofreading threshold must be finite and positive, got {kpr_threshold}"));
        }
        Ok(ReceptorEnsemble {
            n_receptors,
            k_d,
            kpr_threshold,
        })
    }

    /// `K_D = 1` and threshold `3 / k_off` of the low-affinity (faster
    /// unbinding) ligand, which is type 1 whenever `γ >= 1`.
    pub fn for_pair(pair: &LigandPair, n_receptors: u64) -> Result<Self> {
        let k_fast = pair.k1_off().max(pair.k2_off());
        Self::new(n_receptors, 1.0, DEFAULT_THRESHOLD_FACTOR / k_fast)
    }

    /// A CSK-only ensemble; the threshold is irrelevant and set to 1 s.
    pub fn with_dissociation_constant(n_receptors: u64, k_d: f64) -> Result<Self> {
        Self::new(n_receptors, k_d, 1.0)
    }

    pub fn n_receptors(&self) -> u64 {
        self.n_receptors
    }

    pub fn k_d(&self) -> f64 {
        self.k_d
    }

    pub fn kpr_threshold(&self) -> f64 {
        self.kpr_threshold
    }

    pub fn with_n_receptors(&self, n_receptors: u64) -> Result<Self> {
        Self::new(n_receptors, self.k_d, self.kpr_threshold)
    }

    pub fn with_threshold(&self, kpr_threshold: f64) -> Result<Self> {
        Self::new(self.n_receptors, self.k_d, kpr_threshold)
    }
}

/// Fraction `alpha = c1 / (c1 + c2)` of type-1 ligand.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RatioSymbol(f64);

impl RatioSymbol {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("concentration ratio must lie in [0, 1], got {alpha}"));
        }
        Ok(RatioSymbol(alpha))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The ratio of the type-2 ligand.
    pub fn complement(&self) -> Self {
        RatioSymbol(1.0 - self.0)
    }
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

impl SeedRecord {
    pub fn new(seed: u64) -> Self {
        SeedRecord { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        SeedRecord { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One bound-time duration (s) per receptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTimeSamples {
    durations: Vec<f64>,
    seed: Option<SeedRecord>,
}

impl BoundTimeSamples {
    /// Wrap externally observed durations; all must be finite and positive.
    pub fn from_durations(durations: Vec<f64>) -> Result<Self> {
        if let Some(bad) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return domain(format!("bound times must be finite and positive, got {bad}"));
        }
        Ok(BoundTimeSamples { durations, seed: None })
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn concat(&self, other: &BoundTimeSamples) -> BoundTimeSamples {
        let mut durations = self.durations.clone();
        durations.extend_from_slice(&other.durations);
        BoundTimeSamples { durations, seed: None }
    }
}

fn check_concentration(name: &str, c: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0) {
        return domain(format!("{name} must be finite and non-negative, got {c}"));
    }
    Ok(())
}

fn check_dissociation(name: &str, k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return domain(format!("{name} must be finite and positive, got {k}"));
    }
    Ok(())
}

/// Equilibrium probability `c / (c + K_D)` that a receptor is bound.
pub fn bound_probability_single(c: f64, k_d: f64) -> Result<f64> {
    check_concentration("concentration", c)?;
    check_dissociation("dissociation constant", k_d)?;
    Ok(c / (c + k_d))
}

/// Bound probability with two competing ligand types.
pub fn bound_probability_mixture(c1: f64, c2: f64, kd1: f64, kd2: f64) -> Result<f64> {
    check_concentration("c1", c1)?;
    check_concentration("c2", c2)?;
    check_dissociation("kd1", kd1)?;
    check_dissociation("kd2", kd2)?;
    let occupancy = c1 / kd1 + c2 / kd2;
    Ok(occupancy / (1.0 + occupancy))
}

/// Density of one bound time: `α k1 e^{-k1 τ} + (1-α) k2 e^{-k2 τ}`.
pub fn bound_time_pdf(tau: f64, alpha: RatioSymbol, pair: &LigandPair) -> Result<f64> {
    if !(tau >= 0.0) {
        return domain(format!("bound time must be non-negative, got {tau}"));
    }
    let a = alpha.value();
    let (k1, k2) = (pair.k1_off(), pair.k2_off());
    Ok(a * k1 * (-k1 * tau).exp() + (1.0 - a) * k2 * (-k2 * tau).exp())
}

/// `ln p(τ)` with the slower-decaying exponential factored out.
///
/// Writing `k_s <= k_f` for the slow and fast rates and `w_s, w_f` for their
/// weights, `ln p = ln k_s - k_s τ + ln(w_s + w_f (k_f/k_s) e^{-(k_f - k_s) τ})`.
/// This is algebraically the mixture density but never overflows and stays
/// finite for large τ even when one weight is zero. With `k1 > k2` it is the
/// familiar `k2 e^{-k2 τ} (1 - α + α γ e^{(1-γ) k2 τ})`.
pub fn ln_bound_time_pdf(tau: f64, alpha: RatioSymbol, pair: &LigandPair) -> f64 {
    let a = alpha.value();
    let (k1, k2) = (pair.k1_off(), pair.k2_off());
    let (k_slow, w_slow, k_fast, w_fast) = if k1 >= k2 {
        (k2, 1.0 - a, k1, a)
    } else {
        (k1, a, k2, 1.0 - a)
    };
    let fast_term = w_fast.ln() + (k_fast / k_slow).ln() - (k_fast - k_slow) * tau;
    k_slow.ln() - k_slow * tau + log_add_exp(w_slow.ln(), fast_term)
}

/// Log-likelihood `Σ_i ln p(τ_i | α)` of independent bound times.
pub fn log_likelihood(samples: &BoundTimeSamples, alpha: RatioSymbol, pair: &LigandPair) -> Result<f64> {
    if samples.is_empty() {
        return domain("log-likelihood needs at least one bound time");
    }
    Ok(samples
        .durations()
        .iter()
        .map(|&t| ln_bound_time_pdf(t, alpha, pair))
        .sum())
}

/// Draw one bound time per receptor from the two-ligand mixture.
pub fn sample_bound_times(
    alpha: RatioSymbol,
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
    seed: SeedRecord,
) -> BoundTimeSamples {
    let mut rng = seed.rng();
    let durations = sample_durations(alpha, pair, ensemble.n_receptors() as usize, &mut rng);
    BoundTimeSamples {
        durations,
        seed: Some(seed),
    }
}

pub(crate) fn sample_durations<R: Rng + ?Sized>(
    alpha: RatioSymbol,
    pair: &LigandPair,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    let a = alpha.value();
    (0..n)
        .map(|_| {
            let rate = if rng.random::<f64>() < a { pair.k1_off() } else { pair.k2_off() };
            loop {
                let e: f64 = Exp1.sample(rng);
                // Exp1 can return exactly 0 with vanishing probability.
                if e > 0.0 {
                    break e / rate;
                }
            }
        })
        .collect()
}
