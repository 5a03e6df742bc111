//! Fisher information of the three receivers about their input symbol.
//!
//! * RSK, optimal receiver: every receptor reports its exact bound time.
//! * RSK, kinetic-proofreading receiver: only the number of bound times longer
//!   than a threshold `T` is observed, a `Binomial(N_R, p_T(α))` count.
//! * CSK: the number of bound receptors, a `Binomial(N_R, p_B(c))` count.
//!
//! Divergent values at the ends of the RSK input range are returned as
//! `f64::INFINITY`; they are integrable once square-rooted.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binding::{LigandPair, RatioSymbol, ReceptorEnsemble};
use crate::error::{domain, Error, Result};
use crate::logspace::binomial_log_pmf;
use crate::quadrature::{integrate, QuadSettings};

/// Modulation scheme plus receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "rsk-opt")]
    RskOptimal,
    #[serde(rename = "rsk-sub")]
    RskSuboptimal,
    #[serde(rename = "csk")]
    Csk,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::RskOptimal, Scheme::RskSuboptimal, Scheme::Csk];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::RskOptimal => "rsk-opt",
            Scheme::RskSuboptimal => "rsk-sub",
            Scheme::Csk => "csk",
        }
    }

    pub fn is_rsk(&self) -> bool {
        !matches!(self, Scheme::Csk)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rsk-opt" => Ok(Scheme::RskOptimal),
            "rsk-sub" => Ok(Scheme::RskSuboptimal),
            "csk" => Ok(Scheme::Csk),
            other => domain(format!("unknown scheme '{other}' (expected rsk-opt, rsk-sub or csk)")),
        }
    }
}

/// How the binomial Fisher informations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumMode {
    /// `(∂p)^2 N / (p (1 - p))`.
    #[default]
    ClosedForm,
    /// The expectation written out term by term over all `N_R + 1` counts.
    LiteralSum,
}

/// Fisher information of the optimal RSK receiver at ratio `alpha`.
///
/// Evaluated as `N_R ∫_0^1 (γ u^{γ-1} - 1)^2 / (1 - α + α γ u^{γ-1}) du`, the
/// bound-time integral after substituting `u = e^{-k2 τ}`; it depends on the
/// rates only through `γ`. Pairs with `γ < 1` are relabelled first so the
/// integrand is bounded on `[0, 1)`. The value is `+∞` at `α = 0` for
/// `γ <= 1/2` and at `α = 1` for `γ >= 2`.
pub fn fisher_rsk_optimal(
    alpha: RatioSymbol,
    pair: &LigandPair,
    n_receptors: u64,
    quad: &QuadSettings,
) -> Result<f64> {
    let a = alpha.value();
    rsk_optimal_split(a, 1.0 - a, pair, n_receptors, quad)
}

/// As [`fisher_rsk_optimal`] with `α` given together with `1 - α`, so that
/// ratios within an ulp of 1 keep their distance from the endpoint.
fn rsk_optimal_split(a: f64, a_comp: f64, pair: &LigandPair, n_receptors: u64, quad: &QuadSettings) -> Result<f64> {
    let gamma = pair.similarity();
    if gamma == 1.0 {
        return Ok(0.0);
    }
    let (a, a_comp, g) = if gamma < 1.0 {
        (a_comp, a, 1.0 / gamma)
    } else {
        (a, a_comp, gamma)
    };
    if a_comp == 0.0 && g >= 2.0 {
        return Ok(f64::INFINITY);
    }
    // Integrand as a function of ln u.
    let h = |ln_u: f64| {
        let x = (g - 1.0) * ln_u;
        // γ u^{γ-1} - 1 without cancellation as γ -> 1.
        let num = g * x.exp_m1() + (g - 1.0);
        num * num / (a_comp + a * g * x.exp())
    };
    // The two denominator terms cross at u0. Close to α = 1 the integrand is
    // a plateau of height 1/(1-α) on [0, u0] followed by a power-law decay
    // over many decades, which is integrated in t = -ln u.
    let ln_u0 = (a_comp.ln() - (a * g).ln()) / (g - 1.0);
    let per_receptor = if ln_u0 < 0.0 && ln_u0.exp() > 0.0 {
        let plateau = integrate(|u| Ok(h(u.ln())), 0.0, ln_u0.exp(), quad)?;
        let decay = integrate(|t| Ok(h(-t) * (-t).exp()), 0.0, -ln_u0, quad)?;
        plateau.value + decay.value
    } else {
        integrate(|u| Ok(h(u.ln())), 0.0, 1.0, quad)?.value
    };
    Ok(n_receptors as f64 * per_receptor)
}

/// Probability `p_T = α e^{-k1 T} + (1 - α) e^{-k2 T}` that a bound time
/// exceeds the proofreading threshold.
pub fn p_long_binding(alpha: RatioSymbol, pair: &LigandPair, threshold: f64) -> Result<f64> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return domain(format!("threshold must be finite and positive, got {threshold}"));
    }
    let a = alpha.value();
    Ok(a * (-pair.k1_off() * threshold).exp() + (1.0 - a) * (-pair.k2_off() * threshold).exp())
}

/// `(p_T, 1 - p_T, ∂p_T/∂α)` with `1 - p_T` formed without cancellation.
fn long_binding_terms(alpha: RatioSymbol, pair: &LigandPair, threshold: f64) -> Result<(f64, f64, f64)> {
    let p = p_long_binding(alpha, pair, threshold)?;
    let a = alpha.value();
    let x1 = -pair.k1_off() * threshold;
    let x2 = -pair.k2_off() * threshold;
    let q = -(a * x1.exp_m1() + (1.0 - a) * x2.exp_m1());
    Ok((p, q, x1.exp() - x2.exp()))
}

/// Expected binomial curvature `Σ_n [n/p² + (N-n)/q²] Bin(n; N, p)`.
fn binomial_curvature_sum(n: u64, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    binomial_log_pmf(n, p, q)
        .into_iter()
        .enumerate()
        .map(|(k, lp)| {
            let k = k as f64;
            (k / (p * p) + (nf - k) / (q * q)) * lp.exp()
        })
        .sum()
}

/// Fisher information of the kinetic-proofreading RSK receiver.
pub fn fisher_rsk_suboptimal(alpha: RatioSymbol, pair: &LigandPair, ensemble: &ReceptorEnsemble) -> Result<f64> {
    fisher_rsk_suboptimal_with(alpha, pair, ensemble, SumMode::ClosedForm)
}

pub fn fisher_rsk_suboptimal_with(
    alpha: RatioSymbol,
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
    mode: SumMode,
) -> Result<f64> {
    let (p, q, slope) = long_binding_terms(alpha, pair, ensemble.kpr_threshold())?;
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Degenerate(format!(
            "long-binding probability {p} leaves no uncertainty in the count"
        )));
    }
    let n = ensemble.n_receptors();
    Ok(match mode {
        SumMode::ClosedForm => slope * slope * n as f64 / (p * q),
        SumMode::LiteralSum => slope * slope * binomial_curvature_sum(n, p, q),
    })
}

/// Fisher information of the CSK receiver about the concentration `c`.
pub fn fisher_csk(c: f64, ensemble: &ReceptorEnsemble) -> Result<f64> {
    fisher_csk_with(c, ensemble, SumMode::ClosedForm)
}

pub fn fisher_csk_with(c: f64, ensemble: &ReceptorEnsemble, mode: SumMode) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return domain(format!("CSK Fisher information needs a finite positive concentration, got {c}"));
    }
    let kd = ensemble.k_d();
    let n = ensemble.n_receptors();
    let s = c + kd;
    match mode {
        SumMode::ClosedForm => Ok(n as f64 * kd / (c * s * s)),
        SumMode::LiteralSum => {
            let p = c / s;
            let q = kd / s;
            let dp = kd / (s * s);
            let d2p = -2.0 * kd / (s * s * s);
            let nf = n as f64;
            let total: f64 = binomial_log_pmf(n, p, q)
                .into_iter()
                .enumerate()
                .map(|(k, lp)| {
                    let k = k as f64;
                    let score = k / p - (nf - k) / q;
                    let curvature = k / (p * p) + (nf - k) / (q * q);
                    (d2p * score - dp * dp * curvature) * lp.exp()
                })
                .sum();
            Ok(-total)
        }
    }
}

/// A Fisher information as a function of the scalar channel input.
pub trait FisherModel: Sync {
    fn scheme(&self) -> Scheme;

    /// Input range `[lo, hi]`; `hi` may be `+∞` for CSK without a cap.
    fn domain(&self) -> (f64, f64);

    fn fisher(&self, x: f64) -> Result<f64>;

    /// Fisher information at `hi - y` for `0 < y`, for finite domains.
    ///
    /// Models whose information is singular at the upper end override this
    /// to avoid forming `hi - y` in floating point.
    fn fisher_reflected(&self, y: f64) -> Result<f64> {
        self.fisher(self.domain().1 - y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RskOptimal {
    pub pair: LigandPair,
    pub n_receptors: u64,
    pub quad: QuadSettings,
}

#[derive(Debug, Clone, Copy)]
pub struct RskSuboptimal {
    pub pair: LigandPair,
    pub ensemble: ReceptorEnsemble,
}

/// CSK with received concentrations limited to `(0, c_max]`.
#[derive(Debug, Clone, Copy)]
pub struct Csk {
    pub ensemble: ReceptorEnsemble,
    pub c_max: f64,
}

impl FisherModel for RskOptimal {
    fn scheme(&self) -> Scheme {
        Scheme::RskOptimal
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn fisher(&self, x: f64) -> Result<f64> {
        fisher_rsk_optimal(RatioSymbol::new(x)?, &self.pair, self.n_receptors, &self.quad)
    }

    fn fisher_reflected(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return domain(format!("reflected ratio must lie in [0, 1], got {y}"));
        }
        rsk_optimal_split(1.0 - y, y, &self.pair, self.n_receptors, &self.quad)
    }
}

impl FisherModel for RskSuboptimal {
    fn scheme(&self) -> Scheme {
        Scheme::RskSuboptimal
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn fisher(&self, x: f64) -> Result<f64> {
        fisher_rsk_suboptimal(RatioSymbol::new(x)?, &self.pair, &self.ensemble)
    }
}

impl FisherModel for Csk {
    fn scheme(&self) -> Scheme {
        Scheme::Csk
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.c_max)
    }

    fn fisher(&self, x: f64) -> Result<f64> {
        if x > self.c_max {
            return domain(format!("concentration {x} exceeds the cap {}", self.c_max));
        }
        fisher_csk(x, &self.ensemble)
    }
}

/// Fisher information tabulated on an input grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherCurve {
    pub scheme: Scheme,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl FisherCurve {
    /// Evaluate `model` at every grid point (in parallel, order preserved).
    pub fn tabulate<M: FisherModel + ?Sized>(model: &M, grid: &[f64]) -> Result<Self> {
        check_grid(model, grid)?;
        let values = grid.par_iter().map(|&x| model.fisher(x)).collect::<Result<Vec<_>>>()?;
        Ok(FisherCurve {
            scheme: model.scheme(),
            grid: grid.to_vec(),
            values,
        })
    }

    /// Indices whose Fisher information diverges.
    pub fn divergent(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| v.is_infinite()).map(|(i, _)| i)
    }
}

pub(crate) fn check_grid<M: FisherModel + ?Sized>(model: &M, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return domain("input grid is empty");
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("input grid must be strictly increasing");
    }
    let (lo, hi) = model.domain();
    let first = grid[0];
    let last = grid[grid.len() - 1];
    let lower_ok = if model.scheme().is_rsk() { first >= lo } else { first > lo };
    if !lower_ok || last > hi {
        return domain(format!("input grid [{first}, {last}] leaves the domain [{lo}, {hi}]"));
    }
    Ok(())
}
