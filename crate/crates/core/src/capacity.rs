//! Jeffreys-prior input densities and the asymptotic capacity
//! `C = log2(Z / sqrt(2 pi e))`, `Z = ∫ sqrt(I(x)) dx`.
//!
//! `Z` is always computed by the generic open-rule quadrature in
//! [`crate::quadrature`], whose abscissae grade double-exponentially into
//! both ends of the input range where `sqrt(I)` may blow up like
//! `x^{-1/2}`. The closed forms in [`closed_form`] are kept only as
//! cross-checks.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::binding::{LigandPair, ReceptorEnsemble};
use crate::error::{Error, Result};
use crate::fisher::{check_grid, Csk, FisherModel, RskOptimal, RskSuboptimal, Scheme};
use crate::quadrature::{integrate_to_infinity, integrate_two_sided, QuadSettings};

/// Number of points in the default tabulation grid.
pub const DEFAULT_GRID_POINTS: usize = 1001;

/// Tolerances for a capacity computation.
///
/// `outer` drives the integral of `sqrt(I)`; `inner` drives the integral
/// inside the optimal-RSK Fisher information. The inner tolerance has to be
/// well below the outer one or the outer refinement chases quadrature noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitySettings {
    pub outer: QuadSettings,
    pub inner: QuadSettings,
}

impl Default for CapacitySettings {
    fn default() -> Self {
        CapacitySettings {
            outer: QuadSettings {
                abs_tol: 1e-12,
                rel_tol: 1e-9,
                max_panels: 400,
            },
            inner: QuadSettings {
                abs_tol: 1e-14,
                rel_tol: 1e-11,
                max_panels: 400,
            },
        }
    }
}

/// Parameters echoed into every capacity report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    pub gamma: Option<f64>,
    pub n_receptors: u64,
    pub c_max_over_kd: Option<f64>,
    pub kpr_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub scheme: Scheme,
    /// `max(raw_bits, 0)`, bits per channel use.
    pub capacity_bits: f64,
    /// The unclamped asymptotic value; `-∞` when `Z = 0`.
    pub raw_bits: f64,
    /// `Z = ∫ sqrt(I)`.
    pub normalization: f64,
    pub parameters: CapacityParams,
}

/// Jeffreys density tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JeffreysDensity {
    pub scheme: Scheme,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub normalization: f64,
}

/// `log2(Z / sqrt(2 pi e))`.
pub fn bits_from_normalization(z: f64) -> f64 {
    (z / (2.0 * PI * E).sqrt()).log2()
}

fn sqrt_fisher<M: FisherModel + ?Sized>(model: &M, x: f64) -> Result<f64> {
    let i = model.fisher(x)?;
    if i < 0.0 {
        // Quadrature noise on an information that is zero to rounding.
        return Ok(0.0);
    }
    Ok(i.sqrt())
}

/// `∫ w(x) sqrt(I(x)) dx` over the model's domain. Finite domains are split
/// in the middle and the upper half integrated in the distance from `hi`.
fn weighted_integral<M, W>(model: &M, weight: W, quad: &QuadSettings) -> Result<f64>
where
    M: FisherModel + ?Sized,
    W: Fn(f64) -> f64,
{
    let (lo, hi) = model.domain();
    let integral = if hi == f64::INFINITY {
        integrate_to_infinity(|x| Ok(weight(x) * sqrt_fisher(model, x)?), lo, quad)?
    } else {
        integrate_two_sided(
            |x| Ok(weight(x) * sqrt_fisher(model, x)?),
            |y| {
                let i = model.fisher_reflected(y)?;
                Ok(weight(hi - y) * i.max(0.0).sqrt())
            },
            lo,
            hi,
            quad,
        )?
    };
    Ok(integral.value)
}

/// `Z = ∫ sqrt(I(x)) dx` over the model's input range.
pub fn normalization<M: FisherModel + ?Sized>(model: &M, quad: &QuadSettings) -> Result<f64> {
    let (_, hi) = model.domain();
    let z = weighted_integral(model, |_| 1.0, quad)?;
    if !z.is_finite() {
        return Err(Error::NonFinite { x: hi, value: z });
    }
    Ok(z)
}

/// The asymptotically capacity-achieving input density `sqrt(I) / Z`.
#[derive(Debug, Clone, Copy)]
pub struct JeffreysPrior<'a, M: FisherModel + ?Sized> {
    model: &'a M,
    normalization: f64,
}

impl<'a, M: FisherModel + ?Sized> JeffreysPrior<'a, M> {
    pub fn new(model: &'a M, quad: &QuadSettings) -> Result<Self> {
        let normalization = normalization(model, quad)?;
        Ok(JeffreysPrior { model, normalization })
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Density at `x`; `+∞` where the Fisher information diverges and
    /// `NaN` when `Z = 0` (indistinguishable ligands).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(sqrt_fisher(self.model, x)? / self.normalization)
    }

    /// `∫ x p(x) dx`.
    pub fn mean(&self, quad: &QuadSettings) -> Result<f64> {
        Ok(weighted_integral(self.model, |x| x, quad)? / self.normalization)
    }

    /// `∫ p(x) dx`, which is 1 up to quadrature error.
    pub fn total_mass(&self, quad: &QuadSettings) -> Result<f64> {
        Ok(weighted_integral(self.model, |_| 1.0, quad)? / self.normalization)
    }

    pub fn tabulate(&self, grid: &[f64]) -> Result<JeffreysDensity> {
        use rayon::prelude::*;
        check_grid(self.model, grid)?;
        let density = grid.par_iter().map(|&x| self.pdf(x)).collect::<Result<Vec<_>>>()?;
        Ok(JeffreysDensity {
            scheme: self.model.scheme(),
            grid: grid.to_vec(),
            density,
            normalization: self.normalization,
        })
    }
}

/// Normalise `sqrt(I)` over the model's domain and tabulate it on `grid`.
pub fn jeffreys_density<M: FisherModel + ?Sized>(
    model: &M,
    grid: &[f64],
    quad: &QuadSettings,
) -> Result<JeffreysDensity> {
    JeffreysPrior::new(model, quad)?.tabulate(grid)
}

/// Asymptotic capacity of an arbitrary Fisher model; parameters are left
/// for the caller to fill in.
pub fn approx_capacity<M: FisherModel + ?Sized>(
    model: &M,
    quad: &QuadSettings,
    parameters: CapacityParams,
) -> Result<CapacityReport> {
    let z = normalization(model, quad)?;
    let raw_bits = bits_from_normalization(z);
    Ok(CapacityReport {
        scheme: model.scheme(),
        capacity_bits: raw_bits.max(0.0),
        raw_bits,
        normalization: z,
        parameters,
    })
}

pub fn capacity_rsk_optimal(
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
    settings: &CapacitySettings,
) -> Result<CapacityReport> {
    let model = RskOptimal {
        pair: *pair,
        n_receptors: ensemble.n_receptors(),
        quad: settings.inner,
    };
    approx_capacity(
        &model,
        &settings.outer,
        CapacityParams {
            gamma: Some(pair.similarity()),
            n_receptors: ensemble.n_receptors(),
            c_max_over_kd: None,
            kpr_threshold: None,
        },
    )
}

pub fn capacity_rsk_suboptimal(
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
    settings: &CapacitySettings,
) -> Result<CapacityReport> {
    let model = RskSuboptimal {
        pair: *pair,
        ensemble: *ensemble,
    };
    approx_capacity(
        &model,
        &settings.outer,
        CapacityParams {
            gamma: Some(pair.similarity()),
            n_receptors: ensemble.n_receptors(),
            c_max_over_kd: None,
            kpr_threshold: Some(ensemble.kpr_threshold()),
        },
    )
}

/// CSK capacity with received concentration in `(0, c_max]`; `c_max` may be
/// `+∞` for an unconstrained transmitter.
pub fn capacity_csk(ensemble: &ReceptorEnsemble, c_max: f64, settings: &CapacitySettings) -> Result<CapacityReport> {
    if !(c_max > 0.0) {
        return Err(Error::Domain(format!("concentration cap must be positive, got {c_max}")));
    }
    let model = Csk {
        ensemble: *ensemble,
        c_max,
    };
    approx_capacity(
        &model,
        &settings.outer,
        CapacityParams {
            gamma: None,
            n_receptors: ensemble.n_receptors(),
            c_max_over_kd: Some(c_max / ensemble.k_d()),
            kpr_threshold: None,
        },
    )
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` log-spaced points covering `[lo, hi]`, `lo > 0`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linear_grid(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => x.exp(),
        })
        .collect()
}

/// Closed-form normalisations, used only to cross-check the quadrature.
pub mod closed_form {
    use super::*;

    /// `Z_CSK = 2 sqrt(N_R) arctan(sqrt(c_max / K_D))`.
    pub fn csk_normalization(n_receptors: u64, c_max_over_kd: f64) -> f64 {
        2.0 * (n_receptors as f64).sqrt() * c_max_over_kd.sqrt().atan()
    }

    /// `Z_sub = 2 sqrt(N_R) |arcsin sqrt(p_T(1)) - arcsin sqrt(p_T(0))|`.
    ///
    /// `p_T` is affine in `α`, so `sqrt(I_sub) dα = sqrt(N_R) dp / sqrt(p (1-p))`.
    pub fn rsk_suboptimal_normalization(pair: &LigandPair, ensemble: &ReceptorEnsemble) -> f64 {
        let t = ensemble.kpr_threshold();
        let p1 = (-pair.k1_off() * t).exp();
        let p0 = (-pair.k2_off() * t).exp();
        2.0 * (ensemble.n_receptors() as f64).sqrt() * (p1.sqrt().asin() - p0.sqrt().asin()).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl FisherModel for Constant {
        fn scheme(&self) -> Scheme {
            Scheme::RskOptimal
        }
        fn domain(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn fisher(&self, _: f64) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn params() -> CapacityParams {
        CapacityParams {
            gamma: None,
            n_receptors: 1,
            c_max_over_kd: None,
            kpr_threshold: None,
        }
    }

    #[test]
    fn constant_information_gives_uniform_density() {
        let model = Constant(3.7);
        let d = jeffreys_density(&model, &linear_grid(0.0, 1.0, 11), &QuadSettings::default()).unwrap();
        for v in d.density {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_normalization_is_zero_bits() {
        let r = approx_capacity(&Constant(2.0 * PI * E), &QuadSettings::default(), params()).unwrap();
        assert!(r.raw_bits.abs() < 1e-12, "{r:?}");
        assert_eq!(r.capacity_bits, r.raw_bits.max(0.0));
    }

    #[test]
    fn small_normalization_clamps() {
        let r = approx_capacity(&Constant(0.01), &QuadSettings::default(), params()).unwrap();
        assert!(r.raw_bits < 0.0);
        assert_eq!(r.capacity_bits, 0.0);
        let r = approx_capacity(&Constant(0.0), &QuadSettings::default(), params()).unwrap();
        assert_eq!(r.raw_bits, f64::NEG_INFINITY);
        assert_eq!(r.capacity_bits, 0.0);
    }

    #[test]
    fn grids() {
        assert_eq!(linear_grid(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = log_grid(0.01, 100.0, 5);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[4], 100.0);
        assert!((g[2] - 1.0).abs() < 1e-15);
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
        assert_eq!(linear_grid(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn csk_rejects_nonpositive_cap() {
        let e = ReceptorEnsemble::with_dissociation_constant(10, 1.0).unwrap();
        assert!(capacity_csk(&e, 0.0, &CapacitySettings::default()).is_err());
        assert!(capacity_csk(&e, f64::NAN, &CapacitySettings::default()).is_err());
    }

    #[test]
    fn csk_matches_arctan_form() {
        let e = ReceptorEnsemble::with_dissociation_constant(1000, 1.0).unwrap();
        let s = CapacitySettings::default();
        for &(cmax, frozen) in &[(0.1, 2.228_707_232_422_598_6), (0.4, 3.109_416_895_751_052)] {
            let r = capacity_csk(&e, cmax, &s).unwrap();
            let z = closed_form::csk_normalization(1000, cmax);
            assert!((r.capacity_bits - bits_from_normalization(z)).abs() < 1e-8, "{r:?}");
            assert!((r.capacity_bits - frozen).abs() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn suboptimal_matches_arcsine_form() {
        let pair = LigandPair::from_similarity(5.0).unwrap();
        let e = ReceptorEnsemble::for_pair(&pair, 1000).unwrap();
        let r = capacity_rsk_suboptimal(&pair, &e, &CapacitySettings::default()).unwrap();
        assert!((r.capacity_bits - 3.220_934_188_565_268_7).abs() < 1e-8, "{r:?}");
        let z = closed_form::rsk_suboptimal_normalization(&pair, &e);
        assert!((r.normalization / z - 1.0).abs() < 1e-9);
    }
}
