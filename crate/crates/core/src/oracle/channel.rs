use rayon::prelude::*;

use crate::binding::{LigandPair, RatioSymbol, ReceptorEnsemble};
use crate::error::{domain, Result};
use crate::fisher::p_long_binding;
use crate::logspace::binomial_log_pmf;

/// Discrete memoryless channel stored as log transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    inputs: Vec<f64>,
    n_outputs: usize,
    /// Row-major `ln P(y | x_i)`.
    log_rows: Vec<f64>,
}

impl DiscreteChannel {
    /// Build from linear-domain rows; each must be a probability vector.
    pub fn from_rows(inputs: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let log_rows = rows
            .iter()
            .map(|r| r.iter().map(|p| p.ln()).collect())
            .collect::<Vec<Vec<f64>>>();
        Self::from_log_rows(inputs, log_rows)
    }

    pub fn from_log_rows(inputs: Vec<f64>, log_rows: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != log_rows.len() {
            return domain(format!(
                "channel needs one row per input ({} inputs, {} rows)",
                inputs.len(),
                log_rows.len()
            ));
        }
        let n_outputs = log_rows[0].len();
        if n_outputs == 0 {
            return domain("channel has an empty output alphabet");
        }
        for (i, row) in log_rows.iter().enumerate() {
            if row.len() != n_outputs {
                return domain(format!("row {i} has {} outputs, expected {n_outputs}", row.len()));
            }
            if row.iter().any(|l| l.is_nan() || *l > 0.0) {
                return domain(format!("row {i} has an entry outside [0, 1]"));
            }
            let s: f64 = row.iter().map(|l| l.exp()).sum();
            if (s - 1.0).abs() > 1e-12 {
                return domain(format!("row {i} sums to {s}, not 1"));
            }
        }
        Ok(DiscreteChannel {
            inputs,
            n_outputs,
            log_rows: log_rows.into_iter().flatten().collect(),
        })
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn log_row(&self, i: usize) -> &[f64] {
        &self.log_rows[i * self.n_outputs..(i + 1) * self.n_outputs]
    }

    /// `P(y | x_i)` for every output `y`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.log_row(i).iter().map(|l| l.exp()).collect()
    }
}

fn binomial_channel(inputs: Vec<f64>, n: u64, probs: Vec<(f64, f64)>) -> Result<DiscreteChannel> {
    let rows = probs.par_iter().map(|&(p, q)| binomial_log_pmf(n, p, q)).collect();
    DiscreteChannel::from_log_rows(inputs, rows)
}

/// Rows `Binomial(N_R, p_T(α_i))` of the proofreading RSK receiver.
pub fn build_channel_rsk_sub(
    alpha_grid: &[f64],
    pair: &LigandPair,
    ensemble: &ReceptorEnsemble,
) -> Result<DiscreteChannel> {
    let t = ensemble.kpr_threshold();
    let (x1, x2) = (-pair.k1_off() * t, -pair.k2_off() * t);
    let probs = alpha_grid
        .iter()
        .map(|&a| {
            let p = p_long_binding(RatioSymbol::new(a)?, pair, t)?;
            let q = -(a * x1.exp_m1() + (1.0 - a) * x2.exp_m1());
            Ok((p, q))
        })
        .collect::<Result<Vec<_>>>()?;
    binomial_channel(alpha_grid.to_vec(), ensemble.n_receptors(), probs)
}

/// Rows `Binomial(N_R, c_j / (c_j + K_D))` of the CSK receiver.
pub fn build_channel_csk(c_grid: &[f64], ensemble: &ReceptorEnsemble) -> Result<DiscreteChannel> {
    let kd = ensemble.k_d();
    let probs = c_grid
        .iter()
        .map(|&c| {
            if !(c.is_finite() && c > 0.0) {
                return domain(format!("CSK channel inputs must be finite and positive, got {c}"));
            }
            Ok((c / (c + kd), kd / (c + kd)))
        })
        .collect::<Result<Vec<_>>>()?;
    binomial_channel(c_grid.to_vec(), ensemble.n_receptors(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rsk_rows() {
        // k1 T = ln 2 and k2 T = ln 2 give p_T = 0.5 for every α.
        let pair = LigandPair::new(2.0, 2.0).unwrap();
        let ens = ReceptorEnsemble::new(2, 1.0, 2f64.ln() / 2.0).unwrap();
        let ch = build_channel_rsk_sub(&[0.0, 0.7], &pair, &ens).unwrap();
        for i in 0..2 {
            for (got, want) in ch.row(i).iter().zip([0.25, 0.5, 0.25]) {
                assert!((got - want).abs() < 1e-15);
            }
        }
        assert_eq!(ch.row(0), ch.row(1));
    }

    #[test]
    fn rows_with_equal_probability_match() {
        let pair = LigandPair::from_similarity(5.0).unwrap();
        let ens = ReceptorEnsemble::for_pair(&pair, 50).unwrap();
        let ch = build_channel_rsk_sub(&[0.3, 0.3, 0.6], &pair, &ens).unwrap();
        assert_eq!(ch.log_row(0), ch.log_row(1));
        assert_ne!(ch.log_row(0), ch.log_row(2));
    }

    #[test]
    fn large_rows_normalised() {
        let pair = LigandPair::from_similarity(5.0).unwrap();
        let ens = ReceptorEnsemble::for_pair(&pair, 1000).unwrap();
        let ch = build_channel_rsk_sub(&[0.0, 0.25, 0.5, 1.0], &pair, &ens).unwrap();
        assert_eq!(ch.n_outputs(), 1001);
        for i in 0..ch.n_inputs() {
            let s: f64 = ch.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(ch.row(i).iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn csk_rows() {
        let ens = ReceptorEnsemble::with_dissociation_constant(2, 1.0).unwrap();
        let ch = build_channel_csk(&[1.0, 1.0], &ens).unwrap();
        for (got, want) in ch.row(0).iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(ch.row(0), ch.row(1));
        let ens = ReceptorEnsemble::with_dissociation_constant(1000, 1.0).unwrap();
        let ch = build_channel_csk(&[0.001, 0.1, 0.4], &ens).unwrap();
        for i in 0..3 {
            assert!((ch.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(build_channel_csk(&[0.0], &ens).is_err());
    }

    #[test]
    fn validation() {
        assert!(DiscreteChannel::from_rows(vec![0.0], &[vec![0.5, 0.4]]).is_err());
        assert!(DiscreteChannel::from_rows(vec![0.0, 1.0], &[vec![0.5, 0.5]]).is_err());
        assert!(DiscreteChannel::from_rows(vec![0.0, 1.0], &[vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(DiscreteChannel::from_rows(vec![0.0], &[vec![1.5, -0.5]]).is_err());
        assert!(DiscreteChannel::from_rows(vec![0.0], &[vec![0.5, 0.5]]).is_ok());
    }
}
