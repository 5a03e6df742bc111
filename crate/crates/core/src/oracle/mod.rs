//! Independent checks on the asymptotic capacity and Fisher engines.
//!
//! * [`blahut_arimoto`] computes the exact capacity of the binomial-count
//!   channels once their input is restricted to a finite grid.
//! * [`crlb_experiment`] samples bound times, runs both ratio estimators and
//!   compares their variance with the inverse Fisher information.
//!
//! The optimal-RSK receiver observes a vector of continuous bound times and
//! has no finite output alphabet, so it is only checked through the CRLB
//! experiment.

mod blahut_arimoto;
mod channel;
mod crlb;

pub use blahut_arimoto::{blahut_arimoto, BaResult, BA_DEFAULT_MAX_ITER, BA_DEFAULT_TOL};
pub use channel::{build_channel_csk, build_channel_rsk_sub, DiscreteChannel};
pub use crlb::{crlb_experiment, CrlbReport, EstimatorStats, BOOTSTRAP_RESAMPLES};
