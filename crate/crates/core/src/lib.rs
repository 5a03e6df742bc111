//! Approximate channel capacity of molecular-communication links that use
//! ratio shift keying (RSK) or concentration shift keying (CSK) with a
//! ligand-receptor receiver.
//!
//! The capacity is the asymptotic Jeffreys-prior approximation
//! `log2(Z / sqrt(2 pi e))` with `Z = ∫ sqrt(I(x)) dx`, where `I` is the Fisher
//! information of the receiver's observation about the transmitted symbol.
//! Three receivers are modelled:
//!
//! * RSK with an optimal receiver that records every receptor bound time,
//! * RSK with a kinetic-proofreading receiver that only counts bound times
//!   longer than a threshold,
//! * CSK with a receiver that counts bound receptors.
//!
//! The [`oracle`] module holds independent cross-checks: Blahut–Arimoto on the
//! discretised binomial channels and Monte-Carlo Cramér–Rao experiments.

pub mod binding;
pub mod capacity;
mod error;
pub mod estimators;
pub mod fisher;
pub mod logspace;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};
