//! Finite-blocklength limits and LDPC-based measurements of the leakage of
//! one-way information reconciliation.

pub mod binomial;
pub mod bounds;
pub mod error;
pub mod fit;
pub mod infocalc;
pub mod ldpc;
pub mod normal;
pub mod sim;

pub use bounds::{BoundQuery, BoundReport, ConverseOptimum, Direction};
pub use error::{Error, Result};
pub use fit::{FitPoint, FitResult};
pub use infocalc::{FiniteJointDistribution, SpectrumPoint};
pub use ldpc::{DecodeOutcome, DegreeDistribution, ParityCheckMatrix, RateAdaptedCode};
pub use sim::{EfficiencyPoint, FerEstimate, TrialConfig};
