//! LDPC syndrome coding: construction, rate adaptation and decoding.

mod decoder;
mod degree;
mod matrix;
mod peg;
mod rate;

pub use decoder::{bp_syndrome_decode, BpDecoder, DecodeOutcome, DEFAULT_MAX_ITER, LLR_CLIP};
pub use degree::{node_degrees, DegreeAssignment, DegreeDistribution};
pub use matrix::ParityCheckMatrix;
pub use peg::peg_construct;
pub use rate::{adapt_rate, RateAdaptedCode, Role};
