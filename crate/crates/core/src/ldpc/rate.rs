use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::ParityCheckMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Sent through the channel; Bob holds a noisy copy.
    Payload,
    /// Fixed to a value both sides know in advance (zero).
    Shortened,
    /// Part of Alice's string but hidden from Bob entirely.
    Punctured,
}

/// A base code with some variables shortened and others punctured.
///
/// The syndrome still covers every check, but punctured symbols are never
/// disclosed, so the leak is `n_chk − |punctured|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAdaptedCode {
    base: Arc<ParityCheckMatrix>,
    shortened: Vec<usize>,
    punctured: Vec<usize>,
    roles: Vec<Role>,
    payload: Vec<usize>,
}

impl RateAdaptedCode {
    pub fn new(base: Arc<ParityCheckMatrix>, mut shortened: Vec<usize>, mut punctured: Vec<usize>) -> Result<Self> {
        let n_var = base.n_var();
        let capacity = || Error::Capacity {
            short: shortened.len(),
            punct: punctured.len(),
            n_var,
        };
        if shortened.len() + punctured.len() >= n_var || punctured.len() > base.n_chk() {
            return Err(capacity());
        }
        shortened.sort_unstable();
        punctured.sort_unstable();
        let mut roles = vec![Role::Payload; n_var];
        for (set, role) in [(&shortened, Role::Shortened), (&punctured, Role::Punctured)] {
            for &v in set.iter() {
                if v >= n_var || roles[v] != Role::Payload {
                    return Err(Error::InvalidDistribution(format!(
                        "variable {v} is out of range or assigned twice"
                    )));
                }
                roles[v] = role;
            }
        }
        let payload = (0..n_var).filter(|&v| roles[v] == Role::Payload).collect();
        Ok(Self {
            base,
            shortened,
            punctured,
            roles,
            payload,
        })
    }

    /// The base code with nothing shortened or punctured.
    pub fn unmodulated(base: Arc<ParityCheckMatrix>) -> Self {
        Self::new(base, Vec::new(), Vec::new()).expect("no modulation always fits")
    }

    pub fn base(&self) -> &ParityCheckMatrix {
        &self.base
    }

    pub fn shortened(&self) -> &[usize] {
        &self.shortened
    }

    pub fn punctured(&self) -> &[usize] {
        &self.punctured
    }

    /// Ascending indices of the payload variables.
    pub fn payload_positions(&self) -> &[usize] {
        &self.payload
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn n_payload(&self) -> usize {
        self.payload.len()
    }

    /// Syndrome bits disclosed: n_chk − |punctured|.
    pub fn leak_bits(&self) -> usize {
        self.base.n_chk() - self.punctured.len()
    }
}

/// Shortens `n_short` and punctures `n_punct` variables chosen uniformly
/// without replacement. The selection walks one seeded permutation, so for
/// a fixed seed smaller modulations are prefixes of larger ones.
pub fn adapt_rate(
    base: Arc<ParityCheckMatrix>,
    n_short: usize,
    n_punct: usize,
    seed: u64,
) -> Result<RateAdaptedCode> {
    let n_var = base.n_var();
    if n_short + n_punct >= n_var || n_punct > base.n_chk() {
        return Err(Error::Capacity {
            short: n_short,
            punct: n_punct,
            n_var,
        });
    }
    let mut perm: Vec<usize> = (0..n_var).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let shortened = perm[..n_short].to_vec();
    let punctured = perm[n_short..n_short + n_punct].to_vec();
    RateAdaptedCode::new(base, shortened, punctured)
}
