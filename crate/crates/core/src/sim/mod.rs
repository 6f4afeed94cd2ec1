//! Monte Carlo estimation of block error rates and reconciliation efficiency.
//!
//! Every trial draws from its own ChaCha stream keyed by (master seed, trial
//! index), and trials are evaluated in fixed-size batches whose results are
//! scanned in index order. Outputs therefore do not depend on how many
//! worker threads rayon uses.

mod calibrate;


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::bounds::binary_entropy;
use crate::error::{Error, Result};
use crate::ldpc::{BpDecoder, ParityCheckMatrix, RateAdaptedCode, Role, DEFAULT_MAX_ITER};

pub use calibrate::{calibrate_to_fer, modulated_code, modulation_limit, sweep_eps};

pub const DEFAULT_STOP_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
/// Two-sided Clopper–Pearson level.
pub const CONFIDENCE: f64 = 0.95;

const FIRST_BATCH: u64 = 16;
const MAX_BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub q: f64,
    pub seed: u64,
    pub stop_errors: u64,
    pub max_trials: u64,
    pub max_iter: usize,
}

impl TrialConfig {
    pub fn new(q: f64, seed: u64) -> Self {
        Self {
            q,
            seed,
            stop_errors: DEFAULT_STOP_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 0.5) {
            return Err(Error::Domain { what: "q", value: self.q });
        }
        if self.stop_errors == 0 || self.max_trials < self.stop_errors {
            return Err(Error::Precondition(format!(
                "need 1 <= stop_errors <= max_trials, got {} and {}",
                self.stop_errors, self.max_trials
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Precondition("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FerEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        assert!(trials > 0 && errors <= trials, "{errors} errors in {trials} trials");
        let (ci_low, ci_high) = clopper_pearson(errors, trials);
        Self {
            errors,
            trials,
            fer: errors as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyPoint {
    pub n_pay: usize,
    pub q: f64,
    /// The block error rate the calibration aimed for.
    pub eps_target: f64,
    /// Measured FER of the returned operating point.
    pub eps: f64,
    pub estimate: FerEstimate,
    pub leak_bits: u64,
    /// leak_bits / (n_pay·h(q))
    pub f: f64,
    pub n_short: usize,
    pub n_punct: usize,
}

impl EfficiencyPoint {
    pub fn new(code: &RateAdaptedCode, q: f64, eps_target: f64, estimate: FerEstimate) -> Self {
        let leak_bits = code.leak_bits() as u64;
        let h = binary_entropy(q).expect("q already validated");
        Self {
            n_pay: code.n_payload(),
            q,
            eps_target,
            eps: estimate.fer,
            estimate,
            leak_bits,
            f: leak_bits as f64 / (code.n_payload() as f64 * h),
            n_short: code.shortened().len(),
            n_punct: code.punctured().len(),
        }
    }
}

/// x uniform, y = x ⊕ e with e ~ Bernoulli(q), both of length `n`.
pub fn sample_pair<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> (Vec<u8>, Vec<u8>) {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a = u8::from(rng.gen::<bool>());
        let e = u8::from(rng.gen_bool(q));
        x.push(a);
        y.push(a ^ e);
    }
    (x, y)
}

/// The RNG of trial `index` under master seed `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// 95% Clopper–Pearson interval. With no errors the interval is one-sided,
/// `[0, 1 − 0.05^{1/n}]`.
pub fn clopper_pearson(errors: u64, trials: u64) -> (f64, f64) {
    let alpha = 1.0 - CONFIDENCE;
    let (k, n) = (errors as f64, trials as f64);
    if errors == 0 {
        return (0.0, -(alpha.ln() / n).exp_m1());
    }
    let lo = beta_quantile(k, n - k + 1.0, alpha / 2.0);
    let hi = if errors == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs trials `0, 1, 2, …` until the `stop_errors`-th failure or
/// `max_trials`. `stop_early(errors, trials)` is consulted only between
/// batches, so it too is seen at scheduling-independent points.
pub fn run_trials<S, I, F, P>(
    stop_errors: u64,
    max_trials: u64,
    init: I,
    trial: F,
    stop_early: P,
) -> (u64, u64)
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> bool + Sync + Send,
    P: Fn(u64, u64) -> bool,
{
    let (mut errors, mut done) = (0u64, 0u64);
    let mut batch = FIRST_BATCH;
    while done < max_trials {
        let end = (done + batch).min(max_trials);
        let failed: Vec<bool> = (done..end)
            .into_par_iter()
            .map_init(&init, |state, i| trial(state, i))
            .collect();
        for fail in failed {
            done += 1;
            if fail {
                errors += 1;
                if errors == stop_errors {
                    return (errors, done);
                }
            }
        }
        if stop_early(errors, done) {
            break;
        }
        batch = (batch * 2).min(MAX_BATCH);
    }
    (errors, done)
}

struct TrialState {
    decoder: BpDecoder,
    y: Vec<u8>,
}

/// A block error is any difference between Alice's string and Bob's
/// estimate on payload or punctured positions.
fn one_trial(h: &ParityCheckMatrix, roles: &[Role], cfg: &TrialConfig, state: &mut TrialState, index: u64) -> bool {
    let mut rng = trial_rng(cfg.seed, index);
    let (mut x, y_full) = sample_pair(h.n_var(), cfg.q, &mut rng);
    state.y.clear();
    for (v, role) in roles.iter().enumerate() {
        match role {
            Role::Shortened => x[v] = 0,
            Role::Payload => state.y.push(y_full[v]),
            Role::Punctured => {}
        }
    }
    let s = h.syndrome(&x).expect("length matches");
    match state.decoder.run(&state.y, &s, cfg.q, cfg.max_iter) {
        Ok(_) => state.decoder.estimate() != &x[..],
        Err(_) => true,
    }
}

pub(crate) fn estimate_with_stop<P>(code: &RateAdaptedCode, cfg: &TrialConfig, stop_early: P) -> Result<FerEstimate>
where
    P: Fn(u64, u64) -> bool,
{
    cfg.validate()?;
    let h = code.base();
    let roles = code.roles();
    let proto = BpDecoder::new(code);
    let (errors, trials) = run_trials(
        cfg.stop_errors,
        cfg.max_trials,
        || TrialState {
            decoder: proto.clone(),
            y: Vec::with_capacity(h.n_var()),
        },
        |state, i| one_trial(h, roles, cfg, state, i),
        stop_early,
    );
    Ok(FerEstimate::from_counts(errors, trials))
}

/// Block error rate of `code` on the BSC(q) source, stopping after
/// `stop_errors` failures or `max_trials` trials.
pub fn estimate_fer(code: &RateAdaptedCode, cfg: &TrialConfig) -> Result<FerEstimate> {
    estimate_with_stop(code, cfg, |_, _| false)
}

/// `estimate_fer` at each crossover probability; failures are kept per entry.
pub fn sweep_q(code: &RateAdaptedCode, q_list: &[f64], cfg: &TrialConfig) -> Vec<(f64, Result<FerEstimate>)> {
    q_list
        .iter()
        .map(|&q| (q, estimate_fer(code, &cfg.with_q(q))))
        .collect()
}
