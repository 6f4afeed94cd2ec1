//! Rate modulation until a target block error rate is met.
//!
//! The schedule is a single integer `d`: `d > 0` shortens `d` variables,
//! `d < 0` punctures `|d|`, and `d = 0` is the base code. For a fixed seed the
//! modified sets are nested, so the FER is (stochastically) decreasing in `d`.

use std::sync::Arc;

use super::{estimate_fer, estimate_with_stop, EfficiencyPoint, FerEstimate, TrialConfig};
use crate::error::{check_probability, Error, Result};
use crate::ldpc::{adapt_rate, ParityCheckMatrix, RateAdaptedCode};

/// Extent of the schedule as (most punctured, most shortened): puncturing
/// stops one short of hiding every syndrome bit, shortening one short of
/// leaving no more payload than syndrome.
pub fn modulation_limit(base: &ParityCheckMatrix) -> (usize, usize) {
    let n_chk = base.n_chk();
    (n_chk.saturating_sub(1), (base.n_var() - n_chk).saturating_sub(1))
}

pub fn modulated_code(base: &Arc<ParityCheckMatrix>, d: i64, seed: u64) -> Result<RateAdaptedCode> {
    let m = d.unsigned_abs() as usize;
    if d >= 0 {
        adapt_rate(Arc::clone(base), m, 0, seed)
    } else {
        adapt_rate(Arc::clone(base), 0, m, seed)
    }
}

/// Bisects the modulation until the measured FER's 95% interval contains
/// `target_eps`. Probes stop as soon as their interval excludes the target.
/// If adjacent modulations straddle the target without either interval
/// containing it, the one nearer in log-FER is re-measured in full and
/// returned.
pub fn calibrate_to_fer(
    base: &Arc<ParityCheckMatrix>,
    q: f64,
    target_eps: f64,
    cfg: &TrialConfig,
) -> Result<(RateAdaptedCode, EfficiencyPoint)> {
    check_probability("target_eps", target_eps)?;
    let cfg = cfg.with_q(q);
    cfg.validate()?;
    let excluded = |e: u64, t: u64| !FerEstimate::from_counts(e, t).contains(target_eps);
    let probe = |d: i64| -> Result<(RateAdaptedCode, FerEstimate)> {
        let code = modulated_code(base, d, cfg.seed)?;
        let est = estimate_with_stop(&code, &cfg, excluded)?;
        Ok((code, est))
    };
    let accept = |code: RateAdaptedCode, est: FerEstimate| {
        let point = EfficiencyPoint::new(&code, q, target_eps, est);
        (code, point)
    };

    let (punct_max, short_max) = modulation_limit(base);
    let (mut lo, mut hi) = (-(punct_max as i64), short_max as i64);
    let (code, est_lo) = probe(lo)?;
    if est_lo.contains(target_eps) {
        return Ok(accept(code, est_lo));
    }
    let (code, est_hi) = probe(hi)?;
    if est_hi.contains(target_eps) {
        return Ok(accept(code, est_hi));
    }
    if est_lo.ci_high < target_eps || est_hi.ci_low > target_eps {
        return Err(Error::UnreachableTarget {
            target: target_eps,
            lowest: est_hi.fer,
            highest: est_lo.fer,
        });
    }
    let (mut est_lo, mut est_hi) = (est_lo, est_hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (code, est) = probe(mid)?;
        if est.contains(target_eps) {
            return Ok(accept(code, est));
        }
        if est.ci_low > target_eps {
            lo = mid;
            est_lo = est;
        } else {
            hi = mid;
            est_hi = est;
        }
    }
    let above = (est_lo.ci_low / target_eps).ln();
    let below = (target_eps / est_hi.ci_high).ln();
    let d = if above <= below { lo } else { hi };
    let code = modulated_code(base, d, cfg.seed)?;
    let est = estimate_fer(&code, &cfg)?;
    Ok(accept(code, est))
}

/// Calibrates one operating point per target; failures are kept per entry.
pub fn sweep_eps(
    base: &Arc<ParityCheckMatrix>,
    q: f64,
    eps_list: &[f64],
    cfg: &TrialConfig,
) -> Vec<Result<EfficiencyPoint>> {
    eps_list
        .iter()
        .map(|&eps| calibrate_to_fer(base, q, eps, cfg).map(|(_, p)| p))
        .collect()
}
