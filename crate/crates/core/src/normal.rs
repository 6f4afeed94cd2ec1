//! Standard normal CDF, density and quantile.
//!
//! `erfc` comes from libm (statrs' version is only good to ~1e-11 relative);
//! statrs' `erfc_inv` seeds the quantile, which is then polished with Newton
//! steps against the lower-tail CDF so that `|Φ(Φ⁻¹(p)) − p| ≤ 1e-12`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{check_probability, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// φ(x).
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ⁻¹(p) for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(quantile_unchecked(p))
}

/// Φ⁻¹(1 − eps), evaluated as −Φ⁻¹(eps) so that small `eps` keep full precision.
pub fn std_normal_upper_quantile(eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    Ok(-quantile_unchecked(eps))
}

pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact on [0.5, 1).
        return -lower_quantile(1.0 - p);
    }
    lower_quantile(p)
}

fn lower_quantile(p: f64) -> f64 {
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let dens = std_normal_pdf(x);
        if dens <= 0.0 {
            break;
        }
        let step = (std_normal_cdf(x) - p) / dens;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
