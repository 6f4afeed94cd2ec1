//! Least-squares fit of the two-coefficient leakage model
//! `leak ≈ ξ1·n·h(q) + ξ2·√(n·v(q))·Φ⁻¹(1−ε)`.
//!
//! No intercept. Solved by modified Gram–Schmidt on the two feature columns
//! (with one re-orthogonalization pass) after a Gram-matrix condition check.

use crate::bounds::binary_entropy;
use crate::error::{check_probability, Error, Result};
use crate::normal::std_normal_upper_quantile;

/// Points with measured ε below this sit in the error floor and are dropped
/// by [`apply_floor`] unless configured otherwise.
pub const DEFAULT_FLOOR: f64 = 1e-5;

/// Designs whose Gram matrix condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub n: f64,
    pub q: f64,
    pub eps: f64,
    pub leak: f64,
}

impl FitPoint {
    /// `q` may be 0.5 here (no correlation, v = 0).
    pub fn new(n: f64, q: f64, eps: f64, leak: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain { what: "n", value: n });
        }
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::Domain { what: "q", value: q });
        }
        check_probability("eps", eps)?;
        if !(leak > 0.0 && leak.is_finite()) {
            return Err(Error::Domain { what: "leak", value: leak });
        }
        Ok(Self { n, q, eps, leak })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub xi1: f64,
    pub xi2: f64,
    pub rss: f64,
    pub max_abs_residual: f64,
    /// Heteroscedasticity-consistent (HC3) standard errors; leak noise grows
    /// with the block, so the homoscedastic formula would understate them.
    /// NaN with only two points.
    pub se_xi1: f64,
    pub se_xi2: f64,
    pub n_points: usize,
    /// Condition number of the feature Gram matrix.
    pub condition: f64,
}

/// (a, b) = (n·h(q), √(n·v(q))·Φ⁻¹(1−ε)).
pub fn features(n: f64, q: f64, eps: f64) -> Result<(f64, f64)> {
    let p = FitPoint::new(n, q, eps, 1.0)?;
    Ok(point_features(&p))
}

fn point_features(p: &FitPoint) -> (f64, f64) {
    let h = binary_entropy(p.q).expect("validated");
    let v = if p.q == 0.5 {
        0.0
    } else {
        let l = (p.q.ln() - (-p.q).ln_1p()) / std::f64::consts::LN_2;
        p.q * (1.0 - p.q) * l * l
    };
    let z = std_normal_upper_quantile(p.eps).expect("validated");
    (p.n * h, (p.n * v).sqrt() * z)
}

/// Keeps points with ε ≥ `floor`.
pub fn apply_floor(points: &[FitPoint], floor: f64) -> Vec<FitPoint> {
    points.iter().copied().filter(|p| p.eps >= floor).collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn gram_condition(a: &[f64], b: &[f64]) -> f64 {
    let (g11, g12, g22) = (dot(a, a), dot(a, b), dot(b, b));
    let mean = 0.5 * (g11 + g22);
    let disc = (0.25 * (g11 - g22).powi(2) + g12 * g12).sqrt();
    let (hi, lo) = (mean + disc, mean - disc);
    // lo can round to a tiny negative value when the columns are parallel
    if lo <= hi * f64::EPSILON {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn fit_leak(points: &[FitPoint]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let (a, b): (Vec<f64>, Vec<f64>) = points.iter().map(point_features).unzip();
    let y: Vec<f64> = points.iter().map(|p| p.leak).collect();

    let condition = gram_condition(&a, &b);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient(condition));
    }

    let r11 = dot(&a, &a).sqrt();
    let q1: Vec<f64> = a.iter().map(|x| x / r11).collect();
    let mut r12 = dot(&q1, &b);
    let mut w: Vec<f64> = b.iter().zip(&q1).map(|(x, u)| x - r12 * u).collect();
    let fix = dot(&q1, &w);
    r12 += fix;
    for (wi, u) in w.iter_mut().zip(&q1) {
        *wi -= fix * u;
    }
    let r22 = dot(&w, &w).sqrt();
    let q2: Vec<f64> = w.iter().map(|x| x / r22).collect();

    let xi2 = dot(&q2, &y) / r22;
    let xi1 = (dot(&q1, &y) - r12 * xi2) / r11;

    let resid: Vec<f64> = (0..y.len()).map(|i| y[i] - xi1 * a[i] - xi2 * b[i]).collect();
    let rss = dot(&resid, &resid);
    let max_abs_residual = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    // HC3 sandwich: Cov = R⁻¹ (Qᵀ Ω Q) R⁻ᵀ with Ω = diag(rᵢ² / (1 − hᵢ)²)
    let (se_xi1, se_xi2) = if points.len() > 2 {
        let (mut m11, mut m12, mut m22) = (0.0, 0.0, 0.0);
        for i in 0..y.len() {
            let lev = q1[i] * q1[i] + q2[i] * q2[i];
            let w = (resid[i] / (1.0 - lev)).powi(2);
            m11 += w * q1[i] * q1[i];
            m12 += w * q1[i] * q2[i];
            m22 += w * q2[i] * q2[i];
        }
        let (u, v, z) = (1.0 / r11, -r12 / (r11 * r22), 1.0 / r22);
        let c11 = u * u * m11 + 2.0 * u * v * m12 + v * v * m22;
        (c11.sqrt(), (z * z * m22).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(FitResult {
        xi1,
        xi2,
        rss,
        max_abs_residual,
        se_xi1,
        se_xi2,
        n_points: points.len(),
        condition,
    })
}

/// ξ1·a + ξ2·b at (n, q, ε).
pub fn predict_leak(r: &FitResult, n: f64, q: f64, eps: f64) -> Result<f64> {
    let (a, b) = features(n, q, eps)?;
    Ok(r.xi1 * a + r.xi2 * b)
}

/// Residuals `leak − prediction`, in input order.
pub fn residuals(r: &FitResult, points: &[FitPoint]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let (a, b) = point_features(p);
            p.leak - r.xi1 * a - r.xi2 * b
        })
        .collect()
}
