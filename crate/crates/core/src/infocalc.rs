//! Exact information-theoretic functionals on small explicit distributions.
//!
//! Everything here is in bits. These routines enumerate outcomes, so they
//! double as brute-force references for the closed-form bounds.

use crate::binomial::{neumaier_sum, MASS_TOL};
use crate::error::{check_probability, Error, Result};

/// Exhaustive routines refuse alphabets larger than this.
pub const MAX_EXHAUSTIVE_OUTCOMES: usize = 1 << 24;

/// Largest alphabet accepted by [`hypothesis_testing_divergence`].
pub const MAX_TEST_OUTCOMES: usize = 1 << 20;

const SUM_TOL: f64 = 1e-12;

/// Joint distribution of (X, Y) on `{0..nx} × {0..ny}`, stored row-major
/// (row `x`, column `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJointDistribution {
    nx: usize,
    ny: usize,
    p: Vec<f64>,
}

impl FiniteJointDistribution {
    /// Builds from a dense row-major probability list.
    pub fn new(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if p.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                got: p.len(),
            });
        }
        validate_flat(&p)?;
        Ok(Self { nx, ny, p })
    }

    /// The BSC-correlated pair: X uniform, Y = X ⊕ Bernoulli(q).
    pub fn bsc(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain { what: "q", value: q });
        }
        let same = (1.0 - q) / 2.0;
        let diff = q / 2.0;
        Self::new(2, 2, vec![same, diff, diff, same])
    }

    /// U_X × P_Y for the given marginal of Y.
    pub fn uniform_x_times(nx: usize, p_y: &[f64]) -> Result<Self> {
        let u = 1.0 / nx as f64;
        let p = (0..nx).flat_map(|_| p_y.iter().map(move |py| u * py)).collect();
        Self::new(nx, p_y.len(), p)
    }

    /// U_X × P_Y built from this distribution's Y-marginal.
    pub fn decorrelated(&self) -> Self {
        Self::uniform_x_times(self.nx, &self.marginal_y()).expect("marginal of a valid distribution")
    }

    pub fn alphabet_x(&self) -> usize {
        self.nx
    }

    pub fn alphabet_y(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    /// Row-major probabilities; the outcome index is `x * ny + y`.
    pub fn as_flat(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.p.chunks(self.ny).map(|row| neumaier_sum(row.iter().copied())).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny)
            .map(|y| neumaier_sum((0..self.nx).map(|x| self.get(x, y))))
            .collect()
    }

    /// Joint distribution of ((X₁,X₂),(Y₁,Y₂)) for independent pairs.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let nx = self.nx * other.nx;
        let ny = self.ny * other.ny;
        if nx * ny > MAX_EXHAUSTIVE_OUTCOMES {
            return Err(Error::TooLarge(nx * ny));
        }
        let mut p = vec![0.0; nx * ny];
        for x1 in 0..self.nx {
            for x2 in 0..other.nx {
                let x = x1 * other.nx + x2;
                for y1 in 0..self.ny {
                    let a = self.get(x1, y1);
                    for y2 in 0..other.ny {
                        p[x * ny + y1 * other.ny + y2] = a * other.get(x2, y2);
                    }
                }
            }
        }
        Ok(Self {
            nx,
            ny,
            p,
        })
    }

    /// The n-fold i.i.d. product (P_XY)^{×n}.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain { what: "n", value: 0.0 });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }
}

fn validate_flat(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
    }
    let total = neumaier_sum(p.iter().copied());
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

fn validate_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    validate_flat(p)?;
    validate_flat(q)
}

/// Per-cell value of log2(P_Y / P_XY), the conditional information density.
fn info_density(d: &FiniteJointDistribution) -> Vec<(f64, f64)> {
    let p_y = d.marginal_y();
    let mut out = Vec::with_capacity(d.p.len());
    for x in 0..d.nx {
        for (y, py) in p_y.iter().enumerate() {
            let pxy = d.get(x, y);
            if pxy > 0.0 {
                out.push((pxy, (py / pxy).log2()));
            }
        }
    }
    out
}

/// H(X|Y) = Σ P_XY log2(P_Y / P_XY).
pub fn cond_entropy(d: &FiniteJointDistribution) -> f64 {
    neumaier_sum(info_density(d).into_iter().map(|(p, i)| p * i)).max(0.0)
}

/// V(X|Y), the variance of the conditional information density.
pub fn cond_entropy_variance(d: &FiniteJointDistribution) -> f64 {
    central_moment(d, |dev| dev * dev)
}

/// T(X|Y), the third absolute central moment of the information density.
pub fn cond_third_moment(d: &FiniteJointDistribution) -> f64 {
    central_moment(d, |dev| dev.abs().powi(3))
}

fn central_moment(d: &FiniteJointDistribution, f: impl Fn(f64) -> f64) -> f64 {
    let dens = info_density(d);
    let h = neumaier_sum(dens.iter().map(|(p, i)| p * i));
    neumaier_sum(dens.iter().map(|(p, i)| p * f(i - h)))
}

/// Σ_y max_x P_XY(x, y).
pub fn guessing_probability(d: &FiniteJointDistribution) -> f64 {
    (0..d.ny)
        .map(|y| (0..d.nx).map(|x| d.get(x, y)).fold(0.0, f64::max))
        .sum()
}

/// H_min(X|Y) = −log2 p_guess(X|Y).
pub fn min_entropy(d: &FiniteJointDistribution) -> f64 {
    (-guessing_probability(d).log2()).max(0.0)
}

/// One atom of the log-likelihood ratio log2(P/Q) under both measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub log_ratio: f64,
    pub mass_p: f64,
    pub mass_q: f64,
}

/// The distribution of log2(P/Q) as sorted atoms.
///
/// Outcomes with P = Q = 0 are dropped, P > 0 = Q gives a `+inf` atom and
/// P = 0 < Q a `-inf` atom. Atoms whose ratios agree to within relative
/// rounding noise are merged.
pub fn spectrum(p: &[f64], q: &[f64]) -> Result<Vec<SpectrumPoint>> {
    validate_pair(p, q)?;
    let mut points: Vec<SpectrumPoint> = p
        .iter()
        .zip(q)
        .filter(|(a, b)| **a > 0.0 || **b > 0.0)
        .map(|(&a, &b)| SpectrumPoint {
            log_ratio: if b == 0.0 {
                f64::INFINITY
            } else if a == 0.0 {
                f64::NEG_INFINITY
            } else {
                (a / b).log2()
            },
            mass_p: a,
            mass_q: b,
        })
        .collect();
    points.sort_by(|a, b| a.log_ratio.total_cmp(&b.log_ratio));

    let mut merged: Vec<SpectrumPoint> = Vec::new();
    let mut anchor = f64::NAN;
    for pt in points {
        match merged.last_mut() {
            Some(last) if same_atom(anchor, pt.log_ratio) => {
                last.mass_p += pt.mass_p;
                last.mass_q += pt.mass_q;
            }
            _ => {
                anchor = pt.log_ratio;
                merged.push(pt);
            }
        }
    }
    Ok(merged)
}

fn same_atom(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// D_s^ε(P‖Q) = sup{R : Pr_P[log2(P/Q) ≤ R] ≤ ε}.
///
/// For a discrete spectrum the supremum is the log-ratio of the first atom
/// at which the inclusive cumulative P-mass exceeds ε. An `+inf` first
/// violating atom yields [`Error::UnboundedSpectrum`].
pub fn divergence_spectrum(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    spectrum_quantile(&spectrum(p, q)?, eps)
}

pub(crate) fn spectrum_quantile(points: &[SpectrumPoint], eps: f64) -> Result<f64> {
    let limit = eps * (1.0 + MASS_TOL);
    let mut cum = 0.0;
    for pt in points {
        cum += pt.mass_p;
        if cum > limit {
            return if pt.log_ratio == f64::INFINITY {
                Err(Error::UnboundedSpectrum)
            } else {
                Ok(pt.log_ratio)
            };
        }
    }
    // all P-mass accounted for at or below eps: only possible through rounding
    Err(Error::UnboundedSpectrum)
}

/// D_h^ε(P‖Q) = −log2(β_{1−ε}(P,Q) / (1−ε)) via the Neyman–Pearson test.
pub fn hypothesis_testing_divergence(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    if p.len() > MAX_TEST_OUTCOMES {
        return Err(Error::TooLarge(p.len()));
    }
    let beta = type_two_error(&spectrum(p, q)?, 1.0 - eps);
    if beta <= 0.0 {
        return Err(Error::InfiniteDivergence);
    }
    Ok(-(beta / (1.0 - eps)).log2())
}

/// Smallest Q-acceptance of a test accepting P-mass `alpha`: accept atoms in
/// decreasing likelihood-ratio order, randomising on the boundary atom.
fn type_two_error(points: &[SpectrumPoint], alpha: f64) -> f64 {
    let mut need = alpha;
    let mut beta = 0.0;
    for pt in points.iter().rev() {
        if need <= 0.0 {
            break;
        }
        if pt.mass_p <= 0.0 {
            continue;
        }
        if pt.mass_p >= need {
            beta += pt.mass_q * (need / pt.mass_p);
            need = 0.0;
        } else {
            beta += pt.mass_q;
            need -= pt.mass_p;
        }
    }
    beta
}

/// log|M| ≥ H_min(X|Y)_Q − D_s^{ε+δ}(P_XY‖Q_XY) + log2 δ for every
/// ε-correct one-way reconciliation code on `p_xy`.
pub fn one_shot_converse(
    p_xy: &FiniteJointDistribution,
    q_xy: &FiniteJointDistribution,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    check_probability("eps", eps)?;
    check_probability("delta", delta)?;
    if eps + delta >= 1.0 {
        return Err(Error::Precondition(format!(
            "eps + delta = {} must be below 1",
            eps + delta
        )));
    }
    if (p_xy.nx, p_xy.ny) != (q_xy.nx, q_xy.ny) {
        return Err(Error::LengthMismatch {
            expected: p_xy.p.len(),
            got: q_xy.p.len(),
        });
    }
    let ds = divergence_spectrum(&p_xy.p, &q_xy.p, eps + delta)?;
    Ok(min_entropy(q_xy) - ds + delta.log2())
}
