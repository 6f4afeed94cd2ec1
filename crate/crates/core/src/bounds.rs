//! Finite-blocklength bounds on the syndrome length of one-way
//! reconciliation for the BSC-correlated source with crossover `q`.
//!
//! All quantities are in bits.

use std::f64::consts::LN_2;

use crate::binomial::{Binomial, MASS_TOL};
use crate::error::{check_probability, Error, Result};
use crate::infocalc::{cond_entropy_variance, cond_third_moment, FiniteJointDistribution};
use crate::normal::{quantile_unchecked, std_normal_pdf};

/// Upper bound on the Berry–Esseen constant used for the explicit O(1) term.
pub const BERRY_ESSEEN_B0: f64 = 0.5;

/// Number of logarithmically spaced δ values scanned by default.
pub const DEFAULT_DELTA_GRID: usize = 200;

/// Block length, target failure probability and crossover probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    n: u64,
    eps: f64,
    q: f64,
}

impl BoundQuery {
    pub fn new(n: u64, eps: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain { what: "n", value: 0.0 });
        }
        check_probability("eps", eps)?;
        if !(q > 0.0 && q < 0.5) {
            return Err(Error::Domain { what: "q", value: q });
        }
        Ok(Self { n, eps, q })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Φ⁻¹(1 − ε).
    fn z(&self) -> f64 {
        -quantile_unchecked(self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Converse,
    Achievability,
}

/// Term-by-term decomposition of a third-order expansion.
///
/// `constant` is the signed O(1) contribution; when `constant_included` is
/// false it is 0 and the O(1) term is simply omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub leading: f64,
    pub gaussian: f64,
    pub log_term: f64,
    pub constant: f64,
    pub constant_included: bool,
    pub total: f64,
    pub direction: Direction,
}

/// h(q) = −q log2 q − (1−q) log2(1−q), with h(0) = h(1) = 0.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain { what: "q", value: q });
    }
    Ok(h_unchecked(q))
}

fn h_unchecked(q: f64) -> f64 {
    let a = if q > 0.0 { -q * q.ln() } else { 0.0 };
    let b = if q < 1.0 { -(1.0 - q) * (-q).ln_1p() } else { 0.0 };
    (a + b) / LN_2
}

/// v(q) = q(1−q) log2²(q/(1−q)).
pub fn entropy_variance(q: f64) -> Result<f64> {
    check_probability("q", q)?;
    Ok(v_unchecked(q))
}

fn v_unchecked(q: f64) -> f64 {
    let l = (q.ln() - (-q).ln_1p()) / LN_2;
    q * (1.0 - q) * l * l
}

/// log2((1−q)/q), the spacing between adjacent atoms of the information
/// spectrum of n BSC uses.
fn atom_spacing(q: f64) -> f64 {
    ((-q).ln_1p() - q.ln()) / LN_2
}

/// ξ(n, ε; Q) = 1 + n^{-1/2} · √v(Q)/h(Q) · Φ⁻¹(1−ε).
pub fn efficiency(query: &BoundQuery) -> f64 {
    let (h, v) = (h_unchecked(query.q), v_unchecked(query.q));
    1.0 + v.sqrt() / h * query.z() / query.nf().sqrt()
}

/// γ = 1/φ(Φ⁻¹(ε)), the slope of Φ⁻¹ at ε.
pub fn quantile_slope(eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    Ok(1.0 / std_normal_pdf(quantile_unchecked(eps)))
}

/// Lower bound n·h + √(n·v)·Φ⁻¹(1−ε) − ½log2 n − O(1).
///
/// With `include_constant` the O(1) term is γ·(B0·T/V + √V) computed from
/// the moments of the single-letter source; this requires
/// n > (B+1)²(1−ε)⁻² with B = B0·T/V^{3/2}.
pub fn converse_expansion(query: &BoundQuery, include_constant: bool) -> Result<BoundReport> {
    let (leading, gaussian) = first_two_terms(query);
    let log_term = -0.5 * query.nf().log2();
    let constant = if include_constant {
        let src = FiniteJointDistribution::bsc(query.q)?;
        let v = cond_entropy_variance(&src);
        let t = cond_third_moment(&src);
        let b = BERRY_ESSEEN_B0 * t / v.powf(1.5);
        let min_n = ((b + 1.0) / (1.0 - query.eps)).powi(2);
        if query.nf() <= min_n {
            return Err(Error::Precondition(format!(
                "explicit constant needs n > {min_n:.3}, got n = {}",
                query.n
            )));
        }
        let gamma = quantile_slope(query.eps)?;
        -gamma * (BERRY_ESSEEN_B0 * t / v + v.sqrt())
    } else {
        0.0
    };
    Ok(BoundReport {
        leading,
        gaussian,
        log_term,
        constant,
        constant_included: include_constant,
        total: leading + gaussian + log_term + constant,
        direction: Direction::Converse,
    })
}

/// Upper bound n·h + √(n·v)·Φ⁻¹(1−ε) + ½log2 n + O(1); the O(1) term has no
/// explicit value and is always reported as omitted.
pub fn achievability_expansion(query: &BoundQuery) -> BoundReport {
    let (leading, gaussian) = first_two_terms(query);
    let log_term = 0.5 * query.nf().log2();
    BoundReport {
        leading,
        gaussian,
        log_term,
        constant: 0.0,
        constant_included: false,
        total: leading + gaussian + log_term,
        direction: Direction::Achievability,
    }
}

fn first_two_terms(query: &BoundQuery) -> (f64, f64) {
    let n = query.nf();
    (
        n * h_unchecked(query.q),
        (n * v_unchecked(query.q)).sqrt() * query.z(),
    )
}

/// Bounds for sources with vanishing information variance:
/// (n·h + log2(1−ε), n·h − log2 ε).
pub fn degenerate_bounds(n: u64, eps: f64, h: f64) -> Result<(f64, f64)> {
    check_probability("eps", eps)?;
    let base = n as f64 * h;
    Ok((base + (1.0 - eps).log2(), base - eps.log2()))
}

/// Converse for a fixed δ ∈ (0, 1−ε):
/// n·h(Q) + (n(1−Q) − F⁻¹(ε+δ; n, 1−Q) − 1)·log2((1−Q)/Q) + log2 δ.
pub fn converse_at_delta(query: &BoundQuery, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0 - query.eps) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
        });
    }
    let table = matches_table(query);
    Ok(plateau_value(query, table.quantile(query.eps + delta), delta))
}

fn matches_table(query: &BoundQuery) -> Binomial {
    Binomial::with_complement(query.n, 1.0 - query.q, query.q)
}

fn plateau_value(query: &BoundQuery, k: i64, delta: f64) -> f64 {
    let n = query.nf();
    n * h_unchecked(query.q) + (n * (1.0 - query.q) - k as f64 - 1.0) * atom_spacing(query.q)
        + delta.log2()
}

/// The exact binomial converse with δ = ε/√n:
/// n·h(Q) + (n(1−Q) − F⁻¹(ε(1+1/√n); n, 1−Q) − 1)·log2((1−Q)/Q)
///   − ½log2 n − log2(1/ε).
pub fn exact_converse(query: &BoundQuery) -> Result<f64> {
    let n = query.nf();
    let level = query.eps * (1.0 + 1.0 / n.sqrt());
    if level >= 1.0 {
        return Err(Error::Precondition(format!(
            "eps(1 + 1/sqrt(n)) = {level} must be below 1"
        )));
    }
    let k = matches_table(query).quantile(level);
    Ok(n * h_unchecked(query.q)
        + (n * (1.0 - query.q) - k as f64 - 1.0) * atom_spacing(query.q)
        - 0.5 * n.log2()
        - (1.0 / query.eps).log2())
}

/// Result of maximising the binomial converse over δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseOptimum {
    /// The converse evaluated at `delta`.
    pub value: f64,
    pub delta: f64,
    /// F⁻¹(ε+δ; n, 1−Q) at `delta`.
    pub quantile: i64,
}

/// Maximises the binomial converse over δ ∈ (0, 1−ε).
///
/// Candidates are `delta_grid` log-spaced points, δ = ε/√n, and the right
/// end of every plateau of δ ↦ F⁻¹(ε+δ). On a plateau the objective grows
/// with δ, so its supremum sits at the open right end; that end is backed
/// off by a relative 1e-9 (and clear of the [`MASS_TOL`] tie band) so the
/// reported δ attains the reported value up to ~1e-9 bits.
pub fn exact_converse_optimized(query: &BoundQuery, delta_grid: usize) -> ConverseOptimum {
    let table = matches_table(query);
    let eps = query.eps;
    let span = 1.0 - eps;
    let mut best = ConverseOptimum {
        value: f64::NEG_INFINITY,
        delta: f64::NAN,
        quantile: -1,
    };
    let mut consider = |k: i64, delta: f64| {
        let v = plateau_value(query, k, delta);
        if v > best.value {
            best = ConverseOptimum {
                value: v,
                delta,
                quantile: k,
            };
        }
    };

    let lowest = 1e-12_f64.ln();
    for i in 0..delta_grid {
        let frac = (delta_grid - i) as f64 / delta_grid as f64;
        let delta = span * (lowest * frac).exp();
        consider(table.quantile(eps + delta), delta);
    }
    let nominal = eps / query.nf().sqrt();
    if nominal < span {
        consider(table.quantile(eps + nominal), nominal);
    }
    let cdf = table.table();
    for k in -1..query.n as i64 {
        let right = cdf[(k + 1) as usize].min(1.0);
        let sup = right - eps;
        let delta = sup - (1e-9 * sup).max(4.0 * MASS_TOL * right);
        if delta > 0.0 {
            consider(table.quantile(eps + delta), delta);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::std_normal_quantile;

    fn q(n: u64, eps: f64, q: f64) -> BoundQuery {
        BoundQuery::new(n, eps, q).unwrap()
    }

    /// Plain evaluation of h and v straight from their definitions.
    fn h_ref(x: f64) -> f64 {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }

    fn v_ref(x: f64) -> f64 {
        x * (1.0 - x) * (x / (1.0 - x)).log2().powi(2)
    }

    #[test]
    fn query_validation() {
        assert!(BoundQuery::new(0, 0.1, 0.1).is_err());
        assert!(BoundQuery::new(10, 0.0, 0.1).is_err());
        assert!(BoundQuery::new(10, 0.1, 0.5).is_err());
        assert!(BoundQuery::new(10, 0.1, 0.0).is_err());
    }

    #[test]
    fn entropy_functions() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(binary_entropy(-0.1).is_err());
        assert!((binary_entropy(0.025).unwrap() - h_ref(0.025)).abs() < 1e-15);
        assert!((binary_entropy(0.025).unwrap() - 0.168_661).abs() < 1e-6);

        assert_eq!(entropy_variance(0.5).unwrap(), 0.0);
        assert!(entropy_variance(0.0).is_err());
        assert!(entropy_variance(1.0).is_err());
        assert!((entropy_variance(0.025).unwrap() - v_ref(0.025)).abs() < 1e-14);
        assert!((entropy_variance(0.025).unwrap() - 0.680_95).abs() < 1e-4);
        for &x in &[0.01, 0.1, 0.3] {
            let a = entropy_variance(x).unwrap();
            let b = entropy_variance(1.0 - x).unwrap();
            assert!((a - b).abs() < 1e-13);
            assert!((binary_entropy(x).unwrap() - binary_entropy(1.0 - x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn efficiency_values() {
        let xi = efficiency(&q(10_000, 1e-2, 0.025));
        let expected = 1.0
            + v_ref(0.025).sqrt() / h_ref(0.025) * std_normal_quantile(0.99).unwrap() / 100.0;
        assert!((xi - expected).abs() < 1e-12);
        assert!((xi - 1.1138).abs() < 1e-4);
        assert!(xi > 1.1);
        for &n in &[1u64, 17, 10_000] {
            assert_eq!(efficiency(&q(n, 0.5, 0.2)), 1.0);
        }
        assert!(efficiency(&q(100, 0.6, 0.2)) < 1.0);
    }

    #[test]
    fn converse_expansion_terms() {
        let query = q(1_000_000, 1e-2, 0.05);
        let r = converse_expansion(&query, false).unwrap();
        let expected = 1e6 * h_ref(0.05) + 1000.0 * v_ref(0.05).sqrt() * std_normal_quantile(0.99).unwrap()
            - 0.5 * 1e6f64.log2();
        assert!((r.total - expected).abs() < 1e-6);
        assert!(!r.constant_included && r.constant == 0.0);
        assert_eq!(r.log_term, -0.5 * 1e6f64.log2());
        assert!((r.leading + r.gaussian + r.log_term + r.constant - r.total).abs() < 1e-9);
        assert!((efficiency(&query) * r.leading - (r.leading + r.gaussian)).abs() < 1e-6);
    }

    #[test]
    fn converse_constant() {
        let gamma = quantile_slope(1e-4).unwrap();
        assert!((gamma - 2.5e3).abs() < 50.0);

        let query = q(1_000_000, 1e-2, 0.05);
        let r = converse_expansion(&query, true).unwrap();
        assert!(r.constant_included && r.constant < 0.0);
        assert!((r.leading + r.gaussian + r.log_term + r.constant - r.total).abs() < 1e-9);
        // tiny n violates the Berry-Esseen precondition
        assert!(matches!(
            converse_expansion(&q(5, 1e-2, 0.05), true),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn achievability_gap_is_log_n() {
        for &n in &[1u64, 10, 10_000, 1_000_000] {
            let query = q(n, 0.1, 0.05);
            let a = achievability_expansion(&query);
            let c = converse_expansion(&query, false).unwrap();
            assert!((a.total - c.total - (n as f64).log2()).abs() < 1e-9);
            assert_eq!(a.leading, c.leading);
            assert_eq!(a.gaussian, c.gaussian);
            assert_eq!(a.direction, Direction::Achievability);
        }
    }

    #[test]
    fn degenerate_values() {
        assert_eq!(degenerate_bounds(100, 0.5, 1.0).unwrap(), (99.0, 101.0));
        let (c, a) = degenerate_bounds(10, 0.01, 0.5).unwrap();
        assert!((c - (5.0 + 0.99f64.log2())).abs() < 1e-15);
        assert!((a - (5.0 - 0.01f64.log2())).abs() < 1e-15);
        for i in 1..50 {
            let e = i as f64 / 100.0;
            let (c, a) = degenerate_bounds(7, e, 0.3).unwrap();
            assert!(c <= a);
        }
    }

    #[test]
    fn exact_converse_matches_delta_form() {
        for &(n, eps, qq) in &[(10u64, 0.1, 0.1), (1000, 0.01, 0.05), (100_000, 0.01, 0.05)] {
            let query = q(n, eps, qq);
            let a = exact_converse(&query).unwrap();
            let b = converse_at_delta(&query, eps / (n as f64).sqrt()).unwrap();
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert!(exact_converse(&q(1, 0.6, 0.1)).is_err());
    }

    #[test]
    fn exact_converse_close_to_expansion() {
        let query = q(100_000, 1e-2, 0.05);
        let exact = exact_converse(&query).unwrap();
        let approx = converse_expansion(&query, false).unwrap().total;
        assert!((exact - approx).abs() < 8.0, "{exact} vs {approx}");
    }

    #[test]
    fn optimized_converse_monotone_in_eps() {
        // at the nominal δ = ε/√n the bound need not be monotone, but the
        // supremum over δ is
        for &n in &[50u64, 1000] {
            let mut last = f64::INFINITY;
            for i in 1..40 {
                let eps = i as f64 / 100.0;
                let v = exact_converse_optimized(&q(n, eps, 0.07), DEFAULT_DELTA_GRID).value;
                assert!(v <= last + 1e-9);
                last = v;
            }
        }
    }

    /// Grid search of the literal objective
    /// n·h + (min{k : F(k; n, Q) ≥ 1−ε−δ} − nQ)·log2((1−Q)/Q) + log2 δ.
    fn brute_force_optimum(n: usize, eps: f64, qq: f64, steps: usize) -> f64 {
        let mut pmf = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; pmf.len() + 1];
            for (k, &m) in pmf.iter().enumerate() {
                next[k] += m * (1.0 - qq);
                next[k + 1] += m * qq;
            }
            pmf = next;
        }
        let cdf: Vec<f64> = pmf
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        let c = ((1.0 - qq) / qq).log2();
        let mut best = f64::NEG_INFINITY;
        for i in 1..steps {
            let delta = (1.0 - eps) * i as f64 / steps as f64;
            let k = cdf.iter().position(|&f| f >= 1.0 - eps - delta).unwrap_or(n);
            let v = n as f64 * h_ref(qq) + (k as f64 - n as f64 * qq) * c + delta.log2();
            best = best.max(v);
        }
        best
    }

    #[test]
    fn optimized_matches_brute_force() {
        let query = q(4, 0.1, 0.1);
        let opt = exact_converse_optimized(&query, DEFAULT_DELTA_GRID);
        let oracle = brute_force_optimum(4, 0.1, 0.1, 1_000_000);
        assert!(opt.value >= oracle - 1e-9);
        assert!(opt.value - oracle < 1e-3, "{} vs {oracle}", opt.value);
        for &(n, eps, qq) in &[(9usize, 0.2, 0.3), (30, 0.05, 0.05)] {
            let query = q(n as u64, eps, qq);
            let opt = exact_converse_optimized(&query, DEFAULT_DELTA_GRID);
            let oracle = brute_force_optimum(n, eps, qq, 200_000);
            assert!(opt.value >= oracle - 1e-9 && opt.value - oracle < 1e-2);
        }
    }

    #[test]
    fn optimized_dominates_nominal_delta() {
        for &(n, eps, qq) in &[(4u64, 0.1, 0.1), (1000, 0.01, 0.03), (10_000, 1e-2, 0.025)] {
            let query = q(n, eps, qq);
            let opt = exact_converse_optimized(&query, DEFAULT_DELTA_GRID);
            assert!(opt.value >= exact_converse(&query).unwrap() - 1e-9);
        }
        let query = q(10_000, 1e-2, 0.025);
        let opt = exact_converse_optimized(&query, DEFAULT_DELTA_GRID);
        assert!(opt.value.is_finite());
        assert!(opt.value > 10_000.0 * h_ref(0.025));
    }
}
