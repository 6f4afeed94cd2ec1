//! Binomial CDF and the "largest k below ε" quantile.
//!
//! The mass function is generated by the ratio recurrence outward from the
//! mode and normalised, which keeps every term relatively accurate without
//! log-gamma cancellation at large `n`. The CDF table is accumulated from the
//! lower tail upward.

use crate::error::{check_probability, Error, Result};

/// Relative slack applied when comparing an accumulated probability mass
/// against a threshold. Atoms that are equal in exact arithmetic compare as
/// equal (inclusive) regardless of summation order.
pub const MASS_TOL: f64 = 1e-12;

/// Tabulated Binomial(n, p) distribution.
#[derive(Debug, Clone)]
pub struct Binomial {
    n: u64,
    p: f64,
    cdf: Vec<f64>,
}

impl Binomial {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self::with_complement(n, p, 1.0 - p))
    }

    /// Build from `p` and an exactly known `1 - p` (e.g. `p = 1 - Q` with `Q`
    /// supplied by the caller), avoiding a rounding step in the complement.
    pub(crate) fn with_complement(n: u64, p: f64, one_minus_p: f64) -> Self {
        let len = n as usize + 1;
        let mut pmf = vec![0.0; len];
        let mode = (((n + 1) as f64 * p).floor() as u64).min(n) as usize;
        pmf[mode] = 1.0;
        let odds = p / one_minus_p;
        for k in mode..n as usize {
            let next = pmf[k] * ((n as usize - k) as f64 / (k + 1) as f64) * odds;
            if next == 0.0 {
                break;
            }
            pmf[k + 1] = next;
        }
        for k in (1..=mode).rev() {
            let prev = pmf[k] * (k as f64 / (n as usize - k + 1) as f64) / odds;
            if prev == 0.0 {
                break;
            }
            pmf[k - 1] = prev;
        }
        let total = neumaier_sum(pmf.iter().copied());

        let mut cdf = Vec::with_capacity(len);
        let mut acc = 0.0;
        let mut comp = 0.0;
        for m in &pmf {
            let v = m / total;
            let t = acc + v;
            if acc.abs() >= v.abs() {
                comp += (acc - t) + v;
            } else {
                comp += (v - t) + acc;
            }
            acc = t;
            cdf.push((acc + comp).min(1.0));
        }
        cdf[len - 1] = 1.0;
        Self { n, p, cdf }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// F(k; n, p); 0 for negative `k`, 1 for `k ≥ n`.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if k as u64 >= self.n {
            1.0
        } else {
            self.cdf[k as usize]
        }
    }

    /// max{k : F(k) ≤ eps}, or −1 when even F(0) exceeds `eps`.
    pub fn quantile(&self, eps: f64) -> i64 {
        let limit = eps * (1.0 + MASS_TOL);
        // number of table entries with cdf <= limit (cdf is nondecreasing)
        let count = self.cdf.partition_point(|&c| c <= limit);
        count as i64 - 1
    }

    /// Exclusive-prefix view of the CDF table, F(0..=n).
    pub fn table(&self) -> &[f64] {
        &self.cdf
    }
}

/// F(k; n, p) = Σ_{ℓ ≤ k} C(n, ℓ) p^ℓ (1 − p)^{n−ℓ}.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain {
            what: "k",
            value: k as f64,
        });
    }
    Ok(Binomial::new(n, p)?.cdf(k as i64))
}

/// F⁻¹(eps; n, p) := max{k : F(k; n, p) ≤ eps}, with sentinel −1.
pub fn binomial_quantile(eps: f64, n: u64, p: f64) -> Result<i64> {
    check_probability("eps", eps)?;
    Ok(Binomial::new(n, p)?.quantile(eps))
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Pascal-style dynamic program over the sum of n Bernoulli(p) bits.
    fn brute_pmf(n: usize, p: f64) -> Vec<f64> {
        let mut dist = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; dist.len() + 1];
            for (k, &m) in dist.iter().enumerate() {
                next[k] += m * (1.0 - p);
                next[k + 1] += m * p;
            }
            dist = next;
        }
        dist
    }

    #[test]
    fn trivial_values() {
        assert_eq!(binomial_cdf(2, 2, 0.5).unwrap(), 1.0);
        assert!((binomial_cdf(0, 2, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(binomial_quantile(0.3, 2, 0.5).unwrap(), 0);
        assert_eq!(binomial_quantile(0.2, 2, 0.5).unwrap(), -1);
        assert_eq!(binomial_quantile(0.8, 2, 0.5).unwrap(), 1);
        assert!(binomial_cdf(3, 2, 0.5).is_err());
        assert!(binomial_cdf(0, 2, 1.0).is_err());
        assert!(binomial_quantile(1.0, 2, 0.5).is_err());
    }

    #[test]
    fn matches_brute_force_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..=1000usize);
            let p = rng.gen_range(0.001..0.999);
            let pmf = brute_pmf(n, p);
            let table = Binomial::new(n as u64, p).unwrap();
            let mut acc = 0.0;
            for (k, m) in pmf.iter().enumerate() {
                acc += m;
                let got = table.cdf(k as i64);
                if acc > 1e-280 {
                    assert!(
                        ((got - acc) / acc).abs() < 1e-10,
                        "n={n} p={p} k={k}: {got} vs {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantile_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=2000u64);
            let p = rng.gen_range(0.01..0.99);
            let eps = rng.gen_range(1e-6..0.999);
            let b = Binomial::new(n, p).unwrap();
            let k = b.quantile(eps);
            if k >= 0 {
                assert!(b.cdf(k) <= eps * (1.0 + MASS_TOL));
            }
            assert!(eps < b.cdf(k + 1));
        }
    }

    #[test]
    fn large_n_is_normalised() {
        let b = Binomial::new(1_000_000, 0.975).unwrap();
        let t = b.table();
        assert_eq!(t[t.len() - 1], 1.0);
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
        let median = b.quantile(0.5);
        assert!((median as f64 - 975_000.0).abs() < 2.0);
    }
}
