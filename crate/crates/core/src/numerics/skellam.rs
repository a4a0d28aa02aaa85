//! Poisson and Skellam (difference of two independent Poissons) distributions.
//!
//! All mass functions are evaluated in log space. The Skellam mass combines
//! the `(l1/l2)^(m/2)` factor with `ln I_|m|(2 sqrt(l1 l2))` before
//! exponentiating, so means in the thousands are safe.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::bessel::log_bessel_i;
use crate::error::{Error, Result};

/// Standard deviations covered on each side of the mean by tail sums.
pub const TAIL_SIGMAS: f64 = 12.0;

/// Extra integers added to the tail window; keeps small-mean (skewed) tails
/// below 1e-12 where `12 sigma` alone is only a few integers wide.
const TAIL_MARGIN: f64 = 20.0;

/// `ln P(X = k)` for `X ~ Poisson(lambda)`.
pub fn ln_poisson_pmf(k: i64, lambda: f64) -> f64 {
    if k < 0 {
        return f64::NEG_INFINITY;
    }
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let k = k as f64;
    k * lambda.ln() - lambda - ln_gamma(k + 1.0)
}

pub fn poisson_pmf(k: i64, lambda: f64) -> f64 {
    ln_poisson_pmf(k, lambda).exp()
}

/// Distribution of the net per-slot change in complex count: `X1 - X2` with
/// `X1 ~ Poisson(lambda1)` and `X2 ~ Poisson(lambda2)` independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkellamDist {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SkellamDist {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(lambda1) || !ok(lambda2) {
            return Err(Error::Domain(format!(
                "Skellam means must be finite and non-negative, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(SkellamDist { lambda1, lambda2 })
    }

    pub fn mean(&self) -> f64 {
        self.lambda1 - self.lambda2
    }

    pub fn variance(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    /// Integer window `[lo, hi]` outside of which the mass is below 1e-12,
    /// clipped to the support.
    pub fn tail_window(&self) -> (i64, i64) {
        let mu = self.mean();
        let half = TAIL_SIGMAS * self.variance().sqrt() + TAIL_MARGIN;
        let mut lo = (mu - half).floor() as i64;
        let mut hi = (mu + half).ceil() as i64;
        if self.lambda1 == 0.0 {
            hi = hi.min(0);
        }
        if self.lambda2 == 0.0 {
            lo = lo.max(0);
        }
        (lo, hi.max(lo))
    }

    pub fn ln_pmf(&self, m: i64) -> f64 {
        let (l1, l2) = (self.lambda1, self.lambda2);
        match (l1 == 0.0, l2 == 0.0) {
            (true, true) => {
                if m == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            (false, true) => ln_poisson_pmf(m, l1),
            (true, false) => ln_poisson_pmf(-m, l2),
            (false, false) => {
                let x = 2.0 * (l1 * l2).sqrt();
                let order = m.unsigned_abs() as u32;
                // x > 0 here, so the only error path (x < 0) is unreachable
                let lb = log_bessel_i(order, x).unwrap_or(f64::NEG_INFINITY);
                -(l1 + l2) + 0.5 * m as f64 * (l1.ln() - l2.ln()) + lb
            }
        }
    }

    pub fn pmf(&self, m: i64) -> f64 {
        self.ln_pmf(m).exp().min(1.0)
    }

    /// `P(N <= m)`.
    pub fn cdf(&self, m: i64) -> f64 {
        let (lo, hi) = self.tail_window();
        if m < lo {
            return 0.0;
        }
        if m >= hi {
            return 1.0;
        }
        let s: f64 = (lo..=m).map(|k| self.pmf(k)).sum();
        s.min(1.0)
    }

    /// `P(N > m)`, summed directly over the upper tail.
    pub fn sf(&self, m: i64) -> f64 {
        let (lo, hi) = self.tail_window();
        if m >= hi {
            return 0.0;
        }
        if m < lo {
            return 1.0;
        }
        let s: f64 = (m + 1..=hi).map(|k| self.pmf(k)).sum();
        s.min(1.0)
    }

    /// Mass table over the tail window, for repeated cdf/sf queries.
    pub fn table(&self) -> PmfTable {
        let (lo, hi) = self.tail_window();
        let pmf: Vec<f64> = (lo..=hi).map(|k| self.pmf(k)).collect();
        PmfTable::from_pmf(lo, pmf)
    }
}

/// `rho(m; lambda1, lambda2)`.
pub fn skellam_pmf(m: i64, dist: &SkellamDist) -> f64 {
    dist.pmf(m)
}

/// `P(N <= m)`.
pub fn skellam_cdf(m: i64, dist: &SkellamDist) -> f64 {
    dist.cdf(m)
}

/// Precomputed mass over `[lo, lo + len)` with cumulative sums from both ends.
#[derive(Debug, Clone)]
pub struct PmfTable {
    lo: i64,
    /// lower[i] = sum of pmf[0..i]
    lower: Vec<f64>,
    /// upper[i] = sum of pmf[i..]
    upper: Vec<f64>,
}

impl PmfTable {
    fn from_pmf(lo: i64, pmf: Vec<f64>) -> Self {
        let n = pmf.len();
        let mut lower = vec![0.0; n + 1];
        for i in 0..n {
            lower[i + 1] = lower[i] + pmf[i];
        }
        let mut upper = vec![0.0; n + 1];
        for i in (0..n).rev() {
            upper[i] = upper[i + 1] + pmf[i];
        }
        PmfTable { lo, lower, upper }
    }

    fn index(&self, m: i64) -> usize {
        let n = self.lower.len() as i64 - 1;
        (m - self.lo + 1).clamp(0, n) as usize
    }

    /// `P(N <= m)`; exactly 0 below the window and 1 above it.
    pub fn cdf(&self, m: i64) -> f64 {
        let (lo, hi) = self.window();
        if m < lo {
            0.0
        } else if m >= hi {
            1.0
        } else {
            self.lower[self.index(m)].min(1.0)
        }
    }

    /// `P(N > m)`; exactly 1 below the window and 0 above it.
    pub fn sf(&self, m: i64) -> f64 {
        let (lo, hi) = self.window();
        if m < lo {
            1.0
        } else if m >= hi {
            0.0
        } else {
            self.upper[self.index(m)].min(1.0)
        }
    }

    /// Window `[lo, hi]` carrying the mass.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.lower.len() as i64 - 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact difference-of-Poissons mass by direct convolution.
    fn convolution(m: i64, l1: f64, l2: f64) -> f64 {
        let start = (-m).max(0);
        (start..start + 400)
            .map(|k| poisson_pmf(m + k, l1) * poisson_pmf(k, l2))
            .sum()
    }

    #[test]
    fn rejects_invalid_means() {
        assert!(SkellamDist::new(-1.0, 0.0).is_err());
        assert!(SkellamDist::new(1.0, f64::NAN).is_err());
        assert!(SkellamDist::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn degenerate_second_mean_is_poisson() {
        let d = SkellamDist::new(5.0, 0.0).unwrap();
        for m in 0..30 {
            let p = poisson_pmf(m, 5.0);
            assert!((d.pmf(m) - p).abs() < 1e-15);
        }
        for m in -5..0 {
            assert_eq!(d.pmf(m), 0.0);
        }
        assert_eq!(d.cdf(-1), 0.0);
    }

    #[test]
    fn degenerate_first_mean_is_negated_poisson() {
        let d = SkellamDist::new(0.0, 3.0).unwrap();
        for m in 0..20 {
            assert!((d.pmf(-m) - poisson_pmf(m, 3.0)).abs() < 1e-15);
        }
        assert_eq!(d.pmf(1), 0.0);
        assert_eq!(d.sf(0), 0.0);
    }

    #[test]
    fn point_mass_when_both_means_vanish() {
        let d = SkellamDist::new(0.0, 0.0).unwrap();
        assert_eq!(d.pmf(0), 1.0);
        assert_eq!(d.pmf(1), 0.0);
        assert_eq!(d.cdf(-1), 0.0);
        assert_eq!(d.cdf(0), 1.0);
    }

    #[test]
    fn unit_means_at_zero() {
        // e^-2 I_0(2); the convolution oracle gives 0.308508...
        let d = SkellamDist::new(1.0, 1.0).unwrap();
        let oracle = convolution(0, 1.0, 1.0);
        assert!((oracle - 0.308_508).abs() < 1e-6);
        assert!((d.pmf(0) - oracle).abs() < 1e-14);
    }

    #[test]
    fn cdf_limits() {
        let d = SkellamDist::new(3.0, 2.0).unwrap();
        assert!((d.cdf(1_000_000) - 1.0).abs() < 1e-12);
        assert_eq!(d.cdf(-1_000_000), 0.0);
        let e = SkellamDist::new(2.0, 2.0).unwrap();
        let brute: f64 = (-60..=0).map(|m| convolution(m, 2.0, 2.0)).sum();
        assert!((e.cdf(0) - brute).abs() < 1e-10);
    }

    #[test]
    fn matches_convolution_on_grid() {
        for &l1 in &[0.3, 1.0, 7.5, 20.0] {
            for &l2 in &[0.2, 2.0, 13.0, 20.0] {
                let d = SkellamDist::new(l1, l2).unwrap();
                for m in -60..=60 {
                    let e = convolution(m, l1, l2);
                    assert!((d.pmf(m) - e).abs() < 1e-10, "m={m} l=({l1},{l2})");
                }
            }
        }
    }

    #[test]
    fn mass_within_twelve_sigma() {
        let grid = [0.1, 1.0, 10.0, 100.0];
        for &l1 in &grid {
            for &l2 in &grid {
                let d = SkellamDist::new(l1, l2).unwrap();
                let sd = d.variance().sqrt();
                let lo = (d.mean() - 12.0 * sd).floor() as i64;
                let hi = (d.mean() + 12.0 * sd).ceil() as i64;
                let s: f64 = (lo..=hi).map(|m| d.pmf(m)).sum();
                assert!(
                    (1.0 - 1e-9..=1.0 + 1e-12).contains(&s),
                    "({l1},{l2}) -> {s}"
                );
            }
        }
    }

    #[test]
    fn large_means_stay_finite() {
        let d = SkellamDist::new(1800.0, 1500.0).unwrap();
        let s: f64 = (-200..=800).map(|m| d.pmf(m)).sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!(d.pmf(300).is_finite() && d.pmf(300) > 0.0);
    }

    #[test]
    fn table_agrees_with_direct_sums() {
        let d = SkellamDist::new(37.0, 21.0).unwrap();
        let t = d.table();
        for m in -40..80 {
            assert!((t.cdf(m) - d.cdf(m)).abs() < 1e-13);
            assert!((t.sf(m) - d.sf(m)).abs() < 1e-13);
        }
        assert_eq!(t.cdf(-1_000_000), 0.0);
        assert_eq!(t.sf(1_000_000), 0.0);
    }

    proptest! {
        #[test]
        fn swapping_means_mirrors_mass(l1 in 0.0f64..60.0, l2 in 0.0f64..60.0, m in -80i64..80) {
            let a = SkellamDist::new(l1, l2).unwrap();
            let b = SkellamDist::new(l2, l1).unwrap();
            prop_assert!((a.pmf(m) - b.pmf(-m)).abs() < 1e-14);
        }

        #[test]
        fn cdf_is_monotone_and_complements_sf(l1 in 0.0f64..200.0, l2 in 0.0f64..200.0, m in -150i64..150) {
            let d = SkellamDist::new(l1, l2).unwrap();
            prop_assert!(d.cdf(m) <= d.cdf(m + 1) + 1e-15);
            prop_assert!((d.cdf(m) + d.sf(m) - 1.0).abs() < 1e-9);
        }
    }
}
