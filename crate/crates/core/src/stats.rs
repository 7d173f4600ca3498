//! Gap statistics of pooled point fields and the two-sample K-S test.

use crate::fields::PointField;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("gap pool is empty")]
    EmptyPool,
    #[error("K-S test needs two non-empty samples")]
    EmptySample,
    #[error("jump distance must be at least 1")]
    ZeroJump,
}

/// Consecutive gaps of many replicas, kept apart by replica.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapPool {
    gaps: Vec<f64>,
    offsets: Vec<usize>,
}

impl GapPool {
    pub fn new() -> Self {
        Self { gaps: Vec::new(), offsets: vec![0] }
    }

    pub fn from_fields<'a, I: IntoIterator<Item = &'a PointField>>(fields: I) -> Self {
        let mut pool = Self::new();
        for f in fields {
            pool.push_replica(f.gaps());
        }
        pool
    }

    pub fn push_replica(&mut self, gaps: impl IntoIterator<Item = f64>) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.gaps.extend(gaps);
        self.offsets.push(self.gaps.len());
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// `offsets[r]..offsets[r + 1]` is replica `r`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn replicas(&self) -> impl Iterator<Item = &[f64]> {
        self.offsets.windows(2).map(|w| &self.gaps[w[0]..w[1]])
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }
}

/// Gaps divided by the pooled mean gap.
pub fn delta0(pool: &GapPool) -> Result<Vec<f64>, StatsError> {
    if pool.is_empty() {
        return Err(StatsError::EmptyPool);
    }
    let mean = pool.gaps.iter().sum::<f64>() / pool.len() as f64;
    Ok(pool.gaps.iter().map(|g| g / mean).collect())
}

/// `gap[i + k] / gap[i]` for every overlapping window inside each replica.
pub fn jump_k_ratios(pool: &GapPool, k: usize) -> Result<Vec<f64>, StatsError> {
    if k == 0 {
        return Err(StatsError::ZeroJump);
    }
    Ok(pool.replicas().flat_map(|gaps| gaps.iter().zip(gaps.iter().skip(k)).map(|(a, b)| b / a)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum distance between the two empirical CDFs.
    pub d: f64,
    pub p: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_test(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let d = ks_statistic(a, b);
    let (n1, n2) = (a.len(), b.len());
    let m = (n1 * n2) as f64 / (n1 + n2) as f64;
    let root = m.sqrt();
    let p = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
    Ok(KsResult { d, p, n1, n2 })
}

/// `sup |F_a − F_b|` over the pooled sample.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // once one sample is exhausted the gap only shrinks towards 0
    d
}

const SERIES_EPS: f64 = 1e-12;

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`.
///
/// The alternating series converges slowly for small λ, so below 1.18 the
/// equivalent Jacobi-theta form of the CDF is summed instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 { 1.0 - kolmogorov_cdf_small(lambda) } else { kolmogorov_q_series(lambda) };
    q.clamp(0.0, 1.0)
}

fn kolmogorov_q_series(lambda: f64) -> f64 {
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=1000 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    2.0 * sum
}

/// `P(K ≤ λ) = √(2π)/λ Σ_{j≥1} exp(−(2j−1)² π² / (8λ²))`.
fn kolmogorov_cdf_small(lambda: f64) -> f64 {
    let base = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
    let mut sum = 0.0;
    for j in 1..=1000 {
        let odd = (2 * j - 1) as f64;
        let term = (odd * odd * base).exp();
        sum += term;
        if term < SERIES_EPS {
            break;
        }
    }
    (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pool(replicas: &[&[f64]]) -> GapPool {
        let mut p = GapPool::new();
        for r in replicas {
            p.push_replica(r.iter().copied());
        }
        p
    }

    /// ECDF distance by evaluating both ECDFs at every pooled point.
    fn brute_force_d(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        a.iter().chain(b).map(|&x| (ecdf(a, x) - ecdf(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn delta0_examples() {
        assert_eq!(delta0(&pool(&[&[2.0, 2.0, 2.0]])).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(delta0(&pool(&[&[1.0, 3.0]])).unwrap(), vec![0.5, 1.5]);
        assert_eq!(delta0(&GapPool::new()).unwrap_err(), StatsError::EmptyPool);
    }

    #[test]
    fn delta0_pools_across_replicas() {
        // pooled mean 2, not the per-replica means 1 and 3
        assert_eq!(delta0(&pool(&[&[1.0, 1.0], &[3.0, 3.0]])).unwrap(), vec![0.5, 0.5, 1.5, 1.5]);
    }

    #[test]
    fn jump_examples() {
        let p = pool(&[&[1.0, 2.0, 4.0, 8.0]]);
        assert_eq!(jump_k_ratios(&p, 1).unwrap(), vec![2.0, 2.0, 2.0]);
        assert_eq!(jump_k_ratios(&p, 3).unwrap(), vec![8.0]);
        assert!(jump_k_ratios(&p, 4).unwrap().is_empty());
        let flat = pool(&[&[5.0, 5.0, 5.0]]);
        for k in 1..3 {
            assert!(jump_k_ratios(&flat, k).unwrap().iter().all(|&r| r == 1.0));
        }
        assert_eq!(jump_k_ratios(&p, 0).unwrap_err(), StatsError::ZeroJump);
    }

    #[test]
    fn jump_windows_stay_inside_replicas() {
        let p = pool(&[&[1.0, 2.0], &[100.0, 300.0]]);
        assert_eq!(jump_k_ratios(&p, 1).unwrap(), vec![2.0, 3.0]);
        assert_eq!(p.offsets(), &[0, 2, 4]);
    }

    #[test]
    fn ks_examples() {
        let a = [0.3, 1.0, 2.5, 2.5];
        let r = ks_test(&a, &a).unwrap();
        assert_eq!((r.d, r.p), (0.0, 1.0));
        assert_eq!(ks_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap().d, 1.0);
        assert_eq!(ks_test(&[1.0, 2.0], &[1.5, 2.5]).unwrap().d, 0.5);
        assert_eq!(ks_test(&[], &[1.0]).unwrap_err(), StatsError::EmptySample);
    }

    #[test]
    fn q_function_known_values() {
        // Q(1.358) is the classical 5% point; Q(1.628) the 1% point
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(0.1) > 0.999_999);
        assert!(kolmogorov_q(5.0) < 1e-20);
    }

    #[test]
    fn q_forms_agree_where_both_converge() {
        for i in 0..=40 {
            let lambda = 0.6 + 0.025 * i as f64;
            let a = kolmogorov_q_series(lambda);
            let b = 1.0 - kolmogorov_cdf_small(lambda);
            assert!((a - b).abs() < 1e-10, "{lambda}: {a} vs {b}");
        }
    }

    #[test]
    fn q_is_monotone() {
        let mut prev = 1.0;
        for i in 1..400 {
            let q = kolmogorov_q(i as f64 * 0.01);
            assert!(q <= prev + 1e-15);
            prev = q;
        }
    }

    #[test]
    fn rejection_matches_critical_value() {
        // the small-sample correction shifts the threshold by (0.12 + 0.11/√m)/√m
        for (n1, n2) in [(400usize, 400usize), (1000, 300), (20000, 20000)] {
            let m = (n1 * n2) as f64 / (n1 + n2) as f64;
            let crit = 1.358 / m.sqrt();
            assert!((0.12 + 0.11 / m.sqrt()) / m.sqrt() < 0.01);
            for (scale, reject) in [(0.98, false), (1.02, true)] {
                let d = crit * scale;
                let root = m.sqrt();
                let p = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
                assert_eq!(p < 0.05, reject, "n1={n1} n2={n2} scale={scale}");
            }
        }
    }

    #[test]
    fn null_rejection_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 500;
        let mut rejected = 0;
        for _ in 0..trials {
            let a: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
            if ks_test(&a, &b).unwrap().p < 0.05 {
                rejected += 1;
            }
        }
        let rate = rejected as f64 / trials as f64;
        assert!((rate - 0.05).abs() <= 0.03, "rate {rate}");
    }

    proptest! {
        #[test]
        fn statistic_matches_brute_force(
            a in prop::collection::vec(prop_oneof![0i32..20, -5i32..5].prop_map(f64::from), 1..40),
            b in prop::collection::vec((0i32..20).prop_map(f64::from), 1..40),
        ) {
            let r = ks_test(&a, &b).unwrap();
            prop_assert!((r.d - brute_force_d(&a, &b)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.p));
        }

        #[test]
        fn delta0_is_scale_free(gaps in prop::collection::vec(0.01f64..10.0, 1..200), c in 0.001f64..1000.0, exp in -20i32..20) {
            let base = pool(&[&gaps]);
            let a = delta0(&base).unwrap();
            let mean = a.iter().sum::<f64>() / a.len() as f64;
            prop_assert!((mean - 1.0).abs() < 1e-12);

            // powers of two scale exactly, so the K-S distance is exactly zero
            let exact = pool(&[&gaps.iter().map(|g| g * 2f64.powi(exp)).collect::<Vec<_>>()]);
            prop_assert_eq!(ks_test(&a, &delta0(&exact).unwrap()).unwrap().d, 0.0);

            let scaled = pool(&[&gaps.iter().map(|g| g * c).collect::<Vec<_>>()]);
            for (x, y) in a.iter().zip(&delta0(&scaled).unwrap()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
