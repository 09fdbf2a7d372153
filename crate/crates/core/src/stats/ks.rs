//! Two-sample Kolmogorov-Smirnov test.

use crate::error::{Error, Result};
use crate::stats::special::kolmogorov_survival;
use crate::stats::TestResult;

/// D = sup |ECDF_x - ECDF_y|, with the p-value from the asymptotic
/// Kolmogorov distribution at effective sample size nm/(n+m). The asymptotic
/// p is an approximation for very small samples.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientData(
            "ks_two_sample requires non-empty samples".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Validation("NaN in KS sample".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n || j < m {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        // step both ECDFs past every sample equal to v before measuring
        while i < n && xs[i] == v {
            i += 1;
        }
        while j < m && ys[j] == v {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(gap);
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_survival(ne.sqrt() * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force D: scan |ECDF_x(t) - ECDF_y(t)| at every sample point.
    fn oracle_d(x: &[f64], y: &[f64]) -> f64 {
        let ecdf = |s: &[f64], t: f64| {
            s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64
        };
        x.iter()
            .chain(y)
            .map(|&t| (ecdf(x, t) - ecdf(y, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identical_samples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_supports() {
        let r = ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[1.0], &[]).is_err());
    }

    #[test]
    fn p_close_to_permutation_oracle_on_small_samples() {
        // exact permutation distribution of D via index subsets
        let x = [0.1, 0.5, 0.9, 1.3, 1.7, 2.1];
        let y = [0.8, 1.1, 1.9, 2.4, 2.9, 3.3];
        let all: Vec<f64> = x.iter().chain(&y).copied().collect();
        let observed = ks_two_sample(&x, &y).unwrap();
        let n = all.len();
        let mut ge = 0usize;
        let mut count = 0usize;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != x.len() {
                continue;
            }
            let (mut px, mut py) = (Vec::new(), Vec::new());
            for (idx, &v) in all.iter().enumerate() {
                if mask & (1 << idx) != 0 {
                    px.push(v);
                } else {
                    py.push(v);
                }
            }
            if oracle_d(&px, &py) >= observed.statistic - 1e-12 {
                ge += 1;
            }
            count += 1;
        }
        let exact_p = ge as f64 / count as f64;
        assert!(
            (observed.p_value - exact_p).abs() < 0.05,
            "asymptotic {} vs permutation {exact_p}",
            observed.p_value
        );
    }

    proptest! {
        #[test]
        fn statistic_matches_oracle_and_is_symmetric(
            x in proptest::collection::vec(-5.0f64..5.0, 1..6),
            y in proptest::collection::vec(-5.0f64..5.0, 1..6),
        ) {
            let fwd = ks_two_sample(&x, &y).unwrap();
            let rev = ks_two_sample(&y, &x).unwrap();
            prop_assert_eq!(fwd.statistic, rev.statistic);
            prop_assert!((fwd.statistic - oracle_d(&x, &y)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&fwd.p_value));
        }
    }
}
