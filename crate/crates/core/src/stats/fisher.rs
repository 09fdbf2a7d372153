//! Fisher's exact test on 2x2 contingency tables, two-sided.
//!
//! Table probabilities are computed with exact integer arithmetic so the
//! "probability at most that of the observed table" rule never misorders a
//! tie, and the resulting p-value is an exact ratio of integers.

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with rows = sick / not-sick month and columns = keyword present /
/// absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// A test statistic together with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Unnormalized hypergeometric weights C(r1,k)·C(r2,c1-k) for every k
/// consistent with the margins, built by exact integer recurrence.
fn margin_weights(r1: u64, r2: u64, c1: u64) -> (u64, Vec<BigUint>) {
    let n = r1 + r2;
    let k_min = c1.saturating_sub(r2);
    let k_max = r1.min(c1);
    debug_assert!(c1 <= n);
    let mut weights = Vec::with_capacity((k_max - k_min + 1) as usize);
    let mut w = binomial(r1, k_min) * binomial(r2, c1 - k_min);
    weights.push(w.clone());
    for k in k_min..k_max {
        // C(r1,k+1)/C(r1,k) = (r1-k)/(k+1)
        // C(r2,c1-k-1)/C(r2,c1-k) = (c1-k)/(r2-c1+k+1)
        w = w * (r1 - k) * (c1 - k) / ((k + 1) * (r2 + k + 1 - c1));
        weights.push(w.clone());
    }
    (k_min, weights)
}

fn binomial(n: u64, k: u64) -> BigUint {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn ratio_to_f64(num: BigUint, den: BigUint) -> f64 {
    Ratio::new(BigInt::from(num), BigInt::from(den))
        .to_f64()
        .unwrap_or(f64::NAN)
}

/// Two-sided exact test: p is the total probability of all tables with the
/// observed margins whose probability does not exceed the observed table's.
/// The statistic is the observed table's hypergeometric probability.
pub fn fisher_exact(t: &ContingencyTable2x2) -> Result<TestResult> {
    if t.total() == 0 {
        return Err(Error::Validation("empty contingency table".into()));
    }
    let r1 = t.a + t.b;
    let r2 = t.c + t.d;
    let c1 = t.a + t.c;
    let (k_min, weights) = margin_weights(r1, r2, c1);
    let observed = &weights[(t.a - k_min) as usize];
    let mut total = BigUint::zero();
    let mut at_most = BigUint::zero();
    for w in &weights {
        total += w;
        if w <= observed {
            at_most += w;
        }
    }
    Ok(TestResult {
        statistic: ratio_to_f64(observed.clone(), total.clone()),
        p_value: ratio_to_f64(at_most, total),
    })
}

/// (a·d)/(b·c), with 0 when a·d = 0 and +∞ when only b·c = 0.
pub fn odds_ratio(t: &ContingencyTable2x2) -> f64 {
    let num = t.a as f64 * t.d as f64;
    let den = t.b as f64 * t.c as f64;
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}
