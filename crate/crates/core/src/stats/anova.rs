//! Multi-factor analysis of variance with sequential (type-I) sums of
//! squares, main effects only.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::f_survival;

/// One factor's row in the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaRow {
    pub factor: String,
    pub df: usize,
    pub sum_sq: f64,
    pub f_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub residual_df: usize,
    pub residual_sum_sq: f64,
    pub total_sum_sq: f64,
}

/// A factor: a name plus one categorical level per observation.
#[derive(Debug, Clone)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: Vec<String>) -> Self {
        Factor {
            name: name.into(),
            levels,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sequential least-squares decomposition: factors are dummy-coded in the
/// given order and each block's columns are orthogonalized against
/// everything fitted before it, so each factor's sum of squares is the extra
/// variation it explains.
pub fn anova(y: &[f64], factors: &[Factor]) -> Result<AnovaTable> {
    let n = y.len();
    if factors.is_empty() {
        return Err(Error::Validation("anova requires at least one factor".into()));
    }
    for f in factors {
        if f.levels.len() != n {
            return Err(Error::Validation(format!(
                "factor `{}` has {} assignments for {} observations",
                f.name,
                f.levels.len(),
                n
            )));
        }
    }

    // orthonormal basis, seeded with the intercept
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut fitted_ss = 0.0;
    let root_n = (n as f64).sqrt();
    basis.push(vec![1.0 / root_n; n]);
    let mean_component = dot(&basis[0], y);
    fitted_ss += mean_component * mean_component;

    let total_raw_ss = dot(y, y);
    let total_sum_sq = (total_raw_ss - mean_component * mean_component).max(0.0);

    let mut rows = Vec::with_capacity(factors.len());
    let mut model_df = 0usize;
    for factor in factors {
        let distinct: BTreeSet<&String> = factor.levels.iter().collect();
        if distinct.len() < 2 {
            return Err(Error::Validation(format!(
                "factor `{}` needs at least 2 levels",
                factor.name
            )));
        }
        let mut ss = 0.0;
        let mut df = 0usize;
        // dummy columns for every level but the first
        for level in distinct.iter().skip(1) {
            let mut col: Vec<f64> = factor
                .levels
                .iter()
                .map(|l| if l == *level { 1.0 } else { 0.0 })
                .collect();
            let orig_norm2 = dot(&col, &col);
            // two orthogonalization passes for stability
            for _ in 0..2 {
                for q in &basis {
                    let proj = dot(q, &col);
                    for (c, qv) in col.iter_mut().zip(q) {
                        *c -= proj * qv;
                    }
                }
            }
            let norm2 = dot(&col, &col);
            if norm2 <= orig_norm2 * 1e-18 {
                return Err(Error::RankDeficient(factor.name.clone()));
            }
            let norm = norm2.sqrt();
            for c in col.iter_mut() {
                *c /= norm;
            }
            let comp = dot(&col, y);
            ss += comp * comp;
            basis.push(col);
            df += 1;
        }
        model_df += df;
        rows.push(AnovaRow {
            factor: factor.name.clone(),
            df,
            sum_sq: ss.max(0.0),
            f_value: 0.0,
            p_value: 1.0,
        });
        fitted_ss += ss;
    }

    if n <= 1 + model_df {
        return Err(Error::InsufficientData(format!(
            "anova needs more observations than model terms ({n} obs, {} terms)",
            1 + model_df
        )));
    }
    let residual_df = n - 1 - model_df;
    // fp-noise floor so an exactly-flat response reports SS = 0, F = 0
    let eps = total_raw_ss * 1e-14;
    let mut residual_sum_sq = (total_raw_ss - fitted_ss).max(0.0);
    if residual_sum_sq <= eps {
        residual_sum_sq = 0.0;
    }
    let residual_mean_sq = residual_sum_sq / residual_df as f64;

    for row in rows.iter_mut() {
        if row.sum_sq <= eps {
            row.sum_sq = 0.0;
        }
        if row.sum_sq == 0.0 {
            row.f_value = 0.0;
            row.p_value = 1.0;
        } else if residual_mean_sq == 0.0 {
            row.f_value = f64::INFINITY;
            row.p_value = 0.0;
        } else {
            row.f_value = (row.sum_sq / row.df as f64) / residual_mean_sq;
            row.p_value = f_survival(row.f_value, row.df as f64, residual_df as f64);
        }
    }

    Ok(AnovaTable {
        rows,
        residual_df,
        residual_sum_sq,
        total_sum_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factor(name: &str, levels: &[&str]) -> Factor {
        Factor::new(name, levels.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn constant_response_gives_zero_everywhere() {
        let y = vec![2.0; 8];
        let f = factor("g", &["a", "a", "a", "a", "b", "b", "b", "b"]);
        let table = anova(&y, &[f]).unwrap();
        assert_eq!(table.rows[0].sum_sq, 0.0);
        assert_eq!(table.rows[0].f_value, 0.0);
        assert!(table.total_sum_sq < 1e-9);
    }

    #[test]
    fn two_group_hand_case() {
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let f = factor("g", &["a", "a", "b", "b"]);
        let table = anova(&y, &[f]).unwrap();
        assert!((table.rows[0].sum_sq - 1.0).abs() < 1e-12);
        assert!(table.residual_sum_sq.abs() < 1e-12);
        assert_eq!(table.rows[0].df, 1);
        assert_eq!(table.residual_df, 2);
        assert_eq!(table.rows[0].f_value, f64::INFINITY);
        assert_eq!(table.rows[0].p_value, 0.0);
    }

    #[test]
    fn twelve_observation_two_factor_reference() {
        // reference values frozen from an independent least-squares run
        let y = vec![
            3.1, 4.0, 5.2, 2.9, 4.1, 5.0, 4.2, 5.1, 6.0, 3.8, 4.9, 6.2,
        ];
        let a = factor(
            "A",
            &["a", "a", "a", "a", "a", "a", "b", "b", "b", "b", "b", "b"],
        );
        let b = factor(
            "B",
            &["x", "y", "z", "x", "y", "z", "x", "y", "z", "x", "y", "z"],
        );
        let table = anova(&y, &[a, b]).unwrap();
        let ra = &table.rows[0];
        let rb = &table.rows[1];
        assert_eq!((ra.df, rb.df, table.residual_df), (1, 2, 8));
        assert!((ra.sum_sq - 2.900833333333335).abs() < 1e-9);
        assert!((rb.sum_sq - 8.821666666666658).abs() < 1e-9);
        assert!((table.residual_sum_sq - 0.1666666666666667).abs() < 1e-9);
        assert!((ra.f_value - 139.24).abs() < 1e-6);
        assert!((rb.f_value - 211.72).abs() < 1e-6);
        assert!((ra.p_value - 2.4365682759592025e-06).abs() < 1e-12);
        assert!((rb.p_value - 1.1821656033908462e-07).abs() < 1e-12);
        // decomposition adds up
        let sum: f64 = table.rows.iter().map(|r| r.sum_sq).sum::<f64>()
            + table.residual_sum_sq;
        assert!((sum - table.total_sum_sq).abs() < 1e-9 * table.total_sum_sq);
    }

    #[test]
    fn aliased_factor_is_rejected() {
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let a = factor("A", &["a", "a", "b", "b"]);
        let dup = factor("Acopy", &["u", "u", "v", "v"]);
        match anova(&y, &[a, dup]) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "Acopy"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn single_level_factor_is_rejected() {
        let y = vec![1.0, 2.0];
        assert!(anova(&y, &[factor("A", &["a", "a"])]).is_err());
    }
}
