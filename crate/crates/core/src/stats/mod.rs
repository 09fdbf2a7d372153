//! Classical statistics used by the pipeline: Fisher's exact test with odds
//! ratios, the two-sample Kolmogorov-Smirnov test, and sequential ANOVA.

mod anova;
mod fisher;
mod ks;
pub mod special;

pub use anova::{anova, AnovaRow, AnovaTable, Factor};
pub use fisher::{fisher_exact, odds_ratio, ContingencyTable2x2, TestResult};
pub use ks::ks_two_sample;
