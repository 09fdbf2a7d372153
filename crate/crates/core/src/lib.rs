//! Month-level illness detection from public timeline data.
//!
//! The pipeline turns a cohort of users, their posts and their social graph
//! into five per-user-month signals -- hand-chosen keywords, mined keywords,
//! human tweet annotations, posting-rate anomalies and network text rates --
//! and stacks them with a second-level classifier. A seeded synthetic-cohort
//! generator stands in for the original medical-record data, and a
//! discrete-event simulator models the rate-limited collection scheduler.

pub mod anomaly;
pub mod collector;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod learners;
pub mod meta;
pub mod seed;
pub mod stats;
pub mod textprep;

pub use error::{Error, Result};
