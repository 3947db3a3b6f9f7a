//! Rule-based nurse rostering.
//!
//! Schedules are built nurse by nurse: each nurse is assigned one weekly
//! shift pattern from her feasible set by one of four construction rules,
//! so a candidate solution is a *rule string* rather than a schedule. Two
//! solvers learn which rule to use at which position:
//!
//! * [`boa`] — a chain-structured estimation-of-distribution algorithm
//!   that learns per-position rule frequencies from the better part of a
//!   population and samples new rule strings from them;
//! * [`acs`] — a classifier-style single-solution search that keeps a
//!   per-(nurse, rule) strength matrix updated by shared rewards.
//!
//! [`oracle`] provides exact optima by exhaustive enumeration at desk
//! scale, and [`generator`] produces synthetic instances with a planted
//! feasible schedule so that solver claims stay checkable end to end.

pub mod acs;
pub mod boa;
pub mod error;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod report;
pub mod rules;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
