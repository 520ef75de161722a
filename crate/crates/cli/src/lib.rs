//! Experiment orchestration for the geodesic-flow laboratory: configuration
//! documents, the experiment dispatcher, report/table emission and the
//! verification suite.

pub mod config;
pub mod experiments;
pub mod output;
pub mod suite;
