//! Simulation benchmark for pair sampling and rating under a fixed annotation
//! budget.
//!
//! A latent population is compared through a noisy annotator with ties; each
//! method picks which pairs to compare and turns the outcomes into estimated
//! values, which are scored by Pearson correlation against the latent values.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod methods;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod output;
pub mod rating;
pub mod schedule;

pub use error::{Error, Result};
pub use experiment::{
    budget_sweep, crossover_report, fixed_budget_experiment, ExperimentConfig, ResultRow,
};
pub use methods::{run_method, MethodKind, MethodParams, MethodSpec, Sampling, SimulationResult};
pub use metrics::{aggregate, pearson, AggregateStat, Correlation};
pub use model::{
    sample_population, EloBase, ItemId, LatentPopulation, MatchRecord, OracleConfig, Outcome,
    RatingTable, RngStream,
};
pub use oracle::{outcome_distribution, Annotator, OutcomeDistribution};
pub use rating::{BtFitConfig, EloConfig, KSchedule};
