//! Seeded rollouts under the true adherence dynamics, metric logs, the
//! generic optimistic baseline, and experiment orchestration.

pub mod baseline;
pub mod experiment;
pub mod metrics;
pub mod rng;
pub mod rollout;

pub use metrics::{CsvSchema, MetricRow, MetricsLog};
pub use rollout::{rollout_episode, rollout_mixture, Step, Trajectory};
