//! Discrete-event simulation of duty-cycled sensor-network MAC protocols
//! (H-MAC slot reservation and the S-MAC frame-start contention baseline),
//! the closed-form latency, throughput and collision models they are
//! checked against, and the experiment sweeps built on both.

pub mod analytic;
pub mod exec;
pub mod experiments;
pub mod metrics;
pub mod protocol;
pub mod scenario;
pub mod simcore;

pub use metrics::{summarize, MetricsLedger, Summary};
pub use scenario::{Protocol, Scenario, ScenarioError};
