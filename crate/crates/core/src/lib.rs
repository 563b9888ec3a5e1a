//! Simulation core for an islanded offshore energy hub: a wind farm feeding
//! platform loads, with electrolyzers and fuel cells balancing surplus and
//! deficit through a hydrogen store, and a grid-forming battery as the
//! instantaneous slack.
//!
//! The crate is organised bottom-up:
//!
//! * [`wind`] synthesizes per-turbine inflow and turns it into available power.
//! * [`plants`] holds the ramp- and capacity-limited unit models.
//! * [`pms`] is the power management system: dispatch, unit allocation,
//!   reactive power sharing and the frequency proxy.
//! * [`engine`] steps a scenario, injects contingencies and runs whole years.
//! * [`metrics`] reduces traces to utilisation, capacity factors and peaks.
//! * [`config`] is the flat `section.key = value` configuration schema.

pub mod config;
pub mod engine;
pub mod metrics;
pub mod plants;
pub mod pms;
pub mod wind;

pub use config::{Config, ConfigError};
pub use engine::{
    run, run_contingency, run_year, DesignSpec, EngineError, EventKind, EventSpec, EventTime,
    RunResult, Scenario, StepRecord,
};
pub use metrics::KpiReport;
pub use pms::ControlConfig;
pub use wind::{FarmLayout, TurbineSpec, WindField};

/// Seed of the bundled 2-hour reference wind realization.
pub const REFERENCE_SEED: u64 = 30;
