//! Simulation designs and the Monte Carlo harness.

pub mod dgp;
pub mod study;

pub use dgp::{simulate, simulate_with_rng, DgpSpec, Innovation, Model};
pub use study::{
    collect_statistics, empirical_critical_value, relative_power_csv, replication_rng, results_csv,
    run_power_study, run_scale_sweep, run_size_study, sweep_csv, McResult, PowerStudy,
    RelativePower, StudyConfig, SweepPoint,
};
