//! Kinetic model of wave–particle duality.
//!
//! Classical wave fields drive a local birth–death process: particles are
//! created at a rate proportional to the field intensity and decay with a
//! fixed lifetime. This crate provides the analytic fields, the
//! deterministic density kinetics, a seeded stochastic sampler of individual
//! events, the statistics used to compare the two against the Born rule, and
//! the built-in scenarios that tie everything together.

pub mod drive;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod io;
pub mod kinetics;
pub mod pointprocess;
pub mod quadrature;
pub mod scenarios;
pub mod wavefield;

pub use drive::{Drive, FieldDrive, Intensity, Scaled, Sinusoid, SquareWave};
pub use error::{Error, Result};
pub use estimators::{
    birth_histogram, born_deviation, chi_square_test, l1_distance, poisson_band, reference_distribution, visibility,
    BinnedDistribution, BornDeviation, ChiSquareTest, Interval,
};
pub use grid::{Bins, Grid, Region};
pub use kinetics::{
    born_limit_density, closed_form_density, critical_scale, critical_scale_with, integrate_kinetics,
    integrate_kinetics_recorded, time_average_identity_residual, Calibration, DensitySeries, KineticParams, Mode,
};
pub use pointprocess::{
    occupancy, population_at, simulate, BirthDeathEvent, EventKind, EventLog, OccupancyField, Particle, RateBound,
};
pub use scenarios::{list_scenarios, run_scenario, scenario, Outcome, ResultBundle, Scenario, Summary, Threshold};
pub use wavefield::{
    fringe_spacing, instantaneous_intensity, mean_intensity, transverse_profile, FieldSpec, Polarization,
    SuperpositionTerm, TimeWindow,
};
