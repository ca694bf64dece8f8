//! Axisymmetric capillary surface simulator for the Wilhelmy-plate geometry.
//!
//! A liquid bath sits in the annulus between a plate of radius 1 and an outer
//! container of radius `R` (possibly infinite, handled by truncation). The free
//! surface is a radial graph `h(r)`; the quasi-static evolution is driven by a
//! forcing schedule `F(t)` and resolved by incremental energy minimization with
//! contact-angle hysteresis on the plate.
//!
//! Module map:
//! - [`geometry`]: parameters, boundary measures, radial grids
//! - [`energy`]: energy breakdown, volume constraint, dissipation, contact angles
//! - [`solver`]: incremental/equilibrium solves (damped Newton on the KKT
//!   system) plus an independent ODE-shooting oracle and a stability probe
//! - [`evolution`]: schedule-driven runs, pressures, energy-dissipation audit
//! - [`asymptotics`]: multiplier decomposition, width bounds, barriers,
//!   reference configuration, container-limit sweeps
//! - [`config`]: run configuration parsing and dispatch support

pub mod asymptotics;
pub mod config;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod parallel;
pub mod report;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
