//! P1 finite elements and leapfrog time stepping for the Dirichlet wave
//! equation on a planar triangle, with boundary observability diagnostics.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod initial;
pub mod mesh;
pub mod observability;
pub mod quadrature;
pub mod simulation;
pub mod sparse;
pub mod timestepper;

pub use error::{Error, Result};
pub use geometry::{SideFrame, SideLabel, Triangle, Vec2};
pub use simulation::{ObservabilityReport, Trajectory};
