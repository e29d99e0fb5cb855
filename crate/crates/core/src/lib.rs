//! Characteristics-based solver for steady supersonic flow of the full
//! Euler system in a semi-infinite divergent duct.
//!
//! The solver marches the rotational method of characteristics through a
//! sequence of regions: a laminar inlet region, slip-boundary wall regions,
//! and Goursat interaction regions, detecting gas-vacuum interfaces along
//! the walls when the duct opens faster than the flow can turn.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gas;
pub mod geometry;
pub mod interp;
pub mod io;
pub mod kernel;
pub mod regions;
pub mod simple_wave;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use gas::{DerivedState, FlowState, GasConstants};
pub use geometry::{DuctGeometry, ValidationReport, WallSide};
pub use kernel::{CharNode, Front, InletProfile, SolverConfig, VacuumInterface};
pub use regions::{Region, RegionKind, Solution, Termination};
pub use simple_wave::SimpleWaveFan;
