//! Relaxation tooling for polytopic differential inclusions: tube shadowing
//! of relaxed trajectories, chattering approximation, Gronwall selection
//! bounds and forward-completeness probes.

pub mod cli;
pub mod error;
pub mod exprfield;
pub mod horizon;
pub mod integrate;
pub mod relaxation;
pub mod setvalued;
pub mod trajectory;

pub use error::{Error, Result};
pub use trajectory::{State, Trajectory};
