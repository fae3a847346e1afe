//! Joint beamforming and satellite selection for LEO networks that serve
//! both communication and positioning.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beamforming;
pub mod channel;
pub mod convex;
pub mod error;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod radio;
pub mod selection;

use nalgebra::{DMatrix, DVector};

pub type C64 = nalgebra::Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub use beamforming::{BeamformerSet, BeamformingScheme, DcInit, DcOptions, SatelliteDesign};
pub use channel::ChannelSet;
pub use error::{Error, Result};
pub use geometry::{generate_scenario, Position3D, Scenario, ScenarioSpec};
pub use metrics::LinkAssignment;
pub use radio::RadioParams;
pub use selection::{cfg_selection, gdop_greedy_outcome, SelectionOutcome, SelectionParams};
