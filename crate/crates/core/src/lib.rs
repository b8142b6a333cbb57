//! Multi-scale traffic simulation on a single road.
//!
//! A first-order LWR model, discretized with the Godunov scheme, is alive on
//! the whole road at all times. Second-order follow-the-leader vehicles are
//! created only around large jumps of the equilibrium velocity, feed their
//! counted interface fluxes back into the density update, and are removed once
//! they are back at equilibrium. There is no spatial interface between the two
//! descriptions; mass is carried by the density alone.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod grid;
pub mod lwr;
pub mod micro;
pub mod scaling;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
pub use grid::{BoundaryMode, Grid1D};
pub use lwr::VelocityLaw;
pub use scaling::ScalingParams;
pub use state::{MacroField, SimState, Vehicle, VehicleId};
