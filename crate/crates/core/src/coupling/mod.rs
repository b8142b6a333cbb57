//! The multi-scale engine: activation and deactivation of microscopic
//! vehicles, counted interface fluxes, and the conservative hybrid density
//! update.

mod activation;
mod flux;
mod step;

pub use activation::{
    activate, count_vehicles_per_cell, deactivate_followers, deactivate_lonely_leaders,
    label_next,
};
pub use flux::{micro_flux, update_density, InterfaceFluxes, MicroFlux};
pub use step::{
    advance_vehicles, complete_info_step, multiscale_finish, multiscale_prepare, multiscale_step,
};

use crate::error::{Error, Result};
use crate::lwr::VelocityLaw;
use crate::micro::MicroModel;
use crate::scaling::ScalingParams;
use crate::state::VehicleId;

/// Thresholds ruling activation and deactivation of vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationParams {
    /// Jump of the equilibrium velocity between neighbouring cells that
    /// triggers activation.
    pub velocity_jump: f64,
    /// Minimal lifetime, in steps, before a follower may be removed.
    pub min_active_steps: f64,
    /// Tolerance on `|V - v*(gap)|` below which an old follower is removed.
    pub equilibrium_tolerance: f64,
}

impl ActivationParams {
    pub fn new(velocity_jump: f64, min_active_steps: f64, equilibrium_tolerance: f64) -> Result<Self> {
        for (name, value) in [
            ("velocity jump threshold", velocity_jump),
            ("minimal active duration", min_active_steps),
            ("equilibrium tolerance", equilibrium_tolerance),
        ] {
            if !(value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(Self {
            velocity_jump,
            min_active_steps,
            equilibrium_tolerance,
        })
    }

    /// Same as [`ActivationParams::new`] with the minimal duration given in
    /// time units.
    pub fn with_duration(
        velocity_jump: f64,
        min_active_time: f64,
        equilibrium_tolerance: f64,
        dt: f64,
    ) -> Result<Self> {
        Self::new(velocity_jump, min_active_time / dt, equilibrium_tolerance)
    }

    /// Thresholds that never fire: no activation, no deactivation.
    pub fn disabled() -> Self {
        Self {
            velocity_jump: f64::INFINITY,
            min_active_steps: f64::INFINITY,
            equilibrium_tolerance: f64::MIN_POSITIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams {
    pub law: VelocityLaw,
    pub scaling: ScalingParams,
    pub activation: ActivationParams,
    pub model: MicroModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeactivationReason {
    FollowerEquilibrium,
    LonelyLeader,
}

impl DeactivationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeactivationReason::FollowerEquilibrium => "follower-equilibrium",
            DeactivationReason::LonelyLeader => "lonely-leader",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Activation { cell: usize, count: usize },
    Deactivation { vehicle: VehicleId, reason: DeactivationReason },
    /// A vehicle left a free-outflow road.
    Exit { vehicle: VehicleId },
    /// An Euler update left `[0, v_max]`; `raw` is the unclamped value.
    VelocityClamp { vehicle: VehicleId, raw: f64 },
    /// Non-positive gap to the forward neighbour.
    Collision { vehicle: VehicleId, gap: f64 },
    /// Cells outside `[0, rho_max]` after the density update.
    DensityRange { cells: usize, worst: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub step: u64,
    pub kind: EventKind,
}

/// What happened during one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub events: Vec<Event>,
    /// Vehicle counts per cell used by the density update.
    pub gamma: Vec<u32>,
    /// Largest number of vehicles crossing a single interface.
    pub max_crossings: u32,
}

impl StepReport {
    pub(crate) fn push(&mut self, step: u64, kind: EventKind) {
        self.events.push(Event { step, kind });
    }
}
