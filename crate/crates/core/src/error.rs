use thiserror::Error;

use crate::state::VehicleId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("position {pos} lies outside the road [{start}, {end})")]
    OutOfDomain { pos: f64, start: f64, end: f64 },

    #[error("density pair ({rho_minus}, {rho_plus}) outside [0, {rho_max}]")]
    DensityOutOfRange {
        rho_minus: f64,
        rho_plus: f64,
        rho_max: f64,
    },

    #[error("CFL violated: dt/dx = {lambda} but the bound is {bound}")]
    CflViolation { lambda: f64, bound: f64 },

    #[error("non-positive gap {gap} between a vehicle and its leader")]
    DegenerateGap { gap: f64 },

    #[error("vehicle #{index} crossed {crossed} interfaces in one step")]
    MultipleCrossing { index: usize, crossed: usize },

    #[error("follower {vehicle} has no valid forward neighbor")]
    BrokenLink { vehicle: VehicleId },

    #[error("velocity law is not unimodal: {0}")]
    NotUnimodal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("non-finite density in cell {cell} at step {step}")]
    NonFinite { step: u64, cell: usize },
}
