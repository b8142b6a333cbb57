use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::lwr::VelocityLaw;

/// Ties the macroscopic and microscopic scales together.
///
/// The vehicle length `ell_n = dx / gamma_max` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    dx: f64,
    dt: f64,
    gamma_max: u32,
    rho_max: f64,
    v_max: f64,
}

impl ScalingParams {
    /// Validates `dt/dx` against the CFL bound of `law`.
    pub fn new(grid: &Grid1D, dt: f64, gamma_max: u32, law: &VelocityLaw) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if gamma_max == 0 {
            return Err(Error::InvalidParameter("gamma_max must be at least 1".into()));
        }
        let params = Self::unchecked(grid, dt, gamma_max, law);
        let bound = law.cfl_bound();
        if params.lambda() < bound {
            Ok(params)
        } else {
            Err(Error::CflViolation {
                lambda: params.lambda(),
                bound,
            })
        }
    }

    pub(crate) fn unchecked(grid: &Grid1D, dt: f64, gamma_max: u32, law: &VelocityLaw) -> Self {
        Self {
            dx: grid.dx(),
            dt,
            gamma_max,
            rho_max: law.rho_max(),
            v_max: law.v_max(),
        }
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn gamma_max(&self) -> u32 {
        self.gamma_max
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn ell_n(&self) -> f64 {
        self.dx / self.gamma_max as f64
    }

    pub fn lambda(&self) -> f64 {
        self.dt / self.dx
    }

    /// Mass carried by one vehicle crossing an interface in one step, as a flux.
    pub fn vehicle_flux(&self) -> f64 {
        self.ell_n() / self.dt
    }
}
