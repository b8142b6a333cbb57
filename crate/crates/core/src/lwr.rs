//! First-order macroscopic model: equilibrium velocity, flux, the Godunov
//! numerical flux and a pure LWR stepper used as the reference solution.

use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, Grid1D};
use crate::scaling::ScalingParams;
use crate::state::MacroField;

const GOLDEN_TOL: f64 = 1e-10;
const SLOPE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LawForm {
    /// `v*(rho) = v_max (1 - rho / rho_max)`.
    Linear,
    /// Monotone piecewise-linear interpolation through `(rho, v)` knots.
    Table(Vec<(f64, f64)>),
}

/// Equilibrium velocity as a function of density.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityLaw {
    rho_max: f64,
    v_max: f64,
    form: LawForm,
    sigma: f64,
    max_slope: f64,
}

impl VelocityLaw {
    pub fn linear(rho_max: f64, v_max: f64) -> Result<Self> {
        check_positive("rho_max", rho_max)?;
        check_positive("v_max", v_max)?;
        Ok(Self {
            rho_max,
            v_max,
            form: LawForm::Linear,
            sigma: 0.5 * rho_max,
            max_slope: v_max,
        })
    }

    /// Builds a tabulated law. Knots must start at `(0, v_max)`, end at
    /// `(rho_max, 0)`, have strictly increasing densities and non-increasing
    /// velocities, and produce a unimodal flux.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("a velocity table needs at least 2 knots".into()));
        }
        let (r0, v_max) = knots[0];
        let (rho_max, v_last) = knots[knots.len() - 1];
        if r0 != 0.0 || v_last != 0.0 {
            return Err(Error::InvalidParameter(
                "velocity table must start at rho = 0 and end with v = 0".into(),
            ));
        }
        check_positive("rho_max", rho_max)?;
        check_positive("v_max", v_max)?;
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidParameter("table densities must increase strictly".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidParameter("table velocities must be non-increasing".into()));
            }
        }
        let mut law = Self {
            rho_max,
            v_max,
            form: LawForm::Table(knots),
            sigma: 0.0,
            max_slope: 0.0,
        };
        law.sigma = law.argmax_flux()?;
        law.max_slope = law.sampled_max_slope();
        Ok(law)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn form(&self) -> &LawForm {
        &self.form
    }

    pub fn clamp(&self, rho: f64) -> f64 {
        rho.clamp(0.0, self.rho_max)
    }

    /// `v*(rho)`, with `rho` clamped into `[0, rho_max]` first.
    pub fn velocity(&self, rho: f64) -> f64 {
        let rho = self.clamp(rho);
        match &self.form {
            LawForm::Linear => self.v_max * (1.0 - rho / self.rho_max),
            LawForm::Table(knots) => interpolate(knots, rho),
        }
    }

    pub fn flux(&self, rho: f64) -> f64 {
        let rho = self.clamp(rho);
        rho * self.velocity(rho)
    }

    /// Density maximizing the flux.
    pub fn critical_density(&self) -> f64 {
        self.sigma
    }

    /// `max |f'(rho)|` over `[0, rho_max]`.
    pub fn max_flux_slope(&self) -> f64 {
        self.max_slope
    }

    /// Largest admissible `dt/dx` (exclusive).
    pub fn cfl_bound(&self) -> f64 {
        (1.0 / self.max_slope).min(1.0 / self.v_max)
    }

    fn argmax_flux(&self) -> Result<f64> {
        // Unimodality on a dense sample: rises (weakly) then falls (weakly).
        let samples: Vec<f64> = (0..=SLOPE_SAMPLES)
            .map(|i| self.flux(self.rho_max * i as f64 / SLOPE_SAMPLES as f64))
            .collect();
        let tol = 1e-14 * self.rho_max * self.v_max;
        let mut falling = false;
        for w in samples.windows(2) {
            if w[1] < w[0] - tol {
                falling = true;
            } else if falling && w[1] > w[0] + tol {
                return Err(Error::NotUnimodal(
                    "flux rises again after its maximum".into(),
                ));
            }
        }

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, self.rho_max);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (self.flux(c), self.flux(d));
        while b - a > GOLDEN_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = self.flux(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = self.flux(d);
            }
        }
        Ok(0.5 * (a + b))
    }

    fn sampled_max_slope(&self) -> f64 {
        let h = self.rho_max / SLOPE_SAMPLES as f64;
        (0..SLOPE_SAMPLES)
            .map(|i| {
                let r = i as f64 * h;
                ((self.flux(r + h) - self.flux(r)) / h).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")))
    }
}

fn interpolate(knots: &[(f64, f64)], rho: f64) -> f64 {
    let i = knots.partition_point(|&(r, _)| r <= rho);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (r0, v0) = knots[i - 1];
    let (r1, v1) = knots[i];
    v0 + (v1 - v0) * (rho - r0) / (r1 - r0)
}

pub fn equilibrium_velocity(rho: f64, law: &VelocityLaw) -> f64 {
    law.velocity(rho)
}

pub fn flux(rho: f64, law: &VelocityLaw) -> f64 {
    law.flux(rho)
}

pub fn critical_density(law: &VelocityLaw) -> f64 {
    law.critical_density()
}

pub fn cfl_bound(law: &VelocityLaw) -> f64 {
    law.cfl_bound()
}

/// Godunov flux at an interface with left state `rho_minus` and right state
/// `rho_plus`. Both must already lie in `[0, rho_max]`.
pub fn godunov_flux(rho_minus: f64, rho_plus: f64, law: &VelocityLaw) -> Result<f64> {
    let in_range = |r: f64| (0.0..=law.rho_max).contains(&r);
    if !in_range(rho_minus) || !in_range(rho_plus) {
        return Err(Error::DensityOutOfRange {
            rho_minus,
            rho_plus,
            rho_max: law.rho_max,
        });
    }
    Ok(godunov(rho_minus, rho_plus, law))
}

pub(crate) fn godunov(rho_minus: f64, rho_plus: f64, law: &VelocityLaw) -> f64 {
    let sigma = law.sigma;
    if rho_minus <= rho_plus {
        law.flux(rho_minus).min(law.flux(rho_plus))
    } else if rho_minus < sigma {
        law.flux(rho_minus)
    } else if rho_plus > sigma {
        law.flux(rho_plus)
    } else {
        law.flux(sigma)
    }
}

/// Godunov fluxes at every interface. Entry `i` is the flux through the left
/// edge of cell `i`; the vector has `n + 1` entries and in periodic mode the
/// last one is the same value as the first. Densities are clamped into
/// `[0, rho_max]` before evaluation.
pub fn godunov_interface_fluxes(rho: &[f64], grid: &Grid1D, law: &VelocityLaw) -> Vec<f64> {
    let n = rho.len();
    let mut out = Vec::with_capacity(n + 1);
    let state = |j: usize| law.clamp(rho[j]);
    for i in 0..=n {
        let g = match grid.boundary() {
            BoundaryMode::Periodic => {
                if i == n {
                    out[0]
                } else {
                    godunov(state((i + n - 1) % n), state(i), law)
                }
            }
            BoundaryMode::FreeOutflow => {
                let left = state(i.saturating_sub(1));
                let right = state(i.min(n - 1));
                godunov(left, right, law)
            }
        };
        out.push(g);
    }
    out
}

/// Conservative update `rho_j + lambda (flux_j - flux_{j+1})`.
pub(crate) fn apply_fluxes(rho: &[f64], fluxes: &[f64], lambda: f64) -> Vec<f64> {
    rho.iter()
        .enumerate()
        .map(|(j, &r)| r + lambda * (fluxes[j] - fluxes[j + 1]))
        .collect()
}

pub(crate) fn check_cfl(scaling: &ScalingParams, law: &VelocityLaw) -> Result<()> {
    let lambda = scaling.lambda();
    let bound = law.cfl_bound();
    if lambda < bound {
        Ok(())
    } else {
        Err(Error::CflViolation { lambda, bound })
    }
}

/// One step of the classical Godunov scheme.
pub fn lwr_step(
    field: &MacroField,
    grid: &Grid1D,
    scaling: &ScalingParams,
    law: &VelocityLaw,
) -> Result<MacroField> {
    check_cfl(scaling, law)?;
    let fluxes = godunov_interface_fluxes(field.rho(), grid, law);
    Ok(MacroField::from_vec_unchecked(apply_fluxes(
        field.rho(),
        &fluxes,
        scaling.lambda(),
    )))
}
