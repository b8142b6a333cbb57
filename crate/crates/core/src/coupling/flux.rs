use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, Grid1D};
use crate::lwr::apply_fluxes;
use crate::scaling::ScalingParams;
use crate::state::MacroField;

/// Vehicles counted through each interface during one step.
///
/// Index `i` refers to the left edge of cell `i`; there are `n + 1` entries
/// and in periodic mode the last mirrors the first.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroFlux {
    pub counts: Vec<u32>,
    pub values: Vec<f64>,
}

impl MicroFlux {
    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Counts the crossings `x_before < x_{i-1/2} <= x_after` of every interface
/// and scales them by `ell_n / dt`.
///
/// `before` must lie on the road; `after` may run past the periodic end (it is
/// not wrapped yet) or past the free-outflow end.
pub fn micro_flux(
    before: &[f64],
    after: &[f64],
    grid: &Grid1D,
    scaling: &ScalingParams,
) -> Result<MicroFlux> {
    let n = grid.n_cells();
    let mut counts = vec![0u32; n + 1];
    for (index, (&x0, &x1)) in before.iter().zip(after).enumerate() {
        let cell = grid.raw_cell(x0);
        if x1 < grid.edge(cell + 1) {
            continue;
        }
        if x1 >= grid.edge(cell + 2) {
            let crossed = (grid.raw_cell(x1) - cell) as usize;
            return Err(Error::MultipleCrossing { index, crossed });
        }
        let iface = match grid.boundary() {
            BoundaryMode::Periodic => ((cell + 1) as usize) % n,
            BoundaryMode::FreeOutflow => (cell + 1) as usize,
        };
        counts[iface] += 1;
    }
    if grid.is_periodic() {
        counts[n] = counts[0];
    }
    let unit = scaling.vehicle_flux();
    let values = counts.iter().map(|&c| c as f64 * unit).collect();
    Ok(MicroFlux { counts, values })
}

/// Both flux families at every interface plus the cell occupancy flags.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFluxes {
    /// Godunov fluxes, `n + 1` entries.
    pub macroscopic: Vec<f64>,
    /// Counted fluxes, `n + 1` entries.
    pub microscopic: Vec<f64>,
    /// `gamma_j > 0` per cell.
    pub occupied: Vec<bool>,
}

impl InterfaceFluxes {
    /// The single flux used on both sides of every interface: the blend
    /// `theta G + (1 - theta) F` where both adjacent cells hold vehicles, the
    /// Godunov flux elsewhere. Boundary interfaces of an open road have an
    /// empty ghost neighbour and always use `G`.
    pub fn resolve(&self, grid: &Grid1D, theta: f64) -> Vec<f64> {
        let n = grid.n_cells();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let both = match grid.boundary() {
                BoundaryMode::Periodic => {
                    self.occupied[(i + n - 1) % n] && self.occupied[i % n]
                }
                BoundaryMode::FreeOutflow => {
                    i > 0 && i < n && self.occupied[i - 1] && self.occupied[i]
                }
            };
            let g = self.macroscopic[i];
            out.push(if both {
                theta * g + (1.0 - theta) * self.microscopic[i]
            } else {
                g
            });
        }
        out
    }
}

/// Hybrid conservative density update.
pub fn update_density(
    field: &MacroField,
    grid: &Grid1D,
    fluxes: &InterfaceFluxes,
    theta: f64,
    lambda: f64,
) -> MacroField {
    let resolved = fluxes.resolve(grid, theta);
    MacroField::from_vec_unchecked(apply_fluxes(field.rho(), &resolved, lambda))
}
