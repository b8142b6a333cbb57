//! Simulation state shared by the macroscopic and microscopic scales.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::lwr::VelocityLaw;
use crate::scaling::ScalingParams;

/// Per-cell average densities.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroField {
    rho: Vec<f64>,
}

impl MacroField {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if let Some(cell) = rho.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite { step: 0, cell });
        }
        Ok(Self { rho })
    }

    pub(crate) fn from_vec_unchecked(rho: Vec<f64>) -> Self {
        Self { rho }
    }

    /// Samples `profile` at every cell center.
    pub fn from_profile(grid: &Grid1D, profile: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..grid.n_cells()).map(|j| profile(grid.center(j))).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self { rho: vec![0.0; n] }
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_mass(&self, grid: &Grid1D) -> f64 {
        total_mass(self, grid)
    }
}

pub fn total_mass(field: &MacroField, grid: &Grid1D) -> f64 {
    field.rho.iter().sum::<f64>() * grid.dx()
}

/// Tracks densities leaving `[0, rho_max]`. These are diagnostics only.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RangeMonitor {
    pub violations: u64,
    pub worst_excursion: f64,
}

impl RangeMonitor {
    /// Scans a field, returning the number of out-of-range cells found.
    pub fn scan(&mut self, rho: &[f64], rho_max: f64) -> usize {
        let mut found = 0;
        for &r in rho {
            let excursion = if r < 0.0 {
                -r
            } else if r > rho_max {
                r - rho_max
            } else {
                continue;
            };
            found += 1;
            self.worst_excursion = self.worst_excursion.max(excursion);
        }
        self.violations += found as u64;
        found
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u64);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub pos: f64,
    pub vel: f64,
    /// Step index at which the vehicle was activated.
    pub activated_at: u64,
    /// Forward neighbor; `None` exactly when the vehicle is a leader.
    pub next: Option<VehicleId>,
    pub is_leader: bool,
}

impl Vehicle {
    pub fn new(id: VehicleId, pos: f64, vel: f64, activated_at: u64) -> Self {
        Self {
            id,
            pos,
            vel,
            activated_at,
            next: None,
            is_leader: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VehicleIds {
    next: u64,
}

impl VehicleIds {
    pub fn issue(&mut self) -> VehicleId {
        let id = VehicleId(self.next);
        self.next += 1;
        id
    }
}

/// Number of vehicles representing density `rho` in one cell:
/// `floor(rho / rho_max * gamma_max)`, limited to `[0, gamma_max]`.
pub fn seed_count(rho: f64, scaling: &ScalingParams) -> usize {
    let exact = rho / scaling.rho_max() * scaling.gamma_max() as f64;
    if !(exact > 0.0) {
        return 0;
    }
    // values a few ulps under an integer are that integer
    let snapped = exact.round();
    let m = if (exact - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped
    } else {
        exact.floor()
    };
    (m as usize).min(scaling.gamma_max() as usize)
}

/// Seeds every cell of `cells` with vehicles at the centers of equal
/// sub-intervals, all moving at `v*(rho_j)` and stamped with `step`.
pub fn seed_vehicles_from_density(
    field: &MacroField,
    grid: &Grid1D,
    cells: impl IntoIterator<Item = usize>,
    scaling: &ScalingParams,
    law: &VelocityLaw,
    step: u64,
    ids: &mut VehicleIds,
) -> Vec<Vehicle> {
    let mut out = Vec::new();
    for j in cells {
        let rho = field.rho()[j];
        let m = seed_count(rho, scaling);
        if m == 0 {
            continue;
        }
        let left = grid.edge(j as i64);
        let spacing = grid.dx() / m as f64;
        let vel = law.velocity(rho);
        for i in 0..m {
            let pos = left + (i as f64 + 0.5) * spacing;
            out.push(Vehicle::new(ids.issue(), pos, vel, step));
        }
    }
    out
}

/// Everything advanced by one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub grid: Grid1D,
    pub field: MacroField,
    /// Active vehicles, sorted by position (ties by id).
    pub vehicles: Vec<Vehicle>,
    pub step: u64,
    pub theta: f64,
    pub ids: VehicleIds,
    pub range: RangeMonitor,
    /// Clamp densities into `[0, rho_max]` after each update. Off by default
    /// because clamping breaks conservation.
    pub clamp_density: bool,
}

impl SimState {
    pub fn new(grid: Grid1D, field: MacroField, theta: f64) -> Result<Self> {
        if field.len() != grid.n_cells() {
            return Err(Error::InvalidParameter(format!(
                "field has {} cells but the grid has {}",
                field.len(),
                grid.n_cells()
            )));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(Self {
            grid,
            field,
            vehicles: Vec::new(),
            step: 0,
            theta,
            ids: VehicleIds::default(),
            range: RangeMonitor::default(),
            clamp_density: false,
        })
    }

    pub fn total_mass(&self) -> f64 {
        total_mass(&self.field, &self.grid)
    }

    /// Restores the position ordering (ties broken by id).
    pub fn sort_vehicles(&mut self) {
        self.vehicles
            .sort_by(|a, b| a.pos.total_cmp(&b.pos).then(a.id.cmp(&b.id)));
    }

    /// Adds vehicles and restores ordering.
    pub fn insert_vehicles(&mut self, new: Vec<Vehicle>) {
        if new.is_empty() {
            return;
        }
        self.vehicles.extend(new);
        self.sort_vehicles();
    }

    /// Seeds every cell from the current density, regardless of occupancy.
    pub fn seed_everywhere(&mut self, scaling: &ScalingParams, law: &VelocityLaw) {
        let new = seed_vehicles_from_density(
            &self.field,
            &self.grid,
            0..self.grid.n_cells(),
            scaling,
            law,
            self.step,
            &mut self.ids,
        );
        self.insert_vehicles(new);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryMode;

    fn setup(gamma: u32) -> (Grid1D, ScalingParams, VelocityLaw) {
        let law = VelocityLaw::linear(1.0, 1.0).unwrap();
        let grid = Grid1D::over_road(20.0, 100, BoundaryMode::FreeOutflow).unwrap();
        let scaling = ScalingParams::new(&grid, 0.01, gamma, &law).unwrap();
        (grid, scaling, law)
    }

    #[test]
    fn mass_of_simple_fields() {
        let (grid, _, _) = setup(20);
        assert_eq!(MacroField::zeros(100).total_mass(&grid), 0.0);
        let full = MacroField::new(vec![1.0; 100]).unwrap();
        assert!((full.total_mass(&grid) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn field_rejects_nan() {
        assert!(matches!(
            MacroField::new(vec![0.1, f64::NAN]),
            Err(Error::NonFinite { cell: 1, .. })
        ));
    }

    #[test]
    fn empty_cell_gets_no_vehicles() {
        let (grid, scaling, law) = setup(20);
        let field = MacroField::zeros(100);
        let v = seed_vehicles_from_density(&field, &grid, [3], &scaling, &law, 0, &mut VehicleIds::default());
        assert!(v.is_empty());
    }

    #[test]
    fn full_cell_gets_gamma_max_vehicles() {
        let (grid, scaling, law) = setup(20);
        let field = MacroField::new(vec![1.0; 100]).unwrap();
        let v = seed_vehicles_from_density(&field, &grid, [7], &scaling, &law, 4, &mut VehicleIds::default());
        assert_eq!(v.len(), 20);
        for w in v.windows(2) {
            assert!((w[1].pos - w[0].pos - 0.01).abs() < 1e-12);
        }
        assert!(v.iter().all(|x| x.vel == 0.0 && x.activated_at == 4));
    }

    #[test]
    fn half_cell_offsets() {
        let (grid, scaling, law) = setup(20);
        let field = MacroField::new(vec![0.5; 100]).unwrap();
        let j = 5;
        let v = seed_vehicles_from_density(&field, &grid, [j], &scaling, &law, 0, &mut VehicleIds::default());
        assert_eq!(v.len(), 10);
        let left = grid.edge(j as i64);
        for (i, x) in v.iter().enumerate() {
            let expected = 0.01 + 0.02 * i as f64;
            assert!((x.pos - left - expected).abs() < 1e-12);
            assert_eq!(x.vel, 0.5);
            assert_eq!(grid.cell_index(x.pos).unwrap(), j);
        }
    }

    #[test]
    fn seed_count_floors_and_caps() {
        let (_, scaling, _) = setup(20);
        assert_eq!(seed_count(0.0, &scaling), 0);
        assert_eq!(seed_count(-0.2, &scaling), 0);
        assert_eq!(seed_count(0.049, &scaling), 0);
        assert_eq!(seed_count(0.3, &scaling), 6);
        assert_eq!(seed_count(0.7, &scaling), 14);
        assert_eq!(seed_count(0.74, &scaling), 14);
        assert_eq!(seed_count(1.3, &scaling), 20);
    }

    #[test]
    fn range_monitor_records_worst_excursion() {
        let mut m = RangeMonitor::default();
        assert_eq!(m.scan(&[0.2, -0.01, 1.05, 0.99], 1.0), 2);
        assert_eq!(m.violations, 2);
        assert!((m.worst_excursion - 0.05).abs() < 1e-12);
    }

    #[test]
    fn state_rejects_bad_theta_and_size() {
        let (grid, _, _) = setup(20);
        assert!(SimState::new(grid, MacroField::zeros(100), 1.5).is_err());
        assert!(SimState::new(grid, MacroField::zeros(99), 0.0).is_err());
    }
}
