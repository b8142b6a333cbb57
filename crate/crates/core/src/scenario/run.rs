use std::time::{Duration, Instant};

use super::config::{ScenarioConfig, Scheme};
use crate::coupling::{
    complete_info_step, multiscale_finish, multiscale_prepare, Event, EventKind, StepReport,
};
use crate::error::Result;
use crate::lwr::lwr_step;
use crate::state::{RangeMonitor, SimState, VehicleId};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub rho: Vec<f64>,
}

/// One active vehicle at the start of a step, after activation and
/// deactivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleRecord {
    pub step: u64,
    pub id: VehicleId,
    pub cell: usize,
    pub pos: f64,
    pub vel: f64,
    /// Density of the occupied cell.
    pub rho: f64,
    pub leader: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub name: String,
    pub dx: f64,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub vehicles: Vec<VehicleRecord>,
    pub events: Vec<Event>,
    /// Total mass before the first step and after each step.
    pub mass: Vec<f64>,
    /// Active vehicles at each step once activation is settled.
    pub active: Vec<usize>,
    /// Largest number of vehicles through one interface in one step.
    pub max_crossings: u32,
    pub range: RangeMonitor,
    pub wall_time: Duration,
}

impl RunLog {
    pub fn steps(&self) -> usize {
        self.active.len()
    }

    pub fn peak_vehicles(&self) -> usize {
        self.active.iter().copied().max().unwrap_or(0)
    }

    /// Largest relative mass deviation from the initial mass.
    pub fn mass_drift(&self) -> f64 {
        let Some(&m0) = self.mass.first() else {
            return 0.0;
        };
        let worst = self.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max);
        if m0 == 0.0 {
            worst
        } else {
            worst / m0.abs()
        }
    }

    pub fn activations(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Activation { .. }))
            .count()
    }

    pub fn deactivations(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Deactivation { .. }))
            .count()
    }
}

/// Initial state of a scenario. The complete-information scheme starts with
/// vehicles in every cell.
pub fn build_scenario(config: &ScenarioConfig) -> Result<SimState> {
    config.validate()?;
    let params = config.coupling_params()?;
    let grid = config.grid()?;
    let mut state = SimState::new(grid, config.initial_field(&grid)?, config.theta)?;
    state.clamp_density = config.clamp_density;
    if config.scheme == Scheme::CompleteInfo {
        state.seed_everywhere(&params.scaling, &params.law);
    }
    Ok(state)
}

/// Advances `state` by `config.n_t` steps.
pub fn run(state: &mut SimState, config: &ScenarioConfig) -> Result<RunLog> {
    config.validate()?;
    let params = config.coupling_params()?;
    let stride = config.snapshot_stride as u64;
    let mut log = RunLog {
        name: config.name.clone(),
        dx: params.scaling.dx(),
        dt: params.scaling.dt(),
        snapshots: vec![Snapshot {
            step: state.step,
            rho: state.field.rho().to_vec(),
        }],
        vehicles: Vec::new(),
        events: Vec::new(),
        mass: vec![state.total_mass()],
        active: Vec::with_capacity(config.n_t),
        max_crossings: 0,
        range: RangeMonitor::default(),
        wall_time: Duration::ZERO,
    };

    let started = Instant::now();
    for i in 0..config.n_t {
        let mut report = StepReport::default();
        match config.scheme {
            Scheme::Multiscale => {
                let forced = config.forced_activation && state.step == 0;
                let gamma = multiscale_prepare(state, &params, forced, &mut report)?;
                record(&mut log, state, config.record_vehicles)?;
                multiscale_finish(state, &params, &gamma, &mut report)?;
            }
            Scheme::CompleteInfo => {
                record(&mut log, state, config.record_vehicles)?;
                report = complete_info_step(state, &params)?;
            }
            Scheme::Lwr => {
                log.active.push(0);
                state.field = lwr_step(&state.field, &state.grid, &params.scaling, &params.law)?;
                state.step += 1;
            }
        }
        log.max_crossings = log.max_crossings.max(report.max_crossings);
        log.events.append(&mut report.events);
        log.mass.push(state.total_mass());
        if state.step.is_multiple_of(stride) || i + 1 == config.n_t {
            log.snapshots.push(Snapshot {
                step: state.step,
                rho: state.field.rho().to_vec(),
            });
        }
    }
    log.wall_time = started.elapsed();
    log.range = state.range;
    Ok(log)
}

fn record(log: &mut RunLog, state: &SimState, keep: bool) -> Result<()> {
    log.active.push(state.vehicles.len());
    if !keep {
        return Ok(());
    }
    for v in &state.vehicles {
        let cell = state.grid.cell_index(v.pos)?;
        log.vehicles.push(VehicleRecord {
            step: state.step,
            id: v.id,
            cell,
            pos: v.pos,
            vel: v.vel,
            rho: state.field.rho()[cell],
            leader: v.is_leader,
        });
    }
    Ok(())
}
