//! One time step of the multi-scale scheme and of the complete-information
//! scheme.

use super::activation::{label_chain, successor};
use super::{
    activate, count_vehicles_per_cell, deactivate_followers, deactivate_lonely_leaders,
    label_next, micro_flux, update_density, CouplingParams, EventKind, InterfaceFluxes,
    StepReport,
};
use crate::error::{Error, Result};
use crate::lwr::{check_cfl, godunov_interface_fluxes};
use crate::state::{MacroField, SimState};

/// How vehicles without a forward neighbour move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LeaderRule {
    /// Equilibrium velocity of the cell ahead of the leader.
    CellAhead,
    /// Keep the current velocity.
    Constant,
}

/// Positions before and after the explicit Euler update. `after` is not
/// wrapped onto the road.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

/// Steps 7 of the algorithm: moves every vehicle with its step-`n` velocity,
/// then updates velocities from step-`n` data. Followers use the
/// acceleration model, leaders take `v*` of the cell in front of them.
///
/// Vehicle positions in `state` are left unwrapped; [`multiscale_finish`]
/// puts them back on the road.
pub fn advance_vehicles(
    state: &mut SimState,
    params: &CouplingParams,
    report: &mut StepReport,
) -> Result<Motion> {
    advance(state, params, LeaderRule::CellAhead, report)
}

fn advance(
    state: &mut SimState,
    params: &CouplingParams,
    leader_rule: LeaderRule,
    report: &mut StepReport,
) -> Result<Motion> {
    let dt = params.scaling.dt();
    let v_max = params.law.v_max();
    let step = state.step;
    let n = state.vehicles.len();
    let mut new_vel = Vec::with_capacity(n);
    for i in 0..n {
        let v = &state.vehicles[i];
        let raw = match v.next {
            Some(next) => {
                let (s, gap) = successor(&state.vehicles, &state.grid, i)
                    .filter(|&(s, _)| state.vehicles[s].id == next)
                    .ok_or(Error::BrokenLink { vehicle: v.id })?;
                let ahead = &state.vehicles[s];
                // the position update below may also carry it past its leader
                let next_gap = gap + dt * (ahead.vel - v.vel);
                if gap <= 0.0 || next_gap < 0.0 {
                    let gap = if gap <= 0.0 { gap } else { next_gap };
                    report.push(step, EventKind::Collision { vehicle: v.id, gap });
                }
                match params
                    .model
                    .acceleration(v.pos, v.pos + gap, v.vel, ahead.vel, &params.law)
                {
                    Ok(a) => v.vel + dt * a,
                    Err(Error::DegenerateGap { .. }) => 0.0,
                    Err(e) => return Err(e),
                }
            }
            None => match leader_rule {
                LeaderRule::CellAhead => {
                    let j = state.grid.cell_index(v.pos)?;
                    let ahead = state.grid.neighbor(j, 1);
                    params.law.velocity(state.field.rho()[ahead])
                }
                LeaderRule::Constant => v.vel,
            },
        };
        let clamped = raw.clamp(0.0, v_max);
        if clamped != raw {
            report.push(step, EventKind::VelocityClamp { vehicle: v.id, raw });
        }
        new_vel.push(clamped);
    }

    let before: Vec<f64> = state.vehicles.iter().map(|v| v.pos).collect();
    let mut after = Vec::with_capacity(n);
    for (v, vel) in state.vehicles.iter_mut().zip(new_vel) {
        v.pos += dt * v.vel;
        v.vel = vel;
        after.push(v.pos);
    }
    Ok(Motion { before, after })
}

/// Steps 1 to 6: count, activate, label, remove equilibrium followers and
/// lonely leaders, then recount and relabel once. If the removals emptied
/// cells next to a large jump, those are seeded again before relabeling.
///
/// With `forced`, every empty cell is seeded in step 2 regardless of jumps.
/// Returns the per-cell vehicle counts used by the density update.
pub fn multiscale_prepare(
    state: &mut SimState,
    params: &CouplingParams,
    forced: bool,
    report: &mut StepReport,
) -> Result<Vec<u32>> {
    check_cfl(&params.scaling, &params.law)?;
    let mut gamma = count_vehicles_per_cell(state)?;
    if activate(state, params, &gamma, forced, report) > 0 {
        gamma = count_vehicles_per_cell(state)?;
    }
    label_next(state);
    let removed = deactivate_followers(state, &params.activation, &params.scaling, &params.law, report)
        + deactivate_lonely_leaders(state, report);
    if removed > 0 {
        gamma = count_vehicles_per_cell(state)?;
        if activate(state, params, &gamma, false, report) > 0 {
            gamma = count_vehicles_per_cell(state)?;
        }
        label_next(state);
    }
    Ok(gamma)
}

/// Steps 7 to 9: move vehicles, count interface crossings and update the
/// density. Advances the step counter.
pub fn multiscale_finish(
    state: &mut SimState,
    params: &CouplingParams,
    gamma: &[u32],
    report: &mut StepReport,
) -> Result<()> {
    let motion = advance_vehicles(state, params, report)?;
    let occupied = gamma.iter().map(|&g| g > 0).collect();
    finish(state, params, motion, occupied, report)
}

fn finish(
    state: &mut SimState,
    params: &CouplingParams,
    motion: Motion,
    occupied: Vec<bool>,
    report: &mut StepReport,
) -> Result<()> {
    let micro = micro_flux(&motion.before, &motion.after, &state.grid, &params.scaling)?;
    report.max_crossings = micro.max_count();
    let fluxes = InterfaceFluxes {
        macroscopic: godunov_interface_fluxes(state.field.rho(), &state.grid, &params.law),
        microscopic: micro.values,
        occupied,
    };
    let mut rho = update_density(
        &state.field,
        &state.grid,
        &fluxes,
        state.theta,
        params.scaling.lambda(),
    )
    .rho()
    .to_vec();
    if let Some(cell) = rho.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite {
            step: state.step + 1,
            cell,
        });
    }
    let rho_max = params.law.rho_max();
    let before = state.range;
    let cells = state.range.scan(&rho, rho_max);
    if cells > 0 {
        let worst = rho
            .iter()
            .map(|&r| if r < 0.0 { -r } else { (r - rho_max).max(0.0) })
            .fold(0.0, f64::max);
        report.push(state.step + 1, EventKind::DensityRange { cells, worst });
        debug_assert!(state.range.violations > before.violations);
    }
    if state.clamp_density {
        for r in &mut rho {
            *r = r.clamp(0.0, rho_max);
        }
    }
    state.field = MacroField::from_vec_unchecked(rho);

    let grid = state.grid;
    let step = state.step;
    if grid.is_periodic() {
        for v in &mut state.vehicles {
            v.pos = grid.wrap(v.pos);
        }
    } else {
        let end = grid.end();
        state.vehicles.retain(|v| {
            if v.pos >= end {
                report.push(step, EventKind::Exit { vehicle: v.id });
                false
            } else {
                true
            }
        });
    }
    state.sort_vehicles();
    state.step += 1;
    Ok(())
}

/// One full step of the multi-scale algorithm.
pub fn multiscale_step(state: &mut SimState, params: &CouplingParams) -> Result<StepReport> {
    let mut report = StepReport::default();
    let gamma = multiscale_prepare(state, params, false, &mut report)?;
    multiscale_finish(state, params, &gamma, &mut report)?;
    report.gamma = gamma;
    Ok(report)
}

/// One step of the scheme in which vehicles live everywhere: no activation or
/// deactivation, every vehicle follows its successor, the rightmost vehicle of
/// an open road keeps its velocity, and the blended flux is used at every
/// interior interface.
pub fn complete_info_step(state: &mut SimState, params: &CouplingParams) -> Result<StepReport> {
    check_cfl(&params.scaling, &params.law)?;
    let mut report = StepReport {
        gamma: count_vehicles_per_cell(state)?,
        ..StepReport::default()
    };
    label_chain(state);
    let motion = advance(state, params, LeaderRule::Constant, &mut report)?;
    let occupied = vec![true; state.grid.n_cells()];
    finish(state, params, motion, occupied, &mut report)?;
    Ok(report)
}
