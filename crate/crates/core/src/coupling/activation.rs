use std::collections::HashSet;

use super::{ActivationParams, CouplingParams, DeactivationReason, EventKind, StepReport};
use crate::error::Result;
use crate::grid::Grid1D;
use crate::lwr::VelocityLaw;
use crate::scaling::ScalingParams;
use crate::state::{seed_vehicles_from_density, SimState, Vehicle, VehicleId};

/// Number of active vehicles in each cell.
pub fn count_vehicles_per_cell(state: &SimState) -> Result<Vec<u32>> {
    let mut gamma = vec![0u32; state.grid.n_cells()];
    for v in &state.vehicles {
        gamma[state.grid.cell_index(v.pos)?] += 1;
    }
    Ok(gamma)
}

/// Indices of empty cells lying in a four-cell window `{j-1, .., j+2}` around
/// an interface `j | j+1` whose equilibrium velocity jump exceeds the
/// threshold. All jumps are judged against the same `gamma` snapshot.
fn cells_to_activate(
    rho: &[f64],
    grid: &Grid1D,
    law: &VelocityLaw,
    threshold: f64,
    gamma: &[u32],
) -> Vec<usize> {
    let n = grid.n_cells();
    let mut marked = vec![false; n];
    let interfaces = if grid.is_periodic() { n } else { n - 1 };
    for j in 0..interfaces {
        let right = (j + 1) % n;
        let jump = (law.velocity(rho[right]) - law.velocity(rho[j])).abs();
        if !(jump > threshold) {
            continue;
        }
        for offset in -1i64..=2 {
            let i = j as i64 + offset;
            let i = if grid.is_periodic() {
                i.rem_euclid(n as i64)
            } else if (0..n as i64).contains(&i) {
                i
            } else {
                continue;
            } as usize;
            marked[i] = true;
        }
    }
    (0..n).filter(|&i| marked[i] && gamma[i] == 0).collect()
}

/// Seeds vehicles in empty cells around large equilibrium velocity jumps.
/// With `forced`, every empty cell is seeded regardless of the jumps.
/// Returns the number of vehicles created.
pub fn activate(
    state: &mut SimState,
    params: &CouplingParams,
    gamma: &[u32],
    forced: bool,
    report: &mut StepReport,
) -> usize {
    let cells: Vec<usize> = if forced {
        (0..state.grid.n_cells()).filter(|&i| gamma[i] == 0).collect()
    } else {
        cells_to_activate(
            state.field.rho(),
            &state.grid,
            &params.law,
            params.activation.velocity_jump,
            gamma,
        )
    };
    let mut created = Vec::new();
    for cell in cells {
        let seeded = seed_vehicles_from_density(
            &state.field,
            &state.grid,
            [cell],
            &params.scaling,
            &params.law,
            state.step,
            &mut state.ids,
        );
        if !seeded.is_empty() {
            report.push(
                state.step,
                EventKind::Activation {
                    cell,
                    count: seeded.len(),
                },
            );
            created.extend(seeded);
        }
    }
    let count = created.len();
    state.insert_vehicles(created);
    count
}

/// Gap from vehicle `i` to its successor in position order, wrapping around
/// the road in periodic mode. `None` when there is no successor.
pub(crate) fn successor(vehicles: &[Vehicle], grid: &Grid1D, i: usize) -> Option<(usize, f64)> {
    let n = vehicles.len();
    if i + 1 < n {
        Some((i + 1, vehicles[i + 1].pos - vehicles[i].pos))
    } else if grid.is_periodic() && n > 1 {
        Some((0, vehicles[0].pos + grid.length() - vehicles[i].pos))
    } else {
        None
    }
}

/// Links every vehicle to the nearest vehicle ahead. The rightmost vehicle
/// (open road only) and every vehicle with more than `dx` of free road ahead
/// become leaders.
pub fn label_next(state: &mut SimState) {
    let dx = state.grid.dx();
    for i in 0..state.vehicles.len() {
        let link = match successor(&state.vehicles, &state.grid, i) {
            Some((s, gap)) if gap <= dx => Some(state.vehicles[s].id),
            _ => None,
        };
        let v = &mut state.vehicles[i];
        v.next = link;
        v.is_leader = link.is_none();
    }
}

/// Links every vehicle to its successor without the free-road rule: only the
/// rightmost vehicle on an open road leads.
pub(crate) fn label_chain(state: &mut SimState) {
    for i in 0..state.vehicles.len() {
        let link = successor(&state.vehicles, &state.grid, i).map(|(s, _)| state.vehicles[s].id);
        let v = &mut state.vehicles[i];
        v.next = link;
        v.is_leader = link.is_none();
    }
}

fn position_of(vehicles: &[Vehicle], id: VehicleId) -> Option<usize> {
    vehicles.iter().position(|v| v.id == id)
}

/// Removes followers that have been active longer than the minimal duration
/// and drive within tolerance of the first-order gap equilibrium. Leaders are
/// never removed here. Returns the number removed.
pub fn deactivate_followers(
    state: &mut SimState,
    activation: &ActivationParams,
    scaling: &ScalingParams,
    law: &VelocityLaw,
    report: &mut StepReport,
) -> usize {
    let step = state.step;
    let length = state.grid.length();
    let mut doomed = HashSet::new();
    for (i, v) in state.vehicles.iter().enumerate() {
        let Some(next) = v.next else { continue };
        let age = (step - v.activated_at) as f64;
        if !(age > activation.min_active_steps) {
            continue;
        }
        // links always point at the position successor
        let ahead = match state.vehicles.get(i + 1) {
            Some(a) if a.id == next => a.pos,
            _ => match position_of(&state.vehicles, next) {
                Some(k) if k > i => state.vehicles[k].pos,
                Some(k) => state.vehicles[k].pos + length,
                None => continue,
            },
        };
        let gap = ahead - v.pos;
        let v_eq = if gap > 0.0 {
            law.velocity(law.rho_max() * scaling.ell_n() / gap)
        } else {
            0.0
        };
        if (v.vel - v_eq).abs() < activation.equilibrium_tolerance {
            doomed.insert(v.id);
        }
    }
    remove(state, &doomed, DeactivationReason::FollowerEquilibrium, report)
}

/// Removes leaders that no remaining vehicle follows.
pub fn deactivate_lonely_leaders(state: &mut SimState, report: &mut StepReport) -> usize {
    let followed: HashSet<VehicleId> = state.vehicles.iter().filter_map(|v| v.next).collect();
    let doomed: HashSet<VehicleId> = state
        .vehicles
        .iter()
        .filter(|v| v.is_leader && !followed.contains(&v.id))
        .map(|v| v.id)
        .collect();
    remove(state, &doomed, DeactivationReason::LonelyLeader, report)
}

fn remove(
    state: &mut SimState,
    doomed: &HashSet<VehicleId>,
    reason: DeactivationReason,
    report: &mut StepReport,
) -> usize {
    if doomed.is_empty() {
        return 0;
    }
    let step = state.step;
    state.vehicles.retain(|v| {
        if doomed.contains(&v.id) {
            report.push(step, EventKind::Deactivation { vehicle: v.id, reason });
            false
        } else {
            true
        }
    });
    doomed.len()
}
