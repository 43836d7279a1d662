use serde::{Deserialize, Serialize};

use super::{checked, protocol_drive, simulate, RunOptions};
use crate::dynamics::{
    attach_bloch, effective_field, propagate, GaussianDrive, HamiltonianKind, Model,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::types::{BlochVector, PulseConfig, StateVector, SystemConfig, Trajectory};
use crate::Protocol;

/// Populations after `cycle` back-to-back passes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub p1: f64,
    pub p2: f64,
}

/// Applies the same pulse sequence `cycles` times in a row, starting each
/// pass from the state the previous one left. Row 0 is the initial state.
pub fn multi_cycle(
    initial: &StateVector,
    cycles: usize,
    protocol: Protocol,
    pulse: &PulseConfig,
    system: &SystemConfig,
    options: &RunOptions,
) -> Result<Vec<CycleRecord>> {
    if cycles == 0 {
        return Err(Error::InvalidConfig("at least one cycle is required".into()));
    }
    if initial.dim() != 2 {
        return Err(Error::Contract("cycles act on a two-level state".into()));
    }
    checked(pulse, system)?;
    let drive = protocol_drive(protocol, pulse, system);
    let record = |cycle, s: &StateVector| {
        let p = s.populations();
        CycleRecord { cycle, p1: p[0], p2: p[1] }
    };
    let mut state = initial.clone();
    let mut out = vec![record(0, &state)];
    for cycle in 1..=cycles {
        let traj = simulate(drive.as_ref(), system, pulse.laser_phase, pulse.total_time, &state, options)?;
        state = traj.final_state().clone();
        out.push(record(cycle, &state));
    }
    Ok(out)
}

/// Spin polarizations under the bare, shortcut and gauge-transformed
/// Hamiltonians, with the field directions of the first two, on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochComparison {
    pub times: Vec<f64>,
    /// ⟨n₀⟩ under H₀.
    pub bare: Trajectory,
    /// ⟨n⟩ under H = H₀ + H_cd.
    pub shortcut: Trajectory,
    /// ⟨ñ⟩ under H̃.
    pub transformed: Trajectory,
    /// B̂₀ of H₀.
    pub field_bare: Vec<BlochVector>,
    /// B̂ of H.
    pub field_total: Vec<BlochVector>,
}

fn spins(traj: &Trajectory) -> &[BlochVector] {
    traj.bloch.as_deref().expect("comparison trajectories carry spins")
}

fn max_angle(spins: &[BlochVector], field: &[BlochVector]) -> f64 {
    spins
        .iter()
        .zip(field)
        .map(|(s, b)| s.angle_to(b))
        .fold(0.0, f64::max)
}

impl BlochComparison {
    /// max_t angle(⟨n₀⟩, B̂₀).
    pub fn bare_deviation(&self) -> f64 {
        max_angle(spins(&self.bare), &self.field_bare)
    }

    /// max_t angle(⟨n⟩, B̂₀).
    pub fn shortcut_deviation(&self) -> f64 {
        max_angle(spins(&self.shortcut), &self.field_bare)
    }

    /// max_t angle(⟨ñ⟩, B̂₀).
    pub fn transformed_deviation(&self) -> f64 {
        max_angle(spins(&self.transformed), &self.field_bare)
    }
}

fn field_track(model: &Model<'_>, times: &[f64]) -> Result<Vec<BlochVector>> {
    times
        .iter()
        .map(|&t| {
            let f = effective_field(&model.hamiltonian_at(t)?)?;
            Ok(f.direction.unwrap_or_default())
        })
        .collect()
}

/// Runs H₀, H and H̃ from |1⟩ under the original pulses of duration `total_time`.
pub fn bloch_comparison(
    pulse: &PulseConfig,
    system: &SystemConfig,
    total_time: f64,
    options: &RunOptions,
) -> Result<BlochComparison> {
    let pulse = pulse.with_total_time(total_time);
    checked(&pulse, system)?;
    let drive = GaussianDrive::new(pulse, *system);
    let grid = TimeGrid::new(0.0, total_time, options.intervals)?;
    let times = grid.points();
    let initial = StateVector::basis(2, 0)?;
    let run = |model: &Model<'_>| -> Result<Trajectory> {
        let mut traj = propagate(model, &initial, &grid, &options.propagation)?;
        attach_bloch(&mut traj)?;
        Ok(traj)
    };
    let h0 = Model::new(HamiltonianKind::EffectiveH0, &drive, *system, pulse.laser_phase);
    let total = Model::new(HamiltonianKind::TotalH, &drive, *system, pulse.laser_phase);
    let tilde = Model::new(HamiltonianKind::TildeH, &drive, *system, pulse.laser_phase);
    Ok(BlochComparison {
        bare: run(&h0)?,
        shortcut: run(&total)?,
        transformed: run(&tilde)?,
        field_bare: field_track(&h0, &times)?,
        field_total: field_track(&total, &times)?,
        times,
    })
}
