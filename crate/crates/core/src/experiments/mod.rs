//! Numerical campaigns: dynamics, time sweeps, peak and speed-up searches,
//! robustness sweeps, repeated cycles and Bloch-sphere comparisons.
//!
//! Every run propagates the effective two-level Hamiltonian from |1⟩ under
//! the pulses a protocol actually executes. Independent runs are spread over
//! the rayon pool; results keep the order of their inputs.

mod cycles;
mod robustness;
mod search;

pub use cycles::{bloch_comparison, multi_cycle, BlochComparison, CycleRecord};
pub use robustness::{robustness_sweep, RobustnessAxis, RobustnessSpec};
pub use search::{
    default_peak_grid, required_peak, shortcut_peak, speedup_analysis, PeakSearch, SpeedupReport, TimeSearch,
    DEFAULT_FIDELITY_TARGET,
};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    attach_bloch, propagate, ConstantDrive, Drive, GaussianDrive, HamiltonianKind, Model, PropagationOptions,
    ShortcutDrive,
};
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, DEFAULT_INTERVALS};
use crate::types::{ConfigSnapshot, Convergence, PulseConfig, StateVector, SweepResult, SystemConfig, Trajectory};
use crate::Protocol;

/// Grid and integrator settings shared by all runs of a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Base grid intervals over [0, T]; states are recorded on this grid.
    pub intervals: usize,
    pub propagation: PropagationOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            propagation: PropagationOptions::default(),
        }
    }
}

/// Constant resonant drive whose effective pulse area Ω_eff·T equals `area`.
pub fn resonant_drive(area: f64, total_time: f64, system: &SystemConfig) -> ConstantDrive {
    let omega = (2.0 * system.detuning * area / total_time).sqrt();
    ConstantDrive {
        omega_p: omega,
        omega_s: omega,
    }
}

/// The pulses `protocol` executes for `pulse`, shaped at `system`'s detuning.
pub fn protocol_drive(protocol: Protocol, pulse: &PulseConfig, system: &SystemConfig) -> Box<dyn Drive> {
    match protocol {
        Protocol::Stirap => Box::new(GaussianDrive::new(*pulse, *system)),
        Protocol::Stirsap => Box::new(ShortcutDrive::new(*pulse, *system)),
        Protocol::ResonantPi => Box::new(resonant_drive(PI, pulse.total_time, system)),
    }
}

/// Propagates the effective Hamiltonian under `drive` over [0, T].
pub fn simulate(
    drive: &dyn Drive,
    system: &SystemConfig,
    laser_phase: f64,
    total_time: f64,
    initial: &StateVector,
    options: &RunOptions,
) -> Result<Trajectory> {
    let model = Model::new(HamiltonianKind::EffectiveH0, drive, *system, laser_phase);
    let grid = TimeGrid::new(0.0, total_time, options.intervals)?;
    propagate(&model, initial, &grid, &options.propagation)
}

fn checked(pulse: &PulseConfig, system: &SystemConfig) -> Result<()> {
    pulse.validate()?;
    system.validate()
}

/// |1⟩-initialized trajectory of `protocol` with duration `total_time`
/// (σ and Δτ re-derived from it), including spin polarizations.
pub fn run_dynamics(
    protocol: Protocol,
    total_time: f64,
    pulse: &PulseConfig,
    system: &SystemConfig,
    options: &RunOptions,
) -> Result<Trajectory> {
    let pulse = pulse.with_total_time(total_time);
    checked(&pulse, system)?;
    let drive = protocol_drive(protocol, &pulse, system);
    let mut traj = simulate(
        drive.as_ref(),
        system,
        pulse.laser_phase,
        total_time,
        &StateVector::basis(2, 0)?,
        options,
    )?;
    attach_bloch(&mut traj)?;
    Ok(traj)
}

/// Steps per unit of Δ·T for the three-level model; the fourth-order
/// Magnus step is converged well below one step per 30 rad of 2Δ phase.
const LAMBDA_PHASE_PER_INTERVAL: f64 = 30.0;

/// |1⟩-initialized three-level trajectory of `protocol` for exactly `pulse`.
/// The base grid is refined until Δ·h is at most about 30 rad.
pub fn run_three_level(
    protocol: Protocol,
    pulse: &PulseConfig,
    system: &SystemConfig,
    options: &RunOptions,
) -> Result<Trajectory> {
    checked(pulse, system)?;
    let drive = protocol_drive(protocol, pulse, system);
    let model = Model::new(HamiltonianKind::Lambda3, drive.as_ref(), *system, pulse.laser_phase);
    let needed = (system.detuning * pulse.total_time / LAMBDA_PHASE_PER_INTERVAL).ceil() as usize;
    let grid = TimeGrid::new(0.0, pulse.total_time, options.intervals.max(needed))?;
    propagate(&model, &StateVector::basis(3, 0)?, &grid, &options.propagation)
}

/// Final |2⟩ population of one run, with its convergence record.
pub(crate) fn transfer(
    drive: &dyn Drive,
    system: &SystemConfig,
    pulse: &PulseConfig,
    options: &RunOptions,
) -> Result<(f64, Convergence)> {
    let traj = simulate(
        drive,
        system,
        pulse.laser_phase,
        pulse.total_time,
        &StateVector::basis(2, 0)?,
        options,
    )?;
    Ok((traj.final_populations()[1], Convergence::of(&traj.diagnostics)))
}

/// Transfer efficiency of `protocol` for exactly `pulse`.
pub fn efficiency(protocol: Protocol, pulse: &PulseConfig, system: &SystemConfig, options: &RunOptions) -> Result<f64> {
    checked(pulse, system)?;
    Ok(transfer(protocol_drive(protocol, pulse, system).as_ref(), system, pulse, options)?.0)
}

/// Runs `f` over `values` in parallel and packs the ordered results.
pub(crate) fn sweep<F>(
    name: &str,
    values: &[f64],
    protocol: Protocol,
    config: ConfigSnapshot,
    f: F,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<(f64, Convergence)> + Sync,
{
    let outcomes = values.par_iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
    let convergence = outcomes
        .iter()
        .fold(Convergence::default(), |acc, (_, c)| acc.merge(*c));
    let mut result = SweepResult::new(
        name,
        values.to_vec(),
        outcomes.into_iter().map(|(e, _)| e).collect(),
        protocol,
        config,
    )?;
    result.convergence = convergence;
    Ok(result)
}

/// Transfer efficiency against the operation time; shapes (and for
/// STIRSAP the reshaped pulses) are recomputed for every T.
pub fn efficiency_vs_time(
    protocol: Protocol,
    times: &[f64],
    pulse: &PulseConfig,
    system: &SystemConfig,
    options: &RunOptions,
) -> Result<SweepResult> {
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidConfig(format!("operation time {t} must be positive")));
    }
    checked(pulse, system)?;
    let config = ConfigSnapshot {
        pulse: *pulse,
        system: *system,
    };
    sweep("total_time", times, protocol, config, |t| {
        let p = pulse.with_total_time(t);
        transfer(protocol_drive(protocol, &p, system).as_ref(), system, &p, options)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal(t_in_t0: f64) -> (PulseConfig, SystemConfig) {
        let system = SystemConfig::default();
        (PulseConfig::new(system.reference_rabi, t_in_t0 * system.pi_time()), system)
    }

    #[test]
    fn resonant_drive_area() {
        let system = SystemConfig::default();
        let d = resonant_drive(PI, 1e-3, &system);
        let omega_eff = d.omega_p * d.omega_s / (2.0 * system.detuning);
        assert!((omega_eff * 1e-3 - PI).abs() < 1e-12);
    }

    #[test]
    fn resonant_pi_protocol_inverts() {
        let (pulse, system) = nominal(4.0);
        let e = efficiency(Protocol::ResonantPi, &pulse, &system, &RunOptions::default()).unwrap();
        assert!((e - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_sweep_keeps_order_and_rejects_bad_times() {
        let (pulse, system) = nominal(4.0);
        let t0 = system.pi_time();
        let times = [8.0 * t0, 2.0 * t0, 4.0 * t0];
        let opts = RunOptions::default();
        let sweep = efficiency_vs_time(Protocol::Stirsap, &times, &pulse, &system, &opts).unwrap();
        assert_eq!(sweep.parameter_values, times);
        for (&t, &e) in times.iter().zip(&sweep.efficiencies) {
            let single = efficiency(Protocol::Stirsap, &pulse.with_total_time(t), &system, &opts).unwrap();
            assert_eq!(single, e);
        }
        assert_eq!(sweep.convergence.runs, 3);
        assert!(efficiency_vs_time(Protocol::Stirap, &[0.0], &pulse, &system, &opts).is_err());
    }

    #[test]
    fn dynamics_carries_spin_polarization() {
        let (pulse, system) = nominal(4.0);
        let traj = run_dynamics(Protocol::Stirap, pulse.total_time, &pulse, &system, &RunOptions::default()).unwrap();
        let bloch = traj.bloch.as_ref().unwrap();
        assert_eq!(bloch.len(), traj.len());
        assert_eq!(bloch[0].z, 1.0);
    }
}
