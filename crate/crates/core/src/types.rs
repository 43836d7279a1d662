//! Shared domain types.
//!
//! Units are SI throughout with ħ = 1: every Rabi frequency, detuning and
//! Hamiltonian entry is an angular frequency in rad/s, every time is in
//! seconds. The basis order of the Λ system is (|1⟩, |2⟩, |3⟩).

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio Δ / max(Ω_P, Ω_S) above which adiabatic elimination of |3⟩ is
/// considered valid. Advisory only.
pub const LARGE_DETUNING_RATIO: f64 = 20.0;

/// Tolerance on the norm of a [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Relative tolerance for the Hermiticity check of a [`HamiltonianSample`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Overshoot above 1 tolerated (and clamped) in reported efficiencies.
pub const EFFICIENCY_OVERSHOOT: f64 = 1e-9;

/// Gaussian Raman pulse pair.
///
/// Ω_S(t) = Ω_S exp[−(t − T/2 + Δτ)²/σ²], Ω_P(t) = Ω_P exp[−(t − T/2 − Δτ)²/σ²].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    /// Pump peak Ω_P (rad/s).
    pub peak_pump: f64,
    /// Stokes peak Ω_S (rad/s).
    pub peak_stokes: f64,
    /// Protocol duration T (s).
    pub total_time: f64,
    /// Gaussian width σ (s).
    pub width: f64,
    /// Half-separation Δτ between the pulse centres (s).
    pub delay: f64,
    /// Relative laser phase φ_L (rad).
    pub laser_phase: f64,
}

impl PulseConfig {
    /// Equal peaks, σ = T/6, Δτ = T/10, φ_L = 0.
    pub fn new(peak: f64, total_time: f64) -> Self {
        Self {
            peak_pump: peak,
            peak_stokes: peak,
            total_time,
            width: total_time / 6.0,
            delay: total_time / 10.0,
            laser_phase: 0.0,
        }
    }

    /// Same peaks and phase with a new duration; σ and Δτ are re-derived.
    pub fn with_total_time(&self, total_time: f64) -> Self {
        Self {
            total_time,
            width: total_time / 6.0,
            delay: total_time / 10.0,
            ..*self
        }
    }

    /// Both peaks multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            peak_pump: self.peak_pump * factor,
            peak_stokes: self.peak_stokes * factor,
            ..*self
        }
    }

    pub fn max_peak(&self) -> f64 {
        self.peak_pump.max(self.peak_stokes)
    }

    fn checks(&self) -> Vec<Check> {
        let finite = [
            self.peak_pump,
            self.peak_stokes,
            self.total_time,
            self.width,
            self.delay,
            self.laser_phase,
        ]
        .iter()
        .all(|v| v.is_finite());
        vec![
            Check::new("finite", finite, "all pulse parameters must be finite"),
            Check::new(
                "peak_pump",
                self.peak_pump >= 0.0,
                "pump peak must be non-negative",
            ),
            Check::new(
                "peak_stokes",
                self.peak_stokes >= 0.0,
                "Stokes peak must be non-negative",
            ),
            Check::new(
                "total_time",
                self.total_time > 0.0,
                "total time must be positive",
            ),
            Check::new("width", self.width > 0.0, "width must be positive"),
            Check::new(
                "width_below_total",
                self.width < self.total_time,
                "width must be smaller than the total time",
            ),
            Check::new(
                "delay",
                self.delay.abs() < self.total_time / 2.0,
                "|delay| must be smaller than half the total time",
            ),
        ]
    }

    /// First failed invariant, if any.
    pub fn validate(&self) -> Result<()> {
        match self.checks().into_iter().find(|c| !c.passed) {
            Some(c) => Err(Error::InvalidConfig(c.message)),
            None => Ok(()),
        }
    }
}

/// Atomic and laser constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Single-photon detuning Δ (rad/s).
    pub detuning: f64,
    /// Reference Rabi frequency Ω₀ (rad/s).
    pub reference_rabi: f64,
}

impl Default for SystemConfig {
    /// Δ = 2π·2.5 GHz, Ω₀ = 2π·5 MHz.
    fn default() -> Self {
        Self {
            detuning: TAU * 2.5e9,
            reference_rabi: TAU * 5e6,
        }
    }
}

impl SystemConfig {
    /// Reference π time T₀ = 2πΔ/Ω₀².
    pub fn pi_time(&self) -> f64 {
        TAU * self.detuning / (self.reference_rabi * self.reference_rabi)
    }

    /// T_π = 2πΔ/(Ω_P Ω_S) for the given peaks.
    pub fn pi_time_for(&self, peak_pump: f64, peak_stokes: f64) -> f64 {
        TAU * self.detuning / (peak_pump * peak_stokes)
    }

    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self { detuning, ..*self }
    }

    /// Large-detuning validity flag for a pulse pair.
    pub fn large_detuning(&self, pulse: &PulseConfig) -> bool {
        self.detuning >= LARGE_DETUNING_RATIO * pulse.max_peak()
    }

    fn checks(&self) -> Vec<Check> {
        vec![
            Check::new(
                "detuning",
                self.detuning.is_finite() && self.detuning > 0.0,
                "detuning must be positive",
            ),
            Check::new(
                "reference_rabi",
                self.reference_rabi.is_finite() && self.reference_rabi > 0.0,
                "reference Rabi frequency must be positive",
            ),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self.checks().into_iter().find(|c| !c.passed) {
            Some(c) => Err(Error::InvalidConfig(c.message)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub message: String,
}

impl Check {
    fn new(name: &str, passed: bool, message: &str) -> Self {
        Self {
            name: name.to_owned(),
            passed,
            message: message.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub large_detuning: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks every invariant of both configs. Never fails; the large-detuning
/// flag is reported but does not affect validity.
pub fn validate_config(pulse: &PulseConfig, system: &SystemConfig) -> ValidationReport {
    let mut checks = pulse.checks();
    checks.extend(system.checks());
    ValidationReport {
        checks,
        large_detuning: system.large_detuning(pulse),
    }
}

/// Normalized state in the (|1⟩, |2⟩[, |3⟩]) basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "state norm {norm} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Contract("cannot normalize a zero state".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / n).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::Contract(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// √p₁|1⟩ + e^{iφ}√(1 − p₁)|2⟩.
    pub fn two_level_superposition(p1: f64, relative_phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::Contract(format!("population {p1} not in [0, 1]")));
        }
        Self::new(vec![
            C64::new(p1.sqrt(), 0.0),
            C64::from_polar((1.0 - p1).sqrt(), relative_phase),
        ])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::Contract(format!("state dimension {dim}, expected 2 or 3")))
    }
}

fn norm(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian Hamiltonian (rad/s) at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSample {
    pub t: f64,
    pub matrix: DMatrix<C64>,
}

impl HamiltonianSample {
    pub fn new(t: f64, matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || !(n == 2 || n == 3) {
            return Err(Error::Contract(format!(
                "Hamiltonian must be 2x2 or 3x3, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let defect = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > HERMITIAN_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self { t, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Dimensionless Bloch (spin-polarization or field-direction) vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Angle between the two directions, in [0, π].
    pub fn angle_to(&self, other: &BlochVector) -> f64 {
        let cross = BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        );
        cross.norm().atan2(self.dot(other))
    }
}

/// Convergence record of a propagation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationDiagnostics {
    /// Refinement level of the returned trajectory (steps per interval = 2^level).
    pub level: u32,
    pub steps: usize,
    /// Max change of final populations between the last two refinements.
    pub residual: f64,
    /// Max |‖ψ‖ − 1| over all recorded samples.
    pub max_norm_error: f64,
}

/// Worst-case convergence over a batch of propagations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub runs: usize,
    pub max_level: u32,
    pub max_residual: f64,
    pub max_norm_error: f64,
}

impl Convergence {
    pub fn of(d: &PropagationDiagnostics) -> Self {
        Self {
            runs: 1,
            max_level: d.level,
            max_residual: d.residual,
            max_norm_error: d.max_norm_error,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            runs: self.runs + other.runs,
            max_level: self.max_level.max(other.max_level),
            max_residual: self.max_residual.max(other.max_residual),
            max_norm_error: self.max_norm_error.max(other.max_norm_error),
        }
    }
}

/// Time-ordered states with their populations.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub populations: Vec<Vec<f64>>,
    pub bloch: Option<Vec<BlochVector>>,
    pub diagnostics: PropagationDiagnostics,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::Contract(format!(
                "trajectory needs matching non-empty grids ({} times, {} states)",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Contract("trajectory times must increase strictly".into()));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Contract("trajectory mixes state dimensions".into()));
        }
        let max_norm_error = states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if max_norm_error > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "trajectory state norm drifted by {max_norm_error:e}"
            )));
        }
        let populations = states.iter().map(StateVector::populations).collect();
        Ok(Self {
            times,
            states,
            populations,
            bloch: None,
            diagnostics: PropagationDiagnostics {
                max_norm_error,
                ..Default::default()
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory is non-empty")
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().expect("trajectory is non-empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Stirap,
    Stirsap,
    ResonantPi,
}

impl Protocol {
    pub fn tag(&self) -> &'static str {
        match self {
            Protocol::Stirap => "STIRAP",
            Protocol::Stirsap => "STIRSAP",
            Protocol::ResonantPi => "ResonantPi",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stirap" => Ok(Protocol::Stirap),
            "stirsap" => Ok(Protocol::Stirsap),
            "resonantpi" | "resonant-pi" | "pi" => Ok(Protocol::ResonantPi),
            other => Err(Error::InvalidConfig(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub pulse: PulseConfig,
    pub system: SystemConfig,
}

/// One parameter sweep of one protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub parameter_values: Vec<f64>,
    pub efficiencies: Vec<f64>,
    pub protocol: Protocol,
    pub config: ConfigSnapshot,
    #[serde(default)]
    pub convergence: Convergence,
}

impl SweepResult {
    /// Efficiencies are clamped into [0, 1]; anything further out than
    /// [`EFFICIENCY_OVERSHOOT`] is a contract violation.
    pub fn new(
        parameter_name: impl Into<String>,
        parameter_values: Vec<f64>,
        efficiencies: Vec<f64>,
        protocol: Protocol,
        config: ConfigSnapshot,
    ) -> Result<Self> {
        if parameter_values.len() != efficiencies.len() {
            return Err(Error::Contract(
                "sweep grid and efficiencies differ in length".into(),
            ));
        }
        let efficiencies = efficiencies
            .into_iter()
            .map(clamp_efficiency)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            parameter_name: parameter_name.into(),
            parameter_values,
            efficiencies,
            protocol,
            config,
            convergence: Convergence::default(),
        })
    }

    pub fn min_efficiency(&self) -> f64 {
        self.efficiencies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn clamp_efficiency(e: f64) -> Result<f64> {
    if !(-EFFICIENCY_OVERSHOOT..=1.0 + EFFICIENCY_OVERSHOOT).contains(&e) {
        return Err(Error::Contract(format!("efficiency {e} outside [0, 1]")));
    }
    Ok(e.clamp(0.0, 1.0))
}
