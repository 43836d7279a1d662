use nalgebra::{DMatrix, Matrix2, Matrix3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{aux_field_phase, counter_diabatic_rabi, effective_params, EffectiveParams, PulseSamplePair};
use crate::types::{HamiltonianSample, SystemConfig};

/// The five Hamiltonians of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HamiltonianKind {
    /// Three-level Λ system, (1/2)[[0, 0, Ω_P e^{iφ_L}], [0, 0, Ω_S], [h.c., h.c., 2Δ]].
    Lambda3,
    /// Effective two-level, −(1/2)[[Δ_eff, Ω_eff e^{iφ_L}], [Ω_eff e^{−iφ_L}, −Δ_eff]].
    EffectiveH0,
    /// Counter-diabatic term, (1/2)[[0, Ω_a e^{iφ_a}], [Ω_a e^{−iφ_a}, 0]], φ_a = φ_L + π/2.
    CounterDiabatic,
    /// Total Hamiltonian, −(1/2)[[Δ_eff, Ω̃_eff e^{−iγ}], [Ω̃_eff e^{iγ}, −Δ_eff]], γ = φ + φ_L.
    TotalH,
    /// Gauge-transformed real Hamiltonian, −(1/2)[[Δ̃_eff, Ω̃_eff], [Ω̃_eff, −Δ̃_eff]].
    TildeH,
}

impl HamiltonianKind {
    pub fn dim(&self) -> usize {
        match self {
            HamiltonianKind::Lambda3 => 3,
            _ => 2,
        }
    }

    /// Whether the kind reads the shortcut quantities (φ, φ̇, Ω̃_eff).
    pub fn needs_effective(&self) -> bool {
        matches!(self, HamiltonianKind::TotalH | HamiltonianKind::TildeH)
    }
}

/// Drive quantities available at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    pub pulses: PulseSamplePair,
    pub effective: Option<EffectiveParams>,
}

impl DriveSample {
    pub fn from_pulses(pulses: PulseSamplePair) -> Self {
        Self {
            pulses,
            effective: None,
        }
    }

    fn effective(&self, kind: HamiltonianKind) -> Result<&EffectiveParams> {
        self.effective.as_ref().ok_or_else(|| {
            Error::Contract(format!("{kind:?} needs the shortcut quantities at t = {:e}", self.pulses.t))
        })
    }

    fn omega_a(&self) -> Result<f64> {
        match (&self.effective, self.pulses.d_omega_p) {
            (Some(e), _) => Ok(e.omega_a),
            (None, Some(_)) => counter_diabatic_rabi(&self.pulses),
            (None, None) => Err(Error::Contract(format!(
                "CounterDiabatic needs pulse derivatives or Ω_a at t = {:e}",
                self.pulses.t
            ))),
        }
    }
}

const HALF: f64 = 0.5;

pub(crate) fn matrix2(
    kind: HamiltonianKind,
    sample: &DriveSample,
    system: &SystemConfig,
    laser_phase: f64,
) -> Result<Matrix2<C64>> {
    let c = |re: f64| C64::new(re, 0.0);
    let m = match kind {
        HamiltonianKind::EffectiveH0 => {
            let (d, o) = effective_params(&sample.pulses, system);
            let off = C64::from_polar(o, laser_phase);
            Matrix2::new(c(d), off, off.conj(), c(-d)) * c(-HALF)
        }
        HamiltonianKind::CounterDiabatic => {
            let off = C64::from_polar(sample.omega_a()?, aux_field_phase(laser_phase));
            Matrix2::new(c(0.0), off, off.conj(), c(0.0)) * c(HALF)
        }
        HamiltonianKind::TotalH => {
            let e = sample.effective(kind)?;
            let off = C64::from_polar(e.omega_eff_tilde, -e.gamma(laser_phase));
            Matrix2::new(c(e.delta_eff), off, off.conj(), c(-e.delta_eff)) * c(-HALF)
        }
        HamiltonianKind::TildeH => {
            let e = sample.effective(kind)?;
            let d = e.delta_eff_tilde;
            let o = e.omega_eff_tilde;
            Matrix2::new(c(d), c(o), c(o), c(-d)) * c(-HALF)
        }
        HamiltonianKind::Lambda3 => {
            return Err(Error::Contract("Lambda3 is a 3x3 Hamiltonian".into()));
        }
    };
    Ok(m)
}

pub(crate) fn matrix3(sample: &DriveSample, system: &SystemConfig, laser_phase: f64) -> Matrix3<C64> {
    let zero = C64::new(0.0, 0.0);
    let p = C64::from_polar(sample.pulses.omega_p, laser_phase);
    let s = C64::new(sample.pulses.omega_s, 0.0);
    Matrix3::new(
        zero,
        zero,
        p,
        zero,
        zero,
        s,
        p.conj(),
        s,
        C64::new(2.0 * system.detuning, 0.0),
    ) * C64::new(HALF, 0.0)
}

/// The Hamiltonian of `kind` at the sample's time, in rad/s.
pub fn build_hamiltonian(
    kind: HamiltonianKind,
    sample: &DriveSample,
    system: &SystemConfig,
    laser_phase: f64,
) -> Result<HamiltonianSample> {
    let matrix = match kind {
        HamiltonianKind::Lambda3 => {
            let m = matrix3(sample, system, laser_phase);
            DMatrix::from_iterator(3, 3, m.iter().copied())
        }
        _ => {
            let m = matrix2(kind, sample, system, laser_phase)?;
            DMatrix::from_iterator(2, 2, m.iter().copied())
        }
    };
    HamiltonianSample::new(sample.pulses.t, matrix)
}
