//! Time-dependent pulse sources fed to the propagator.

use crate::error::Result;
use crate::pulse::{gaussian_pair_at, EffectiveParams, PulseSamplePair, ShortcutShape};
use crate::types::{PulseConfig, SystemConfig};

/// A pulse pair as a function of time.
pub trait Drive: Send + Sync {
    fn pulses(&self, t: f64) -> Result<PulseSamplePair>;

    /// Shortcut quantities at `t`, when the drive can provide them.
    fn effective(&self, _t: f64) -> Result<Option<EffectiveParams>> {
        Ok(None)
    }
}

/// The original Gaussian pair, with analytic derivatives and the derived
/// shortcut quantities of its nominal system.
#[derive(Clone, Copy, Debug)]
pub struct GaussianDrive {
    shape: ShortcutShape,
}

impl GaussianDrive {
    pub fn new(pulse: PulseConfig, system: SystemConfig) -> Self {
        Self {
            shape: ShortcutShape::new(pulse, system),
        }
    }

    pub fn pulse(&self) -> &PulseConfig {
        &self.shape.pulse
    }
}

impl Drive for GaussianDrive {
    fn pulses(&self, t: f64) -> Result<PulseSamplePair> {
        Ok(gaussian_pair_at(&self.shape.pulse, t))
    }

    fn effective(&self, t: f64) -> Result<Option<EffectiveParams>> {
        Ok(Some(self.shape.params_at(t)?.1))
    }
}

/// The reshaped shortcut pair (Ω̃_P, Ω̃_S) as executed on the atoms.
///
/// `amplitude` scales both executed pulses; `pump_shift` and `stokes_shift`
/// delay each executed pulse relative to its nominal timing.
#[derive(Clone, Copy, Debug)]
pub struct ShortcutDrive {
    shape: ShortcutShape,
    pub amplitude: f64,
    pub pump_shift: f64,
    pub stokes_shift: f64,
}

impl ShortcutDrive {
    /// Shapes computed for `pulse` at the nominal detuning of `system`.
    pub fn new(pulse: PulseConfig, system: SystemConfig) -> Self {
        Self {
            shape: ShortcutShape::new(pulse, system),
            amplitude: 1.0,
            pump_shift: 0.0,
            stokes_shift: 0.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Increases the pulse separation by 2·`extra_delay`, moving the pump
    /// later and the Stokes pulse earlier by `extra_delay` each.
    pub fn with_extra_delay(mut self, extra_delay: f64) -> Self {
        self.pump_shift = extra_delay;
        self.stokes_shift = -extra_delay;
        self
    }

    pub fn shape(&self) -> &ShortcutShape {
        &self.shape
    }
}

impl Drive for ShortcutDrive {
    fn pulses(&self, t: f64) -> Result<PulseSamplePair> {
        let (p, s) = self.shape.modified_at(t - self.pump_shift)?;
        let s = if self.stokes_shift == self.pump_shift {
            s
        } else {
            self.shape.modified_at(t - self.stokes_shift)?.1
        };
        Ok(PulseSamplePair::new(t, self.amplitude * p, self.amplitude * s))
    }
}

/// Time-independent pulses.
#[derive(Clone, Copy, Debug)]
pub struct ConstantDrive {
    pub omega_p: f64,
    pub omega_s: f64,
}

impl Drive for ConstantDrive {
    fn pulses(&self, t: f64) -> Result<PulseSamplePair> {
        Ok(PulseSamplePair::new(t, self.omega_p, self.omega_s).with_derivatives(0.0, 0.0))
    }
}
