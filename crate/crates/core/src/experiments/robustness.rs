//! Efficiency against amplitude, pulse-delay and detuning imperfections.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{checked, resonant_drive, sweep, transfer, RunOptions};
use crate::dynamics::{Drive, GaussianDrive, ShortcutDrive};
use crate::error::{Error, Result};
use crate::types::{ConfigSnapshot, PulseConfig, SweepResult, SystemConfig};
use crate::Protocol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RobustnessAxis {
    /// Executed amplitudes scaled by ε; the values are ε.
    Amplitude,
    /// Pulse separation changed to 2Δτ′; the values are Δτ′/Δτ.
    /// Without `adapt_shapes` the pulses shaped for Δτ are replayed at the
    /// new separation; with it the shapes are recomputed for Δτ′.
    Delay { adapt_shapes: bool },
    /// Propagation at Δ′ = Δ + δ with shapes computed at Δ; the values are δ (rad/s).
    Detuning,
}

impl RobustnessAxis {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            RobustnessAxis::Amplitude => "epsilon",
            RobustnessAxis::Delay { .. } => "delay_ratio",
            RobustnessAxis::Detuning => "detuning_offset",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSpec {
    pub axis: RobustnessAxis,
    pub start: f64,
    pub end: f64,
    pub samples: usize,
    pub protocols: Vec<Protocol>,
}

impl RobustnessSpec {
    /// ε ∈ [0.8, 1.2] for STIRSAP, STIRAP and the resonant π pulse.
    pub fn amplitude() -> Self {
        Self {
            axis: RobustnessAxis::Amplitude,
            start: 0.8,
            end: 1.2,
            samples: 41,
            protocols: vec![Protocol::Stirsap, Protocol::Stirap, Protocol::ResonantPi],
        }
    }

    /// Δτ′ within ±20 % of Δτ for STIRSAP.
    pub fn delay(adapt_shapes: bool) -> Self {
        Self {
            axis: RobustnessAxis::Delay { adapt_shapes },
            start: 0.8,
            end: 1.2,
            samples: 41,
            protocols: vec![Protocol::Stirsap],
        }
    }

    /// δ within ±2π·40 MHz for STIRSAP and STIRAP.
    pub fn detuning() -> Self {
        Self {
            axis: RobustnessAxis::Detuning,
            start: -TAU * 40e6,
            end: TAU * 40e6,
            samples: 41,
            protocols: vec![Protocol::Stirsap, Protocol::Stirap],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.samples {
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || !self.start.is_finite() || !self.end.is_finite() || self.end < self.start {
            return Err(Error::InvalidConfig("robustness range must be finite, ordered and sampled".into()));
        }
        if self.protocols.is_empty() {
            return Err(Error::InvalidConfig("robustness sweep needs a protocol".into()));
        }
        let positive = matches!(self.axis, RobustnessAxis::Amplitude | RobustnessAxis::Delay { .. });
        if positive && self.start <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "{} values must be positive",
                self.axis.parameter_name()
            )));
        }
        Ok(())
    }
}

/// Executed drive and the detuning it is propagated at, for one sample.
fn perturbed(
    axis: RobustnessAxis,
    protocol: Protocol,
    value: f64,
    pulse: &PulseConfig,
    system: &SystemConfig,
) -> Result<(Box<dyn Drive>, SystemConfig)> {
    let shifted = |ratio: f64| PulseConfig {
        delay: pulse.delay * ratio,
        ..*pulse
    };
    let drive: Box<dyn Drive> = match (protocol, axis) {
        (Protocol::ResonantPi, RobustnessAxis::Amplitude) => Box::new(resonant_drive(value * PI, pulse.total_time, system)),
        (Protocol::ResonantPi, _) => Box::new(resonant_drive(PI, pulse.total_time, system)),
        (Protocol::Stirap, RobustnessAxis::Amplitude) => Box::new(GaussianDrive::new(pulse.scaled(value), *system)),
        (Protocol::Stirap, RobustnessAxis::Delay { .. }) => {
            let p = shifted(value);
            p.validate()?;
            Box::new(GaussianDrive::new(p, *system))
        }
        (Protocol::Stirap, RobustnessAxis::Detuning) => Box::new(GaussianDrive::new(*pulse, *system)),
        (Protocol::Stirsap, RobustnessAxis::Amplitude) => {
            Box::new(ShortcutDrive::new(*pulse, *system).with_amplitude(value))
        }
        (Protocol::Stirsap, RobustnessAxis::Delay { adapt_shapes: false }) => {
            Box::new(ShortcutDrive::new(*pulse, *system).with_extra_delay((value - 1.0) * pulse.delay))
        }
        (Protocol::Stirsap, RobustnessAxis::Delay { adapt_shapes: true }) => {
            let p = shifted(value);
            p.validate()?;
            Box::new(ShortcutDrive::new(p, *system))
        }
        (Protocol::Stirsap, RobustnessAxis::Detuning) => Box::new(ShortcutDrive::new(*pulse, *system)),
    };
    let actual = match axis {
        RobustnessAxis::Detuning => {
            let d = system.with_detuning(system.detuning + value);
            d.validate()?;
            d
        }
        _ => *system,
    };
    Ok((drive, actual))
}

/// One efficiency curve per protocol of `spec`, in the order given.
pub fn robustness_sweep(
    spec: &RobustnessSpec,
    pulse: &PulseConfig,
    system: &SystemConfig,
    options: &RunOptions,
) -> Result<Vec<SweepResult>> {
    spec.validate()?;
    checked(pulse, system)?;
    let values = spec.values();
    let config = ConfigSnapshot {
        pulse: *pulse,
        system: *system,
    };
    spec.protocols
        .iter()
        .map(|&protocol| {
            sweep(spec.axis.parameter_name(), &values, protocol, config, |v| {
                let (drive, actual) = perturbed(spec.axis, protocol, v, pulse, system)?;
                transfer(drive.as_ref(), &actual, pulse, options)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ranges() {
        let a = RobustnessSpec::amplitude();
        let v = a.values();
        assert_eq!(v.len(), 41);
        assert_eq!(v[0], 0.8);
        assert!((v[40] - 1.2).abs() < 1e-15);
        assert!((v[20] - 1.0).abs() < 1e-15);
        let d = RobustnessSpec::detuning().values();
        assert!((d[0] + TAU * 40e6).abs() < 1e-3 && d[20].abs() < 1e-3);
    }

    #[test]
    fn invalid_specs() {
        let mut s = RobustnessSpec::amplitude();
        s.start = -0.1;
        assert!(s.validate().is_err());
        let mut s = RobustnessSpec::delay(true);
        s.samples = 0;
        assert!(s.validate().is_err());
        let mut s = RobustnessSpec::detuning();
        s.protocols.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn resonant_reference_follows_rabi_formula() {
        let system = SystemConfig::default();
        let pulse = PulseConfig::new(system.reference_rabi, 4.0 * system.pi_time());
        let spec = RobustnessSpec {
            protocols: vec![Protocol::ResonantPi],
            samples: 5,
            ..RobustnessSpec::amplitude()
        };
        let out = robustness_sweep(&spec, &pulse, &system, &RunOptions::default()).unwrap();
        for (e, v) in out[0].efficiencies.iter().zip(&out[0].parameter_values) {
            assert!((e - (v * PI / 2.0).sin().powi(2)).abs() < 1e-8);
        }
    }
}
