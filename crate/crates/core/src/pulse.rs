//! Raman pulse synthesis.
//!
//! The original STIRAP pair is a pair of delayed Gaussians. The shortcut
//! (STIRSAP) pair is obtained by absorbing the counter-diabatic field
//! Ω_a = 2θ̇ into the effective two-level coupling and inverting the
//! adiabatic-elimination relations
//!
//! ```text
//! Δ̃_eff = (Ω̃_P² − Ω̃_S²)/(4Δ),   Ω̃_eff = Ω̃_P Ω̃_S/(2Δ)
//! ```
//!
//! for the new pulse amplitudes, with Δ̃_eff = Δ_eff + φ̇ and
//! Ω̃_eff = √(Ω_eff² + Ω_a²), φ = arctan(Ω_a/Ω_eff).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::types::{PulseConfig, SystemConfig};

/// Relative change between step-h and step-2h derivative estimates above
/// which a sample is flagged as unconverged.
pub const RICHARDSON_TOLERANCE: f64 = 1e-4;

/// Pump and Stokes Rabi frequencies at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSamplePair {
    pub t: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub d_omega_p: Option<f64>,
    pub d_omega_s: Option<f64>,
}

impl PulseSamplePair {
    /// Sample without derivative information.
    pub fn new(t: f64, omega_p: f64, omega_s: f64) -> Self {
        Self {
            t,
            omega_p,
            omega_s,
            d_omega_p: None,
            d_omega_s: None,
        }
    }

    pub fn with_derivatives(mut self, d_omega_p: f64, d_omega_s: f64) -> Self {
        self.d_omega_p = Some(d_omega_p);
        self.d_omega_s = Some(d_omega_s);
        self
    }

    /// Mixing angle θ = arctan(Ω_P/Ω_S), in [0, π/2] for non-negative pulses.
    pub fn mixing_angle(&self) -> f64 {
        self.omega_p.atan2(self.omega_s)
    }
}

/// Effective two-level quantities at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub t: f64,
    pub delta_eff: f64,
    pub omega_eff: f64,
    /// Counter-diabatic Rabi frequency (signed).
    pub omega_a: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub delta_eff_tilde: f64,
    pub omega_eff_tilde: f64,
}

impl EffectiveParams {
    /// γ(t) = φ(t) + φ_L.
    pub fn gamma(&self, laser_phase: f64) -> f64 {
        self.phi + laser_phase
    }
}

/// Phase of the counter-diabatic field, φ_a = φ_L + π/2.
pub fn aux_field_phase(laser_phase: f64) -> f64 {
    laser_phase + FRAC_PI_2
}

/// Gaussian pair with analytic first derivatives, for `0 ≤ t ≤ T`.
pub fn gaussian_pair(cfg: &PulseConfig, t: f64) -> Result<PulseSamplePair> {
    if !(0.0..=cfg.total_time).contains(&t) {
        return Err(Error::Domain {
            t,
            total: cfg.total_time,
        });
    }
    Ok(gaussian_pair_at(cfg, t))
}

/// Gaussian pair evaluated anywhere on the real line.
pub(crate) fn gaussian_pair_at(cfg: &PulseConfig, t: f64) -> PulseSamplePair {
    let centre = cfg.total_time / 2.0;
    let s2 = cfg.width * cfg.width;
    let xp = t - centre - cfg.delay;
    let xs = t - centre + cfg.delay;
    let omega_p = cfg.peak_pump * (-xp * xp / s2).exp();
    let omega_s = cfg.peak_stokes * (-xs * xs / s2).exp();
    PulseSamplePair::new(t, omega_p, omega_s)
        .with_derivatives(-2.0 * xp / s2 * omega_p, -2.0 * xs / s2 * omega_s)
}

/// Ω_a = 2(Ω̇_P Ω_S − Ω_P Ω̇_S)/(Ω_P² + Ω_S²). The sign is kept.
pub fn counter_diabatic_rabi(pair: &PulseSamplePair) -> Result<f64> {
    let (Some(dp), Some(ds)) = (pair.d_omega_p, pair.d_omega_s) else {
        return Err(Error::Contract(
            "counter-diabatic field needs pulse derivatives".into(),
        ));
    };
    let denom = pair.omega_p * pair.omega_p + pair.omega_s * pair.omega_s;
    if denom == 0.0 {
        return Err(Error::DegeneratePulse { t: pair.t });
    }
    Ok(2.0 * (dp * pair.omega_s - pair.omega_p * ds) / denom)
}

/// (Δ_eff, Ω_eff) = ((Ω_P² − Ω_S²)/(4Δ), Ω_P Ω_S/(2Δ)).
pub fn effective_params(pair: &PulseSamplePair, system: &SystemConfig) -> (f64, f64) {
    effective_coupling(pair.omega_p, pair.omega_s, system.detuning)
}

pub(crate) fn effective_coupling(omega_p: f64, omega_s: f64, detuning: f64) -> (f64, f64) {
    (
        (omega_p * omega_p - omega_s * omega_s) / (4.0 * detuning),
        omega_p * omega_s / (2.0 * detuning),
    )
}

/// Inverts the effective coupling for the Raman amplitudes:
/// Ω̃_P = √(2Δ(R + Δ̃)), Ω̃_S = √(2Δ(R − Δ̃)) with R = √(Δ̃² + Ω̃²).
///
/// The smaller radicand is formed as Ω̃²/(R + |Δ̃|) so that it keeps full
/// relative precision when |Δ̃| ≫ Ω̃.
pub fn modified_pulses(delta_tilde: f64, omega_tilde: f64, detuning: f64) -> (f64, f64) {
    let r = delta_tilde.hypot(omega_tilde);
    let big = r + delta_tilde.abs();
    let small = if big > 0.0 {
        omega_tilde * omega_tilde / big
    } else {
        0.0
    };
    let (p, s) = if delta_tilde >= 0.0 {
        (big, small)
    } else {
        (small, big)
    };
    ((2.0 * detuning * p).sqrt(), (2.0 * detuning * s).sqrt())
}

/// φ = arctan(Ω_a/Ω_eff) for Ω_eff > 0. With Ω_eff = 0 the angle is ±π/2
/// (or 0 if Ω_a also vanishes); callers decide whether that is allowed.
fn phase_angle(omega_a: f64, omega_eff: f64) -> f64 {
    if omega_eff > 0.0 {
        (omega_a / omega_eff).atan()
    } else if omega_a == 0.0 {
        0.0
    } else {
        FRAC_PI_2.copysign(omega_a)
    }
}

/// φ and φ̇ on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseProfile {
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    /// Samples whose derivative changed by more than [`RICHARDSON_TOLERANCE`]
    /// (relative) between steps h and 2h.
    pub unconverged: Vec<usize>,
}

/// φ per sample and φ̇ by five-point finite differences: central in the
/// interior, one-sided five-point stencils on the two samples at each end.
pub fn phi_and_derivative(times: &[f64], omega_eff: &[f64], omega_a: &[f64]) -> Result<PhaseProfile> {
    let n = times.len();
    if omega_eff.len() != n || omega_a.len() != n {
        return Err(Error::Contract("phase inputs differ in length".into()));
    }
    if n < 5 {
        return Err(Error::Contract(format!(
            "five-point differences need at least 5 samples, got {n}"
        )));
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if h.is_nan() || h <= 0.0 || !uniform {
        return Err(Error::Contract("phase grid must be uniform and increasing".into()));
    }
    for i in 1..n - 1 {
        if omega_eff[i] == 0.0 {
            return Err(Error::Singularity { t: times[i] });
        }
    }

    let phi: Vec<f64> = omega_a
        .iter()
        .zip(omega_eff)
        .map(|(&a, &e)| phase_angle(a, e))
        .collect();
    let phi_dot: Vec<f64> = (0..n).map(|i| five_point(&phi, i, 1, h)).collect();

    let scale = phi_dot.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let unconverged = (4..n.saturating_sub(4))
        .filter(|&i| {
            let coarse = five_point(&phi, i, 2, h);
            let denom = phi_dot[i].abs().max(1e-3 * scale);
            denom > 0.0 && (phi_dot[i] - coarse).abs() > RICHARDSON_TOLERANCE * denom
        })
        .collect();

    Ok(PhaseProfile {
        phi,
        phi_dot,
        unconverged,
    })
}

/// Five-point derivative of `f` at index `i` using samples `stride` apart.
fn five_point(f: &[f64], i: usize, stride: usize, h: f64) -> f64 {
    let n = f.len();
    let step = h * stride as f64;
    let at = |k: isize| f[(i as isize + k * stride as isize) as usize];
    let s = stride;
    if i >= 2 * s && i + 2 * s < n {
        (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * step)
    } else if i < s {
        (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * step)
    } else if i < 2 * s {
        (-3.0 * at(-1) - 10.0 * at(0) + 18.0 * at(1) - 6.0 * at(2) + at(3)) / (12.0 * step)
    } else if i + s >= n {
        (25.0 * at(0) - 48.0 * at(-1) + 36.0 * at(-2) - 16.0 * at(-3) + 3.0 * at(-4)) / (12.0 * step)
    } else {
        (3.0 * at(1) + 10.0 * at(0) - 18.0 * at(-1) + 6.0 * at(-2) - at(-3)) / (12.0 * step)
    }
}

/// One row of a synthesized pulse table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseRow {
    pub t: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_a: f64,
    pub omega_p_tilde: f64,
    pub omega_s_tilde: f64,
    pub params: EffectiveParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseTable {
    pub rows: Vec<PulseRow>,
    pub unconverged: Vec<usize>,
}

impl PulseTable {
    /// max over the table of max(Ω̃_P, Ω̃_S).
    pub fn modified_peak(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.omega_p_tilde.max(r.omega_s_tilde))
            .fold(0.0, f64::max)
    }

    pub fn original_peak(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.omega_p.max(r.omega_s))
            .fold(0.0, f64::max)
    }
}

/// Minimum number of grid intervals accepted by [`stirsap_pulses`].
pub const MIN_INTERVALS: usize = 1000;

/// Original and modified pulse pair on `grid`, which must lie inside [0, T]
/// and have at least [`MIN_INTERVALS`] intervals.
pub fn stirsap_pulses(cfg: &PulseConfig, system: &SystemConfig, grid: &TimeGrid) -> Result<PulseTable> {
    cfg.validate()?;
    system.validate()?;
    if grid.intervals < MIN_INTERVALS {
        return Err(Error::Contract(format!(
            "pulse grid needs at least {MIN_INTERVALS} intervals, got {}",
            grid.intervals
        )));
    }
    let times = grid.points();
    let pairs = times
        .iter()
        .map(|&t| gaussian_pair(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let couplings: Vec<(f64, f64)> = pairs.iter().map(|p| effective_params(p, system)).collect();
    let omega_a = pairs
        .iter()
        .map(counter_diabatic_rabi)
        .collect::<Result<Vec<_>>>()?;
    let omega_eff: Vec<f64> = couplings.iter().map(|c| c.1).collect();
    let profile = phi_and_derivative(&times, &omega_eff, &omega_a)?;

    let rows = pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let (delta_eff, omega_eff) = couplings[i];
            let params = tilde_params(
                pair.t,
                delta_eff,
                omega_eff,
                omega_a[i],
                profile.phi[i],
                profile.phi_dot[i],
            );
            let (p, s) = modified_pulses(params.delta_eff_tilde, params.omega_eff_tilde, system.detuning);
            PulseRow {
                t: pair.t,
                omega_p: pair.omega_p,
                omega_s: pair.omega_s,
                omega_a: omega_a[i],
                omega_p_tilde: p,
                omega_s_tilde: s,
                params,
            }
        })
        .collect();
    Ok(PulseTable {
        rows,
        unconverged: profile.unconverged,
    })
}

fn tilde_params(t: f64, delta_eff: f64, omega_eff: f64, omega_a: f64, phi: f64, phi_dot: f64) -> EffectiveParams {
    EffectiveParams {
        t,
        delta_eff,
        omega_eff,
        omega_a,
        phi,
        phi_dot,
        delta_eff_tilde: delta_eff + phi_dot,
        omega_eff_tilde: omega_eff.hypot(omega_a),
    }
}

/// Pointwise evaluator of the shortcut quantities of a Gaussian pair.
///
/// φ̇ is taken with the centred five-point stencil of spacing `step` around
/// the requested time, so values agree with [`stirsap_pulses`] at interior
/// grid points when `step` equals the grid spacing. The Gaussians are
/// evaluated off the [0, T] window when the stencil or a time shift needs it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortcutShape {
    pub pulse: PulseConfig,
    pub system: SystemConfig,
    pub step: f64,
}

impl ShortcutShape {
    pub fn new(pulse: PulseConfig, system: SystemConfig) -> Self {
        let step = pulse.total_time / crate::grid::DEFAULT_INTERVALS as f64;
        Self { pulse, system, step }
    }

    fn phi_at(&self, t: f64) -> Result<f64> {
        let pair = gaussian_pair_at(&self.pulse, t);
        let (_, omega_eff) = effective_params(&pair, &self.system);
        if omega_eff == 0.0 {
            return Err(Error::Singularity { t });
        }
        Ok(phase_angle(counter_diabatic_rabi(&pair)?, omega_eff))
    }

    /// Original pair plus all effective quantities at `t`.
    pub fn params_at(&self, t: f64) -> Result<(PulseSamplePair, EffectiveParams)> {
        let pair = gaussian_pair_at(&self.pulse, t);
        let (delta_eff, omega_eff) = effective_params(&pair, &self.system);
        if omega_eff == 0.0 {
            return Err(Error::Singularity { t });
        }
        let omega_a = counter_diabatic_rabi(&pair)?;
        let h = self.step;
        let phi_dot = (self.phi_at(t - 2.0 * h)? - 8.0 * self.phi_at(t - h)? + 8.0 * self.phi_at(t + h)?
            - self.phi_at(t + 2.0 * h)?)
            / (12.0 * h);
        let phi = phase_angle(omega_a, omega_eff);
        Ok((pair, tilde_params(t, delta_eff, omega_eff, omega_a, phi, phi_dot)))
    }

    /// (Ω̃_P, Ω̃_S) at `t`.
    pub fn modified_at(&self, t: f64) -> Result<(f64, f64)> {
        let (_, params) = self.params_at(t)?;
        Ok(modified_pulses(
            params.delta_eff_tilde,
            params.omega_eff_tilde,
            self.system.detuning,
        ))
    }
}
