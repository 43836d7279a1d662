//! Fidelity-constrained searches over pulse amplitude and operation time.
//!
//! Efficiencies are not monotone in either variable (non-adiabatic
//! oscillations), so "minimal" means the first crossing of a geometric scan
//! from the lower edge, refined by bisection inside the crossing interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{efficiency, RunOptions};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulse::stirsap_pulses;
use crate::types::{PulseConfig, SystemConfig};
use crate::Protocol;

pub const DEFAULT_FIDELITY_TARGET: f64 = 0.994;

/// Amplitude search: the original pulses are scaled by k ∈ [min_scale, max_scale].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub min_scale: f64,
    pub max_scale: f64,
    /// Bisection resolution, in units of Ω₀.
    pub resolution: f64,
    pub scan_factor: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            min_scale: 1.0,
            max_scale: 100.0,
            resolution: 1e-3,
            scan_factor: 1.05,
        }
    }
}

/// Operation-time search, in units of T₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSearch {
    pub min_time: f64,
    pub max_time: f64,
    pub resolution: f64,
    pub scan_factor: f64,
}

impl Default for TimeSearch {
    fn default() -> Self {
        Self {
            min_time: 0.25,
            max_time: 1000.0,
            resolution: 1e-3,
            scan_factor: 1.1,
        }
    }
}

/// Smallest x in [lo, hi] passing `pass`, as described in the module docs.
/// `None` when no scanned point passes.
fn first_crossing<F>(lo: f64, hi: f64, factor: f64, resolution: f64, mut pass: F) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(lo > 0.0 && hi >= lo && factor > 1.0 && resolution > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bad search bracket [{lo}, {hi}], factor {factor}, resolution {resolution}"
        )));
    }
    if pass(lo)? {
        return Ok(Some(lo));
    }
    let mut below = lo;
    while below < hi {
        let above = (below * factor).min(hi);
        if pass(above)? {
            let (mut a, mut b) = (below, above);
            while b - a > resolution {
                let mid = 0.5 * (a + b);
                if pass(mid)? {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(Some(b));
        }
        below = above;
    }
    Ok(None)
}

fn check_target(target: f64) -> Result<()> {
    if (0.0..=1.0).contains(&target) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("fidelity target {target} outside [0, 1]")))
    }
}

/// Maximum over time of max(Ω̃_P, Ω̃_S) for the reshaped pulses of `pulse`.
pub fn shortcut_peak(pulse: &PulseConfig, system: &SystemConfig) -> Result<f64> {
    Ok(stirsap_pulses(pulse, system, &TimeGrid::over(pulse.total_time)?)?.modified_peak())
}

/// Minimal peak Rabi frequency (rad/s) at which `protocol` with duration
/// `total_time` reaches `target`. Both original pulses are scaled together;
/// STIRSAP reshapes at each trial scale and reports the peak of its
/// reshaped pulses.
pub fn required_peak(
    protocol: Protocol,
    total_time: f64,
    target: f64,
    pulse: &PulseConfig,
    system: &SystemConfig,
    search: &PeakSearch,
    options: &RunOptions,
) -> Result<f64> {
    check_target(target)?;
    if protocol == Protocol::ResonantPi {
        return Err(Error::InvalidConfig("the resonant reference has no peak search".into()));
    }
    let base = pulse.with_total_time(total_time);
    base.validate()?;
    let resolution = search.resolution * system.reference_rabi / base.max_peak();
    let scale = first_crossing(search.min_scale, search.max_scale, search.scan_factor, resolution, |k| {
        Ok(efficiency(protocol, &base.scaled(k), system, options)? >= target)
    })?
    .ok_or_else(|| {
        Error::Search(format!(
            "{protocol} cannot reach {target} at T = {total_time:e} s with scale <= {}",
            search.max_scale
        ))
    })?;
    let pulse = base.scaled(scale);
    match protocol {
        Protocol::Stirsap => shortcut_peak(&pulse, system),
        _ => Ok(pulse.max_peak()),
    }
}

/// Minimal operation times of both protocols at equal maximum Rabi frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    /// Peak Rabi frequencies, in units of Ω₀.
    pub peaks: Vec<f64>,
    /// Minimal STIRAP time per peak (s).
    pub t_ap: Vec<f64>,
    /// Minimal STIRSAP time per peak (s).
    pub t_sa: Vec<f64>,
    /// T_AP / T_SA.
    pub ratio: Vec<f64>,
    /// (T_AP − T_SA) / T₀.
    pub difference: Vec<f64>,
    pub fidelity_target: f64,
}

impl SpeedupReport {
    /// Ratio at the largest sampled peak.
    pub fn plateau_ratio(&self) -> f64 {
        *self.ratio.last().expect("report is non-empty")
    }

    /// Peak (units of Ω₀) where T_AP − T_SA is largest.
    pub fn argmax_difference(&self) -> f64 {
        let i = (0..self.difference.len())
            .max_by(|&a, &b| self.difference[a].total_cmp(&self.difference[b]))
            .expect("report is non-empty");
        self.peaks[i]
    }

    /// Whether the last quartile of the ratio stays within `tolerance`
    /// (relative) of its final value.
    pub fn has_plateau(&self, tolerance: f64) -> bool {
        let last = self.plateau_ratio();
        let start = self.ratio.len() - self.ratio.len().div_ceil(4);
        self.ratio[start..].iter().all(|r| (r - last).abs() <= tolerance * last)
    }
}

/// Peak grid: 1.01..1.60 Ω₀ in steps of 0.01, then 1.7..4.0 Ω₀ in steps of 0.1.
pub fn default_peak_grid() -> Vec<f64> {
    let fine = (101..=160).map(|i| i as f64 / 100.0);
    let coarse = (17..=40).map(|i| i as f64 / 10.0);
    fine.chain(coarse).collect()
}

/// For every peak (units of Ω₀): T_AP, the minimal STIRAP time at that
/// peak, and T_SA, the minimal time whose required STIRSAP peak does not
/// exceed it.
#[allow(clippy::too_many_arguments)]
pub fn speedup_analysis(
    peaks: &[f64],
    target: f64,
    pulse: &PulseConfig,
    system: &SystemConfig,
    peak_search: &PeakSearch,
    time_search: &TimeSearch,
    options: &RunOptions,
) -> Result<SpeedupReport> {
    check_target(target)?;
    if peaks.is_empty() || peaks.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::InvalidConfig("peak grid must be non-empty and positive".into()));
    }
    let t0 = system.pi_time();
    let omega0 = system.reference_rabi;
    let minimal_time = |pass: &dyn Fn(f64) -> Result<bool>| -> Result<f64> {
        first_crossing(
            time_search.min_time,
            time_search.max_time,
            time_search.scan_factor,
            time_search.resolution,
            |x| pass(x * t0),
        )?
        .map(|x| x * t0)
        .ok_or_else(|| Error::Search(format!("no operation time below {} T0 reaches {target}", time_search.max_time)))
    };
    let rows = peaks
        .par_iter()
        .map(|&peak| {
            let original = pulse.scaled(peak * omega0 / pulse.max_peak());
            let t_ap = minimal_time(&|t| {
                Ok(efficiency(Protocol::Stirap, &original.with_total_time(t), system, options)? >= target)
            })?;
            let t_sa = minimal_time(&|t| {
                match required_peak(Protocol::Stirsap, t, target, pulse, system, peak_search, options) {
                    Ok(p) => Ok(p <= peak * omega0),
                    Err(Error::Search(_)) => Ok(false),
                    Err(e) => Err(e),
                }
            })?;
            log::debug!("peak {peak} Ω0: T_AP = {:.4} T0, T_SA = {:.4} T0", t_ap / t0, t_sa / t0);
            Ok((t_ap, t_sa))
        })
        .collect::<Result<Vec<_>>>()?;
    let (t_ap, t_sa): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(SpeedupReport {
        peaks: peaks.to_vec(),
        ratio: t_ap.iter().zip(&t_sa).map(|(a, s)| a / s).collect(),
        difference: t_ap.iter().zip(&t_sa).map(|(a, s)| (a - s) / t0).collect(),
        t_ap,
        t_sa,
        fidelity_target: target,
    })
}
