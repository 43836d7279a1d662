//! Dressed states, spin polarizations, effective fields and the gauge frame.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::PulseSamplePair;
use crate::types::{BlochVector, HamiltonianSample, StateVector, Trajectory};

/// Dark and bright states of the Λ system in the large-detuning limit.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedBasis {
    pub dark: StateVector,
    pub bright1: StateVector,
    pub bright2: StateVector,
    pub mixing_angle: f64,
}

/// |D⟩ = cosθ|1⟩ − sinθ e^{−iφ_L}|2⟩, |B₁⟩ = sinθ e^{iφ_L}|1⟩ + cosθ|2⟩,
/// |B₂⟩ = |3⟩, θ = arctan(Ω_P/Ω_S).
pub fn dressed_basis(pulses: &PulseSamplePair, laser_phase: f64) -> Result<DressedBasis> {
    if pulses.omega_p == 0.0 && pulses.omega_s == 0.0 {
        return Err(Error::DegeneratePulse { t: pulses.t });
    }
    let theta = pulses.mixing_angle();
    let (s, c) = theta.sin_cos();
    let zero = C64::new(0.0, 0.0);
    let dark = StateVector::new(vec![C64::new(c, 0.0), C64::from_polar(-s, -laser_phase), zero])?;
    let bright1 = StateVector::new(vec![C64::from_polar(s, laser_phase), C64::new(c, 0.0), zero])?;
    Ok(DressedBasis {
        dark,
        bright1,
        bright2: StateVector::basis(3, 2)?,
        mixing_angle: theta,
    })
}

/// (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩) of a two-level state.
pub fn spin_polarization(state: &StateVector) -> Result<BlochVector> {
    let [c1, c2] = state.amplitudes() else {
        return Err(Error::Contract(format!(
            "spin polarization needs a two-level state, got dimension {}",
            state.dim()
        )));
    };
    let coherence = c1.conj() * c2;
    Ok(BlochVector::new(
        2.0 * coherence.re,
        2.0 * coherence.im,
        c1.norm_sqr() - c2.norm_sqr(),
    ))
}

/// Field B with H = (1/2)σ·B (up to a multiple of the identity).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveField {
    pub field: BlochVector,
    pub magnitude: f64,
    /// Unit vector; `None` when the field vanishes.
    pub direction: Option<BlochVector>,
}

/// B_x = H₁₂ + H₂₁, B_y = i(H₁₂ − H₂₁), B_z = H₁₁ − H₂₂.
pub fn effective_field(h: &HamiltonianSample) -> Result<EffectiveField> {
    if h.dim() != 2 {
        return Err(Error::Contract("effective field needs a 2x2 Hamiltonian".into()));
    }
    let m = &h.matrix;
    let bx = m[(0, 1)] + m[(1, 0)];
    let by = C64::i() * (m[(0, 1)] - m[(1, 0)]);
    let bz = m[(0, 0)] - m[(1, 1)];
    let field = BlochVector::new(bx.re, by.re, bz.re);
    let magnitude = field.norm();
    let direction = (magnitude > 0.0).then(|| {
        BlochVector::new(field.x / magnitude, field.y / magnitude, field.z / magnitude)
    });
    Ok(EffectiveField {
        field,
        magnitude,
        direction,
    })
}

/// Maps a trajectory of the phase-modulated total Hamiltonian into the
/// frame of the real Hamiltonian: ψ̃(t) = U(t)†ψ(t) with
/// U(t) = diag(e^{−iγ/2}, e^{iγ/2}). This is the frame in which
/// H̃ = U†HU − iU†U̇ holds. Populations are untouched.
pub fn gauge_transform(trajectory: &Trajectory, gamma: &[f64]) -> Result<Trajectory> {
    if gamma.len() != trajectory.len() {
        return Err(Error::Contract(format!(
            "gauge angles ({}) do not match trajectory samples ({})",
            gamma.len(),
            trajectory.len()
        )));
    }
    if trajectory.dim() != 2 {
        return Err(Error::Contract("gauge transform acts on two-level trajectories".into()));
    }
    let states = trajectory
        .states
        .iter()
        .zip(gamma)
        .map(|(s, &g)| {
            let a = s.amplitudes();
            StateVector::from_raw(vec![a[0] * C64::from_polar(1.0, g / 2.0), a[1] * C64::from_polar(1.0, -g / 2.0)])
        })
        .collect();
    let mut out = Trajectory::new(trajectory.times.clone(), states)?;
    // the phases are exact, so the input's populations carry over bit for bit
    out.populations = trajectory.populations.clone();
    out.diagnostics = trajectory.diagnostics.clone();
    if trajectory.bloch.is_some() {
        attach_bloch(&mut out)?;
    }
    Ok(out)
}

/// Fills in the spin polarization of every sample of a two-level trajectory.
pub fn attach_bloch(trajectory: &mut Trajectory) -> Result<()> {
    trajectory.bloch = Some(
        trajectory
            .states
            .iter()
            .map(spin_polarization)
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(())
}

/// Final population of basis state `target`.
pub fn transfer_efficiency(trajectory: &Trajectory, target: usize) -> Result<f64> {
    trajectory
        .final_populations()
        .get(target)
        .copied()
        .ok_or_else(|| Error::Contract(format!("target index {target} out of range")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::hamiltonian::{build_hamiltonian, DriveSample, HamiltonianKind};
    use crate::types::SystemConfig;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn stokes_only_limit() {
        let d = dressed_basis(&PulseSamplePair::new(0.0, 0.0, 2.0), 0.4).unwrap();
        assert_eq!(d.mixing_angle, 0.0);
        assert_eq!(d.dark, StateVector::basis(3, 0).unwrap());
    }

    #[test]
    fn pump_only_limit() {
        let phase = 0.4;
        let d = dressed_basis(&PulseSamplePair::new(0.0, 2.0, 0.0), phase).unwrap();
        assert_eq!(d.mixing_angle, FRAC_PI_2);
        let a = d.dark.amplitudes();
        assert!(a[0].norm() < 1e-16);
        assert!((a[1] - C64::from_polar(-1.0, -phase)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_pulses_have_no_dressed_basis() {
        assert!(matches!(
            dressed_basis(&PulseSamplePair::new(0.3, 0.0, 0.0), 0.0),
            Err(Error::DegeneratePulse { .. })
        ));
    }

    proptest! {
        #[test]
        fn dark_state_is_dark(p in 0.1f64..1.0, s in 0.1f64..1.0, phase in -3.2f64..3.2) {
            let omega = 1.0;
            let system = SystemConfig { detuning: 500.0 * omega, reference_rabi: omega };
            let pulses = PulseSamplePair::new(0.0, p * omega, s * omega);
            let d = dressed_basis(&pulses, phase).unwrap();
            prop_assert!(d.dark.inner(&d.bright1).norm() < 1e-12);
            let h = build_hamiltonian(HamiltonianKind::Lambda3, &DriveSample::from_pulses(pulses), &system, phase)
                .unwrap()
                .matrix;
            let v = nalgebra::DVector::from_column_slice(d.dark.amplitudes());
            let e = (v.adjoint() * &h * &v)[(0, 0)];
            // (Ω/Δ)² ≈ 4e-6 in units of Ω
            prop_assert!(e.norm() < 4e-6 * omega);
        }

        #[test]
        fn pure_states_have_unit_polarization(re in -1.0f64..1.0, im in -1.0f64..1.0, b in -1.0f64..1.0) {
            prop_assume!(re.abs() + im.abs() + b.abs() > 1e-3);
            let s = StateVector::normalized(vec![C64::new(re, im), c(b)]).unwrap();
            prop_assert!((spin_polarization(&s).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polarization_of_basis_and_superposition() {
        let up = spin_polarization(&StateVector::basis(2, 0).unwrap()).unwrap();
        assert_eq!(up, BlochVector::new(0.0, 0.0, 1.0));
        let plus = StateVector::new(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let x = spin_polarization(&plus).unwrap();
        assert!((x.x - 1.0).abs() < 1e-15 && x.y.abs() < 1e-15 && x.z.abs() < 1e-15);
        assert!(spin_polarization(&StateVector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn field_of_sigma_z() {
        let a = 0.7;
        let h = HamiltonianSample::new(0.0, DMatrix::from_row_slice(2, 2, &[c(a), c(0.0), c(0.0), c(-a)])).unwrap();
        let f = effective_field(&h).unwrap();
        assert_eq!(f.field, BlochVector::new(0.0, 0.0, 2.0 * a));
        assert_eq!(f.direction, Some(BlochVector::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn field_of_sigma_y() {
        // σ_y = [[0, −i], [i, 0]] → B = (0, 2, 0)
        let h = HamiltonianSample::new(
            0.0,
            DMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]),
        )
        .unwrap();
        let f = effective_field(&h).unwrap();
        assert!((f.field.y - 2.0).abs() < 1e-15 && f.field.x == 0.0 && f.field.z == 0.0);
    }

    #[test]
    fn zero_field_has_no_direction() {
        let h = HamiltonianSample::new(0.0, DMatrix::from_element(2, 2, c(0.0))).unwrap();
        let f = effective_field(&h).unwrap();
        assert_eq!(f.magnitude, 0.0);
        assert!(f.direction.is_none());
    }

    #[test]
    fn gauge_transform_keeps_populations() {
        let states = vec![
            StateVector::two_level_superposition(0.3, 0.1).unwrap(),
            StateVector::two_level_superposition(0.6, -1.0).unwrap(),
        ];
        let traj = Trajectory::new(vec![0.0, 1.0], states).unwrap();
        let out = gauge_transform(&traj, &[0.4, 2.5]).unwrap();
        for (a, b) in traj.populations.iter().zip(&out.populations) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let identity = gauge_transform(&traj, &[0.0, 0.0]).unwrap();
        assert_eq!(identity.states, traj.states);
        assert!(gauge_transform(&traj, &[0.0]).is_err());
    }

    #[test]
    fn efficiency_reads_final_population() {
        let end = StateVector::basis(2, 1).unwrap();
        let traj = Trajectory::new(vec![0.0, 1.0], vec![StateVector::basis(2, 0).unwrap(), end]).unwrap();
        assert_eq!(transfer_efficiency(&traj, 1).unwrap(), 1.0);
        let half = StateVector::new(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let traj = Trajectory::new(vec![0.0], vec![half]).unwrap();
        assert!((transfer_efficiency(&traj, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(transfer_efficiency(&traj, 2).is_err());
    }
}
