//! Exact propagators exp(−iH dt) for Hermitian H.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// exp(−iH dt) for a 2×2 Hermitian H via the Pauli decomposition
/// H = a₀ I + a·σ, exp(−iH dt) = e^{−i a₀ dt}[cos(|a| dt) I − i sin(|a| dt) â·σ].
pub fn pauli_exp(h: &Matrix2<C64>, dt: f64) -> Matrix2<C64> {
    let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let az = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    // h₀₁ = a_x − i a_y; average with h₁₀* to absorb rounding asymmetry
    let off = 0.5 * (h[(0, 1)] + h[(1, 0)].conj());
    let r = (az * az + off.norm_sqr()).sqrt();
    let angle = r * dt;
    let cos = angle.cos();
    // sin(r dt)/r, finite as r → 0
    let sinc = if angle.abs() < 1e-8 {
        dt * (1.0 - angle * angle / 6.0)
    } else {
        angle.sin() / r
    };
    let mi = C64::new(0.0, -sinc);
    let phase = C64::from_polar(1.0, -a0 * dt);
    Matrix2::new(
        C64::new(cos, 0.0) + mi * az,
        mi * off,
        mi * off.conj(),
        C64::new(cos, 0.0) - mi * az,
    ) * phase
}

/// exp(−iH dt) for a 3×3 Hermitian H via its eigendecomposition.
///
/// The eigenvectors are re-orthonormalized so that rounding in the
/// decomposition does not accumulate as norm drift over millions of steps.
pub fn hermitian_exp(h: &Matrix3<C64>, dt: f64) -> Matrix3<C64> {
    let eig = SymmetricEigen::new(*h);
    let mut v = eig.eigenvectors;
    for j in 0..3 {
        for k in 0..j {
            let overlap = v.column(k).dotc(&v.column(j));
            let proj = v.column(k) * overlap;
            v.column_mut(j).axpy(-C64::new(1.0, 0.0), &proj, C64::new(1.0, 0.0));
        }
        let norm = v.column(j).norm();
        v.column_mut(j).unscale_mut(norm);
    }
    let phases = Matrix3::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * dt)));
    v * phases * v.adjoint()
}

/// exp(−iH dt) for a 2×2 or 3×3 Hermitian matrix.
pub fn unitary_step(h: &DMatrix<C64>, dt: f64) -> Result<DMatrix<C64>> {
    match (h.nrows(), h.ncols()) {
        (2, 2) => {
            let u = pauli_exp(&h.fixed_view::<2, 2>(0, 0).into_owned(), dt);
            Ok(DMatrix::from_iterator(2, 2, u.iter().copied()))
        }
        (3, 3) => {
            let u = hermitian_exp(&h.fixed_view::<3, 3>(0, 0).into_owned(), dt);
            Ok(DMatrix::from_iterator(3, 3, u.iter().copied()))
        }
        (r, c) => Err(Error::Contract(format!("unsupported propagator size {r}x{c}"))),
    }
}
