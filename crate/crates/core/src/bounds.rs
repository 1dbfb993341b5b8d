//! Closed-form error bounds for both detectors.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fourier-measurement noise level `σ̃ = 2(2π + β)σ`.
pub fn sigma_tilde<T: Real>(sigma: T, beta: T) -> T {
    T::of(2.0) * (T::of(2.0) * T::PI() + beta) * sigma
}

/// Burst-time error of the direct detector: `β/2`.
pub fn direct_time_bound<T: Real>(beta: T) -> T {
    beta / T::of(2.0)
}

/// Per-sampler coefficient error of the direct detector:
/// `(K+1)CLβ²‖g‖ + 4(K+1)σ + D(β)R‖f‖`.
#[allow(clippy::too_many_arguments)]
pub fn direct_coeff_bound<T: Real>(k: T, c: T, l: T, beta: T, g_norm: T, sigma: T, d_beta: T, r: T, f_norm: T) -> T {
    let k1 = k + T::one();
    k1 * c * l * beta * beta * g_norm + T::of(4.0) * k1 * sigma + d_beta * r * f_norm
}

/// Burst-time error of the Prony detector: `(Lβ² + β·min{1, √σ̃}) / 3`.
pub fn prony_time_bound<T: Real>(l: T, beta: T, sigma_tilde: T) -> T {
    (l * beta * beta + beta * T::one().min(sigma_tilde.sqrt())) / T::of(3.0)
}

/// Relative per-sampler coefficient error of the Prony detector:
/// `(5/3)(Lβ + min{1, √σ̃})`.
pub fn prony_relative_coeff_bound<T: Real>(l: T, beta: T, sigma_tilde: T) -> T {
    T::of(5.0) / T::of(3.0) * (l * beta + T::one().min(sigma_tilde.sqrt()))
}

/// Shape error of the Prony detector:
/// `S·R·max{(5/3)‖f‖(Lβ + min{1, √σ̃}), (48/π)Lβ² + 12σ̃/R}`.
pub fn prony_shape_bound<T: Real>(s: T, r: T, l: T, beta: T, sigma_tilde: T, f_norm: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("sampler radius R must be positive, got {r}")));
    }
    let relative = f_norm * prony_relative_coeff_bound(l, beta, sigma_tilde);
    let absolute = T::of(48.0) / T::PI() * l * beta * beta + T::of(12.0) * sigma_tilde / r;
    Ok(s * r * relative.max(absolute))
}
