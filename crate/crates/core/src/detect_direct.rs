//! Burst detection from paired point measurements.
//!
//! `Γ_n = m_{n+1}(g) − m_n(T*(β)g)` is the error of predicting the next
//! sample; it is small unless a burst fell in `[nβ, (n+1)β)`. Differencing
//! once more removes the slowly varying background.

use std::io::{self, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::GridFunction;
use crate::scalar::Real;
use crate::sensing::{DirectMeasurements, Scenario};

/// Default absolute floor added to every threshold; keeps rounding noise
/// from firing the detector when `L = σ = 0`.
pub const DEFAULT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectRule {
    /// Two consecutive second differences above `K(CLβ²‖g‖ + 4σ)`; burst in
    /// `[(n+1)β, (n+2)β)`.
    #[default]
    Proof,
    /// `|Γ⁻_n| ≥ KCLβ²‖g‖` and `|Γ⁻_{n+1}| < CLβ²‖g‖`; burst in `[nβ, (n+1)β)`.
    Pseudocode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectDetectorParams<T> {
    pub k: T,
    pub c: T,
    pub l: T,
    pub sigma: T,
    pub beta: T,
    pub rule: DirectRule,
    pub floor: T,
}

impl<T: Real> DirectDetectorParams<T> {
    pub fn new(k: T, c: T, l: T, sigma: T, beta: T, rule: DirectRule) -> Result<Self> {
        if !(k > T::one()) {
            return Err(Error::Domain(format!("K must exceed 1, got {k}")));
        }
        if !(beta > T::zero()) || !(l >= T::zero()) || !(sigma >= T::zero()) || !(c > T::zero()) {
            return Err(Error::Domain("need beta > 0, C > 0, L >= 0, sigma >= 0".into()));
        }
        Ok(Self { k, c, l, sigma, beta, rule, floor: T::of(DEFAULT_FLOOR) })
    }

    /// Parameters matching a scenario: `C` from the semigroup, `L` from the
    /// background, `σ` and `β` as configured.
    pub fn from_scenario(sc: &Scenario<T>, k: T, rule: DirectRule) -> Result<Self> {
        Self::new(k, sc.semigroup.norm_bound(sc.beta), sc.background.lipschitz(), sc.sigma, sc.beta, rule)
    }

    /// `K(CLβ²‖g‖ + 4σ)` plus the floor.
    pub fn threshold(&self, g_norm: T) -> T {
        self.k * (self.drift(g_norm) + T::of(4.0) * self.sigma) + self.floor
    }

    fn drift(&self, g_norm: T) -> T {
        self.c * self.l * self.beta * self.beta * g_norm
    }
}

/// A detected burst.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionEvent<T> {
    pub t_est: T,
    /// `[lo, hi)` of length `β`; `t_est` is its midpoint.
    pub interval: (T, T),
    /// `𝔣(g)` per sampler, zero where the sampler stayed below threshold.
    pub coeffs: Vec<Complex<T>>,
    pub shape: Option<GridFunction<T>>,
}

/// `Γ_n(g)` for `n = 0..n_max−1`.
pub fn gamma_residuals<T: Real>(meas: &DirectMeasurements<T>, sampler: usize) -> Result<Vec<Complex<T>>> {
    if sampler >= meas.samplers() {
        return Err(Error::Index(format!("sampler {sampler} out of range")));
    }
    let n_max = meas.n_max();
    if n_max < 2 {
        return Err(Error::Domain(format!("need n_max >= 2, got {n_max}")));
    }
    Ok((0..n_max).map(|n| meas.m[sampler][n + 1] - meas.mp[sampler][n]).collect())
}

/// Runs the detector over the whole record and merges detections closer
/// than `γ/2` (the earlier one wins).
pub fn detect<T: Real>(
    meas: &DirectMeasurements<T>,
    params: &DirectDetectorParams<T>,
    samplers: &[GridFunction<T>],
    gamma: T,
) -> Result<Vec<DetectionEvent<T>>> {
    if samplers.len() != meas.samplers() {
        return Err(Error::Domain(format!(
            "{} samplers given for {} measured channels",
            samplers.len(),
            meas.samplers()
        )));
    }
    if meas.n_max() < 3 {
        return Err(Error::Domain(format!("need n_max >= 3 for one detection window, got {}", meas.n_max())));
    }
    let second: Vec<Vec<Complex<T>>> = (0..samplers.len())
        .map(|s| gamma_residuals(meas, s).map(|g| g.windows(2).map(|w| w[1] - w[0]).collect()))
        .collect::<Result<_>>()?;
    let norms: Vec<T> = samplers.iter().map(|g| g.norm()).collect();
    let beta = params.beta;
    let half = T::of(0.5);

    let mut events: Vec<DetectionEvent<T>> = Vec::new();
    for n in 0..second[0].len() - 1 {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); samplers.len()];
        let mut fired = false;
        for (s, d) in second.iter().enumerate() {
            let hit = match params.rule {
                DirectRule::Proof => {
                    let th = params.threshold(norms[s]);
                    (d[n].norm() >= th && d[n + 1].norm() >= th).then_some(d[n])
                }
                DirectRule::Pseudocode => {
                    let drift = params.drift(norms[s]);
                    let hi = params.k * drift + params.floor;
                    let lo = drift + params.floor;
                    (d[n].norm() >= hi && d[n + 1].norm() < lo).then_some(-d[n])
                }
            };
            if let Some(v) = hit {
                coeffs[s] = v;
                fired = true;
            }
        }
        if !fired {
            continue;
        }
        let lo = match params.rule {
            DirectRule::Proof => beta * T::of_usize(n + 1),
            DirectRule::Pseudocode => beta * T::of_usize(n),
        };
        let event = DetectionEvent { t_est: lo + half * beta, interval: (lo, lo + beta), coeffs, shape: None };
        match events.last() {
            Some(prev) if event.t_est - prev.t_est < gamma * half => {}
            _ => events.push(event),
        }
    }
    Ok(events)
}

/// `(K+1)CLβ²‖g‖ + 4(K+1)σ + D(β)R‖f‖`.
pub fn coefficient_error_bound<T: Real>(params: &DirectDetectorParams<T>, g_norm: T, f_norm: T, d_beta: T, r: T) -> T {
    crate::bounds::direct_coeff_bound(params.k, params.c, params.l, params.beta, g_norm, params.sigma, d_beta, r, f_norm)
}

/// CSV with header `event_idx,t_est,sampler_id,re,im`.
pub fn write_events_csv<T: Real, W: Write>(events: &[DetectionEvent<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "event_idx,t_est,sampler_id,re,im")?;
    for (i, e) in events.iter().enumerate() {
        for (s, c) in e.coeffs.iter().enumerate() {
            writeln!(w, "{i},{},{s},{},{}", e.t_est, c.re, c.im)?;
        }
    }
    Ok(())
}
