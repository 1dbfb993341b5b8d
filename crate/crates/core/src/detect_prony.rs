//! Burst recovery from windowed Fourier measurements (Prony-type).
//!
//! On window `ℓ` a single burst `(t_*, f_*)` contributes
//! `e^{−iπkt_*/β}(1 + (−1)^ℓ e^{−iπt_*/β})⟨f_*, g⟩` to `Γ_kℓ`, so the ratio
//! `Δ_1ℓ/Δ_0ℓ` recovers `e^{−iπt_*/β}` and a second ratio the coefficient.

use std::io::{self, Write};

use num_complex::Complex;

use crate::bounds::sigma_tilde;
use crate::detect_direct::DEFAULT_FLOOR;
use crate::error::{Error, Result};
use crate::hilbert::GridFunction;
use crate::scalar::Real;
use crate::sensing::{FourierMeasurements, Scenario};

/// Detection threshold `Q(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    /// `(64/π)β‖g‖ + 16·max{σ̃, √σ̃}`, the value the error theorem is stated for.
    #[default]
    Theorem,
    /// `(64/π)Lβ²‖g‖ + 16σ̃`, the smallest value that still rejects every
    /// burst-free window.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PronyDetectorParams<T> {
    pub beta: T,
    pub sigma_tilde: T,
    pub l: T,
    pub rule: ThresholdRule,
    pub floor: T,
}

impl<T: Real> PronyDetectorParams<T> {
    pub fn new(beta: T, sigma_tilde: T, l: T, rule: ThresholdRule) -> Result<Self> {
        if !(beta > T::zero()) || !(sigma_tilde >= T::zero()) || !(l >= T::zero()) {
            return Err(Error::Domain("need beta > 0, sigma_tilde >= 0, L >= 0".into()));
        }
        if !(l * beta < T::one()) {
            return Err(Error::Domain(format!("L*beta = {} must be below 1", l * beta)));
        }
        Ok(Self { beta, sigma_tilde, l, rule, floor: T::of(DEFAULT_FLOOR) })
    }

    pub fn from_scenario(sc: &Scenario<T>, rule: ThresholdRule) -> Result<Self> {
        Self::new(sc.beta, sigma_tilde(sc.sigma, sc.beta), sc.background.lipschitz(), rule)
    }

    /// `Q(g)` plus the floor.
    pub fn threshold(&self, g_norm: T) -> T {
        let c = T::of(64.0) / T::PI();
        let st = self.sigma_tilde;
        let q = match self.rule {
            ThresholdRule::Theorem => c * self.beta * g_norm + T::of(16.0) * st.max(st.sqrt()),
            ThresholdRule::LowerBound => c * self.l * self.beta * self.beta * g_norm + T::of(16.0) * st,
        };
        q + self.floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(ell: usize) -> Self {
        if ell % 2 == 0 {
            Self::Even
        } else {
            Self::Odd
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PronyEvent<T> {
    pub t_est: T,
    /// Window `[(ℓ−1)β, (ℓ+1)β]` the burst was attributed to.
    pub window_ell: usize,
    pub parity: Parity,
    /// `𝔣(g)` per sampler, zero for samplers that were not accepted.
    pub coeffs: Vec<Complex<T>>,
    /// `(sampler, t(g))` for every accepted sampler.
    pub accepted_t: Vec<(usize, T)>,
}

impl<T: Real> PronyEvent<T> {
    pub fn accepted(&self) -> usize {
        self.accepted_t.len()
    }
}

fn sign_pow<T: Real>(ell: usize) -> T {
    if ell % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `Γ_kℓ = m̂_kℓ + (−1)^ℓ m̂_(k+1)ℓ` for `k ∈ {0, 1}`.
pub fn gamma_kl<T: Real>(meas: &FourierMeasurements<T>, sampler: usize, k: usize, ell: usize) -> Result<Complex<T>> {
    if k > 1 {
        return Err(Error::Index(format!("k must be 0 or 1, got {k}")));
    }
    Ok(meas.get(sampler, k, ell)? + meas.get(sampler, k + 1, ell)?.scale(sign_pow(ell)))
}

/// `Δ_kℓ = Γ_kℓ − Γ_k(ℓ+2)`.
pub fn delta_kl<T: Real>(meas: &FourierMeasurements<T>, sampler: usize, k: usize, ell: usize) -> Result<Complex<T>> {
    Ok(gamma_kl(meas, sampler, k, ell)? - gamma_kl(meas, sampler, k, ell + 2)?)
}

/// Principal argument in `(−π, π]`.
fn arg<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a <= -T::PI() {
        T::PI()
    } else {
        a
    }
}

/// `t(g)` for a burst attributed to the window centred at `centre·β`,
/// estimated from `Δ_·j` (`j` and `centre` share parity).
pub fn burst_time<T: Real>(d0: Complex<T>, d1: Complex<T>, j: usize, centre: usize, beta: T) -> T {
    let shift = -beta / T::PI() * arg(d1 / d0);
    let base = beta * T::of_usize(centre) + shift;
    if j % 2 == 1 {
        let s = if shift > T::zero() {
            T::one()
        } else if shift < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        base - beta * s
    } else {
        base
    }
}

/// `|1 + (−1)^j·u|` with `u = (Δ_1/Δ_0)/|Δ_1/Δ_0|`; equals
/// `2|cos(π(t(g) − centre)/2β)|`, so it is at least one exactly inside the
/// acceptance band `|t(g) − centre| ≤ 2β/3`.
pub fn unit_modulus_margin<T: Real>(d0: Complex<T>, d1: Complex<T>, j: usize) -> T {
    let z = d1 / d0;
    let u = z.unscale(z.norm());
    (Complex::new(T::one(), T::zero()) + u.scale(sign_pow(j))).norm()
}

struct Channel<T> {
    d0: Vec<Complex<T>>,
    d1: Vec<Complex<T>>,
    q: T,
}

impl<T: Real> Channel<T> {
    /// Whether `Δ_·j` clears `Q(g)` on all three quantities (`j` relative to
    /// the first window of the block).
    fn fires(&self, j: usize, abs_j: usize) -> bool {
        let (a, b) = (self.d0[j], self.d1[j]);
        let c = a + b.scale(sign_pow(abs_j));
        a.norm() >= self.q && b.norm() >= self.q && c.norm() >= self.q
    }
}

fn check_block<T: Real>(meas: &FourierMeasurements<T>, samplers: &[GridFunction<T>], ell: usize) -> Result<()> {
    if samplers.len() != meas.samplers() {
        return Err(Error::Domain(format!(
            "{} samplers given for {} measured channels",
            samplers.len(),
            meas.samplers()
        )));
    }
    if ell == 0 || ell + 5 > meas.ell_max() {
        return Err(Error::Domain(format!(
            "windows {ell}..={} are not all measured (ell_max = {})",
            ell + 5,
            meas.ell_max()
        )));
    }
    Ok(())
}

/// Every event the block of windows `ℓ..ℓ+5` supports: one per interlaced
/// tuple at most.
fn block_candidates<T: Real>(
    meas: &FourierMeasurements<T>,
    params: &PronyDetectorParams<T>,
    samplers: &[GridFunction<T>],
    ell: usize,
) -> Result<Vec<PronyEvent<T>>> {
    check_block(meas, samplers, ell)?;
    let channels: Vec<Channel<T>> = samplers
        .iter()
        .enumerate()
        .map(|(s, g)| {
            let d0 = (0..4).map(|j| delta_kl(meas, s, 0, ell + j)).collect::<Result<Vec<_>>>()?;
            let d1 = (0..4).map(|j| delta_kl(meas, s, 1, ell + j)).collect::<Result<Vec<_>>>()?;
            Ok(Channel { d0, d1, q: params.threshold(g.norm()) })
        })
        .collect::<Result<_>>()?;
    let detects = |j: usize| channels.iter().any(|c| c.fires(j, ell + j));
    let band = params.beta * T::of(2.0) / T::of(3.0);
    let zero = Complex::new(T::zero(), T::zero());

    let mut out = Vec::new();
    for j in 0..2 {
        if !detects(j) {
            continue;
        }
        // Both Δ_j and Δ_(j+2) fire: the burst sits in window j+2.
        let later = detects(j + 2);
        let abs_j = ell + j;
        let centre = if later { abs_j + 2 } else { abs_j };
        let sign = if later { -T::one() } else { T::one() };
        let mut coeffs = vec![zero; samplers.len()];
        let mut accepted_t = Vec::new();
        for (s, c) in channels.iter().enumerate() {
            if !c.fires(j, abs_j) {
                continue;
            }
            let (d0, d1) = (c.d0[j], c.d1[j]);
            let t = burst_time(d0, d1, abs_j, centre, params.beta);
            if (t - params.beta * T::of_usize(centre)).abs() <= band {
                coeffs[s] = (d0 * d0 / (d0 + d1.scale(sign_pow(abs_j)))).scale(sign);
                accepted_t.push((s, t));
            }
        }
        if accepted_t.is_empty() {
            continue;
        }
        let t_est = accepted_t.iter().fold(T::zero(), |acc, &(_, t)| acc + t) / T::of_usize(accepted_t.len());
        out.push(PronyEvent { t_est, window_ell: centre, parity: Parity::of(centre), coeffs, accepted_t });
    }
    Ok(out)
}

/// Looks for a burst using windows `ℓ..ℓ+5`; when both interlaced tuples
/// report one, the candidate with more accepting samplers wins (ties go to
/// the earlier window).
pub fn detect_window<T: Real>(
    meas: &FourierMeasurements<T>,
    params: &PronyDetectorParams<T>,
    samplers: &[GridFunction<T>],
    ell: usize,
) -> Result<Option<PronyEvent<T>>> {
    let mut best: Option<PronyEvent<T>> = None;
    for c in block_candidates(meas, params, samplers, ell)? {
        best = match best {
            Some(b) if prefer(&b, &c) => Some(b),
            _ => Some(c),
        };
    }
    Ok(best)
}

/// Whether `a` should be kept over `b`.
fn prefer<T: Real>(a: &PronyEvent<T>, b: &PronyEvent<T>) -> bool {
    a.accepted() > b.accepted() || (a.accepted() == b.accepted() && a.window_ell <= b.window_ell)
}

/// Slides blocks `ℓ = 1, 5, 9, …` over the record and merges events closer
/// than `γ/2`.
pub fn detect_all<T: Real>(
    meas: &FourierMeasurements<T>,
    params: &PronyDetectorParams<T>,
    samplers: &[GridFunction<T>],
    gamma: T,
) -> Result<Vec<PronyEvent<T>>> {
    check_block(meas, samplers, 1)?;
    let mut raw = Vec::new();
    let mut ell = 1;
    while ell + 5 <= meas.ell_max() {
        raw.extend(block_candidates(meas, params, samplers, ell)?);
        ell += 4;
    }
    raw.sort_by(|a, b| a.t_est.partial_cmp(&b.t_est).expect("finite times").then(a.window_ell.cmp(&b.window_ell)));
    let radius = gamma / T::of(2.0);
    let mut merged: Vec<PronyEvent<T>> = Vec::new();
    for e in raw {
        match merged.last_mut() {
            Some(prev) if e.t_est - prev.t_est < radius => {
                if !prefer(prev, &e) {
                    *prev = e;
                }
            }
            _ => merged.push(e),
        }
    }
    Ok(merged)
}

/// Result of the noiseless single-window solver.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiselessEstimate<T> {
    pub t_star: T,
    pub coeffs: Vec<Complex<T>>,
}

/// Exact solver for the first window `(0, 2β)` when `η ≡ 0` and there is no
/// noise. Samplers for which `Γ_11` or `Γ_01 − Γ_11` vanishes (to `1e−12`)
/// report nothing; `None` if no sampler is usable.
pub fn detect_noiseless<T: Real>(meas: &FourierMeasurements<T>) -> Result<Option<NoiselessEstimate<T>>> {
    let tol = T::of(1e-12);
    let beta = meas.beta;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); meas.samplers()];
    let mut times = Vec::new();
    for (s, c) in coeffs.iter_mut().enumerate() {
        let m1 = meas.get(s, 1, 1)?;
        let g0 = meas.get(s, 0, 1)? - m1;
        let g1 = m1 - meas.get(s, 2, 1)?;
        let diff = g0 - g1;
        if diff.norm().min(g1.norm()) <= tol {
            continue;
        }
        let a = arg(g0 / g1);
        // arg ∈ (−π, π] covers t ∈ (−β, β]; the window is (0, 2β).
        let a = if a <= T::zero() { a + T::of(2.0) * T::PI() } else { a };
        times.push(beta / T::PI() * a);
        *c = g0 * g0 / diff;
    }
    if times.is_empty() {
        return Ok(None);
    }
    let t_star = times.iter().fold(T::zero(), |acc, &t| acc + t) / T::of_usize(times.len());
    Ok(Some(NoiselessEstimate { t_star, coeffs }))
}

/// CSV with header `event_idx,t_est,sampler_id,re,im,window_ell,n_accepted_samplers`.
pub fn write_events_csv<T: Real, W: Write>(events: &[PronyEvent<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "event_idx,t_est,sampler_id,re,im,window_ell,n_accepted_samplers")?;
    for (i, e) in events.iter().enumerate() {
        for (s, c) in e.coeffs.iter().enumerate() {
            writeln!(w, "{i},{},{s},{},{},{},{}", e.t_est, c.re, c.im, e.window_ell, e.accepted())?;
        }
    }
    Ok(())
}
