//! Forward model: mild solutions of `u̇ = Au + f + η` and the two kinds of
//! noisy measurements taken from them.
//!
//! Point measurements use the left limit `u(nβ⁻)`, so a burst landing
//! exactly on a sampling instant is seen by the following interval.

use std::cmp::Ordering;
use std::io::{self, Write};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Direction, Semigroup, SemigroupKind};
use crate::error::{Error, Result};
use crate::forcing::{BackgroundSource, BurstTrain};
use crate::hilbert::{weighted_dot, GridFunction, SpatialGrid};
use crate::scalar::Real;

/// Default number of Simpson subintervals per `β`.
pub const DEFAULT_STEPS_PER_BETA: usize = 128;

/// Which one-sided limit of `u` to evaluate at a time where a burst may sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Everything needed to simulate one experiment.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub semigroup: Semigroup<T>,
    pub u0: GridFunction<T>,
    pub bursts: BurstTrain<T>,
    pub background: BackgroundSource<T>,
    pub samplers: Vec<GridFunction<T>>,
    pub beta: T,
    pub sigma: T,
    pub seed: u64,
    /// Simpson subintervals per `β`; even and at least 64.
    pub steps_per_beta: usize,
}

impl<T: Real> Scenario<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        semigroup: Semigroup<T>,
        u0: GridFunction<T>,
        bursts: BurstTrain<T>,
        background: BackgroundSource<T>,
        samplers: Vec<GridFunction<T>>,
        beta: T,
        sigma: T,
        seed: u64,
    ) -> Result<Self> {
        let sc = Self {
            semigroup,
            u0,
            bursts,
            background,
            samplers,
            beta,
            sigma,
            seed,
            steps_per_beta: DEFAULT_STEPS_PER_BETA,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_steps_per_beta(mut self, steps: usize) -> Result<Self> {
        self.steps_per_beta = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        self.semigroup.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid();
        if self.u0.grid() != grid {
            return Err(Error::GridMismatch("initial state is not on the semigroup grid".into()));
        }
        if let Some(b) = self.bursts.bursts().first() {
            if b.shape.grid() != grid {
                return Err(Error::GridMismatch("burst shapes are not on the semigroup grid".into()));
            }
        }
        if self.samplers.is_empty() {
            return Err(Error::Domain("at least one sampler is required".into()));
        }
        if self.samplers.iter().any(|g| g.grid() != grid) {
            return Err(Error::GridMismatch("a sampler is not on the semigroup grid".into()));
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(Error::Domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if self.steps_per_beta < 64 || self.steps_per_beta % 2 != 0 {
            return Err(Error::Domain(format!(
                "steps_per_beta must be even and at least 64, got {}",
                self.steps_per_beta
            )));
        }
        Ok(())
    }

    /// `β < γ/3`.
    pub fn check_direct_admissible(&self) -> Result<()> {
        let gamma = self.bursts.gamma();
        if self.beta * T::of(3.0) < gamma {
            Ok(())
        } else {
            Err(Error::Domain(format!("beta = {} violates beta < gamma/3 with gamma = {gamma}", self.beta)))
        }
    }

    /// `β < γ/6` and `Lβ < 1`.
    pub fn check_prony_admissible(&self) -> Result<()> {
        let gamma = self.bursts.gamma();
        if !(self.beta * T::of(6.0) < gamma) {
            return Err(Error::Domain(format!("beta = {} violates beta < gamma/6 with gamma = {gamma}", self.beta)));
        }
        let lb = self.background.lipschitz() * self.beta;
        if !(lb < T::one()) {
            return Err(Error::Domain(format!("L*beta = {lb} must be below 1")));
        }
        Ok(())
    }

    fn step(&self) -> T {
        self.beta / T::of_usize(self.steps_per_beta)
    }

    /// Right-continuous mild solution `u(t)`, bursts at `t_j ≤ t` included.
    pub fn mild_solution(&self, t: T) -> Result<GridFunction<T>> {
        self.mild_solution_side(t, Side::Right)
    }

    /// Left limit `u(t⁻)`, bursts at `t_j < t` only.
    pub fn mild_solution_left(&self, t: T) -> Result<GridFunction<T>> {
        self.mild_solution_side(t, Side::Left)
    }

    fn mild_solution_side(&self, t: T, side: Side) -> Result<GridFunction<T>> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let sg = &self.semigroup;
        let mut u = sg.apply(t, &self.u0)?.into_values();
        let mut breaks = vec![T::zero()];
        for b in self.bursts.bursts() {
            if b.time < t || (b.time == t && side == Side::Right) {
                let moved = sg.apply(t - b.time, &b.shape)?;
                u.iter_mut().zip(moved.values()).for_each(|(a, &v)| *a += v);
            }
            if b.time > T::zero() && b.time < t {
                breaks.push(b.time);
            }
        }
        breaks.push(t);
        if !self.background.is_zero() {
            let grid = *self.grid();
            let nodes: Vec<T> = grid.nodes().collect();
            let mut eta = vec![Complex::new(T::zero(), T::zero()); nodes.len()];
            for w in breaks.windows(2) {
                let len = w[1] - w[0];
                if len <= T::zero() {
                    continue;
                }
                let n = simpson_intervals(len, self.step());
                let dt = len / T::of_usize(n);
                for i in 0..=n {
                    let tau = if i == n { w[1] } else { w[0] + dt * T::of_usize(i) };
                    let weight = simpson_weight::<T>(i, n) * dt / T::of(3.0);
                    self.background.eval_into(tau, &grid, &nodes, &mut eta);
                    sg.evolve_in_place(t - tau, &mut eta, Direction::Forward)?;
                    u.iter_mut().zip(&eta).for_each(|(a, &v)| *a += v.scale(weight));
                }
            }
        }
        Ok(GridFunction::from_values_unchecked(*self.grid(), u))
    }
}

/// Smallest even number of Simpson subintervals with step at most `max_step`.
fn simpson_intervals<T: Real>(len: T, max_step: T) -> usize {
    let n = (len / max_step).ceil().to_usize().unwrap_or(2).max(2);
    n + n % 2
}

fn simpson_weight<T: Real>(i: usize, n: usize) -> T {
    if i == 0 || i == n {
        T::one()
    } else if i % 2 == 1 {
        T::of(4.0)
    } else {
        T::of(2.0)
    }
}

fn key_cmp<T: Real>(a: &(T, Side), b: &(T, Side)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// Marches `u` forward through an increasing sequence of `(time, side)`
/// requests, one Simpson panel per substep for the Duhamel term.
struct Propagator<'a, T: Real> {
    sc: &'a Scenario<T>,
    nodes: Vec<T>,
    state: Vec<Complex<T>>,
    time: T,
    side: Side,
    next_burst: usize,
    max_step: T,
    cache: Vec<(T, Vec<T>)>,
    eta_start: Vec<Complex<T>>,
    eta_mid: Vec<Complex<T>>,
    eta_end: Vec<Complex<T>>,
    eta_start_time: Option<T>,
}

impl<'a, T: Real> Propagator<'a, T> {
    fn new(sc: &'a Scenario<T>) -> Self {
        let nodes: Vec<T> = sc.grid().nodes().collect();
        let zero = vec![Complex::new(T::zero(), T::zero()); nodes.len()];
        Self {
            sc,
            state: sc.u0.values().to_vec(),
            nodes,
            time: T::zero(),
            side: Side::Left,
            next_burst: 0,
            max_step: sc.step(),
            cache: Vec::new(),
            eta_start: zero.clone(),
            eta_mid: zero.clone(),
            eta_end: zero,
            eta_start_time: None,
        }
    }

    fn advance_to(&mut self, t: T, side: Side) -> Result<()> {
        debug_assert!(key_cmp(&(self.time, self.side), &(t, side)) != Ordering::Greater);
        let bursts = self.sc.bursts.bursts();
        while let Some(b) = bursts.get(self.next_burst) {
            if b.time < t || (b.time == t && side == Side::Right) {
                self.flow(b.time)?;
                self.state.iter_mut().zip(b.shape.values()).for_each(|(a, &v)| *a += v);
                self.next_burst += 1;
            } else {
                break;
            }
        }
        self.flow(t)?;
        self.side = side;
        Ok(())
    }

    fn probe(&self, weights: &[T], g: &[Complex<T>]) -> Complex<T> {
        weighted_dot(weights, &self.state, g)
    }

    fn flow(&mut self, to: T) -> Result<()> {
        let d = to - self.time;
        if d <= T::zero() {
            return Ok(());
        }
        if self.sc.background.is_zero() {
            self.evolve(d)?;
        } else {
            let n = (d / self.max_step).ceil().to_usize().unwrap_or(1).max(1);
            let delta = d / T::of_usize(n);
            let start = self.time;
            for i in 0..n {
                let s = start + delta * T::of_usize(i);
                let e = if i + 1 == n { to } else { start + delta * T::of_usize(i + 1) };
                self.substep(s, e)?;
            }
        }
        self.time = to;
        Ok(())
    }

    /// `u ← T(δ)u + (δ/6)[T(δ)η(s) + 4T(δ/2)η(s+δ/2) + η(e)]`.
    fn substep(&mut self, s: T, e: T) -> Result<()> {
        let delta = e - s;
        let half = delta / T::of(2.0);
        let grid = *self.sc.grid();
        let bg = &self.sc.background;
        if self.eta_start_time != Some(s) {
            bg.eval_into(s, &grid, &self.nodes, &mut self.eta_start);
        }
        bg.eval_into(s + half, &grid, &self.nodes, &mut self.eta_mid);
        bg.eval_into(e, &grid, &self.nodes, &mut self.eta_end);
        let c = delta / T::of(6.0);
        let c4 = c * T::of(4.0);
        match self.sc.semigroup.kind() {
            SemigroupKind::Multiplication { .. } => {
                let full = factors(&mut self.cache, &self.sc.semigroup, delta).to_vec();
                let halfs = factors(&mut self.cache, &self.sc.semigroup, half);
                for i in 0..self.state.len() {
                    self.state[i] = (self.state[i] + self.eta_start[i].scale(c)).scale(full[i])
                        + self.eta_mid[i].scale(c4 * halfs[i])
                        + self.eta_end[i].scale(c);
                }
            }
            SemigroupKind::Translation => {
                for (u, &v) in self.state.iter_mut().zip(&self.eta_start) {
                    *u += v.scale(c);
                }
                self.sc.semigroup.evolve_in_place(delta, &mut self.state, Direction::Forward)?;
                self.sc.semigroup.evolve_in_place(half, &mut self.eta_mid, Direction::Forward)?;
                for i in 0..self.state.len() {
                    self.state[i] += self.eta_mid[i].scale(c4) + self.eta_end[i].scale(c);
                }
            }
        }
        std::mem::swap(&mut self.eta_start, &mut self.eta_end);
        self.eta_start_time = Some(e);
        Ok(())
    }

    fn evolve(&mut self, d: T) -> Result<()> {
        match self.sc.semigroup.kind() {
            SemigroupKind::Multiplication { .. } => {
                let f = factors(&mut self.cache, &self.sc.semigroup, d);
                self.state.iter_mut().zip(f).for_each(|(u, &m)| *u = u.scale(m));
                Ok(())
            }
            SemigroupKind::Translation => self.sc.semigroup.evolve_in_place(d, &mut self.state, Direction::Forward),
        }
    }
}

/// Cached nodal factors `e^{d·a(x)}`; step lengths equal to within a few
/// ulps share an entry.
fn factors<'c, T: Real>(cache: &'c mut Vec<(T, Vec<T>)>, sg: &Semigroup<T>, d: T) -> &'c [T] {
    let tol = d * T::epsilon() * T::of(64.0);
    if let Some(pos) = cache.iter().position(|(k, _)| (*k - d).abs() <= tol) {
        return &cache[pos].1;
    }
    if cache.len() >= 8 {
        cache.remove(0);
    }
    cache.push((d, sg.multipliers(d).expect("multiplication semigroup")));
    &cache.last().expect("just pushed").1
}

/// Uniform draw on `[−σ, σ]`; no draw is consumed when `σ = 0`.
fn draw<T: Real>(rng: &mut ChaCha8Rng, sigma: T) -> T {
    if sigma == T::zero() {
        T::zero()
    } else {
        let s = sigma.to_f64_lossy();
        T::of(rng.gen_range(-s..=s)).max(-sigma).min(sigma)
    }
}

const DIRECT_STREAM: u64 = 1;
const FOURIER_STREAM: u64 = 2;

fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Paired point measurements `m_n(g) = ⟨u(nβ), g⟩ + ν` and
/// `m_n(T*(β)g) = ⟨u(nβ), T*(β)g⟩ + ν′`, indexed `[sampler][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectMeasurements<T> {
    pub beta: T,
    pub m: Vec<Vec<Complex<T>>>,
    pub mp: Vec<Vec<Complex<T>>>,
}

impl<T: Real> DirectMeasurements<T> {
    pub fn n_max(&self) -> usize {
        self.m.first().map_or(0, |s| s.len().saturating_sub(1))
    }

    pub fn samplers(&self) -> usize {
        self.m.len()
    }

    /// CSV with header `sampler_id,series,n,re,im`; `series` is `m` or `mp`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sampler_id,series,n,re,im")?;
        for (s, (m, mp)) in self.m.iter().zip(&self.mp).enumerate() {
            for (name, series) in [("m", m), ("mp", mp)] {
                for (n, v) in series.iter().enumerate() {
                    writeln!(w, "{s},{name},{n},{},{}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Windowed Fourier measurements `m̂_{kℓ}(g)` for `k ∈ {0,1,2}`,
/// `ℓ = 1..=ell_max`, indexed `[sampler][k][ℓ−1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMeasurements<T> {
    pub beta: T,
    pub mhat: Vec<[Vec<Complex<T>>; 3]>,
}

impl<T: Real> FourierMeasurements<T> {
    pub fn ell_max(&self) -> usize {
        self.mhat.first().map_or(0, |s| s[0].len())
    }

    pub fn samplers(&self) -> usize {
        self.mhat.len()
    }

    /// `m̂_{kℓ}` of sampler `s`.
    pub fn get(&self, s: usize, k: usize, ell: usize) -> Result<Complex<T>> {
        if s >= self.samplers() || k > 2 || ell == 0 || ell > self.ell_max() {
            return Err(Error::Index(format!(
                "no measurement for sampler {s}, k = {k}, ell = {ell} (ell_max = {})",
                self.ell_max()
            )));
        }
        Ok(self.mhat[s][k][ell - 1])
    }

    /// CSV with header `sampler_id,k,ell,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sampler_id,k,ell,re,im")?;
        for (s, per_k) in self.mhat.iter().enumerate() {
            for (k, row) in per_k.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    writeln!(w, "{s},{k},{},{},{}", l + 1, v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Noise-free measurements and the realized noise, kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<M> {
    pub clean: M,
    pub noise: M,
}

/// Noisy point measurements for `n = 0..=n_max`.
pub fn direct_measurements<T: Real>(sc: &Scenario<T>, n_max: usize) -> Result<DirectMeasurements<T>> {
    let Split { clean, noise } = direct_measurements_split(sc, n_max)?;
    let add = |a: Vec<Vec<Complex<T>>>, b: &[Vec<Complex<T>>]| -> Vec<Vec<Complex<T>>> {
        a.into_iter().zip(b).map(|(x, y)| x.into_iter().zip(y).map(|(p, &q)| p + q).collect()).collect()
    };
    Ok(DirectMeasurements { beta: sc.beta, m: add(clean.m, &noise.m), mp: add(clean.mp, &noise.mp) })
}

pub fn direct_measurements_split<T: Real>(sc: &Scenario<T>, n_max: usize) -> Result<Split<DirectMeasurements<T>>> {
    sc.validate()?;
    if n_max < 4 {
        return Err(Error::Domain(format!("n_max must be at least 4, got {n_max}")));
    }
    let weights = sc.grid().weights();
    let predicted: Vec<GridFunction<T>> =
        sc.samplers.iter().map(|g| sc.semigroup.apply_adjoint(sc.beta, g)).collect::<Result<_>>()?;
    let s_count = sc.samplers.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut clean = DirectMeasurements { beta: sc.beta, m: vec![vec![zero; n_max + 1]; s_count], mp: vec![vec![zero; n_max + 1]; s_count] };
    let mut noise = clean.clone();
    let mut prop = Propagator::new(sc);
    let mut rng = noise_rng(sc.seed, DIRECT_STREAM);
    for n in 0..=n_max {
        prop.advance_to(sc.beta * T::of_usize(n), Side::Left)?;
        for s in 0..s_count {
            clean.m[s][n] = prop.probe(&weights, sc.samplers[s].values());
            clean.mp[s][n] = prop.probe(&weights, predicted[s].values());
            noise.m[s][n] = Complex::new(draw(&mut rng, sc.sigma), T::zero());
            noise.mp[s][n] = Complex::new(draw(&mut rng, sc.sigma), T::zero());
        }
    }
    Ok(Split { clean, noise })
}

/// One Simpson panel `[lo, hi]` of a window integral; `u` is read at
/// `lo⁺`, `mid` and `hi⁻`.
#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    lo: T,
    mid: T,
    hi: T,
}

impl<T: Real> Panel<T> {
    fn keys(&self) -> [(T, Side); 3] {
        [(self.lo, Side::Right), (self.mid, Side::Left), (self.hi, Side::Left)]
    }
}

/// Panels covering `[(ℓ−1)β, (ℓ+1)β]`, each of width `2β/N`, split at every
/// burst inside.
fn window_panels<T: Real>(sc: &Scenario<T>, ell: usize, times: &[T], out: &mut Vec<Panel<T>>) {
    out.clear();
    let half = sc.step();
    let per_beta = sc.steps_per_beta / 2;
    let node_time = |j: usize| half * T::of_usize(j);
    let mut cuts: Vec<T> = Vec::new();
    for p in (ell - 1) * per_beta..(ell + 1) * per_beta {
        let a = node_time(2 * p);
        let b = node_time(2 * p + 2);
        cuts.clear();
        cuts.push(a);
        cuts.extend(times.iter().copied().filter(|&t| t > a && t < b));
        cuts.push(b);
        if cuts.len() == 2 {
            out.push(Panel { lo: a, mid: node_time(2 * p + 1), hi: b });
        } else {
            for w in cuts.windows(2) {
                out.push(Panel { lo: w[0], mid: w[0] + (w[1] - w[0]) / T::of(2.0), hi: w[1] });
            }
        }
    }
}

/// Weights `∫ L_j(t) e^{−iθ(t−mid)/h} dt` of the quadratic interpolant on a
/// panel of half-width `h`, in units of `h`; series in `θ` (the panels keep
/// `|θ| < 0.1`).
fn filon_weights<T: Real>(theta: T) -> [Complex<T>; 3] {
    // μ_p = ∫_{−1}^{1} s^p e^{−iθs} ds for p = 0, 1, 2.
    let mut mu = [Complex::new(T::zero(), T::zero()); 3];
    let mut term = Complex::new(T::one(), T::zero());
    let minus_i_theta = Complex::new(T::zero(), -theta);
    for n in 0..24usize {
        if n > 0 {
            term = term * minus_i_theta / T::of_usize(n);
        }
        for (p, m) in mu.iter_mut().enumerate() {
            if (p + n) % 2 == 0 {
                *m += term.scale(T::of(2.0) / T::of_usize(p + n + 1));
            }
        }
    }
    let two = T::of(2.0);
    [(mu[2] - mu[1]) / two, mu[0] - mu[2], (mu[2] + mu[1]) / two]
}

/// Noisy windowed Fourier measurements for `ℓ = 1..=ell_max`.
pub fn fourier_measurements<T: Real>(sc: &Scenario<T>, ell_max: usize) -> Result<FourierMeasurements<T>> {
    let Split { clean, noise } = fourier_measurements_split(sc, ell_max)?;
    let mhat = clean
        .mhat
        .into_iter()
        .zip(&noise.mhat)
        .map(|(c, n)| {
            let mut out = c;
            for k in 0..3 {
                out[k].iter_mut().zip(&n[k]).for_each(|(a, &b)| *a += b);
            }
            out
        })
        .collect();
    Ok(FourierMeasurements { beta: sc.beta, mhat })
}

/// Clean part: the oscillatory factor is integrated exactly against the
/// quadratic interpolant of `⟨u, g⟩` and `⟨u, A*g⟩` on each panel.
/// Noise part: plain Simpson, so the realized `|ν_kℓ|` never exceeds
/// `2(πk + β)σ`.
pub fn fourier_measurements_split<T: Real>(
    sc: &Scenario<T>,
    ell_max: usize,
) -> Result<Split<FourierMeasurements<T>>> {
    sc.validate()?;
    if ell_max < 6 {
        return Err(Error::Domain(format!("ell_max must be at least 6, got {ell_max}")));
    }
    let generator: Vec<GridFunction<T>> =
        sc.samplers.iter().map(|g| sc.semigroup.apply_generator_adjoint(g)).collect::<Result<_>>()?;
    let times = sc.bursts.times();
    // Away from burst instants both one-sided limits coincide; collapse them
    // so shared nodes are evaluated once.
    let canonical = |(t, side): (T, Side)| if times.contains(&t) { (t, side) } else { (t, Side::Left) };

    let mut panels = Vec::new();
    let mut requests: Vec<(T, Side)> = Vec::new();
    for ell in 1..=ell_max {
        window_panels(sc, ell, &times, &mut panels);
        requests.extend(panels.iter().flat_map(|p| p.keys()).map(canonical));
    }
    requests.sort_by(key_cmp);
    requests.dedup();

    // Pointwise noise processes ν(t, g) and ν(t, A*g), one value per distinct time.
    let s_count = sc.samplers.len();
    let mut rng = noise_rng(sc.seed, FOURIER_STREAM);
    let mut noise_at: Vec<T> = Vec::with_capacity(requests.len() * 2 * s_count);
    let mut noise_index = Vec::with_capacity(requests.len());
    for (i, r) in requests.iter().enumerate() {
        if i > 0 && requests[i - 1].0 == r.0 {
            noise_index.push(noise_index[i - 1]);
            continue;
        }
        noise_index.push(noise_at.len() / (2 * s_count));
        for _ in 0..2 * s_count {
            noise_at.push(draw(&mut rng, sc.sigma));
        }
    }

    let weights = sc.grid().weights();
    let mut values: Vec<Complex<T>> = Vec::with_capacity(requests.len() * 2 * s_count);
    let mut prop = Propagator::new(sc);
    for &(t, side) in &requests {
        prop.advance_to(t, side)?;
        for s in 0..s_count {
            values.push(prop.probe(&weights, sc.samplers[s].values()));
            values.push(prop.probe(&weights, generator[s].values()));
        }
    }

    let zero = Complex::new(T::zero(), T::zero());
    let empty = || [vec![zero; ell_max], vec![zero; ell_max], vec![zero; ell_max]];
    let mut clean = FourierMeasurements { beta: sc.beta, mhat: (0..s_count).map(|_| empty()).collect() };
    let mut noise = clean.clone();
    let pi = T::PI();
    let four = T::of(4.0);
    for ell in 1..=ell_max {
        window_panels(sc, ell, &times, &mut panels);
        let origin = sc.beta * T::of_usize(ell - 1);
        for panel in &panels {
            let h = (panel.hi - panel.lo) / T::of(2.0);
            let rows: Vec<usize> = panel
                .keys()
                .iter()
                .map(|&key| {
                    let key = canonical(key);
                    requests.binary_search_by(|p| key_cmp(p, &key)).expect("node was requested")
                })
                .collect();
            let simpson = [h / T::of(3.0), h * four / T::of(3.0), h / T::of(3.0)];
            let node_times = [panel.lo, panel.mid, panel.hi];
            for k in 0..3 {
                let omega = pi * T::of_usize(k) / sc.beta;
                let i_omega = Complex::new(T::zero(), omega);
                // e^{−iωt} = (−1)^{k(ℓ−1)} e^{−iω(t − (ℓ−1)β)}
                let sign = if (k * (ell - 1)) % 2 == 1 { -T::one() } else { T::one() };
                let centre = Complex::from_polar(sign * h, -omega * (panel.mid - origin));
                let filon = filon_weights(omega * h).map(|w| w * centre);
                for (j, &r) in rows.iter().enumerate() {
                    let base = r * 2 * s_count;
                    let nbase = noise_index[r] * 2 * s_count;
                    let phase = Complex::from_polar(sign * simpson[j], -omega * (node_times[j] - origin));
                    for s in 0..s_count {
                        let (vg, vag) = (values[base + 2 * s], values[base + 2 * s + 1]);
                        let (ng, nag) = (noise_at[nbase + 2 * s], noise_at[nbase + 2 * s + 1]);
                        clean.mhat[s][k][ell - 1] += filon[j] * (i_omega * vg - vag);
                        noise.mhat[s][k][ell - 1] += phase * (i_omega.scale(ng) - Complex::new(nag, T::zero()));
                    }
                }
            }
        }
    }
    Ok(Split { clean, noise })
}
