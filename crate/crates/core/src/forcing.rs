//! The unknown forcing `F = f + η`: a train of instantaneous bursts and a
//! Lipschitz-in-time background source.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, SpatialGrid};
use crate::scalar::Real;

/// One impulse `f_j δ(t − t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst<T> {
    pub time: T,
    pub shape: GridFunction<T>,
}

impl<T: Real> Burst<T> {
    pub fn new(time: T, shape: GridFunction<T>) -> Self {
        Self { time, shape }
    }
}

/// Ordered bursts with a known lower bound `gamma` on their separation.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstTrain<T> {
    bursts: Vec<Burst<T>>,
    gamma: T,
}

impl<T: Real> BurstTrain<T> {
    pub fn new(bursts: Vec<Burst<T>>, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Domain(format!("separation bound must be positive, got {gamma}")));
        }
        for (j, b) in bursts.iter().enumerate() {
            if !(b.time > T::zero()) || !b.time.is_finite() {
                return Err(Error::Domain(format!("burst {j} has non-positive time {}", b.time)));
            }
            if b.shape.norm() == T::zero() {
                return Err(Error::Domain(format!("burst {j} has a zero shape")));
            }
            if b.shape.grid() != bursts[0].shape.grid() {
                return Err(Error::GridMismatch(format!("burst {j} uses a different grid")));
            }
        }
        for (j, w) in bursts.windows(2).enumerate() {
            if !(w[1].time - w[0].time > gamma) {
                return Err(Error::Domain(format!(
                    "bursts {j} and {} are {} apart, not more than gamma = {gamma}",
                    j + 1,
                    w[1].time - w[0].time
                )));
            }
        }
        Ok(Self { bursts, gamma })
    }

    pub fn empty(gamma: T) -> Result<Self> {
        Self::new(Vec::new(), gamma)
    }

    /// Three bursts at `t = 0.25, 1.5, 2.75` with shapes `0.35 sin x`,
    /// `cos x` and `1 + sin x`; `gamma = 1`.
    pub fn fixture(grid: SpatialGrid<T>) -> Self {
        let shapes = fixture_shapes(grid);
        let times = [0.25, 1.5, 2.75];
        let bursts = times.iter().zip(shapes).map(|(&t, f)| Burst::new(T::of(t), f)).collect();
        Self::new(bursts, T::one()).expect("fixture is valid")
    }

    /// Places `count` bursts uniformly at random in `[t_min, t_max]` with
    /// gaps strictly larger than `gamma`, cycling through `shapes`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        count: usize,
        t_min: T,
        t_max: T,
        gamma: T,
        shapes: &[GridFunction<T>],
    ) -> Result<Self> {
        if shapes.is_empty() && count > 0 {
            return Err(Error::Domain("no shapes to place".into()));
        }
        // Spread the free length over count+1 gaps, then add the mandatory spacing.
        let slack = t_max - t_min - gamma * T::of_usize(count.saturating_sub(1)) * T::of(1.000001);
        if count > 0 && !(slack > T::zero()) {
            return Err(Error::Domain("interval too short for the requested bursts".into()));
        }
        let mut cuts: Vec<f64> = (0..count).map(|_| rng.gen::<f64>()).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let bursts = cuts
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let t = t_min + slack * T::of(c) + gamma * T::of(1.000001) * T::of_usize(j);
                Burst::new(t, shapes[j % shapes.len()].clone())
            })
            .collect();
        Self::new(bursts, gamma)
    }

    pub fn bursts(&self) -> &[Burst<T>] {
        &self.bursts
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.bursts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bursts.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.bursts.iter().map(|b| b.time).collect()
    }
}

/// Shapes of the three-burst fixture.
pub fn fixture_shapes<T: Real>(grid: SpatialGrid<T>) -> Vec<GridFunction<T>> {
    vec![
        GridFunction::from_real_fn(grid, |x| T::of(0.35) * x.sin()),
        GridFunction::from_real_fn(grid, |x| x.cos()),
        GridFunction::from_real_fn(grid, |x| T::one() + x.sin()),
    ]
}

type BackgroundFn<T> = dyn Fn(T, &SpatialGrid<T>) -> GridFunction<T> + Send + Sync;

/// Background source `η(t)`.
#[derive(Clone)]
pub enum BackgroundSource<T> {
    /// `η(x, t) = cos(L t x) + C`.
    CosProduct { lipschitz: T, offset: T },
    /// `η(x, t) = x e^{−L t} + C`.
    ExpDecay { lipschitz: T, offset: T },
    /// `η(x, t) = C`.
    Constant { offset: T },
    /// User-supplied pure callback with a declared Lipschitz constant.
    Custom { eval: Arc<BackgroundFn<T>>, declared_lipschitz: T },
}

impl<T: fmt::Debug> fmt::Debug for BackgroundSource<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CosProduct { lipschitz, offset } => {
                f.debug_struct("CosProduct").field("lipschitz", lipschitz).field("offset", offset).finish()
            }
            Self::ExpDecay { lipschitz, offset } => {
                f.debug_struct("ExpDecay").field("lipschitz", lipschitz).field("offset", offset).finish()
            }
            Self::Constant { offset } => f.debug_struct("Constant").field("offset", offset).finish(),
            Self::Custom { declared_lipschitz, .. } => {
                f.debug_struct("Custom").field("declared_lipschitz", declared_lipschitz).finish_non_exhaustive()
            }
        }
    }
}

/// Outcome of an empirical Lipschitz check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport<T> {
    pub empirical: T,
    pub declared: T,
    /// `empirical ≤ 1.05 · declared`.
    pub within_declared: bool,
}

impl<T: Real> BackgroundSource<T> {
    pub fn zero() -> Self {
        Self::Constant { offset: T::zero() }
    }

    pub fn custom(declared_lipschitz: T, eval: impl Fn(T, &SpatialGrid<T>) -> GridFunction<T> + Send + Sync + 'static) -> Self {
        Self::Custom { eval: Arc::new(eval), declared_lipschitz }
    }

    /// Declared Lipschitz constant `L`.
    pub fn lipschitz(&self) -> T {
        match self {
            Self::CosProduct { lipschitz, .. } | Self::ExpDecay { lipschitz, .. } => *lipschitz,
            Self::Constant { .. } => T::zero(),
            Self::Custom { declared_lipschitz, .. } => *declared_lipschitz,
        }
    }

    /// Whether `η ≡ 0`, in which case the Duhamel term vanishes.
    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant { offset } if *offset == T::zero())
    }

    pub fn eval(&self, t: T, grid: &SpatialGrid<T>) -> GridFunction<T> {
        match self {
            Self::Custom { eval, .. } => eval(t, grid),
            _ => {
                let nodes: Vec<T> = grid.nodes().collect();
                let mut out = vec![Complex::new(T::zero(), T::zero()); nodes.len()];
                self.eval_into(t, grid, &nodes, &mut out);
                GridFunction::from_values_unchecked(*grid, out)
            }
        }
    }

    /// Nodal evaluation into a preallocated buffer; `nodes` must be the grid's nodes.
    pub(crate) fn eval_into(&self, t: T, grid: &SpatialGrid<T>, nodes: &[T], out: &mut [Complex<T>]) {
        let zero = T::zero();
        match self {
            Self::CosProduct { lipschitz, offset } => {
                let lt = *lipschitz * t;
                for (o, &x) in out.iter_mut().zip(nodes) {
                    *o = Complex::new((lt * x).cos() + *offset, zero);
                }
            }
            Self::ExpDecay { lipschitz, offset } => {
                let decay = (-*lipschitz * t).exp();
                for (o, &x) in out.iter_mut().zip(nodes) {
                    *o = Complex::new(x * decay + *offset, zero);
                }
            }
            Self::Constant { offset } => out.iter_mut().for_each(|o| *o = Complex::new(*offset, zero)),
            Self::Custom { eval, .. } => out.copy_from_slice(eval(t, grid).values()),
        }
    }

    /// Largest difference quotient `‖η(t_{i+1}) − η(t_i)‖ / (t_{i+1} − t_i)`
    /// over `steps` equispaced times in `[0, t_max]`.
    pub fn verify_lipschitz(&self, grid: &SpatialGrid<T>, t_max: T, steps: usize) -> Result<LipschitzReport<T>> {
        if steps < 2 {
            return Err(Error::Domain("need at least two sample times".into()));
        }
        if !(t_max > T::zero()) {
            return Err(Error::Domain(format!("t_max must be positive, got {t_max}")));
        }
        let dt = t_max / T::of_usize(steps - 1);
        let mut prev = self.eval(T::zero(), grid);
        let mut empirical = T::zero();
        for i in 1..steps {
            let next = self.eval(dt * T::of_usize(i), grid);
            empirical = empirical.max(next.sub(&prev)?.norm() / dt);
            prev = next;
        }
        let declared = self.lipschitz();
        Ok(LipschitzReport { empirical, declared, within_declared: empirical <= declared * T::of(1.05) })
    }
}
