//! Discretized Hilbert space `L²(Ω)` on a uniform one-dimensional grid.
//!
//! Vectors of the abstract state space (the solution `u(t)`, burst shapes,
//! samplers, background snapshots) are represented as [`GridFunction`]s:
//! complex nodal values on a [`SpatialGrid`]. Inner products use the
//! composite trapezoidal rule, so the discrete space is a genuine Hilbert
//! space with the weighted inner product `Σ wᵢ a(xᵢ) conj(b(xᵢ))`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default node count for spatial grids.
pub const DEFAULT_POINTS: usize = 1025;

/// Uniform grid `x_i = x_min + i·h`, `h = (x_max − x_min)/(M − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<T> {
    x_min: T,
    x_max: T,
    points: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(x_min: T, x_max: T, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 nodes, got {points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Domain(format!("invalid interval [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, points })
    }

    /// The unit interval `[0, 1]` with `points` nodes.
    pub fn unit(points: usize) -> Result<Self> {
        Self::new(T::zero(), T::one(), points)
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid spacing `h`.
    pub fn step(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.points - 1)
    }

    pub fn node(&self, i: usize) -> T {
        self.x_min + T::of_usize(i) * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        let h = self.step();
        (0..self.points).map(move |i| self.x_min + T::of_usize(i) * h)
    }

    /// Trapezoid quadrature weights: `h/2` at both ends, `h` inside.
    pub fn weights(&self) -> Vec<T> {
        let h = self.step();
        let mut w = vec![h; self.points];
        let half = h / T::of(2.0);
        w[0] = half;
        w[self.points - 1] = half;
        w
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}]/{} vs [{}, {}]/{}",
                self.x_min, self.x_max, self.points, other.x_min, other.x_max, other.points
            )))
        }
    }
}

/// A complex-valued function sampled on the nodes of a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: SpatialGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> GridFunction<T> {
    /// Wraps nodal values; rejects wrong lengths and non-finite entries.
    pub fn from_values(grid: SpatialGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Invalid(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: SpatialGrid<T>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Self { grid, values }
    }

    pub fn from_fn(grid: SpatialGrid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: SpatialGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |x| Complex::new(f(x), T::zero()))
    }

    pub fn zeros(grid: SpatialGrid<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.points()] }
    }

    pub fn constant(grid: SpatialGrid<T>, c: T) -> Self {
        Self { grid, values: vec![Complex::new(c, T::zero()); grid.points()] }
    }

    /// Indicator of the closed interval `[a, b]` evaluated at the nodes.
    pub fn indicator(grid: SpatialGrid<T>, a: T, b: T) -> Self {
        Self::from_real_fn(grid, |x| if x >= a && x <= b { T::one() } else { T::zero() })
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether every nodal value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == T::zero())
    }

    /// `∫ a(x)·conj(b(x)) dx` by the composite trapezoid rule.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.grid.check_same(&other.grid)?;
        Ok(weighted_dot(&self.grid.weights(), &self.values, &other.values))
    }

    pub fn norm(&self) -> T {
        let w = self.grid.weights();
        let s = self
            .values
            .iter()
            .zip(&w)
            .fold(T::zero(), |acc, (v, &wi)| acc + wi * v.norm_sqr());
        s.max(T::zero()).sqrt()
    }

    /// Largest nodal modulus.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| v * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        axpy(Complex::new(T::one(), T::zero()), other, self)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        axpy(Complex::new(-T::one(), T::zero()), other, self)
    }

    /// Largest nodal distance `max_i |a_i − b_i|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }
}

/// Nodal `alpha·a + b`.
pub fn axpy<T: Real>(
    alpha: Complex<T>,
    a: &GridFunction<T>,
    b: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    a.grid.check_same(&b.grid)?;
    let values = a.values.iter().zip(&b.values).map(|(&x, &y)| alpha * x + y).collect();
    Ok(GridFunction { grid: a.grid, values })
}

/// Nodal product `a·b`.
pub fn pointwise_mul<T: Real>(a: &GridFunction<T>, b: &GridFunction<T>) -> Result<GridFunction<T>> {
    a.grid.check_same(&b.grid)?;
    let values = a.values.iter().zip(&b.values).map(|(&x, &y)| x * y).collect();
    Ok(GridFunction { grid: a.grid, values })
}

pub fn inner_product<T: Real>(a: &GridFunction<T>, b: &GridFunction<T>) -> Result<Complex<T>> {
    a.inner_product(b)
}

pub fn norm<T: Real>(a: &GridFunction<T>) -> T {
    a.norm()
}

/// `Σ wᵢ aᵢ conj(bᵢ)`.
pub(crate) fn weighted_dot<T: Real>(w: &[T], a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for ((&wi, x), y) in w.iter().zip(a).zip(b) {
        acc += (x * y.conj()).scale(wi);
    }
    acc
}
