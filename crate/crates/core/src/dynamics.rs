//! Strongly continuous semigroups acting on grid functions.
//!
//! Two families are supported:
//!
//! * multiplication semigroups `[T(t)f](x) = e^{t·a(x)} f(x)` generated by a
//!   real symbol `a` (self-adjoint, evaluated in closed form), and
//! * the right-translation semigroup `[T(t)f](x) = f(x − t)` with zero
//!   inflow, realized as whole-node shifts on a truncated interval.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, SpatialGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum SemigroupKind<T> {
    /// Generator `A = a(x)·` with a real symbol sampled at the nodes.
    Multiplication { symbol: Vec<T> },
    /// Right translation with zero fill at the inflow boundary.
    Translation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup<T> {
    kind: SemigroupKind<T>,
    grid: SpatialGrid<T>,
}

impl<T: Real> Semigroup<T> {
    /// Multiplication semigroup with the given real-valued symbol.
    pub fn multiplication(symbol: &GridFunction<T>) -> Result<Self> {
        if !symbol.is_real() {
            return Err(Error::Invalid("multiplication symbol must be real-valued".into()));
        }
        Ok(Self {
            kind: SemigroupKind::Multiplication { symbol: symbol.values().iter().map(|v| v.re).collect() },
            grid: *symbol.grid(),
        })
    }

    pub fn multiplication_fn(grid: SpatialGrid<T>, a: impl Fn(T) -> T) -> Self {
        Self { kind: SemigroupKind::Multiplication { symbol: grid.nodes().map(a).collect() }, grid }
    }

    /// `A u = −x² u`.
    pub fn neg_x_squared(grid: SpatialGrid<T>) -> Self {
        Self::multiplication_fn(grid, |x| -x * x)
    }

    pub fn translation(grid: SpatialGrid<T>) -> Self {
        Self { kind: SemigroupKind::Translation, grid }
    }

    pub fn kind(&self) -> &SemigroupKind<T> {
        &self.kind
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    /// `T(t) f`.
    pub fn apply(&self, t: T, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_input(t, f)?;
        let mut values = f.values().to_vec();
        self.evolve_in_place(t, &mut values, Direction::Forward)?;
        Ok(GridFunction::from_values_unchecked(self.grid, values))
    }

    /// `T*(t) g`.
    pub fn apply_adjoint(&self, t: T, g: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_input(t, g)?;
        let mut values = g.values().to_vec();
        self.evolve_in_place(t, &mut values, Direction::Adjoint)?;
        Ok(GridFunction::from_values_unchecked(self.grid, values))
    }

    /// `A* g`; only defined for multiplication generators.
    pub fn apply_generator_adjoint(&self, g: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_grid(g)?;
        match &self.kind {
            SemigroupKind::Multiplication { symbol } => {
                let values = g.values().iter().zip(symbol).map(|(&v, &a)| v.scale(a)).collect();
                Ok(GridFunction::from_values_unchecked(self.grid, values))
            }
            SemigroupKind::Translation => {
                Err(Error::Unsupported("generator of the translation semigroup is not modelled".into()))
            }
        }
    }

    /// Whether `A*` is available (needed by the Fourier measurements).
    pub fn has_generator(&self) -> bool {
        matches!(self.kind, SemigroupKind::Multiplication { .. })
    }

    /// `C = sup_{t∈[0,β]} ‖T(t)‖`.
    pub fn norm_bound(&self, beta: T) -> T {
        match &self.kind {
            SemigroupKind::Multiplication { symbol } => {
                let top = symbol.iter().fold(T::zero(), |m, &a| m.max(a));
                (beta.max(T::zero()) * top).exp()
            }
            SemigroupKind::Translation => T::one(),
        }
    }

    /// Numerical modulus of continuity
    /// `max_{g, α} ‖(T*(α) − I) g‖ / ‖g‖` over `alpha_steps` equispaced
    /// `α ∈ [0, β]`.
    pub fn estimate_d(&self, beta: T, samplers: &[GridFunction<T>], alpha_steps: usize) -> Result<T> {
        if samplers.is_empty() {
            return Err(Error::Domain("no samplers given".into()));
        }
        if !(beta > T::zero()) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if alpha_steps < 2 {
            return Err(Error::Domain("alpha_steps must be at least 2".into()));
        }
        let mut worst = T::zero();
        for g in samplers {
            let gn = g.norm();
            if gn == T::zero() {
                continue;
            }
            for i in 0..alpha_steps {
                let alpha = beta * T::of_usize(i) / T::of_usize(alpha_steps - 1);
                let moved = self.apply_adjoint(alpha, g)?;
                worst = worst.max(moved.sub(g)?.norm() / gn);
            }
        }
        Ok(worst)
    }

    fn check_grid(&self, f: &GridFunction<T>) -> Result<()> {
        if f.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("function and semigroup live on different grids".into()))
        }
    }

    fn check_input(&self, t: T, f: &GridFunction<T>) -> Result<()> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::Domain(format!("semigroup time must be finite and non-negative, got {t}")));
        }
        self.check_grid(f)
    }

    /// Nodal factors `e^{t·a(x)}` of a multiplication semigroup.
    pub(crate) fn multipliers(&self, t: T) -> Option<Vec<T>> {
        match &self.kind {
            SemigroupKind::Multiplication { symbol } => Some(symbol.iter().map(|&a| (t * a).exp()).collect()),
            SemigroupKind::Translation => None,
        }
    }

    /// Number of nodes a translation by `t` moves, if `t` is commensurate.
    fn shift_nodes(&self, t: T) -> Result<usize> {
        let s = t / self.grid.step();
        let r = s.round();
        let tol = T::of(1e-12).max(T::epsilon() * T::of(16.0)) * T::one().max(s);
        if (s - r).abs() > tol {
            return Err(Error::Precision(format!(
                "translation by {t} is not a whole number of grid steps ({s} steps)"
            )));
        }
        Ok(r.to_usize().unwrap_or(usize::MAX))
    }

    pub(crate) fn evolve_in_place(&self, t: T, values: &mut [Complex<T>], dir: Direction) -> Result<()> {
        match &self.kind {
            SemigroupKind::Multiplication { symbol } => {
                for (v, &a) in values.iter_mut().zip(symbol) {
                    *v = v.scale((t * a).exp());
                }
            }
            SemigroupKind::Translation => {
                let s = self.shift_nodes(t)?;
                let n = values.len();
                let zero = Complex::new(T::zero(), T::zero());
                if s >= n {
                    values.iter_mut().for_each(|v| *v = zero);
                } else {
                    match dir {
                        Direction::Forward => {
                            values.copy_within(0..n - s, s);
                            values[..s].iter_mut().for_each(|v| *v = zero);
                        }
                        Direction::Adjoint => {
                            values.copy_within(s..n, 0);
                            values[n - s..].iter_mut().for_each(|v| *v = zero);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Adjoint,
}
