//! Shape reconstruction from sampler coefficients `⟨h, g⟩` on a
//! finite-dimensional model space `V = span(basis)`.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hilbert::GridFunction;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct ShapeSpace<T: Real> {
    basis: Vec<GridFunction<T>>,
    samplers: Vec<GridFunction<T>>,
    /// `cross_gram[i][j] = ⟨basis_i, sampler_j⟩`.
    cross_gram: Vec<Vec<Complex<T>>>,
    /// Pseudo-inverse of the map from basis coordinates to sampler coefficients.
    pinv: DMatrix<Complex<T>>,
    lipschitz: T,
    condition: T,
}

impl<T: Real + RealField> ShapeSpace<T> {
    /// Fails with `RankDeficient` unless every element of `V` is determined by
    /// its sampler coefficients.
    pub fn new(basis: Vec<GridFunction<T>>, samplers: Vec<GridFunction<T>>) -> Result<Self> {
        if basis.is_empty() || samplers.is_empty() {
            return Err(Error::Invalid("basis and samplers must be nonempty".into()));
        }
        let grid = *basis[0].grid();
        for f in basis.iter().chain(&samplers) {
            grid.check_same(f.grid())?;
        }
        let (n, m) = (basis.len(), samplers.len());
        if m < n {
            return Err(Error::RankDeficient(format!("{m} samplers cannot determine {n} basis coordinates")));
        }
        let cross_gram = basis
            .iter()
            .map(|b| samplers.iter().map(|g| b.inner_product(g)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let a = DMatrix::from_fn(m, n, |j, i| cross_gram[i][j]);
        let svd = a.svd(true, true);
        let sv = &svd.singular_values;
        let (s_max, s_min) = (sv.max(), sv.min());
        let tol = T::of_usize(m) * <T as Float>::epsilon() * s_max;
        if !(s_min > tol) {
            return Err(Error::RankDeficient(format!("smallest singular value {s_min} of {s_max} is below {tol}")));
        }
        let pinv = svd.pseudo_inverse(tol).map_err(|e| Error::RankDeficient(e.to_string()))?;

        // ‖Σ cᵢ basisᵢ‖ = ‖Lᴴc‖ with B = LLᴴ, B[k][i] = ⟨basis_i, basis_k⟩.
        let b = DMatrix::from_fn(n, n, |k, i| basis[i].inner_product(&basis[k]).expect("checked grids"));
        let chol = b
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("basis functions are linearly dependent".into()))?;
        let lipschitz = (chol.l().adjoint() * &pinv).singular_values().max();

        Ok(Self { basis, samplers, cross_gram, pinv, lipschitz, condition: s_max / s_min })
    }

    pub fn basis(&self) -> &[GridFunction<T>] {
        &self.basis
    }

    pub fn samplers(&self) -> &[GridFunction<T>] {
        &self.samplers
    }

    pub fn cross_gram(&self) -> &[Vec<Complex<T>>] {
        &self.cross_gram
    }

    /// 2-norm condition number of the coordinate-to-coefficient map.
    pub fn condition_number(&self) -> T {
        self.condition
    }

    /// `S` with `‖synthesize(c) − synthesize(c')‖ ≤ S‖c − c'‖₂`.
    pub fn lipschitz_constant(&self) -> T {
        self.lipschitz
    }

    /// `R = max ‖g‖` over the samplers.
    pub fn sampler_radius(&self) -> T {
        self.samplers.iter().fold(T::zero(), |r, g| Float::max(r, g.norm()))
    }

    /// `(⟨h, g_j⟩)_j`.
    pub fn analyze(&self, h: &GridFunction<T>) -> Result<Vec<Complex<T>>> {
        self.samplers.iter().map(|g| h.inner_product(g)).collect()
    }

    /// Least-squares element of `V` whose sampler coefficients best match `coeffs`.
    pub fn synthesize(&self, coeffs: &[Complex<T>]) -> Result<GridFunction<T>> {
        if coeffs.len() != self.samplers.len() {
            return Err(Error::Invalid(format!(
                "{} coefficients for {} samplers",
                coeffs.len(),
                self.samplers.len()
            )));
        }
        let c = &self.pinv * DVector::from_column_slice(coeffs);
        let mut out = GridFunction::zeros(*self.basis[0].grid());
        for (ci, b) in c.iter().zip(&self.basis) {
            for (o, v) in out.values_mut().iter_mut().zip(b.values()) {
                *o += ci * v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SpatialGrid;
    use proptest::prelude::*;

    fn grid() -> SpatialGrid<f64> {
        SpatialGrid::unit(257).unwrap()
    }

    fn fixture_space() -> ShapeSpace<f64> {
        let g = grid();
        ShapeSpace::new(
            vec![GridFunction::constant(g, 1.0), GridFunction::from_real_fn(g, f64::sin), GridFunction::from_real_fn(g, f64::cos)],
            vec![GridFunction::constant(g, 1.0), GridFunction::from_real_fn(g, |x| x), GridFunction::from_real_fn(g, |x| x * x)],
        )
        .unwrap()
    }

    #[test]
    fn analyze_matches_antiderivatives() {
        let s = fixture_space();
        let h = GridFunction::from_real_fn(grid(), f64::sin);
        let c = s.analyze(&h).unwrap();
        let (s1, c1) = (1f64.sin(), 1f64.cos());
        let exact = [1.0 - c1, s1 - c1, 2.0 * s1 + c1 - 2.0];
        // leading trapezoid error h²/12·(F'(1) − F'(0)) for F = xʲ sin x
        let h = 1.0 / 256.0;
        let slope_jump = [c1 - 1.0, s1 + c1, 2.0 * s1 + c1];
        for ((got, e), d) in c.iter().zip(exact).zip(slope_jump) {
            assert!((got.re - e - h * h / 12.0 * d).abs() < 1e-9 && got.im == 0.0, "{got} vs {e}");
        }
        assert!(s.analyze(&GridFunction::zeros(grid())).unwrap().iter().all(|z| z.norm() == 0.0));
        for (i, b) in s.basis().iter().enumerate() {
            assert_eq!(s.analyze(b).unwrap(), s.cross_gram()[i]);
        }
    }

    #[test]
    fn synthesize_inverts_analyze_on_v() {
        let s = fixture_space();
        let f2 = GridFunction::from_real_fn(grid(), f64::cos);
        let back = s.synthesize(&s.analyze(&f2).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f2).unwrap() < 1e-9);
        let zero = s.synthesize(&[Complex::new(0.0, 0.0); 3]).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        assert!(s.synthesize(&[Complex::new(0.0, 0.0); 2]).is_err());
        assert!(s.condition_number() >= 1.0 && s.condition_number().is_finite());
    }

    #[test]
    fn perturbation_stays_within_lipschitz_bound() {
        let s = fixture_space();
        let f1 = GridFunction::from_real_fn(grid(), |x| 0.35 * x.sin());
        let c = s.analyze(&f1).unwrap();
        let e = [Complex::new(1e-3, 0.0), Complex::new(-1e-3, 0.0), Complex::new(0.0, 1e-3)];
        let pert: Vec<_> = c.iter().zip(e).map(|(a, b)| a + b).collect();
        let diff = s.synthesize(&pert).unwrap().sub(&f1).unwrap().norm();
        let e2 = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lip = s.lipschitz_constant();
        assert!(lip > 0.0 && lip.is_finite());
        assert!(diff <= lip * e2 * (1.0 + 1e-9), "{diff} > {lip} * {e2}");
    }

    #[test]
    fn orthonormal_basis_has_unit_constant() {
        let g = grid();
        // Legendre polynomials on [0, 1], orthonormal up to O(h²) quadrature error
        let p0 = GridFunction::constant(g, 1.0);
        let p1 = GridFunction::from_real_fn(g, |x| 3f64.sqrt() * (2.0 * x - 1.0));
        let s = ShapeSpace::new(vec![p0.clone(), p1.clone()], vec![p0.clone(), p1.clone()]).unwrap();
        assert!((s.lipschitz_constant() - 1.0).abs() < 1e-4);
        assert!((s.condition_number() - 1.0).abs() < 1e-4);

        let doubled = ShapeSpace::new(vec![p0.clone(), p1.clone()], vec![p0.scale(Complex::new(2.0, 0.0)), p1.scale(Complex::new(2.0, 0.0))]).unwrap();
        assert!((doubled.lipschitz_constant() - 0.5 * s.lipschitz_constant()).abs() < 1e-12);
        assert!((doubled.sampler_radius() - 2.0 * s.sampler_radius()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_spaces_are_rejected() {
        let g = grid();
        let one = GridFunction::constant(g, 1.0);
        let x = GridFunction::from_real_fn(g, |x| x);
        let err = ShapeSpace::new(vec![one.clone(), x.clone()], vec![one.clone()]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
        let err = ShapeSpace::new(vec![one.clone(), one.scale(Complex::new(2.0, 0.0))], vec![one.clone(), x]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
        let other = GridFunction::constant(SpatialGrid::unit(33).unwrap(), 1.0);
        assert!(matches!(ShapeSpace::new(vec![one], vec![other]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn overdetermined_least_squares() {
        let g = grid();
        let s = ShapeSpace::new(
            vec![GridFunction::from_real_fn(g, f64::sin), GridFunction::from_real_fn(g, f64::cos)],
            vec![GridFunction::constant(g, 1.0), GridFunction::from_real_fn(g, |x| x), GridFunction::from_real_fn(g, |x| x * x)],
        )
        .unwrap();
        let h = GridFunction::from_fn(g, |x| Complex::new(x.sin(), -2.0 * x.cos()));
        let back = s.synthesize(&s.analyze(&h).unwrap()).unwrap();
        assert!(back.max_abs_diff(&h).unwrap() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn left_inverse_on_random_elements(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, d in -3.0..3.0f64) {
            let s = fixture_space();
            let h = GridFunction::from_fn(grid(), |x| Complex::new(a + b * x.sin(), c * x.cos() - d));
            let back = s.synthesize(&s.analyze(&h).unwrap()).unwrap();
            prop_assert!(back.max_abs_diff(&h).unwrap() < 1e-9);
        }

        #[test]
        fn stability_under_random_perturbations(e in proptest::collection::vec(-1e-2..1e-2f64, 6)) {
            let s = fixture_space();
            let c = s.analyze(&GridFunction::from_real_fn(grid(), f64::cos)).unwrap();
            let err: Vec<_> = (0..3).map(|i| Complex::new(e[2 * i], e[2 * i + 1])).collect();
            let pert: Vec<_> = c.iter().zip(&err).map(|(a, b)| a + b).collect();
            let diff = s.synthesize(&pert).unwrap().sub(&s.synthesize(&c).unwrap()).unwrap().norm();
            let e2 = err.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(diff <= s.lipschitz_constant() * e2 * (1.0 + 1e-9) + 1e-15);
        }
    }
}
