use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::fft::{self, Direction};
use super::Grid;
use crate::error::{Error, Result};
use crate::reduce::ordered_sum;
use crate::scalar::Scalar;

/// Real scalar function on a periodic [`Grid`], stored by its Fourier
/// coefficients `û_k = |Ω|⁻¹ ∫ u e^{−ik·x} dx`, so that `‖u‖²_{L²} = |Ω| Σ_k |û_k|²`.
///
/// The physical view is produced on demand by [`Field::samples`].
#[derive(Clone, Debug)]
pub struct Field<T: Scalar> {
    grid: Grid<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Field {
            grid: grid.clone(),
            coeffs: vec![Complex::zero(); grid.len()],
        }
    }

    pub fn from_samples(grid: &Grid<T>, samples: &[T]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let mut coeffs: Vec<Complex<T>> = samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft::transform(grid, &mut coeffs, Direction::Forward);
        let scale = T::one() / T::from_usize_lossy(grid.len());
        coeffs.par_iter_mut().for_each(|c| *c = c.scale(scale));
        Ok(Field {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Sample `f` at every grid point; `f` receives `[x₁, x₂, x₃]` (unused axes zero).
    pub fn from_fn(grid: &Grid<T>, f: impl Fn([T; 3]) -> T + Sync) -> Self {
        let samples: Vec<T> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.coordinate(i)))
            .collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    pub fn from_coeffs(grid: &Grid<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Physical samples, row-major with axis 0 fastest.
    pub fn samples(&self) -> Vec<T> {
        let mut buf = self.coeffs.clone();
        fft::transform(&self.grid, &mut buf, Direction::Inverse);
        buf.into_par_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient-wise multiplication by a real symbol indexed by coefficient position.
    pub fn map_symbol(&self, symbol: impl Fn(usize) -> T + Sync) -> Self {
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, c)| c.scale(symbol(i)))
            .collect();
        Field {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Weighted energy `|Ω| Σ_k w(k) |û_k|²`.
    pub fn weighted_energy(&self, weight: impl Fn(usize) -> T + Sync) -> T {
        let coeffs = &self.coeffs;
        let sum = ordered_sum(coeffs.len(), |i| weight(i).as_f64() * coeffs[i].norm_sqr().as_f64());
        self.grid.volume() * T::lit(sum)
    }

    /// `‖u‖_{L²}` via Parseval.
    pub fn l2_norm(&self) -> T {
        self.weighted_energy(|_| T::one()).sqrt()
    }

    /// `‖u‖_{L²}` by rectangle-rule quadrature of the samples (exact for trigonometric polynomials).
    pub fn l2_norm_quadrature(&self) -> T {
        let cell = self.grid.volume() / T::from_usize_lossy(self.grid.len());
        let sum: f64 = self.samples().iter().map(|v| v.as_f64().powi(2)).sum();
        (cell * T::lit(sum)).sqrt()
    }

    /// Maximum of `|u|` over the grid samples.
    pub fn max_abs(&self) -> T {
        self.samples()
            .into_iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Mean value (the `k = 0` coefficient).
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: T, other: &Field<T>) {
        assert!(self.grid == other.grid, "grid mismatch");
        self.coeffs
            .par_iter_mut()
            .zip(other.coeffs.par_iter())
            .for_each(|(a, b)| *a = *a + b.scale(alpha));
    }

    pub fn scaled(&self, alpha: T) -> Self {
        self.map_symbol(|_| alpha)
    }

    /// Largest coefficient difference, relative to the larger coefficient sup norm.
    pub fn max_coeff_diff(&self, other: &Field<T>) -> T {
        assert!(self.grid == other.grid, "grid mismatch");
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .fold(T::zero(), |m, c| m.max(c.norm()));
        let diff = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()));
        if scale > T::zero() {
            diff / scale
        } else {
            diff
        }
    }

    fn zip_with(&self, other: &Field<T>, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync) -> Self {
        assert!(self.grid == other.grid, "grid mismatch");
        let coeffs = self
            .coeffs
            .par_iter()
            .zip(other.coeffs.par_iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Field {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

impl<T: Scalar> Add for &Field<T> {
    type Output = Field<T>;
    fn add(self, rhs: &Field<T>) -> Field<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &Field<T> {
    type Output = Field<T>;
    fn sub(self, rhs: &Field<T>) -> Field<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Mul<T> for &Field<T> {
    type Output = Field<T>;
    fn mul(self, rhs: T) -> Field<T> {
        self.scaled(rhs)
    }
}

impl<T: Scalar> Neg for &Field<T> {
    type Output = Field<T>;
    fn neg(self) -> Field<T> {
        self.scaled(-T::one())
    }
}

/// `d` scalar fields on one grid.
#[derive(Clone, Debug)]
pub struct VecField<T: Scalar> {
    comps: Vec<Field<T>>,
}

impl<T: Scalar> VecField<T> {
    pub fn new(comps: Vec<Field<T>>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::InvalidParams("vector field needs at least one component".into()))?;
        if comps.iter().any(|c| c.grid != first.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(VecField { comps })
    }

    /// Zero field with `grid.dims()` components.
    pub fn zeros(grid: &Grid<T>) -> Self {
        VecField {
            comps: (0..grid.dims()).map(|_| Field::zeros(grid)).collect(),
        }
    }

    pub fn from_samples(grid: &Grid<T>, samples: &[Vec<T>]) -> Result<Self> {
        let comps = samples
            .iter()
            .map(|s| Field::from_samples(grid, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        self.comps[0].grid()
    }

    #[inline]
    pub fn components(&self) -> &[Field<T>] {
        &self.comps
    }

    #[inline]
    pub fn components_mut(&mut self) -> &mut [Field<T>] {
        &mut self.comps
    }

    #[inline]
    pub fn component(&self, i: usize) -> &Field<T> {
        &self.comps[i]
    }

    pub fn into_components(self) -> Vec<Field<T>> {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn samples(&self) -> Vec<Vec<T>> {
        self.comps.iter().map(Field::samples).collect()
    }

    pub fn weighted_energy(&self, weight: impl Fn(usize) -> T + Sync + Copy) -> T {
        self.comps
            .iter()
            .fold(T::zero(), |acc, c| acc + c.weighted_energy(weight))
    }

    pub fn l2_norm(&self) -> T {
        self.weighted_energy(|_| T::one()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().fold(T::zero(), |m, c| m.max(c.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(Field::is_finite)
    }

    pub fn axpy(&mut self, alpha: T, other: &VecField<T>) {
        assert_eq!(self.len(), other.len(), "component count mismatch");
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(alpha, b);
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        VecField {
            comps: self.comps.iter().map(|c| c.scaled(alpha)).collect(),
        }
    }

    pub fn map_symbol(&self, symbol: impl Fn(usize) -> T + Sync + Copy) -> Self {
        VecField {
            comps: self.comps.iter().map(|c| c.map_symbol(symbol)).collect(),
        }
    }

    pub fn max_coeff_diff(&self, other: &VecField<T>) -> T {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_coeff_diff(b)))
    }
}

impl<T: Scalar> Add for &VecField<T> {
    type Output = VecField<T>;
    fn add(self, rhs: &VecField<T>) -> VecField<T> {
        assert_eq!(self.len(), rhs.len(), "component count mismatch");
        VecField {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &VecField<T> {
    type Output = VecField<T>;
    fn sub(self, rhs: &VecField<T>) -> VecField<T> {
        assert_eq!(self.len(), rhs.len(), "component count mismatch");
        VecField {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Neg for &VecField<T> {
    type Output = VecField<T>;
    fn neg(self) -> VecField<T> {
        self.scaled(-T::one())
    }
}
