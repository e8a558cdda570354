use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Periodic box `[0, 2πM)^d` sampled with `N` points per axis.
///
/// Fourier index `m ∈ {−N/2, …, N/2−1}` carries wavenumber `k = m/M`, so a
/// wave `sin(n x)` is exactly representable whenever `n·M` is an integer.
/// Cloning is cheap: FFT plans and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid<T: Scalar> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Scalar> {
    dims: usize,
    points: usize,
    period_scale: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// Wavenumber of each index along one axis (FFT ordering).
    k_axis: Vec<T>,
    /// Same, with the unpaired Nyquist index zeroed; used by odd-order operators.
    kd_axis: Vec<T>,
    /// `|k|²` for every linear coefficient index.
    k_sq: Vec<T>,
    conj: OnceLock<Vec<u32>>,
    kd_full: OnceLock<Vec<Vec<T>>>,
    kd_sq: OnceLock<Vec<T>>,
}

impl<T: Scalar> Grid<T> {
    /// `dims ∈ {1, 2, 3}`, `points` even and at least 8, `period_scale > 0`.
    ///
    /// One-dimensional grids exist for the scalar norm asymptotics; the MHD
    /// solver and data families require two or three dimensions.
    pub fn new(dims: usize, points: usize, period_scale: T) -> Result<Self> {
        let mut problems = Vec::new();
        if !(1..=3).contains(&dims) {
            problems.push(format!("dimension {dims} not in {{1, 2, 3}}"));
        }
        if points < 8 || points % 2 != 0 {
            problems.push(format!("points per axis {points} must be even and >= 8"));
        }
        if !(period_scale > T::zero()) || !period_scale.is_finite() {
            problems.push(format!("period scale {period_scale} must be positive"));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidGrid(problems.join("; ")));
        }
        let total = points
            .checked_pow(dims as u32)
            .ok_or_else(|| Error::InvalidGrid("grid too large".into()))?;

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);

        let k_axis: Vec<T> = (0..points)
            .map(|i| T::lit(index_to_mode(i, points) as f64) / period_scale)
            .collect();
        let kd_axis: Vec<T> = (0..points)
            .map(|i| {
                if i == points / 2 {
                    T::zero()
                } else {
                    k_axis[i]
                }
            })
            .collect();
        let mut k_sq = vec![T::zero(); total];
        for (idx, slot) in k_sq.iter_mut().enumerate() {
            let mut acc = T::zero();
            let mut rem = idx;
            for _ in 0..dims {
                let k = k_axis[rem % points];
                acc = acc + k * k;
                rem /= points;
            }
            *slot = acc;
        }

        Ok(Grid {
            inner: Arc::new(GridInner {
                dims,
                points,
                period_scale,
                forward,
                inverse,
                k_axis,
                kd_axis,
                k_sq,
                conj: OnceLock::new(),
                kd_full: OnceLock::new(),
                kd_sq: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.inner.dims
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.inner.points
    }

    #[inline]
    pub fn period_scale(&self) -> T {
        self.inner.period_scale
    }

    /// Total number of samples `N^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.inner.k_sq.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Side length `2πM`.
    pub fn length(&self) -> T {
        T::lit(2.0) * T::PI() * self.inner.period_scale
    }

    /// `|Ω| = (2πM)^d`.
    pub fn volume(&self) -> T {
        self.length().powi(self.inner.dims as i32)
    }

    /// Sample spacing `h = 2πM / N`.
    pub fn spacing(&self) -> T {
        self.length() / T::from_usize_lossy(self.inner.points)
    }

    /// Domain midpoint coordinate `πM` (a grid point, since `N` is even).
    pub fn center(&self) -> T {
        T::PI() * self.inner.period_scale
    }

    /// Largest `|k|` over all coefficients (the corner of the spectral box).
    pub fn max_wavenumber(&self) -> T {
        let half = T::from_usize_lossy(self.inner.points / 2) / self.inner.period_scale;
        half * T::from_usize_lossy(self.inner.dims).sqrt()
    }

    /// Wavenumber `m / M` of an integer Fourier index.
    pub fn wavenumber(&self, mode: i64) -> T {
        T::lit(mode as f64) / self.inner.period_scale
    }

    /// Signed Fourier index of position `i` along one axis.
    #[inline]
    pub fn mode_of(&self, i: usize) -> i64 {
        index_to_mode(i, self.inner.points)
    }

    /// Storage position of a signed Fourier index along one axis.
    pub fn index_of_mode(&self, mode: i64) -> Option<usize> {
        let n = self.inner.points as i64;
        if mode < -n / 2 || mode >= n / 2 {
            return None;
        }
        Some(mode.rem_euclid(n) as usize)
    }

    /// Split a linear index into per-axis positions (axis 0 fastest).
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.inner.points;
        let mut out = [0usize; 3];
        let mut rem = idx;
        for slot in out.iter_mut().take(self.inner.dims) {
            *slot = rem % n;
            rem /= n;
        }
        out
    }

    /// Linear index of per-axis positions (axis 0 fastest).
    #[inline]
    pub fn ravel(&self, pos: [usize; 3]) -> usize {
        let n = self.inner.points;
        let mut idx = 0;
        for axis in (0..self.inner.dims).rev() {
            idx = idx * n + pos[axis];
        }
        idx
    }

    /// Physical coordinate of a sample (component `i` is `pos_i · h`).
    #[inline]
    pub fn coordinate(&self, idx: usize) -> [T; 3] {
        let pos = self.unravel(idx);
        let h = self.spacing();
        let mut x = [T::zero(); 3];
        for axis in 0..self.inner.dims {
            x[axis] = T::from_usize_lossy(pos[axis]) * h;
        }
        x
    }

    #[inline]
    pub fn k_sq(&self) -> &[T] {
        &self.inner.k_sq
    }

    /// Wavenumber along `axis` of a linear coefficient index.
    #[inline]
    pub fn k_component(&self, idx: usize, axis: usize) -> T {
        let n = self.inner.points;
        self.inner.k_axis[(idx / n.pow(axis as u32)) % n]
    }

    /// Derivative wavenumber along `axis`: like [`Grid::k_component`] but zero at
    /// the unpaired Nyquist index, so odd derivatives of real fields stay real.
    #[inline]
    pub fn kd_component(&self, idx: usize, axis: usize) -> T {
        let n = self.inner.points;
        self.inner.kd_axis[(idx / n.pow(axis as u32)) % n]
    }

    /// Linear index of the coefficient with negated wavenumber.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.inner.points;
        let mut pos = self.unravel(idx);
        for p in pos.iter_mut().take(self.inner.dims) {
            *p = (n - *p) % n;
        }
        self.ravel(pos)
    }

    /// [`Grid::conjugate_index`] for every coefficient, built on first use.
    pub fn conjugate_table(&self) -> &[u32] {
        self.inner
            .conj
            .get_or_init(|| (0..self.len()).map(|i| self.conjugate_index(i) as u32).collect())
    }

    /// [`Grid::kd_component`] for every coefficient along `axis`, built on first use.
    pub fn kd_table(&self, axis: usize) -> &[T] {
        &self.inner.kd_full.get_or_init(|| {
            (0..self.inner.dims)
                .map(|a| (0..self.len()).map(|i| self.kd_component(i, a)).collect())
                .collect()
        })[axis]
    }

    /// `Σ_a kd_a²` for every coefficient, built on first use.
    pub fn kd_sq_table(&self) -> &[T] {
        self.inner.kd_sq.get_or_init(|| {
            (0..self.len())
                .map(|i| (0..self.dims()).fold(T::zero(), |acc, a| acc + self.kd_table(a)[i].powi(2)))
                .collect()
        })
    }

    /// Largest signed Fourier index magnitude over all axes of a coefficient.
    #[inline]
    pub fn max_abs_mode(&self, idx: usize) -> u64 {
        let pos = self.unravel(idx);
        (0..self.inner.dims)
            .map(|a| self.mode_of(pos[a]).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.inner.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.inner.inverse
    }

    /// Same dimension, resolution and period.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dims == other.inner.dims
                && self.inner.points == other.inner.points
                && self.inner.period_scale == other.inner.period_scale)
    }
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dims", &self.inner.dims)
            .field("points", &self.inner.points)
            .field("period_scale", &self.inner.period_scale)
            .finish()
    }
}

#[inline]
fn index_to_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
