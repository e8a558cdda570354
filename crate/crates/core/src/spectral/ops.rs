//! Spectral differential operators, Leray projection and 2/3-rule dealiasing.

use num_complex::Complex;
use rayon::prelude::*;

use super::{Field, Grid, VecField};
use crate::scalar::Scalar;

#[inline]
fn times_i<T: Scalar>(c: Complex<T>, k: T) -> Complex<T> {
    Complex::new(-c.im * k, c.re * k)
}

/// `∂_axis f`, symbol `i k_axis` (Nyquist index zeroed).
pub fn partial<T: Scalar>(f: &Field<T>, axis: usize) -> Field<T> {
    let grid = f.grid();
    assert!(axis < grid.dims(), "axis {axis} out of range");
    let coeffs = f
        .coeffs()
        .par_iter()
        .zip(grid.kd_table(axis).par_iter())
        .map(|(&c, &k)| times_i(c, k))
        .collect();
    Field::from_coeffs(grid, coeffs).expect("same grid")
}

pub fn gradient<T: Scalar>(f: &Field<T>) -> VecField<T> {
    let comps = (0..f.grid().dims()).map(|a| partial(f, a)).collect();
    VecField::new(comps).expect("same grid")
}

pub fn divergence<T: Scalar>(v: &VecField<T>) -> Field<T> {
    let grid = v.grid().clone();
    assert_eq!(v.len(), grid.dims(), "divergence needs d components");
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (a, c) in v.components().iter().enumerate() {
        coeffs
            .par_iter_mut()
            .zip(c.coeffs().par_iter())
            .zip(grid.kd_table(a).par_iter())
            .for_each(|((o, &c), &k)| *o = *o + times_i(c, k));
    }
    Field::from_coeffs(&grid, coeffs).expect("same grid")
}

pub fn laplacian<T: Scalar>(f: &Field<T>) -> Field<T> {
    let ksq = f.grid().k_sq();
    f.map_symbol(|i| -ksq[i])
}

/// `Δ⁻¹ f` with the `k = 0` coefficient mapped to zero.
pub fn inverse_laplacian<T: Scalar>(f: &Field<T>) -> Field<T> {
    let ksq = f.grid().k_sq();
    f.map_symbol(|i| if ksq[i] > T::zero() { -T::one() / ksq[i] } else { T::zero() })
}

/// Symbol `δ_ij − k_i k_j / |k|²` built from derivative wavenumbers; coefficients
/// where that vector vanishes (including `k = 0`) pass through unchanged.
pub fn leray_project<T: Scalar>(v: &VecField<T>) -> VecField<T> {
    let grid = v.grid().clone();
    assert_eq!(v.len(), grid.dims(), "projection needs d components");
    let mut raw: Vec<Vec<Complex<T>>> = v.components().iter().map(|c| c.coeffs().to_vec()).collect();
    project_in_place(&grid, &mut raw);
    let comps = raw
        .into_iter()
        .map(|c| Field::from_coeffs(&grid, c).expect("same grid"))
        .collect();
    VecField::new(comps).expect("same grid")
}

/// Leray projection on raw coefficient arrays, one per axis.
pub(crate) fn project_in_place<T: Scalar>(grid: &Grid<T>, comps: &mut [Vec<Complex<T>>]) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut dot = vec![zero; grid.len()];
    for (a, c) in comps.iter().enumerate() {
        dot.par_iter_mut()
            .zip(c.par_iter())
            .zip(grid.kd_table(a).par_iter())
            .for_each(|((o, v), &k)| *o = *o + v.scale(k));
    }
    dot.par_iter_mut()
        .zip(grid.kd_sq_table().par_iter())
        .for_each(|(o, &kk)| *o = if kk > T::zero() { o.unscale(kk) } else { zero });
    for (a, c) in comps.iter_mut().enumerate() {
        c.par_iter_mut()
            .zip(dot.par_iter())
            .zip(grid.kd_table(a).par_iter())
            .for_each(|((v, d), &k)| *v = *v - d.scale(k));
    }
}

/// Whether a coefficient survives the 2/3 rule (`3|m_i| ≤ N` on every axis).
#[inline]
pub fn keeps_mode<T: Scalar>(grid: &Grid<T>, idx: usize) -> bool {
    3 * grid.max_abs_mode(idx) <= grid.points_per_axis() as u64
}

pub fn dealias<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = f.grid().clone();
    f.map_symbol(|i| if keeps_mode(&grid, i) { T::one() } else { T::zero() })
}

pub fn dealias_vec<T: Scalar>(v: &VecField<T>) -> VecField<T> {
    VecField::new(v.components().iter().map(dealias).collect()).expect("same grid")
}

/// Planar rotation of a stream function: `(∂₂ψ, −∂₁ψ)`, with a zero third
/// component on three-dimensional grids.
pub fn curl_stream<T: Scalar>(psi: &Field<T>) -> VecField<T> {
    let grid = psi.grid();
    assert!(grid.dims() >= 2, "stream function needs d >= 2");
    let mut comps = vec![partial(psi, 1), -&partial(psi, 0)];
    if grid.dims() == 3 {
        comps.push(Field::zeros(grid));
    }
    VecField::new(comps).expect("same grid")
}

/// `‖div v‖_{L²} / ‖v‖_{L²}` (zero for the zero field).
/// Spectral interpolation onto `target` (same `d` and `M`): coefficients are
/// zero-padded or truncated, and unpaired Nyquist indices are dropped.
pub fn resample<T: Scalar>(f: &Field<T>, target: &Grid<T>) -> crate::Result<Field<T>> {
    let src = f.grid();
    if src.dims() != target.dims() || src.period_scale() != target.period_scale() {
        return Err(crate::Error::GridMismatch);
    }
    let d = src.dims();
    let limit = (src.points_per_axis().min(target.points_per_axis()) / 2) as i64;
    let coeffs = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let pos = target.unravel(i);
            let mut spos = [0usize; 3];
            for a in 0..d {
                let m = target.mode_of(pos[a]);
                if m.abs() >= limit {
                    return Complex::new(T::zero(), T::zero());
                }
                spos[a] = src.index_of_mode(m).expect("mode inside source band");
            }
            f.coeffs()[src.ravel(spos)]
        })
        .collect();
    Field::from_coeffs(target, coeffs)
}

pub fn resample_vec<T: Scalar>(v: &VecField<T>, target: &Grid<T>) -> crate::Result<VecField<T>> {
    VecField::new(v.components().iter().map(|c| resample(c, target)).collect::<crate::Result<_>>()?)
}

pub fn divergence_defect<T: Scalar>(v: &VecField<T>) -> T {
    let norm = v.l2_norm();
    if norm == T::zero() {
        return T::zero();
    }
    divergence(v).l2_norm() / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid2(n: usize, m: f64) -> Grid<f64> {
        Grid::new(2, n, m).unwrap()
    }

    fn random_band_limited(grid: &Grid<f64>, seed: u64, kmax: i64) -> Field<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for _ in 0..12 {
            let a = rng.random_range(-kmax..=kmax) as f64;
            let b = rng.random_range(-kmax..=kmax) as f64;
            terms.push((a, b, rng.random_range(-1.0..1.0), rng.random_range(0.0..6.3)));
        }
        let m = grid.period_scale();
        Field::from_fn(grid, move |x| {
            terms
                .iter()
                .map(|&(a, b, c, p)| c * ((a * x[0] + b * x[1]) / m + p).cos())
                .sum()
        })
    }

    #[test]
    fn gradient_of_single_mode() {
        let g = grid2(32, 1.0);
        let f = Field::from_fn(&g, |x| (3.0 * x[0]).sin());
        let grad = gradient(&f);
        let want = Field::from_fn(&g, |x| 3.0 * (3.0 * x[0]).cos());
        assert!(grad.component(0).max_coeff_diff(&want) < 1e-13);
        assert!(grad.component(1).l2_norm() < 1e-12);
        let c = Field::from_fn(&g, |_| 2.5);
        assert!(gradient(&c).l2_norm() < 1e-12);
    }

    #[test]
    fn gradient_of_bump_matches_finite_differences() {
        let bump = |x: f64| {
            let r = (x / 2.0).abs();
            if r >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - r * r)).exp()
            }
        };
        let mut errs = Vec::new();
        for n in [256usize, 512, 1024] {
            let g = Grid::new(1, n, 1.0).unwrap();
            let c = g.center();
            let f = Field::from_fn(&g, |x| bump(x[0] - c));
            let spec = partial(&f, 0).samples();
            let s = f.samples();
            let h = g.spacing();
            let err = (0..n)
                .map(|i| {
                    let fd = (s[(i + 1) % n] - s[(i + n - 1) % n]) / (2.0 * h);
                    (fd - spec[i]).abs()
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}, errs {errs:?}");
        }
    }

    #[test]
    fn div_grad_is_laplacian() {
        let g = grid2(32, 1.0);
        let f = random_band_limited(&g, 1, 10);
        let lhs = divergence(&gradient(&f));
        assert!(lhs.max_coeff_diff(&laplacian(&f)) < 1e-12);
        let s = Field::from_fn(&g, |x| (3.0 * x[0]).sin());
        let want = Field::from_fn(&g, |x| -9.0 * (3.0 * x[0]).sin());
        assert!(laplacian(&s).max_coeff_diff(&want) < 1e-12);
    }

    #[test]
    fn curl_form_is_divergence_free() {
        let g = grid2(32, 2.0);
        let psi = random_band_limited(&g, 2, 20);
        let v = curl_stream(&psi);
        assert!(divergence_defect(&v) < 1e-12);
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal_fields() {
        let g = grid2(32, 1.0);
        let psi = random_band_limited(&g, 3, 10);
        let mut psi0 = psi.clone();
        psi0.coeffs_mut()[0] = Complex::new(0.0, 0.0);
        assert!(leray_project(&gradient(&psi0)).l2_norm() < 1e-12);
        let v = curl_stream(&psi);
        assert!(leray_project(&v).max_coeff_diff(&v) < 1e-12);
        let shear = VecField::new(vec![
            Field::from_fn(&g, |x| x[1].sin()),
            Field::from_fn(&g, |x| x[0].sin()),
        ])
        .unwrap();
        assert!(leray_project(&shear).max_coeff_diff(&shear) < 1e-12);
    }

    #[test]
    fn leray_passes_mean_through() {
        let g = grid2(16, 1.0);
        let v = VecField::new(vec![Field::from_fn(&g, |_| 1.5), Field::from_fn(&g, |_| -0.5)]).unwrap();
        let p = leray_project(&v);
        assert!((p.component(0).mean() - 1.5).abs() < 1e-14);
        assert!((p.component(1).mean() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn leray_in_three_dimensions() {
        let g = Grid::<f64>::new(3, 16, 1.0).unwrap();
        let v = VecField::new(vec![
            Field::from_fn(&g, |x| (x[0] + 2.0 * x[2]).sin()),
            Field::from_fn(&g, |x| (x[1] - x[0]).cos()),
            Field::from_fn(&g, |x| (3.0 * x[2]).sin() * x[1].cos()),
        ])
        .unwrap();
        let p = leray_project(&v);
        assert!(divergence_defect(&p) < 1e-12);
        assert!(leray_project(&p).max_coeff_diff(&p) < 1e-12);
    }

    #[test]
    fn dealias_cuts_high_modes() {
        let g = grid2(24, 1.0);
        let n = 24i64;
        let high = Field::from_fn(&g, |x| ((n / 2 - 1) as f64 * x[0]).cos());
        assert!(dealias(&high).l2_norm() < 1e-12);
        let c = Field::from_fn(&g, |_| 3.0);
        assert!(dealias(&c).max_coeff_diff(&c) < 1e-15);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let noise: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = dealias(&Field::from_samples(&g, &noise).unwrap());
        for (i, c) in d.coeffs().iter().enumerate() {
            if 3 * g.max_abs_mode(i) > 24 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        let edge = Field::from_fn(&g, |x| (8.0 * x[1]).sin());
        assert!(dealias(&edge).max_coeff_diff(&edge) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn operators_are_linear(seed_a in 0u64..1000, seed_b in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let g = grid2(16, 1.0);
            let f = random_band_limited(&g, seed_a, 6);
            let h = random_band_limited(&g, seed_b, 6);
            let mut combo = f.scaled(alpha);
            combo.axpy(beta, &h);
            let mut lap = laplacian(&f).scaled(alpha);
            lap.axpy(beta, &laplacian(&h));
            prop_assert!(laplacian(&combo).max_coeff_diff(&lap) < 1e-12);
            let mut grad = gradient(&f).scaled(alpha);
            grad.axpy(beta, &gradient(&h));
            prop_assert!(gradient(&combo).max_coeff_diff(&grad) < 1e-12);
            let vf = gradient(&f);
            let vh = curl_stream(&h);
            let mut vc = vf.scaled(alpha);
            vc.axpy(beta, &vh);
            let mut div = divergence(&vf).scaled(alpha);
            div.axpy(beta, &divergence(&vh));
            prop_assert!(divergence(&vc).max_coeff_diff(&div) < 1e-12);
        }

        #[test]
        fn leray_is_idempotent(seed_a in 0u64..1000, seed_b in 0u64..1000) {
            let g = grid2(16, 1.5);
            let v = VecField::new(vec![random_band_limited(&g, seed_a, 8), random_band_limited(&g, seed_b, 8)]).unwrap();
            let p = leray_project(&v);
            prop_assert!(leray_project(&p).max_coeff_diff(&p) < 1e-12);
            prop_assert!(divergence_defect(&p) < 1e-10);
        }

        #[test]
        fn parseval_for_band_limited_fields(seed in 0u64..1000) {
            let g = grid2(32, 1.0);
            let f = random_band_limited(&g, seed, 10);
            let spec = f.l2_norm().powi(2);
            let quad = f.l2_norm_quadrature().powi(2);
            prop_assert!((spec - quad).abs() <= 1e-10 * spec);
        }
    }

    #[test]
    fn resample_roundtrip_and_interpolation() {
        let coarse = grid2(32, 2.0);
        let fine = grid2(64, 2.0);
        let f = Field::from_fn(&coarse, |x| (1.5 * x[0]).sin() * (x[1]).cos() + 0.25);
        let up = resample(&f, &fine).unwrap();
        let want = Field::from_fn(&fine, |x| (1.5 * x[0]).sin() * (x[1]).cos() + 0.25);
        assert!(up.max_coeff_diff(&want) < 1e-13);
        let back = resample(&up, &coarse).unwrap();
        assert!(back.max_coeff_diff(&f) < 1e-15);
        assert!(resample(&f, &grid2(64, 3.0)).is_err());
    }
}
