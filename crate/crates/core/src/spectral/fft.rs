//! Multi-dimensional complex FFT over a [`Grid`], built from 1-D plans.
//!
//! Axis 0 is contiguous and transformed in place. Higher axes are brought
//! into contiguous rows by a tiled transpose, transformed, and transposed back.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::Fft;

use super::Grid;
use crate::scalar::Scalar;

const LINE_BATCH: usize = 32;
const TILE: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized transform of `data` (length `N^d`) in place.
pub(crate) fn transform<T: Scalar>(grid: &Grid<T>, data: &mut [Complex<T>], dir: Direction) {
    debug_assert_eq!(data.len(), grid.len());
    let plan = match dir {
        Direction::Forward => grid.forward_plan(),
        Direction::Inverse => grid.inverse_plan(),
    };
    let n = grid.points_per_axis();
    transform_rows(plan.as_ref(), data, n);
    if grid.dims() == 1 {
        return;
    }
    let mut tmp = vec![Complex::<T>::zero(); data.len()];
    for axis in 1..grid.dims() {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        data.par_chunks_mut(block)
            .zip(tmp.par_chunks_mut(block))
            .for_each(|(blk, scratch)| {
                // blk is an n × stride matrix; rows of scratch are axis lines.
                transpose(blk, scratch, n, stride);
                transform_rows(plan.as_ref(), scratch, n);
                transpose(scratch, blk, stride, n);
            });
    }
}

fn transform_rows<T: Scalar>(plan: &dyn Fft<T>, data: &mut [Complex<T>], n: usize) {
    data.par_chunks_mut(n * LINE_BATCH).for_each(|chunk| {
        let mut scratch = vec![Complex::<T>::zero(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

/// `dst[c·rows + r] = src[r·cols + c]`.
fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    dst.par_chunks_mut(rows * TILE)
        .enumerate()
        .for_each(|(tile, out)| {
            let c0 = tile * TILE;
            let width = out.len() / rows;
            for r in 0..rows {
                let row = &src[r * cols + c0..r * cols + c0 + width];
                for (dc, v) in row.iter().enumerate() {
                    out[dc * rows + r] = *v;
                }
            }
        });
}

/// Coefficients (normalized by `1/N^d`) of two real sample arrays using one
/// complex transform: `a + ib` is transformed and split by conjugate symmetry.
/// Coefficients outside `mask` are returned as zero.
pub(crate) fn forward_pair<T: Scalar>(
    grid: &Grid<T>,
    a: &[T],
    b: &[T],
    mask: Option<&[bool]>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let mut z: Vec<Complex<T>> = a.par_iter().zip(b.par_iter()).map(|(&x, &y)| Complex::new(x, y)).collect();
    transform(grid, &mut z, Direction::Forward);
    let half = T::lit(0.5) / T::from_usize_lossy(grid.len());
    let conj = grid.conjugate_table();
    z.par_iter()
        .zip(conj.par_iter())
        .enumerate()
        .map(|(i, (&zk, &c))| {
            if mask.is_some_and(|m| !m[i]) {
                return (Complex::zero(), Complex::zero());
            }
            let zc = z[c as usize].conj();
            let p = (zk + zc).scale(half);
            let q = (zk - zc).scale(half);
            (p, Complex::new(q.im, -q.re))
        })
        .unzip()
}

/// Physical samples of two real fields given their (Hermitian) coefficients,
/// keeping only coefficients inside `mask`.
pub(crate) fn inverse_pair<T: Scalar>(
    grid: &Grid<T>,
    a: &[Complex<T>],
    b: &[Complex<T>],
    mask: Option<&[bool]>,
) -> (Vec<T>, Vec<T>) {
    let mut z: Vec<Complex<T>> = a
        .par_iter()
        .zip(b.par_iter())
        .enumerate()
        .map(|(i, (&x, &y))| {
            if mask.is_some_and(|m| !m[i]) {
                Complex::zero()
            } else {
                Complex::new(x.re - y.im, x.im + y.re)
            }
        })
        .collect();
    transform(grid, &mut z, Direction::Inverse);
    z.par_iter().map(|c| (c.re, c.im)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(grid: &Grid<f64>, data: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = grid.points_per_axis();
        let tau = 2.0 * std::f64::consts::PI / n as f64;
        (0..grid.len())
            .map(|k| {
                let kp = grid.unravel(k);
                data.iter()
                    .enumerate()
                    .map(|(x, v)| {
                        let xp = grid.unravel(x);
                        let phase: f64 = (0..grid.dims()).map(|a| (kp[a] * xp[a]) as f64).sum();
                        v * Complex::from_polar(1.0, -tau * phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_2d_and_3d() {
        for dims in [2, 3] {
            let grid = Grid::<f64>::new(dims, 8, 1.0).unwrap();
            let data: Vec<Complex<f64>> = (0..grid.len())
                .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let expect = naive_dft(&grid, &data);
            let mut got = data.clone();
            transform(&grid, &mut got, Direction::Forward);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
            transform(&grid, &mut got, Direction::Inverse);
            let scale = grid.len() as f64;
            for (a, b) in got.iter().zip(&data) {
                assert!((a / scale - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn paired_transforms_match_single_ones() {
        let grid = Grid::<f64>::new(2, 16, 1.0).unwrap();
        let a: Vec<f64> = (0..grid.len()).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let b: Vec<f64> = (0..grid.len()).map(|i| ((i * 5) % 11) as f64 * 0.3).collect();
        let fa = crate::spectral::Field::from_samples(&grid, &a).unwrap();
        let fb = crate::spectral::Field::from_samples(&grid, &b).unwrap();
        let (pa, pb) = forward_pair(&grid, &a, &b, None);
        for i in 0..grid.len() {
            assert!((pa[i] - fa.coeffs()[i]).norm() < 1e-12);
            assert!((pb[i] - fb.coeffs()[i]).norm() < 1e-12);
        }
        let (ra, rb) = inverse_pair(&grid, fa.coeffs(), fb.coeffs(), None);
        for i in 0..grid.len() {
            assert!((ra[i] - a[i]).abs() < 1e-12 && (rb[i] - b[i]).abs() < 1e-12);
        }
    }
}
