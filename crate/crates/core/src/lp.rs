//! Nonhomogeneous Littlewood–Paley decomposition and the norms built on it.
//!
//! `χ(ξ) = θ((4/3 − |ξ|)/(1/3))`, `φ(ξ) = χ(ξ/2) − χ(ξ)`; block `j = −1` is `χ(D)`
//! and block `j ≥ 0` is `φ(2^{−j}D)`. Every wavenumber meets at most two
//! consecutive blocks, which the bank stores compactly.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::reduce::{ordered_bins, ordered_sum};
use crate::smooth;
use crate::spectral::{Field, Grid, VecField};

/// `χ(r)` for `r = |ξ| ≥ 0`.
pub fn chi<T: Scalar>(r: T) -> T {
    smooth::step(T::lit(4.0) - T::lit(3.0) * r)
}

/// `φ(r) = χ(r/2) − χ(r)`.
pub fn phi<T: Scalar>(r: T) -> T {
    chi(r / T::lit(2.0)) - chi(r)
}

/// Block index and weight pair of a radius: weight `w` on block `j`, `1 − w` on `j + 1`.
pub fn split_radius<T: Scalar>(r: T) -> (i32, T) {
    if r <= T::one() {
        return (-1, T::one());
    }
    let mut q = r.log2().floor().to_i32().unwrap_or(0);
    let two = T::lit(2.0);
    while two.powi(q) > r {
        q -= 1;
    }
    while two.powi(q + 1) <= r {
        q += 1;
    }
    let w = chi(r / two.powi(q));
    if w == T::zero() {
        (q, T::one())
    } else {
        (q - 1, w)
    }
}

/// Dyadic multipliers tabulated on one grid.
#[derive(Clone, Debug)]
pub struct FilterBank<T: Scalar> {
    grid: Grid<T>,
    j_max: i32,
    j_lo: Vec<i8>,
    w_lo: Vec<T>,
}

impl<T: Scalar> FilterBank<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let (j_lo, w_lo) = grid
            .k_sq()
            .par_iter()
            .map(|&kk| {
                let (j, w) = split_radius(kk.sqrt());
                (j as i8, w)
            })
            .unzip();
        let kmax = grid.max_wavenumber() * T::lit(4.0 / 3.0);
        let j_max = kmax.log2().ceil().to_i32().unwrap_or(0).max(0);
        FilterBank {
            grid: grid.clone(),
            j_max,
            j_lo,
            w_lo,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Largest block index that can be nonzero on this grid.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Weight of block `j` at coefficient `idx`.
    #[inline]
    pub fn weight(&self, j: i32, idx: usize) -> T {
        let lo = self.j_lo[idx] as i32;
        if j == lo {
            self.w_lo[idx]
        } else if j == lo + 1 {
            T::one() - self.w_lo[idx]
        } else {
            T::zero()
        }
    }

    /// Weight of `S_j = Σ_{j' < j} Δ_{j'}` at coefficient `idx`.
    #[inline]
    pub fn lowpass_weight(&self, j: i32, idx: usize) -> T {
        let lo = self.j_lo[idx] as i32;
        if lo + 1 < j {
            T::one()
        } else if lo + 1 == j {
            self.w_lo[idx]
        } else {
            T::zero()
        }
    }

    /// `χ` at every coefficient.
    pub fn chi_table(&self) -> Vec<T> {
        self.phi_table(-1)
    }

    /// Block `j` multiplier at every coefficient (`j = −1` gives `χ`).
    pub fn phi_table(&self, j: i32) -> Vec<T> {
        (0..self.grid.len()).map(|i| self.weight(j, i)).collect()
    }

    fn check(&self, f: &Field<T>, j: i32) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if j < -1 {
            return Err(Error::InvalidParams(format!("block index {j} < -1")));
        }
        Ok(())
    }

    /// Per-coefficient weight `Σ_j 4^{jσ} w_j²` of `‖·‖²_{B^σ_{2,2}}`.
    pub fn besov_weights(&self, sigma: f64) -> Vec<f64> {
        self.j_lo
            .par_iter()
            .zip(self.w_lo.par_iter())
            .map(|(&j, &w)| {
                let w = w.as_f64();
                let j = j as f64;
                w * w * 4f64.powf(j * sigma) + (1.0 - w) * (1.0 - w) * 4f64.powf((j + 1.0) * sigma)
            })
            .collect()
    }

    /// Per-block `‖Δ_j f‖²_{L²}` for `j = −1..=j_max`, summed over components.
    pub fn block_energies(&self, fields: &[Field<T>]) -> Vec<f64> {
        let nb = (self.j_max + 2) as usize;
        let vol = self.grid.volume().as_f64();
        let mut acc = vec![0.0f64; nb];
        for f in fields {
            assert!(f.grid() == &self.grid, "grid mismatch");
            let coeffs = f.coeffs();
            let part = ordered_bins(coeffs.len(), nb, |i, a| {
                let e = coeffs[i].norm_sqr().as_f64();
                if e != 0.0 {
                    let lo = self.j_lo[i] as i32;
                    let w = self.w_lo[i].as_f64();
                    a[(lo + 1) as usize] += w * w * e;
                    if w < 1.0 {
                        a[(lo + 2) as usize] += (1.0 - w) * (1.0 - w) * e;
                    }
                }
            });
            acc.iter_mut().zip(&part).for_each(|(x, y)| *x += y);
        }
        acc.iter_mut().for_each(|x| *x *= vol);
        acc
    }
}

/// Things whose norm is the ℓ² sum of per-component norms.
pub trait Components<T: Scalar> {
    fn fields(&self) -> &[Field<T>];
}

impl<T: Scalar> Components<T> for Field<T> {
    fn fields(&self) -> &[Field<T>] {
        std::slice::from_ref(self)
    }
}

impl<T: Scalar> Components<T> for VecField<T> {
    fn fields(&self) -> &[Field<T>] {
        self.components()
    }
}

pub fn lp_block<T: Scalar>(f: &Field<T>, j: i32, bank: &FilterBank<T>) -> Result<Field<T>> {
    bank.check(f, j)?;
    Ok(f.map_symbol(|i| bank.weight(j, i)))
}

/// `S_j f`; `lowpass(f, 0)` is `χ(D)f` and `lowpass(f, −1)` is zero.
pub fn lowpass<T: Scalar>(f: &Field<T>, j: i32, bank: &FilterBank<T>) -> Result<Field<T>> {
    bank.check(f, j)?;
    Ok(f.map_symbol(|i| bank.lowpass_weight(j, i)))
}

pub fn lowpass_vec<T: Scalar>(v: &VecField<T>, j: i32, bank: &FilterBank<T>) -> Result<VecField<T>> {
    let comps = v
        .components()
        .iter()
        .map(|c| lowpass(c, j, bank))
        .collect::<Result<Vec<_>>>()?;
    VecField::new(comps)
}

/// `(|Ω| Σ_k (1+|k|²)^s |f̂_k|²)^{1/2}`.
pub fn sobolev_norm<T: Scalar, F: Components<T> + ?Sized>(f: &F, s: f64) -> T {
    sobolev_norm_sq(f, s).sqrt()
}

pub fn sobolev_norm_sq<T: Scalar, F: Components<T> + ?Sized>(f: &F, s: f64) -> T {
    let fields = f.fields();
    let grid = fields[0].grid();
    let ksq = grid.k_sq();
    let sum: f64 = fields
        .iter()
        .map(|c| {
            let coeffs = c.coeffs();
            ordered_sum(coeffs.len(), |i| {
                let e = coeffs[i].norm_sqr().as_f64();
                if e == 0.0 {
                    0.0
                } else if s == 0.0 {
                    e
                } else {
                    (1.0 + ksq[i].as_f64()).powf(s) * e
                }
            })
        })
        .sum();
    T::lit(sum * grid.volume().as_f64())
}

/// `(1+|k|²)^σ` for every coefficient of `grid`.
pub fn sobolev_weights<T: Scalar>(grid: &Grid<T>, sigma: f64) -> Vec<f64> {
    grid.k_sq().par_iter().map(|&kk| (1.0 + kk.as_f64()).powf(sigma)).collect()
}

/// `|Ω| Σ_a Σ_k w_k |ĉ_{a,k}|²` over raw coefficient arrays.
pub fn weighted_sq<T: Scalar>(grid: &Grid<T>, comps: &[Vec<Complex<T>>], w: &[f64]) -> f64 {
    let sum: f64 = comps
        .iter()
        .map(|c| ordered_sum(c.len(), |i| w[i] * c[i].norm_sqr().as_f64()))
        .sum();
    sum * grid.volume().as_f64()
}

/// [`weighted_sq`] of the difference `a − b`.
pub fn weighted_diff_sq<T: Scalar>(grid: &Grid<T>, a: &[Vec<Complex<T>>], b: &[Vec<Complex<T>>], w: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "component count");
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| ordered_sum(x.len(), |i| w[i] * (x[i] - y[i]).norm_sqr().as_f64()))
        .sum();
    sum * grid.volume().as_f64()
}

/// `‖f‖_{L²}`.
pub fn l2_norm<T: Scalar, F: Components<T> + ?Sized>(f: &F) -> T {
    sobolev_norm(f, 0.0)
}

/// Maximum over samples of the pointwise Euclidean magnitude.
pub fn linf_norm<T: Scalar, F: Components<T> + ?Sized>(f: &F) -> T {
    let samples: Vec<Vec<T>> = f.fields().iter().map(Field::samples).collect();
    let n = samples[0].len();
    let max_sq = (0..n)
        .into_par_iter()
        .map(|i| samples.iter().map(|s| s[i].as_f64().powi(2)).sum::<f64>())
        .reduce(|| 0.0, f64::max);
    T::lit(max_sq.sqrt())
}

/// `ℓ^r` aggregation of `2^{js}·block_norm_j` for blocks listed from `j = −1`.
pub fn besov_from_blocks(energies: &[f64], s: f64, r: f64) -> (f64, Vec<(i32, f64)>) {
    let per_block: Vec<(i32, f64)> = energies
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let j = i as i32 - 1;
            (j, 2f64.powf(j as f64 * s) * e.sqrt())
        })
        .collect();
    let value = if r.is_infinite() {
        per_block.iter().fold(0.0f64, |m, &(_, v)| m.max(v))
    } else {
        per_block.iter().map(|&(_, v)| v.powf(r)).sum::<f64>().powf(1.0 / r)
    };
    (value, per_block)
}

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidParams(format!("Besov index r = {r} must lie in [1, inf]")));
    }
    Ok(())
}

/// `‖f‖_{B^s_{2,r}}` as a plain number.
pub fn besov_value<T: Scalar, F: Components<T> + ?Sized>(f: &F, s: f64, r: f64, bank: &FilterBank<T>) -> Result<f64> {
    check_r(r)?;
    if f.fields().iter().any(|c| c.grid() != bank.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(besov_from_blocks(&bank.block_energies(f.fields()), s, r).0)
}

pub fn besov_norm<T: Scalar, F: Components<T> + ?Sized>(f: &F, s: f64, r: f64, bank: &FilterBank<T>) -> Result<NormReport> {
    check_r(r)?;
    if f.fields().iter().any(|c| c.grid() != bank.grid()) {
        return Err(Error::GridMismatch);
    }
    let (value, per_block) = besov_from_blocks(&bank.block_energies(f.fields()), s, r);
    Ok(NormReport {
        kind: NormKind::Besov,
        s,
        r: Some(r),
        value,
        per_block: Some(per_block),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormKind {
    Hs,
    Besov,
    Linf,
    L2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub s: f64,
    #[serde(serialize_with = "ser_r")]
    pub r: Option<f64>,
    pub value: f64,
    pub per_block: Option<Vec<(i32, f64)>>,
}

fn ser_r<S: Serializer>(r: &Option<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(v) if v.is_infinite() => ser.serialize_str("inf"),
        Some(v) => ser.serialize_f64(*v),
        None => ser.serialize_none(),
    }
}

impl NormReport {
    pub fn sobolev<T: Scalar, F: Components<T> + ?Sized>(f: &F, s: f64) -> Self {
        NormReport {
            kind: NormKind::Hs,
            s,
            r: None,
            value: sobolev_norm(f, s).as_f64(),
            per_block: None,
        }
    }

    pub fn l2<T: Scalar, F: Components<T> + ?Sized>(f: &F) -> Self {
        NormReport {
            kind: NormKind::L2,
            s: 0.0,
            r: None,
            value: l2_norm(f).as_f64(),
            per_block: None,
        }
    }

    pub fn linf<T: Scalar, F: Components<T> + ?Sized>(f: &F) -> Self {
        NormReport {
            kind: NormKind::Linf,
            s: 0.0,
            r: None,
            value: linf_norm(f).as_f64(),
            per_block: None,
        }
    }
}

/// Extreme values over `|ξ| ∈ [0, r_max]` of `Σ_j w_j(ξ)² 4^{js} / (1+|ξ|²)^s`,
/// the ratio `‖·‖²_{B^s_{2,2}} / ‖·‖²_{H^s}` for a single wavenumber.
pub fn equivalence_band(s: f64, r_max: f64, samples: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..=samples {
        let r = r_max * i as f64 / samples as f64;
        let (j, w) = split_radius(r);
        let g = w * w * 4f64.powf(j as f64 * s) + (1.0 - w).powi(2) * 4f64.powf((j + 1) as f64 * s);
        let ratio = g / (1.0 + r * r).powf(s);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo.sqrt(), hi.sqrt())
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// `(s, c₁, c₂)` snapshot of the Besov/Sobolev equivalence band for this bank.
    const BAND: [(f64, f64, f64); 4] = [
        (0.0, 0.7071, 1.0),
        (1.0, 0.2985, 0.7764),
        (2.0, 0.1115, 0.6092),
        (3.5, 0.02359, 0.4292),
    ];

    fn random_field(grid: &Grid<f64>, seed: u64, kmax: f64) -> Field<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = Field::zeros(grid);
        let ksq = grid.k_sq().to_vec();
        for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
            if ksq[i] <= kmax * kmax {
                *c = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let samples = f.samples();
        Field::from_samples(grid, &samples).unwrap()
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(chi(0.0f64), 1.0);
        assert_eq!(phi(0.5f64), 0.0);
        assert_eq!(chi(1.0f64), 1.0);
        assert_eq!(phi(1.0f64), 0.0);
        assert_eq!(chi(4.0f64 / 3.0), 0.0);
        assert!((chi(7.0f64 / 6.0) - 0.5).abs() < 1e-15);
        assert_eq!(phi(8.0f64 / 3.0), 0.0);
        assert!((phi(2.0f64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partition_support_and_disjointness() {
        let grid = Grid::<f64>::new(2, 64, 2.0).unwrap();
        let bank = FilterBank::new(&grid);
        let tables: Vec<Vec<f64>> = (-1..=bank.j_max()).map(|j| bank.phi_table(j)).collect();
        for i in 0..grid.len() {
            let r = grid.k_sq()[i].sqrt();
            let total: f64 = tables.iter().map(|t| t[i]).sum();
            assert!((total - 1.0).abs() <= 1e-12);
            for (jj, t) in tables.iter().enumerate() {
                let j = jj as i32 - 1;
                assert!((0.0..=1.0).contains(&t[i]));
                if t[i] > 0.0 {
                    if j == -1 {
                        assert!(r <= 4.0 / 3.0);
                    } else {
                        let sc = 2f64.powi(j);
                        assert!(r >= 0.75 * sc && r <= 8.0 / 3.0 * sc, "j={j} r={r}");
                    }
                }
                for u in tables.iter().skip(jj + 2) {
                    assert_eq!(t[i] * u[i], 0.0);
                }
            }
            let direct = chi(r) + (0..=bank.j_max()).map(|j| phi(r / 2f64.powi(j))).sum::<f64>();
            assert!((direct - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn tables_match_direct_evaluation() {
        let grid = Grid::<f64>::new(2, 32, 1.5).unwrap();
        let bank = FilterBank::new(&grid);
        let chi_t = bank.chi_table();
        for j in 0..=bank.j_max() {
            let t = bank.phi_table(j);
            for i in 0..grid.len() {
                let r = grid.k_sq()[i].sqrt();
                assert!((t[i] - phi(r / 2f64.powi(j))).abs() < 1e-14);
                assert!((chi_t[i] - chi(r)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn blocks_reassemble_and_localize() {
        let grid = Grid::<f64>::new(2, 64, 1.0).unwrap();
        let bank = FilterBank::new(&grid);
        let f = random_field(&grid, 4, 30.0);
        let mut sum = Field::zeros(&grid);
        for j in -1..=bank.j_max() {
            let b = lp_block(&f, j, &bank).unwrap();
            for (i, c) in b.coeffs().iter().enumerate() {
                if c.norm() > 0.0 {
                    let r = grid.k_sq()[i].sqrt();
                    let sc = 2f64.powi(j);
                    assert!(j == -1 || (r >= 0.75 * sc && r <= 8.0 / 3.0 * sc));
                }
            }
            sum.axpy(1.0, &b);
        }
        assert!(sum.max_coeff_diff(&f) < 1e-12);
        let s3 = Field::from_fn(&grid, |x| (3.0 * x[0]).sin());
        assert!(lp_block(&s3, 5, &bank).unwrap().l2_norm() == 0.0);
        let c = Field::from_fn(&grid, |_| 2.0);
        assert!(lp_block(&c, -1, &bank).unwrap().max_coeff_diff(&c) < 1e-15);
        assert!(lp_block(&c, -2, &bank).is_err());
        let s2 = lowpass(&f, 2, &bank).unwrap();
        let mut manual = lp_block(&f, -1, &bank).unwrap();
        manual.axpy(1.0, &lp_block(&f, 0, &bank).unwrap());
        manual.axpy(1.0, &lp_block(&f, 1, &bank).unwrap());
        assert!(s2.max_coeff_diff(&manual) < 1e-14);
        assert!(lowpass(&f, -1, &bank).unwrap().l2_norm() == 0.0);
    }

    #[test]
    fn single_mode_sobolev_and_linf() {
        let grid = Grid::<f64>::new(1, 64, 1.0).unwrap();
        let f = Field::from_fn(&grid, |x| (3.0 * x[0]).sin());
        assert!((sobolev_norm(&f, 1.0) - (10.0 * PI).sqrt()).abs() < 1e-12 * (10.0 * PI).sqrt());
        let g2 = Grid::<f64>::new(2, 256, 1.0).unwrap();
        let f2 = Field::from_fn(&g2, |x| (3.0 * x[0]).sin());
        let l = linf_norm(&f2);
        assert!(l <= 1.0 + 1e-12 && l >= 1.0 - 1e-3);
        assert_eq!(sobolev_norm(&Field::zeros(&g2), 2.0), 0.0);
        assert_eq!(linf_norm(&Field::zeros(&g2)), 0.0);
    }

    #[test]
    fn single_block_besov_is_exact() {
        let grid = Grid::<f64>::new(2, 64, 1.0).unwrap();
        let bank = FilterBank::new(&grid);
        // |k| = 3 and |k| = √8 both sit on the plateau of block 1.
        let f = Field::from_fn(&grid, |x| (3.0 * x[0]).cos() + (2.0 * x[0] + 2.0 * x[1]).sin());
        let report = besov_norm(&f, 1.5, 2.0, &bank).unwrap();
        let expected = 2f64.powf(1.5) * f.l2_norm();
        assert!((report.value - expected).abs() < 1e-12 * expected, "{} vs {}", report.value, expected);
        let zero = besov_norm(&Field::zeros(&grid), 1.0, 2.0, &bank).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(besov_norm(&f, 1.0, 0.5, &bank).is_err());
        let inf = besov_norm(&f, 1.0, f64::INFINITY, &bank).unwrap();
        assert!((inf.value - 2.0 * f.l2_norm()).abs() < 1e-12);
        let json = serde_json::to_string(&inf).unwrap();
        assert!(json.contains("\"r\":\"inf\"") && json.contains("\"kind\":\"Besov\""), "{json}");
    }

    #[test]
    fn almost_orthogonality_on_random_fields() {
        let grid = Grid::<f64>::new(2, 32, 1.0).unwrap();
        let bank = FilterBank::new(&grid);
        for seed in 0..100 {
            let f = random_field(&grid, seed, 15.0);
            let total: f64 = bank.block_energies(f.fields()).iter().sum();
            let e = f.l2_norm().powi(2);
            assert!(total >= 0.5 * e * (1.0 - 1e-12) && total <= e * (1.0 + 1e-12));
        }
    }

    #[test]
    fn besov_sobolev_equivalence_band() {
        for &(s, c1, c2) in &BAND {
            let (lo, hi) = equivalence_band(s, 200.0, 200_000);
            assert!((lo - c1).abs() < 1e-4 * c1.max(1.0) && (hi - c2).abs() < 1e-4, "s={s}: {lo} {hi}");
        }
        let grid = Grid::<f64>::new(2, 64, 1.0).unwrap();
        let bank = FilterBank::new(&grid);
        for seed in 0..20 {
            let f = random_field(&grid, 100 + seed, 30.0);
            for &(s, c1, c2) in &BAND {
                let ratio = besov_value(&f, s, 2.0, &bank).unwrap() / sobolev_norm(&f, s);
                assert!(ratio >= c1 * (1.0 - 1e-3) && ratio <= c2 * (1.0 + 1e-3), "s={s} ratio={ratio}");
            }
        }
    }

    #[test]
    fn sobolev_scaling_trend() {
        let delta = 0.25;
        let s = 2.0;
        let mut prev: Option<f64> = None;
        for n in [16usize, 32, 64, 128] {
            let width = (n as f64).powf(delta);
            let m = 4usize;
            let points = 8 * n * m;
            let grid = Grid::<f64>::new(1, points, m as f64).unwrap();
            let c = grid.center();
            let f = Field::from_fn(&grid, |x| {
                let y = x[0] - c;
                smooth::step(2.0 - 2.0 * (y / width).abs()) * (n as f64 * y).sin()
            });
            let v = sobolev_norm(&f, s);
            if let Some(p) = prev {
                let ratio = v / p;
                let target = 2f64.powf(delta / 2.0 + s);
                assert!((ratio / target - 1.0).abs() < 0.1, "n={n}: {ratio} vs {target}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn single_precision_bank() {
        let grid = Grid::<f32>::new(2, 32, 1.0).unwrap();
        let bank = FilterBank::new(&grid);
        let f = Field::from_fn(&grid, |x| (3.0 * x[0]).cos());
        let v = besov_value(&f, 1.0, 2.0, &bank).unwrap();
        assert!((v - 2.0 * f64::from(f.l2_norm())).abs() < 1e-4);
    }

    #[test]
    fn raw_quadratic_forms_match_norms() {
        let grid = Grid::<f64>::new(2, 32, 2.0).unwrap();
        let bank = FilterBank::new(&grid);
        let f = random_field(&grid, 11, 6.0);
        let g = random_field(&grid, 12, 6.0);
        let raw = vec![f.coeffs().to_vec()];
        let b = besov_value(&f, 1.5, 2.0, &bank).unwrap();
        let q = weighted_sq(&grid, &raw, &bank.besov_weights(1.5));
        assert!((q.sqrt() - b).abs() <= 1e-12 * b);
        let h = sobolev_norm(&f, 2.0);
        let q = weighted_sq(&grid, &raw, &sobolev_weights(&grid, 2.0));
        assert!((q.sqrt() - h).abs() <= 1e-12 * h);
        let d = sobolev_norm(&(&f - &g), 1.0);
        let q = weighted_diff_sq(&grid, &raw, &[g.coeffs().to_vec()], &sobolev_weights(&grid, 1.0));
        assert!((q.sqrt() - d).abs() <= 1e-12 * d);
    }
}
