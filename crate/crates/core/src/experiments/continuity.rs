//! Continuous dependence: solutions from perturbed data approach the base
//! solution as the perturbation shrinks.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{make_family, FamilyParams};
use crate::lp::{sobolev_norm, sobolev_weights, weighted_diff_sq, weighted_sq, FilterBank};
use crate::solver::{solve_ensemble, SolveConfig};
use crate::spectral::ops::leray_project;
use crate::spectral::{Field, Grid, VecField};

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Divergence-free random field with Gaussian coefficients on `0 < |k| ≤ k_max`,
/// normalized to unit `H^s` norm.
pub fn random_solenoidal(grid: &Grid<f64>, k_max: f64, s: f64, rng: &mut ChaCha8Rng) -> Result<VecField<f64>> {
    let ksq = grid.k_sq();
    let conj = grid.conjugate_table();
    let mut comps = Vec::with_capacity(grid.dims());
    for _ in 0..grid.dims() {
        let raw: Vec<Complex<f64>> = ksq
            .iter()
            .map(|&kk| {
                if kk > 0.0 && kk <= k_max * k_max {
                    Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect();
        // Hermitian part, so the field is real.
        let coeffs = (0..raw.len())
            .map(|i| 0.5 * (raw[i] + raw[conj[i] as usize].conj()))
            .collect();
        comps.push(Field::from_coeffs(grid, coeffs)?);
    }
    let v = leray_project(&VecField::new(comps)?);
    let norm = sobolev_norm(&v, s);
    if norm == 0.0 {
        return Err(Error::InvalidParams(format!("no Fourier modes with 0 < |k| <= {k_max}")));
    }
    Ok(v.scaled(1.0 / norm))
}

/// One perturbation level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityLevel {
    pub k: usize,
    pub eps: f64,
    /// `‖u₀ⁿ−u₀^∞‖_{H^s} + ‖b₀ⁿ−b₀^∞‖_{H^s}`.
    pub data_dist: f64,
    /// `sup_{t≤T} (‖uⁿ−u^∞‖_{H^s} + ‖bⁿ−b^∞‖_{H^s})`.
    pub sol_dist: f64,
    /// `tail(j) + C·2^{j/2}·√data_dist` for each `j` of the report, with the fitted `C`.
    pub mollify_bound: Vec<f64>,
}

/// One time level of the distance series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySample {
    /// Perturbation level; the unperturbed control is `-1`.
    pub k: i32,
    pub t: f64,
    pub dist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub base_n: u32,
    pub seed: u64,
    pub levels: Vec<ContinuityLevel>,
    /// `sol_dist` of an unperturbed re-run.
    pub control_sol_dist: f64,
    pub j_list: Vec<i32>,
    /// `‖(Id−S_j)u₀^∞‖_{H^s} + ‖(Id−S_j)b₀^∞‖_{H^s}` for each `j`.
    pub tails: Vec<f64>,
    /// Smallest `C` with `min_j mollify_bound(j) ≥ sol_dist` at every level.
    pub fitted_c: f64,
    /// `sol_dist(ε_last) / sol_dist(ε_0)`.
    pub contraction: f64,
    pub sol_dist_decreasing: bool,
    pub data_dist_decreasing: bool,
    pub completed: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityConfig {
    pub base_n: u32,
    /// `ε₀`; level `k` uses `2^{−k}ε₀`.
    pub eps0: f64,
    pub levels: usize,
    /// Perturbation band `0 < |k| ≤ k_max`.
    pub k_max: f64,
    pub seed: u64,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        ContinuityConfig {
            base_n: 8,
            eps0: 1e-2,
            levels: 5,
            k_max: 4.0,
            seed: DEFAULT_SEED,
        }
    }
}

impl ContinuityConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            out.push(format!("eps0 must be positive, got {}", self.eps0));
        }
        if self.levels < 2 {
            out.push(format!("levels must be at least 2, got {}", self.levels));
        }
        if !(self.k_max.is_finite() && self.k_max > 0.0) {
            out.push(format!("k_max must be positive, got {}", self.k_max));
        }
        out
    }
}

/// `‖(Id−S_j)f‖_{H^s}` for `j` in `js`.
fn tails(bank: &FilterBank<f64>, fields: &[&VecField<f64>], s: f64, js: &[i32]) -> Vec<f64> {
    let grid = bank.grid();
    let ws = sobolev_weights(grid, s);
    js.iter()
        .map(|&j| {
            let w: Vec<f64> = (0..grid.len())
                .map(|i| (1.0 - bank.lowpass_weight(j, i)).powi(2) * ws[i])
                .collect();
            fields
                .iter()
                .map(|f| {
                    let raw: Vec<Vec<Complex<f64>>> = f.components().iter().map(|c| c.coeffs().to_vec()).collect();
                    weighted_sq(grid, &raw, &w).sqrt()
                })
                .sum()
        })
        .collect()
}

pub fn exp_continuity(
    base: &FamilyParams,
    config: &ContinuityConfig,
    grid: &Grid<f64>,
    solve: &SolveConfig,
) -> Result<(ContinuityReport, Vec<ContinuitySample>)> {
    let problems = config.problems();
    if !problems.is_empty() {
        return Err(Error::InvalidParams(problems.join("; ")));
    }
    let params = FamilyParams {
        omega: 1,
        ..base.with_n(config.base_n)
    };
    params.validate()?;
    params.check_on(grid)?;
    let s = params.s;
    let family = make_family(&params, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eta_u = random_solenoidal(grid, config.k_max, s, &mut rng)?;
    let eta_b = random_solenoidal(grid, config.k_max, s, &mut rng)?;

    let eps: Vec<f64> = (0..config.levels).map(|k| config.eps0 * 0.5f64.powi(k as i32)).collect();
    let mut data = vec![
        (family.u0.clone(), family.b0.clone()),
        (family.u0.clone(), family.b0.clone()),
    ];
    for &e in &eps {
        let mut u = family.u0.clone();
        let mut b = family.b0.clone();
        u.axpy(0.5 * e, &eta_u);
        b.axpy(0.5 * e, &eta_b);
        data.push((u, b));
    }
    let data_dist: Vec<f64> = data[2..]
        .iter()
        .map(|(u, b)| sobolev_norm(&(u - &family.u0), s) + sobolev_norm(&(b - &family.b0), s))
        .collect();

    let ws = sobolev_weights(grid, s);
    let mut series = Vec::new();
    let mut sup = vec![0.0f64; data.len()];
    let outcome = solve_ensemble(grid, &data, solve, |view| {
        let (u0, b0) = (view.runs[0].velocity_coeffs(), view.runs[0].magnetic_coeffs());
        for (r, run) in view.runs.iter().enumerate().skip(1) {
            let dist = weighted_diff_sq(grid, run.velocity_coeffs(), u0, &ws).sqrt()
                + weighted_diff_sq(grid, run.magnetic_coeffs(), b0, &ws).sqrt();
            sup[r] = sup[r].max(dist);
            series.push(ContinuitySample {
                k: r as i32 - 2,
                t: view.t,
                dist,
            });
        }
        Ok(())
    });
    let (completed, failure) = match outcome {
        Ok(_) => (true, None),
        Err(e @ (Error::BlowUp(_) | Error::Cfl { .. })) => (false, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    let bank = FilterBank::new(grid);
    let j_list: Vec<i32> = (0..=bank.j_max() + 1).collect();
    let tail = tails(&bank, &[&family.u0, &family.b0], s, &j_list);
    let sol: Vec<f64> = sup[2..].to_vec();
    let gain = |j: i32, dd: f64| 2f64.powf(j as f64 / 2.0) * dd.sqrt();
    let mut fitted_c = 0.0f64;
    for (dd, sd) in data_dist.iter().zip(&sol) {
        let need = j_list
            .iter()
            .zip(&tail)
            .map(|(&j, &tl)| ((sd - tl) / gain(j, *dd)).max(0.0))
            .fold(0.0f64, f64::max);
        fitted_c = fitted_c.max(need);
    }
    let levels = (0..config.levels)
        .map(|k| ContinuityLevel {
            k,
            eps: eps[k],
            data_dist: data_dist[k],
            sol_dist: sol[k],
            mollify_bound: j_list
                .iter()
                .zip(&tail)
                .map(|(&j, &tl)| tl + fitted_c * gain(j, data_dist[k]))
                .collect(),
        })
        .collect();
    let report = ContinuityReport {
        base_n: config.base_n,
        seed: config.seed,
        levels,
        control_sol_dist: sup[1],
        j_list,
        tails: tail,
        fitted_c,
        contraction: sol[sol.len() - 1] / sol[0],
        sol_dist_decreasing: sol.windows(2).all(|w| w[1] < w[0]),
        data_dist_decreasing: data_dist.windows(2).all(|w| w[1] < w[0]),
        completed,
        failure,
    };
    Ok((report, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_is_deterministic_and_solenoidal() {
        let grid = Grid::<f64>::new(2, 32, 2.0).unwrap();
        let a = random_solenoidal(&grid, 3.0, 2.0, &mut ChaCha8Rng::seed_from_u64(DEFAULT_SEED)).unwrap();
        let b = random_solenoidal(&grid, 3.0, 2.0, &mut ChaCha8Rng::seed_from_u64(DEFAULT_SEED)).unwrap();
        assert_eq!(a.max_coeff_diff(&b), 0.0);
        assert!(crate::spectral::ops::divergence_defect(&a) < 1e-14);
        assert!((sobolev_norm(&a, 2.0) - 1.0).abs() < 1e-13);
        let ksq = grid.k_sq();
        for c in a.components() {
            for (z, &kk) in c.coeffs().iter().zip(ksq) {
                if kk > 9.0 || kk == 0.0 {
                    assert_eq!(z.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn config_problems_aggregate() {
        let bad = ContinuityConfig {
            eps0: -1.0,
            levels: 1,
            k_max: 0.0,
            ..Default::default()
        };
        assert_eq!(bad.problems().len(), 3);
        assert!(ContinuityConfig::default().problems().is_empty());
    }
}
