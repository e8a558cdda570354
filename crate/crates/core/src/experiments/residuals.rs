//! Residuals left by the approximate solutions in the full system, and the
//! drift of their velocity.
//!
//! The approximate system is the full solver started from `(b^l₀, b^l₀)`;
//! its magnetic field is `b^l`. Products are formed on a grid with twice the
//! points per axis so that `b^h ⊗ b^h` is represented without aliasing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::RateFit;
use super::{on_step_grid, same_time};
use crate::error::{Error, Result};
use crate::families::{b_high, b_low0, dt_b_high, FamilyParams};
use crate::lp::{weighted_diff_sq, weighted_sq, FilterBank};
use crate::solver::{solve_ensemble, MagneticRhs, SolveConfig};
use crate::spectral::ops::{partial, resample_vec};
use crate::spectral::{Field, Grid, VecField};

/// `‖E‖` and `‖F‖` in `B^{s−1}_{2,2}` at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub n: u32,
    pub omega: i32,
    pub t: f64,
    pub e_norm: f64,
    pub f_norm: f64,
}

/// `‖u(t) − u(0)‖_{B^s_{2,2}}` of the approximate velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub n: u32,
    pub omega: i32,
    pub t: f64,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxRun {
    pub n: u32,
    pub omega: i32,
    pub residuals: Vec<ResidualSample>,
    pub drift: Vec<DriftSample>,
}

/// Evaluates `E` and `F` on a refined copy of the solver grid.
pub struct ResidualEvaluator {
    params: FamilyParams,
    fine: Grid<f64>,
    weights: Vec<f64>,
}

impl ResidualEvaluator {
    pub fn new(params: &FamilyParams, grid: &Grid<f64>) -> Result<Self> {
        let fine = Grid::new(grid.dims(), 2 * grid.points_per_axis(), grid.period_scale())?;
        params.check_on(&fine)?;
        let weights = FilterBank::new(&fine).besov_weights(params.s - 1.0);
        Ok(ResidualEvaluator {
            params: *params,
            fine,
            weights,
        })
    }

    pub fn fine_grid(&self) -> &Grid<f64> {
        &self.fine
    }

    /// `(‖E‖, ‖F‖)` for approximate velocity `u` and magnetic field `bl` at time `t`.
    pub fn norms(&self, u: &VecField<f64>, bl: &VecField<f64>, t: f64) -> Result<(f64, f64)> {
        let u = resample_vec(u, &self.fine)?;
        let bl = resample_vec(bl, &self.fine)?;
        let bh = b_high(&self.params, t, &self.fine)?;
        let dbh = dt_b_high(&self.params, t, &self.fine)?;
        self.norms_with(&u, &bl, &bh, &dbh)
    }

    /// Residual norms from explicit fields on the fine grid.
    pub fn norms_with(
        &self,
        u: &VecField<f64>,
        bl: &VecField<f64>,
        bh: &VecField<f64>,
        dbh: &VecField<f64>,
    ) -> Result<(f64, f64)> {
        for v in [u, bl, bh, dbh] {
            if v.grid() != &self.fine {
                return Err(Error::GridMismatch);
            }
        }
        let d = self.fine.dims();
        let us = u.samples();
        let bls = bl.samples();
        let bhs = bh.samples();

        // E_ij = −(bl_i bh_j + bh_i bh_j + bh_i bl_j); symmetric, so i ≤ j with doubled off-diagonals.
        let mut e_sq = 0.0;
        for i in 0..d {
            for j in i..d {
                let prod: Vec<f64> = (0..self.fine.len())
                    .into_par_iter()
                    .map(|p| -(bls[i][p] * bhs[j][p] + bhs[i][p] * bhs[j][p] + bhs[i][p] * bls[j][p]))
                    .collect();
                let c = Field::from_samples(&self.fine, &prod)?;
                let w = if i == j { 1.0 } else { 2.0 };
                e_sq += w * weighted_sq(&self.fine, &[c.into_coeffs()], &self.weights);
            }
        }

        // F_i = ∂_t bh_i + u_j ∂_j bh_i − bh_j ∂_j u_i
        let mut f_sq = 0.0;
        for i in 0..d {
            let mut acc = dbh.component(i).samples();
            for j in 0..d {
                let gb = partial(bh.component(i), j).samples();
                let gu = partial(u.component(i), j).samples();
                acc.par_iter_mut()
                    .zip(gb.par_iter().zip(gu.par_iter()))
                    .enumerate()
                    .for_each(|(p, (a, (gb, gu)))| *a += us[j][p] * gb - bhs[j][p] * gu);
            }
            let c = Field::from_samples(&self.fine, &acc)?;
            f_sq += weighted_sq(&self.fine, &[c.into_coeffs()], &self.weights);
        }
        Ok((e_sq.sqrt(), f_sq.sqrt()))
    }
}

/// Solve the approximate system for `params` and sample the residuals at `times`.
pub fn run_approximate(params: &FamilyParams, grid: &Grid<f64>, solve: &SolveConfig, times: &[f64]) -> Result<ApproxRun> {
    params.validate()?;
    params.check_on(grid)?;
    let t_end = times.iter().copied().fold(0.0f64, f64::max);
    let mut config = solve.clone();
    config.t_end = t_end;
    config.magnetic_rhs = MagneticRhs::LowOnly;
    config.store_states = false;
    config.validate()?;
    for &t in times {
        if !on_step_grid(t, config.dt) {
            return Err(Error::InvalidParams(format!(
                "sample time {t} is not a multiple of dt = {}",
                config.dt
            )));
        }
    }
    let evaluator = ResidualEvaluator::new(params, grid)?;
    let weights = FilterBank::new(grid).besov_weights(params.s);
    let bl0 = b_low0(params, grid)?;
    let u0: Vec<Vec<_>> = bl0.components().iter().map(|c| c.coeffs().to_vec()).collect();
    let mut residuals = Vec::new();
    let mut drift = Vec::new();
    let (n, omega) = (params.n, params.omega);
    solve_ensemble(grid, &[(bl0.clone(), bl0)], &config, |view| {
        let run = &view.runs[0];
        drift.push(DriftSample {
            n,
            omega,
            t: view.t,
            drift: weighted_diff_sq(grid, run.velocity_coeffs(), &u0, &weights).sqrt(),
        });
        if times.iter().any(|&s| same_time(s, view.t)) {
            let st = run.state();
            let (e_norm, f_norm) = evaluator.norms(&st.u, &st.b, view.t)?;
            residuals.push(ResidualSample {
                n,
                omega,
                t: view.t,
                e_norm,
                f_norm,
            });
        }
        Ok(())
    })?;
    Ok(ApproxRun {
        n,
        omega,
        residuals,
        drift,
    })
}

/// Log-log fit of a residual norm against `n` at one sample time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeFit {
    pub t: f64,
    pub fit: RateFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualsReport {
    pub delta: f64,
    pub s: f64,
    pub e_fits: Vec<TimeFit>,
    pub f_fits: Vec<TimeFit>,
    /// `−(1 + min(δ, 1−δ))`.
    pub e_exponent: f64,
    /// `−(1 + min(δ, 1−2δ))`.
    pub f_exponent: f64,
    /// Every fit within `0.2` of its exponent (`slope ≤ exponent + 0.2`).
    pub within_exponent: bool,
    /// Every fit has `r² ≥ 0.9`.
    pub conclusive: bool,
}

/// Fit `‖E‖`, `‖F‖` against `n` at every time in `times`.
pub fn residuals_report(samples: &[ResidualSample], delta: f64, s: f64, times: &[f64]) -> Result<ResidualsReport> {
    let mut ns: Vec<u32> = samples.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut e_fits = Vec::new();
    let mut f_fits = Vec::new();
    for &t in times {
        let mut xs = Vec::new();
        let mut es = Vec::new();
        let mut fs = Vec::new();
        for &n in &ns {
            let hit = samples
                .iter()
                .find(|r| r.n == n && same_time(r.t, t))
                .ok_or_else(|| Error::Mismatch(format!("no residual sample for n = {n} at t = {t}")))?;
            xs.push(n as f64);
            es.push(hit.e_norm);
            fs.push(hit.f_norm);
        }
        e_fits.push(TimeFit { t, fit: RateFit::fit(&xs, &es)? });
        f_fits.push(TimeFit { t, fit: RateFit::fit(&xs, &fs)? });
    }
    let e_exponent = -(1.0 + delta.min(1.0 - delta));
    let f_exponent = -(1.0 + delta.min(1.0 - 2.0 * delta));
    let within_exponent = e_fits.iter().all(|f| f.fit.slope <= e_exponent + 0.2)
        && f_fits.iter().all(|f| f.fit.slope <= f_exponent + 0.2);
    let conclusive = e_fits.iter().chain(&f_fits).all(|f| f.fit.is_conclusive());
    Ok(ResidualsReport {
        delta,
        s,
        e_fits,
        f_fits,
        e_exponent,
        f_exponent,
        within_exponent,
        conclusive,
    })
}

pub fn exp_residuals(
    base: &FamilyParams,
    n_list: &[u32],
    grid: &Grid<f64>,
    solve: &SolveConfig,
    times: &[f64],
) -> Result<(ResidualsReport, Vec<ApproxRun>)> {
    let runs = n_list
        .iter()
        .map(|&n| run_approximate(&base.with_n(n), grid, solve, times))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<ResidualSample> = runs.iter().flat_map(|r| r.residuals.iter().copied()).collect();
    Ok((residuals_report(&samples, base.delta, base.s, times)?, runs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub delta: f64,
    pub t: f64,
    pub fit: RateFit,
    /// Smallest `c` with `drift ≤ c·(n^{−2+2δ} + n^{−1−δ})` at `t` for every `n`.
    pub fitted_c: f64,
    /// `−(1+δ)`.
    pub exponent: f64,
    /// Per `n`: whether the drift is nondecreasing on `[0, t]`.
    pub monotone: Vec<(u32, bool)>,
}

/// Drift fit at time `t` from the per-step drift series of several `n`.
pub fn duhamel_report(drift: &[DriftSample], delta: f64, t: f64) -> Result<DuhamelReport> {
    let mut ns: Vec<u32> = drift.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut monotone = Vec::new();
    let mut fitted_c = 0.0f64;
    for &n in &ns {
        let mut series: Vec<&DriftSample> = drift.iter().filter(|r| r.n == n && r.t <= t + 1e-12).collect();
        series.sort_by(|a, b| a.t.total_cmp(&b.t));
        let at = series
            .iter()
            .find(|r| same_time(r.t, t))
            .ok_or_else(|| Error::Mismatch(format!("no drift sample for n = {n} at t = {t}")))?;
        let nf = n as f64;
        xs.push(nf);
        ys.push(at.drift);
        fitted_c = fitted_c.max(at.drift / (nf.powf(-2.0 + 2.0 * delta) + nf.powf(-1.0 - delta)));
        monotone.push((n, series.windows(2).all(|w| w[1].drift >= w[0].drift)));
    }
    Ok(DuhamelReport {
        delta,
        t,
        fit: RateFit::fit(&xs, &ys)?,
        fitted_c,
        exponent: -(1.0 + delta),
        monotone,
    })
}
