//! Lockstep solves of the `ω = ±1` family members and the per-step
//! quantities both the non-uniform and the difference diagnostics use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{make_family, FamilyParams};
use crate::lp::{sobolev_weights, weighted_diff_sq, weighted_sq, FilterBank};
use crate::solver::{solve_ensemble, MagneticRhs, SolveConfig};
use crate::spectral::Grid;

/// One time level of a `(+, −)` trajectory pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub n: u32,
    pub t: f64,
    /// `‖u₊ − u₋‖_{H^s}`.
    pub du_hs: f64,
    /// `‖b₊ − b₋‖_{H^s}`.
    pub db_hs: f64,
    pub u_plus_hs: f64,
    pub u_minus_hs: f64,
    pub b_plus_hs: f64,
    pub b_minus_hs: f64,
    /// `‖δu‖²_{B^{s−1}_{2,2}}`.
    pub du_bsm1_sq: f64,
    pub db_bsm1_sq: f64,
    /// `‖∇δu‖²_{B^{s−1}_{2,2}}`.
    pub grad_du_bsm1_sq: f64,
    /// `1 + ‖u₊‖²_{H^{s+1}} + ‖u₋‖²_{H^{s+1}} + ‖b₊‖²_{H^s} + ‖b₋‖²_{H^s}`.
    pub a_integrand: f64,
}

impl PairSample {
    /// `D(t) = ‖u₊ − u₋‖_{H^s} + ‖b₊ − b₋‖_{H^s}`.
    pub fn distance(&self) -> f64 {
        self.du_hs + self.db_hs
    }

    pub fn triangle_bound(&self) -> f64 {
        self.u_plus_hs + self.u_minus_hs + self.b_plus_hs + self.b_minus_hs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRun {
    pub n: u32,
    pub samples: Vec<PairSample>,
    /// `false` if a solve stopped before `t_end`; `samples` then ends at the last good step.
    pub completed: bool,
    pub failure: Option<String>,
}

/// Solve the full system from the `ω = +1` and `ω = −1` data of `params.with_n(n)`.
pub fn run_pair(base: &FamilyParams, n: u32, grid: &Grid<f64>, solve: &SolveConfig) -> Result<PairRun> {
    let plus = FamilyParams { omega: 1, ..base.with_n(n) };
    plus.validate()?;
    plus.check_on(grid)?;
    let mut config = solve.clone();
    config.magnetic_rhs = MagneticRhs::Full;
    config.store_states = false;
    config.validate()?;
    let fp = make_family(&plus, grid)?;
    let fm = make_family(&plus.flipped(), grid)?;
    let s = base.s;
    let w_s = sobolev_weights(grid, s);
    let w_s1 = sobolev_weights(grid, s + 1.0);
    let bank = FilterBank::new(grid);
    let w_b = bank.besov_weights(s - 1.0);
    let w_grad: Vec<f64> = w_b.iter().zip(grid.k_sq()).map(|(w, k)| w * k).collect();
    let mut samples = Vec::new();
    let data = [(fp.u0, fp.b0), (fm.u0, fm.b0)];
    let outcome = solve_ensemble(grid, &data, &config, |view| {
        let (p, m) = (&view.runs[0], &view.runs[1]);
        let (up, um) = (p.velocity_coeffs(), m.velocity_coeffs());
        let (bp, bm) = (p.magnetic_coeffs(), m.magnetic_coeffs());
        samples.push(PairSample {
            n,
            t: view.t,
            du_hs: weighted_diff_sq(grid, up, um, &w_s).sqrt(),
            db_hs: weighted_diff_sq(grid, bp, bm, &w_s).sqrt(),
            u_plus_hs: weighted_sq(grid, up, &w_s).sqrt(),
            u_minus_hs: weighted_sq(grid, um, &w_s).sqrt(),
            b_plus_hs: weighted_sq(grid, bp, &w_s).sqrt(),
            b_minus_hs: weighted_sq(grid, bm, &w_s).sqrt(),
            du_bsm1_sq: weighted_diff_sq(grid, up, um, &w_b),
            db_bsm1_sq: weighted_diff_sq(grid, bp, bm, &w_b),
            grad_du_bsm1_sq: weighted_diff_sq(grid, up, um, &w_grad),
            a_integrand: 1.0
                + weighted_sq(grid, up, &w_s1)
                + weighted_sq(grid, um, &w_s1)
                + weighted_sq(grid, bp, &w_s)
                + weighted_sq(grid, bm, &w_s),
        });
        Ok(())
    });
    match outcome {
        Ok(_) => Ok(PairRun {
            n,
            samples,
            completed: true,
            failure: None,
        }),
        Err(e @ (Error::BlowUp(_) | Error::Cfl { .. })) => Ok(PairRun {
            n,
            samples,
            completed: false,
            failure: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Group pair samples by `n`, sorted in time.
pub fn split_by_n(samples: &[PairSample]) -> Vec<(u32, Vec<PairSample>)> {
    let mut ns: Vec<u32> = samples.iter().map(|s| s.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut v: Vec<PairSample> = samples.iter().filter(|s| s.n == n).copied().collect();
            v.sort_by(|a, b| a.t.total_cmp(&b.t));
            (n, v)
        })
        .collect()
}
