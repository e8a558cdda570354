use serde::{Deserialize, Serialize};

use super::fit::RateFit;
use super::pairs::{run_pair, split_by_n, PairRun, PairSample};
use crate::error::{Error, Result};
use crate::families::{make_family, FamilyParams};
use crate::lp::sobolev_norm;
use crate::solver::SolveConfig;
use crate::spectral::Grid;

/// Window over which `D(t)/|sin t|` is minimized.
pub const SIN_WINDOW: (f64, f64) = (0.2, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonUniformEntry {
    pub n: u32,
    #[serde(rename = "D0")]
    pub d0: f64,
    /// `(t, D(t))`.
    #[serde(rename = "Dt")]
    pub dt: Vec<(f64, f64)>,
    pub sin_ratio: f64,
    pub eps_n: f64,
    pub eps_n_prime: f64,
    /// `D(t) ≤ ‖u₊‖+‖u₋‖+‖b₊‖+‖b₋‖` at every sample.
    pub triangle_ok: bool,
    pub completed: bool,
}

/// Initial `H^s` data distance and data size of one `n` (no solve).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDistance {
    pub n: u32,
    #[serde(rename = "D0")]
    pub d0: f64,
    /// `‖u₀‖_{H^s} + ‖b₀‖_{H^s}` of the `ω = +1` member.
    pub data_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonUniformReport {
    pub d: usize,
    pub delta: f64,
    pub s: f64,
    pub entries: Vec<NonUniformEntry>,
    pub initial: Vec<InitialDistance>,
    /// `D0` against `n` over `initial`.
    pub d0_fit: Option<RateFit>,
    /// Smallest `sin_ratio` over the solved `n`.
    pub c0: f64,
    /// `|sin_ratio(n₁) − sin_ratio(n₂)| / sin_ratio(n₂)` for the two largest solved `n`.
    pub c0_change: Option<f64>,
}

/// The error budgets `(ε_n, ε′_n)`.
pub fn error_budgets(d: usize, n: u32, delta: f64) -> (f64, f64) {
    let n = n as f64;
    if d == 3 {
        let e = (n.powf(-0.5 * delta) + n.powf(3.0 * delta - 1.0)).sqrt();
        (e, e + n.powf(1.5 * delta - 1.0))
    } else {
        let e = (n.powf(-delta) + n.powf(2.0 * delta - 1.0)).sqrt();
        (e, e + n.powf(delta - 1.0))
    }
}

pub fn initial_distance(base: &FamilyParams, n: u32, grid: &Grid<f64>) -> Result<InitialDistance> {
    let plus = FamilyParams { omega: 1, ..base.with_n(n) };
    let fp = make_family(&plus, grid)?;
    let fm = make_family(&plus.flipped(), grid)?;
    let s = base.s;
    Ok(InitialDistance {
        n,
        d0: sobolev_norm(&(&fp.u0 - &fm.u0), s) + sobolev_norm(&(&fp.b0 - &fm.b0), s),
        data_norm: sobolev_norm(&fp.u0, s) + sobolev_norm(&fp.b0, s),
    })
}

/// Report from pair series (one entry per `n`) and static initial distances.
pub fn nonuniform_report(
    d: usize,
    delta: f64,
    s: f64,
    samples: &[PairSample],
    completed: &[(u32, bool)],
    initial: &[InitialDistance],
) -> Result<NonUniformReport> {
    let mut entries = Vec::new();
    for (n, series) in split_by_n(samples) {
        let first = series.first().ok_or_else(|| Error::Mismatch(format!("empty series for n = {n}")))?;
        let window: Vec<f64> = series
            .iter()
            .filter(|p| p.t >= SIN_WINDOW.0 - 1e-12 && p.t <= SIN_WINDOW.1 + 1e-12)
            .map(|p| p.distance() / p.t.sin().abs())
            .collect();
        if window.is_empty() {
            return Err(Error::Mismatch(format!("no samples for n = {n} inside t ∈ [0.2, 1]")));
        }
        let (eps_n, eps_n_prime) = error_budgets(d, n, delta);
        entries.push(NonUniformEntry {
            n,
            d0: first.distance(),
            dt: series.iter().map(|p| (p.t, p.distance())).collect(),
            sin_ratio: window.iter().copied().fold(f64::INFINITY, f64::min),
            eps_n,
            eps_n_prime,
            triangle_ok: series.iter().all(|p| p.distance() <= p.triangle_bound() * (1.0 + 1e-12)),
            completed: completed.iter().find(|c| c.0 == n).is_none_or(|c| c.1),
        });
    }
    let d0_fit = if initial.len() >= 3 {
        let xs: Vec<f64> = initial.iter().map(|i| i.n as f64).collect();
        let ys: Vec<f64> = initial.iter().map(|i| i.d0).collect();
        Some(RateFit::fit(&xs, &ys)?)
    } else {
        None
    };
    let c0 = entries.iter().map(|e| e.sin_ratio).fold(f64::INFINITY, f64::min);
    let c0_change = match entries.as_slice() {
        [.., a, b] => Some((a.sin_ratio - b.sin_ratio).abs() / b.sin_ratio),
        _ => None,
    };
    Ok(NonUniformReport {
        d,
        delta,
        s,
        entries,
        initial: initial.to_vec(),
        d0_fit,
        c0,
        c0_change,
    })
}

/// Solve pairs for `solve_n` and compute static distances for `static_n`.
pub fn exp_nonuniform(
    base: &FamilyParams,
    solve_n: &[u32],
    static_n: &[u32],
    grid: &Grid<f64>,
    solve: &SolveConfig,
) -> Result<(NonUniformReport, Vec<PairRun>)> {
    let initial = static_n
        .iter()
        .map(|&n| initial_distance(base, n, grid))
        .collect::<Result<Vec<_>>>()?;
    let runs = solve_n
        .iter()
        .map(|&n| run_pair(base, n, grid, solve))
        .collect::<Result<Vec<_>>>()?;
    let report = report_from_runs(base, &runs, &initial)?;
    Ok((report, runs))
}

pub fn report_from_runs(base: &FamilyParams, runs: &[PairRun], initial: &[InitialDistance]) -> Result<NonUniformReport> {
    let samples: Vec<PairSample> = runs.iter().flat_map(|r| r.samples.iter().copied()).collect();
    let completed: Vec<(u32, bool)> = runs.iter().map(|r| (r.n, r.completed)).collect();
    nonuniform_report(base.d, base.delta, base.s, &samples, &completed, initial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets() {
        let (e, ep) = error_budgets(2, 16, 0.25);
        assert!((e - (0.5f64 + 0.5f64.powi(2)).sqrt()).abs() < 1e-15);
        assert!((ep - e - 0.125).abs() < 1e-15);
        let (e3, ep3) = error_budgets(3, 16, 0.25);
        assert!((e3 - (16f64.powf(-0.125) + 16f64.powf(-0.25)).sqrt()).abs() < 1e-15);
        assert!((ep3 - e3 - 16f64.powf(-0.625)).abs() < 1e-15);
    }

    fn sample(n: u32, t: f64, d: f64) -> PairSample {
        PairSample {
            n,
            t,
            du_hs: d / 2.0,
            db_hs: d / 2.0,
            u_plus_hs: d,
            u_minus_hs: d,
            b_plus_hs: d,
            b_minus_hs: d,
            du_bsm1_sq: 0.0,
            db_bsm1_sq: 0.0,
            grad_du_bsm1_sq: 0.0,
            a_integrand: 1.0,
        }
    }

    #[test]
    fn sin_ratio_uses_the_window() {
        let mut s: Vec<PairSample> = (0..=10).map(|k| sample(8, k as f64 * 0.1, 0.5 * (k as f64 * 0.1).sin())).collect();
        // Outside the window: ignored even though the ratio is tiny.
        s[1] = sample(8, 0.1, 1e-6);
        let r = nonuniform_report(2, 0.25, 2.0, &s, &[], &[]).unwrap();
        assert!((r.entries[0].sin_ratio - 0.5).abs() < 1e-12);
        assert!(r.entries[0].triangle_ok);
        assert!(r.d0_fit.is_none() && r.c0_change.is_none());
    }
}
