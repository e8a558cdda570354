//! Difference diagnostics `lhs(t) ≤ lhs(0)·e^{A(t)}` for a trajectory pair.

use serde::{Deserialize, Serialize};

use super::pairs::PairSample;
use crate::error::{Error, Result};

/// Constant of `A(t)` fitted on the `n ∈ {8, 16}` family pairs (`δ = 1/4`,
/// `s = 2`, `N = 1024`, `M = 8`, `dt = 0.01`, `t ≤ 1`) and frozen.
///
/// The fit is zero: on those pairs `lhs(t)` never exceeds `lhs(0)`, since the
/// difference is carried by the low-frequency part, which only diffuses.
pub const LOCKED_C: f64 = 0.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceDiagnostics {
    pub n: u32,
    pub c: f64,
    pub t: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Smallest `C` for which `lhs ≤ rhs` at every sample.
    pub c_fit: f64,
    pub holds: bool,
}

/// Running trapezoid integral of `ys` over `ts`.
fn cumulative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    for i in 0..ts.len() {
        if i > 0 {
            acc += 0.5 * (ts[i] - ts[i - 1]) * (ys[i] + ys[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `(t, lhs, ∫ integrand)` of one time-ordered pair series.
fn ingredients(series: &[PairSample]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if series.is_empty() {
        return Err(Error::Mismatch("empty pair series".into()));
    }
    if series.windows(2).any(|w| w[1].t <= w[0].t || w[1].n != w[0].n) {
        return Err(Error::Mismatch("pair series must be one n with increasing times".into()));
    }
    let ts: Vec<f64> = series.iter().map(|p| p.t).collect();
    let grad: Vec<f64> = series.iter().map(|p| p.grad_du_bsm1_sq).collect();
    let grad_int = cumulative(&ts, &grad);
    let lhs = series
        .iter()
        .zip(&grad_int)
        .map(|(p, g)| p.du_bsm1_sq + p.db_bsm1_sq + g)
        .collect();
    let integrand: Vec<f64> = series.iter().map(|p| p.a_integrand).collect();
    Ok((ts.clone(), lhs, cumulative(&ts, &integrand)))
}

/// Smallest `C ≥ 0` with `lhs(t) ≤ lhs(0)·e^{C·I(t)}` at every sample.
pub fn fit_c(series: &[PairSample]) -> Result<f64> {
    let (_, lhs, int) = ingredients(series)?;
    let l0 = lhs[0];
    let mut c = 0.0f64;
    for (l, i) in lhs.iter().zip(&int).skip(1) {
        if *l <= l0 {
            continue;
        }
        if l0 == 0.0 {
            return Ok(f64::INFINITY);
        }
        c = c.max((l / l0).ln() / i);
    }
    Ok(c)
}

pub fn difference_diagnostics(series: &[PairSample], c: f64) -> Result<DifferenceDiagnostics> {
    let (t, lhs, int) = ingredients(series)?;
    let a: Vec<f64> = int.iter().map(|i| c * i).collect();
    let rhs: Vec<f64> = a.iter().map(|a| lhs[0] * a.exp()).collect();
    let holds = lhs.iter().zip(&rhs).all(|(l, r)| l <= r);
    Ok(DifferenceDiagnostics {
        n: series[0].n,
        c,
        t,
        a,
        lhs,
        rhs,
        c_fit: fit_c(series)?,
        holds,
    })
}
