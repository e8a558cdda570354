use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::{envelope_quantities, make_bumps};

/// Scaled envelope norms at one `(n, α)` and their ratios to the limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub n: u32,
    pub alpha: f64,
    pub plain: f64,
    pub cos_scaled: f64,
    pub sin_scaled: f64,
    /// `plain / ‖φ‖_{L²}`.
    pub plain_ratio: f64,
    /// `cos_scaled / (‖φ‖_{L²}/√2)`.
    pub cos_ratio: f64,
    pub sin_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub delta: f64,
    pub s: f64,
    pub phi_l2: f64,
    pub rows: Vec<AsymptoticsRow>,
}

impl AsymptoticsReport {
    /// Rows at one `α`, in increasing `n`.
    pub fn at_alpha(&self, alpha: f64) -> Vec<AsymptoticsRow> {
        let mut rows: Vec<AsymptoticsRow> = self.rows.iter().filter(|r| r.alpha == alpha).copied().collect();
        rows.sort_by_key(|r| r.n);
        rows
    }

    pub fn row(&self, n: u32, alpha: f64) -> Option<AsymptoticsRow> {
        self.rows.iter().find(|r| r.n == n && r.alpha == alpha).copied()
    }
}

pub fn exp_asymptotics(n_list: &[u32], delta: f64, s: f64, alpha_list: &[f64]) -> Result<AsymptoticsReport> {
    let phi_l2 = make_bumps().phi_l2();
    let half = phi_l2 / 2f64.sqrt();
    let jobs: Vec<(u32, f64)> = n_list
        .iter()
        .flat_map(|&n| alpha_list.iter().map(move |&a| (n, a)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, alpha)| {
            let q = envelope_quantities(n, delta, s, alpha)?;
            Ok(AsymptoticsRow {
                n,
                alpha,
                plain: q.plain,
                cos_scaled: q.cos_scaled,
                sin_scaled: q.sin_scaled,
                plain_ratio: q.plain / phi_l2,
                cos_ratio: q.cos_scaled / half,
                sin_ratio: q.sin_scaled / half,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticsReport { delta, s, phi_l2, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_cover_the_sweep() {
        let r = exp_asymptotics(&[8, 16], 0.25, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(r.rows.len(), 4);
        let a0 = r.at_alpha(0.0);
        assert_eq!(a0.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 16]);
        let row = r.row(16, 1.0).unwrap();
        assert!((row.plain_ratio - row.plain / r.phi_l2).abs() < 1e-15);
        assert!(row.sin_scaled > 0.0 && row.cos_scaled > 0.0);
    }
}
