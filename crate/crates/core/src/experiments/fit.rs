use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares power law `y ≈ e^{intercept}·x^{slope}` fitted in log-log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits below this `r²` are reported as inconclusive.
pub const MIN_R2: f64 = 0.9;

impl RateFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidParams(format!(
                "rate fit needs paired samples, got {} xs and {} ys",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 3 {
            return Err(Error::InvalidParams(format!("rate fit needs at least 3 points, got {}", xs.len())));
        }
        if let Some((x, y)) = xs.iter().zip(ys).find(|(x, y)| !(x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)) {
            return Err(Error::InvalidParams(format!("rate fit needs positive finite samples, got ({x}, {y})")));
        }
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let m = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / m;
        let my = ly.iter().sum::<f64>() / m;
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidParams("rate fit needs at least two distinct x values".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
        Ok(RateFit {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slope,
            intercept,
            r2,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }

    pub fn is_conclusive(&self) -> bool {
        self.r2 >= MIN_R2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.25)).collect();
        let f = RateFit::fit(&xs, &ys).unwrap();
        assert!((f.slope + 1.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.predict(64.0) - 3.0 * 64f64.powf(-1.25)).abs() < 1e-12);
    }

    #[test]
    fn noisy_fit_has_lower_r2() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys = [1.0, 0.3, 0.5, 0.1];
        let f = RateFit::fit(&xs, &ys).unwrap();
        assert!(f.r2 < 0.9 && !f.is_conclusive());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RateFit::fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(RateFit::fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(RateFit::fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(RateFit::fit(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
