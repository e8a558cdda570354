//! Closed-form bumps and the high/low frequency initial-data families.
//!
//! All data are centered at the box midpoint `(πM, …, πM)`; `y` below denotes
//! the centered coordinate `x − πM`. Velocity and magnetic fields are built as
//! the spectral rotation of the sampled stream functions, so they are
//! divergence-free to round-off. Pointwise closed forms are exposed separately.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::sobolev_norm;
use crate::quad;
use crate::scalar::Scalar;
use crate::smooth::Plateau;
use crate::spectral::{ops, Field, Grid, VecField};

/// `φ`, `Φ₁`, `Φ₂` with their first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpSet {
    /// Plateau `|x| ≤ 1/2`, support `[−1, 1]`.
    pub phi_shape: Plateau,
    /// Cutoff behind `Φ₂ = c` and `Φ₁ = x·c`.
    pub cap_shape: Plateau,
}

pub fn make_bumps() -> BumpSet {
    BumpSet {
        phi_shape: Plateau::new(0.5, 1.0),
        cap_shape: Plateau::new(1.0, 10.0),
    }
}

impl Default for BumpSet {
    fn default() -> Self {
        make_bumps()
    }
}

impl BumpSet {
    pub fn phi(&self, x: f64) -> f64 {
        self.phi_shape.value(x)
    }
    pub fn phi_d1(&self, x: f64) -> f64 {
        self.phi_shape.d1(x)
    }
    pub fn phi_d2(&self, x: f64) -> f64 {
        self.phi_shape.d2(x)
    }
    pub fn big_phi2(&self, x: f64) -> f64 {
        self.cap_shape.value(x)
    }
    pub fn big_phi2_d1(&self, x: f64) -> f64 {
        self.cap_shape.d1(x)
    }
    pub fn big_phi2_d2(&self, x: f64) -> f64 {
        self.cap_shape.d2(x)
    }
    pub fn big_phi1(&self, x: f64) -> f64 {
        x * self.cap_shape.value(x)
    }
    pub fn big_phi1_d1(&self, x: f64) -> f64 {
        self.cap_shape.value(x) + x * self.cap_shape.d1(x)
    }
    pub fn big_phi1_d2(&self, x: f64) -> f64 {
        2.0 * self.cap_shape.d1(x) + x * self.cap_shape.d2(x)
    }

    /// Support radius of `Φ₁`, `Φ₂` in the scaled variable.
    pub fn cap_radius(&self) -> f64 {
        self.cap_shape.outer
    }

    /// `‖φ‖_{L²(ℝ)}` by adaptive quadrature.
    pub fn phi_l2(&self) -> f64 {
        (2.0 * quad::integrate(|x| self.phi(x).powi(2), 0.0, 1.0, 1e-15, 8)).sqrt()
    }
}

/// One member of the data family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub d: usize,
    pub n: u32,
    pub omega: i32,
    pub delta: f64,
    pub s: f64,
}

impl FamilyParams {
    pub fn new(d: usize, n: u32, omega: i32, delta: f64, s: f64) -> Result<Self> {
        let p = FamilyParams { d, n, omega, delta, s };
        p.validate()?;
        Ok(p)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(2..=3).contains(&self.d) {
            out.push(format!("family dimension {} not in {{2, 3}}", self.d));
        }
        if self.n == 0 {
            out.push("family n must be positive".into());
        }
        if self.omega != 1 && self.omega != -1 {
            out.push(format!("omega {} must be +1 or -1", self.omega));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / 3.0) {
            out.push(format!("delta {} not in (0, 1/3)", self.delta));
        }
        if !(self.s > self.d as f64 / 2.0) {
            out.push(format!("s = {} must exceed d/2 = {}", self.s, self.d as f64 / 2.0));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(p.join("; ")))
        }
    }

    /// Problems specific to sampling on `grid`.
    pub fn grid_problems<T: Scalar>(&self, grid: &Grid<T>) -> Vec<String> {
        let mut out = Vec::new();
        if grid.dims() != self.d {
            out.push(format!("grid dimension {} differs from family dimension {}", grid.dims(), self.d));
        }
        let nm = self.n as f64 * grid.period_scale().as_f64();
        if (nm - nm.round()).abs() > 1e-9 {
            out.push(format!("n*M = {nm} is not an integer"));
        }
        out
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega as f64
    }

    /// Scale `n^δ` of the envelopes.
    pub fn width(&self) -> f64 {
        (self.n as f64).powf(self.delta)
    }

    pub fn flipped(&self) -> Self {
        FamilyParams {
            omega: -self.omega,
            ..*self
        }
    }

    pub fn with_n(&self, n: u32) -> Self {
        FamilyParams { n, ..*self }
    }

    /// Validate against `grid`, including the support check.
    pub fn check_on<T: Scalar>(&self, grid: &Grid<T>) -> Result<()> {
        let mut problems = self.problems();
        problems.extend(self.grid_problems(grid));
        if !problems.is_empty() {
            return Err(Error::InvalidParams(problems.join("; ")));
        }
        let radius = make_bumps().cap_radius() * self.width();
        let limit = grid.center().as_f64();
        if radius >= limit {
            return Err(Error::SupportOverflow { radius, limit });
        }
        Ok(())
    }
}

/// Pointwise closed forms in centered coordinates `y`.
pub mod closed_form {
    use super::{make_bumps, FamilyParams};

    fn amp_high(p: &FamilyParams) -> f64 {
        (p.n as f64).powf(-p.delta - p.s - 1.0)
    }

    fn amp_low(p: &FamilyParams) -> f64 {
        -p.omega_f64() * (p.n as f64).powf(-1.0 + p.delta)
    }

    fn third(p: &FamilyParams, y: [f64; 3]) -> f64 {
        if p.d == 3 {
            make_bumps().phi(y[2])
        } else {
            1.0
        }
    }

    pub fn stream_high(p: &FamilyParams, t: f64, y: [f64; 3]) -> f64 {
        let bs = make_bumps();
        let w = p.width();
        let ph = (p.n as f64 * y[1] - p.omega_f64() * t).sin();
        amp_high(p) * bs.phi(y[0] / w) * bs.phi(y[1] / w) * ph * third(p, y)
    }

    pub fn stream_high_dt(p: &FamilyParams, t: f64, y: [f64; 3]) -> f64 {
        let bs = make_bumps();
        let w = p.width();
        let ph = (p.n as f64 * y[1] - p.omega_f64() * t).cos();
        -p.omega_f64() * amp_high(p) * bs.phi(y[0] / w) * bs.phi(y[1] / w) * ph * third(p, y)
    }

    pub fn stream_low(p: &FamilyParams, y: [f64; 3]) -> f64 {
        let bs = make_bumps();
        let w = p.width();
        let z = if p.d == 3 { bs.big_phi2(y[2] / w) } else { 1.0 };
        amp_low(p) * bs.big_phi1(y[0] / w) * bs.big_phi2(y[1] / w) * z
    }

    /// `b^h(t, y)`.
    pub fn b_high(p: &FamilyParams, t: f64, y: [f64; 3]) -> [f64; 3] {
        let bs = make_bumps();
        let (n, w, a) = (p.n as f64, p.width(), amp_high(p));
        let arg = n * y[1] - p.omega_f64() * t;
        let (sn, cs) = arg.sin_cos();
        let (f1, f1d) = (bs.phi(y[0] / w), bs.phi_d1(y[0] / w) / w);
        let (f2, f2d) = (bs.phi(y[1] / w), bs.phi_d1(y[1] / w) / w);
        let z = third(p, y);
        [a * f1 * (f2d * sn + f2 * n * cs) * z, -a * f1d * f2 * sn * z, 0.0]
    }

    /// `∂_t b^h(t, y)`.
    pub fn dt_b_high(p: &FamilyParams, t: f64, y: [f64; 3]) -> [f64; 3] {
        let bs = make_bumps();
        let (n, w, a, om) = (p.n as f64, p.width(), amp_high(p), p.omega_f64());
        let arg = n * y[1] - om * t;
        let (sn, cs) = arg.sin_cos();
        let (f1, f1d) = (bs.phi(y[0] / w), bs.phi_d1(y[0] / w) / w);
        let (f2, f2d) = (bs.phi(y[1] / w), bs.phi_d1(y[1] / w) / w);
        let z = third(p, y);
        [a * om * f1 * (n * f2 * sn - f2d * cs) * z, a * om * f1d * f2 * cs * z, 0.0]
    }

    /// `b^l₀(y)`.
    pub fn b_low0(p: &FamilyParams, y: [f64; 3]) -> [f64; 3] {
        let bs = make_bumps();
        let (w, a) = (p.width(), amp_low(p));
        let z = if p.d == 3 { bs.big_phi2(y[2] / w) } else { 1.0 };
        [
            a * bs.big_phi1(y[0] / w) * bs.big_phi2_d1(y[1] / w) / w * z,
            -a * bs.big_phi1_d1(y[0] / w) / w * bs.big_phi2(y[1] / w) * z,
            0.0,
        ]
    }
}

fn sample<T: Scalar>(grid: &Grid<T>, f: impl Fn([f64; 3]) -> f64 + Sync) -> Field<T> {
    let c = grid.center().as_f64();
    let d = grid.dims();
    Field::from_fn(grid, |x| {
        let mut y = [0.0; 3];
        for a in 0..d {
            y[a] = x[a].as_f64() - c;
        }
        T::lit(f(y))
    })
}

/// Stream function `φ^h(t)` sampled on `grid`.
pub fn stream_high<T: Scalar>(params: &FamilyParams, t: f64, grid: &Grid<T>) -> Result<Field<T>> {
    params.check_on(grid)?;
    Ok(sample(grid, |y| closed_form::stream_high(params, t, y)))
}

pub fn stream_low<T: Scalar>(params: &FamilyParams, grid: &Grid<T>) -> Result<Field<T>> {
    params.check_on(grid)?;
    Ok(sample(grid, |y| closed_form::stream_low(params, y)))
}

/// `b^h(t) = rot φ^h(t)`.
pub fn b_high<T: Scalar>(params: &FamilyParams, t: f64, grid: &Grid<T>) -> Result<VecField<T>> {
    Ok(ops::curl_stream(&stream_high(params, t, grid)?))
}

/// `∂_t b^h(t) = rot ∂_tφ^h(t)`, exact in time.
pub fn dt_b_high<T: Scalar>(params: &FamilyParams, t: f64, grid: &Grid<T>) -> Result<VecField<T>> {
    params.check_on(grid)?;
    let psi = sample(grid, |y| closed_form::stream_high_dt(params, t, y));
    Ok(ops::curl_stream(&psi))
}

pub fn b_low0<T: Scalar>(params: &FamilyParams, grid: &Grid<T>) -> Result<VecField<T>> {
    Ok(ops::curl_stream(&stream_low(params, grid)?))
}

/// Family initial data `u₀ = b^l₀`, `b₀ = b^l₀ + b^h(0)`.
#[derive(Clone, Debug)]
pub struct FamilyData<T: Scalar> {
    pub params: FamilyParams,
    pub grid: Grid<T>,
    pub u0: VecField<T>,
    pub b0: VecField<T>,
    pub bh0: VecField<T>,
}

impl<T: Scalar> FamilyData<T> {
    pub fn bh_at(&self, t: f64) -> VecField<T> {
        b_high(&self.params, t, &self.grid).expect("parameters validated at construction")
    }

    pub fn dt_bh_at(&self, t: f64) -> VecField<T> {
        dt_b_high(&self.params, t, &self.grid).expect("parameters validated at construction")
    }
}

pub fn make_family<T: Scalar>(params: &FamilyParams, grid: &Grid<T>) -> Result<FamilyData<T>> {
    let u0 = b_low0(params, grid)?;
    let bh0 = b_high(params, 0.0, grid)?;
    let b0 = &u0 + &bh0;
    Ok(FamilyData {
        params: *params,
        grid: grid.clone(),
        u0,
        b0,
        bh0,
    })
}

/// The three scaled norms of a modulated envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeQuantities {
    /// `n^{−δ/2}‖φ(x/n^δ)‖_{H^s}`.
    pub plain: f64,
    /// `n^{−δ/2−s}‖φ(x/n^δ)cos(nx−α)‖_{H^s}`.
    pub cos_scaled: f64,
    /// `n^{−δ/2−s}‖φ(x/n^δ)sin(nx−α)‖_{H^s}`.
    pub sin_scaled: f64,
}

/// One-dimensional grid that resolves `φ(x/n^δ)e^{±inx}` comfortably.
pub fn envelope_grid(n: u32, delta: f64) -> Result<Grid<f64>> {
    let w = (n as f64).powf(delta);
    let m = ((4.0 * w / (2.0 * std::f64::consts::PI)).ceil() as usize + 1).max(2);
    let points = (2 * m * (2 * n as usize + 64)).next_power_of_two();
    Grid::new(1, points, m as f64)
}

/// Scaled norms for `profile` (supported in `[−support, support]`).
pub fn envelope_quantities_on(
    profile: &(dyn Fn(f64) -> f64 + Sync),
    support: f64,
    grid: &Grid<f64>,
    n: u32,
    delta: f64,
    s: f64,
    alpha: f64,
) -> Result<EnvelopeQuantities> {
    if grid.dims() != 1 {
        return Err(Error::InvalidParams("envelope norms need a one-dimensional grid".into()));
    }
    let w = (n as f64).powf(delta);
    let limit = grid.center();
    if support * w >= limit {
        return Err(Error::SupportOverflow {
            radius: support * w,
            limit,
        });
    }
    let nf = n as f64;
    let env = sample(grid, |y| profile(y[0] / w));
    let cos = sample(grid, |y| profile(y[0] / w) * (nf * y[0] - alpha).cos());
    let sin = sample(grid, |y| profile(y[0] / w) * (nf * y[0] - alpha).sin());
    let scale = nf.powf(-delta / 2.0);
    let hi = scale * nf.powf(-s);
    Ok(EnvelopeQuantities {
        plain: scale * sobolev_norm(&env, s),
        cos_scaled: hi * sobolev_norm(&cos, s),
        sin_scaled: hi * sobolev_norm(&sin, s),
    })
}

/// [`envelope_quantities_on`] for the family `φ` on [`envelope_grid`].
pub fn envelope_quantities(n: u32, delta: f64, s: f64, alpha: f64) -> Result<EnvelopeQuantities> {
    let bumps = make_bumps();
    let grid = envelope_grid(n, delta)?;
    envelope_quantities_on(&|x| bumps.phi(x), 1.0, &grid, n, delta, s, alpha)
}
