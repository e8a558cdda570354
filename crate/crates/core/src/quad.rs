//! Adaptive Simpson quadrature for the one-dimensional reference integrals.

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` to absolute tolerance `tol`, split into `pieces` panels first so
/// that narrow features are not skipped by the initial sampling.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            refine(&f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, lo, hi), tol / pieces as f64, 40)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_known_integrals() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 4);
        assert!((v - 2.0).abs() < 1e-12);
        let g = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-13, 16);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
