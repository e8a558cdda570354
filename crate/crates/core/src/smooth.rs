//! The C^∞ step `θ(t) = e(t) / (e(t) + e(1−t))`, `e(t) = exp(−1/t)` for `t > 0`,
//! and plateau functions built from it. All derivatives are closed forms.

use crate::scalar::Scalar;

#[inline]
fn e<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

#[inline]
fn e1<T: Scalar>(t: T) -> T {
    let v = e(t);
    if v == T::zero() {
        T::zero()
    } else {
        v / (t * t)
    }
}

#[inline]
fn e2<T: Scalar>(t: T) -> T {
    let v = e(t);
    if v == T::zero() {
        T::zero()
    } else {
        v * (T::one() - T::lit(2.0) * t) / t.powi(4)
    }
}

/// `θ(t)`: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn step<T: Scalar>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let p = e(t);
    p / (p + e(T::one() - t))
}

/// `θ'(t)`.
pub fn step_d1<T: Scalar>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let (p, q) = (e(t), e(s));
    let (p1, q1) = (e1(t), -e1(s));
    let d = p + q;
    (p1 * q - p * q1) / (d * d)
}

/// `θ''(t)`.
pub fn step_d2<T: Scalar>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let (p, q) = (e(t), e(s));
    let (p1, q1) = (e1(t), -e1(s));
    let (p2, q2) = (e2(t), e2(s));
    let d = p + q;
    let d1 = p1 + q1;
    let n1 = p1 * q - p * q1;
    let n1d = p2 * q - p * q2;
    (n1d * d - T::lit(2.0) * n1 * d1) / (d * d * d)
}

/// Even plateau: 1 on `|x| ≤ a`, 0 on `|x| ≥ b`, smooth monotone in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub inner: f64,
    pub outer: f64,
}

impl Plateau {
    pub const fn new(inner: f64, outer: f64) -> Self {
        Plateau { inner, outer }
    }

    #[inline]
    fn arg<T: Scalar>(&self, x: T) -> T {
        (T::lit(self.outer) - x.abs()) / T::lit(self.outer - self.inner)
    }

    pub fn value<T: Scalar>(&self, x: T) -> T {
        step(self.arg(x))
    }

    pub fn d1<T: Scalar>(&self, x: T) -> T {
        let sign = if x < T::zero() { T::one() } else { -T::one() };
        step_d1(self.arg(x)) * sign / T::lit(self.outer - self.inner)
    }

    pub fn d2<T: Scalar>(&self, x: T) -> T {
        let w = T::lit(self.outer - self.inner);
        step_d2(self.arg(x)) / (w * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_symmetry() {
        assert_eq!(step(0.0f64), 0.0);
        assert_eq!(step(1.0f64), 1.0);
        assert_eq!(step(0.5f64), 0.5);
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((step(t) + step(1.0 - t) - 1.0).abs() < 1e-15);
            assert!((step_d1(t) - step_d1(1.0 - t)).abs() < 1e-12);
            assert!(step_d1(t) >= 0.0);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for i in 1..50 {
            let t = i as f64 / 50.0;
            let h = 1e-5;
            let fd1 = (step(t + h) - step(t - h)) / (2.0 * h);
            let fd2 = (step_d1(t + h) - step_d1(t - h)) / (2.0 * h);
            assert!((fd1 - step_d1(t)).abs() < 1e-8, "t={t}");
            assert!((fd2 - step_d2(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn plateau_derivatives() {
        let p = Plateau::new(1.0, 3.0);
        assert_eq!(p.value(0.7f64), 1.0);
        assert_eq!(p.value(-3.2f64), 0.0);
        for x in [-2.5f64, -1.4, 1.1, 2.0, 2.9] {
            let h = 1e-5;
            let fd1 = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
            let fd2 = (p.d1(x + h) - p.d1(x - h)) / (2.0 * h);
            assert!((fd1 - p.d1(x)).abs() < 1e-8, "x={x}");
            assert!((fd2 - p.d2(x)).abs() < 1e-6, "x={x}");
        }
    }
}
