//! Scalar-type-agnostic numeric kernels shared by the exact engines.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the deterministic core is generic over (f32 or f64).
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion from f64; total for every IEEE float type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to any IEEE float")
    }

    fn two() -> Self {
        Self::of(2.0)
    }

    fn ln_2() -> Self {
        Self::of(std::f64::consts::LN_2)
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

/// ln cosh(x) without overflow for large |x|.
pub fn ln_cosh<R: Real>(x: R) -> R {
    let a = x.abs();
    a + (-(a + a)).exp().ln_1p() - R::ln_2()
}

/// Streaming max-shifted accumulator for ln Σ exp(vᵢ).
///
/// Keeps the pair (running max m, Σ exp(vᵢ − m)) so that β up to 50 on 30
/// sites never overflows.
#[derive(Debug, Clone)]
pub struct LogSumExp<R: Real> {
    max: R,
    acc: R,
}

impl<R: Real> LogSumExp<R> {
    pub fn new() -> Self {
        LogSumExp {
            max: R::neg_infinity(),
            acc: R::zero(),
        }
    }

    pub fn add(&mut self, v: R) {
        if v <= self.max {
            self.acc = self.acc + (v - self.max).exp();
        } else {
            if self.max.is_finite() {
                self.acc = self.acc * (self.max - v).exp() + R::one();
            } else {
                self.acc = R::one();
            }
            self.max = v;
        }
    }

    pub fn total(&self) -> R {
        if self.max.is_finite() {
            self.max + self.acc.ln()
        } else {
            R::neg_infinity()
        }
    }
}

impl<R: Real> Default for LogSumExp<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Composite Simpson quadrature of `f` on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1) * 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
