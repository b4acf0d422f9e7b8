//! Shared numeric kernels: power-over-factorial terms, compensated
//! summation, and adaptive Simpson quadrature.

use alloc::string::String;
use alloc::format;

use crate::{Error, Result};

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln(k!) exactly for small k, via lgamma otherwise.
pub fn ln_factorial(k: u32) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// x^k / k! for x >= 0, with the 0^0 = 1 convention.
///
/// Terms with k > 30 are accumulated as exp(k ln x - ln k!) to avoid
/// overflow of the numerator or denominator separately.
pub fn pow_over_factorial(x: f64, k: u32) -> f64 {
    debug_assert!(x >= 0.0);
    if k == 0 {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if k > 30 {
        return libm::exp(k as f64 * libm::log(x) - ln_factorial(k));
    }
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= x / i as f64;
    }
    acc
}

/// Binomial coefficient C(n, k) as f64; n stays at desk scale (<= 16).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// Recursion depth is bounded; exceeding it reports a numerical error rather
/// than returning a silently inaccurate value.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_simpson_with_depth(f, a, b, tol, 48)
}

/// [`adaptive_simpson`] with an explicit bisection depth cap.
pub fn adaptive_simpson_with_depth<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::Domain(String::from("quadrature interval reversed")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature failed to converge on [{a}, {b}]"
        )));
    }
    let lv = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}
