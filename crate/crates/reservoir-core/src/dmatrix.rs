//! The p x p coefficient matrix of the alpha linear system and its
//! right-hand side.
//!
//! Entry (r, s) is a signed, lambda-weighted sum over segments
//! [qm, v], q = 0..n, of the integral
//!
//! ```text
//! I_q(r, s) = ∫_{qm}^{v} (t - qm)^{qp+s} (t + m)^{p-r-1}
//!             / ((qp+s)! (p-r-1)!) dt
//! ```
//!
//! evaluated in closed form: substituting u = t - qm and expanding
//! (u + (q+1)m)^{p-r-1} binomially reduces each segment to a finite sum of
//! monomial integrals. The expansion is validated against an adaptive
//! quadrature oracle in the test suite.

use alloc::format;
use alloc::vec::Vec;

use crate::dd::{self, Dd};
use crate::numeric::{binomial, pow_over_factorial, CompensatedSum};
use crate::params::{DerivedParams, ModelParams};
use crate::{Error, Result};

/// The series coefficient lambda = (-1)^{p-1} mu^p exp(-mu m) in extended
/// precision, for the cancellation-heavy summation paths.
pub(crate) fn lambda_dd(params: &ModelParams) -> Dd {
    let sign = if params.p % 2 == 1 { 1.0 } else { -1.0 };
    Dd::from_f64(params.mu)
        .powi(params.p)
        .mul(Dd::prod(-params.mu, params.m).exp())
        .mul_f64(sign)
}

/// Coefficient matrix of the alpha system, row-major, entry (r, s) = d_rs.
///
/// Entries are kept in double-double precision: the alpha solution must be
/// consistent with the matrix to well below f64 roundoff for the heavily
/// cancelling CDF series to come out accurate.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrix {
    pub p: usize,
    entries: Vec<Dd>,
}

impl DMatrix {
    /// Evaluate every entry for the given model.
    pub fn build(params: &ModelParams, derived: &DerivedParams) -> Result<Self> {
        let p = params.p as usize;
        let mut entries = Vec::with_capacity(p * p);
        for r in 0..p as u32 {
            for s in 0..p as u32 {
                entries.push(d_entry_full(params, derived, r, s)?);
            }
        }
        Ok(Self { p, entries })
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.entries[r * self.p + s].to_f64()
    }

    pub(crate) fn get_dd(&self, r: usize, s: usize) -> Dd {
        self.entries[r * self.p + s]
    }
}

fn check_index(params: &ModelParams, name: &str, idx: u32) -> Result<()> {
    if idx >= params.p {
        return Err(Error::Domain(format!(
            "{name} = {idx} out of range for p = {}",
            params.p
        )));
    }
    Ok(())
}

/// Closed-form value of the segment integral I_q(r, s), without the
/// (-lambda)^q weight or the global sign.
pub fn d_segment(params: &ModelParams, r: u32, s: u32, q: u32) -> Result<f64> {
    check_index(params, "r", r)?;
    check_index(params, "s", s)?;
    let p = params.p;
    let m = params.m;
    let len = params.v - q as f64 * m;
    if len <= 0.0 {
        return Ok(0.0);
    }
    let a = q * p + s;
    let c = p - r - 1;
    let c_factorial: f64 = (1..=c).map(|i| i as f64).product();
    // L^a / a! once, then L^{k+1} / (a+k+1) per binomial term
    let base = pow_over_factorial(len, a);
    let mut sum = CompensatedSum::new();
    let mut len_pow = len;
    for k in 0..=c {
        let outer = binomial(c, k) * libm::pow((q as f64 + 1.0) * m, (c - k) as f64) / c_factorial;
        sum.add(outer * base * len_pow / (a + k + 1) as f64);
        len_pow *= len;
    }
    Ok(sum.value())
}

/// Entry d_rs of the coefficient matrix.
pub fn d_entry(params: &ModelParams, derived: &DerivedParams, r: u32, s: u32) -> Result<f64> {
    Ok(d_entry_full(params, derived, r, s)?.to_f64())
}

/// Entry d_rs in double-double precision: the lambda-weighted segment sum
/// alternates in sign and can cancel by many digits.
pub(crate) fn d_entry_full(
    params: &ModelParams,
    derived: &DerivedParams,
    r: u32,
    s: u32,
) -> Result<Dd> {
    check_index(params, "r", r)?;
    check_index(params, "s", s)?;
    // global sign (-1)^{p+r-1}
    let sign = if (params.p + r) % 2 == 1 { 1.0 } else { -1.0 };
    let neg_lambda = lambda_dd(params).neg();
    let mut sum = dd::ZERO;
    let mut weight = dd::ONE;
    for q in 0..=derived.n {
        sum = sum.add(weight.mul(d_segment_dd(params, r, s, q)));
        weight = weight.mul(neg_lambda);
    }
    Ok(sum.mul_f64(sign))
}

fn d_segment_dd(params: &ModelParams, r: u32, s: u32, q: u32) -> Dd {
    let p = params.p;
    let len = Dd::from_f64(params.v).sub(Dd::prod(q as f64, params.m));
    if len.hi <= 0.0 {
        return dd::ZERO;
    }
    let a = q * p + s;
    let c = p - r - 1;
    let c_factorial: f64 = (1..=c).map(|i| i as f64).product();
    let base = len.pow_over_factorial(a);
    let shifted = Dd::prod(q as f64 + 1.0, params.m);
    let mut sum = dd::ZERO;
    let mut len_pow = len;
    for k in 0..=c {
        let outer = shifted.powi(c - k).mul_f64(binomial(c, k)).div_f64(c_factorial);
        sum = sum.add(outer.mul(base).mul(len_pow).div_f64((a + k + 1) as f64));
        len_pow = len_pow.mul(len);
    }
    sum
}

/// Right-hand side b_r = (-mu)^r exp(-mu(v+m)) sum_{s=0}^{p-r-1} [mu(v+m)]^s / s!.
pub fn rhs_entry(params: &ModelParams, r: u32) -> Result<f64> {
    Ok(rhs_entry_full(params, r)?.to_f64())
}

pub(crate) fn rhs_entry_full(params: &ModelParams, r: u32) -> Result<Dd> {
    check_index(params, "r", r)?;
    let x = Dd::sum(params.v, params.m).mul_f64(params.mu);
    let mut sum = dd::ZERO;
    let mut term = dd::ONE;
    for s in 0..(params.p - r) {
        sum = sum.add(term);
        term = term.mul(x).div_f64(s as f64 + 1.0);
    }
    Ok(sum.mul(x.neg().exp()).mul(Dd::from_f64(-params.mu).powi(r)))
}

/// Full right-hand side vector.
pub fn rhs_vector(params: &ModelParams) -> Result<Vec<f64>> {
    (0..params.p).map(|r| rhs_entry(params, r)).collect()
}

pub(crate) fn rhs_vector_full(params: &ModelParams) -> Result<Vec<Dd>> {
    (0..params.p).map(|r| rhs_entry_full(params, r)).collect()
}
