//! The exact stationary storage-level distribution: a mixed distribution
//! with point masses at empty (z = 0) and full (z = v) and a piecewise
//! smooth density on (0, v) made of at most n + 1 arcs.

use alloc::format;
use alloc::vec::Vec;

use crate::dd::{self, Dd};
use crate::dmatrix::{lambda_dd, rhs_vector_full, DMatrix};
use crate::linalg::{solve_alpha, AlphaVector};
use crate::numeric::{pow_over_factorial, CompensatedSum};
use crate::params::{derive_params, DerivedParams, ModelParams};
use crate::{Error, Result};

/// Immutable stationary distribution; all queries are pure.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub params: ModelParams,
    pub derived: DerivedParams,
    pub dmat: DMatrix,
    pub rhs: Vec<f64>,
    pub alpha: AlphaVector,
}

/// Derive parameters, assemble the coefficient matrix and right-hand side,
/// and solve for alpha.
pub fn build_distribution(params: &ModelParams) -> Result<StationaryDistribution> {
    let derived = derive_params(params)?;
    let dmat = DMatrix::build(params, &derived)?;
    let rhs_dd = rhs_vector_full(params)?;
    let alpha = solve_alpha(&dmat, &rhs_dd, lambda_dd(params))?;
    let rhs = rhs_dd.iter().map(|b| b.to_f64()).collect();
    Ok(StationaryDistribution { params: *params, derived, dmat, rhs, alpha })
}

impl StationaryDistribution {
    /// Inner double sum of the CDF formula: sum over r of
    /// alpha_r sum_{q=0}^{q_max} (-lambda)^q (v - qm - z)^{qp+r} / (qp+r)!.
    ///
    /// `shift` = 0 gives the CDF series; `shift` = 1 drops each exponent by
    /// one, which is the term-by-term z-derivative up to sign.
    fn series(&self, z: f64, q_max: u32, shift: u32) -> f64 {
        self.series_with_max(z, q_max, shift).0
    }

    /// Series value together with the largest absolute term, the basis of the
    /// cancellation estimate that gates the extended-precision fallback.
    fn series_with_max(&self, z: f64, q_max: u32, shift: u32) -> (f64, f64) {
        let p = self.params.p;
        let mut outer = CompensatedSum::new();
        let mut max_term: f64 = 0.0;
        for (r, &alpha_r) in self.alpha.alpha.iter().enumerate() {
            let r = r as u32;
            let mut inner = CompensatedSum::new();
            let mut weight = 1.0;
            for q in 0..=q_max {
                let exponent = q * p + r;
                if exponent >= shift {
                    // clamp tiny negative bases from boundary roundoff
                    let base = (self.params.v - q as f64 * self.params.m - z).max(0.0);
                    let term = weight * pow_over_factorial(base, exponent - shift);
                    max_term = max_term.max((alpha_r * term).abs());
                    inner.add(term);
                }
                weight *= -self.derived.lambda;
            }
            outer.add(alpha_r * inner.value());
        }
        (outer.value(), max_term)
    }

    /// CDF series in double-double precision, returning 1 - e^{mu(v-z)} S.
    fn cdf_series_dd(&self, z: f64, q_max: u32) -> f64 {
        let p = self.params.p;
        let neg_lambda = lambda_dd(&self.params).neg();
        let mut outer = dd::ZERO;
        for (r, &alpha_r) in self.alpha.alpha_dd.iter().enumerate() {
            let r = r as u32;
            let mut inner = dd::ZERO;
            let mut weight = dd::ONE;
            for q in 0..=q_max {
                let base = Dd::from_f64(self.params.v)
                    .sub(Dd::prod(q as f64, self.params.m))
                    .sub(Dd::from_f64(z));
                let base = if base.hi < 0.0 { dd::ZERO } else { base };
                inner = inner.add(weight.mul(base.pow_over_factorial(q * p + r)));
                weight = weight.mul(neg_lambda);
            }
            outer = outer.add(inner.mul(alpha_r));
        }
        let exponent = Dd::from_f64(self.params.v).sub(Dd::from_f64(z)).mul_f64(self.params.mu);
        dd::ONE.sub(exponent.exp().mul(outer)).to_f64()
    }

    /// 1 - e^{mu(v-z)} S(z), switching to extended precision when the f64
    /// cancellation estimate endangers the 1e-10 accuracy contract.
    fn cdf_value(&self, z: f64, q_max: u32) -> f64 {
        let scale = libm::exp(self.params.mu * (self.params.v - z));
        let (series, max_term) = self.series_with_max(z, q_max, 0);
        let raw = 1.0 - scale * series;
        if scale * max_term * 1e-15 > 1e-12 {
            return self.cdf_series_dd(z, q_max).clamp(0.0, 1.0);
        }
        // cancellation can leave a few-ulp excursion outside [0, 1]
        raw.clamp(0.0, 1.0)
    }

    /// Cumulative distribution function on [0, v], point masses included.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        let v = self.params.v;
        if !(0.0..=v).contains(&z) {
            return Err(Error::Domain(format!("cdf requested at z = {z} outside [0, {v}]")));
        }
        if z == 0.0 {
            return Ok(self.depletion_probability());
        }
        if z == v {
            return Ok(1.0);
        }
        let j = self.derived.arc_index(&self.params, z)?;
        let q_max = self.derived.n - j;
        Ok(self.cdf_value(z, q_max))
    }

    /// Density of the absolutely continuous part on (0, v).
    ///
    /// The point masses at 0 and v are reported separately by
    /// [`depletion_probability`](Self::depletion_probability) and
    /// [`spillage_probability`](Self::spillage_probability).
    pub fn pdf(&self, z: f64) -> Result<f64> {
        let v = self.params.v;
        if !(z > 0.0 && z < v) {
            return Err(Error::Domain(format!("pdf requested at z = {z} outside (0, {v})")));
        }
        let j = self.derived.arc_index(&self.params, z)?;
        let q_max = self.derived.n - j;
        let mu = self.params.mu;
        let scale = libm::exp(mu * (v - z));
        Ok(scale * (mu * self.series(z, q_max, 0) + self.series(z, q_max, 1)))
    }

    /// Point mass at z = 0: the probability of an empty reservoir, F(0).
    pub fn depletion_probability(&self) -> f64 {
        self.cdf_value(0.0, self.derived.kappa)
    }

    /// Point mass at z = v: the probability of a full reservoir, 1 - F(v-).
    pub fn spillage_probability(&self) -> f64 {
        self.alpha.spillage()
    }

    /// Left limit of the CDF at capacity, evaluated from the rightmost arc.
    /// Equals 1 - alpha_0 exactly.
    pub fn cdf_left_limit_at_capacity(&self) -> f64 {
        1.0 - self.series(self.params.v, 0, 0)
    }

    /// Breakpoints jm + delta lying strictly inside (0, v).
    pub fn interior_boundaries(&self) -> Vec<f64> {
        let d = &self.derived;
        let mut out = Vec::new();
        for j in 0..=d.n {
            let b = j as f64 * self.params.m + d.delta;
            if b > 0.0 && b < self.params.v - 1e-15 * self.params.v {
                out.push(b);
            }
        }
        out
    }

    /// Mass of the absolutely continuous part, by per-arc quadrature of the
    /// density. Together with the two point masses this must sum to one.
    pub fn interior_mass(&self, tol: f64) -> Result<f64> {
        let mut edges = self.interior_boundaries();
        edges.insert(0, 0.0);
        edges.push(self.params.v);
        let mut total = CompensatedSum::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid_shrink = 1e-12 * (b - a);
            let f = |z: f64| {
                let z = z.clamp(a + mid_shrink, b - mid_shrink);
                self.pdf(z).unwrap_or(0.0)
            };
            total.add(crate::numeric::adaptive_simpson(&f, a, b, tol)?);
        }
        Ok(total.value())
    }
}
