//! Model parameters, derived quantities, and the arc layout of the
//! stationary density.

use alloc::format;

use crate::{Error, Result};

/// Largest supported gamma shape; the alpha system is p x p and untested
/// beyond desk scale.
pub const MAX_SHAPE: u32 = 16;

/// Largest supported arc count basis n = floor(v / m).
pub const MAX_ARCS: u32 = 10_000;

/// Relative tolerance for snapping the offset delta to zero.
const DELTA_SNAP: f64 = 1e-9;

/// User inputs for the discrete-time reservoir.
///
/// Inflow per step is Gamma(`p`, `mu`) (mean `p / mu`), the reservoir holds
/// at most `v`, and up to `m` is released each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Reservoir volume, v > 0.
    pub v: f64,
    /// Gamma shape, a positive integer.
    pub p: u32,
    /// Gamma rate, mu > 0.
    pub mu: f64,
    /// Target outflow per step, m > 0.
    pub m: f64,
}

impl ModelParams {
    pub fn new(v: f64, p: u32, mu: f64, m: f64) -> Result<Self> {
        let params = Self { v, p, mu, m };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParams(format!("v must be positive, got {}", self.v)));
        }
        if self.p < 1 {
            return Err(Error::InvalidParams(format!("p must be >= 1, got {}", self.p)));
        }
        if self.p > MAX_SHAPE {
            return Err(Error::InvalidParams(format!(
                "p = {} exceeds the supported maximum {MAX_SHAPE}",
                self.p
            )));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::InvalidParams(format!("m must be positive, got {}", self.m)));
        }
        Ok(())
    }

    /// Mean inflow per step, p / mu.
    pub fn mean_inflow(&self) -> f64 {
        self.p as f64 / self.mu
    }
}

/// Quantities derived from [`ModelParams`] that fix the arc layout and the
/// series coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Arc count basis, floor(v / m); the density has at most n + 1 arcs.
    pub n: u32,
    /// Offset v - m n, in [0, m); zero iff v is an integer multiple of m.
    pub delta: f64,
    /// Signed series coefficient (-1)^(p-1) mu^p exp(-mu m).
    pub lambda: f64,
    /// Upper summation limit of the depletion formula: n - 1 when delta = 0,
    /// n otherwise.
    pub kappa: u32,
}

/// Compute the derived quantities, snapping delta to exactly zero when
/// v / m is an integer to within relative tolerance 1e-9.
///
/// The snap matters: kappa and the arc layout change discontinuously at
/// delta = 0, and floating-point division rarely lands there exactly.
pub fn derive_params(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    let (v, m) = (params.v, params.m);
    let mut n = libm::floor(v / m) as i64;
    if n < 0 {
        n = 0;
    }
    let mut n = n as u32;
    let mut delta = v - m * n as f64;
    // floor can land one step off at representation boundaries
    if delta < 0.0 {
        n -= 1;
        delta = v - m * n as f64;
    } else if delta >= m {
        n += 1;
        delta = v - m * n as f64;
    }
    // n = 0 forces delta = v > 0; no snapping applies there
    if n >= 1 && delta < DELTA_SNAP * m {
        delta = 0.0;
    } else if m - delta < DELTA_SNAP * m {
        n += 1;
        delta = 0.0;
    }
    if n > MAX_ARCS {
        return Err(Error::InvalidParams(format!(
            "n = floor(v/m) = {n} exceeds the supported maximum {MAX_ARCS}"
        )));
    }
    let sign = if params.p % 2 == 1 { 1.0 } else { -1.0 };
    let lambda = sign * libm::pow(params.mu, params.p as f64) * libm::exp(-params.mu * m);
    let kappa = if delta == 0.0 { n - 1 } else { n };
    Ok(DerivedParams { n, delta, lambda, kappa })
}

impl DerivedParams {
    /// Index of the arc containing z, for 0 < z < v.
    ///
    /// Arc j is the open interval (max{(j-1)m + delta, 0}, min{jm + delta, v}).
    /// A point landing exactly on an interior boundary is assigned to the
    /// right-hand arc; the CDF is continuous there, so the choice only fixes
    /// a deterministic rule.
    pub fn arc_index(&self, params: &ModelParams, z: f64) -> Result<u32> {
        if !(z > 0.0 && z < params.v) {
            return Err(Error::Domain(format!(
                "arc index requested at z = {z} outside (0, {})",
                params.v
            )));
        }
        if self.delta > 0.0 && z < self.delta {
            return Ok(0);
        }
        let j = libm::floor((z - self.delta) / params.m) as i64 + 1;
        let lo = if self.delta > 0.0 { 0 } else { 1 };
        Ok(j.clamp(lo, self.n as i64) as u32)
    }
}

/// Rescale to unit outflow: {v, p, mu, m} -> {v/m, p, m mu, 1}.
///
/// The stationary distribution is invariant in the sense that depletion and
/// spillage probabilities are unchanged and CDF arguments scale by m.
pub fn rescale(params: &ModelParams) -> Result<ModelParams> {
    params.validate()?;
    ModelParams::new(params.v / params.m, params.p, params.m * params.mu, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn derived(v: f64, p: u32, mu: f64, m: f64) -> DerivedParams {
        derive_params(&ModelParams::new(v, p, mu, m).unwrap()).unwrap()
    }

    #[test]
    fn section1_derived() {
        let d = derived(1.0, 1, 2.0, 0.5);
        assert_eq!(d.n, 2);
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.kappa, 1);
        assert!((d.lambda - 2.0 * libm::exp(-1.0)).abs() < 1e-15);
    }

    #[test]
    fn offset_derived() {
        let d = derived(1.0, 1, 2.0, 0.4);
        assert_eq!(d.n, 2);
        assert!((d.delta - 0.2).abs() < 1e-12);
        assert_eq!(d.kappa, 2);
        assert!((d.lambda - 2.0 * libm::exp(-0.8)).abs() < 1e-15);
    }

    #[test]
    fn p2_lambda_sign() {
        let d = derived(1.0, 2, 4.0, 0.5);
        assert_eq!(d.n, 2);
        assert_eq!(d.kappa, 1);
        assert!((d.lambda + 16.0 * libm::exp(-2.0)).abs() < 1e-13);
    }

    #[test]
    fn delta_snaps_to_zero_from_above() {
        // v/m = 3 up to a 1e-12 perturbation from below: delta sits just
        // under m and must snap to zero with n incremented.
        let d = derived(1.0, 1, 2.0, 1.0 / 3.0 + 1e-13);
        assert_eq!(d.n, 3);
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.kappa, 2);
    }

    #[test]
    fn delta_snaps_to_zero_from_below() {
        let d = derived(1.0, 1, 2.0, 1.0 / 3.0 - 1e-13);
        assert_eq!(d.n, 3);
        assert_eq!(d.delta, 0.0);
    }

    #[test]
    fn arc_index_examples() {
        let p1 = ModelParams::new(1.0, 1, 2.0, 0.5).unwrap();
        let d1 = derive_params(&p1).unwrap();
        assert_eq!(d1.arc_index(&p1, 0.25).unwrap(), 1);
        assert_eq!(d1.arc_index(&p1, 0.75).unwrap(), 2);
        // exact boundary goes right
        assert_eq!(d1.arc_index(&p1, 0.5).unwrap(), 2);

        let p3 = ModelParams::new(1.0, 1, 2.0, 0.4).unwrap();
        let d3 = derive_params(&p3).unwrap();
        assert_eq!(d3.arc_index(&p3, 0.1).unwrap(), 0);
        assert_eq!(d3.arc_index(&p3, 0.3).unwrap(), 1);
        assert_eq!(d3.arc_index(&p3, 0.9).unwrap(), 2);
    }

    #[test]
    fn arc_index_rejects_endpoints() {
        let p = ModelParams::new(1.0, 1, 2.0, 0.5).unwrap();
        let d = derive_params(&p).unwrap();
        assert!(d.arc_index(&p, 0.0).is_err());
        assert!(d.arc_index(&p, 1.0).is_err());
        assert!(d.arc_index(&p, -0.5).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0.0, 1, 2.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 0, 2.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 17, 2.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1, -2.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1, 2.0, 0.0).is_err());
    }

    #[test]
    fn n_guard() {
        let p = ModelParams::new(1.0, 1, 2.0, 1e-6).unwrap();
        assert!(matches!(derive_params(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rescale_examples() {
        let p = ModelParams::new(1.0, 1, 2.0, 0.5).unwrap();
        let r = rescale(&p).unwrap();
        assert_eq!(r, ModelParams { v: 2.0, p: 1, mu: 1.0, m: 1.0 });

        let id = ModelParams::new(1.0, 2, 4.0, 1.0).unwrap();
        assert_eq!(rescale(&id).unwrap(), id);
    }
}
