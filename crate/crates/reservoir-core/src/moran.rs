//! Continuous-time infinite-volume reservoir: gamma-process inflow at rate
//! rho, unit outflow while nonempty.
//!
//! The stationary law has an atom 1 - rho at zero and a density obtained by
//! inverting the Laplace transform (1 - rho) theta / (theta - ln(1 + rho theta)).
//! The density is evaluated here by quadrature of its integral
//! representation; the simulation side discretizes the gamma process and is
//! experimental: its only acceptance is agreement with the quadrature route.

use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::numeric::{adaptive_simpson, adaptive_simpson_with_depth};
use crate::{Error, Result};

/// Continuous-time model parameters plus quadrature settings for the
/// density's w-integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoranModel {
    /// Inflow rate, 0 < rho < 1.
    pub rho: f64,
    /// Truncation of the w-integral; the integrand decays like
    /// exp(-w (1/rho - 1 - ln(1/rho))), so the default leaves a tail
    /// below 1e-10.
    pub quad_upper: f64,
    /// Node budget for the adaptive quadrature.
    pub quad_points: u32,
}

impl MoranModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParams(format!("rho must lie in (0, 1), got {rho}")));
        }
        let decay = 1.0 / rho - 1.0 + libm::log(rho);
        Ok(Self { rho, quad_upper: 50.0 / decay, quad_points: 10_000 })
    }

    fn quad_depth(&self) -> u32 {
        // adaptive bisection depth matching the node budget; refinement is
        // local, so depth log2(points) plus headroom stays within budget
        (64 - u64::from(self.quad_points).leading_zeros() + 26).clamp(20, 48)
    }

    /// Integrate over [0, W], splitting at w = 1 so the kernel's derivative
    /// singularity at w = 0 gets its own refinement region.
    ///
    /// For small positive z the integrand develops a feature on the w ~ z
    /// scale; it is scale-free in w/z, so the head is integrated on the log
    /// axis where it stays resolvable at any z.
    fn w_integral<F: Fn(f64) -> f64>(&self, z: f64, f: F) -> Result<f64> {
        let depth = self.quad_depth();
        let split = 1.0_f64.min(self.quad_upper);
        let head = if z > 0.0 && z < 0.01 {
            // the w < z e^{-30} remainder is O(e^{-60}) of the head
            let s_lo = libm::log(z) - 30.0;
            let s_hi = libm::log(split);
            simpson_capped(
                &|s: f64| {
                    let w = libm::exp(s);
                    f(w) * w
                },
                s_lo,
                s_hi,
                5e-12,
                depth,
            )?
        } else {
            simpson_capped(&f, 0.0, split, 5e-12, depth)?
        };
        let tail = if self.quad_upper > split {
            simpson_capped(&f, split, self.quad_upper, 5e-12, depth)?
        } else {
            0.0
        };
        Ok(head + tail)
    }

    /// ln of the kernel g(z, w) = (z+w)^{w-1} exp(-(z+w)/rho) / (rho^w Gamma(w)).
    fn kernel(&self, z: f64, w: f64) -> f64 {
        if w == 0.0 {
            // limit: 1/Gamma(w) vanishes linearly, w^{w-1} supplies 1/w at z = 0
            return if z == 0.0 { 1.0 } else { 0.0 };
        }
        libm::exp(
            (w - 1.0) * libm::log(z + w)
                - (z + w) / self.rho
                - w * libm::log(self.rho)
                - libm::lgamma(w),
        )
    }

    /// Point mass at z = 0.
    pub fn point_mass(&self) -> f64 {
        1.0 - self.rho
    }

    /// Stationary density at z > 0, by quadrature of the analytically
    /// differentiated kernel.
    pub fn daniels_pdf(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!(
                "density defined for z > 0 only, got {z}; the atom at 0 is point_mass()"
            )));
        }
        let integral =
            self.w_integral(z, |w| self.kernel(z, w) * ((w - 1.0) / (z + w) - 1.0 / self.rho))?;
        Ok(-(1.0 - self.rho) * integral)
    }

    /// Stationary CDF (atom included): F(z) = 1 - (1-rho) Int_0^inf g(z, w) dw.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        if z < 0.0 {
            return Err(Error::Domain(format!("cdf requested at z = {z} < 0")));
        }
        let integral = self.w_integral(z, |w| self.kernel(z, w))?;
        Ok(1.0 - (1.0 - self.rho) * integral)
    }

    /// Int_0^inf e^{-theta z} f(z) dz. The density has a logarithmic
    /// singularity at z = 0; substituting z = e^{-u} on the head interval
    /// turns it into a smooth, exponentially decaying integrand.
    fn weighted_density_integral(&self, theta: f64) -> Result<f64> {
        // a density evaluation failure inside a quadrature closure cannot
        // return Err; record it and report after integrating
        let failed = core::cell::Cell::new(false);
        let pdf = |z: f64| {
            self.daniels_pdf(z).unwrap_or_else(|_| {
                failed.set(true);
                0.0
            })
        };
        let z0 = 0.5;
        let head = adaptive_simpson(
            &|u: f64| {
                let z = libm::exp(-u);
                libm::exp(-theta * z) * pdf(z) * z
            },
            libm::log(1.0 / z0),
            40.0,
            1e-9,
        )?;
        let mut total = head;
        let mut lo = z0;
        loop {
            let hi = lo + 1.0;
            let chunk =
                adaptive_simpson(&|z: f64| libm::exp(-theta * z) * pdf(z), lo, hi, 1e-9)?;
            total += chunk;
            lo = hi;
            if chunk.abs() < 1e-10 || lo > 400.0 {
                break;
            }
        }
        if failed.get() {
            return Err(Error::Numerical(format!(
                "density evaluation failed inside the transform integral at theta = {theta}"
            )));
        }
        Ok(total)
    }

    /// Mass of the density part, Int_0^inf f(z) dz; together with the atom
    /// this must come to one.
    pub fn density_mass(&self) -> Result<f64> {
        self.weighted_density_integral(0.0)
    }

    /// Numeric Laplace transform of the stationary law: atom plus the
    /// exponentially weighted density integral.
    pub fn laplace_transform(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Err(Error::Domain(format!("transform requires theta > 0, got {theta}")));
        }
        Ok(self.point_mass() + self.weighted_density_integral(theta)?)
    }
}

/// Closed-form Laplace transform of the stationary law.
pub fn laplace_transform_exact(rho: f64, theta: f64) -> f64 {
    (1.0 - rho) * theta / (theta - libm::log(1.0 + rho * theta))
}

fn simpson_capped<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    adaptive_simpson_with_depth(f, a, b, tol, depth)
}

fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

/// One Gamma(shape, scale) draw for fractional shape in (0, 1), by the
/// Ahrens-Dieter acceptance-rejection scheme; exact, not approximate.
fn sample_gamma_fractional(rng: &mut impl RngCore, shape: f64, scale: f64) -> f64 {
    debug_assert!(shape > 0.0 && shape < 1.0);
    let b = 1.0 + shape * libm::exp(-1.0);
    loop {
        let u1 = uniform_open01(rng);
        let u2 = uniform_open01(rng);
        let p = b * u1;
        if p <= 1.0 {
            let x = libm::pow(p, 1.0 / shape);
            if u2 <= libm::exp(-x) {
                return x * scale;
            }
        } else {
            let x = -libm::log((b - p) / shape);
            if u2 <= libm::pow(x, shape - 1.0) {
                return x * scale;
            }
        }
    }
}

/// One Gamma(shape, scale) draw for any shape > 0: integer part as a sum of
/// exponentials, fractional part via rejection.
pub fn sample_gamma(rng: &mut impl RngCore, shape: f64, scale: f64) -> f64 {
    let whole = libm::floor(shape) as u64;
    let frac = shape - whole as f64;
    let mut total = 0.0;
    for _ in 0..whole {
        total -= libm::log(uniform_open01(rng));
    }
    if frac > 0.0 {
        total += sample_gamma_fractional(rng, frac, 1.0);
    }
    total * scale
}

/// Discretized simulation of the continuous-time reservoir: per step of
/// length dt the inflow increment is Gamma(dt, rho)-distributed (so the
/// accumulated inflow over (0, t] is Gamma(t, rho), mean rho t) and the
/// level updates as Z <- max{0, Z + dX - dt}.
///
/// The first tenth of the horizon is discarded as burn-in. Experimental:
/// the discretization is validated only against the quadrature route.
pub fn simulate_moran(
    model: &MoranModel,
    horizon: f64,
    dt: f64,
    rng: &mut impl RngCore,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(horizon > dt) {
        return Err(Error::InvalidParams(format!(
            "need 0 < dt < horizon, got dt = {dt}, horizon = {horizon}"
        )));
    }
    let steps = libm::floor(horizon / dt) as u64;
    let burn_in = steps / 10;
    let mut z = 0.0;
    let mut out = Vec::with_capacity((steps - burn_in) as usize);
    for i in 0..steps {
        let dx = sample_gamma(rng, dt, model.rho);
        z = (z + dx - dt).max(0.0);
        if i >= burn_in {
            out.push(z);
        }
    }
    Ok(out)
}

/// KS distance between the empirical CDF of `samples` and the quadrature
/// CDF, evaluated on the atom plus `grid` interior points.
pub fn ks_against_cdf(model: &MoranModel, samples: &mut [f64], grid: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain(format!("no samples to compare (grid = {grid})")));
    }
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = samples.len() as f64;
    let max = samples[samples.len() - 1];
    let mut worst: f64 = 0.0;
    for i in 0..=grid {
        let z = max * i as f64 / grid as f64;
        let analytic = model.cdf(z)?;
        // rank = #{samples <= z}
        let rank = samples.partition_point(|&s| s <= z) as f64;
        worst = worst.max((rank / n - analytic).abs());
    }
    Ok(worst)
}
