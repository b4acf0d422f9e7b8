//! Monte Carlo validation of the exact distribution by direct simulation of
//! the storage recurrence Z' = max{0, min{X + Z - m, v}}.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distribution::StationaryDistribution;
use crate::params::ModelParams;
use crate::{Error, Result};

/// Clamping in [`step`] makes endpoint hits exact; this tolerance is only a
/// guard against external callers feeding perturbed values.
const ATOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub burn_in: u64,
    /// Retained steps per chain.
    pub samples: u64,
    pub chains: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParams(format!(
                "samples must be positive, got {}",
                self.samples
            )));
        }
        if self.chains == 0 {
            return Err(Error::InvalidParams(format!(
                "chains must be positive, got {}",
                self.chains
            )));
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { seed: 0, burn_in: 10_000, samples: 1_000_000, chains: 1 }
    }
}

/// Pooled outcome of one or more chains.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub params: ModelParams,
    pub config: SimConfig,
    pub empirical_mass_at_zero: f64,
    pub empirical_mass_at_v: f64,
    /// Retained values strictly inside (0, v), sorted ascending.
    pub interior_samples: Vec<f64>,
    /// Kolmogorov-Smirnov distance to an analytic CDF, filled by [`compare`].
    pub ks_distance: Option<f64>,
}

impl SimulationResult {
    pub fn total_samples(&self) -> u64 {
        self.config.samples * self.config.chains
    }
}

fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    // (0, 1]: safe argument for ln
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

/// One Gamma(p, mu) draw as the sum of p independent Exponential(mu) draws.
pub fn sample_inflow(rng: &mut impl RngCore, p: u32, mu: f64) -> f64 {
    let mut total = 0.0;
    for _ in 0..p {
        total -= libm::log(uniform_open01(rng)) / mu;
    }
    total
}

/// One step of the storage recurrence.
pub fn step(z: f64, x: f64, m: f64, v: f64) -> f64 {
    (x + z - m).clamp(0.0, v)
}

/// Raw retained trajectory of a single chain, starting from Z = v/2.
///
/// Chain `chain_index` draws from its own deterministic RNG stream; results
/// are reproducible for a fixed seed regardless of how chains are scheduled.
pub fn run_single_chain(
    params: &ModelParams,
    config: &SimConfig,
    chain_index: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_index);
    let mut z = params.v / 2.0;
    for _ in 0..config.burn_in {
        let x = sample_inflow(&mut rng, params.p, params.mu);
        z = step(z, x, params.m, params.v);
    }
    let mut out = Vec::with_capacity(config.samples as usize);
    for _ in 0..config.samples {
        let x = sample_inflow(&mut rng, params.p, params.mu);
        z = step(z, x, params.m, params.v);
        out.push(z);
    }
    Ok(out)
}

/// Pool per-chain trajectories into a [`SimulationResult`]. The reduction is
/// order-independent: chains are keyed by index and interior samples sorted.
pub fn pool_chains(
    params: &ModelParams,
    config: &SimConfig,
    chains: &[Vec<f64>],
) -> SimulationResult {
    let v = params.v;
    let mut zeros: u64 = 0;
    let mut fulls: u64 = 0;
    let mut interior = Vec::new();
    for chain in chains {
        for &z in chain {
            if z.abs() <= ATOM_TOL {
                zeros += 1;
            } else if (z - v).abs() <= ATOM_TOL {
                fulls += 1;
            } else {
                interior.push(z);
            }
        }
    }
    interior.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let total = chains.iter().map(|c| c.len() as u64).sum::<u64>() as f64;
    SimulationResult {
        params: *params,
        config: *config,
        empirical_mass_at_zero: zeros as f64 / total,
        empirical_mass_at_v: fulls as f64 / total,
        interior_samples: interior,
        ks_distance: None,
    }
}

/// Run all chains sequentially and pool them.
pub fn run_chain(params: &ModelParams, config: &SimConfig) -> Result<SimulationResult> {
    params.validate()?;
    config.validate()?;
    let mut all = Vec::with_capacity(config.chains as usize);
    for c in 0..config.chains {
        all.push(run_single_chain(params, config, c)?);
    }
    Ok(pool_chains(params, config, &all))
}

/// Kolmogorov-Smirnov distance between the empirical CDF (atoms included)
/// and the analytic CDF, recorded into `sim` and returned.
///
/// The supremum is taken over the atom locations and all interior sample
/// points, with both CDFs evaluated from the right at atoms and the
/// pre-jump side of the empirical CDF checked at interior points.
pub fn compare(sim: &mut SimulationResult, dist: &StationaryDistribution) -> Result<f64> {
    if sim.params != dist.params {
        return Err(Error::Domain(format!(
            "simulation ran under {:?} but distribution was built for {:?}",
            sim.params, dist.params
        )));
    }
    let total = sim.total_samples() as f64;
    let zeros = sim.empirical_mass_at_zero * total;
    let mut worst = (sim.empirical_mass_at_zero - dist.depletion_probability()).abs();
    for (i, &x) in sim.interior_samples.iter().enumerate() {
        let analytic = dist.cdf(x)?;
        let above = (zeros + (i + 1) as f64) / total;
        let below = (zeros + i as f64) / total;
        worst = worst.max((above - analytic).abs()).max((below - analytic).abs());
    }
    let interior_top = (zeros + sim.interior_samples.len() as f64) / total;
    worst = worst.max((interior_top - dist.cdf_left_limit_at_capacity()).abs());
    sim.ks_distance = Some(worst);
    Ok(worst)
}
