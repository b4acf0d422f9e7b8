//! Monte Carlo agreement: pooled million-sample chains must reproduce the
//! exact atoms and CDF of each golden model at fixed seeds.

use reservoir_core::sim::{compare, run_chain, SimConfig};
use reservoir_core::{build_distribution, ModelParams};

const MASS_TOL: f64 = 0.005;
const KS_TOL: f64 = 0.005;

fn check_agreement(v: f64, p: u32, mu: f64, m: f64, seed: u64) {
    let params = ModelParams::new(v, p, mu, m).unwrap();
    let dist = build_distribution(&params).unwrap();
    let config = SimConfig { seed, burn_in: 10_000, samples: 250_000, chains: 4 };
    let mut sim = run_chain(&params, &config).unwrap();
    assert_eq!(sim.total_samples(), 1_000_000);

    let dep_gap = (sim.empirical_mass_at_zero - dist.depletion_probability()).abs();
    let spill_gap = (sim.empirical_mass_at_v - dist.spillage_probability()).abs();
    assert!(dep_gap < MASS_TOL, "empty-reservoir mass off by {dep_gap:.2e} for m={m}");
    assert!(spill_gap < MASS_TOL, "full-reservoir mass off by {spill_gap:.2e} for m={m}");

    let ks = compare(&mut sim, &dist).unwrap();
    assert!(ks < KS_TOL, "KS distance {ks:.2e} for m={m}");
}

#[test]
fn exponential_inflow_half_outflow() {
    check_agreement(1.0, 1, 2.0, 0.5, 101);
}

#[test]
fn exponential_inflow_third_outflow() {
    check_agreement(1.0, 1, 2.0, 1.0 / 3.0, 102);
}

#[test]
fn exponential_inflow_offset_outflow() {
    check_agreement(1.0, 1, 2.0, 0.4, 103);
}

#[test]
fn two_stage_inflow_half_outflow() {
    check_agreement(1.0, 2, 4.0, 0.5, 104);
}
