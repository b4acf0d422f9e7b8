//! Outflow optimization for the exponential-inflow unit reservoir, checked
//! against published values and brute-force grid oracles.

use reservoir_core::optimize::{crossover_outflow, minimize_sum};
use reservoir_core::{build_distribution, ModelParams};

const V: f64 = 1.0;
const P: u32 = 1;
const MU: f64 = 2.0;
const GRID: usize = 10_000;

fn probabilities(m: f64) -> (f64, f64) {
    let dist = build_distribution(&ModelParams::new(V, P, MU, m).unwrap()).unwrap();
    (dist.spillage_probability(), dist.depletion_probability())
}

#[test]
fn crossover_matches_published_value() {
    let r = crossover_outflow(V, P, MU, (0.3, 0.6)).unwrap();
    assert!((r.m_star - 0.44276).abs() < 5e-6, "crossover m* = {}", r.m_star);
    assert!((r.objective_value - 0.199).abs() < 5e-4, "common probability {}", r.objective_value);
    assert!(r.evaluations > 0);
}

#[test]
fn crossover_grid_oracle() {
    let r = crossover_outflow(V, P, MU, (0.3, 0.6)).unwrap();
    let (lo, hi) = (0.3, 0.6);
    let spacing = (hi - lo) / (GRID - 1) as f64;
    let mut best_m = lo;
    let mut best_gap = f64::INFINITY;
    for i in 0..GRID {
        let m = lo + i as f64 * spacing;
        let (spill, dep) = probabilities(m);
        let gap = (spill - dep).abs();
        if gap < best_gap {
            best_gap = gap;
            best_m = m;
        }
    }
    assert!(
        (best_m - r.m_star).abs() <= 2.0 * spacing,
        "grid crossover {best_m} vs bisection {}",
        r.m_star
    );
}

#[test]
fn sum_minimizer_matches_published_value() {
    let r = minimize_sum(V, P, MU, (0.05, 0.95)).unwrap();
    assert!((r.m_star - 0.38).abs() < 0.005, "minimizer m* = {}", r.m_star);
    assert!((r.objective_value - 0.372).abs() < 0.001, "minimum sum {}", r.objective_value);
}

#[test]
fn sum_minimizer_grid_oracle() {
    let r = minimize_sum(V, P, MU, (0.05, 0.95)).unwrap();
    let (lo, hi) = (0.05, 0.95);
    let spacing = (hi - lo) / (GRID - 1) as f64;
    let mut best_m = lo;
    let mut best_val = f64::INFINITY;
    for i in 0..GRID {
        let m = lo + i as f64 * spacing;
        let (spill, dep) = probabilities(m);
        if spill + dep < best_val {
            best_val = spill + dep;
            best_m = m;
        }
    }
    assert!(
        (best_m - r.m_star).abs() <= 2.0 * spacing,
        "grid minimizer {best_m} vs golden-section {}",
        r.m_star
    );
    // the refined minimum can only undercut the grid
    assert!(r.objective_value <= best_val + 1e-12);
}
