//! Choice of the target outflow m: the crossover where spillage equals
//! depletion, and the minimizer of their unweighted sum.
//!
//! Both objectives are evaluated exclusively through the exact
//! distribution; nothing here re-derives any probability.

use alloc::format;

use crate::distribution::build_distribution;
use crate::params::ModelParams;
use crate::{Error, Result};

const BISECT_WIDTH: f64 = 1e-10;
const BISECT_RESIDUAL: f64 = 1e-8;
const GOLDEN_WIDTH: f64 = 1e-8;
const GRID_POINTS: usize = 512;

/// Outcome of a scalar outflow search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub m_star: f64,
    pub objective_value: f64,
    pub evaluations: u64,
    pub bracket: (f64, f64),
}

fn check_bracket(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(Error::Domain(format!("invalid bracket ({lo}, {hi})")));
    }
    Ok(())
}

fn probabilities(v: f64, p: u32, mu: f64, m: f64, evals: &mut u64) -> Result<(f64, f64)> {
    *evals += 1;
    let dist = build_distribution(&ModelParams::new(v, p, mu, m)?)?;
    Ok((dist.spillage_probability(), dist.depletion_probability()))
}

/// Find the outflow where spillage and depletion probabilities cross, by
/// bisection of their difference over `bracket`.
pub fn crossover_outflow(v: f64, p: u32, mu: f64, bracket: (f64, f64)) -> Result<OptimizationResult> {
    let (mut lo, mut hi) = bracket;
    check_bracket(lo, hi)?;
    let mut evals = 0;
    let gap = |m: f64, evals: &mut u64| -> Result<f64> {
        let (spill, dep) = probabilities(v, p, mu, m, evals)?;
        Ok(spill - dep)
    };
    let mut g_lo = gap(lo, &mut evals)?;
    let g_hi = gap(hi, &mut evals)?;
    if g_lo == 0.0 {
        hi = lo;
    } else if g_hi == 0.0 {
        lo = hi;
    } else if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket(format!(
            "spillage - depletion does not change sign on ({lo}, {hi}); widen the bracket"
        )));
    }
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        let g_mid = gap(mid, &mut evals)?;
        if g_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let m_star = 0.5 * (lo + hi);
    let (spill, dep) = probabilities(v, p, mu, m_star, &mut evals)?;
    if (spill - dep).abs() > BISECT_RESIDUAL {
        return Err(Error::Numerical(format!(
            "bisection converged in m but |spillage - depletion| = {:.3e} > {BISECT_RESIDUAL}",
            (spill - dep).abs()
        )));
    }
    Ok(OptimizationResult {
        m_star,
        objective_value: 0.5 * (spill + dep),
        evaluations: evals,
        bracket,
    })
}

/// Minimize spillage + depletion over `bracket`.
///
/// The objective has kinks where floor(v / m) jumps, so a coarse grid scan
/// locates the basin first and golden-section refines inside it.
pub fn minimize_sum(v: f64, p: u32, mu: f64, bracket: (f64, f64)) -> Result<OptimizationResult> {
    let (lo, hi) = bracket;
    check_bracket(lo, hi)?;
    let mut evals = 0;
    let objective = |m: f64, evals: &mut u64| -> Result<f64> {
        let (spill, dep) = probabilities(v, p, mu, m, evals)?;
        Ok(spill + dep)
    };

    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best_i = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..GRID_POINTS {
        let m = lo + i as f64 * step;
        let val = objective(m, &mut evals)?;
        // ties broken toward smaller m by strict inequality
        if val < best_val {
            best_val = val;
            best_i = i;
        }
    }
    let mut a = lo + best_i.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best_i + 1) as f64 * step).min(hi);

    // golden-section refinement
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = objective(x1, &mut evals)?;
    let mut f2 = objective(x2, &mut evals)?;
    while b - a > GOLDEN_WIDTH {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = objective(x1, &mut evals)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = objective(x2, &mut evals)?;
        }
    }
    let m_star = 0.5 * (a + b);
    let value = objective(m_star, &mut evals)?;
    Ok(OptimizationResult { m_star, objective_value: value, evaluations: evals, bracket })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_bracket_rejected() {
        assert!(crossover_outflow(1.0, 1, 2.0, (0.4, 0.4)).is_err());
        assert!(minimize_sum(1.0, 1, 2.0, (0.9, 0.1)).is_err());
    }

    #[test]
    fn no_sign_change_reports_bracket_error() {
        // spillage > depletion everywhere on a bracket of small outflows
        let err = crossover_outflow(1.0, 1, 2.0, (0.05, 0.1)).unwrap_err();
        assert!(matches!(err, Error::Bracket(_)));
    }

    #[test]
    fn crossover_is_bracket_insensitive() {
        let a = crossover_outflow(1.0, 1, 2.0, (0.4, 0.5)).unwrap();
        let b = crossover_outflow(1.0, 1, 2.0, (0.35, 0.55)).unwrap();
        assert!((a.m_star - b.m_star).abs() < 1e-6);
    }

    #[test]
    fn minimizer_is_locally_minimal() {
        let r = minimize_sum(1.0, 1, 2.0, (0.05, 0.95)).unwrap();
        let mut evals = 0;
        let at = |m: f64, e: &mut u64| {
            let (s, d) = probabilities(1.0, 1, 2.0, m, e).unwrap();
            s + d
        };
        let center = at(r.m_star, &mut evals);
        assert!(center <= at(r.m_star - 0.01, &mut evals) + 1e-12);
        assert!(center <= at(r.m_star + 0.01, &mut evals) + 1e-12);
    }

    #[test]
    fn determinism() {
        let a = minimize_sum(1.0, 1, 2.0, (0.05, 0.95)).unwrap();
        let b = minimize_sum(1.0, 1, 2.0, (0.05, 0.95)).unwrap();
        assert_eq!(a, b);
    }
}
