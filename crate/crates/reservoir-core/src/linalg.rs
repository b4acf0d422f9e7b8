//! Dense direct solve of the alpha system (I - lambda D) alpha = b.
//!
//! p is at most 16, so Gaussian elimination with partial pivoting plus an
//! explicit-inverse condition estimate is entirely adequate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dd::{self, Dd};
use crate::dmatrix::DMatrix;
use crate::{Error, Result};

const CONDITION_LIMIT: f64 = 1e12;

/// Solution of the alpha system; index r holds alpha_r.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    pub alpha: Vec<f64>,
    /// Extended-precision solution, consistent with the double-double system
    /// to roughly 1e-28; the cancelling CDF series needs this headroom.
    pub(crate) alpha_dd: Vec<Dd>,
    /// 1-norm condition estimate of (I - lambda D).
    pub condition: f64,
}

impl AlphaVector {
    /// Spillage probability alpha_0.
    pub fn spillage(&self) -> f64 {
        self.alpha[0]
    }
}

/// LU factorization with partial pivoting, kept for repeated solves.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(n: usize, a: &[f64]) -> Result<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[col * n + col].abs();
            for row in (col + 1)..n {
                let cand = lu[row * n + col].abs();
                if cand > best {
                    best = cand;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return Err(Error::IllConditioned { condition: f64::INFINITY });
            }
            if pivot != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot * n + k);
                }
                perm.swap(col, pivot);
            }
            let diag = lu[col * n + col];
            for row in (col + 1)..n {
                let factor = lu[row * n + col] / diag;
                lu[row * n + col] = factor;
                for k in (col + 1)..n {
                    lu[row * n + k] -= factor * lu[col * n + k];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for row in 1..n {
            for col in 0..row {
                x[row] -= self.lu[row * n + col] * x[col];
            }
        }
        for row in (0..n).rev() {
            for col in (row + 1)..n {
                x[row] -= self.lu[row * n + col] * x[col];
            }
            x[row] /= self.lu[row * n + row];
        }
        x
    }
}

fn one_norm(n: usize, a: &[f64]) -> f64 {
    (0..n)
        .map(|col| (0..n).map(|row| a[row * n + col].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve a dense n x n system with a condition check; `a` is row-major.
pub fn solve_checked(n: usize, a: &[f64], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = Lu::factor(n, a)?;
    // ||A^{-1}||_1 from the explicit inverse; n <= 16 keeps this cheap
    let mut inv_norm: f64 = 0.0;
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = lu.solve(&e);
        inv_norm = inv_norm.max(x.iter().map(|v| v.abs()).sum());
    }
    let condition = one_norm(n, a) * inv_norm;
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    Ok((lu.solve(b), condition))
}

/// Solve alpha_r - lambda sum_s d_rs alpha_s = b_r.
///
/// The f64 factorization serves as a preconditioner; iterative refinement
/// with double-double residuals drives the solution to the precision of the
/// double-double system itself. Plain f64 accuracy is not enough because the
/// CDF series cancels against alpha by many orders of magnitude.
pub fn solve_alpha(dmat: &DMatrix, rhs: &[Dd], lambda: Dd) -> Result<AlphaVector> {
    let n = dmat.p;
    if rhs.len() != n {
        return Err(Error::Domain(String::from("rhs length does not match matrix size")));
    }
    let lambda_f = lambda.to_f64();
    let mut a = vec![0.0; n * n];
    for r in 0..n {
        for s in 0..n {
            let identity = if r == s { 1.0 } else { 0.0 };
            a[r * n + s] = identity - lambda_f * dmat.get(r, s);
        }
    }
    let lu = Lu::factor(n, &a)?;
    let mut inv_norm: f64 = 0.0;
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = lu.solve(&e);
        inv_norm = inv_norm.max(x.iter().map(|v| v.abs()).sum());
    }
    let condition = one_norm(n, &a) * inv_norm;
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    let rhs_f: Vec<f64> = rhs.iter().map(|b| b.to_f64()).collect();
    let mut alpha_dd: Vec<Dd> = lu.solve(&rhs_f).into_iter().map(Dd::from_f64).collect();
    for _ in 0..3 {
        let mut residual = vec![0.0; n];
        for r in 0..n {
            let mut acc = rhs[r];
            for s in 0..n {
                let identity = if r == s { dd::ONE } else { dd::ZERO };
                let a_rs = identity.sub(lambda.mul(dmat.get_dd(r, s)));
                acc = acc.sub(a_rs.mul(alpha_dd[s]));
            }
            residual[r] = acc.to_f64();
        }
        let correction = lu.solve(&residual);
        for (x, dx) in alpha_dd.iter_mut().zip(&correction) {
            *x = x.add(Dd::from_f64(*dx));
        }
    }
    let alpha = alpha_dd.iter().map(|x| x.to_f64()).collect();
    Ok(AlphaVector { alpha, alpha_dd, condition })
}

/// Relative residual ||A x - b|| / (||A|| ||x|| + ||b||) of the alpha system.
pub fn alpha_residual(dmat: &DMatrix, rhs: &[f64], lambda: f64, alpha: &[f64]) -> f64 {
    let n = dmat.p;
    let mut a = vec![0.0; n * n];
    for r in 0..n {
        for s in 0..n {
            let identity = if r == s { 1.0 } else { 0.0 };
            a[r * n + s] = identity - lambda * dmat.get(r, s);
        }
    }
    let mut worst: f64 = 0.0;
    for r in 0..n {
        let mut acc = -rhs[r];
        for s in 0..n {
            acc += a[r * n + s] * alpha[s];
        }
        worst = worst.max(acc.abs());
    }
    let scale = one_norm(n, &a) * alpha.iter().map(|v| v.abs()).fold(0.0, f64::max)
        + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}
