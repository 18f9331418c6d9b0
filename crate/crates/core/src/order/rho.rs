//! The random-order bound `rho(lambda)`: the unique `rho > 1` with
//!
//! ```text
//! rho - (rho - 1) / (lambda + 1) = ln(lambda + 1) - ln(1 - 1/rho)
//! ```
//!
//! The left side increases in `rho` and the right side decreases, so their
//! difference has a single sign change on `(1, inf)` and bisection finds it.

use serde::Serialize;

use super::OrderError;

pub const DEFAULT_RHO_TOLERANCE: f64 = 1e-12;

const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoSolution {
    pub lambda: f64,
    pub rho: f64,
    /// Left side minus right side at `rho`.
    pub residual: f64,
    pub iterations: usize,
}

/// Left minus right side of the defining equation; increasing in `rho`.
pub fn rho_residual(lambda: f64, rho: f64) -> f64 {
    let left = rho - (rho - 1.0) / (lambda + 1.0);
    let right = lambda.ln_1p() - (-1.0 / rho).ln_1p();
    left - right
}

pub fn solve_rho(lambda: f64, tol: f64) -> Result<RhoSolution, OrderError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(OrderError::InvalidLambda(lambda));
    }
    if !(tol > 0.0) {
        return Err(OrderError::InvalidTolerance(tol));
    }
    let g = |rho: f64| rho_residual(lambda, rho);

    let mut delta = 0.5;
    while g(1.0 + delta) >= 0.0 {
        delta *= 0.5;
        if delta < f64::EPSILON {
            return Err(OrderError::ToleranceNotReached { lambda, residual: g(1.0 + delta) });
        }
    }
    let mut lo = 1.0 + delta;
    let mut hi = (lambda.ln_1p() + 3.0).max(2.0);
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }

    let mut best = (lo, g(lo));
    for iteration in 1..=MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let r = g(mid);
        if r.abs() < best.1.abs() {
            best = (mid, r);
        }
        if r.abs() <= tol {
            return Ok(RhoSolution { lambda, rho: mid, residual: r, iterations: iteration });
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(OrderError::ToleranceNotReached { lambda, residual: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_limit() {
        let e = std::f64::consts::E;
        let s = solve_rho(0.0, 1e-14).unwrap();
        assert!((s.rho - e / (e - 1.0)).abs() < 1e-12, "{}", s.rho);
        assert!((s.rho - 1.5819767).abs() < 1e-7);
    }

    #[test]
    fn residual_and_lower_bound() {
        for lambda in [0.0, 0.5, 1.0, 10.0, 1e2, 1e4, 1e6, 1e9] {
            let s = solve_rho(lambda, DEFAULT_RHO_TOLERANCE).unwrap();
            assert!(s.residual.abs() <= DEFAULT_RHO_TOLERANCE);
            assert!(s.rho > 1.0);
            assert!(s.rho > lambda.ln_1p());
        }
    }

    #[test]
    fn approaches_log_lambda() {
        let gap = |l: f64| (solve_rho(l, 1e-12).unwrap().rho - l.ln()).abs();
        assert!(gap(1e6) < 0.15);
        assert!(gap(1e6) < gap(1e3));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(solve_rho(-1.0, 1e-12), Err(OrderError::InvalidLambda(-1.0)));
        assert_eq!(solve_rho(1.0, 0.0), Err(OrderError::InvalidTolerance(0.0)));
    }
}
