//! Exhaustive checks of the (sub)depolarizing properties.
//!
//! A cost function is `alpha`-depolarizing when the average energy of the
//! `n` single-flip neighbours of every `x` is exactly `(1 - alpha) H(x)`.
//! The subdepolarizing property generalizes this to products of the convex
//! transform `f(x) = -g_eta(-x)`; since it quantifies over all real
//! coefficient sequences it can only be probed statistically.

use rand::Rng;
use serde::Serialize;

use super::CostFunction;
use crate::error::Result;
use crate::rng::stream_rng;
use crate::transform::EtaTransform;

/// Absolute tolerance for the exact depolarizing identity.
pub const DEPOLARIZING_TOL: f64 = 1e-12;

/// Outcome of [`check_depolarizing`].
#[derive(Debug, Clone, Serialize)]
pub struct DepolarizingReport {
    pub holds: bool,
    pub max_violation: f64,
    /// Assignment with the largest violation.
    pub worst_assignment: u64,
}

/// Verify `E_{y~x} H(y) = (1 - alpha) H(x)` for every assignment.
pub fn check_depolarizing(cost: &CostFunction, alpha: f64) -> Result<DepolarizingReport> {
    let n = cost.n();
    let e = cost.energies()?;
    let mut worst = (0.0f64, 0u64);
    for x in 0..e.len() {
        let avg = (0..n).map(|i| e[x ^ (1 << i)]).sum::<f64>() / n as f64;
        let v = (avg - (1.0 - alpha) * e[x]).abs();
        if v > worst.0 {
            worst = (v, x as u64);
        }
    }
    Ok(DepolarizingReport { holds: worst.0 <= DEPOLARIZING_TOL, max_violation: worst.0, worst_assignment: worst.1 })
}

/// Outcome of [`check_subdepolarizing`].
#[derive(Debug, Clone, Serialize)]
pub struct SubdepolarizingReport {
    pub holds: bool,
    /// Smallest `LHS - RHS` seen over all vectors and assignments.
    pub min_slack: f64,
    pub worst_assignment: u64,
    pub worst_coefficients: Vec<f64>,
    pub vectors_tested: usize,
}

fn sample_coefficient(rng: &mut impl Rng) -> f64 {
    // Uniform, plus draws biased towards either end of (0, 1).
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    match rng.gen_range(0..3) {
        0 => u,
        1 => u.powi(4),
        _ => 1.0 - u.powi(4) * (1.0 - f64::EPSILON),
    }
}

/// Probe `E_{y~x} prod_t f(c_t H(y)/E*) >= prod_t f(c_t (1-alpha) H(x)/E*)`
/// for `trials` random coefficient vectors of length `0..=max_factors` and
/// every assignment `x`.
///
/// The outcome is statistical evidence, not a proof.
pub fn check_subdepolarizing(
    cost: &CostFunction,
    eta: f64,
    alpha: f64,
    trials: usize,
    max_factors: usize,
    seed: u64,
) -> Result<SubdepolarizingReport> {
    let t = EtaTransform::new(eta)?;
    let n = cost.n();
    let e = cost.energies()?;
    let e_star = e.iter().copied().fold(f64::INFINITY, f64::min);
    let h: Vec<f64> = e.iter().map(|v| v / e_star).collect();
    let mut rng = stream_rng(seed, 0);
    let mut report = SubdepolarizingReport {
        holds: true,
        min_slack: f64::INFINITY,
        worst_assignment: 0,
        worst_coefficients: Vec::new(),
        vectors_tested: trials,
    };
    let prod = |c: &[f64], v: f64| c.iter().map(|&ct| t.f(ct * v)).product::<f64>();
    for _ in 0..trials {
        let len = rng.gen_range(0..=max_factors);
        let c: Vec<f64> = (0..len).map(|_| sample_coefficient(&mut rng)).collect();
        for x in 0..h.len() {
            let lhs = (0..n).map(|i| prod(&c, h[x ^ (1 << i)])).sum::<f64>() / n as f64;
            let rhs = prod(&c, (1.0 - alpha) * h[x]);
            let slack = lhs - rhs;
            if slack < report.min_slack {
                report.min_slack = slack;
                report.worst_assignment = x as u64;
                report.worst_coefficients = c.clone();
            }
        }
    }
    report.holds = report.min_slack >= -DEPOLARIZING_TOL;
    Ok(report)
}
