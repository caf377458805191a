//! Cumulative state functions and their Gibbs thermodynamics.
//!
//! A [`CumulativeStateFunction`] is a right-continuous step function
//! `C(E) = sum_{E_j <= E} step_j` with finitely many positive (not necessarily
//! integer) steps. Because `C` is piecewise constant, the integral forms of the
//! partition function and mean energy collapse to finite sums over the
//! breakpoints, which is how they are evaluated here — in the log domain, so
//! large `|beta|` and huge step masses do not overflow.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::cost::SpectrumTable;
use crate::error::{invalid, Error, Result};
use crate::transform::{binary_entropy, EtaTransform};

/// Finite-stepping cumulative state function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeStateFunction {
    /// `(E_j, step_j)`, strictly increasing in `E_j`, `step_j > 0`.
    breakpoints: Vec<(f64, f64)>,
}

/// Gibbs quantities at one inverse temperature. `s` is in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gibbs {
    pub ln_z: f64,
    pub u: f64,
    pub s: f64,
}

impl Gibbs {
    /// `Z` itself (may overflow to infinity).
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }
}

impl CumulativeStateFunction {
    /// Build from `(energy, step)` pairs in any order; equal energies merge.
    pub fn new(mut steps: Vec<(f64, f64)>) -> Result<Self> {
        if steps.is_empty() {
            return invalid("a cumulative state function needs at least one step");
        }
        for &(e, w) in &steps {
            if !e.is_finite() || !(w > 0.0) || !w.is_finite() {
                return invalid(format!("bad step ({e}, {w})"));
            }
        }
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints: Vec<(f64, f64)> = Vec::with_capacity(steps.len());
        for (e, w) in steps {
            match breakpoints.last_mut() {
                Some(last) if last.0 == e => last.1 += w,
                _ => breakpoints.push((e, w)),
            }
        }
        Ok(Self { breakpoints })
    }

    /// `C(E)` of the cost function itself.
    pub fn from_table(table: &SpectrumTable) -> Self {
        let steps = table.levels().iter().map(|l| (l.energy, l.multiplicity as f64)).collect();
        Self::new(steps).expect("spectrum tables are non-empty with positive multiplicities")
    }

    /// `C_eta(v)`: counts of assignments by transformed energy `g_eta(H/|E*|)`.
    pub fn c_eta(table: &SpectrumTable, eta: f64) -> Result<Self> {
        let t = EtaTransform::new(eta)?;
        let scale = -table.e_star();
        let steps = table.levels().iter().map(|l| (t.g(l.energy / scale), l.multiplicity as f64)).collect();
        Self::new(steps)
    }

    /// Two-band envelope: `2^{(1-gamma)n}` states at `-1` and `2^n` at `0`.
    pub fn c_bar(n: usize, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return invalid(format!("gamma must lie in [0,1], got {gamma}"));
        }
        let n = n as f64;
        Self::new(vec![(-1.0, ((1.0 - gamma) * n).exp2()), (0.0, n.exp2())])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// `C(E)` (right-continuous).
    pub fn eval(&self, e: f64) -> f64 {
        self.breakpoints.iter().take_while(|(x, _)| *x <= e).map(|(_, w)| w).sum()
    }

    /// `C(infinity)`.
    pub fn total(&self) -> f64 {
        self.breakpoints.iter().map(|(_, w)| w).sum()
    }

    /// Lowest and highest breakpoint.
    pub fn range(&self) -> (f64, f64) {
        (self.breakpoints[0].0, self.breakpoints[self.breakpoints.len() - 1].0)
    }

    /// The primed system with all energies negated: `C'(E) = C(inf) - C(-E)`.
    pub fn negated(&self) -> Self {
        let steps = self.breakpoints.iter().map(|&(e, w)| (-e, w)).collect();
        Self::new(steps).expect("negation preserves validity")
    }

    /// `Z`, `U` and `S = (ln Z + beta U)/ln 2` at inverse temperature `beta`.
    ///
    /// Negative `beta` is evaluated on the negated system at `-beta`.
    pub fn gibbs(&self, beta: f64) -> Gibbs {
        if beta < 0.0 {
            let g = self.negated().gibbs_nonnegative(-beta);
            return Gibbs { ln_z: g.ln_z, u: -g.u, s: g.s };
        }
        self.gibbs_nonnegative(beta)
    }

    fn gibbs_nonnegative(&self, beta: f64) -> Gibbs {
        let logs: Vec<f64> = self.breakpoints.iter().map(|&(e, w)| w.ln() - beta * e).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut esum = 0.0;
        for (&(e, _), &l) in self.breakpoints.iter().zip(&logs) {
            let p = (l - top).exp();
            sum += p;
            esum += p * e;
        }
        let ln_z = top + sum.ln();
        let u = esum / sum;
        Gibbs { ln_z, u, s: (ln_z + beta * u) / LN_2 }
    }

    /// Probability of each breakpoint under the Gibbs distribution.
    pub fn probabilities(&self, beta: f64) -> Vec<f64> {
        let g = self.gibbs(beta);
        self.breakpoints.iter().map(|&(e, w)| (w.ln() - beta * e - g.ln_z).exp()).collect()
    }

    /// `beta` with `U(beta) = target`, to `|U - target| <= tol`.
    pub fn solve_beta_for_u(&self, target: f64, tol: f64) -> Result<f64> {
        let (lo_e, hi_e) = self.range();
        if !(target > lo_e && target < hi_e) {
            return Err(Error::NoSolution(format!("U = {target} outside the open range ({lo_e}, {hi_e})")));
        }
        let u = |b: f64| self.gibbs(b).u;
        // U is strictly decreasing: find lo < beta < hi with U(lo) > target > U(hi).
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut doublings = 0;
        while u(lo) <= target {
            lo *= 2.0;
            doublings += 1;
            if doublings > 1100 {
                return Err(Error::NoSolution("could not bracket beta from below".into()));
            }
        }
        while u(hi) >= target {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 {
                return Err(Error::NoSolution("could not bracket beta from above".into()));
            }
        }
        let mut best = (f64::INFINITY, 0.0);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            let um = u(mid);
            let err = (um - target).abs();
            if err < best.0 {
                best = (err, mid);
            }
            if err <= tol || mid == lo || mid == hi {
                break;
            }
            if um > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if best.0 <= tol {
            Ok(best.1)
        } else {
            Err(Error::NoSolution(format!("bisection stalled at |U - target| = {:e}", best.0)))
        }
    }

    /// Gibbs entropy (bits) at mean energy `target`.
    pub fn entropy_at(&self, target: f64, tol: f64) -> Result<f64> {
        Ok(self.gibbs(self.solve_beta_for_u(target, tol)?).s)
    }
}

/// `n(1 + gamma U) + H_2(-U)`: entropy of the two-band envelope at mean energy `U`.
pub fn max_entropy_bound(n: usize, gamma: f64, u: f64) -> Result<f64> {
    if !(-1.0..=0.0).contains(&u) {
        return invalid(format!("U must lie in [-1,0], got {u}"));
    }
    Ok(n as f64 * (1.0 + gamma * u) + binary_entropy(-u))
}

/// The same bound with `H_2 <= 1`: `n(1 + gamma U) + 1`.
pub fn max_entropy_bound_simplified(n: usize, gamma: f64, u: f64) -> f64 {
    n as f64 * (1.0 + gamma * u) + 1.0
}

/// `beta-bar = gamma n ln 2 + ln(-U/(1+U))` for the two-band envelope.
pub fn c_bar_beta(n: usize, gamma: f64, u: f64) -> f64 {
    gamma * n as f64 * LN_2 + (-u / (1.0 + u)).ln()
}

/// Outcome of comparing two systems at equal mean energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub beta1: f64,
    pub beta2: f64,
    pub s1: f64,
    pub s2: f64,
    /// `S_1 >= S_2` (up to `tol`-induced slack).
    pub dominates: bool,
}

/// Whether `C_1 >= C_2` and `C_1(inf) - C_1 >= C_2(inf) - C_2` everywhere.
///
/// Both functions are constant between breakpoints, so checking at every
/// breakpoint of either function suffices.
pub fn dominance_hypothesis(c1: &CumulativeStateFunction, c2: &CumulativeStateFunction) -> bool {
    let (t1, t2) = (c1.total(), c2.total());
    let slack = 1e-12 * t1.max(t2);
    c1.breakpoints.iter().chain(&c2.breakpoints).all(|&(e, _)| {
        let (a, b) = (c1.eval(e), c2.eval(e));
        a >= b - slack && (t1 - a) >= (t2 - b) - slack
    })
}

/// Compare entropies at mean energy `u`. Errors with `NotApplicable` if the
/// hypothesis of the comparison fails.
pub fn entropy_dominates(
    c1: &CumulativeStateFunction,
    c2: &CumulativeStateFunction,
    u: f64,
    tol: f64,
) -> Result<Dominance> {
    if !dominance_hypothesis(c1, c2) {
        return Err(Error::NotApplicable("C_1 does not dominate C_2 on both sides".into()));
    }
    let beta1 = c1.solve_beta_for_u(u, tol)?;
    let beta2 = c2.solve_beta_for_u(u, tol)?;
    let s1 = c1.gibbs(beta1).s;
    let s2 = c2.gibbs(beta2).s;
    // dS/dU = beta/ln 2, so a U-error of tol moves S by at most |beta| tol / ln 2.
    let slack = (beta1.abs() + beta2.abs() + 1.0) * tol / LN_2 + 1e-12 * s1.abs().max(1.0);
    Ok(Dominance { beta1, beta2, s1, s2, dominates: s1 >= s2 - slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{enumerate_spectrum, sample_k_spin};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_level() -> CumulativeStateFunction {
        CumulativeStateFunction::new(vec![(-1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn two_level_reference_values() {
        let g = two_level().gibbs(0.0);
        assert_abs_diff_eq!(g.z(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.u, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.s, 1.0, epsilon = 1e-15);
        let cold = two_level().gibbs(60.0);
        assert!((cold.u + 1.0).abs() < 1e-20);
        assert!(cold.s.abs() < 1e-20);
        let e = std::f64::consts::E;
        let g1 = two_level().gibbs(1.0);
        assert_abs_diff_eq!(g1.u, -e / (e + 1.0), epsilon = 1e-15);
    }

    #[test]
    fn single_level_entropy_is_log_multiplicity() {
        let c = CumulativeStateFunction::new(vec![(0.3, 12.0)]).unwrap();
        for beta in [-5.0, 0.0, 0.7, 100.0] {
            assert_abs_diff_eq!(c.gibbs(beta).s, 12f64.log2(), epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_beta_reference_points() {
        let c = two_level();
        assert_abs_diff_eq!(c.solve_beta_for_u(-0.5, 1e-14).unwrap(), 0.0, epsilon = 1e-12);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(c.solve_beta_for_u(-e / (e + 1.0), 1e-15).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(c.solve_beta_for_u(-1.0, 1e-12), Err(Error::NoSolution(_))));
        assert!(matches!(c.solve_beta_for_u(0.2, 1e-12), Err(Error::NoSolution(_))));
    }

    #[test]
    fn negative_beta_matches_direct_sum() {
        let c = CumulativeStateFunction::new(vec![(-1.0, 3.0), (0.25, 0.5), (2.0, 7.0)]).unwrap();
        let beta = -0.8;
        let z: f64 = c.breakpoints().iter().map(|&(e, w)| w * (-beta * e).exp()).sum();
        let u: f64 = c.breakpoints().iter().map(|&(e, w)| e * w * (-beta * e).exp()).sum::<f64>() / z;
        let g = c.gibbs(beta);
        assert_abs_diff_eq!(g.ln_z, z.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(g.u, u, epsilon = 1e-13);
        // Primed system: C'(E) = C(inf) - C(-E) away from breakpoints.
        let p = c.negated();
        assert_abs_diff_eq!(p.eval(0.0), c.total() - c.eval(-1e-9), epsilon = 1e-12);
    }

    #[test]
    fn c_bar_matches_closed_forms() {
        let (n, gamma) = (20, 0.1);
        let c = CumulativeStateFunction::c_bar(n, gamma).unwrap();
        for i in 1..100 {
            let u = -(i as f64) / 100.0;
            let beta = c.solve_beta_for_u(u, 1e-14).unwrap();
            assert_abs_diff_eq!(beta, c_bar_beta(n, gamma, u), epsilon = 1e-9);
            let s = c.gibbs(beta).s;
            assert_abs_diff_eq!(s, max_entropy_bound(n, gamma, u).unwrap(), epsilon = 1e-9);
            assert!(s <= max_entropy_bound_simplified(n, gamma, u) + 1e-12);
        }
        assert_abs_diff_eq!(max_entropy_bound(n, gamma, -1.0).unwrap(), (1.0 - gamma) * n as f64);
        assert_abs_diff_eq!(max_entropy_bound(n, gamma, 0.0).unwrap(), n as f64);
    }

    #[test]
    fn gibbs_entropy_equals_direct_entropy_on_instance() {
        let t = enumerate_spectrum(&sample_k_spin(12, 3, 7).into()).unwrap();
        let c = CumulativeStateFunction::from_table(&t);
        for beta in [-0.3, 0.0, 0.4, 2.0] {
            let g = c.gibbs(beta);
            // Per-state probabilities: p_level / multiplicity.
            let direct: f64 = c
                .probabilities(beta)
                .iter()
                .zip(c.breakpoints())
                .map(|(&p, &(_, m))| if p > 0.0 { -p * (p / m).log2() } else { 0.0 })
                .sum();
            assert_abs_diff_eq!(g.s, direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn c_eta_is_dominated_by_c_bar() {
        let n = 12;
        let t = enumerate_spectrum(&sample_k_spin(n, 3, 9).into()).unwrap();
        let eta = 0.5;
        let gamma = crate::conditions::empirical_gamma(&t, eta);
        let c = CumulativeStateFunction::c_eta(&t, eta).unwrap();
        let bar = CumulativeStateFunction::c_bar(n, gamma).unwrap();
        assert_eq!(c.total(), 4096.0);
        let d = entropy_dominates(&bar, &c, -0.5, 1e-13).unwrap();
        assert!(d.dominates, "{d:?}");
    }

    #[test]
    fn identical_systems_have_equal_entropy() {
        let c = CumulativeStateFunction::new(vec![(-2.0, 1.0), (-0.5, 4.0), (1.0, 2.0)]).unwrap();
        let d = entropy_dominates(&c, &c, -0.2, 1e-13).unwrap();
        assert_abs_diff_eq!(d.s1, d.s2, epsilon = 1e-15);
    }

    #[test]
    fn hypothesis_violation_is_reported() {
        let a = CumulativeStateFunction::new(vec![(0.0, 1.0)]).unwrap();
        let b = CumulativeStateFunction::new(vec![(-1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(entropy_dominates(&a, &b, 0.0, 1e-12), Err(Error::NotApplicable(_))));
    }

    /// Random distribution over levels with mean `u`; entropy in bits counting multiplicities.
    fn constrained_entropy(c: &CumulativeStateFunction, u: f64, rng: &mut ChaCha8Rng) -> f64 {
        let bp = c.breakpoints();
        let mut p: Vec<f64> = bp.iter().map(|_| rng.gen::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let mean: f64 = p.iter().zip(bp).map(|(p, (e, _))| p * e).sum();
        let (anchor, e_anchor) = if mean > u { (0, bp[0].0) } else { (bp.len() - 1, bp[bp.len() - 1].0) };
        let t = (mean - u) / (mean - e_anchor);
        p.iter_mut().for_each(|x| *x *= 1.0 - t);
        p[anchor] += t;
        p.iter().zip(bp).map(|(&p, &(_, m))| if p > 0.0 { p * (m.log2() - p.log2()) } else { 0.0 }).sum()
    }

    #[test]
    fn gibbs_maximizes_entropy_at_fixed_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for levels in 2..=6 {
            let steps: Vec<(f64, f64)> =
                (0..levels).map(|i| (i as f64 + rng.gen::<f64>() * 0.5, rng.gen_range(1..6) as f64)).collect();
            let c = CumulativeStateFunction::new(steps).unwrap();
            let (lo, hi) = c.range();
            let u = lo + (hi - lo) * rng.gen_range(0.2..0.8);
            let s_gibbs = c.entropy_at(u, 1e-13).unwrap();
            for _ in 0..1000 {
                assert!(constrained_entropy(&c, u, &mut rng) <= s_gibbs + 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn mean_energy_strictly_decreasing(
            steps in proptest::collection::vec((-3.0f64..3.0, 0.1f64..10.0), 2..8),
            b1 in -5.0f64..5.0, db in 0.01f64..2.0,
        ) {
            let c = CumulativeStateFunction::new(steps).unwrap();
            prop_assume!(c.breakpoints().len() >= 2);
            let (u1, u2) = (c.gibbs(b1).u, c.gibbs(b1 + db).u);
            prop_assert!(u2 < u1 || (u1 - u2).abs() < 1e-12);
        }
    }
}
