//! Spectral conditions on `H_b` and the tail bound on the classical spectrum.
//!
//! Every check returns a signed margin (distance to the condition boundary,
//! positive on the satisfied side) together with its verdict. Margins whose
//! magnitude is within ten solver tolerances are flagged as marginal.

use serde::Serialize;

use crate::cost::SpectrumTable;
use crate::error::Result;
use crate::spectral::{deflated_ground_energy, ground_state_with, HbOperator, Method, SolveOptions, SpectralSummary};
use crate::transform::b_max;

/// Verdict of one condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// Signed distance to the boundary (positive = satisfied side).
    pub margin: f64,
    /// `|margin|` lies within the tolerance band.
    pub marginal: bool,
}

impl Verdict {
    fn new(holds: bool, margin: f64, tol: f64) -> Self {
        Self { holds, margin, marginal: margin.abs() <= 10.0 * tol }
    }
}

/// Non-degenerate ground state and `E_excited > -1 + 1/n`.
pub fn check_large_excited_energy(summary: &SpectralSummary, n: usize) -> Verdict {
    let margin = summary.e_excited - (-1.0 + 1.0 / n as f64);
    Verdict::new(!summary.degenerate && margin > summary.tol, margin, summary.tol)
}

/// `-1 - 1/n^3 <= E_b <= -1`, inclusive, with `tol` of slack on both sides.
pub fn check_small_ground_energy_shift(e_b: f64, n: usize, tol: f64) -> Verdict {
    let lower = -1.0 - 1.0 / (n as f64).powi(3);
    let margin = (e_b - lower).min(-1.0 - e_b);
    Verdict::new(e_b >= lower - tol && e_b <= -1.0 + tol, margin, tol)
}

/// `E-bar_b >= -1 + 1/n` for the ground energy orthogonal to `|+>`.
pub fn check_short_path(deflated_energy: f64, n: usize, tol: f64) -> Verdict {
    let margin = deflated_energy - (-1.0 + 1.0 / n as f64);
    Verdict::new(margin > tol, margin, tol)
}

/// Outcome of the tail-bound test `C((1-eta)E*) <= 2^{(1-gamma)n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBoundVerdict {
    pub holds: bool,
    /// `C((1-eta)E*)`.
    pub count: u64,
    /// `(1-gamma) n`.
    pub log2_threshold: f64,
    /// Largest `gamma` for which the bound holds: `1 - log2(C)/n`.
    pub gamma_empirical: f64,
}

/// Tail bound at `(eta, gamma)` from an exhaustive spectrum.
pub fn check_tail_bound(table: &SpectrumTable, eta: f64, gamma: f64) -> TailBoundVerdict {
    let n = table.n() as f64;
    let count = table.cumulative_states((1.0 - eta) * table.e_star());
    let log2_threshold = (1.0 - gamma) * n;
    let log2_count = (count as f64).log2();
    TailBoundVerdict {
        holds: log2_count <= log2_threshold,
        count,
        log2_threshold,
        gamma_empirical: 1.0 - log2_count / n,
    }
}

/// `1 - log2 C((1-eta)E*) / n`.
pub fn empirical_gamma(table: &SpectrumTable, eta: f64) -> f64 {
    check_tail_bound(table, eta, 0.0).gamma_empirical
}

/// Whether the tail-bound lemma's hypotheses hold at `(n, gamma, b)`:
/// `gamma >= (1 + 4 log2 n)/n` and `b <= b_max(gamma)`.
pub fn tail_lemma_applies(n: usize, gamma: f64, b: f64) -> bool {
    let nf = n as f64;
    gamma <= 1.0 && gamma >= (1.0 + 4.0 * nf.log2()) / nf && b <= b_max(gamma)
}

/// All spectral conditions at one `(instance, eta, b)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub eta: f64,
    pub b: f64,
    pub e_ground: f64,
    pub e_excited: f64,
    pub e_deflated: Option<f64>,
    pub large_excited_energy: Verdict,
    pub small_ground_energy_shift: Verdict,
    pub short_path: Option<Verdict>,
    pub tail_bound: Option<TailBoundVerdict>,
    pub tol: f64,
    /// Short-path held but the large-excited-energy condition did not.
    pub implication_violated: bool,
}

impl ConditionReport {
    /// Conditions 1 and 2 together.
    pub fn both_hold(&self) -> bool {
        self.large_excited_energy.holds && self.small_ground_energy_shift.holds
    }
}

/// Options for [`evaluate_conditions`].
#[derive(Debug, Clone, Copy)]
pub struct ConditionOptions {
    pub method: Method,
    pub tol: f64,
    /// Also compute the deflated energy for the short-path check.
    pub short_path: bool,
}

impl ConditionOptions {
    pub fn new(method: Method, n: usize) -> Self {
        Self { method, tol: method.default_tol(n), short_path: true }
    }
}

/// Evaluate every condition from an already computed summary.
pub fn report_from_summary(
    op: &HbOperator,
    summary: &SpectralSummary,
    e_deflated: Option<f64>,
    tail: Option<(&SpectrumTable, f64)>,
) -> ConditionReport {
    let n = op.n();
    let tol = summary.tol;
    let large = check_large_excited_energy(summary, n);
    let small = check_small_ground_energy_shift(summary.e_ground, n, tol);
    let short_path = e_deflated.map(|e| check_short_path(e, n, tol));
    let implication_violated = short_path.is_some_and(|s| s.holds && !large.holds);
    ConditionReport {
        n,
        eta: op.eta(),
        b: op.b(),
        e_ground: summary.e_ground,
        e_excited: summary.e_excited,
        e_deflated,
        large_excited_energy: large,
        small_ground_energy_shift: small,
        short_path,
        tail_bound: tail.map(|(t, gamma)| check_tail_bound(t, op.eta(), gamma)),
        tol,
        implication_violated,
    }
}

/// Solve for the spectrum of `op` and evaluate every condition.
pub fn evaluate_conditions(
    op: &HbOperator,
    opts: &ConditionOptions,
    tail: Option<(&SpectrumTable, f64)>,
) -> Result<(ConditionReport, SpectralSummary)> {
    let mut so = SolveOptions::new(opts.method, op.n());
    so.tol = opts.tol;
    so.want_max = false;
    let summary = ground_state_with(op, &so)?;
    let deflated = if opts.short_path { Some(deflated_ground_energy(op, opts.method, opts.tol)?) } else { None };
    Ok((report_from_summary(op, &summary, deflated, tail), summary))
}

/// One grid point of a `b` scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub b: f64,
    pub conditions_hold: bool,
    pub report: ConditionReport,
}

/// Result of [`scan_b_critical`].
#[derive(Debug, Clone, Serialize)]
pub struct BScan {
    /// Largest grid `b` at which Conditions 1 and 2 both hold (0 if none).
    pub b_critical: f64,
    pub points: Vec<ScanPoint>,
    /// Grid points where the conditions hold again after having failed.
    pub monotonicity_violations: Vec<f64>,
}

/// Scan an ascending `b` grid, recording Conditions 1–2 at every point.
///
/// The diagonal of `op` is reused; only `b` changes between points.
pub fn scan_b_critical(op: &HbOperator, grid: &[f64], opts: &ConditionOptions) -> Result<BScan> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return crate::error::invalid("b grid must be sorted ascending");
    }
    let mut op = op.clone();
    let mut points = Vec::with_capacity(grid.len());
    let mut b_critical = 0.0f64;
    let mut failed = false;
    let mut violations = Vec::new();
    for &b in grid {
        op.set_b(b);
        let (report, _) = evaluate_conditions(&op, opts, None)?;
        let ok = report.both_hold();
        if ok {
            b_critical = b_critical.max(b);
            if failed {
                violations.push(b);
            }
        } else {
            failed = true;
        }
        points.push(ScanPoint { b, conditions_hold: ok, report });
    }
    Ok(BScan { b_critical, points, monotonicity_violations: violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{enumerate_spectrum, sample_k_spin, CostFunction, PolyCost};
    use crate::spectral::{ground_state, DENSE_TOL};

    fn op(n: usize, seed: u64, b: f64) -> HbOperator {
        HbOperator::new(&sample_k_spin(n, 3, seed).into(), 0.5, b).unwrap()
    }

    #[test]
    fn b_zero_satisfies_everything() {
        let (r, _) = evaluate_conditions(&op(8, 1, 0.0), &ConditionOptions::new(Method::Dense, 8), None).unwrap();
        assert!(r.large_excited_energy.holds);
        assert!((r.large_excited_energy.margin - 1.0 / 8.0).abs() < 1e-9);
        assert!(r.small_ground_energy_shift.holds);
        assert!(r.short_path.unwrap().holds);
        assert!(!r.implication_violated);
    }

    #[test]
    fn ground_shift_boundaries() {
        let n = 10;
        assert!(check_small_ground_energy_shift(-1.0, n, 1e-10).holds);
        assert!(check_small_ground_energy_shift(-1.0 - 1e-3, n, 1e-10).holds);
        assert!(!check_small_ground_energy_shift(-1.0 - 2e-3, n, 1e-10).holds);
        let v = check_small_ground_energy_shift(-1.0 - 2.0 / 1000.0, n, 1e-10);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn huge_b_breaks_condition_one() {
        let o = op(8, 2, 1e3);
        let s = ground_state(&o, Method::Dense, DENSE_TOL).unwrap();
        assert!(!check_large_excited_energy(&s, 8).holds);
    }

    #[test]
    fn tail_bound_on_two_spin_product() {
        let h: CostFunction = PolyCost::new(2, vec![(vec![0, 1], 1.0)]).unwrap().into();
        let t = enumerate_spectrum(&h).unwrap();
        let v = check_tail_bound(&t, 0.0, 0.5);
        assert_eq!(v.count, 2);
        assert!(v.holds);
        assert!(!check_tail_bound(&t, 0.0, 0.5 + 1e-9).holds);
        // eta -> 1: threshold 0, every state counted, holds at gamma = 0.
        let all = check_tail_bound(&t, 1.0 - 1e-12, 0.0);
        assert!(all.holds);
    }

    #[test]
    fn empirical_gamma_is_tight() {
        let t = enumerate_spectrum(&sample_k_spin(12, 3, 5).into()).unwrap();
        let g = empirical_gamma(&t, 0.5);
        assert!(g > 0.0 && g < 1.0);
        assert!(check_tail_bound(&t, 0.5, g - 1e-12).holds);
        assert!(!check_tail_bound(&t, 0.5, g + 1e-9).holds);
    }

    #[test]
    fn scan_behaviour() {
        let o = op(8, 3, 0.0);
        let opts = ConditionOptions::new(Method::Dense, 8);
        let s = scan_b_critical(&o, &[0.0], &opts).unwrap();
        assert_eq!(s.b_critical, 0.0);
        // The ground-energy window 1/n^3 is narrow: the first-order shift
        // b <+|g|+> already leaves it at b ~ 0.1 for n = 8.
        let s = scan_b_critical(&o, &[0.0, 0.01, 0.2, 50.0], &opts).unwrap();
        assert_eq!(s.b_critical, 0.01);
        assert!(s.points[2].report.large_excited_energy.holds);
        assert!(!s.points[2].report.small_ground_energy_shift.holds);
        assert!(s.monotonicity_violations.is_empty());
        for p in &s.points {
            assert!(!p.report.implication_violated);
        }
        assert!(scan_b_critical(&o, &[0.5, 0.1], &opts).is_err());
    }

    #[test]
    fn tail_lemma_guard() {
        assert!(!tail_lemma_applies(20, 0.01, 0.0));
        assert!(tail_lemma_applies(1024, 0.5, 1e-3));
        assert!(!tail_lemma_applies(1024, 0.5, 1.0));
    }
}
