//! Seeded instance sweeps: spectrum and overlap scans, condition and bound
//! sweeps, the scaling study, and deterministic CSV output.
//!
//! Every experiment is described by an [`ExperimentConfig`] and produces a CSV
//! table whose rows all start with the provenance columns
//! `seed,index,n,k,eta,b,tol`. Floats are written with 17 significant digits
//! (`{:.16e}`), so two runs of the same configuration produce identical bytes:
//! instance generation depends only on `(seed, index)`, eigensolver start
//! vectors are seeded, and the matrix-vector product uses a fixed reduction
//! order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::algo::{estimate_estar_binary_search, run_on_energies, AlgorithmRun, RunOptions, UnknownEstarOptions};
use crate::bounds::{agsp_lower_bound, check_lemma_overlap_pl, default_ell, runtime_estimate, runtime_table};
use crate::conditions::report_from_summary;
use crate::cost::{
    enumerate_spectrum, sample_csp, sample_k_spin_indexed, sample_max_ek_lin2, sample_random_kcnf_indexed, CostFunction,
};
use crate::error::{invalid, Error, Result};
use crate::spectral::{deflated_ground_energy, ground_state_with, HbOperator, Method, SolveOptions, SpectralSummary};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SpectrumScan,
    OverlapScan,
    Scaling,
    Conditions,
    Bounds,
    Table,
    Run,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SpectrumScan => "spectrum-scan",
            ExperimentKind::OverlapScan => "overlap-scan",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Conditions => "conditions",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Table => "table",
            ExperimentKind::Run => "run",
        }
    }
}

/// Random instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Gaussian `k`-spin model.
    KSpin,
    /// MAX-Ek-LIN2 with `m` random `±1` parity terms (default `m = 2n`).
    MaxEkLin2,
    /// Random k-CNF with `m` clauses (default `m = 3n`).
    KCnf,
    /// Random MAX-k-CSP with `m` clauses of `s` satisfying patterns.
    Csp,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::KSpin => "k-spin",
            Ensemble::MaxEkLin2 => "max-ek-lin2",
            Ensemble::KCnf => "k-cnf",
            Ensemble::Csp => "csp",
        }
    }
}

fn default_ensemble() -> Ensemble {
    Ensemble::KSpin
}
fn default_k() -> usize {
    3
}
fn default_eta() -> f64 {
    0.5
}
fn default_instances() -> usize {
    1
}
fn default_method() -> Method {
    Method::Auto
}

/// Configuration of one experiment (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_ensemble")]
    pub ensemble: Ensemble,
    /// Single instance size.
    #[serde(default)]
    pub n: Option<usize>,
    /// Inclusive size range (scaling study).
    #[serde(default)]
    pub n_range: Option<(usize, usize)>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// `b` values for scans; default `0, 0.01, ..., 1`.
    #[serde(default)]
    pub b_grid: Option<Vec<f64>>,
    /// Single `b` for scaling, bounds and run; default `0.7`.
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Output directory (the CLI's `--out` overrides it).
    #[serde(default)]
    pub output: Option<String>,
    /// Run the unknown-`E*` search instead of supplying `E*` (`run` only).
    #[serde(default)]
    pub unknown_estar: bool,
}

impl ExperimentConfig {
    /// Minimal config of `kind` with all defaults.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            ensemble: default_ensemble(),
            n: None,
            n_range: None,
            k: default_k(),
            m: None,
            s: None,
            eta: default_eta(),
            b_grid: None,
            b: None,
            instances: default_instances(),
            seed: 0,
            method: default_method(),
            tol: None,
            output: None,
            unknown_estar: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return invalid(format!("eta must lie in (0,1), got {}", self.eta));
        }
        if self.instances == 0 {
            return invalid("instances must be positive");
        }
        if let Some(grid) = &self.b_grid {
            if grid.is_empty() || grid.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return invalid("b_grid must be a non-empty list of finite non-negative values");
            }
        }
        if let Some((lo, hi)) = self.n_range {
            if lo > hi {
                return invalid(format!("empty n_range ({lo}, {hi})"));
            }
        }
        if self.kind != ExperimentKind::Table && self.sizes().is_empty() {
            return invalid("set n or n_range");
        }
        Ok(())
    }

    /// Instance sizes: `n_range` if given, else `[n]`.
    pub fn sizes(&self) -> Vec<usize> {
        match (self.n_range, self.n) {
            (Some((lo, hi)), _) => (lo..=hi).collect(),
            (None, Some(n)) => vec![n],
            _ => Vec::new(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.b_grid.clone().unwrap_or_else(|| (0..=100).map(|i| i as f64 / 100.0).collect())
    }

    pub fn single_b(&self) -> f64 {
        self.b.unwrap_or(0.7)
    }

    pub fn tol_for(&self, n: usize) -> f64 {
        self.tol.unwrap_or_else(|| self.method.default_tol(n))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Instance `index` of the configured ensemble at size `n`.
pub fn make_instance(cfg: &ExperimentConfig, n: usize, index: u64) -> Result<CostFunction> {
    let k = cfg.k;
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= n (k = {k}, n = {n})"));
    }
    Ok(match cfg.ensemble {
        Ensemble::KSpin => sample_k_spin_indexed(n, k, cfg.seed, index).into(),
        Ensemble::MaxEkLin2 => sample_max_ek_lin2(n, k, cfg.m.unwrap_or(2 * n), cfg.seed, index)
            .ok_or_else(|| Error::Degenerate("sampled MAX-Ek-LIN2 terms cancel".into()))?
            .into(),
        Ensemble::KCnf => sample_random_kcnf_indexed(n, k, cfg.m.unwrap_or(3 * n), cfg.seed, index).into(),
        Ensemble::Csp => {
            let s = cfg.s.unwrap_or((1 << k) - 1);
            if s == 0 || s >= 1 << k {
                return invalid(format!("s must lie in 1..2^k, got {s}"));
            }
            sample_csp(n, k, cfg.m.unwrap_or(3 * n), s, cfg.seed, index).into()
        }
    })
}

/// Ordinary-least-squares fit of `log2(value) = intercept + slope n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    /// `log2` of the prefactor.
    pub intercept: f64,
    pub prefactor: f64,
    /// Residual standard error of the `log2` fit.
    pub residual: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval of the slope (t-quantile, `points - 2` dof).
    pub ci: (f64, f64),
    pub points: usize,
}

/// Fit `value ≈ A 2^{s n}` by OLS on `log2(value)`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return invalid(format!("need at least 3 points, got {}", points.len()));
    }
    if points.iter().any(|&(x, v)| !x.is_finite() || !(v > 0.0) || !v.is_finite()) {
        return invalid("points must be finite with positive values");
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all x values coincide");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = m - 2.0;
    let residual = if dof > 0.0 { (rss / dof).sqrt() } else { 0.0 };
    let slope_stderr = residual / sxx.sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidParameter(e.to_string()))?.inverse_cdf(0.975);
    Ok(FitResult {
        slope,
        intercept,
        prefactor: intercept.exp2(),
        residual,
        slope_stderr,
        ci: (slope - t * slope_stderr, slope + t * slope_stderr),
        points: points.len(),
    })
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Format a float with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// CSV table under construction.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

const PROVENANCE: [&str; 7] = ["seed", "index", "n", "k", "eta", "b", "tol"];

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        let mut header = PROVENANCE.to_vec();
        header.extend_from_slice(columns);
        Self { header, rows: Vec::new() }
    }

    fn push(&mut self, prov: &Prov, b: f64, values: Vec<String>) {
        let mut row = vec![
            prov.seed.to_string(),
            prov.index.to_string(),
            prov.n.to_string(),
            prov.k.to_string(),
            fmt_f(prov.eta),
            fmt_f(b),
            fmt_f(prov.tol),
        ];
        row.extend(values);
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Every row, as formatted cells in header order.
    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// The cells of one named column, or `None` if there is no such column.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Render as CSV text.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Provenance of one instance.
#[derive(Debug, Clone, Copy)]
struct Prov {
    seed: u64,
    index: u64,
    n: usize,
    k: usize,
    eta: f64,
    tol: f64,
}

/// Result of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub table: Table,
    /// Scaling study only.
    pub fit: Option<FitResult>,
    /// Scaling study: per-`n` medians of `<z*|psi_b>^{-1}`.
    pub medians: Vec<(usize, f64)>,
    /// `(n, index)` of instances excluded from the fit.
    pub excluded: Vec<(usize, u64)>,
}

/// Manifest written next to every CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub crate_version: &'static str,
    pub wall_time_s: f64,
    pub csv: String,
    pub rows: usize,
    pub fit: Option<FitResult>,
    pub medians: Vec<(usize, f64)>,
    pub excluded: Vec<(usize, u64)>,
}

/// Tasks run in parallel over instances only while a state vector is small;
/// larger instances run one at a time (the matrix-vector product is itself
/// parallel) to bound memory.
const PARALLEL_INSTANCE_DIM: usize = 1 << 16;

fn map_instances<T: Send>(n: usize, count: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    if (1usize << n) <= PARALLEL_INSTANCE_DIM {
        (0..count as u64).into_par_iter().map(f).collect()
    } else {
        (0..count as u64).map(f).collect()
    }
}

fn solve(op: &HbOperator, cfg: &ExperimentConfig, levels: usize, index: u64) -> Result<SpectralSummary> {
    let mut so = SolveOptions::new(cfg.method, op.n());
    so.tol = cfg.tol_for(op.n());
    so.want_max = false;
    so.levels = levels;
    so.seed = cfg.seed ^ index.wrapping_mul(0x2545_F491_4F6C_DD1D);
    ground_state_with(op, &so)
}

fn status(e: &Error) -> String {
    format!("error: {e}").replace(['\n', ','], " ")
}

fn blank(k: usize) -> Vec<String> {
    vec![String::new(); k]
}

/// Rows `(E_0, E_1, E_2)` across the `b` grid.
pub fn spectrum_scan(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&["e0", "e1", "e2", "residual", "status"]);
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let mut out = Vec::new();
            let op = make_instance(cfg, n, index).and_then(|c| HbOperator::new(&c, cfg.eta, 0.0));
            let mut op = match op {
                Ok(op) => op,
                Err(e) => {
                    out.push((prov, f64::NAN, [blank(4), vec![status(&e)]].concat()));
                    return out;
                }
            };
            for b in cfg.grid() {
                op.set_b(b);
                let values = match solve(&op, cfg, 3, index) {
                    Ok(s) => vec![
                        fmt_f(s.e_ground),
                        fmt_f(s.e_excited),
                        fmt_opt(s.e_higher.first().copied()),
                        fmt_f(s.residual),
                        "ok".into(),
                    ],
                    Err(e) => [blank(4), vec![status(&e)]].concat(),
                };
                out.push((prov, b, values));
            }
            out
        });
        rows.into_iter().flatten().for_each(|(p, b, v)| table.push(&p, b, v));
    }
    Ok(table)
}

/// Rows `(<+|psi_b>, <z*|psi_b>, ||Pi* psi_b||)` across the `b` grid.
pub fn overlap_scan(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&["overlap_plus", "overlap_zstar", "overlap_opt", "zstar", "status"]);
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let mut out = Vec::new();
            let op = make_instance(cfg, n, index).and_then(|c| HbOperator::new(&c, cfg.eta, 0.0));
            let mut op = match op {
                Ok(op) => op,
                Err(e) => {
                    out.push((prov, f64::NAN, [blank(4), vec![status(&e)]].concat()));
                    return out;
                }
            };
            for b in cfg.grid() {
                op.set_b(b);
                let values = match solve(&op, cfg, 2, index) {
                    Ok(s) => {
                        let (z, a) = best_optimum(&s);
                        vec![fmt_f(s.overlap_plus), fmt_f(a), fmt_f(s.overlap_opt), z.to_string(), "ok".into()]
                    }
                    Err(e) => [blank(4), vec![status(&e)]].concat(),
                };
                out.push((prov, b, values));
            }
            out
        });
        rows.into_iter().flatten().for_each(|(p, b, v)| table.push(&p, b, v));
    }
    Ok(table)
}

/// Optimum with the largest amplitude (the first one on ties).
fn best_optimum(s: &SpectralSummary) -> (u64, f64) {
    s.overlap_zstar.iter().copied().fold((0, f64::NEG_INFINITY), |acc, (z, a)| if a > acc.1 { (z, a) } else { acc })
}

fn prov(cfg: &ExperimentConfig, n: usize, index: u64) -> Prov {
    Prov { seed: cfg.seed, index, n, k: cfg.k, eta: cfg.eta, tol: cfg.tol_for(n) }
}

fn verdict_cols(v: Option<crate::conditions::Verdict>) -> [String; 2] {
    match v {
        Some(v) => [v.holds.to_string(), fmt_f(v.margin)],
        None => [String::new(), String::new()],
    }
}

/// Conditions 1–2 (and the short-path condition) per `(instance, b)`.
pub fn conditions_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&[
        "e_b",
        "e_excited",
        "e_deflated",
        "large_excited_energy",
        "large_excited_margin",
        "small_shift",
        "small_shift_margin",
        "short_path",
        "short_path_margin",
        "status",
    ]);
    let grid = cfg.b_grid.clone().unwrap_or_else(|| vec![cfg.single_b()]);
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let mut out = Vec::new();
            let op = make_instance(cfg, n, index).and_then(|c| HbOperator::new(&c, cfg.eta, 0.0));
            let mut op = match op {
                Ok(op) => op,
                Err(e) => {
                    out.push((prov, f64::NAN, [blank(9), vec![status(&e)]].concat()));
                    return out;
                }
            };
            for &b in &grid {
                op.set_b(b);
                let row = solve(&op, cfg, 2, index).and_then(|s| {
                    let defl = Some(deflated_ground_energy(&op, cfg.method, cfg.tol_for(n))?);
                    let r = report_from_summary(&op, &s, defl, None);
                    let [c1, m1] = verdict_cols(Some(r.large_excited_energy));
                    let [c2, m2] = verdict_cols(Some(r.small_ground_energy_shift));
                    let [c3, m3] = verdict_cols(r.short_path);
                    Ok(vec![
                        fmt_f(r.e_ground),
                        fmt_f(r.e_excited),
                        fmt_opt(r.e_deflated),
                        c1,
                        m1,
                        c2,
                        m2,
                        c3,
                        m3,
                        "ok".into(),
                    ])
                });
                out.push((prov, b, row.unwrap_or_else(|e| [blank(9), vec![status(&e)]].concat())));
            }
            out
        });
        rows.into_iter().flatten().for_each(|(p, b, v)| table.push(&p, b, v));
    }
    Ok(table)
}

/// Measured overlaps against the runtime bound, the projector-overlap lemma
/// and (for depolarizing ensembles) the closed-form lower bound on
/// `<+|P_L|z*>`.
pub fn bounds_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&[
        "overlap_plus",
        "overlap_opt",
        "runtime_quantity",
        "runtime_bound",
        "runtime_bound_holds",
        "conditions_hold",
        "ell",
        "lemma_lhs",
        "p_ell",
        "p_ell_plus_1",
        "lemma_holds",
        "agsp_lower_bound",
        "agsp_holds",
        "status",
    ]);
    let b = cfg.single_b();
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let row = (|| -> Result<Vec<String>> {
                let cost = make_instance(cfg, n, index)?;
                let op = HbOperator::new(&cost, cfg.eta, b)?;
                let s = solve(&op, cfg, 2, index)?;
                let r = report_from_summary(&op, &s, None, None);
                let rt = runtime_estimate(&s);
                let (z, _) = best_optimum(&s);
                let ell = default_ell(n);
                let lemma = check_lemma_overlap_pl(&op, &s, &r, z, 0.0, ell).ok();
                // MAX-Ek-LIN2 is alpha-depolarizing with alpha = 2k/n.
                let agsp = (cfg.ensemble == Ensemble::MaxEkLin2)
                    .then(|| agsp_lower_bound(b, 2.0 * cfg.k as f64 / n as f64, cfg.eta, 1.0).ok())
                    .flatten()
                    .map(|m| m * (-(n as f64) / 2.0).exp2());
                let agsp_holds = match (agsp, lemma) {
                    (Some(lb), Some(l)) => (lb <= l.p_ell[0] * (1.0 + 1e-12)).to_string(),
                    _ => String::new(),
                };
                Ok(vec![
                    fmt_f(s.overlap_plus),
                    fmt_f(s.overlap_opt),
                    fmt_f(rt.quantity),
                    fmt_f(rt.projector_bound),
                    rt.bound_holds.to_string(),
                    r.both_hold().to_string(),
                    ell.to_string(),
                    fmt_opt(lemma.map(|l| l.lhs)),
                    fmt_opt(lemma.map(|l| l.p_ell[0])),
                    fmt_opt(lemma.map(|l| l.p_ell[1])),
                    lemma.map(|l| l.holds().to_string()).unwrap_or_default(),
                    fmt_opt(agsp),
                    agsp_holds,
                    "ok".into(),
                ])
            })();
            (prov, row.unwrap_or_else(|e| [blank(13), vec![status(&e)]].concat()))
        });
        rows.into_iter().for_each(|(p, v)| table.push(&p, b, v));
    }
    Ok(table)
}

/// Idealized runs of the algorithm, one row per instance.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&[
        "e_star",
        "estimate",
        "z_out",
        "h_out",
        "optimal",
        "overlap_plus",
        "overlap_opt",
        "step2_success",
        "step3_success",
        "total_cost",
        "warnings",
        "status",
    ]);
    let b = cfg.single_b();
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let row = run_instance(cfg, n, index).map(|(run, estimate)| {
                vec![
                    fmt_f(run.e_star_true),
                    fmt_opt(estimate),
                    run.run.z_out.to_string(),
                    fmt_f(run.run.h_out),
                    run.run.optimal.to_string(),
                    fmt_f(run.run.overlap_plus),
                    fmt_f(run.run.overlap_opt),
                    fmt_f(run.run.step2.success_prob),
                    fmt_f(run.run.step3.success_prob),
                    fmt_f(run.run.total_cost),
                    run.run.warnings.len().to_string(),
                    "ok".into(),
                ]
            });
            (prov, row.unwrap_or_else(|e| [blank(11), vec![status(&e)]].concat()))
        });
        rows.into_iter().for_each(|(p, v)| table.push(&p, b, v));
    }
    Ok(table)
}

/// One idealized run together with the true optimum.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceRun {
    pub seed: u64,
    pub index: u64,
    pub e_star_true: f64,
    pub run: AlgorithmRun,
}

/// Run the algorithm on instance `index` at `b = single_b()`. With
/// `unknown_estar` the supplied `E*` is the search estimate (also returned).
pub fn run_instance(cfg: &ExperimentConfig, n: usize, index: u64) -> Result<(InstanceRun, Option<f64>)> {
    let b = cfg.single_b();
    let cost = make_instance(cfg, n, index)?;
    let table = enumerate_spectrum(&cost)?;
    let energies = cost.energies()?;
    let e_star = table.e_star();
    let estimate = if cfg.unknown_estar { Some(unknown_estar(cfg, n, &energies, e_star, b, index)?) } else { None };
    let mut opts = RunOptions::new(n);
    opts.method = cfg.method;
    opts.tol = cfg.tol_for(n);
    let run = run_on_energies(n, &energies, estimate.unwrap_or(e_star), cfg.eta, b, cfg.seed ^ index, &opts)?;
    Ok((InstanceRun { seed: cfg.seed, index, e_star_true: e_star, run }, estimate))
}

/// Unknown-`E*` search with bounds taken from the exhaustive table:
/// `q = E|H|/2 <= |E*|` (mean-zero costs) and `Q = max |H|`, a 4x4 grid plus
/// the image of the configured `(b, eta)`.
fn unknown_estar(cfg: &ExperimentConfig, n: usize, energies: &[f64], e_star: f64, b: f64, index: u64) -> Result<f64> {
    let mean_abs = energies.iter().map(|e| e.abs()).sum::<f64>() / energies.len() as f64;
    let q = mean_abs / 2.0;
    let big_q = energies.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let table = crate::cost::SpectrumTable::from_energies(n, energies)?;
    let epsilon = crate::algo::level_separation(&table).unwrap_or(1.0);
    let good = crate::algo::gridpoint_for(b, cfg.eta, -e_star, big_q)?;
    let opts = UnknownEstarOptions {
        q,
        big_q,
        epsilon,
        theta_points: 4,
        phi_points: 4,
        extra: vec![(good.theta, good.phi)],
        p_min: 0.5f64.powi(n as i32),
    };
    Ok(estimate_estar_binary_search(n, energies, &opts, cfg.seed ^ index)?.estimate)
}

/// The runtime table, one row per problem (provenance columns are zero).
pub fn table_rows() -> Result<Table> {
    let mut table = Table::new(&["problem", "exponent", "c", "expression", "published"]);
    let prov = Prov { seed: 0, index: 0, n: 0, k: 0, eta: f64::NAN, tol: 0.0 };
    for row in runtime_table()? {
        table.push(
            &prov,
            f64::NAN,
            vec![
                row.problem.into(),
                fmt_opt(row.exponent),
                fmt_opt(row.c),
                row.expression.into(),
                row.published.into(),
            ],
        );
    }
    Ok(table)
}

/// Per-instance `<z*|psi_b>^{-1}` at a single `b`, medians per `n`, and an
/// exponential fit of the medians. Instances failing the large-excited-energy
/// condition are recorded and excluded from the medians.
pub fn scaling_study(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut table = Table::new(&[
        "inv_overlap_zstar",
        "overlap_plus",
        "overlap_opt",
        "e_b",
        "e_excited",
        "large_excited_energy",
        "small_shift",
        "excluded",
        "status",
    ]);
    let b = cfg.single_b();
    let mut medians = Vec::new();
    let mut excluded = Vec::new();
    for n in cfg.sizes() {
        let rows = map_instances(n, cfg.instances, |index| {
            let prov = prov(cfg, n, index);
            let res = make_instance(cfg, n, index)
                .and_then(|c| HbOperator::new(&c, cfg.eta, b))
                .and_then(|op| solve(&op, cfg, 2, index).map(|s| (report_from_summary(&op, &s, None, None), s)));
            (prov, res)
        });
        let mut kept = Vec::new();
        for (prov, res) in rows {
            match res {
                Ok((r, s)) => {
                    let inv = 1.0 / best_optimum(&s).1;
                    let ok = r.large_excited_energy.holds;
                    if ok {
                        kept.push(inv);
                    } else {
                        excluded.push((n, prov.index));
                    }
                    table.push(
                        &prov,
                        b,
                        vec![
                            fmt_f(inv),
                            fmt_f(s.overlap_plus),
                            fmt_f(s.overlap_opt),
                            fmt_f(s.e_ground),
                            fmt_f(s.e_excited),
                            ok.to_string(),
                            r.small_ground_energy_shift.holds.to_string(),
                            (!ok).to_string(),
                            "ok".into(),
                        ],
                    );
                }
                Err(e) => {
                    excluded.push((n, prov.index));
                    table.push(&prov, b, [blank(7), vec!["true".into(), status(&e)]].concat());
                }
            }
        }
        if let Some(m) = median(&kept) {
            medians.push((n, m));
        }
    }
    let pts: Vec<(f64, f64)> = medians.iter().map(|&(n, m)| (n as f64, m)).collect();
    let fit = if pts.len() >= 3 { Some(fit_exponential(&pts)?) } else { None };
    Ok(ExperimentOutput { kind: ExperimentKind::Scaling, table, fit, medians, excluded })
}

/// Run the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let plain =
        |table| ExperimentOutput { kind: cfg.kind, table, fit: None, medians: Vec::new(), excluded: Vec::new() };
    Ok(match cfg.kind {
        ExperimentKind::SpectrumScan => plain(spectrum_scan(cfg)?),
        ExperimentKind::OverlapScan => plain(overlap_scan(cfg)?),
        ExperimentKind::Conditions => plain(conditions_sweep(cfg)?),
        ExperimentKind::Bounds => plain(bounds_sweep(cfg)?),
        ExperimentKind::Run => plain(run_sweep(cfg)?),
        ExperimentKind::Table => plain(table_rows()?),
        ExperimentKind::Scaling => scaling_study(cfg)?,
    })
}

/// Run `cfg` and write `<kind>.csv` and `<kind>.manifest.json` into `dir`.
pub fn run_and_write(cfg: &ExperimentConfig, dir: &Path) -> Result<(ExperimentOutput, PathBuf)> {
    let start = Instant::now();
    let out = run_experiment(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    let name = cfg.kind.name();
    let csv_path = dir.join(format!("{name}.csv"));
    std::fs::write(&csv_path, out.table.to_csv()?)?;
    let manifest = Manifest {
        experiment: name,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        crate_version: env!("CARGO_PKG_VERSION"),
        wall_time_s: wall,
        csv: format!("{name}.csv"),
        rows: out.table.len(),
        fit: out.fit,
        medians: out.medians.clone(),
        excluded: out.excluded.clone(),
    };
    std::fs::write(dir.join(format!("{name}.manifest.json")), serde_json::to_string_pretty(&manifest)?)?;
    Ok((out, csv_path))
}
