use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shortpath_core::bounds::{speedup_c, Family};
use shortpath_core::experiments::{
    run_and_write, run_experiment, run_instance, Ensemble, ExperimentConfig, ExperimentKind,
};
use shortpath_core::transform::{b_max, gamma_csp, gamma_kspin};

#[derive(Parser)]
#[command(name = "shortpath-lab", version, about = "Spectral experiments for the short-path optimization algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print gamma, b_max and speedup constants.
    Params {
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// Fix eta instead of maximizing over it.
        #[arg(long)]
        eta: Option<f64>,
        /// |E*|/m for MAX-k-CSP.
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
    },
    /// Conditions 1-2 and the short-path condition per (instance, b).
    Conditions(ExpArgs),
    /// The quantum runtime table.
    Table(ExpArgs),
    /// Measured overlaps against the runtime and projector bounds.
    Bounds(ExpArgs),
    /// Idealized end-to-end runs; prints one JSON object per run.
    Run(ExpArgs),
    /// Lowest three eigenvalues across a b grid.
    SpectrumScan(ExpArgs),
    /// <+|psi_b> and <z*|psi_b> across a b grid.
    OverlapScan(ExpArgs),
    /// Per-n medians of <z*|psi_b>^{-1} and an exponential fit.
    Scaling(ExpArgs),
}

#[derive(Args, Default)]
struct ExpArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV and manifest (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// k-spin | max-ek-lin2 | k-cnf | csp
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    instances: Option<usize>,
    /// Search for E* instead of supplying it (run only).
    #[arg(long)]
    unknown_estar: bool,
}

fn build_config(kind: ExperimentKind, a: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).context("parsing config")?;
            if cfg.kind != kind {
                bail!("config kind {:?} does not match subcommand {}", cfg.kind, kind.name());
            }
            cfg.kind = kind;
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(e) = &a.ensemble {
        cfg.ensemble = serde_json::from_value::<Ensemble>(serde_json::Value::String(e.clone()))
            .with_context(|| format!("unknown ensemble {e}"))?;
    }
    if let Some(n) = a.n {
        cfg.n = Some(n);
        cfg.n_range = None;
    }
    cfg.k = a.k.unwrap_or(cfg.k);
    cfg.eta = a.eta.unwrap_or(cfg.eta);
    if a.b.is_some() {
        cfg.b = a.b;
    }
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.instances = a.instances.unwrap_or(cfg.instances);
    cfg.unknown_estar |= a.unknown_estar;
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(kind: ExperimentKind, a: &ExpArgs) -> Result<()> {
    let cfg = build_config(kind, a)?;
    if kind == ExperimentKind::Run {
        for n in cfg.sizes() {
            for index in 0..cfg.instances as u64 {
                match run_instance(&cfg, n, index) {
                    Ok((run, estimate)) => {
                        let mut v = serde_json::to_value(&run)?;
                        v["estimate"] = serde_json::json!(estimate);
                        println!("{}", serde_json::to_string(&v)?);
                    }
                    Err(e) => println!("{}", serde_json::json!({ "n": n, "index": index, "error": e.to_string() })),
                }
            }
        }
    }
    let out_dir = a.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match out_dir {
        Some(dir) => {
            let (out, path) = run_and_write(&cfg, &dir)?;
            eprintln!("wrote {} ({} rows)", path.display(), out.table.len());
            report_fit(&out);
        }
        None if kind == ExperimentKind::Run => {}
        None => {
            let out = run_experiment(&cfg)?;
            print!("{}", out.table.to_csv()?);
            report_fit(&out);
        }
    }
    Ok(())
}

fn report_fit(out: &shortpath_core::experiments::ExperimentOutput) {
    if let Some(f) = out.fit {
        eprintln!(
            "fit: {:.4} * 2^({:.4} n), 95% CI [{:.4}, {:.4}], excluded {}",
            f.prefactor,
            f.slope,
            f.ci.0,
            f.ci.1,
            out.excluded.len()
        );
    }
}

fn params(k: u32, eta: Option<f64>, ratio: f64) -> Result<()> {
    let csp = speedup_c(Family::MaxKCsp { k, ratio, eta })?;
    let kspin = speedup_c(Family::KSpin { k, eta })?;
    let g_csp = gamma_csp(k, ratio, csp.eta);
    let g_kspin = gamma_kspin(k, kspin.eta);
    let v = serde_json::json!({
        "k": k,
        "max_k_csp": {
            "ratio": ratio,
            "gamma": g_csp,
            "b_max": b_max(g_csp),
            "report": csp,
        },
        "k_spin": {
            "gamma": g_kspin,
            "b_max": b_max(g_kspin),
            "report": kspin,
        },
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Params { k, eta, ratio } => params(k, eta, ratio),
        Command::Conditions(a) => experiment(ExperimentKind::Conditions, &a),
        Command::Table(a) => experiment(ExperimentKind::Table, &a),
        Command::Bounds(a) => experiment(ExperimentKind::Bounds, &a),
        Command::Run(a) => experiment(ExperimentKind::Run, &a),
        Command::SpectrumScan(a) => experiment(ExperimentKind::SpectrumScan, &a),
        Command::OverlapScan(a) => experiment(ExperimentKind::OverlapScan, &a),
        Command::Scaling(a) => experiment(ExperimentKind::Scaling, &a),
    }
}
