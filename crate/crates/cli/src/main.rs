use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mom_tournament::harness::{
    calibrate_from_config, confidence_curve, design_name, emit_csv, emit_svg_curves, load_config, parse_csv,
    render_sweep_csv, run_experiment, run_sweep, ConfidenceCurve, ExperimentConfig, Method, SweepParam,
};

#[derive(Parser)]
#[command(name = "momt", version, about = "Median-of-means tournament experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write per-trial CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; falls back to `output_path` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall time per method (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
        /// Multiply the noise level handed to the tournament.
        #[arg(long)]
        sigma_inflate: Option<f64>,
    },
    /// Repeat an experiment over values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of N, n_dim, noise_tail, r_mult.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plot empirical confidence curves from a results CSV.
    Curves {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
    },
    /// Calibrate the distance-oracle constants for the configured design.
    CalibrateOracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            timing,
            sigma_inflate,
        } => {
            let mut cfg = load(&config, seed)?;
            cfg.record_runtime |= timing;
            if let Some(k) = sigma_inflate {
                cfg.sigma_inflate = k;
            }
            let Some(out) = out.or_else(|| cfg.output_path.clone()) else {
                bail!("no output path: pass --out or set output_path in the config");
            };
            let report = run_experiment(&cfg)?;
            for f in &report.failures {
                eprintln!("trial {} {}: {}", f.trial, f.method, f.message);
            }
            emit_csv(&report.rows, &out)?;
            eprintln!("{} rows ({} failed) -> {}", report.rows.len(), report.failures.len(), out.display());
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            seed,
        } => {
            let cfg = load(&config, seed)?;
            let runs = run_sweep(&cfg, param, &values)?;
            let mut failed = 0;
            let table: Vec<_> = runs
                .into_iter()
                .map(|(v, rep)| {
                    failed += rep.failures.len();
                    (v, rep.rows)
                })
                .collect();
            std::fs::write(&out, render_sweep_csv(param, &table))
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} sweep points ({failed} failed rows) -> {}", table.len(), out.display());
        }
        Command::Curves { input, out, thresholds } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows = parse_csv(&text)?;
            let mut methods: Vec<Method> = Vec::new();
            for r in &rows {
                if !methods.contains(&r.method) {
                    methods.push(r.method);
                }
            }
            if methods.is_empty() {
                bail!("{} has no result rows", input.display());
            }
            let curves = methods
                .into_iter()
                .map(|m| {
                    Ok(ConfidenceCurve {
                        label: m.to_string(),
                        points: confidence_curve(&rows, m, &thresholds)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit_svg_curves(&curves, &out)?;
        }
        Command::CalibrateOracle { config } => {
            let cfg = load(&config, None)?;
            let cal = calibrate_from_config(&cfg)?;
            println!(
                "# design {} n_dim {} N {} pairs {} confidence {}",
                design_name(cfg.problem.design),
                cfg.problem.n_dim,
                cfg.problem.n_per_part,
                cfg.calibration.pairs,
                cfg.calibration.target_confidence
            );
            for e in &cal.per_ell {
                println!("# ell {:>3} alpha {:.6} beta {:.6} ratio {:.6}", e.ell, e.alpha, e.beta, e.ratio());
            }
            println!("alpha = {}", cal.alpha);
            println!("beta = {}", cal.beta);
            println!("ell = {}", cal.ell);
        }
    }
    Ok(())
}
