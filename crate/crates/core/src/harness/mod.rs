//! Monte Carlo experiment engine: trials, confidence curves, CSV and SVG
//! output, configuration files.

mod config_file;
mod csv;
mod svg;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::baselines::{erm_least_squares_with, mom_risk_minimizer, DEFAULT_MAX_CONDITION};
use crate::candidate::Candidate;
use crate::config::TournamentConfig;
use crate::data::{Dataset, Part};
use crate::datagen::{generate, true_excess_risk, true_l2_error, Design, Noise, ProblemSpec};
use crate::error::{invalid, Error, Result};
use crate::oracle::{calibrate_oracle_constants_on_designs, OracleCalibration};
use crate::pool::{build_pool, Norm, PoolSpec, PoolStrategy};
use crate::rng::RngSpec;
use crate::theory::rate_full_space;
use crate::tournament::run_tournament;

pub use self::config_file::{load_config, parse_config};
pub use self::csv::{emit_csv, parse_csv, render_csv, render_sweep_csv, CSV_HEADER};
pub use self::svg::{emit_svg_curves, render_svg};

const POOL_SALT: u64 = 0x706f_6f6c;
const CALIBRATION_SALT: u64 = 0x6361_6c69;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tournament,
    ErmLs,
    MomRiskMin,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tournament => "tournament",
            Method::ErmLs => "erm_ls",
            Method::MomRiskMin => "mom_risk_min",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tournament" => Method::Tournament,
            "erm_ls" | "erm" => Method::ErmLs,
            "mom_risk_min" | "mom_risk" => Method::MomRiskMin,
            other => return invalid(format!("unknown method {other:?}")),
        })
    }
}

/// Where a generated pool is centered.
#[derive(Debug, Clone, PartialEq)]
pub enum PoolCenter {
    /// The true coefficient vector `t0`.
    Truth,
    /// Least squares on the first sample part.
    ErmFirstPart,
    Fixed(Vec<f64>),
}

/// Pool radius, either absolute or a multiple of the trial's `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoolRadius {
    Absolute(f64),
    TimesR(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolConfig {
    pub strategy: PoolStrategy,
    pub center: PoolCenter,
    pub radius: PoolRadius,
    pub norm: Norm,
    pub include_center: bool,
}

/// How `t0` is laid out; lets dimension sweeps rebuild it.
#[derive(Debug, Clone, PartialEq)]
pub enum T0Pattern {
    Ones,
    /// `e_k`.
    Basis(usize),
    Explicit(Vec<f64>),
}

impl T0Pattern {
    /// The most general pattern that reproduces `t0`.
    pub fn infer(t0: &[f64]) -> Self {
        if !t0.is_empty() && t0.iter().all(|&v| v == 1.0) {
            return T0Pattern::Ones;
        }
        let nonzero: Vec<usize> = (0..t0.len()).filter(|&i| t0[i] != 0.0).collect();
        match nonzero[..] {
            [k] if t0[k] == 1.0 => T0Pattern::Basis(k),
            _ => T0Pattern::Explicit(t0.to_vec()),
        }
    }

    pub fn build(&self, n_dim: usize) -> Result<Vec<f64>> {
        match self {
            T0Pattern::Ones => Ok(vec![1.0; n_dim]),
            T0Pattern::Basis(k) => {
                if *k >= n_dim {
                    return invalid(format!("basis index {k} out of range for dimension {n_dim}"));
                }
                let mut v = vec![0.0; n_dim];
                v[*k] = 1.0;
                Ok(v)
            }
            T0Pattern::Explicit(v) => {
                if v.len() != n_dim {
                    return invalid(format!("t0 has length {}, expected {n_dim}", v.len()));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Settings for `calibrate-oracle`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub ell_grid: Vec<usize>,
    pub pairs: usize,
    pub target_confidence: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            ell_grid: vec![1, 2, 4, 8, 16],
            pairs: 500,
            target_confidence: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub t0_pattern: T0Pattern,
    /// `r`, `sigma` are overwritten per trial.
    pub tournament: TournamentConfig,
    pub pool: PoolConfig,
    pub methods: Vec<Method>,
    pub n_trials: usize,
    pub base_seed: u64,
    /// Each trial runs once per multiplier with `r = multiplier × base r`.
    pub r_multipliers: Vec<f64>,
    /// Base `r`; defaults to `σ sqrt(n / N)`.
    pub base_r: Option<f64>,
    /// `sigma` handed to the tournament; defaults to the noise level times
    /// `sigma_inflate`.
    pub tournament_sigma: Option<f64>,
    pub sigma_inflate: f64,
    pub erm_max_condition: f64,
    /// Measure wall time per method. Off by default so output is
    /// byte-for-byte reproducible.
    pub record_runtime: bool,
    pub output_path: Option<PathBuf>,
    pub calibration: CalibrationConfig,
}

impl ExperimentConfig {
    /// A configuration with library defaults around `problem`.
    pub fn new(problem: ProblemSpec) -> Self {
        Self {
            t0_pattern: T0Pattern::infer(&problem.t0),
            problem,
            tournament: TournamentConfig::default(),
            pool: PoolConfig {
                strategy: PoolStrategy::Shells {
                    multiples: vec![0.5, 1.0, 2.0, 8.0],
                    per_shell: 10,
                },
                center: PoolCenter::Truth,
                radius: PoolRadius::TimesR(1.0),
                norm: Norm::L2,
                include_center: true,
            },
            methods: vec![Method::Tournament, Method::ErmLs],
            n_trials: 100,
            base_seed: 0,
            r_multipliers: vec![1.0],
            base_r: None,
            tournament_sigma: None,
            sigma_inflate: 1.0,
            erm_max_condition: DEFAULT_MAX_CONDITION,
            record_runtime: false,
            output_path: None,
            calibration: CalibrationConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.n_trials == 0 {
            return invalid("n_trials must be at least 1");
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required");
        }
        if self.r_multipliers.is_empty() || self.r_multipliers.iter().any(|m| !(*m > 0.0)) {
            return invalid("r_multipliers must be a nonempty list of positive reals");
        }
        if !(self.sigma_inflate > 0.0) {
            return invalid("sigma_inflate must be positive");
        }
        if let PoolCenter::Fixed(c) = &self.pool.center {
            if c.len() != self.problem.n_dim {
                return invalid("fixed pool center has the wrong dimension");
            }
        }
        self.base_r()?;
        if self.methods.contains(&Method::Tournament) {
            self.sigma_for_tournament()?;
        }
        let probe = TournamentConfig {
            r: 1.0,
            sigma: 1.0,
            ..self.tournament.clone()
        };
        probe.validate()
    }

    pub fn base_r(&self) -> Result<f64> {
        if let Some(r) = self.base_r {
            if !(r > 0.0) {
                return invalid(format!("r must be positive, got {r}"));
            }
            return Ok(r);
        }
        let sigma = self.problem.noise.sigma();
        if sigma == 0.0 {
            return invalid("noise-free problems need an explicit r");
        }
        Ok(rate_full_space(self.problem.n_dim, self.problem.n_per_part, sigma)?.r_star)
    }

    pub fn sigma_for_tournament(&self) -> Result<f64> {
        let sigma = match self.tournament_sigma {
            Some(s) => s,
            None => self.problem.noise.sigma() * self.sigma_inflate,
        };
        if !(sigma > 0.0) {
            return invalid("noise-free problems need an explicit tournament sigma");
        }
        Ok(sigma)
    }
}

/// One method's outcome on one trial at one `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    pub method: Method,
    pub r_used: f64,
    /// NaN when the trial failed.
    pub error_l2: f64,
    pub excess_risk: f64,
    /// Tournament only.
    pub qualifier_count: Option<usize>,
    pub fallback_used: bool,
    pub runtime_ms: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.error_l2.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: u64,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    /// Ordered by trial, then `r` multiplier, then method (config order).
    pub rows: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
}

/// Runs every trial. A failing method yields a NaN row and a
/// [`TrialFailure`] instead of aborting the sweep.
///
/// Trials run on the current rayon pool; each owns the stream
/// `(base_seed, trial)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let trials: Vec<u64> = (0..config.n_trials as u64).collect();
    run_trials(config, &trials)
}

/// Runs only the listed trial indices, in the given order. Each trial's rows
/// are the same as in a full [`run_experiment`].
pub fn run_trials(config: &ExperimentConfig, trials: &[u64]) -> Result<ExperimentReport> {
    config.validate()?;
    let per_trial: Vec<(Vec<TrialResult>, Vec<TrialFailure>)> = trials
        .par_iter()
        .map(|&trial| run_trial(config, trial))
        .collect();
    let mut report = ExperimentReport::default();
    for (rows, failures) in per_trial {
        report.rows.extend(rows);
        report.failures.extend(failures);
    }
    Ok(report)
}

fn run_trial(config: &ExperimentConfig, trial: u64) -> (Vec<TrialResult>, Vec<TrialFailure>) {
    let rng = RngSpec::new(config.base_seed, trial);
    let spec = &config.problem;
    let base_r = config.base_r().expect("validated");
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    let data = generate(spec, rng);
    let center = data.as_ref().map_err(clone_err).and_then(|d| pool_center(config, d));

    for &mult in &config.r_multipliers {
        let r = mult * base_r;
        for &method in &config.methods {
            let started = Instant::now();
            let outcome = match (&data, &center) {
                (Ok(d), Ok(c)) => run_method(config, method, d, c, r, rng),
                (Err(e), _) | (_, Err(e)) => Err(clone_err(e)),
            };
            let runtime_ms = if config.record_runtime {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let mut row = TrialResult {
                trial,
                method,
                r_used: r,
                error_l2: f64::NAN,
                excess_risk: f64::NAN,
                qualifier_count: None,
                fallback_used: false,
                runtime_ms,
                seed: rng.seed,
                stream_id: rng.stream_id,
            };
            match outcome.and_then(|m| {
                Ok((true_l2_error(&m.estimate, spec)?, true_excess_risk(&m.estimate, spec)?, m))
            }) {
                Ok((err, risk, m)) => {
                    row.error_l2 = err;
                    row.excess_risk = risk;
                    row.qualifier_count = m.qualifier_count;
                    row.fallback_used = m.fallback_used;
                }
                Err(e) => failures.push(TrialFailure {
                    trial,
                    method,
                    message: e.to_string(),
                }),
            }
            rows.push(row);
        }
    }
    (rows, failures)
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidState(e.to_string())
}

struct MethodOutput {
    estimate: Candidate,
    qualifier_count: Option<usize>,
    fallback_used: bool,
}

fn pool_center(config: &ExperimentConfig, data: &Dataset) -> Result<Vec<f64>> {
    Ok(match &config.pool.center {
        PoolCenter::Truth => config.problem.t0.clone(),
        PoolCenter::Fixed(c) => c.clone(),
        PoolCenter::ErmFirstPart => {
            erm_least_squares_with(data, &[Part::First], config.erm_max_condition)?.coeffs
        }
    })
}

fn run_method(
    config: &ExperimentConfig,
    method: Method,
    data: &Dataset,
    center: &[f64],
    r: f64,
    rng: RngSpec,
) -> Result<MethodOutput> {
    let pool_for = || {
        let radius = match config.pool.radius {
            PoolRadius::Absolute(v) => v,
            PoolRadius::TimesR(k) => k * r,
        };
        let spec = PoolSpec {
            strategy: config.pool.strategy.clone(),
            center: center.to_vec(),
            radius,
            norm: config.pool.norm,
            include_center: config.pool.include_center,
        };
        build_pool(&spec, config.problem.n_dim, rng.derive(POOL_SALT))
    };
    match method {
        Method::ErmLs => Ok(MethodOutput {
            estimate: erm_least_squares_with(data, &Part::ALL, config.erm_max_condition)?,
            qualifier_count: None,
            fallback_used: false,
        }),
        Method::MomRiskMin => {
            let pool = pool_for()?;
            let choice = mom_risk_minimizer(&pool, data, config.tournament.ell)?;
            Ok(MethodOutput {
                estimate: choice.candidate,
                qualifier_count: None,
                fallback_used: false,
            })
        }
        Method::Tournament => {
            let pool = pool_for()?;
            let tcfg = TournamentConfig {
                r,
                sigma: config.sigma_for_tournament()?,
                ..config.tournament.clone()
            };
            let out = run_tournament(data, &pool, &tcfg)?;
            Ok(MethodOutput {
                estimate: out.champion,
                qualifier_count: Some(out.qualifiers.ids.len()),
                fallback_used: out.champions.fallback_used,
            })
        }
    }
}

/// Empirical confidence `P(error_l2 <= C)` at each threshold. Failed rows
/// count as misses.
pub fn confidence_curve(
    results: &[TrialResult],
    method: Method,
    thresholds: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let errors: Vec<f64> = results
        .iter()
        .filter(|r| r.method == method)
        .map(|r| r.error_l2)
        .collect();
    if errors.is_empty() {
        return invalid(format!("no results for method {method}"));
    }
    let total = errors.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&c| (c, errors.iter().filter(|&&e| e <= c).count() as f64 / total))
        .collect())
}

/// A labelled confidence curve for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    NDim,
    NoiseTail,
    RMult,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "N" | "n" => SweepParam::N,
            "n_dim" => SweepParam::NDim,
            "noise_tail" => SweepParam::NoiseTail,
            "r_mult" => SweepParam::RMult,
            other => return invalid(format!("unknown sweep parameter {other:?}")),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::N => "N",
            SweepParam::NDim => "n_dim",
            SweepParam::NoiseTail => "noise_tail",
            SweepParam::RMult => "r_mult",
        })
    }
}

/// `config` with one parameter replaced by `value`.
pub fn apply_sweep(config: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut out = config.clone();
    let as_count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            invalid(format!("{param} needs a positive integer, got {v}"))
        }
    };
    match param {
        SweepParam::N => out.problem.n_per_part = as_count(value)?,
        SweepParam::NDim => {
            let d = as_count(value)?;
            out.problem.n_dim = d;
            out.problem.t0 = out.t0_pattern.build(d)?;
        }
        SweepParam::NoiseTail => {
            out.problem.noise = match out.problem.noise {
                Noise::StudentT { sigma, .. } => Noise::StudentT { dof: value, sigma },
                Noise::SymmetrizedPareto { sigma, .. } => Noise::SymmetrizedPareto { tail: value, sigma },
                other => return invalid(format!("noise {other:?} has no tail parameter")),
            }
        }
        SweepParam::RMult => out.r_multipliers = vec![value],
    }
    out.validate()?;
    Ok(out)
}

/// Runs `config` once per sweep value, in order.
pub fn run_sweep(
    config: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<(f64, ExperimentReport)>> {
    values
        .iter()
        .map(|&v| Ok((v, run_experiment(&apply_sweep(config, param, v)?)?)))
        .collect()
}

/// Calibrates the distance oracle on random pairs, each evaluated on its own
/// freshly drawn noiseless design of `n_per_part` rows.
pub fn calibrate_from_config(config: &ExperimentConfig) -> Result<OracleCalibration> {
    let cal = &config.calibration;
    if cal.pairs == 0 {
        return invalid("calibration needs at least one pair");
    }
    let spec = ProblemSpec {
        noise: Noise::None,
        n_per_part: config.problem.n_per_part,
        ..config.problem.clone()
    };
    let rng = RngSpec::new(config.base_seed, 0).derive(CALIBRATION_SALT);
    let d = spec.n_dim;
    let designs = (0..cal.pairs)
        .into_par_iter()
        .map(|k| {
            let data = generate(&spec, RngSpec::new(rng.seed, k as u64))?;
            Ok(data.part(Part::First).xs.to_vec())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let design_refs: Vec<&[f64]> = designs.iter().map(Vec::as_slice).collect();
    let mut prng = rng.derive(CALIBRATION_SALT).rng();
    let pairs: Vec<(Candidate, Candidate)> = (0..cal.pairs)
        .map(|_| {
            let scale = (prng.random_range(-3.0f64..3.0)).exp();
            let f: Vec<f64> = (0..d)
                .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut prng))
                .collect();
            (
                Candidate { id: 0, coeffs: f },
                Candidate { id: 1, coeffs: vec![0.0; d] },
            )
        })
        .collect();
    calibrate_oracle_constants_on_designs(&design_refs, d, &cal.ell_grid, &pairs, cal.target_confidence, None)
}

/// Human-readable name of a design, as used in config files.
pub fn design_name(design: Design) -> String {
    match design {
        Design::GaussianIso => "gaussian".into(),
        Design::Rademacher => "rademacher".into(),
        Design::StudentTIso { dof } => format!("student_t:{dof}"),
    }
}
