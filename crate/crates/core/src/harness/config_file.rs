//! Flat `key = value` experiment configuration files.
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! errors. See the README for the full key list.

use std::collections::BTreeMap;
use std::path::Path;

use super::{
    CalibrationConfig, ExperimentConfig, Method, PoolCenter, PoolConfig, PoolRadius, T0Pattern,
};
use crate::config::{Fallback, TieBreak};
use crate::datagen::{Design, Noise, ProblemSpec};
use crate::error::{Error, Result};
use crate::pool::{Norm, PoolStrategy};

const KEYS: &[&str] = &[
    "n_dim",
    "n_per_part",
    "design",
    "noise",
    "sigma",
    "t0",
    "r",
    "tournament_sigma",
    "sigma_inflate",
    "alpha",
    "beta",
    "ell",
    "theta",
    "tau",
    "tie_break",
    "fallback",
    "pool.strategy",
    "pool.center",
    "pool.radius",
    "pool.norm",
    "pool.include_center",
    "pool.mesh",
    "pool.count",
    "pool.multiples",
    "pool.per_shell",
    "pool.points",
    "methods",
    "n_trials",
    "base_seed",
    "r_multipliers",
    "output_path",
    "erm_max_condition",
    "record_runtime",
    "calibrate.ell_grid",
    "calibrate.pairs",
    "calibrate.confidence",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.take(key)
            .map(|(line, v)| {
                v.parse::<T>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{key}: {e}"),
                })
            })
            .transpose()
    }

    fn with<T>(&mut self, key: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        self.take(key)
            .map(|(line, v)| {
                f(&v).map_err(|message| Error::Parse {
                    line,
                    message: format!("{key}: {message}"),
                })
            })
            .transpose()
    }
}

fn reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

fn counts(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

fn tagged(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (s.trim(), None),
    }
}

fn tag_value(name: &str, v: Option<&str>) -> std::result::Result<f64, String> {
    v.ok_or_else(|| format!("{name} needs a parameter, e.g. {name}:5"))?
        .parse::<f64>()
        .map_err(|e| e.to_string())
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key {key:?}"),
            });
        }
        if map.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key {key:?}"),
            });
        }
    }
    let mut e = Entries { map };

    let n_dim: usize = e.parse("n_dim")?.unwrap_or(5);
    let n_per_part: usize = e.parse("n_per_part")?.unwrap_or(1000);
    let design = e
        .with("design", |s| match tagged(s) {
            ("gaussian", None) => Ok(Design::GaussianIso),
            ("rademacher", None) => Ok(Design::Rademacher),
            ("student_t", v) => Ok(Design::StudentTIso { dof: tag_value("student_t", v)? }),
            _ => Err(format!("unknown design {s:?}")),
        })?
        .unwrap_or(Design::GaussianIso);
    let sigma: f64 = e.parse("sigma")?.unwrap_or(1.0);
    let noise = e
        .with("noise", |s| match tagged(s) {
            ("none", None) => Ok(Noise::None),
            ("gaussian", None) => Ok(Noise::Gaussian { sigma }),
            ("student_t", v) => Ok(Noise::StudentT { dof: tag_value("student_t", v)?, sigma }),
            ("pareto", v) => Ok(Noise::SymmetrizedPareto { tail: tag_value("pareto", v)?, sigma }),
            _ => Err(format!("unknown noise {s:?}")),
        })?
        .unwrap_or(Noise::Gaussian { sigma });
    let t0_pattern = e
        .with("t0", |s| {
            if s == "ones" {
                Ok(T0Pattern::Ones)
            } else if let Some(k) = s.strip_prefix('e').and_then(|k| k.parse::<usize>().ok()) {
                Ok(T0Pattern::Basis(k))
            } else {
                reals(s).map(T0Pattern::Explicit)
            }
        })?
        .unwrap_or(T0Pattern::Ones);
    let t0 = t0_pattern.build(n_dim)?;
    let problem = ProblemSpec {
        n_dim,
        n_per_part,
        design,
        noise,
        t0,
    };

    let mut cfg = ExperimentConfig::new(problem);
    cfg.t0_pattern = t0_pattern;
    cfg.base_r = e.parse("r")?;
    cfg.tournament_sigma = e.parse("tournament_sigma")?;
    if let Some(v) = e.parse("sigma_inflate")? {
        cfg.sigma_inflate = v;
    }
    let t = &mut cfg.tournament;
    if let Some(v) = e.parse("alpha")? {
        t.alpha = v;
    }
    if let Some(v) = e.parse("beta")? {
        t.beta = v;
    }
    if let Some(v) = e.parse("ell")? {
        t.ell = v;
    }
    if let Some(v) = e.parse("theta")? {
        t.theta = v;
    }
    if let Some(v) = e.parse("tau")? {
        t.tau = v;
    }
    if let Some(v) = e.with("tie_break", |s| match s {
        "min_mom_risk" => Ok(TieBreak::MinMomRisk),
        "lowest_id" => Ok(TieBreak::LowestId),
        _ => Err(format!("unknown tie-break {s:?}")),
    })? {
        t.tie_break = v;
    }
    if let Some(v) = e.with("fallback", |s| match s {
        "copeland" => Ok(Fallback::CopelandScore),
        "fail" => Ok(Fallback::Fail),
        _ => Err(format!("unknown fallback {s:?}")),
    })? {
        t.fallback = v;
    }

    let mesh: Option<f64> = e.parse("pool.mesh")?;
    let count: Option<usize> = e.parse("pool.count")?;
    let multiples = e.with("pool.multiples", reals)?;
    let per_shell: Option<usize> = e.parse("pool.per_shell")?;
    let points = e.with("pool.points", |s| s.split(';').map(reals).collect::<std::result::Result<Vec<_>, _>>())?;
    let need = |what: &str, strategy: &str| Error::InvalidArgument(format!("pool.strategy = {strategy} needs {what}"));
    let strategy = match e.take("pool.strategy") {
        None => cfg.pool.strategy.clone(),
        Some((line, s)) => match s.as_str() {
            "grid" => PoolStrategy::GridNet { mesh: mesh.ok_or_else(|| need("pool.mesh", "grid"))? },
            "random_ball" => PoolStrategy::RandomBall { count: count.ok_or_else(|| need("pool.count", "random_ball"))? },
            "perturbation" => PoolStrategy::SeededPerturbation {
                count: count.ok_or_else(|| need("pool.count", "perturbation"))?,
            },
            "shells" => PoolStrategy::Shells {
                multiples: multiples.ok_or_else(|| need("pool.multiples", "shells"))?,
                per_shell: per_shell.unwrap_or(10),
            },
            "explicit" => PoolStrategy::Explicit(points.ok_or_else(|| need("pool.points", "explicit"))?),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown pool strategy {other:?}"),
                })
            }
        },
    };
    let center = e
        .with("pool.center", |s| match s {
            "t0" => Ok(PoolCenter::Truth),
            "erm" => Ok(PoolCenter::ErmFirstPart),
            v => reals(v).map(PoolCenter::Fixed),
        })?
        .unwrap_or(PoolCenter::Truth);
    let radius = e
        .with("pool.radius", |s| {
            if let Some(k) = s.strip_suffix('r') {
                let k = k.trim();
                if k.is_empty() {
                    Ok(PoolRadius::TimesR(1.0))
                } else {
                    k.parse().map(PoolRadius::TimesR).map_err(|e| format!("{e}"))
                }
            } else {
                s.parse().map(PoolRadius::Absolute).map_err(|e| format!("{e}"))
            }
        })?
        .unwrap_or(PoolRadius::TimesR(1.0));
    let norm = e
        .with("pool.norm", |s| match s {
            "l2" => Ok(Norm::L2),
            "l1" => Ok(Norm::L1),
            _ => Err(format!("unknown norm {s:?}")),
        })?
        .unwrap_or(Norm::L2);
    let include_center = e.with("pool.include_center", parse_bool)?.unwrap_or(true);
    cfg.pool = PoolConfig {
        strategy,
        center,
        radius,
        norm,
        include_center,
    };

    if let Some(m) = e.with("methods", |s| {
        s.split(',')
            .map(|m| m.trim().parse::<Method>().map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<_>, _>>()
    })? {
        cfg.methods = m;
    }
    if let Some(v) = e.parse("n_trials")? {
        cfg.n_trials = v;
    }
    if let Some(v) = e.parse("base_seed")? {
        cfg.base_seed = v;
    }
    if let Some(v) = e.with("r_multipliers", reals)? {
        cfg.r_multipliers = v;
    }
    cfg.output_path = e.take("output_path").map(|(_, v)| v.into());
    if let Some(v) = e.parse("erm_max_condition")? {
        cfg.erm_max_condition = v;
    }
    if let Some(v) = e.with("record_runtime", parse_bool)? {
        cfg.record_runtime = v;
    }
    let mut cal = CalibrationConfig::default();
    if let Some(v) = e.with("calibrate.ell_grid", counts)? {
        cal.ell_grid = v;
    }
    if let Some(v) = e.parse("calibrate.pairs")? {
        cal.pairs = v;
    }
    if let Some(v) = e.parse("calibrate.confidence")? {
        cal.target_confidence = v;
    }
    cfg.calibration = cal;
    debug_assert!(e.map.is_empty(), "unconsumed keys: {:?}", e.map.keys());
    cfg.validate()?;
    Ok(cfg)
}
