//! The distance oracle: a crude, data-dependent estimate of L2 distances
//! between predictors, used to decide whether a match is played.

use rayon::prelude::*;

use crate::candidate::Candidate;
use crate::config::TournamentConfig;
use crate::data::DataPart;
use crate::error::{invalid, Result};
use crate::mom::med_of_means_value;

/// Distance oracle built on the covariates of the first sample part.
#[derive(Debug, Clone, Copy)]
pub struct OracleState<'a> {
    xs: &'a [f64],
    n_dim: usize,
    ell: usize,
    alpha: f64,
    beta: f64,
    beta_r: f64,
}

impl<'a> OracleState<'a> {
    /// `xs` holds row-major covariates; `r` may be zero, in which case every
    /// match is played.
    pub fn new(
        xs: &'a [f64],
        n_dim: usize,
        ell: usize,
        alpha: f64,
        beta: f64,
        r: f64,
    ) -> Result<Self> {
        if n_dim == 0 || xs.is_empty() || !xs.len().is_multiple_of(n_dim) {
            return invalid("oracle covariates must be a nonempty row-major matrix");
        }
        let rows = xs.len() / n_dim;
        if ell == 0 || ell > rows {
            return invalid(format!("oracle block length {ell} incompatible with {rows} rows"));
        }
        if !(alpha > 0.0 && alpha <= beta && beta.is_finite()) {
            return invalid(format!("need 0 < alpha <= beta, got {alpha}, {beta}"));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return invalid(format!("r must be nonnegative, got {r}"));
        }
        Ok(Self {
            xs,
            n_dim,
            ell,
            alpha,
            beta,
            beta_r: beta * r,
        })
    }

    pub fn from_config(part1: &DataPart<'a>, config: &TournamentConfig) -> Result<Self> {
        Self::new(part1.xs, part1.n_dim, config.ell, config.alpha, config.beta, config.r)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Decision threshold `beta * r`.
    pub fn beta_r(&self) -> f64 {
        self.beta_r
    }

    pub fn rows(&self) -> usize {
        self.xs.len() / self.n_dim
    }

    /// Predictions of `c` on the oracle's covariates.
    pub fn predictions(&self, c: &Candidate) -> Result<Vec<f64>> {
        c.check_dim(self.n_dim)?;
        Ok(self.xs.chunks_exact(self.n_dim).map(|x| c.predict(x)).collect())
    }

    /// `Med_ell(|f(X_i) - h(X_i)|)` over the oracle sample.
    pub fn phi(&self, f: &Candidate, h: &Candidate) -> Result<f64> {
        let pf = self.predictions(f)?;
        let ph = self.predictions(h)?;
        phi_from_predictions(&pf, &ph, self.ell)
    }

    /// 1 iff `phi(f, h) >= beta * r`.
    pub fn do_decision(&self, f: &Candidate, h: &Candidate) -> Result<bool> {
        Ok(self.phi(f, h)? >= self.beta_r)
    }

    pub(crate) fn decide(&self, phi: f64) -> bool {
        phi >= self.beta_r
    }
}

pub(crate) fn phi_from_predictions(pf: &[f64], ph: &[f64], ell: usize) -> Result<f64> {
    let v: Vec<f64> = pf.iter().zip(ph).map(|(a, b)| (a - b).abs()).collect();
    med_of_means_value(&v, ell)
}

/// Free-function form of [`OracleState::phi`].
pub fn phi(state: &OracleState<'_>, f: &Candidate, h: &Candidate) -> Result<f64> {
    state.phi(f, h)
}

/// Free-function form of [`OracleState::do_decision`].
pub fn do_decision(state: &OracleState<'_>, f: &Candidate, h: &Candidate) -> Result<bool> {
    state.do_decision(f, h)
}

/// Empirical isomorphy envelope for one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct EllCalibration {
    pub ell: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl EllCalibration {
    pub fn ratio(&self) -> f64 {
        self.beta / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCalibration {
    pub alpha: f64,
    pub beta: f64,
    pub ell: usize,
    pub per_ell: Vec<EllCalibration>,
}

impl OracleCalibration {
    /// Constants usable in a [`TournamentConfig`], which requires
    /// `alpha < 1 < beta`: the envelope is widened to straddle 1 if needed.
    pub fn config_constants(&self) -> (f64, f64, usize) {
        let alpha = self.alpha.min(1.0 - 1e-9);
        let beta = self.beta.max(1.0 + 1e-9);
        (alpha, beta, self.ell)
    }
}

/// Estimates `(alpha, beta, ell)` such that
/// `alpha ‖f-h‖ <= phi(f, h) <= beta ‖f-h‖` holds on at least
/// `target_confidence` of `pairs`.
///
/// True distances are Euclidean on coefficients (isotropic design) unless a
/// row-major `covariance` is supplied, in which case `sqrt(dᵀ Σ d)` is used.
/// The excluded pairs are split evenly between the two tails. Among the grid
/// entries the one with the smallest `beta / alpha` wins; ties keep grid
/// order.
pub fn calibrate_oracle_constants(
    xs: &[f64],
    n_dim: usize,
    ell_grid: &[usize],
    pairs: &[(Candidate, Candidate)],
    target_confidence: f64,
    covariance: Option<&[f64]>,
) -> Result<OracleCalibration> {
    calibrate_oracle_constants_on_designs(&[xs], n_dim, ell_grid, pairs, target_confidence, covariance)
}

/// As [`calibrate_oracle_constants`], but pair `k` is evaluated on
/// `designs[k % designs.len()]`, so the envelope also covers the variation
/// between independently drawn designs.
pub fn calibrate_oracle_constants_on_designs(
    designs: &[&[f64]],
    n_dim: usize,
    ell_grid: &[usize],
    pairs: &[(Candidate, Candidate)],
    target_confidence: f64,
    covariance: Option<&[f64]>,
) -> Result<OracleCalibration> {
    if designs.is_empty() {
        return invalid("no covariate sample");
    }
    if n_dim == 0 {
        return invalid("n_dim must be positive");
    }
    for xs in designs {
        if xs.is_empty() || !xs.len().is_multiple_of(n_dim) {
            return invalid("covariate sample length must be a positive multiple of n_dim");
        }
    }
    if ell_grid.is_empty() {
        return invalid("empty block-length grid");
    }
    if pairs.is_empty() {
        return invalid("empty pair sample");
    }
    if !(target_confidence > 0.5 && target_confidence < 1.0) {
        return invalid(format!(
            "target confidence must lie in (0.5, 1), got {target_confidence}"
        ));
    }
    if let Some(cov) = covariance {
        if cov.len() != n_dim * n_dim {
            return invalid("covariance must be n_dim x n_dim");
        }
    }
    let rows_of = |c: &Candidate, xs: &[f64]| -> Result<Vec<f64>> {
        c.check_dim(n_dim)?;
        Ok(xs.chunks_exact(n_dim).map(|x| c.predict(x)).collect())
    };
    let mut distances = Vec::with_capacity(pairs.len());
    let mut diffs = Vec::with_capacity(pairs.len());
    for (k, (f, h)) in pairs.iter().enumerate() {
        let xs = designs[k % designs.len()];
        let d: Vec<f64> = f.coeffs.iter().zip(&h.coeffs).map(|(a, b)| a - b).collect();
        let dist = match covariance {
            None => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Some(cov) => quadratic_norm(cov, &d),
        };
        if !(dist > 0.0) {
            return invalid(format!(
                "pair ({}, {}) has zero distance and cannot calibrate the oracle",
                f.id, h.id
            ));
        }
        distances.push(dist);
        let pf = rows_of(f, xs)?;
        let ph = rows_of(h, xs)?;
        diffs.push(pf.iter().zip(&ph).map(|(a, b)| (a - b).abs()).collect::<Vec<f64>>());
    }
    let per_ell = ell_grid
        .par_iter()
        .map(|&ell| {
            let mut ratios = diffs
                .iter()
                .zip(&distances)
                .map(|(v, d)| Ok(med_of_means_value(v, ell)? / d))
                .collect::<Result<Vec<f64>>>()?;
            ratios.sort_by(f64::total_cmp);
            let (alpha, beta) = envelope(&ratios, target_confidence);
            Ok(EllCalibration { ell, alpha, beta })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = per_ell
        .iter()
        .filter(|c| c.alpha > 0.0)
        .min_by(|a, b| a.ratio().total_cmp(&b.ratio()))
        .ok_or_else(|| {
            crate::Error::InvalidState("every block length produced a zero lower envelope".into())
        })?;
    Ok(OracleCalibration {
        alpha: best.alpha,
        beta: best.beta,
        ell: best.ell,
        per_ell: per_ell.clone(),
    })
}

/// Equal-tailed envelope of sorted ratios covering at least `confidence`.
fn envelope(sorted: &[f64], confidence: f64) -> (f64, f64) {
    let p = sorted.len();
    let keep = ((confidence * p as f64).ceil() as usize).clamp(1, p);
    let drop = p - keep;
    let lo = drop / 2;
    let hi = drop - lo;
    (sorted[lo], sorted[p - 1 - hi])
}

fn quadratic_norm(cov: &[f64], d: &[f64]) -> f64 {
    let n = d.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += d[i] * cov[i * n + j] * d[j];
        }
    }
    q.max(0.0).sqrt()
}
