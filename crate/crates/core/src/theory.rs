//! Closed-form accuracy and confidence predictions.
//!
//! Absolute constants are explicit arguments (default 1); only the shape of
//! each formula is meaningful.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Branch {
    SmallN,
    LargeN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    FullSpaceRn,
    L1Ball { multiplier: L1Branch, quadratic: L1Branch },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePrediction {
    pub r_star: f64,
    /// Scale of the confidence exponent, up to an unknown absolute constant.
    pub confidence_exponent: f64,
    pub regime: Regime,
}

fn out_of_regime<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::OutOfRegime(msg.into()))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Linear regression over all of `R^n`: `r* = σ sqrt(n / N)`, reached with
/// probability `1 - 2 exp(-c n)`.
pub fn rate_full_space(n_dim: usize, n: usize, sigma: f64) -> Result<RatePrediction> {
    check_positive("sigma", sigma)?;
    if n_dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if n < n_dim {
        return out_of_regime(format!("N = {n} below the dimension {n_dim}"));
    }
    Ok(RatePrediction {
        r_star: sigma * (n_dim as f64 / n as f64).sqrt(),
        confidence_exponent: n_dim as f64,
        regime: Regime::FullSpaceRn,
    })
}

/// Gaussian mean width of `sqrt(s) B_1^n ∩ B_2^n`, `sqrt(s ln(e n / s))`, with
/// the absolute constant set to 1.
pub fn mean_width_sparse_intersection(s: f64, n_dim: usize) -> Result<f64> {
    sparse_width(s, n_dim as f64)
}

fn sparse_width(s: f64, n: f64) -> Result<f64> {
    if !(s >= 1.0 && s <= n) {
        return out_of_regime(format!("sparsity {s} outside [1, {n}]"));
    }
    Ok((s * (std::f64::consts::E * n / s).ln()).sqrt())
}

/// Accuracy rates for regression in `rho B_1^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1BallRates {
    pub v_q: f64,
    pub v_m: f64,
    pub prediction: RatePrediction,
}

/// `v_Q`, `v_M` and `r* = max(v_Q, v_M)` for the `rho B_1^n` class.
pub fn rate_l1_ball(
    rho: f64,
    sigma: f64,
    n: usize,
    n_dim: usize,
    c1: f64,
    c2: f64,
) -> Result<L1BallRates> {
    for (name, v) in [("rho", rho), ("sigma", sigma), ("c1", c1), ("c2", c2)] {
        check_positive(name, v)?;
    }
    if n == 0 || n_dim == 0 {
        return Err(Error::InvalidArgument("N and n must be positive".into()));
    }
    let big_n = n as f64;
    let dim = n_dim as f64;

    let (v_m_sq, multiplier) = if big_n <= c1 * dim * dim * sigma * sigma / (rho * rho) {
        let arg = 2.0 * c1 * dim * sigma / (big_n.sqrt() * rho);
        if !(arg > 1.0) {
            return out_of_regime(format!("multiplier log argument {arg} is not above 1"));
        }
        (rho * sigma / big_n.sqrt() * arg.ln().sqrt(), L1Branch::SmallN)
    } else {
        (sigma * sigma * dim / big_n, L1Branch::LargeN)
    };

    let (v_q_sq, quadratic) = if big_n <= c2 * dim {
        let arg = 2.0 * c2 * dim / big_n;
        if !(arg > 1.0) {
            return out_of_regime(format!("quadratic log argument {arg} is not above 1"));
        }
        (rho * rho / big_n * arg.ln(), L1Branch::SmallN)
    } else {
        (0.0, L1Branch::LargeN)
    };

    let v_m = v_m_sq.sqrt();
    let v_q = v_q_sq.sqrt();
    let r_star = v_q.max(v_m);
    Ok(L1BallRates {
        v_q,
        v_m,
        prediction: RatePrediction {
            r_star,
            confidence_exponent: big_n * (r_star * r_star / (sigma * sigma)).min(1.0),
            regime: Regime::L1Ball { multiplier, quadratic },
        },
    })
}

/// `1 - exp(-c0 N min{1, r²/σ²})`.
pub fn predicted_confidence(n: usize, r: f64, sigma: f64, c0: f64) -> Result<f64> {
    check_positive("r", r)?;
    check_positive("sigma", sigma)?;
    check_positive("c0", c0)?;
    let ratio = (r * r / (sigma * sigma)).min(1.0);
    Ok(1.0 - (-c0 * n as f64 * ratio).exp())
}
