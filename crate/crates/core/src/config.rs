use crate::error::{invalid, Result};

/// How to choose among several qualifiers that all win their home matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest median-of-means squared-residual risk on the third part,
    /// then lowest id.
    #[default]
    MinMomRisk,
    LowestId,
}

/// What to do when no qualifier wins every home match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Fewest home-match losses, then the configured tie-break.
    #[default]
    CopelandScore,
    Fail,
}

/// Every tunable of the tournament.
#[derive(Debug, Clone, PartialEq)]
pub struct TournamentConfig {
    /// Target accuracy.
    pub r: f64,
    /// A priori bound on the L2 norm of the optimal residual.
    pub sigma: f64,
    /// Lower isomorphy constant of the distance oracle, in `(0, 1)`.
    pub alpha: f64,
    /// Upper isomorphy constant of the distance oracle, `> 1`.
    pub beta: f64,
    /// Block size of the distance oracle's median of means.
    pub ell: usize,
    /// Block-count multiplier, `0 < theta <= tau`.
    pub theta: f64,
    /// Tolerated fraction of corrupted blocks, `< 1/4`.
    pub tau: f64,
    pub tie_break: TieBreak,
    pub fallback: Fallback,
}

impl Default for TournamentConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            sigma: 1.0,
            alpha: 0.5,
            beta: 2.0,
            ell: 8,
            theta: 0.1,
            tau: 0.2,
            tie_break: TieBreak::default(),
            fallback: Fallback::default(),
        }
    }
}

impl TournamentConfig {
    pub fn with_r_sigma(r: f64, sigma: f64) -> Self {
        Self {
            r,
            sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("r must be positive, got {}", self.r));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 1.0 && self.beta.is_finite()) {
            return invalid(format!(
                "need 0 < alpha < 1 < beta, got alpha={} beta={}",
                self.alpha, self.beta
            ));
        }
        if self.ell == 0 {
            return invalid("ell must be at least 1");
        }
        if !(self.tau > 0.0 && self.tau < 0.25) {
            return invalid(format!("tau must lie in (0, 1/4), got {}", self.tau));
        }
        if !(self.theta > 0.0 && self.theta <= self.tau) {
            return invalid(format!(
                "theta must lie in (0, tau={}], got {}",
                self.tau, self.theta
            ));
        }
        Ok(())
    }

    /// Champions-league scale `r1 = 2 (beta / alpha) r`.
    pub fn r1(&self) -> f64 {
        2.0 * (self.beta / self.alpha) * self.r
    }

    /// Radius `(beta / alpha) r` that every qualifier is guaranteed to be
    /// within on the good event.
    pub fn qualifier_radius(&self) -> f64 {
        (self.beta / self.alpha) * self.r
    }
}
