//! Synthetic regression problems with known ground truth.

use rand::Rng;
use rand_distr::{Distribution, Normal, Pareto, StandardNormal, StudentT};

use crate::candidate::Candidate;
use crate::data::{dot, Dataset};
use crate::error::{invalid, Result};
use crate::rng::RngSpec;

/// Covariate law. Every variant is isotropic: `E⟨t, X⟩² = ‖t‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    GaussianIso,
    Rademacher,
    /// Independent Student-t coordinates rescaled to unit variance.
    StudentTIso { dof: f64 },
}

/// Additive noise law, symmetric about zero with variance `sigma²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    Gaussian { sigma: f64 },
    StudentT { dof: f64, sigma: f64 },
    /// `ε · P` with a Rademacher sign `ε` and `P` Pareto(scale 1, `tail`),
    /// rescaled to variance `sigma²`.
    SymmetrizedPareto { tail: f64, sigma: f64 },
}

impl Noise {
    /// Standard deviation of the noise; zero for [`Noise::None`].
    pub fn sigma(&self) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Gaussian { sigma }
            | Noise::StudentT { sigma, .. }
            | Noise::SymmetrizedPareto { sigma, .. } => sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n_dim: usize,
    /// Sample size of each of the three parts.
    pub n_per_part: usize,
    pub design: Design,
    pub noise: Noise,
    pub t0: Vec<f64>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_dim == 0 || self.n_per_part == 0 {
            return invalid("n_dim and n_per_part must be positive");
        }
        if self.t0.len() != self.n_dim || self.t0.iter().any(|v| !v.is_finite()) {
            return invalid(format!(
                "t0 must be a finite vector of length {}",
                self.n_dim
            ));
        }
        if let Design::StudentTIso { dof } = self.design {
            if !(dof > 2.0) {
                return invalid(format!("Student-t design needs dof > 2, got {dof}"));
            }
        }
        match self.noise {
            Noise::None => {}
            Noise::Gaussian { sigma } => check_sigma(sigma)?,
            Noise::StudentT { dof, sigma } => {
                check_sigma(sigma)?;
                if !(dof > 2.0) {
                    return invalid(format!("Student-t noise needs dof > 2, got {dof}"));
                }
            }
            Noise::SymmetrizedPareto { tail, sigma } => {
                check_sigma(sigma)?;
                if !(tail > 2.0) {
                    return invalid(format!("Pareto noise needs tail index > 2, got {tail}"));
                }
            }
        }
        Ok(())
    }

    pub fn truth(&self) -> Candidate {
        Candidate {
            id: 0,
            coeffs: self.t0.clone(),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("noise sigma must be positive, got {sigma}"));
    }
    Ok(())
}

/// Sampler for one design, prepared once per dataset.
enum DesignSampler {
    Gaussian,
    Rademacher,
    StudentT(StudentT<f64>, f64),
}

impl DesignSampler {
    fn new(design: Design) -> Result<Self> {
        Ok(match design {
            Design::GaussianIso => Self::Gaussian,
            Design::Rademacher => Self::Rademacher,
            Design::StudentTIso { dof } => Self::StudentT(
                StudentT::new(dof).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?,
                ((dof - 2.0) / dof).sqrt(),
            ),
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => StandardNormal.sample(rng),
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::StudentT(t, scale) => t.sample(rng) * scale,
        }
    }
}

enum NoiseSampler {
    Zero,
    Gaussian(Normal<f64>),
    StudentT(StudentT<f64>, f64),
    Pareto(Pareto<f64>, f64),
}

impl NoiseSampler {
    fn new(noise: Noise) -> Result<Self> {
        let err = |e: String| crate::Error::InvalidArgument(e);
        Ok(match noise {
            Noise::None => Self::Zero,
            Noise::Gaussian { sigma } => {
                Self::Gaussian(Normal::new(0.0, sigma).map_err(|e| err(e.to_string()))?)
            }
            Noise::StudentT { dof, sigma } => Self::StudentT(
                StudentT::new(dof).map_err(|e| err(e.to_string()))?,
                sigma * ((dof - 2.0) / dof).sqrt(),
            ),
            Noise::SymmetrizedPareto { tail, sigma } => Self::Pareto(
                Pareto::new(1.0, tail).map_err(|e| err(e.to_string()))?,
                // E P² = tail / (tail - 2) for scale 1.
                sigma / (tail / (tail - 2.0)).sqrt(),
            ),
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Gaussian(n) => n.sample(rng),
            Self::StudentT(t, scale) => t.sample(rng) * scale,
            Self::Pareto(p, scale) => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * p.sample(rng) * scale
            }
        }
    }
}

/// Draws `count` noise values; used for scalar mean-estimation experiments.
pub fn sample_noise(noise: Noise, count: usize, rng: RngSpec) -> Result<Vec<f64>> {
    let sampler = NoiseSampler::new(noise)?;
    let mut rng = rng.rng();
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

/// Draws `3 N` i.i.d. rows with `Y = ⟨t0, X⟩ + W`.
///
/// Rows are drawn in order, covariates before noise, so the dataset is a pure
/// function of `(spec, rng)`.
pub fn generate(spec: &ProblemSpec, rng: RngSpec) -> Result<Dataset> {
    spec.validate()?;
    let design = DesignSampler::new(spec.design)?;
    let noise = NoiseSampler::new(spec.noise)?;
    let mut rng = rng.rng();
    let rows = 3 * spec.n_per_part;
    let mut xs = Vec::with_capacity(rows * spec.n_dim);
    let mut ys = Vec::with_capacity(rows);
    for _ in 0..rows {
        let start = xs.len();
        for _ in 0..spec.n_dim {
            xs.push(design.sample(&mut rng));
        }
        let signal = dot(&spec.t0, &xs[start..]);
        ys.push(signal + noise.sample(&mut rng));
    }
    Dataset::new(xs, ys, spec.n_dim)
}

/// `‖t_hat - t0‖₂`, which equals the L2(μ) distance under isotropy.
pub fn true_l2_error(t_hat: &Candidate, spec: &ProblemSpec) -> Result<f64> {
    t_hat.check_dim(spec.n_dim)?;
    Ok(t_hat
        .coeffs
        .iter()
        .zip(&spec.t0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Excess squared-loss risk of `t_hat`; with independent noise this is the
/// squared L2 error.
pub fn true_excess_risk(t_hat: &Candidate, spec: &ProblemSpec) -> Result<f64> {
    t_hat.check_dim(spec.n_dim)?;
    Ok(t_hat
        .coeffs
        .iter()
        .zip(&spec.t0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// CSV with header `x_0,...,x_{d-1},y`.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let d = data.n_dim();
    let mut out: String = (0..d).map(|j| format!("x_{j},")).collect();
    out.push_str("y\n");
    for i in 0..data.len() {
        for v in data.row(i) {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(&format!("{:?}\n", data.ys()[i]));
    }
    out
}
