//! Finite candidate pools and greedy packing counts.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::candidate::CandidatePool;
use crate::error::{invalid, Error, Result};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L2,
    L1,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PoolStrategy {
    /// Axis-aligned lattice with spacing `mesh`, clipped to the norm ball.
    GridNet { mesh: f64 },
    /// `count` uniform draws from the norm ball.
    RandomBall { count: usize },
    /// `center + radius · G` for `count` standard Gaussian vectors `G`.
    SeededPerturbation { count: usize },
    /// `per_shell` random directions at each Euclidean distance
    /// `radius · multiple` from the center.
    Shells { multiples: Vec<f64>, per_shell: usize },
    Explicit(Vec<Vec<f64>>),
}

impl PoolStrategy {
    fn tag(&self) -> &'static str {
        match self {
            PoolStrategy::GridNet { .. } => "grid-net",
            PoolStrategy::RandomBall { .. } => "random-ball",
            PoolStrategy::SeededPerturbation { .. } => "seeded-perturbation",
            PoolStrategy::Shells { .. } => "shells",
            PoolStrategy::Explicit(_) => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolSpec {
    pub strategy: PoolStrategy,
    pub center: Vec<f64>,
    pub radius: f64,
    pub norm: Norm,
    /// Put the exact center first, as id 0.
    pub include_center: bool,
}

/// Largest lattice accepted by the grid strategy.
const MAX_GRID_POINTS: usize = 2_000_000;

/// Builds a pool; ids follow generation order.
pub fn build_pool(spec: &PoolSpec, n_dim: usize, rng: RngSpec) -> Result<CandidatePool> {
    if n_dim == 0 {
        return invalid("pool dimension must be positive");
    }
    if spec.center.len() != n_dim {
        return invalid(format!(
            "pool center has length {}, expected {n_dim}",
            spec.center.len()
        ));
    }
    if !(spec.radius > 0.0 && spec.radius.is_finite()) {
        return invalid(format!("pool radius must be positive, got {}", spec.radius));
    }
    let center = &spec.center;
    let mut rng = rng.rng();
    let mut points: Vec<Vec<f64>> = Vec::new();
    if spec.include_center {
        points.push(center.clone());
    }
    match &spec.strategy {
        PoolStrategy::GridNet { mesh } => {
            if n_dim > 3 {
                return Err(Error::Unsupported(format!(
                    "grid nets are limited to dimension 3, got {n_dim}"
                )));
            }
            if !(*mesh > 0.0 && *mesh <= spec.radius) {
                return invalid(format!("grid mesh must lie in (0, radius], got {mesh}"));
            }
            let steps = (spec.radius / mesh + 1e-9).floor() as i64;
            let side = (2 * steps + 1) as usize;
            if side.pow(n_dim as u32) > MAX_GRID_POINTS {
                return Err(Error::Unsupported(format!(
                    "grid with {side}^{n_dim} points is too large"
                )));
            }
            let tol = spec.radius * 1e-12;
            let mut idx = vec![-steps; n_dim];
            loop {
                let offset: Vec<f64> = idx.iter().map(|&k| k as f64 * mesh).collect();
                let is_center = idx.iter().all(|&k| k == 0);
                if spec.norm.of(&offset) <= spec.radius + tol && !(is_center && spec.include_center) {
                    points.push(center.iter().zip(&offset).map(|(c, o)| c + o).collect());
                }
                // Odometer increment, last axis fastest.
                let mut axis = n_dim;
                loop {
                    if axis == 0 {
                        return CandidatePool::new(points, spec.strategy.tag());
                    }
                    axis -= 1;
                    if idx[axis] < steps {
                        idx[axis] += 1;
                        break;
                    }
                    idx[axis] = -steps;
                }
            }
        }
        PoolStrategy::RandomBall { count } => {
            check_count(*count)?;
            for _ in 0..*count {
                let u = uniform_in_ball(&mut rng, n_dim, spec.norm);
                points.push(center.iter().zip(&u).map(|(c, v)| c + spec.radius * v).collect());
            }
        }
        PoolStrategy::SeededPerturbation { count } => {
            check_count(*count)?;
            for _ in 0..*count {
                points.push(
                    center
                        .iter()
                        .map(|c| {
                            let g: f64 = StandardNormal.sample(&mut rng);
                            c + spec.radius * g
                        })
                        .collect(),
                );
            }
        }
        PoolStrategy::Shells { multiples, per_shell } => {
            check_count(*per_shell)?;
            if multiples.is_empty() || multiples.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
                return invalid("shell multiples must be a nonempty list of positive reals");
            }
            for m in multiples {
                for _ in 0..*per_shell {
                    let u = unit_direction(&mut rng, n_dim);
                    points.push(
                        center
                            .iter()
                            .zip(&u)
                            .map(|(c, v)| c + spec.radius * m * v)
                            .collect(),
                    );
                }
            }
        }
        PoolStrategy::Explicit(vectors) => {
            if vectors.iter().any(|v| v.len() != n_dim) {
                return invalid("explicit pool vectors must match the dimension");
            }
            points.extend(vectors.iter().cloned());
        }
    }
    CandidatePool::new(points, spec.strategy.tag())
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return invalid("pool count must be at least 1");
    }
    Ok(())
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R, n_dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n_dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = Norm::L2.of(&g);
        if norm > 1e-12 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Uniform point in the unit ball of `norm`.
fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, n_dim: usize, norm: Norm) -> Vec<f64> {
    match norm {
        Norm::L2 => {
            let u: f64 = rng.random();
            let scale = u.powf(1.0 / n_dim as f64);
            unit_direction(rng, n_dim).into_iter().map(|v| v * scale).collect()
        }
        Norm::L1 => {
            // Signed exponential spacings normalized by one extra spacing.
            let e: Vec<f64> = (0..=n_dim).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = e.iter().sum();
            e[..n_dim]
                .iter()
                .map(|v| {
                    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    s * v / total
                })
                .collect()
        }
    }
}

/// Indices kept by a greedy scan: a point is kept iff it is at Euclidean
/// distance at least `eps` from every point kept before it.
pub fn greedy_packing(points: &[Vec<f64>], eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return invalid(format!("packing scale must be positive, got {eps}"));
    }
    let mut kept: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let separated = kept.iter().all(|&k| {
            let d2: f64 = points[k].iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= eps
        });
        if separated {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Size of the greedy `eps`-separated subset; a lower bound on the packing
/// number of the point set.
pub fn greedy_packing_count(points: &[Vec<f64>], eps: f64) -> Result<usize> {
    Ok(greedy_packing(points, eps)?.len())
}
