//! Shared fixtures for the benchmarks.

use mom_tournament::datagen::{generate, Design, Noise, ProblemSpec};
use mom_tournament::pool::{build_pool, Norm, PoolSpec, PoolStrategy};
use mom_tournament::{CandidatePool, Dataset, RngSpec, TournamentConfig};

pub struct Fixture {
    pub spec: ProblemSpec,
    pub data: Dataset,
    pub pool: CandidatePool,
    pub config: TournamentConfig,
}

/// Gaussian design with Student-t noise and a pool of `t0` plus
/// `4 * per_shell` decoys at `{0.5, 1, 2, 8} r`.
pub fn fixture(n_dim: usize, n_per_part: usize, per_shell: usize) -> Fixture {
    let mut t0 = vec![0.0; n_dim];
    t0[0] = 1.0;
    let spec = ProblemSpec {
        n_dim,
        n_per_part,
        design: Design::GaussianIso,
        noise: Noise::StudentT { dof: 5.0, sigma: 1.0 },
        t0: t0.clone(),
    };
    let data = generate(&spec, RngSpec::new(7, 0)).expect("valid spec");
    let r = (n_dim as f64 / n_per_part as f64).sqrt();
    let pool = build_pool(
        &PoolSpec {
            strategy: PoolStrategy::Shells {
                multiples: vec![0.5, 1.0, 2.0, 8.0],
                per_shell,
            },
            center: t0,
            radius: r,
            norm: Norm::L2,
            include_center: true,
        },
        n_dim,
        RngSpec::new(7, 1),
    )
    .expect("valid pool");
    Fixture {
        spec,
        data,
        pool,
        config: TournamentConfig::with_r_sigma(r, 1.0),
    }
}

/// `len` symmetrized Pareto draws with tail index 2.5.
pub fn heavy_sample(len: usize) -> Vec<f64> {
    mom_tournament::datagen::sample_noise(
        Noise::SymmetrizedPareto { tail: 2.5, sigma: 1.0 },
        len,
        RngSpec::new(3, 0),
    )
    .expect("valid noise")
}
