//! Median-of-means tournaments for least-squares regression over finite
//! pools of linear predictors.
//!
//! The sample of `3N` observations is split into three fixed parts. The
//! first part feeds a distance oracle that decides which pairs of candidates
//! are far enough apart to play a match; the second part decides
//! preliminary-round matches by a majority vote over blocks; the third part
//! decides the champions league among the qualifiers.
//!
//! ```
//! use mom_tournament::{
//!     datagen::{generate, Design, Noise, ProblemSpec},
//!     run_tournament, CandidatePool, RngSpec, TournamentConfig,
//! };
//!
//! let spec = ProblemSpec {
//!     n_dim: 2,
//!     n_per_part: 200,
//!     design: Design::GaussianIso,
//!     noise: Noise::None,
//!     t0: vec![1.0, -1.0],
//! };
//! let data = generate(&spec, RngSpec::new(1, 0)).unwrap();
//! let pool = CandidatePool::new(vec![vec![1.0, -1.0], vec![0.0, 0.0], vec![2.0, 1.0]], "demo").unwrap();
//! let out = run_tournament(&data, &pool, &TournamentConfig::with_r_sigma(0.1, 1.0)).unwrap();
//! assert_eq!(out.champion.id, 0);
//! ```

pub mod baselines;
pub mod candidate;
pub mod config;
pub mod data;
pub mod datagen;
mod error;
pub mod harness;
pub mod mom;
pub mod oracle;
pub mod partition;
pub mod pool;
pub mod rng;
pub mod theory;
pub mod tournament;

pub use candidate::{Candidate, CandidatePool};
pub use config::{Fallback, TieBreak, TournamentConfig};
pub use data::{DataPart, Dataset, Part};
pub use error::{Error, Result};
pub use mom::{med_of_means, mom_mean_estimator, MomEstimate};
pub use oracle::OracleState;
pub use partition::{choose_block_count, make_block_partition, BlockPartition};
pub use rng::RngSpec;
pub use tournament::{run_tournament, MatchRecord, Outcome, TournamentOutcome};
