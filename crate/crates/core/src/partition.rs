use std::ops::Range;

use crate::error::{invalid, Result};

/// Consecutive, disjoint, equal-length blocks over `[0, n_used)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    n_blocks: usize,
    block_size: usize,
}

impl BlockPartition {
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_used(&self) -> usize {
        self.n_blocks * self.block_size
    }

    pub fn block(&self, j: usize) -> Range<usize> {
        assert!(j < self.n_blocks, "block {j} out of {}", self.n_blocks);
        j * self.block_size..(j + 1) * self.block_size
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        (0..self.n_blocks).map(|j| self.block(j))
    }
}

/// Splits `n_available` indices into `n_blocks` consecutive blocks of
/// `floor(n_available / n_blocks)` indices; the trailing remainder is dropped.
pub fn make_block_partition(n_available: usize, n_blocks: usize) -> Result<BlockPartition> {
    if n_blocks == 0 || n_blocks > n_available {
        return invalid(format!(
            "cannot split {n_available} indices into {n_blocks} blocks"
        ));
    }
    Ok(BlockPartition {
        n_blocks,
        block_size: n_available / n_blocks,
    })
}

/// Number of blocks for the tournament rounds: `θ N min{1, (r/σ)²}`,
/// rounded, at least one and at most `N`.
pub fn choose_block_count(n: usize, r: f64, sigma: f64, theta: f64) -> Result<usize> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    if !(r > 0.0 && r.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("r and sigma must be positive (r={r}, sigma={sigma})"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta must lie in (0, 1), got {theta}"));
    }
    let ratio = (r / sigma).powi(2).min(1.0);
    let raw = (theta * n as f64 * ratio).round() as usize;
    Ok(raw.clamp(1, n))
}
