//! Scalar median-of-means estimation.

use crate::error::{invalid, Result};
use crate::partition::{make_block_partition, BlockPartition};

/// Result of a median-of-means computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomEstimate {
    /// Lower median of `block_means`.
    pub value: f64,
    pub block_means: Vec<f64>,
    /// Confidence parameter, when the block count was derived from it.
    pub delta: Option<f64>,
    /// Deviation radius at `delta`, when a variance was supplied.
    pub bound_radius: Option<f64>,
}

/// Median of the means of consecutive blocks of `ell` values.
///
/// Uses `floor(len / ell)` blocks; when `ell` does not divide the length the
/// blocks grow to `floor(len / k)` and the tail is dropped. For an even block
/// count the smaller of the two middle means is returned.
pub fn med_of_means(values: &[f64], ell: usize) -> Result<MomEstimate> {
    if values.is_empty() {
        return invalid("median of means of an empty sample");
    }
    if ell == 0 || ell > values.len() {
        return invalid(format!(
            "block length {ell} incompatible with {} values",
            values.len()
        ));
    }
    let partition = make_block_partition(values.len(), values.len() / ell)?;
    Ok(estimate_on(values, &partition))
}

/// Median-of-means mean estimator with `ceil(ln(1/delta))` blocks.
///
/// `delta` must lie in `[e^{1 - N/2}, 1)`. When `variance` is given, the
/// matching deviation radius is recorded in the estimate.
pub fn mom_mean_estimator(
    values: &[f64],
    delta: f64,
    variance: Option<f64>,
) -> Result<MomEstimate> {
    let n = values.len();
    if n < 4 {
        return invalid(format!("need at least 4 values, got {n}"));
    }
    let lowest = (1.0 - n as f64 / 2.0).exp();
    if !(delta >= lowest && delta < 1.0) {
        return invalid(format!(
            "delta {delta} outside the admissible range [{lowest:e}, 1) for N={n}"
        ));
    }
    let n_blocks = block_count_for_delta(delta);
    let partition = make_block_partition(n, n_blocks)?;
    let mut est = estimate_on(values, &partition);
    est.delta = Some(delta);
    est.bound_radius = variance
        .map(|v| deviation_radius(v, n, delta))
        .transpose()?;
    Ok(est)
}

/// `ceil(ln(1/delta))`, at least one.
pub fn block_count_for_delta(delta: f64) -> usize {
    ((1.0 / delta).ln().ceil() as usize).max(1)
}

/// Radius `2e sqrt(2 var) sqrt((1 + ln(1/delta)) / N)` outside of which the
/// median-of-means estimate falls with probability at most `delta`.
pub fn deviation_radius(variance: f64, n: usize, delta: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid(format!("variance must be positive, got {variance}"));
    }
    if n == 0 {
        return invalid("sample size must be positive");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let e = std::f64::consts::E;
    Ok(2.0 * e * (2.0 * variance).sqrt() * ((1.0 + (1.0 / delta).ln()) / n as f64).sqrt())
}

/// Block means of `values` over `partition`, summed in index order.
pub fn block_means(values: &[f64], partition: &BlockPartition) -> Vec<f64> {
    let m = partition.block_size() as f64;
    partition
        .blocks()
        .map(|b| values[b].iter().sum::<f64>() / m)
        .collect()
}

/// Smaller middle order statistic. `values` is reordered.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    let k = (values.len() - 1) / 2;
    let (_, v, _) = values.select_nth_unstable_by(k, f64::total_cmp);
    *v
}

fn estimate_on(values: &[f64], partition: &BlockPartition) -> MomEstimate {
    let block_means = block_means(values, partition);
    let mut scratch = block_means.clone();
    let value = lower_median(&mut scratch);
    MomEstimate {
        value,
        block_means,
        delta: None,
        bound_radius: None,
    }
}

/// Median-of-means value only; avoids keeping the block means around.
pub(crate) fn med_of_means_value(values: &[f64], ell: usize) -> Result<f64> {
    if values.is_empty() || ell == 0 || ell > values.len() {
        return invalid(format!(
            "block length {ell} incompatible with {} values",
            values.len()
        ));
    }
    let partition = make_block_partition(values.len(), values.len() / ell)?;
    let mut means = block_means(values, &partition);
    Ok(lower_median(&mut means))
}
