//! Reference procedures: least squares and naive median-of-means risk
//! minimization over a pool.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::candidate::{Candidate, CandidatePool};
use crate::data::{Dataset, Part};
use crate::error::{invalid, Error, Result};
use crate::mom::med_of_means_value;

/// Default ceiling on the Gram matrix condition number.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Least squares over the rows of `parts`, with the default condition guard.
pub fn erm_least_squares(dataset: &Dataset, parts: &[Part]) -> Result<Candidate> {
    erm_least_squares_with(dataset, parts, DEFAULT_MAX_CONDITION)
}

/// Solves the normal equations `XᵀX t = Xᵀy` by Cholesky factorization,
/// rejecting Gram matrices whose condition number exceeds `max_condition`.
pub fn erm_least_squares_with(
    dataset: &Dataset,
    parts: &[Part],
    max_condition: f64,
) -> Result<Candidate> {
    if parts.is_empty() {
        return invalid("no sample parts selected");
    }
    let d = dataset.n_dim();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut rows = 0;
    let mut seen = [false; 3];
    for &part in parts {
        let slot = Part::ALL.iter().position(|p| *p == part).expect("known part");
        if std::mem::replace(&mut seen[slot], true) {
            continue;
        }
        let view = dataset.part(part);
        for (x, y) in view.rows().zip(view.ys) {
            for i in 0..d {
                rhs[i] += x[i] * y;
                for j in 0..=i {
                    gram[(i, j)] += x[i] * x[j];
                }
            }
        }
        rows += view.len();
    }
    if rows < d {
        return invalid(format!("{rows} rows cannot determine {d} coefficients"));
    }
    for i in 0..d {
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let hi = eig.max();
    let lo = eig.min();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::RankDeficient {
            condition,
            limit: max_condition,
        });
    }
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        condition,
        limit: max_condition,
    })?;
    let t = chol.solve(&rhs);
    Candidate::new(0, t.iter().copied().collect())
}

/// Pool member chosen by minimizing a median-of-means risk estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomRiskChoice {
    pub candidate: Candidate,
    /// `Med_ell` of squared residuals over parts 2 and 3, one per pool entry.
    pub risks: Vec<f64>,
}

impl MomRiskChoice {
    pub fn risk(&self) -> f64 {
        self.risks[self.candidate.id]
    }
}

/// Candidate with the smallest median-of-means squared-residual risk on the
/// second and third parts; the lowest id wins ties.
pub fn mom_risk_minimizer(
    pool: &CandidatePool,
    dataset: &Dataset,
    ell: usize,
) -> Result<MomRiskChoice> {
    if pool.n_dim() != dataset.n_dim() {
        return invalid("pool and dataset dimensions differ");
    }
    let p2 = dataset.part(Part::Second);
    let p3 = dataset.part(Part::Third);
    let risks = pool
        .candidates()
        .iter()
        .map(|c| {
            let sq: Vec<f64> = p2
                .rows()
                .zip(p2.ys)
                .chain(p3.rows().zip(p3.ys))
                .map(|(x, y)| {
                    let r = c.predict(x) - y;
                    r * r
                })
                .collect();
            med_of_means_value(&sq, ell)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = risks
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if *r < risks[b] { i } else { b });
    Ok(MomRiskChoice {
        candidate: pool.candidates()[best].clone(),
        risks,
    })
}
