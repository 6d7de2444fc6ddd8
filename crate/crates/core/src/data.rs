use crate::error::{invalid, Result};

/// Which third of a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    /// Rows `[0, N)`: distance oracle.
    First,
    /// Rows `[N, 2N)`: preliminary round.
    Second,
    /// Rows `[2N, 3N)`: champions league.
    Third,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::First, Part::Second, Part::Third];

    fn index(self) -> usize {
        match self {
            Part::First => 0,
            Part::Second => 1,
            Part::Third => 2,
        }
    }
}

/// `3N` labelled observations, split into three fixed contiguous parts.
///
/// Covariates are stored row-major. The split is never reshuffled, so every
/// downstream statistic is a pure function of the stored rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    n_dim: usize,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, n_dim: usize) -> Result<Self> {
        if n_dim == 0 {
            return invalid("dataset dimension must be positive");
        }
        if xs.len() != ys.len() * n_dim {
            return invalid(format!(
                "{} covariate entries do not form {} rows of dimension {}",
                xs.len(),
                ys.len(),
                n_dim
            ));
        }
        if ys.is_empty() || !ys.len().is_multiple_of(3) {
            return invalid(format!(
                "row count {} must be a positive multiple of 3",
                ys.len()
            ));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return invalid("dataset contains a non-finite entry");
        }
        Ok(Self { xs, ys, n_dim })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    /// Total number of rows, `3N`.
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Per-part sample size `N`.
    pub fn part_len(&self) -> usize {
        self.ys.len() / 3
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.xs[i * self.n_dim..(i + 1) * self.n_dim]
    }

    pub fn part(&self, part: Part) -> DataPart<'_> {
        let n = self.part_len();
        let lo = part.index() * n;
        DataPart {
            xs: &self.xs[lo * self.n_dim..(lo + n) * self.n_dim],
            ys: &self.ys[lo..lo + n],
            n_dim: self.n_dim,
        }
    }
}

/// Borrowed view of one third of a dataset (or any row range).
#[derive(Debug, Clone, Copy)]
pub struct DataPart<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub n_dim: usize,
}

impl<'a> DataPart<'a> {
    /// Builds a view over raw row-major slices.
    pub fn new(xs: &'a [f64], ys: &'a [f64], n_dim: usize) -> Result<Self> {
        if n_dim == 0 || xs.len() != ys.len() * n_dim {
            return invalid("covariate slice does not match response length");
        }
        Ok(Self { xs, ys, n_dim })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.xs[i * self.n_dim..(i + 1) * self.n_dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'a, f64> {
        self.xs.chunks_exact(self.n_dim)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let xs = (0..6).map(|i| i as f64).collect();
        let ys = vec![10.0, 11.0, 12.0, 13.0, 14.0, 15.0];
        Dataset::new(xs, ys, 1).unwrap()
    }

    #[test]
    fn parts_are_contiguous_thirds() {
        let d = tiny();
        assert_eq!(d.part_len(), 2);
        assert_eq!(d.part(Part::First).ys, &[10.0, 11.0]);
        assert_eq!(d.part(Part::Second).ys, &[12.0, 13.0]);
        assert_eq!(d.part(Part::Third).xs, &[4.0, 5.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(Dataset::new(vec![0.0; 4], vec![0.0; 4], 1).is_err());
        assert!(Dataset::new(vec![0.0; 5], vec![0.0; 3], 2).is_err());
        assert!(Dataset::new(vec![0.0, f64::NAN, 0.0], vec![0.0; 3], 1).is_err());
        assert!(Dataset::new(vec![0.0; 3], vec![0.0, f64::INFINITY, 0.0], 1).is_err());
    }
}
