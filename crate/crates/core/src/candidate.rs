use crate::data::{dot, DataPart};
use crate::error::{invalid, Result};

/// A linear predictor `x ↦ ⟨coeffs, x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub coeffs: Vec<f64>,
}

impl Candidate {
    pub fn new(id: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid(format!("candidate {id} has a non-finite coefficient"));
        }
        Ok(Self { id, coeffs })
    }

    pub fn n_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }

    /// Predictions on every row of `part`.
    pub fn predictions(&self, part: &DataPart<'_>) -> Vec<f64> {
        part.rows().map(|x| self.predict(x)).collect()
    }

    pub(crate) fn check_dim(&self, n_dim: usize) -> Result<()> {
        if self.coeffs.len() != n_dim {
            return invalid(format!(
                "candidate {} has dimension {}, data has {}",
                self.id,
                self.coeffs.len(),
                n_dim
            ));
        }
        Ok(())
    }
}

/// A nonempty, ordered, finite set of candidates with ids `0..K`.
///
/// List order fixes every tie-break downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    candidates: Vec<Candidate>,
    provenance: String,
}

impl CandidatePool {
    pub fn new(vectors: Vec<Vec<f64>>, provenance: impl Into<String>) -> Result<Self> {
        if vectors.is_empty() {
            return invalid("candidate pool must be nonempty");
        }
        let n_dim = vectors[0].len();
        if n_dim == 0 || vectors.iter().any(|v| v.len() != n_dim) {
            return invalid("pool vectors must share a positive dimension");
        }
        let candidates = vectors
            .into_iter()
            .enumerate()
            .map(|(id, v)| Candidate::new(id, v))
            .collect::<Result<_>>()?;
        Ok(Self {
            candidates,
            provenance: provenance.into(),
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn get(&self, id: usize) -> Option<&Candidate> {
        self.candidates.get(id)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn n_dim(&self) -> usize {
        self.candidates[0].n_dim()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// One line per candidate: `id c_0 c_1 ...`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.provenance);
        for c in &self.candidates {
            out.push_str(&c.id.to_string());
            for v in &c.coeffs {
                out.push(' ');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut provenance = String::from("text");
        let mut vectors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if lineno == 0 {
                    provenance = rest.trim().to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| crate::Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let id: usize = fields
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(format!("bad id: {e}")))?;
            if id != vectors.len() {
                return Err(parse_err(format!("expected id {}, found {id}", vectors.len())));
            }
            let coeffs = fields
                .map(|f| f.parse::<f64>().map_err(|e| parse_err(format!("bad coefficient {f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            vectors.push(coeffs);
        }
        Self::new(vectors, provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_list_order() {
        let pool = CandidatePool::new(vec![vec![1.0], vec![2.0], vec![3.0]], "explicit").unwrap();
        let ids: Vec<_> = pool.candidates().iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_empty_ragged_and_nonfinite() {
        assert!(CandidatePool::new(vec![], "x").is_err());
        assert!(CandidatePool::new(vec![vec![1.0], vec![1.0, 2.0]], "x").is_err());
        assert!(CandidatePool::new(vec![vec![f64::NAN]], "x").is_err());
    }

    #[test]
    fn text_round_trip() {
        let pool = CandidatePool::new(vec![vec![0.1, -2.5], vec![1e-300, 3.0]], "grid").unwrap();
        let back = CandidatePool::from_text(&pool.to_text()).unwrap();
        assert_eq!(back, pool);
    }

    #[test]
    fn text_rejects_out_of_order_ids() {
        assert!(CandidatePool::from_text("1 0.5\n").is_err());
    }
}
