use alloc::vec::Vec;

use crate::{tol, Error, Result};

/// Populations of a diagonal density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates the entries: each `>= -1e-12`, total `1` within `1e-9`.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&p| p.is_nan() || p < -tol::ALGEBRAIC) {
            return Err(Error::InvalidArgument(alloc::format!(
                "negative or non-finite probability {bad}"
            )));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > tol::STOCHASTIC {
            return Err(Error::InvalidArgument(alloc::format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { entries })
    }

    /// Point mass on basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut entries = alloc::vec![0.0; dim];
        entries[index] = 1.0;
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entry `i`, with round-off negatives clamped to zero.
    pub fn get(&self, i: usize) -> f64 {
        self.entries[i].max(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_tiny_negatives() {
        let p = ProbabilityVector::new(alloc::vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(p.get(1), 0.0);
    }

    #[test]
    fn rejects_bad_totals() {
        assert!(ProbabilityVector::new(alloc::vec![0.5, 0.4]).is_err());
        assert!(ProbabilityVector::new(alloc::vec![1.1, -0.1]).is_err());
    }
}
