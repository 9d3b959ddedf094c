//! Per-sample weight vectors produced by the filter and consumed by the
//! weighted Huber loss. Entries live in [0, 1/n].

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> WeightVector<S> {
    /// Uniform weights 1/n.
    pub fn uniform(n: usize) -> Self {
        let w = S::one() / S::from_usize(n);
        WeightVector {
            values: vec![w; n],
        }
    }

    /// Validates 0 ≤ wᵢ ≤ 1/n (with a tiny tolerance for roundoff).
    pub fn from_values(values: Vec<S>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("weight vector must be non-empty"));
        }
        let cap = S::one() / S::from_usize(n);
        let slack = S::from_f64(1e-12);
        for (i, &w) in values.iter().enumerate() {
            if !(w >= -slack && w <= cap + slack) {
                return Err(Error::invalid(format!(
                    "weight {i} = {w} outside [0, 1/n]"
                )));
            }
        }
        Ok(WeightVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    pub fn to_array(&self) -> Array1<S> {
        Array1::from_vec(self.values.clone())
    }

    pub fn sum(&self) -> S {
        self.values.iter().cloned().sum()
    }

    pub fn get(&self, i: usize) -> S {
        self.values[i]
    }

    /// Indices with weight exactly zero.
    pub fn zero_set(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, w)| **w == S::zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn set(&mut self, i: usize, v: S) {
        self.values[i] = v;
    }
}

/// Membership test for the weight polytope: 0 ≤ wᵢ ≤ 1/n and
/// Σ wᵢ ≥ 1 − ε̃ (total mass normalized to 1).
pub fn weight_polytope_check<S: Scalar>(w: &WeightVector<S>, epsilon_tilde: S) -> bool {
    let n = w.len();
    let cap = S::one() / S::from_usize(n);
    let slack = S::from_f64(1e-12);
    for &wi in w.as_slice() {
        if wi < -slack || wi > cap + slack {
            return false;
        }
    }
    w.sum() >= S::one() - epsilon_tilde - slack
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_in_polytope() {
        let w: WeightVector<f64> = WeightVector::uniform(10);
        assert!(weight_polytope_check(&w, 0.0));
        assert!(weight_polytope_check(&w, 0.3));
    }

    #[test]
    fn one_zeroed_weight_violates_tight_budget() {
        // n = 10, ε̃ = 0.05: mass 0.9 < 0.95.
        let mut w: WeightVector<f64> = WeightVector::uniform(10);
        w.set(3, 0.0);
        assert!(!weight_polytope_check(&w, 0.05));
        assert!(weight_polytope_check(&w, 0.1));
    }

    #[test]
    fn overweight_entries_rejected() {
        let n = 10;
        let values = vec![1.0 / n as f64 + 1e-6; n];
        assert!(WeightVector::from_values(values.clone()).is_err());
        let w = WeightVector {
            values: values.clone(),
        };
        assert!(!weight_polytope_check(&w, 0.5));
    }

    #[test]
    fn zero_set_reports_exact_zeros() {
        let mut w: WeightVector<f64> = WeightVector::uniform(4);
        w.set(2, 0.0);
        assert_eq!(w.zero_set(), vec![2]);
    }
}
