use serde::{Deserialize, Serialize};

use crate::rng::SeedRecord;
use crate::scalar::Real;

/// Monte Carlo draws together with the stream that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EmpiricalSample<T: Real> {
    values: Vec<T>,
    seed: SeedRecord,
}

impl<T: Real> EmpiricalSample<T> {
    /// # Panics
    /// If `values` is empty.
    pub fn new(values: Vec<T>, seed: SeedRecord) -> Self {
        assert!(!values.is_empty(), "empirical sample must be nonempty");
        Self { values, seed }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> SeedRecord {
        self.seed
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize(self.values.len()).unwrap()
    }

    pub fn fraction(&self, pred: impl Fn(T) -> bool) -> T {
        let hits = self.values.iter().filter(|&&v| pred(v)).count();
        T::from_usize(hits).unwrap() / T::from_usize(self.values.len()).unwrap()
    }
}
