//! Optimizers: evolution strategy, tree GA and human-choice fitness.

pub mod es;
pub mod ga;

pub use es::{EsConfig, EsError, EsState};
pub use ga::{ga_step, GaConfig, GaError, GaPopulation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IecError {
    #[error("candidate {index} out of range for {n} candidates")]
    OutOfRange { index: usize, n: usize },
    #[error("candidate {index} has {size} blocks, below the minimum of {min_size}")]
    Filtered { index: usize, size: usize, min_size: usize },
    #[error("{sizes} sizes given for {n} candidates")]
    Arity { sizes: usize, n: usize },
}

/// Candidates large enough to be shown to the user.
pub fn displayable(sizes: &[usize], min_size: usize) -> Vec<bool> {
    sizes.iter().map(|&s| s >= min_size).collect()
}

/// One-hot fitness for a human choice. Candidates below `min_size` can never be chosen.
pub fn iec_fitness(chosen: usize, n: usize, sizes: &[usize], min_size: usize) -> Result<Vec<f64>, IecError> {
    if sizes.len() != n {
        return Err(IecError::Arity { sizes: sizes.len(), n });
    }
    if chosen >= n {
        return Err(IecError::OutOfRange { index: chosen, n });
    }
    if sizes[chosen] < min_size {
        return Err(IecError::Filtered { index: chosen, size: sizes[chosen], min_size });
    }
    let mut f = vec![0.0; n];
    f[chosen] = 1.0;
    Ok(f)
}

/// Per-generation optimizer record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub generation: u64,
    pub fitnesses: Vec<f64>,
    pub best: f64,
    /// Text form of the best genome.
    pub best_genome: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_choice() {
        assert_eq!(iec_fitness(3, 10, &[10; 10], 8).unwrap(), vec![0., 0., 0., 1., 0., 0., 0., 0., 0., 0.]);
    }

    #[test]
    fn filtered_candidates() {
        let sizes = [3, 9, 2];
        assert_eq!(displayable(&sizes, 8), vec![false, true, false]);
        assert_eq!(iec_fitness(0, 3, &sizes, 8), Err(IecError::Filtered { index: 0, size: 3, min_size: 8 }));
        assert_eq!(iec_fitness(3, 3, &sizes, 8), Err(IecError::OutOfRange { index: 3, n: 3 }));
        assert!(displayable(&[1, 2, 3], 8).iter().all(|d| !d));
        assert!(displayable(&[0, 0], 0).iter().all(|d| *d));
        assert_eq!(iec_fitness(0, 3, &[0, 0, 0], 0).unwrap(), vec![1.0, 0.0, 0.0]);
    }
}
