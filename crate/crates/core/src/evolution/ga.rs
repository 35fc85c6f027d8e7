//! Generational GA over block trees. Fitness is a distance: lower is better.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encodings::tree::{TreeGenome, TreeParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("population needs at least 2 genomes, got {0}")]
    TooSmall(usize),
    #[error("{genomes} genomes but {fitnesses} fitness values")]
    Unevaluated { genomes: usize, fitnesses: usize },
    #[error("elite count {elite} must be below the population size {size}")]
    BadElite { elite: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub elite: usize,
    pub parent_fraction: f64,
    pub mutation_rate: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { elite: 1, parent_fraction: 0.10, mutation_rate: 0.05 }
    }
}

impl GaConfig {
    pub fn parent_pool_size(&self, population: usize) -> usize {
        ((self.parent_fraction * population as f64).ceil() as usize).clamp(1, population)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaPopulation {
    pub genomes: Vec<TreeGenome>,
    /// Parallel to `genomes` once evaluated; empty before.
    pub fitnesses: Vec<f64>,
    pub generation: u64,
}

impl GaPopulation {
    pub fn new(genomes: Vec<TreeGenome>) -> Self {
        GaPopulation { genomes, fitnesses: Vec::new(), generation: 0 }
    }

    pub fn random<R: Rng + ?Sized>(size: usize, params: &TreeParams, rng: &mut R) -> Self {
        GaPopulation::new((0..size).map(|_| TreeGenome::random(params, rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    fn check_evaluated(&self) -> Result<(), GaError> {
        if self.fitnesses.len() != self.genomes.len() {
            return Err(GaError::Unevaluated { genomes: self.genomes.len(), fitnesses: self.fitnesses.len() });
        }
        Ok(())
    }

    /// Indices sorted best first; ties keep index order.
    pub fn ranking(&self) -> Result<Vec<usize>, GaError> {
        self.check_evaluated()?;
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fitnesses[a].total_cmp(&self.fitnesses[b]));
        Ok(idx)
    }

    pub fn best(&self) -> Result<(usize, f64), GaError> {
        let i = self.ranking()?[0];
        Ok((i, self.fitnesses[i]))
    }
}

/// Next generation: elites first, then children of two parents drawn with
/// replacement from the top `ceil(parent_fraction * size)`, each mutated
/// with probability `mutation_rate`.
pub fn ga_step<R: Rng + ?Sized>(pop: &GaPopulation, params: &TreeParams, config: &GaConfig, rng: &mut R) -> Result<GaPopulation, GaError> {
    let size = pop.len();
    if size < 2 {
        return Err(GaError::TooSmall(size));
    }
    if config.elite >= size {
        return Err(GaError::BadElite { elite: config.elite, size });
    }
    let ranking = pop.ranking()?;
    let parents = &ranking[..config.parent_pool_size(size)];
    let mut next: Vec<TreeGenome> = ranking[..config.elite].iter().map(|&i| pop.genomes[i].clone()).collect();
    while next.len() < size {
        let a = &pop.genomes[parents[rng.random_range(0..parents.len())]];
        let b = &pop.genomes[parents[rng.random_range(0..parents.len())]];
        let child = a.crossover(b, rng);
        next.push(child.mutate(params, config.mutation_rate, rng).0);
    }
    Ok(GaPopulation { genomes: next, fitnesses: Vec::new(), generation: pop.generation + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockType;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> TreeParams {
        TreeParams::new(vec![BlockType::STONE, BlockType::GLASS])
    }

    #[test]
    fn pool_of_twenty_is_two() {
        assert_eq!(GaConfig::default().parent_pool_size(20), 2);
        assert_eq!(GaConfig::default().parent_pool_size(21), 3);
        assert_eq!(GaConfig::default().parent_pool_size(2), 1);
    }

    #[test]
    fn ties_pick_index_zero_as_elite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pop = GaPopulation::random(6, &params(), &mut rng);
        pop.fitnesses = vec![1.0; 6];
        let next = ga_step(&pop, &params(), &GaConfig::default(), &mut rng).unwrap();
        assert_eq!(next.genomes[0], pop.genomes[0]);
        assert_eq!(next.len(), 6);
        assert_eq!(next.generation, 1);
    }

    #[test]
    fn errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pop = GaPopulation::random(1, &params(), &mut rng);
        pop.fitnesses = vec![0.0];
        assert_eq!(ga_step(&pop, &params(), &GaConfig::default(), &mut rng), Err(GaError::TooSmall(1)));
        let pop = GaPopulation::random(4, &params(), &mut rng);
        assert!(matches!(ga_step(&pop, &params(), &GaConfig::default(), &mut rng), Err(GaError::Unevaluated { .. })));
    }
}
