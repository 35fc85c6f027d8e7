//! Gaussian evolution strategy with z-scored fitness weights.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EsError {
    #[error("ask called while a previous ask is still outstanding")]
    DoubleAsk,
    #[error("tell called without an outstanding ask")]
    NoAsk,
    #[error("expected {expected} fitness values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("mirrored sampling needs an even population, got {0}")]
    OddMirrored(usize),
    #[error("{0} must be non-negative and finite")]
    BadHyper(&'static str),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    pub population: usize,
    pub sigma: f64,
    pub lr: f64,
    /// Sample noise in `(+e, -e)` pairs.
    pub mirrored: bool,
}

impl Default for EsConfig {
    fn default() -> Self {
        EsConfig { population: 10, sigma: 0.1, lr: 0.01, mirrored: false }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<(), EsError> {
        if self.population == 0 {
            return Err(EsError::EmptyPopulation);
        }
        if self.mirrored && self.population % 2 == 1 {
            return Err(EsError::OddMirrored(self.population));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(EsError::BadHyper("sigma"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(EsError::BadHyper("lr"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsState {
    pub theta: Vec<f64>,
    pub config: EsConfig,
    noise: Option<Vec<Vec<f64>>>,
}

/// Maps `f` to zero mean and unit (population) standard deviation; a constant vector maps to zeros.
pub fn standardize(f: &[f64]) -> Vec<f64> {
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let var = f.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return vec![0.0; f.len()];
    }
    f.iter().map(|x| (x - mean) / sd).collect()
}

impl EsState {
    pub fn new(theta: Vec<f64>, config: EsConfig) -> Result<Self, EsError> {
        config.validate()?;
        Ok(EsState { theta, config, noise: None })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn has_outstanding_ask(&self) -> bool {
        self.noise.is_some()
    }

    /// Noise vectors of the outstanding ask.
    pub fn noise(&self) -> Option<&[Vec<f64>]> {
        self.noise.as_deref()
    }

    /// Samples `population` candidates `theta + sigma * e_i`.
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vec<f64>>, EsError> {
        if self.noise.is_some() {
            return Err(EsError::DoubleAsk);
        }
        let n = self.config.population;
        let d = self.dim();
        let mut noise: Vec<Vec<f64>> = Vec::with_capacity(n);
        while noise.len() < n {
            let e: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            if self.config.mirrored {
                noise.push(e.iter().map(|x| -x).collect());
                noise.insert(noise.len() - 1, e);
            } else {
                noise.push(e);
            }
        }
        let sigma = self.config.sigma;
        let candidates = noise.iter().map(|e| self.theta.iter().zip(e).map(|(t, x)| t + sigma * x).collect()).collect();
        self.noise = Some(noise);
        Ok(candidates)
    }

    /// Drops the outstanding ask without updating `theta`.
    pub fn cancel_ask(&mut self) -> Result<(), EsError> {
        self.noise.take().map(|_| ()).ok_or(EsError::NoAsk)
    }

    /// The step `lr / (n sigma) * sum_i z_i e_i` for the outstanding ask; zero when sigma is zero.
    pub fn step_for(&self, fitness: &[f64]) -> Result<Vec<f64>, EsError> {
        let noise = self.noise.as_ref().ok_or(EsError::NoAsk)?;
        if fitness.len() != noise.len() {
            return Err(EsError::Arity { expected: noise.len(), got: fitness.len() });
        }
        let mut step = vec![0.0; self.dim()];
        let sigma = self.config.sigma;
        if sigma == 0.0 {
            return Ok(step);
        }
        let z = standardize(fitness);
        let scale = self.config.lr / (noise.len() as f64 * sigma);
        for (zi, e) in z.iter().zip(noise) {
            if *zi == 0.0 {
                continue;
            }
            for (s, x) in step.iter_mut().zip(e) {
                *s += scale * zi * x;
            }
        }
        Ok(step)
    }

    /// Updates `theta` from the fitness of the outstanding ask (higher is better).
    pub fn tell(&mut self, fitness: &[f64]) -> Result<&[f64], EsError> {
        let step = self.step_for(fitness)?;
        for (t, s) in self.theta.iter_mut().zip(&step) {
            *t += s;
        }
        self.noise = None;
        Ok(&self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ask_tell_protocol() {
        let mut es = EsState::new(vec![0.0; 3], EsConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(es.tell(&[0.0; 10]), Err(EsError::NoAsk));
        es.ask(&mut rng).unwrap();
        assert_eq!(es.ask(&mut rng), Err(EsError::DoubleAsk));
        assert_eq!(es.tell(&[0.0; 9]), Err(EsError::Arity { expected: 10, got: 9 }));
        assert!(es.has_outstanding_ask());
        es.tell(&[0.0; 10]).unwrap();
        assert!(!es.has_outstanding_ask());
    }

    #[test]
    fn zero_sigma_candidates_equal_theta() {
        let cfg = EsConfig { sigma: 0.0, ..EsConfig::default() };
        let mut es = EsState::new(vec![0.5, -1.0], cfg).unwrap();
        let c = es.ask(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(c.iter().all(|x| x == &vec![0.5, -1.0]));
        es.tell(&(0..10).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert_eq!(es.theta, vec![0.5, -1.0]);
    }

    #[test]
    fn constant_fitness_is_a_zero_update() {
        let mut es = EsState::new(vec![0.25; 5], EsConfig::default()).unwrap();
        es.ask(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        es.tell(&[3.0; 10]).unwrap();
        assert_eq!(es.theta, vec![0.25; 5]);
    }

    #[test]
    fn mirrored_pair_moves_toward_the_winner() {
        let cfg = EsConfig { population: 2, mirrored: true, ..EsConfig::default() };
        let mut es = EsState::new(vec![0.0; 4], cfg).unwrap();
        let cands = es.ask(&mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let e = es.noise().unwrap()[0].clone();
        assert_eq!(es.noise().unwrap()[1], e.iter().map(|x| -x).collect::<Vec<_>>());
        assert_eq!(cands.len(), 2);
        es.tell(&[1.0, 0.0]).unwrap();
        // z = (1, -1), so the step is lr / (2 sigma) * 2e = 0.1 e.
        for (t, x) in es.theta.iter().zip(&e) {
            assert!((t - 0.1 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn cancel_allows_a_fresh_ask() {
        let mut es = EsState::new(vec![0.0; 2], EsConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(es.cancel_ask(), Err(EsError::NoAsk));
        es.ask(&mut rng).unwrap();
        es.cancel_ask().unwrap();
        es.ask(&mut rng).unwrap();
    }

    #[test]
    fn config_validation() {
        assert!(EsConfig { population: 0, ..EsConfig::default() }.validate().is_err());
        assert!(EsConfig { population: 3, mirrored: true, ..EsConfig::default() }.validate().is_err());
        assert!(EsConfig { sigma: -0.1, ..EsConfig::default() }.validate().is_err());
    }
}
