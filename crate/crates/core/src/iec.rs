//! Interactive evolution sessions: a human picks one candidate per generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{Block, BlockType};
use crate::encodings::mlp::{ActivationSet, DecodeBox, MlpConfig, MlpGenome};
use crate::evolution::es::{EsConfig, EsError, EsState};
use crate::evolution::{displayable, iec_fitness, IecError};
use crate::experiments::config::tower_palette;
use crate::geom::Position;

/// Version of the JSON payload served to clients.
pub const PAYLOAD_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IecConfig {
    /// Candidates per generation.
    pub n: usize,
    pub box_extent: [i32; 3],
    pub palette: Vec<BlockType>,
    pub with_orientation: bool,
    pub symmetrize: bool,
    pub activation: ActivationSet,
    /// Candidates with fewer blocks are hidden and score 0.
    pub min_size: usize,
    pub sigma: f64,
    pub lr: f64,
    /// Standard deviation of the initial parameters.
    pub init_std: f64,
    pub seed: u64,
    /// Free-text goal shown to the user; never scored.
    pub goal: Option<String>,
}

impl Default for IecConfig {
    fn default() -> Self {
        IecConfig {
            n: 9,
            box_extent: [7, 7, 7],
            palette: tower_palette(),
            with_orientation: false,
            symmetrize: false,
            activation: ActivationSet::Default,
            min_size: 8,
            sigma: 0.1,
            lr: 0.01,
            init_std: 0.1,
            seed: 0,
            goal: None,
        }
    }
}

impl IecConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |m: &str| Err(SessionError::InvalidConfig(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.box_extent.iter().any(|&e| !(1..=64).contains(&e)) {
            return bad("box extents must be in 1..=64");
        }
        if self.palette.is_empty() {
            return bad("palette must not be empty");
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return bad("init_std must be non-negative");
        }
        EsConfig { population: self.n, sigma: self.sigma, lr: self.lr, mirrored: false }
            .validate()
            .map_err(|e| SessionError::InvalidConfig(e.to_string()))
    }

    fn mlp(&self) -> MlpConfig {
        MlpConfig {
            palette: self.palette.clone(),
            with_orientation: self.with_orientation,
            symmetrize: self.symmetrize,
            activation: self.activation,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Choice(#[from] IecError),
    #[error("choice is for generation {given} but the session is at generation {current}")]
    StaleGeneration { given: u64, current: u64 },
    #[error(transparent)]
    Es(#[from] EsError),
}

/// One user action, enough to replay a session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
pub enum Action {
    Choose { index: usize },
    Reroll,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub genome: MlpGenome,
    pub blocks: Vec<Block>,
    pub displayable: bool,
}

/// A voxel as `[x, y, z, type id, orientation id]`.
pub type Voxel = [i32; 5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePayload {
    pub index: usize,
    pub displayable: bool,
    pub block_count: usize,
    pub voxels: Vec<Voxel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationPayload {
    pub schema_version: u32,
    pub generation: u64,
    pub box_extent: [i32; 3],
    pub min_size: usize,
    /// Set when no candidate can be chosen; the client should offer a reroll.
    pub reroll_available: bool,
    pub goal: Option<String>,
    pub candidates: Vec<CandidatePayload>,
}

#[derive(Clone, Debug)]
pub struct IecSession {
    config: IecConfig,
    es: EsState,
    rng: ChaCha8Rng,
    generation: u64,
    candidates: Vec<Candidate>,
    history: Vec<Action>,
}

impl IecSession {
    /// Random initial parameters, then the first generation.
    pub fn new(config: IecConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mlp = config.mlp();
        let normal = Normal::new(0.0, config.init_std).map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        let theta: Vec<f64> = (0..mlp.param_count()).map(|_| normal.sample(&mut rng)).collect();
        let es = EsState::new(theta, EsConfig { population: config.n, sigma: config.sigma, lr: config.lr, mirrored: false })?;
        let mut s = IecSession { config, es, rng, generation: 0, candidates: Vec::new(), history: Vec::new() };
        s.ask()?;
        Ok(s)
    }

    /// Rebuilds a session from its config and recorded actions.
    pub fn replay(config: IecConfig, actions: &[Action]) -> Result<Self, SessionError> {
        let mut s = IecSession::new(config)?;
        for a in actions {
            s.apply(*a, None)?;
        }
        Ok(s)
    }

    fn ask(&mut self) -> Result<(), SessionError> {
        let mlp = self.config.mlp();
        let bx = DecodeBox::new(Position::ORIGIN, self.config.box_extent);
        let thetas = self.es.ask(&mut self.rng)?;
        let candidates: Vec<Candidate> = thetas
            .into_iter()
            .map(|theta| {
                let genome = MlpGenome { theta, config: mlp.clone() };
                let blocks = genome.decode_box(bx);
                Candidate { genome, blocks, displayable: false }
            })
            .collect();
        let sizes: Vec<usize> = candidates.iter().map(|c| c.blocks.len()).collect();
        let shown = displayable(&sizes, self.config.min_size);
        self.candidates = candidates.into_iter().zip(shown).map(|(c, d)| Candidate { displayable: d, ..c }).collect();
        Ok(())
    }

    pub fn config(&self) -> &IecConfig {
        &self.config
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn theta(&self) -> &[f64] {
        &self.es.theta
    }

    pub fn reroll_available(&self) -> bool {
        !self.candidates.iter().any(|c| c.displayable)
    }

    fn check_generation(&self, expected: Option<u64>) -> Result<(), SessionError> {
        match expected {
            Some(given) if given != self.generation => Err(SessionError::StaleGeneration { given, current: self.generation }),
            _ => Ok(()),
        }
    }

    /// Scores the choice, updates the ES and serves the next generation.
    /// `expected_generation`, when given, must match the current generation so
    /// a repeated submit cannot advance the session twice.
    pub fn submit_choice(&mut self, index: usize, expected_generation: Option<u64>) -> Result<&[Candidate], SessionError> {
        self.apply(Action::Choose { index }, expected_generation)?;
        Ok(&self.candidates)
    }

    /// Replaces the current candidates with a fresh sample without updating the ES.
    pub fn reroll(&mut self, expected_generation: Option<u64>) -> Result<&[Candidate], SessionError> {
        self.apply(Action::Reroll, expected_generation)?;
        Ok(&self.candidates)
    }

    fn apply(&mut self, action: Action, expected_generation: Option<u64>) -> Result<(), SessionError> {
        self.check_generation(expected_generation)?;
        match action {
            Action::Choose { index } => {
                let sizes: Vec<usize> = self.candidates.iter().map(|c| c.blocks.len()).collect();
                let fitness = iec_fitness(index, sizes.len(), &sizes, self.config.min_size)?;
                self.es.tell(&fitness)?;
                self.generation += 1;
            }
            Action::Reroll => self.es.cancel_ask()?,
        }
        self.ask()?;
        self.history.push(action);
        Ok(())
    }

    pub fn payload(&self) -> GenerationPayload {
        GenerationPayload {
            schema_version: PAYLOAD_SCHEMA_VERSION,
            generation: self.generation,
            box_extent: self.config.box_extent,
            min_size: self.config.min_size,
            reroll_available: self.reroll_available(),
            goal: self.config.goal.clone(),
            candidates: self
                .candidates
                .iter()
                .enumerate()
                .map(|(index, c)| CandidatePayload {
                    index,
                    displayable: c.displayable,
                    block_count: c.blocks.len(),
                    voxels: c
                        .blocks
                        .iter()
                        .map(|b| [b.position.x, b.position.y, b.position.z, i32::from(b.kind.id()), b.orientation.id()])
                        .collect(),
                })
                .collect(),
        }
    }
}
