//! The world operations experiments run against, in-process or over the wire.

use thiserror::Error;

use crate::block::{Block, BlockType};
use crate::geom::Cube;
use crate::tick::{Engine, TickRate, TickRateError};
use crate::world::{CenterOfMass, VoxelError, World};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error(transparent)]
    TickRate(#[from] TickRateError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operation not supported by this backend: {0}")]
    Unsupported(&'static str),
    #[error("transport: {0}")]
    Transport(String),
}

/// The three base operations plus simulator-only tick control.
pub trait WorldBackend {
    fn spawn_blocks(&mut self, blocks: &[Block]) -> Result<(), BackendError>;
    fn read_cube(&mut self, cube: Cube) -> Result<Vec<Block>, BackendError>;
    fn fill_cube(&mut self, cube: Cube, kind: BlockType) -> Result<(), BackendError>;

    /// Advances `n_ticks >= 1` and returns the tick counter.
    fn step(&mut self, _n_ticks: u64) -> Result<u64, BackendError> {
        Err(BackendError::Unsupported("step"))
    }

    /// Empty world at tick 0.
    fn reset(&mut self) -> Result<(), BackendError> {
        Err(BackendError::Unsupported("reset"))
    }

    fn set_tick_rate(&mut self, _rate: TickRate) -> Result<(), BackendError> {
        Err(BackendError::Unsupported("set_tick_rate"))
    }

    fn center_of_mass(&mut self, _region: Cube) -> Result<Option<CenterOfMass>, BackendError> {
        Err(BackendError::Unsupported("center_of_mass"))
    }

    /// True when candidates may instead be evaluated on private [`World`]s
    /// with identical results.
    fn is_in_process(&self) -> bool {
        false
    }
}

/// Backend over an owned [`Engine`]. Unthrottled unless told otherwise.
#[derive(Clone, Debug)]
pub struct LocalBackend {
    pub engine: Engine,
}

impl Default for LocalBackend {
    fn default() -> Self {
        LocalBackend { engine: Engine::unthrottled(World::new()) }
    }
}

impl LocalBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn world(&self) -> &World {
        &self.engine.world
    }
}

pub(crate) fn check_step(n_ticks: u64) -> Result<(), BackendError> {
    if n_ticks == 0 {
        return Err(BackendError::InvalidArgument("step needs n_ticks >= 1".into()));
    }
    Ok(())
}

impl WorldBackend for LocalBackend {
    fn spawn_blocks(&mut self, blocks: &[Block]) -> Result<(), BackendError> {
        self.engine.world.spawn_blocks(blocks);
        Ok(())
    }

    fn read_cube(&mut self, cube: Cube) -> Result<Vec<Block>, BackendError> {
        Ok(self.engine.world.read_cube(cube)?)
    }

    fn fill_cube(&mut self, cube: Cube, kind: BlockType) -> Result<(), BackendError> {
        Ok(self.engine.world.fill_cube(cube, kind)?)
    }

    fn step(&mut self, n_ticks: u64) -> Result<u64, BackendError> {
        check_step(n_ticks)?;
        Ok(self.engine.advance(n_ticks))
    }

    fn reset(&mut self) -> Result<(), BackendError> {
        self.engine.world = World::new();
        Ok(())
    }

    fn set_tick_rate(&mut self, rate: TickRate) -> Result<(), BackendError> {
        Ok(self.engine.set_tick_rate(rate)?)
    }

    fn center_of_mass(&mut self, region: Cube) -> Result<Option<CenterOfMass>, BackendError> {
        Ok(self.engine.world.center_of_mass(region)?)
    }

    fn is_in_process(&self) -> bool {
        true
    }
}
