//! Headless, deterministic voxel simulation with evolutionary search on top.

pub mod backend;
pub mod block;
pub mod encodings;
pub mod evolution;
pub mod experiments;
pub mod geom;
pub mod iec;
pub mod tick;
pub mod world;

pub use backend::{BackendError, LocalBackend, WorldBackend};
pub use block::{Block, BlockType};
pub use geom::{Cube, Orientation, Position};
pub use iec::{IecConfig, IecSession, SessionError};
pub use tick::{Engine, TickRate};
pub use world::{CenterOfMass, VoxelError, World};
