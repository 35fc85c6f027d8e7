//! Sparse voxel world and the protocol-level world operations.
//!
//! Absent cells are AIR; AIR is never stored. Every content change enqueues a
//! `BlockChanged` event for the next tick so observers can react to it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{Block, BlockType};
use crate::geom::{Cube, Orientation, Position};
use crate::tick::{EventKind, TickEvent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VoxelError {
    #[error("unknown block type id {0}")]
    UnknownBlockType(i32),
    #[error("unknown orientation id {0}")]
    UnknownOrientation(i32),
    #[error("degenerate cube {0}: min must not exceed max")]
    DegenerateCube(Cube),
}

/// Stored content of a non-air cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub kind: BlockType,
    pub orientation: Orientation,
}

/// A block as it arrives from the wire: ids not yet validated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawBlock {
    pub position: Position,
    pub type_id: i32,
    pub orientation_id: i32,
}

impl RawBlock {
    pub fn validate(&self) -> Result<Block, VoxelError> {
        let kind = BlockType::from_id(self.type_id).ok_or(VoxelError::UnknownBlockType(self.type_id))?;
        let orientation = Orientation::from_id(self.orientation_id).ok_or(VoxelError::UnknownOrientation(self.orientation_id))?;
        Ok(Block::new(self.position, kind, orientation))
    }
}

impl From<Block> for RawBlock {
    fn from(b: Block) -> Self {
        RawBlock { position: b.position, type_id: i32::from(b.kind.id()), orientation_id: b.orientation.id() }
    }
}

/// Unweighted mean position of the massive blocks in a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterOfMass {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CenterOfMass {
    pub fn distance(&self, other: &CenterOfMass) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct World {
    cells: BTreeMap<Position, Cell>,
    tick: u64,
    pub(crate) events: BTreeSet<TickEvent>,
    /// Positions of pistons, sticky pistons and observers.
    pub(crate) mechanisms: BTreeSet<Position>,
    pub(crate) active_observers: BTreeSet<Position>,
    /// The single outstanding event owned by each mechanism.
    pub(crate) pending: BTreeMap<Position, TickEvent>,
}

impl World {
    pub fn new() -> Self {
        World::default()
    }

    /// Ticks simulated so far.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub(crate) fn set_tick(&mut self, tick: u64) {
        self.tick = tick;
    }

    /// Number of stored (non-air) cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, pos: Position) -> Option<Cell> {
        self.cells.get(&pos).copied()
    }

    pub fn kind_at(&self, pos: Position) -> BlockType {
        self.cells.get(&pos).map_or(BlockType::AIR, |c| c.kind)
    }

    pub fn block_at(&self, pos: Position) -> Block {
        match self.cells.get(&pos) {
            Some(c) => Block::new(pos, c.kind, c.orientation),
            None => Block::at(pos, BlockType::AIR),
        }
    }

    /// All stored blocks in position order.
    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        self.cells.iter().map(|(p, c)| Block::new(*p, c.kind, c.orientation))
    }

    /// Places each block in order; later entries win on duplicate positions and
    /// AIR entries delete. Returns the number of entries applied.
    pub fn spawn_blocks(&mut self, blocks: &[Block]) -> usize {
        for b in blocks {
            self.set(b.position, b.kind, b.orientation);
        }
        blocks.len()
    }

    /// Validates every entry before applying any of them.
    pub fn spawn_raw(&mut self, blocks: &[RawBlock]) -> Result<usize, VoxelError> {
        let validated = blocks.iter().map(RawBlock::validate).collect::<Result<Vec<_>, _>>()?;
        Ok(self.spawn_blocks(&validated))
    }

    /// One entry per cell, AIR included, x outermost and z innermost.
    pub fn read_cube(&self, cube: Cube) -> Result<Vec<Block>, VoxelError> {
        cube.validate()?;
        Ok(cube.cells().map(|p| self.block_at(p)).collect())
    }

    /// Sets every cell of `cube` to `kind` facing NORTH.
    pub fn fill_cube(&mut self, cube: Cube, kind: BlockType) -> Result<(), VoxelError> {
        cube.validate()?;
        if kind.is_air() {
            // Only stored cells need touching.
            for p in self.positions_in(cube) {
                self.set(p, kind, Orientation::North);
            }
        } else {
            for p in cube.cells() {
                self.set(p, kind, Orientation::North);
            }
        }
        Ok(())
    }

    /// Stored positions inside `cube`, in position order.
    pub fn positions_in(&self, cube: Cube) -> Vec<Position> {
        if !cube.is_valid() {
            return Vec::new();
        }
        if cube.volume() <= self.cells.len() as u64 {
            return cube.cells().filter(|p| self.cells.contains_key(p)).collect();
        }
        let mut out = Vec::new();
        for x in cube.min.x..=cube.max.x {
            let lo = Position::new(x, cube.min.y, cube.min.z);
            let hi = Position::new(x, cube.max.y, cube.max.z);
            out.extend(self.cells.range(lo..=hi).map(|(p, _)| *p).filter(|p| cube.contains(*p)));
        }
        out
    }

    /// Non-air blocks inside `cube`, in position order.
    pub fn blocks_in(&self, cube: Cube) -> Vec<Block> {
        self.positions_in(cube).into_iter().map(|p| self.block_at(p)).collect()
    }

    /// Count of non-air cells; zero for an empty or degenerate region.
    pub fn non_air_count(&self, region: Cube) -> u64 {
        self.positions_in(region).len() as u64
    }

    /// Mean position of the non-air cells in `region`, each weighing 1.
    ///
    /// Piston heads are massless (they belong to their piston). Returns
    /// `Ok(None)` when the region holds no mass.
    pub fn center_of_mass(&self, region: Cube) -> Result<Option<CenterOfMass>, VoxelError> {
        region.validate()?;
        // Integer sums keep the result independent of iteration order.
        let (mut n, mut sx, mut sy, mut sz) = (0i64, 0i64, 0i64, 0i64);
        for p in self.positions_in(region) {
            if self.kind_at(p).is_piston_part() {
                continue;
            }
            n += 1;
            sx += i64::from(p.x);
            sy += i64::from(p.y);
            sz += i64::from(p.z);
        }
        if n == 0 {
            return Ok(None);
        }
        let n = n as f64;
        Ok(Some(CenterOfMass { x: sx as f64 / n, y: sy as f64 / n, z: sz as f64 / n }))
    }

    /// Writes one cell, keeping the mechanism index and the change queue in sync.
    pub(crate) fn set(&mut self, pos: Position, kind: BlockType, orientation: Orientation) {
        let new = (!kind.is_air()).then_some(Cell { kind, orientation });
        let old = match new {
            Some(c) => self.cells.insert(pos, c),
            None => self.cells.remove(&pos),
        };
        if old == new {
            return;
        }
        self.forget_mechanism(pos);
        if matches!(kind, BlockType::PISTON | BlockType::STICKY_PISTON | BlockType::OBSERVER) {
            self.mechanisms.insert(pos);
        }
        self.note_changed(pos);
    }

    /// Drops the index entry and any scheduled state of the mechanism at `pos`.
    pub(crate) fn forget_mechanism(&mut self, pos: Position) {
        if self.mechanisms.remove(&pos) {
            self.active_observers.remove(&pos);
            if let Some(ev) = self.pending.remove(&pos) {
                self.events.remove(&ev);
            }
        }
    }

    pub(crate) fn note_changed(&mut self, pos: Position) {
        self.events.insert(TickEvent {
            due: self.tick + 1,
            kind: EventKind::BlockChanged,
            position: pos,
            facing: Orientation::North,
        });
    }

    /// Raw cell write used by the movement phase; bookkeeping is done by the caller.
    pub(crate) fn put_raw(&mut self, pos: Position, cell: Option<Cell>) -> Option<Cell> {
        match cell {
            Some(c) => self.cells.insert(pos, c),
            None => self.cells.remove(&pos),
        }
    }

    /// Events still queued, in execution order.
    pub fn pending_events(&self) -> impl Iterator<Item = &TickEvent> {
        self.events.iter()
    }

    /// Checks the sparsity and index invariants; used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let Some((p, _)) = self.cells.iter().find(|(_, c)| c.kind.is_air()) {
            return Err(format!("AIR stored at {p}"));
        }
        for (p, c) in &self.cells {
            let is_mech = matches!(c.kind, BlockType::PISTON | BlockType::STICKY_PISTON | BlockType::OBSERVER);
            if is_mech != self.mechanisms.contains(p) {
                return Err(format!("mechanism index out of sync at {p}"));
            }
        }
        if self.mechanisms.iter().any(|p| !self.cells.contains_key(p)) {
            return Err("mechanism index holds an empty cell".into());
        }
        Ok(())
    }
}
