//! Versioned block lists, most importantly the reference flying machine.

use serde::{Deserialize, Serialize};

use crate::block::{Block, BlockType};
use crate::geom::{Cube, Orientation, Position};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    pub name: String,
    pub version: u32,
    /// Blocks relative to the blueprint origin.
    pub blocks: Vec<Block>,
}

impl Blueprint {
    /// The blocks translated so the blueprint origin sits at `origin`.
    pub fn placed_at(&self, origin: Position) -> Vec<Block> {
        self.blocks.iter().map(|b| b.translated(origin)).collect()
    }

    /// Bounding box of the blueprint placed at `origin`.
    pub fn bounds(&self, origin: Position) -> Cube {
        let mut min = self.blocks[0].position;
        let mut max = min;
        for b in &self.blocks {
            let p = b.position;
            min = Position::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Position::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        Cube::new(min + origin, max + origin)
    }
}

/// Two-module slime machine that travels north forever.
///
/// The front module (sticky piston facing back, observer, slime) and the rear
/// module (piston facing forward, observer, slime) each fire when the other
/// arrives, so the machine moves in a 12 tick cycle: rear closes up, front
/// pulls ahead.
///
/// ```text
///  z:   -2      -1      0       1   2        3
///  y=1  slime   obs>N   sticky<S    slime    slime
///  y=0                  slime       piston>N obs>S
/// ```
pub fn blueprint_flying_machine() -> Blueprint {
    use BlockType as T;
    use Orientation::*;
    let b = |x, y, z, kind, o| Block::new(Position::new(x, y, z), kind, o);
    Blueprint {
        name: "flying-machine".into(),
        version: 1,
        blocks: vec![
            b(0, 0, 0, T::SLIME, North),
            b(0, 1, 0, T::STICKY_PISTON, South),
            b(0, 1, -1, T::OBSERVER, North),
            b(0, 1, -2, T::SLIME, North),
            b(0, 0, 2, T::PISTON, North),
            b(0, 1, 2, T::SLIME, North),
            b(0, 0, 3, T::OBSERVER, South),
            b(0, 1, 3, T::SLIME, North),
        ],
    }
}
