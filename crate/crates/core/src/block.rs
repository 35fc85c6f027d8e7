//! Block types and the shipped block schema.
//!
//! The schema lives in `data/blocks.csv` and is the single source of truth for
//! type ids, names, movability and physics classes. Ids match the `BlockType`
//! enum of the wire protocol.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geom::{Orientation, Position};

/// Raw text of the block schema file.
pub const BLOCK_SCHEMA_CSV: &str = include_str!("../data/blocks.csv");

/// Version of the block schema file format and content.
pub const BLOCK_SCHEMA_VERSION: u32 = 1;

/// Number of block types in the schema.
pub const BLOCK_TYPE_COUNT: usize = 254;

/// How a block reacts to being pushed or pulled by a piston.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Movability {
    Movable,
    Immovable,
    /// Destroyed when a piston pushes into it.
    Breaks,
}

/// Coarse role of a block in redstone circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhysicsClass {
    Air,
    PowerSource,
    Mechanism,
    Transmission,
    InertSolid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockInfo {
    pub id: u16,
    pub name: String,
    pub movability: Movability,
    pub physics: PhysicsClass,
}

#[derive(Debug)]
struct Schema {
    entries: Vec<BlockInfo>,
}

static SCHEMA: LazyLock<Schema> = LazyLock::new(|| parse_schema(BLOCK_SCHEMA_CSV).expect("embedded block schema is well-formed"));

fn parse_schema(text: &str) -> Result<Schema, String> {
    let mut entries = Vec::with_capacity(BLOCK_TYPE_COUNT);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [id, name, movability, physics] = fields[..] else {
            return Err(format!("line {}: expected 4 fields", lineno + 1));
        };
        let id: u16 = id.parse().map_err(|e| format!("line {}: bad id: {e}", lineno + 1))?;
        if usize::from(id) != entries.len() {
            return Err(format!("line {}: ids must be dense and ascending", lineno + 1));
        }
        let movability = match movability {
            "movable" => Movability::Movable,
            "immovable" => Movability::Immovable,
            "breaks" => Movability::Breaks,
            other => return Err(format!("line {}: unknown movability {other}", lineno + 1)),
        };
        let physics = match physics {
            "air" => PhysicsClass::Air,
            "power-source" => PhysicsClass::PowerSource,
            "mechanism" => PhysicsClass::Mechanism,
            "transmission" => PhysicsClass::Transmission,
            "inert-solid" => PhysicsClass::InertSolid,
            other => return Err(format!("line {}: unknown physics class {other}", lineno + 1)),
        };
        entries.push(BlockInfo { id, name: name.to_string(), movability, physics });
    }
    Ok(Schema { entries })
}

/// A block type, identified by its stable protocol id.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockType(u16);

macro_rules! block_consts {
    ($($name:ident = $id:expr;)*) => {
        impl BlockType {
            $(pub const $name: BlockType = BlockType($id);)*
        }

        #[cfg(test)]
        pub(crate) const NAMED_CONSTANTS: &[(&str, BlockType)] = &[$((stringify!($name), BlockType::$name)),*];
    };
}

block_consts! {
    AIR = 5;
    BEDROCK = 10;
    BROWN_MUSHROOM = 26;
    COBBLESTONE = 41;
    GLASS = 87;
    GOLD_BLOCK = 91;
    NETHERRACK = 142;
    NETHER_BRICK = 143;
    OBSERVER = 150;
    OBSIDIAN = 151;
    PISTON = 157;
    PISTON_EXTENSION = 158;
    PISTON_HEAD = 159;
    QUARTZ_BLOCK = 175;
    REDSTONE_BLOCK = 179;
    SLIME = 202;
    STICKY_PISTON = 216;
    STONE = 217;
    TORCH = 229;
    WATER = 240;
}

impl BlockType {
    /// Looks up a protocol id; `None` for ids outside the schema.
    pub fn from_id(id: i32) -> Option<BlockType> {
        let id = u16::try_from(id).ok()?;
        (usize::from(id) < SCHEMA.entries.len()).then_some(BlockType(id))
    }

    pub fn from_name(name: &str) -> Option<BlockType> {
        SCHEMA.entries.iter().find(|e| e.name == name).map(|e| BlockType(e.id))
    }

    pub fn all() -> impl Iterator<Item = BlockType> {
        (0..SCHEMA.entries.len() as u16).map(BlockType)
    }

    pub fn id(self) -> u16 {
        self.0
    }

    pub fn info(self) -> &'static BlockInfo {
        &SCHEMA.entries[usize::from(self.0)]
    }

    pub fn name(self) -> &'static str {
        &self.info().name
    }

    pub fn movability(self) -> Movability {
        self.info().movability
    }

    pub fn physics(self) -> PhysicsClass {
        self.info().physics
    }

    pub fn is_air(self) -> bool {
        self == BlockType::AIR
    }

    pub fn is_piston(self) -> bool {
        self == BlockType::PISTON || self == BlockType::STICKY_PISTON
    }

    /// Carries no mass for centre-of-mass purposes: the head is part of its piston.
    pub fn is_piston_part(self) -> bool {
        self == BlockType::PISTON_HEAD || self == BlockType::PISTON_EXTENSION
    }
}

/// The full schema table, in id order.
pub fn block_schema() -> &'static [BlockInfo] {
    &SCHEMA.entries
}

impl fmt::Debug for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BlockType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BlockType::from_name(s).ok_or_else(|| format!("unknown block type name {s:?}"))
    }
}

impl Serialize for BlockType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for BlockType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// A typed, oriented block at a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub position: Position,
    #[serde(rename = "type")]
    pub kind: BlockType,
    pub orientation: Orientation,
}

impl Block {
    pub const fn new(position: Position, kind: BlockType, orientation: Orientation) -> Self {
        Block { position, kind, orientation }
    }

    /// A NORTH-facing block; orientation is ignored by physics for non-directional types.
    pub const fn at(position: Position, kind: BlockType) -> Self {
        Block::new(position, kind, Orientation::North)
    }

    pub fn translated(self, by: Position) -> Block {
        Block { position: self.position + by, ..self }
    }
}
