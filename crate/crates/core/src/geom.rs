//! Integer block coordinates, facings and axis-aligned cubes.
//!
//! Axis convention (fixed, matches Minecraft):
//!
//! | direction | axis |
//! |-----------|------|
//! | east      | +x   |
//! | west      | -x   |
//! | up        | +y   |
//! | down      | -y   |
//! | south     | +z   |
//! | north     | -z   |

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A block coordinate. One unit is one block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Position { x, y, z }
    }

    /// The neighbouring cell in `dir`.
    pub fn offset(self, dir: Orientation) -> Position {
        self + dir.unit()
    }

    pub fn neighbors(self) -> impl Iterator<Item = Position> {
        Orientation::ALL.into_iter().map(move |d| self.offset(d))
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, o: Position) -> Position {
        Position::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, o: Position) -> Position {
        Position::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Position {
    type Output = Position;
    fn neg(self) -> Position {
        Position::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<i32> for Position {
    type Output = Position;
    fn mul(self, k: i32) -> Position {
        Position::new(self.x * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Block facing. The discriminants are the wire-protocol enum values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Orientation {
    #[default]
    North = 0,
    West = 1,
    South = 2,
    East = 3,
    Up = 4,
    Down = 5,
}

impl Orientation {
    /// All six facings in wire order.
    pub const ALL: [Orientation; 6] = [
        Orientation::North,
        Orientation::West,
        Orientation::South,
        Orientation::East,
        Orientation::Up,
        Orientation::Down,
    ];

    pub fn unit(self) -> Position {
        match self {
            Orientation::North => Position::new(0, 0, -1),
            Orientation::West => Position::new(-1, 0, 0),
            Orientation::South => Position::new(0, 0, 1),
            Orientation::East => Position::new(1, 0, 0),
            Orientation::Up => Position::new(0, 1, 0),
            Orientation::Down => Position::new(0, -1, 0),
        }
    }

    pub fn opposite(self) -> Orientation {
        match self {
            Orientation::North => Orientation::South,
            Orientation::South => Orientation::North,
            Orientation::West => Orientation::East,
            Orientation::East => Orientation::West,
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }

    pub fn id(self) -> i32 {
        self as i32
    }

    pub fn from_id(id: i32) -> Option<Orientation> {
        Orientation::ALL.get(usize::try_from(id).ok()?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::North => "NORTH",
            Orientation::West => "WEST",
            Orientation::South => "SOUTH",
            Orientation::East => "EAST",
            Orientation::Up => "UP",
            Orientation::Down => "DOWN",
        }
    }

    pub fn from_name(name: &str) -> Option<Orientation> {
        Orientation::ALL.into_iter().find(|o| o.name() == name)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An axis-aligned box of cells with inclusive corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub min: Position,
    pub max: Position,
}

impl Cube {
    /// Builds a cube without validating the corners; see [`Cube::validate`].
    pub const fn new(min: Position, max: Position) -> Self {
        Cube { min, max }
    }

    /// A cube with its minimum corner at `base` and the given side lengths.
    pub fn with_extent(base: Position, sx: i32, sy: i32, sz: i32) -> Self {
        Cube::new(base, base + Position::new(sx - 1, sy - 1, sz - 1))
    }

    pub fn is_valid(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y && self.min.z <= self.max.z
    }

    pub fn validate(&self) -> Result<(), crate::world::VoxelError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(crate::world::VoxelError::DegenerateCube(*self))
        }
    }

    pub fn extent(&self) -> (u64, u64, u64) {
        (
            (i64::from(self.max.x) - i64::from(self.min.x) + 1) as u64,
            (i64::from(self.max.y) - i64::from(self.min.y) + 1) as u64,
            (i64::from(self.max.z) - i64::from(self.min.z) + 1) as u64,
        )
    }

    /// Number of cells; zero for an invalid cube.
    pub fn volume(&self) -> u64 {
        if !self.is_valid() {
            return 0;
        }
        let (sx, sy, sz) = self.extent();
        sx * sy * sz
    }

    pub fn contains(&self, p: Position) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }

    /// Grows the cube by `dx`/`dz` horizontally and `dy` vertically on every side.
    pub fn expand(&self, dx: i32, dy: i32, dz: i32) -> Cube {
        let d = Position::new(dx, dy, dz);
        Cube::new(self.min - d, self.max + d)
    }

    /// Cells in read order: x outermost, then y, then z innermost.
    pub fn cells(&self) -> impl Iterator<Item = Position> + '_ {
        let c = *self;
        let valid = c.is_valid();
        (c.min.x..=c.max.x)
            .filter(move |_| valid)
            .flat_map(move |x| (c.min.y..=c.max.y).flat_map(move |y| (c.min.z..=c.max.z).map(move |z| Position::new(x, y, z))))
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..={}", self.min, self.max)
    }
}
