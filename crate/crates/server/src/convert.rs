//! Wire messages to core types and back, and error reasons for status codes.

use evocraft_core::world::RawBlock;
use evocraft_core::{BackendError, Block, Cube, Position, VoxelError};
use tonic::{Code, Status};

use crate::pb::base;

pub fn point(p: Position) -> base::Point {
    base::Point { x: p.x, y: p.y, z: p.z }
}

pub fn position(p: Option<base::Point>, field: &'static str) -> Result<Position, BackendError> {
    let p = p.ok_or_else(|| missing(field))?;
    Ok(Position::new(p.x, p.y, p.z))
}

fn missing(field: &str) -> BackendError {
    BackendError::InvalidArgument(format!("missing field {field}"))
}

pub fn cube_msg(c: Cube) -> base::Cube {
    base::Cube { min: Some(point(c.min)), max: Some(point(c.max)) }
}

pub fn cube(c: Option<base::Cube>) -> Result<Cube, BackendError> {
    let c = c.ok_or_else(|| missing("cube"))?;
    Ok(Cube::new(position(c.min, "cube.min")?, position(c.max, "cube.max")?))
}

pub fn block_msg(b: Block) -> base::Block {
    base::Block { position: Some(point(b.position)), r#type: i32::from(b.kind.id()), orientation: b.orientation.id() }
}

/// Validates every block before returning any, so a bad batch changes nothing.
pub fn blocks(msgs: Vec<base::Block>) -> Result<Vec<Block>, BackendError> {
    msgs.into_iter()
        .map(|m| {
            let raw = RawBlock { position: position(m.position, "block.position")?, type_id: m.r#type, orientation_id: m.orientation };
            Ok(raw.validate()?)
        })
        .collect()
}

/// Machine-readable reason prefix of a status message.
pub fn reason(e: &BackendError) -> String {
    match e {
        BackendError::Voxel(VoxelError::UnknownBlockType(id)) => format!("unknown_block_type: {id}"),
        BackendError::Voxel(VoxelError::UnknownOrientation(id)) => format!("unknown_orientation: {id}"),
        BackendError::Voxel(VoxelError::DegenerateCube(c)) => {
            format!("degenerate_cube: {},{},{},{},{},{}", c.min.x, c.min.y, c.min.z, c.max.x, c.max.y, c.max.z)
        }
        BackendError::TickRate(e) => format!("invalid_tick_rate: {e}"),
        BackendError::InvalidArgument(m) => format!("invalid_argument: {m}"),
        BackendError::Unsupported(op) => format!("unsupported: {op}"),
        BackendError::Transport(m) => format!("transport: {m}"),
    }
}

pub fn status(e: &BackendError) -> Status {
    let code = match e {
        BackendError::Unsupported(_) => Code::Unimplemented,
        BackendError::Transport(_) => Code::Unavailable,
        _ => Code::InvalidArgument,
    };
    Status::new(code, reason(e))
}

fn parse_reason(msg: &str) -> Option<BackendError> {
    let (kind, rest) = msg.split_once(": ")?;
    match kind {
        "unknown_block_type" => rest.parse().ok().map(|id| VoxelError::UnknownBlockType(id).into()),
        "unknown_orientation" => rest.parse().ok().map(|id| VoxelError::UnknownOrientation(id).into()),
        "degenerate_cube" => {
            let v: Vec<i32> = rest.split(',').map(str::parse).collect::<Result<_, _>>().ok()?;
            let [a, b, c, d, e, f] = v[..] else { return None };
            Some(VoxelError::DegenerateCube(Cube::new(Position::new(a, b, c), Position::new(d, e, f))).into())
        }
        "invalid_argument" => Some(BackendError::InvalidArgument(rest.to_string())),
        _ => None,
    }
}

/// Inverse of [`status`] where the reason is recognised. `op` names the call
/// for servers that lack it.
pub fn backend_error(s: Status, op: &'static str) -> BackendError {
    match s.code() {
        Code::Unimplemented => BackendError::Unsupported(op),
        Code::InvalidArgument => parse_reason(s.message()).unwrap_or_else(|| BackendError::InvalidArgument(s.message().to_string())),
        _ => BackendError::Transport(format!("{}: {}", s.code(), s.message())),
    }
}
