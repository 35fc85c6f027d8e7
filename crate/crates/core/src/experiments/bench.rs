//! Throughput benchmarks: cube fill latency and flying-machine tick rate.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::blueprint::blueprint_flying_machine;
use super::ExperimentError;
use crate::backend::{BackendError, WorldBackend};
use crate::block::{Block, BlockType};
use crate::geom::{Cube, Position};
use crate::tick::TICKS_PER_SECOND;
use crate::world::World;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRow {
    pub n: u64,
    pub volume: u64,
    pub fill_ms: f64,
    pub clear_ms: f64,
    /// One fill, one clear and one tick per simulated tick; `None` without tick control.
    pub ticks_per_sec: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeReport {
    pub rows: Vec<CubeRow>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Milliseconds for one call of `op`.
pub fn measure_ms<T>(op: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = op();
    (out, ms_since(t))
}

/// Alternates an `n`-cube of obsidian and of air for `n = 1..=max_n`,
/// stopping early once the achieved tick rate drops below 20/s.
pub fn bench_cubes(backend: &mut dyn WorldBackend, max_n: u64) -> Result<CubeReport, ExperimentError> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let side = i32::try_from(n).map_err(|_| ExperimentError::Config("cube side too large".into()))?;
        let cube = Cube::with_extent(Position::ORIGIN, side, side, side);
        let start = Instant::now();
        let (r, fill_ms) = measure_ms(|| backend.fill_cube(cube, BlockType::OBSIDIAN));
        r?;
        let (r, clear_ms) = measure_ms(|| backend.fill_cube(cube, BlockType::AIR));
        r?;
        let ticks_per_sec = match backend.step(1) {
            Ok(_) => Some(1.0 / start.elapsed().as_secs_f64()),
            Err(BackendError::Unsupported(_)) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(CubeRow { n, volume: cube.volume(), fill_ms, clear_ms, ticks_per_sec });
        if ticks_per_sec.is_some_and(|r| r < f64::from(TICKS_PER_SECOND)) {
            break;
        }
    }
    Ok(CubeReport { rows })
}

/// Spacing between machine copies; machines only move along z.
pub const MACHINE_SPACING: i32 = 8;

/// Origins for `count` machines on a square grid in the x-y plane.
pub fn machine_origins(count: usize) -> Vec<Position> {
    let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
    (0..count).map(|i| Position::new((i % cols) as i32 * MACHINE_SPACING, (i / cols) as i32 * MACHINE_SPACING, 0)).collect()
}

pub fn machines_world(count: usize) -> World {
    let bp = blueprint_flying_machine();
    let mut w = World::new();
    let blocks: Vec<Block> = machine_origins(count).into_iter().flat_map(|o| bp.placed_at(o)).collect();
    w.spawn_blocks(&blocks);
    w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineRow {
    pub machines: usize,
    pub ticks: u64,
    pub seconds: f64,
    pub ticks_per_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineReport {
    pub rows: Vec<MachineRow>,
    /// Largest machine count that held 20 ticks/s.
    pub max_sustained: usize,
}

/// Runs `count` machines for `ticks` ticks, unthrottled.
pub fn machine_trial(count: usize, ticks: u64) -> MachineRow {
    let mut w = machines_world(count);
    let t = Instant::now();
    w.step(ticks);
    let seconds = t.elapsed().as_secs_f64();
    MachineRow { machines: count, ticks, seconds, ticks_per_sec: ticks as f64 / seconds }
}

/// Doubles the machine count until the tick rate drops below 20/s (or
/// `max_count` is reached), then bisects between the last passing and the
/// first failing count down to 5% resolution.
pub fn bench_machines(max_count: usize, ticks: u64) -> MachineReport {
    let target = f64::from(TICKS_PER_SECOND);
    let mut rows = Vec::new();
    let mut pass = 0;
    let mut fail = None;
    let mut n = 1;
    loop {
        let row = machine_trial(n, ticks);
        let ok = row.ticks_per_sec >= target;
        rows.push(row);
        if !ok {
            fail = Some(n);
            break;
        }
        pass = n;
        if n >= max_count {
            break;
        }
        n = (n * 2).min(max_count);
    }
    if let Some(mut hi) = fail {
        while hi - pass > (pass / 20).max(1) {
            let mid = pass + (hi - pass) / 2;
            let row = machine_trial(mid, ticks);
            if row.ticks_per_sec >= target {
                pass = mid;
            } else {
                hi = mid;
            }
            rows.push(row);
        }
    }
    MachineReport { rows, max_sustained: pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaced_machines_move_identically() {
        let n = 9;
        let mut w = machines_world(n);
        w.step(120);
        let bp = blueprint_flying_machine();
        let shapes: Vec<Vec<Block>> = machine_origins(n)
            .into_iter()
            .map(|o| {
                let region = Cube::new(o + Position::new(-3, -3, -40), o + Position::new(3, 4, 6));
                w.blocks_in(region).into_iter().map(|b| b.translated(-o)).collect()
            })
            .collect();
        assert!(shapes.iter().all(|s| s == &shapes[0]));
        assert_eq!(shapes[0].iter().filter(|b| !b.kind.is_piston_part()).count(), bp.blocks.len());
    }

    #[test]
    fn one_machine_is_fast() {
        assert!(machine_trial(1, 400).ticks_per_sec >= 20.0);
    }
}
