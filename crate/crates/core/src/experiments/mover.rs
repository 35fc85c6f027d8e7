//! Moving machines: an ES over MLP genomes, scored by centre-of-mass displacement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::runlog::{GenerationRecord, RunLog};
use super::ExperimentError;
use crate::backend::WorldBackend;
use crate::block::Block;
use crate::encodings::mlp::{DecodeBox, MlpConfig, MlpGenome};
use crate::encodings::text::mlp_to_text;
use crate::evolution::es::{EsConfig, EsState};
use crate::geom::{Cube, Position};
use crate::world::{CenterOfMass, World};

/// Tracking margins around the spawn box: horizontal, vertical.
pub const TRACK_MARGIN_XZ: i32 = 20;
pub const TRACK_MARGIN_Y: i32 = 10;

/// Region whose centre of mass is tracked for a structure spawned in `spawn_box`.
pub fn tracking_region(spawn_box: Cube) -> Cube {
    spawn_box.expand(TRACK_MARGIN_XZ, TRACK_MARGIN_Y, TRACK_MARGIN_XZ)
}

/// Euclidean CoM displacement; zero unless both centres exist.
pub fn mover_fitness(before: Option<CenterOfMass>, after: Option<CenterOfMass>) -> f64 {
    match (before, after) {
        (Some(a), Some(b)) => a.distance(&b),
        _ => 0.0,
    }
}

/// Spawns `blocks` in a fresh world, runs `ticks` and returns the displacement.
pub fn evaluate_in_world(blocks: &[Block], spawn_box: Cube, ticks: u64) -> f64 {
    if blocks.is_empty() {
        return 0.0;
    }
    let region = tracking_region(spawn_box);
    let mut w = World::new();
    w.spawn_blocks(blocks);
    let before = w.center_of_mass(region).expect("tracking region is valid");
    w.step(ticks);
    let after = w.center_of_mass(region).expect("tracking region is valid");
    mover_fitness(before, after)
}

/// Same as [`evaluate_in_world`] through a backend with tick control.
pub fn evaluate_on_backend(backend: &mut dyn WorldBackend, blocks: &[Block], spawn_box: Cube, ticks: u64) -> Result<f64, ExperimentError> {
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let region = tracking_region(spawn_box);
    backend.reset()?;
    backend.spawn_blocks(blocks)?;
    let before = backend.center_of_mass(region)?;
    backend.step(ticks)?;
    let after = backend.center_of_mass(region)?;
    Ok(mover_fitness(before, after))
}

pub fn mover_mlp_config(config: &ExperimentConfig) -> MlpConfig {
    MlpConfig {
        palette: config.palette.clone(),
        with_orientation: config.with_orientation,
        symmetrize: config.symmetrize,
        activation: config.activation,
    }
}

/// Runs the ES for `config.generations` generations. An in-process backend
/// evaluates candidates in parallel on private worlds.
pub fn run_mover(config: &ExperimentConfig, backend: &mut dyn WorldBackend) -> Result<RunLog, ExperimentError> {
    config.validate().map_err(ExperimentError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mlp = mover_mlp_config(config);
    let normal = Normal::new(0.0, config.init_std).map_err(|e| ExperimentError::Config(format!("init_std: {e}")))?;
    let theta: Vec<f64> = (0..mlp.param_count()).map(|_| normal.sample(&mut rng)).collect();
    let es_config = EsConfig { population: config.population, sigma: config.sigma, lr: config.lr, mirrored: config.mirrored };
    let mut es = EsState::new(theta, es_config)?;
    let bx = DecodeBox::new(Position::ORIGIN, config.box_extent);
    let spawn_box = bx.cube();
    let mut log = RunLog::new(config.clone());
    let mut elapsed = 0;
    for generation in 0..config.generations {
        let candidates = es.ask(&mut rng)?;
        let genomes: Vec<MlpGenome> = candidates.into_iter().map(|t| MlpGenome { theta: t, config: mlp.clone() }).collect();
        let structures: Vec<Vec<Block>> = genomes.par_iter().map(|g| g.decode_box(bx)).collect();
        let fitnesses: Vec<f64> = if backend.is_in_process() {
            structures.par_iter().map(|s| evaluate_in_world(s, spawn_box, config.eval_ticks)).collect()
        } else {
            structures.iter().map(|s| evaluate_on_backend(backend, s, spawn_box, config.eval_ticks)).collect::<Result<_, _>>()?
        };
        elapsed += config.eval_ticks * genomes.len() as u64;
        let best_idx = (0..fitnesses.len()).fold(0, |b, i| if fitnesses[i] > fitnesses[b] { i } else { b });
        log.records.push(GenerationRecord {
            generation,
            fitnesses: fitnesses.clone(),
            best: fitnesses[best_idx],
            best_genome: mlp_to_text(&genomes[best_idx]),
            elapsed_ticks: elapsed,
            seed: config.seed,
        });
        es.tell(&fitnesses)?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockType;
    use crate::geom::Orientation;

    fn p(x: i32, y: i32, z: i32) -> Position {
        Position::new(x, y, z)
    }

    #[test]
    fn static_structure_scores_zero() {
        let blocks = [Block::at(p(0, 0, 0), BlockType::OBSIDIAN), Block::at(p(1, 0, 0), BlockType::SLIME)];
        assert_eq!(evaluate_in_world(&blocks, Cube::new(p(0, 0, 0), p(1, 0, 0)), 200), 0.0);
        assert_eq!(evaluate_in_world(&[], Cube::new(p(0, 0, 0), p(1, 0, 0)), 200), 0.0);
    }

    #[test]
    fn one_of_five_blocks_pushed_once_is_a_fifth() {
        // Piston, its power source, and three inert blocks; the piston pushes one of them.
        let blocks = [
            Block::new(p(0, 0, 0), BlockType::PISTON, Orientation::East),
            Block::at(p(0, 0, 1), BlockType::REDSTONE_BLOCK),
            Block::at(p(1, 0, 0), BlockType::GLASS),
            Block::at(p(0, 1, 1), BlockType::OBSIDIAN),
            Block::at(p(0, 2, 1), BlockType::OBSIDIAN),
        ];
        let f = evaluate_in_world(&blocks, Cube::new(p(0, 0, 0), p(1, 2, 1)), 200);
        assert!((f - 0.2).abs() < 1e-12, "{f}");
    }

    #[test]
    fn reference_machine_covers_calibrated_distance() {
        let bp = super::super::blueprint::blueprint_flying_machine();
        let blocks = bp.placed_at(Position::ORIGIN);
        let f = evaluate_in_world(&blocks, bp.bounds(Position::ORIGIN), 200);
        assert!((15.0..=19.0).contains(&f), "{f}");
    }
}
