//! Tower growth: trees race to reach a gold block 10 north, 10 west and 10 up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::runlog::{GenerationRecord, RunLog};
use super::ExperimentError;
use crate::backend::WorldBackend;
use crate::block::{Block, BlockType};
use crate::encodings::text::tree_to_text;
use crate::encodings::tree::{TreeGenome, TreeParams};
use crate::evolution::ga::{ga_step, GaConfig, GaPopulation};
use crate::geom::{Cube, Position};

/// Gold block position relative to the tower base.
pub const TARGET_OFFSET: Position = Position::new(-10, 10, -10);

/// Cells a tower may occupy: 20 blocks north, west and up of its base.
pub fn tower_region(base: Position) -> Cube {
    Cube::new(base + Position::new(-20, 0, -20), base + Position::new(0, 20, 0))
}

pub fn tower_target(base: Position) -> Position {
    base + TARGET_OFFSET
}

/// Base of tower `i` on a square grid with `spacing` between bases.
pub fn tower_base(i: usize, population: usize, spacing: i32) -> Position {
    let cols = (population as f64).sqrt().ceil().max(1.0) as usize;
    Position::new((i % cols) as i32 * spacing, 0, (i / cols) as i32 * spacing)
}

fn distance(a: Position, b: Position) -> f64 {
    let d = a - b;
    f64::from(d.x * d.x + d.y * d.y + d.z * d.z).sqrt()
}

/// Distance from `target` to the closest non-gold block; `None` if there is none.
pub fn closest_distance(blocks: &[Block], target: Position) -> Option<f64> {
    blocks
        .iter()
        .filter(|b| !b.kind.is_air() && b.kind != BlockType::GOLD_BLOCK)
        .map(|b| distance(b.position, target))
        .min_by(f64::total_cmp)
}

/// Fitness of the tower in `region`: distance of its closest block to
/// `target`. An empty region scores the distance from the region's base
/// corner (the worst case for a tower grown from that base).
pub fn tower_fitness(backend: &mut dyn WorldBackend, region: Cube, target: Position) -> Result<f64, ExperimentError> {
    let blocks = backend.read_cube(region)?;
    let base = Position::new(region.max.x, region.min.y, region.max.z);
    Ok(closest_distance(&blocks, target).unwrap_or_else(|| distance(base, target)))
}

/// Evaluates every genome with all towers standing in one world at once.
pub fn evaluate_towers(backend: &mut dyn WorldBackend, genomes: &[TreeGenome], spacing: i32) -> Result<Vec<f64>, ExperimentError> {
    let n = genomes.len();
    for (i, g) in genomes.iter().enumerate() {
        let base = tower_base(i, n, spacing);
        let region = tower_region(base);
        backend.fill_cube(region, BlockType::AIR)?;
        let blocks: Vec<Block> = g.decode(base).into_iter().filter(|b| region.contains(b.position)).collect();
        backend.spawn_blocks(&blocks)?;
        backend.spawn_blocks(&[Block::at(tower_target(base), BlockType::GOLD_BLOCK)])?;
    }
    (0..n)
        .map(|i| {
            let base = tower_base(i, n, spacing);
            tower_fitness(backend, tower_region(base), tower_target(base))
        })
        .collect()
}

/// Runs the tower GA for `config.generations` generations.
pub fn run_tower(config: &ExperimentConfig, backend: &mut dyn WorldBackend) -> Result<RunLog, ExperimentError> {
    config.validate().map_err(ExperimentError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = TreeParams::new(config.palette.clone());
    let ga = GaConfig { elite: 1, parent_fraction: config.parent_fraction, mutation_rate: config.mutation_rate };
    let mut pop = GaPopulation::random(config.population, &params, &mut rng);
    let mut log = RunLog::new(config.clone());
    for generation in 0..config.generations {
        pop.fitnesses = evaluate_towers(backend, &pop.genomes, config.spacing)?;
        let (best_idx, best) = pop.best()?;
        log.records.push(GenerationRecord {
            generation,
            fitnesses: pop.fitnesses.clone(),
            best,
            best_genome: tree_to_text(&pop.genomes[best_idx]),
            elapsed_ticks: 0,
            seed: config.seed,
        });
        if generation + 1 < config.generations {
            pop = ga_step(&pop, &params, &ga, &mut rng)?;
        }
    }
    Ok(log)
}
