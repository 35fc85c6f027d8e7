use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::block::BlockType;
use crate::encodings::mlp::ActivationSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Tower,
    Mover,
    BenchCubes,
    BenchMachines,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BackendSpec {
    #[default]
    InProcess,
    Remote {
        address: String,
    },
}

/// Everything that determines a run, apart from the code version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub generations: u64,
    pub population: usize,
    pub palette: Vec<BlockType>,
    /// Mover decode box, in cells.
    pub box_extent: [i32; 3],
    /// Distance between tower bases.
    pub spacing: i32,
    pub backend: BackendSpec,
    /// Ticks per mover evaluation.
    pub eval_ticks: u64,
    pub sigma: f64,
    pub lr: f64,
    /// Standard deviation of the initial parameter vector.
    pub init_std: f64,
    pub mirrored: bool,
    pub with_orientation: bool,
    pub symmetrize: bool,
    pub activation: ActivationSet,
    pub mutation_rate: f64,
    pub parent_fraction: f64,
    /// Largest cube side (bench-cubes) or machine count (bench-machines).
    pub max_n: u64,
    /// Ticks per bench-machines trial.
    pub bench_ticks: u64,
}

/// Tower palette: obsidian, redstone, glass, brown mushroom, nether block, cobblestone, slime.
pub fn tower_palette() -> Vec<BlockType> {
    vec![
        BlockType::OBSIDIAN,
        BlockType::REDSTONE_BLOCK,
        BlockType::GLASS,
        BlockType::BROWN_MUSHROOM,
        BlockType::NETHERRACK,
        BlockType::COBBLESTONE,
        BlockType::SLIME,
    ]
}

/// The blocks a flying machine is made of.
pub fn mover_palette() -> Vec<BlockType> {
    vec![BlockType::SLIME, BlockType::PISTON, BlockType::STICKY_PISTON, BlockType::OBSERVER, BlockType::REDSTONE_BLOCK]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::tower(0)
    }
}

impl ExperimentConfig {
    pub fn tower(seed: u64) -> Self {
        ExperimentConfig {
            task: Task::Tower,
            seed,
            generations: 30,
            population: 20,
            palette: tower_palette(),
            box_extent: [5, 5, 5],
            spacing: 40,
            backend: BackendSpec::InProcess,
            eval_ticks: 200,
            sigma: 0.1,
            lr: 0.01,
            init_std: 1.0,
            mirrored: false,
            with_orientation: false,
            symmetrize: false,
            activation: ActivationSet::Default,
            mutation_rate: 0.05,
            parent_fraction: 0.10,
            max_n: 31,
            bench_ticks: 400,
        }
    }

    pub fn mover(seed: u64) -> Self {
        ExperimentConfig {
            task: Task::Mover,
            generations: 50,
            population: 10,
            palette: mover_palette(),
            with_orientation: true,
            ..ExperimentConfig::tower(seed)
        }
    }

    pub fn bench_cubes() -> Self {
        ExperimentConfig { task: Task::BenchCubes, max_n: 31, ..ExperimentConfig::tower(0) }
    }

    pub fn bench_machines() -> Self {
        ExperimentConfig { task: Task::BenchMachines, max_n: 4096, ..ExperimentConfig::tower(0) }
    }

    pub fn for_task(task: Task, seed: u64) -> Self {
        match task {
            Task::Tower => Self::tower(seed),
            Task::Mover => Self::mover(seed),
            Task::BenchCubes => Self::bench_cubes(),
            Task::BenchMachines => Self::bench_machines(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.palette.is_empty() {
            return Err("palette must not be empty".into());
        }
        if self.box_extent.iter().any(|&e| e < 1) {
            return Err(format!("box extent must be positive, got {:?}", self.box_extent));
        }
        match self.task {
            Task::Tower if self.population < 2 => Err("tower task needs a population of at least 2".into()),
            Task::Tower if self.spacing < 21 => Err("tower spacing must be at least 21 so regions do not overlap".into()),
            Task::Mover if self.population == 0 => Err("mover task needs a positive population".into()),
            Task::Mover if self.eval_ticks == 0 => Err("eval_ticks must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// Parses a possibly partial config; missing fields take the defaults of its task.
    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let serde_json::Value::Object(given) = value else {
            return Err("config must be a JSON object".into());
        };
        let task = match given.get("task") {
            Some(t) => serde_json::from_value(t.clone()).map_err(|e| format!("task: {e}"))?,
            None => Task::Tower,
        };
        let seed = given.get("seed").and_then(|s| s.as_u64()).unwrap_or(0);
        let mut merged = serde_json::to_value(ExperimentConfig::for_task(task, seed)).expect("config serializes");
        let obj = merged.as_object_mut().expect("config is an object");
        for (k, v) in given {
            if !obj.contains_key(&k) {
                return Err(format!("unknown config field {k:?}"));
            }
            obj.insert(k, v);
        }
        serde_json::from_value(merged).map_err(|e| e.to_string())
    }

    pub fn from_json_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
