//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero on any FAIL.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::net::{IpAddr, Ipv4Addr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use evocraft_core::block::BLOCK_TYPE_COUNT;
use evocraft_core::encodings::mlp::{DecodeBox, MlpConfig, MlpGenome};
use evocraft_core::encodings::{TreeGenome, TreeParams};
use evocraft_core::evolution::{ga_step, EsConfig, EsState, GaConfig, GaPopulation};
use evocraft_core::experiments::bench::bench_machines;
use evocraft_core::experiments::blueprint::blueprint_flying_machine;
use evocraft_core::experiments::config::{tower_palette, ExperimentConfig};
use evocraft_core::experiments::mover::{run_mover, tracking_region};
use evocraft_core::experiments::tower::run_tower;
use evocraft_core::tick::{compute_push_set, PushSet, PUSH_LIMIT};
use evocraft_core::{Block, BlockType, Cube, IecConfig, IecSession, LocalBackend, Orientation, Position, World, WorldBackend};
use evocraft_server::service::BackgroundServer;
use evocraft_server::{RemoteBackend, ServeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Suite<'a> = Box<dyn FnMut(&mut ChaCha8Rng) -> bool + 'a>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p(x: i32, y: i32, z: i32) -> Position {
    Position::new(x, y, z)
}

fn calibration() -> Outcome {
    let t = Instant::now();
    let bp = blueprint_flying_machine();
    let region = tracking_region(bp.bounds(Position::ORIGIN));
    let mut runs = Vec::new();
    for _ in 0..3 {
        let mut b = LocalBackend::new();
        b.spawn_blocks(&bp.placed_at(Position::ORIGIN)).unwrap();
        let before = b.center_of_mass(region).unwrap().unwrap();
        b.step(200).unwrap();
        let after = b.center_of_mass(region).unwrap().unwrap();
        let blocks: Vec<Block> = b.world().blocks().collect();
        runs.push((before, after, blocks));
    }
    let secs = t.elapsed().as_secs_f64();
    let (before, after, _) = &runs[0];
    let dz = after.z - before.z;
    let same_xy = after.x.to_bits() == before.x.to_bits() && after.y.to_bits() == before.y.to_bits();
    let bits = |r: &(evocraft_core::CenterOfMass, evocraft_core::CenterOfMass, Vec<Block>)| {
        ([r.0.x, r.0.y, r.0.z, r.1.x, r.1.y, r.1.z].map(f64::to_bits), r.2.clone())
    };
    let identical = runs.iter().all(|r| bits(r) == bits(&runs[0]));
    check(
        (-19.0..=-15.0).contains(&dz) && same_xy && identical && secs < 1.0,
        format!("dz={dz:.3} x/y unchanged={same_xy} identical over 3 runs={identical} in {secs:.3}s"),
    )
}

fn tower() -> Outcome {
    let t = Instant::now();
    let mut finals = Vec::new();
    let mut early = 0;
    for seed in 0..5 {
        let log = run_tower(&ExperimentConfig::tower(seed), &mut LocalBackend::new()).unwrap();
        let best = log.best_per_generation();
        if best.iter().take(16).any(|&d| d <= 1.0) {
            early += 1;
        }
        finals.push(*best.last().unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    let mut sorted = finals.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[2];
    check(
        median <= 1.0 && early >= 3 && secs < 60.0,
        format!("final distances {finals:?}, median {median:.3}, {early}/5 at target by generation 15, {secs:.1}s"),
    )
}

fn mover() -> Outcome {
    let t = Instant::now();
    let bests: Vec<f64> = (0..3)
        .map(|seed| {
            let log = run_mover(&ExperimentConfig::mover(seed), &mut LocalBackend::new()).unwrap();
            assert_eq!(log.records.len(), 50);
            log.best_per_generation().into_iter().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let top = bests.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(
        top >= 0.1 && bests.iter().all(|&b| b < 17.0) && secs < 600.0,
        format!("best fitness per seed {bests:.3?}, {secs:.1}s"),
    )
}

fn performance() -> Outcome {
    let cube = Cube::with_extent(Position::ORIGIN, 31, 31, 31);
    let worst_fill_ms = (0..3)
        .map(|_| {
            let mut w = World::new();
            let t = Instant::now();
            w.fill_cube(cube, BlockType::OBSIDIAN).unwrap();
            t.elapsed().as_secs_f64() * 1e3
        })
        .fold(0.0, f64::max);
    let report = bench_machines(4096, 100);
    let rate = report.rows.iter().find(|r| r.machines == report.max_sustained).map_or(0.0, |r| r.ticks_per_sec);
    check(
        worst_fill_ms <= 50.0 && report.max_sustained >= 1200,
        format!(
            "fill 31^3 {worst_fill_ms:.2} ms, {} machines sustained at >= 20 ticks/s ({rate:.1} ticks/s)",
            report.max_sustained
        ),
    )
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (norm(a) * norm(b))
}

fn es_oracle() -> Outcome {
    // Every ask is scored at theta = 0, where the gradient of -|theta - c|^2 is 2c.
    let d = 20;
    let c: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    let f = |t: &Vec<f64>| -t.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut es = EsState::new(vec![0.0; d], EsConfig { population: 10, sigma: 0.1, lr: 0.01, mirrored: false }).unwrap();
    let asks = 1000;
    let mut total = 0.0;
    for _ in 0..asks {
        let fit: Vec<f64> = es.ask(&mut rng).unwrap().iter().map(f).collect();
        total += cosine(&es.step_for(&fit).unwrap(), &c);
        es.cancel_ask().unwrap();
    }
    let mean = total / asks as f64;

    // The measured step is the one tell applies.
    let fit: Vec<f64> = es.ask(&mut rng).unwrap().iter().map(f).collect();
    let step = es.step_for(&fit).unwrap();
    es.tell(&fit).unwrap();
    let applied = es.theta == step;

    let theta = vec![0.3; d];
    let mut flat = EsState::new(theta.clone(), EsConfig::default()).unwrap();
    flat.ask(&mut rng).unwrap();
    let zero = flat.step_for(&[2.0; 10]).unwrap().iter().all(|&s| s == 0.0);
    flat.tell(&[2.0; 10]).unwrap();
    let unchanged = zero && flat.theta == theta;
    check(
        mean > 0.5 && applied && unchanged,
        format!("mean cosine {mean:.3} over {asks} asks, tell applies the measured step={applied}, constant fitness leaves theta unchanged={unchanged}"),
    )
}

fn random_block(rng: &mut ChaCha8Rng, span: i32, kinds: Option<&[BlockType]>) -> Block {
    let pos = p(rng.random_range(-span..=span), rng.random_range(-span..=span), rng.random_range(-span..=span));
    let kind = match kinds {
        Some(k) => k[rng.random_range(0..k.len())],
        None => BlockType::from_id(rng.random_range(0..BLOCK_TYPE_COUNT as i32)).unwrap(),
    };
    Block::new(pos, kind, Orientation::ALL[rng.random_range(0..6)])
}

const MECHANISMS: [BlockType; 7] = [
    BlockType::PISTON,
    BlockType::STICKY_PISTON,
    BlockType::OBSERVER,
    BlockType::REDSTONE_BLOCK,
    BlockType::SLIME,
    BlockType::GLASS,
    BlockType::OBSIDIAN,
];

fn random_cube(rng: &mut ChaCha8Rng) -> Cube {
    Cube::with_extent(
        p(rng.random_range(-6..6), rng.random_range(-6..6), rng.random_range(-6..6)),
        rng.random_range(1..5),
        rng.random_range(1..5),
        rng.random_range(1..5),
    )
}

fn random_mlp(rng: &mut ChaCha8Rng, symmetrize: bool) -> MlpGenome {
    let cfg = MlpConfig { with_orientation: true, symmetrize, ..MlpConfig::new(tower_palette()) };
    let theta = (0..cfg.param_count()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    MlpGenome::new(theta, cfg).unwrap()
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = TreeParams::new(tower_palette());
    let everywhere = Cube::new(p(-45, -45, -45), p(45, 45, 45));
    let mut suites: Vec<(&str, Suite)> = Vec::new();

    suites.push((
        "voxel round trip",
        Box::new(|rng| {
            let blocks: Vec<Block> = (0..1000).map(|_| random_block(rng, 40, None)).collect();
            let mut w = World::new();
            w.spawn_blocks(&blocks);
            let mut last = BTreeMap::new();
            for b in &blocks {
                last.insert(b.position, *b);
            }
            last.values().all(|b| {
                let got = w.block_at(b.position);
                if b.kind.is_air() { got.kind.is_air() } else { got == *b }
            }) && w.read_cube(everywhere).unwrap().iter().filter(|b| !b.kind.is_air()).count() == w.len()
        }),
    ));
    suites.push((
        "fill equals spawn",
        Box::new(|rng| {
            (0..50).all(|_| {
                let mut a = World::new();
                a.spawn_blocks(&(0..60).map(|_| random_block(rng, 8, None)).collect::<Vec<_>>());
                let mut b = a.clone();
                let cube = random_cube(rng);
                let kind = BlockType::from_id(rng.random_range(0..BLOCK_TYPE_COUNT as i32)).unwrap();
                a.fill_cube(cube, kind).unwrap();
                b.spawn_blocks(&cube.cells().map(|q| Block::at(q, kind)).collect::<Vec<_>>());
                let all = Cube::new(p(-12, -12, -12), p(12, 12, 12));
                a.read_cube(all).unwrap() == b.read_cube(all).unwrap()
            })
        }),
    ));
    suites.push((
        "read order",
        Box::new(|_| {
            let got: Vec<Position> = World::new().read_cube(Cube::new(p(0, 0, 0), p(1, 2, 1))).unwrap().iter().map(|b| b.position).collect();
            let mut want = Vec::new();
            for x in 0..=1 {
                for y in 0..=2 {
                    for z in 0..=1 {
                        want.push(p(x, y, z));
                    }
                }
            }
            got == want
        }),
    ));
    suites.push((
        "center of mass oracle",
        Box::new(|rng| {
            (0..50).all(|_| {
                let mut w = World::new();
                w.spawn_blocks(&(0..80).map(|_| random_block(rng, 7, None)).collect::<Vec<_>>());
                let region = random_cube(rng);
                let massive: Vec<Position> = region
                    .cells()
                    .filter(|q| {
                        let k = w.kind_at(*q);
                        !k.is_air() && k != BlockType::PISTON_HEAD && k != BlockType::PISTON_EXTENSION
                    })
                    .collect();
                match w.center_of_mass(region).unwrap() {
                    None => massive.is_empty(),
                    Some(c) => {
                        let n = massive.len() as f64;
                        let mean = |f: fn(&Position) -> i32| massive.iter().map(|q| f64::from(f(q))).sum::<f64>() / n;
                        (c.x - mean(|q| q.x)).abs() < 1e-9 && (c.y - mean(|q| q.y)).abs() < 1e-9 && (c.z - mean(|q| q.z)).abs() < 1e-9
                    }
                }
            })
        }),
    ));
    suites.push((
        "push limit",
        Box::new(|rng| {
            (0..30).all(|_| {
                let mut w = World::new();
                w.spawn_blocks(&(0..120).map(|_| random_block(rng, 3, Some(&MECHANISMS))).collect::<Vec<_>>());
                let within = w.blocks().filter(|b| b.kind.is_piston()).all(|b| match compute_push_set(&w, b.position, b.orientation) {
                    PushSet::Moves { blocks, .. } => blocks.len() <= PUSH_LIMIT,
                    _ => true,
                });
                within
            })
        }),
    ));
    suites.push((
        "step batching",
        Box::new(|rng| {
            (0..10).all(|_| {
                let mut a = World::new();
                a.spawn_blocks(&(0..60).map(|_| random_block(rng, 3, Some(&MECHANISMS))).collect::<Vec<_>>());
                a.spawn_blocks(&blueprint_flying_machine().placed_at(p(20, 0, 0)));
                let mut b = a.clone();
                a.step(200);
                for _ in 0..200 {
                    b.step(1);
                }
                a.blocks().collect::<Vec<_>>() == b.blocks().collect::<Vec<_>>()
            })
        }),
    ));
    let tp = params.clone();
    suites.push((
        "crossover node count",
        Box::new(move |rng| {
            (0..200).all(|_| {
                let a = TreeGenome::random(&tp, rng);
                let b = TreeGenome::random(&tp, rng);
                let (child, trace) = a.crossover_traced(&b, rng);
                let removed = trace.cut.map_or(0, |i| a.nodes()[i].0.node_count());
                let added = b.nodes()[trace.donor].0.node_count();
                child.node_count() == a.node_count() - removed + added
            })
        }),
    ));
    let tp = params.clone();
    suites.push((
        "mutation rate",
        Box::new(move |rng| {
            let t = TreeGenome::random(&tp, rng);
            let hits = (0..10_000).filter(|_| t.mutate(&tp, 0.05, rng).1.is_some()).count();
            (hits as f64 / 1e4 - 0.05).abs() <= 0.007
        }),
    ));
    suites.push((
        "decode determinism and symmetry",
        Box::new(|rng| {
            (0..20).all(|_| {
                let g = random_mlp(rng, false);
                let bx = DecodeBox::new(p(3, 0, -2), [5, 4, 6]);
                let deterministic = g.decode_box(bx) == g.clone().decode_box(bx);
                let s = random_mlp(rng, true);
                let e = [rng.random_range(1..8), rng.random_range(1..8), rng.random_range(1..8)];
                let set: BTreeSet<(i32, i32, i32, BlockType)> =
                    s.decode_box(DecodeBox::new(Position::ORIGIN, e)).iter().map(|b| (b.position.x, b.position.y, b.position.z, b.kind)).collect();
                let symmetric = (0..8).all(|mask| {
                    let m: BTreeSet<_> = set
                        .iter()
                        .map(|&(x, y, z, k)| {
                            let f = |bit: i32, v: i32, n: i32| if mask & bit != 0 { n - 1 - v } else { v };
                            (f(1, x, e[0]), f(2, y, e[1]), f(4, z, e[2]), k)
                        })
                        .collect();
                    m == set
                });
                deterministic && symmetric
            })
        }),
    ));
    let tp = params.clone();
    suites.push((
        "GA elite monotonicity",
        Box::new(move |rng| {
            let fitness = |t: &TreeGenome| (t.node_count() as f64 - 25.0).abs();
            let mut pop = GaPopulation::random(12, &tp, rng);
            let mut last = f64::INFINITY;
            for _ in 0..20 {
                pop.fitnesses = pop.genomes.iter().map(fitness).collect();
                let best = pop.best().unwrap().1;
                if best > last {
                    return false;
                }
                last = best;
                pop = ga_step(&pop, &tp, &GaConfig::default(), rng).unwrap();
            }
            true
        }),
    ));
    suites.push((
        "IEC replay",
        Box::new(|rng| {
            let cfg = IecConfig { seed: rng.random(), box_extent: [5, 5, 5], ..IecConfig::default() };
            let mut s = IecSession::new(cfg.clone()).unwrap();
            let mut rerolls = 0;
            while s.generation() < 8 && rerolls < 50 {
                match s.candidates().iter().position(|c| c.displayable) {
                    Some(i) if s.generation() != 3 || rerolls > 0 => {
                        s.submit_choice(i, Some(s.generation())).unwrap();
                    }
                    _ => {
                        rerolls += 1;
                        s.reroll(None).unwrap();
                    }
                }
            }
            let r = IecSession::replay(cfg, s.history()).unwrap();
            r.payload() == s.payload() && r.theta() == s.theta()
        }),
    ));

    let mut failed = Vec::new();
    for (name, suite) in &mut suites {
        if !catch_unwind(AssertUnwindSafe(|| suite(&mut rng))).unwrap_or(false) {
            failed.push(*name);
        }
    }
    let names: Vec<&str> = suites.iter().map(|s| s.0).collect();
    check(failed.is_empty(), if failed.is_empty() { format!("{} suites: {}", names.len(), names.join(", ")) } else { format!("failed: {}", failed.join(", ")) })
}

fn wire_compatibility() -> Outcome {
    common::base_service_matches_the_public_interface();
    common::block_enum_matches_the_schema_file();
    common::generated_enums_agree_with_core_types();
    common::extensions_live_in_their_own_service();

    let config = ServeConfig { host: IpAddr::V4(Ipv4Addr::LOCALHOST), port: 0, unthrottled: true, ..ServeConfig::default() };
    let server = BackgroundServer::start(&config).map_err(|e| e.to_string())?;
    let mut remote = RemoteBackend::connect(&server.endpoint()).map_err(|e| e.to_string())?;
    let mut local = LocalBackend::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut reads = 0;
    for round in 0..200 {
        match round % 3 {
            0 => {
                let blocks: Vec<Block> = (0..rng.random_range(0..40)).map(|_| random_block(&mut rng, 8, None)).collect();
                remote.spawn_blocks(&blocks).unwrap();
                local.spawn_blocks(&blocks).unwrap();
            }
            1 => {
                let cube = random_cube(&mut rng);
                let kind = BlockType::from_id(rng.random_range(0..BLOCK_TYPE_COUNT as i32)).unwrap();
                remote.fill_cube(cube, kind).unwrap();
                local.fill_cube(cube, kind).unwrap();
            }
            _ => {
                let cube = Cube::with_extent(p(rng.random_range(-9..3), rng.random_range(-9..3), rng.random_range(-9..3)), 7, 7, 7);
                if remote.read_cube(cube).unwrap() != local.read_cube(cube).unwrap() {
                    return Err(format!("read of {cube:?} differs after {round} calls"));
                }
                reads += 1;
            }
        }
    }
    let all = Cube::new(p(-12, -12, -12), p(12, 12, 12));
    let same = remote.read_cube(all).unwrap() == local.read_cube(all).unwrap();
    check(same, format!("schema diff clean, {reads} loopback reads plus a final full read match in-process"))
}

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("flying-machine calibration", calibration),
        ("tower reproduction", tower),
        ("mover negative result", mover),
        ("performance", performance),
        ("ES gradient oracle", es_oracle),
        ("property suites", property_suites),
        ("wire compatibility", wire_compatibility),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
