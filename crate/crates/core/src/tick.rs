//! Deterministic slime/piston physics.
//!
//! Simulated subset: redstone blocks (constant power), observers (pulse on a
//! change of the watched cell), pistons and sticky pistons, slime adhesion.
//! Every other block is an inert solid with the movability from the schema.
//!
//! Each tick `T` runs three phases:
//!
//! 1. Block changes stamped `T - 1` trigger observers; observer pulse
//!    start/end events due at `T` are applied.
//! 2. Piston power is recomputed; a piston whose power disagrees with its
//!    state schedules an extend or retract at `T + PISTON_LATENCY`.
//! 3. Piston events due at `T` are planned against the pre-tick world and
//!    applied together. Content changes are stamped `T`.
//!
//! When two events in one tick touch the same cell, the piston with the
//! smallest position wins and the others are dropped for that tick. A moved
//! mechanism loses its scheduled events and any running pulse.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{BlockType, Movability};
use crate::geom::{Orientation, Position};
use crate::world::{Cell, World};

/// Ticks per simulated second.
pub const TICKS_PER_SECOND: u32 = 20;
/// Ticks an observer output stays high.
pub const OBSERVER_PULSE_TICKS: u64 = 2;
/// Ticks from a piston noticing a power change to its extend or retract.
pub const PISTON_LATENCY: u64 = 3;
/// Maximum number of blocks a single piston action may move.
pub const PUSH_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    BlockChanged,
    ObserverPulseStart,
    ObserverPulseEnd,
    PistonExtend,
    PistonRetract,
}

impl EventKind {
    fn is_piston(self) -> bool {
        matches!(self, EventKind::PistonExtend | EventKind::PistonRetract)
    }
}

/// A scheduled engine event. The derived ordering is the execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TickEvent {
    pub due: u64,
    pub kind: EventKind,
    pub position: Position,
    pub facing: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockedReason {
    NotAPiston,
    Immovable(Position),
    TooManyBlocks,
}

/// Result of a push or pull closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PushSet {
    /// Blocks to translate by one cell (in discovery order) and blocks destroyed on the way.
    Moves { blocks: Vec<Position>, destroyed: Vec<Position> },
    Blocked(BlockedReason),
}

impl PushSet {
    pub fn is_blocked(&self) -> bool {
        matches!(self, PushSet::Blocked(_))
    }

    pub fn moved(&self) -> &[Position] {
        match self {
            PushSet::Moves { blocks, .. } => blocks,
            PushSet::Blocked(_) => &[],
        }
    }
}

fn is_extended(world: &World, pos: Position, facing: Orientation) -> bool {
    world
        .cell(pos.offset(facing))
        .is_some_and(|c| c.kind == BlockType::PISTON_HEAD && c.orientation == facing)
}

fn effective_movability(world: &World, pos: Position, cell: Cell) -> Movability {
    if cell.kind.is_piston() && is_extended(world, pos, cell.orientation) {
        return Movability::Immovable;
    }
    cell.kind.movability()
}

fn observer_powers(world: &World, observer: Position, target: Position) -> bool {
    world.active_observers.contains(&observer)
        && world
            .cell(observer)
            .is_some_and(|c| c.kind == BlockType::OBSERVER && observer.offset(c.orientation.opposite()) == target)
}

fn powered_from(world: &World, pos: Position, skip: Option<Position>) -> bool {
    pos.neighbors().filter(|n| Some(*n) != skip).any(|n| match world.cell(n) {
        Some(c) if c.kind == BlockType::REDSTONE_BLOCK => true,
        Some(c) if c.kind == BlockType::OBSERVER => observer_powers(world, n, pos),
        _ => false,
    })
}

/// True iff a redstone block is face-adjacent to `pos`, or an observer whose
/// back faces `pos` is mid-pulse.
pub fn power_level(world: &World, pos: Position) -> bool {
    powered_from(world, pos, None)
}

/// Pistons ignore power arriving through their front face.
fn piston_powered(world: &World, pos: Position, facing: Orientation) -> bool {
    powered_from(world, pos, Some(pos.offset(facing)))
}

/// Breadth-first closure of the blocks that move when `start` is driven one
/// cell along `dir`. Cells in `treat_as_air` are ignored; `anchor` (the acting
/// piston) never joins and blocks anything that would move into it.
fn closure(world: &World, start: Position, dir: Orientation, anchor: Position, treat_as_air: &[Position]) -> PushSet {
    let content = |p: Position| -> Option<Cell> {
        if treat_as_air.contains(&p) {
            None
        } else {
            world.cell(p)
        }
    };

    let mut members: Vec<Position> = Vec::new();
    let mut member_set: BTreeSet<Position> = BTreeSet::new();
    let mut destroyed: Vec<Position> = Vec::new();
    let mut queue = VecDeque::new();

    match content(start) {
        None => return PushSet::Moves { blocks: members, destroyed },
        Some(c) => match effective_movability(world, start, c) {
            Movability::Immovable => return PushSet::Blocked(BlockedReason::Immovable(start)),
            Movability::Breaks => {
                destroyed.push(start);
                return PushSet::Moves { blocks: members, destroyed };
            }
            Movability::Movable => {
                members.push(start);
                member_set.insert(start);
                queue.push_back(start);
            }
        },
    }

    while let Some(m) = queue.pop_front() {
        let is_slime = content(m).is_some_and(|c| c.kind == BlockType::SLIME);
        let ahead = m.offset(dir);
        let mut candidates = vec![(ahead, true)];
        if is_slime {
            candidates.extend(Orientation::ALL.into_iter().map(|d| m.offset(d)).filter(|n| *n != ahead).map(|n| (n, false)));
        }
        for (n, in_line) in candidates {
            if member_set.contains(&n) || destroyed.contains(&n) {
                continue;
            }
            if n == anchor {
                if in_line {
                    return PushSet::Blocked(BlockedReason::Immovable(n));
                }
                continue;
            }
            let Some(c) = content(n) else { continue };
            match effective_movability(world, n, c) {
                Movability::Movable => {
                    members.push(n);
                    member_set.insert(n);
                    if members.len() > PUSH_LIMIT {
                        return PushSet::Blocked(BlockedReason::TooManyBlocks);
                    }
                    queue.push_back(n);
                }
                Movability::Breaks => {
                    if in_line {
                        destroyed.push(n);
                    }
                }
                Movability::Immovable => return PushSet::Blocked(BlockedReason::Immovable(n)),
            }
        }
    }
    // A block recruited after being marked for destruction moves instead.
    destroyed.retain(|p| !member_set.contains(p));
    PushSet::Moves { blocks: members, destroyed }
}

/// The blocks an extension of the piston at `piston_pos` would push along `facing`.
pub fn compute_push_set(world: &World, piston_pos: Position, facing: Orientation) -> PushSet {
    if !world.cell(piston_pos).is_some_and(|c| c.kind.is_piston()) {
        return PushSet::Blocked(BlockedReason::NotAPiston);
    }
    closure(world, piston_pos.offset(facing), facing, piston_pos, &[])
}

/// The blocks a retracting sticky piston drags back with its head removed.
pub fn compute_pull_set(world: &World, piston_pos: Position, facing: Orientation) -> PushSet {
    if !world.cell(piston_pos).is_some_and(|c| c.kind == BlockType::STICKY_PISTON) {
        return PushSet::Blocked(BlockedReason::NotAPiston);
    }
    let head = piston_pos.offset(facing);
    let start = head.offset(facing);
    match world.cell(start) {
        Some(c) if effective_movability(world, start, c) == Movability::Movable => {}
        _ => return PushSet::Moves { blocks: Vec::new(), destroyed: Vec::new() },
    }
    closure(world, start, facing.opposite(), piston_pos, &[head])
}

/// One piston action, resolved against the pre-tick world.
struct Plan {
    claims: BTreeSet<Position>,
    removals: Vec<Position>,
    moves: Vec<(Position, Cell)>,
    placements: Vec<(Position, Cell)>,
}

fn plan_extend(world: &World, pos: Position, facing: Orientation) -> Option<Plan> {
    let PushSet::Moves { blocks, destroyed } = compute_push_set(world, pos, facing) else {
        return None;
    };
    assert!(blocks.len() <= PUSH_LIMIT, "push set exceeds the push limit");
    let head = pos.offset(facing);
    let mut claims: BTreeSet<Position> = [pos, head].into_iter().collect();
    let mut moves = Vec::with_capacity(blocks.len());
    for b in &blocks {
        claims.insert(*b);
        claims.insert(b.offset(facing));
        moves.push((b.offset(facing), world.cell(*b).expect("member is stored")));
    }
    claims.extend(destroyed.iter().copied());
    let mut removals = blocks;
    removals.extend(destroyed);
    Some(Plan {
        claims,
        removals,
        moves,
        placements: vec![(head, Cell { kind: BlockType::PISTON_HEAD, orientation: facing })],
    })
}

fn plan_retract(world: &World, pos: Position, facing: Orientation, sticky: bool) -> Plan {
    let head = pos.offset(facing);
    let mut claims: BTreeSet<Position> = [pos, head].into_iter().collect();
    let mut removals = vec![head];
    let mut moves = Vec::new();
    if sticky {
        if let PushSet::Moves { blocks, destroyed } = compute_pull_set(world, pos, facing) {
            assert!(blocks.len() <= PUSH_LIMIT, "pull set exceeds the push limit");
            let dir = facing.opposite();
            for b in &blocks {
                claims.insert(*b);
                claims.insert(b.offset(dir));
                moves.push((b.offset(dir), world.cell(*b).expect("member is stored")));
            }
            claims.extend(destroyed.iter().copied());
            removals.extend(blocks);
            removals.extend(destroyed);
        }
    }
    Plan { claims, removals, moves, placements: Vec::new() }
}

impl World {
    /// Advances the simulation by `n_ticks`. `step(a + b)` is identical to
    /// `step(a)` followed by `step(b)`.
    pub fn step(&mut self, n_ticks: u64) {
        for _ in 0..n_ticks {
            self.tick_once();
        }
    }

    fn schedule(&mut self, ev: TickEvent) {
        if let Some(old) = self.pending.insert(ev.position, ev) {
            self.events.remove(&old);
        }
        self.events.insert(ev);
    }

    fn pop_due(&mut self, t: u64, pistons: bool) -> Option<TickEvent> {
        let first = *self.events.first()?;
        if first.due != t || first.kind.is_piston() != pistons {
            return None;
        }
        self.events.pop_first()
    }

    fn tick_once(&mut self) {
        let t = self.tick() + 1;
        self.set_tick(t);

        // Phase 1: observers.
        while let Some(ev) = self.pop_due(t, false) {
            match ev.kind {
                EventKind::BlockChanged => self.trigger_observers(ev.position, t),
                EventKind::ObserverPulseStart => {
                    if self.pending.get(&ev.position) == Some(&ev) {
                        self.active_observers.insert(ev.position);
                        self.schedule(TickEvent { due: t + OBSERVER_PULSE_TICKS, kind: EventKind::ObserverPulseEnd, ..ev });
                    }
                }
                EventKind::ObserverPulseEnd => {
                    if self.pending.get(&ev.position) == Some(&ev) {
                        self.pending.remove(&ev.position);
                        self.active_observers.remove(&ev.position);
                    }
                }
                EventKind::PistonExtend | EventKind::PistonRetract => unreachable!("piston events are phase 3"),
            }
        }

        // Phase 2: piston power.
        let pistons: Vec<(Position, Orientation)> = self
            .mechanisms
            .iter()
            .filter_map(|p| self.cell(*p).filter(|c| c.kind.is_piston()).map(|c| (*p, c.orientation)))
            .collect();
        for (pos, facing) in pistons {
            if self.pending.contains_key(&pos) {
                continue;
            }
            let powered = piston_powered(self, pos, facing);
            let extended = is_extended(self, pos, facing);
            let kind = match (powered, extended) {
                (true, false) => EventKind::PistonExtend,
                (false, true) => EventKind::PistonRetract,
                _ => continue,
            };
            self.schedule(TickEvent { due: t + PISTON_LATENCY, kind, position: pos, facing });
        }

        // Phase 3: movement.
        let mut due = Vec::new();
        while let Some(ev) = self.pop_due(t, true) {
            if self.pending.get(&ev.position) == Some(&ev) {
                self.pending.remove(&ev.position);
            }
            due.push(ev);
        }
        if due.is_empty() {
            return;
        }
        due.sort_by_key(|e| e.position);

        let mut claimed: BTreeSet<Position> = BTreeSet::new();
        let mut plans = Vec::new();
        for ev in due {
            let Some(cell) = self.cell(ev.position) else { continue };
            if !cell.kind.is_piston() || cell.orientation != ev.facing {
                continue;
            }
            let extended = is_extended(self, ev.position, ev.facing);
            let plan = match ev.kind {
                EventKind::PistonExtend if !extended => plan_extend(self, ev.position, ev.facing),
                EventKind::PistonRetract if extended => {
                    Some(plan_retract(self, ev.position, ev.facing, cell.kind == BlockType::STICKY_PISTON))
                }
                _ => None,
            };
            let Some(plan) = plan else { continue };
            if plan.claims.iter().any(|c| claimed.contains(c)) {
                continue;
            }
            claimed.extend(plan.claims.iter().copied());
            plans.push(plan);
        }
        self.apply_plans(plans);
    }

    fn apply_plans(&mut self, plans: Vec<Plan>) {
        let mut before: BTreeMap<Position, Option<Cell>> = BTreeMap::new();
        for plan in &plans {
            for p in plan.removals.iter().chain(plan.moves.iter().map(|(p, _)| p)).chain(plan.placements.iter().map(|(p, _)| p)) {
                before.entry(*p).or_insert_with(|| self.cell(*p));
            }
        }
        for plan in &plans {
            for p in &plan.removals {
                self.forget_mechanism(*p);
                self.put_raw(*p, None);
            }
        }
        for plan in &plans {
            for (p, cell) in plan.moves.iter().chain(plan.placements.iter()) {
                self.forget_mechanism(*p);
                self.put_raw(*p, Some(*cell));
            }
        }
        for (p, old) in before {
            let now = self.cell(p);
            if let Some(c) = now {
                if matches!(c.kind, BlockType::PISTON | BlockType::STICKY_PISTON | BlockType::OBSERVER) {
                    self.mechanisms.insert(p);
                }
            }
            if now != old {
                self.note_changed(p);
            }
        }
    }

    fn trigger_observers(&mut self, changed: Position, t: u64) {
        for dir in Orientation::ALL {
            let obs = changed.offset(dir.opposite());
            let watches = self.cell(obs).is_some_and(|c| c.kind == BlockType::OBSERVER && c.orientation == dir);
            if !watches || self.active_observers.contains(&obs) || self.pending.contains_key(&obs) {
                continue;
            }
            self.schedule(TickEvent { due: t, kind: EventKind::ObserverPulseStart, position: obs, facing: dir });
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TickRateError {
    #[error("tick rate must be positive, got {0}")]
    NonPositive(f64),
}

/// Wall-clock pacing; never affects simulation results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TickRate {
    PerSecond(f64),
    Unthrottled,
}

impl Default for TickRate {
    fn default() -> Self {
        TickRate::PerSecond(f64::from(TICKS_PER_SECOND))
    }
}

/// A world plus wall-clock pacing.
#[derive(Clone, Debug, Default)]
pub struct Engine {
    pub world: World,
    rate: TickRate,
}

impl Engine {
    pub fn new(world: World) -> Self {
        Engine { world, rate: TickRate::default() }
    }

    pub fn unthrottled(world: World) -> Self {
        Engine { world, rate: TickRate::Unthrottled }
    }

    pub fn tick_rate(&self) -> TickRate {
        self.rate
    }

    pub fn set_tick_rate(&mut self, rate: TickRate) -> Result<(), TickRateError> {
        if let TickRate::PerSecond(r) = rate {
            if r.is_nan() || r <= 0.0 || !r.is_finite() {
                return Err(TickRateError::NonPositive(r));
            }
        }
        self.rate = rate;
        Ok(())
    }

    /// Steps `n_ticks`, sleeping between ticks to hold the configured rate.
    /// Returns the tick counter afterwards.
    pub fn advance(&mut self, n_ticks: u64) -> u64 {
        match self.rate {
            TickRate::Unthrottled => self.world.step(n_ticks),
            TickRate::PerSecond(r) => {
                let period = Duration::from_secs_f64(1.0 / r);
                let start = Instant::now();
                for i in 0..n_ticks {
                    self.world.step(1);
                    let target = period.mul_f64((i + 1) as f64);
                    if let Some(wait) = target.checked_sub(start.elapsed()) {
                        thread::sleep(wait);
                    }
                }
            }
        }
        self.world.tick()
    }
}
