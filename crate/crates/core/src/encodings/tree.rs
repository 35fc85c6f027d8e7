//! Ternary block trees: every node is a block, every edge a step north, west or up.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::{Block, BlockType};
use crate::geom::{Orientation, Position};

/// Child slots in decode order.
pub const SLOT_DIRECTIONS: [Orientation; 3] = [Orientation::North, Orientation::West, Orientation::Up];
pub const SLOT_NAMES: [&str; 3] = ["n", "w", "u"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub kind: BlockType,
    pub facing: Orientation,
    pub children: [Option<Box<TreeNode>>; 3],
}

impl TreeNode {
    pub fn leaf(kind: BlockType, facing: Orientation) -> Self {
        TreeNode { kind, facing, children: [None, None, None] }
    }

    pub fn with_child(mut self, slot: usize, child: TreeNode) -> Self {
        self.children[slot] = Some(Box::new(child));
        self
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().flatten().map(|c| c.node_count()).sum::<usize>()
    }

    /// Depth of the deepest node; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        self.children.iter().flatten().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    fn preorder<'a>(&'a self, depth: usize, out: &mut Vec<(&'a TreeNode, usize)>) {
        out.push((self, depth));
        for c in self.children.iter().flatten() {
            c.preorder(depth + 1, out);
        }
    }

    /// The `idx`-th node in preorder (north, west, up).
    fn nth_mut(&mut self, idx: &mut usize) -> Option<&mut TreeNode> {
        if *idx == 0 {
            return Some(self);
        }
        *idx -= 1;
        for c in self.children.iter_mut().flatten() {
            if let Some(n) = c.nth_mut(idx) {
                return Some(n);
            }
        }
        None
    }

    /// Slot path from this node to its `idx`-th preorder descendant.
    fn path_to(&self, mut idx: usize) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        let mut node = self;
        'descend: while idx > 0 {
            idx -= 1;
            for slot in 0..3 {
                let Some(c) = node.children[slot].as_deref() else { continue };
                let count = c.node_count();
                if idx < count {
                    path.push(slot);
                    node = c;
                    continue 'descend;
                }
                idx -= count;
            }
            return None;
        }
        Some(path)
    }

    /// The (parent, slot) holding the `idx`-th preorder node, `idx >= 1`.
    fn parent_slot_mut(&mut self, idx: usize) -> Option<(&mut TreeNode, usize)> {
        let path = self.path_to(idx)?;
        let (&last, init) = path.split_last()?;
        let mut node = self;
        for &slot in init {
            node = node.children[slot].as_deref_mut()?;
        }
        Some((node, last))
    }
}

/// Generation parameters shared by random growth and mutation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub palette: Vec<BlockType>,
    /// Child probability at the root.
    pub p0: f64,
    /// Drop in child probability per level.
    pub decay: f64,
}

impl TreeParams {
    pub fn new(palette: Vec<BlockType>) -> Self {
        assert!(!palette.is_empty(), "tree palette must not be empty");
        TreeParams { palette, p0: 0.5, decay: 0.05 }
    }

    /// Probability that a node at `depth` gets a child in any given slot.
    pub fn child_probability(&self, depth: usize) -> f64 {
        (self.p0 - self.decay * depth as f64).max(0.0)
    }

    fn random_label<R: Rng + ?Sized>(&self, rng: &mut R) -> (BlockType, Orientation) {
        let kind = self.palette[rng.random_range(0..self.palette.len())];
        let facing = Orientation::ALL[rng.random_range(0..6)];
        (kind, facing)
    }

    /// Grows a random subtree whose root sits at `depth`.
    pub fn grow<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize) -> TreeNode {
        let (kind, facing) = self.random_label(rng);
        let mut node = TreeNode::leaf(kind, facing);
        let p = self.child_probability(depth);
        for slot in 0..3 {
            if rng.random::<f64>() < p {
                node.children[slot] = Some(Box::new(self.grow(rng, depth + 1)));
            }
        }
        node
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeGenome {
    pub root: TreeNode,
}

/// Where a crossover cut `self` and which subtree of the donor it grafted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossoverTrace {
    /// Preorder index of the replaced node; `None` for a root-only parent.
    pub cut: Option<usize>,
    /// Preorder index of the donated subtree root.
    pub donor: usize,
    pub removed: usize,
    pub added: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// One node got a new (type, facing).
    Relabel,
    /// One subtree was regrown from scratch.
    Regrow,
}

impl TreeGenome {
    pub fn new(root: TreeNode) -> Self {
        TreeGenome { root }
    }

    pub fn random<R: Rng + ?Sized>(params: &TreeParams, rng: &mut R) -> Self {
        TreeGenome { root: params.grow(rng, 0) }
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Nodes with their depth, in preorder.
    pub fn nodes(&self) -> Vec<(&TreeNode, usize)> {
        let mut out = Vec::with_capacity(self.node_count());
        self.root.preorder(0, &mut out);
        out
    }

    fn nth_mut(&mut self, mut idx: usize) -> &mut TreeNode {
        self.root.nth_mut(&mut idx).expect("node index in range")
    }

    /// Root at `base`, children at their slot offsets, depth-first in slot
    /// order. The first node to reach a cell owns it.
    pub fn decode(&self, base: Position) -> Vec<Block> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![(&self.root, base)];
        while let Some((node, pos)) = stack.pop() {
            if seen.insert(pos) {
                out.push(Block::new(pos, node.kind, node.facing));
            }
            for slot in (0..3).rev() {
                if let Some(c) = &node.children[slot] {
                    stack.push((c, pos.offset(SLOT_DIRECTIONS[slot])));
                }
            }
        }
        out
    }

    /// Child of `self` with one non-root subtree replaced by a copy of a
    /// random non-root subtree of `other` (its root if it has no children).
    /// A root-only `self` instead receives the subtree in a random (empty) slot.
    pub fn crossover<R: Rng + ?Sized>(&self, other: &TreeGenome, rng: &mut R) -> TreeGenome {
        self.crossover_traced(other, rng).0
    }

    /// [`crossover`](Self::crossover) that also reports the cut and the graft.
    pub fn crossover_traced<R: Rng + ?Sized>(&self, other: &TreeGenome, rng: &mut R) -> (TreeGenome, CrossoverTrace) {
        let mut child = self.clone();
        let n_a = self.node_count();
        let cut = (n_a > 1).then(|| rng.random_range(1..n_a));
        // Both parents are cut below the root when they can be.
        let n_b = other.node_count();
        let donor_idx = if n_b > 1 { rng.random_range(1..n_b) } else { 0 };
        let donor = other.nodes()[donor_idx].0.clone();
        let added = donor.node_count();
        let removed = match cut {
            Some(idx) => {
                let (parent, slot) = child.root.parent_slot_mut(idx).expect("non-root node has a parent");
                let old = parent.children[slot].replace(Box::new(donor));
                old.map_or(0, |o| o.node_count())
            }
            None => {
                let slot = rng.random_range(0..3);
                child.root.children[slot] = Some(Box::new(donor));
                0
            }
        };
        (child, CrossoverTrace { cut, donor: donor_idx, removed, added })
    }

    /// Applies one mutation with probability `rate` and reports which.
    pub fn mutate<R: Rng + ?Sized>(&self, params: &TreeParams, rate: f64, rng: &mut R) -> (TreeGenome, Option<MutationKind>) {
        let mut child = self.clone();
        if rng.random::<f64>() >= rate {
            return (child, None);
        }
        let kind = if rng.random::<bool>() { MutationKind::Relabel } else { MutationKind::Regrow };
        child.mutate_with(params, kind, rng);
        (child, Some(kind))
    }

    /// Applies `kind` unconditionally at a uniformly random node.
    pub fn mutate_with<R: Rng + ?Sized>(&mut self, params: &TreeParams, kind: MutationKind, rng: &mut R) {
        let n = self.node_count();
        let idx = rng.random_range(0..n);
        match kind {
            MutationKind::Relabel => {
                let node = self.nth_mut(idx);
                let old = (node.kind, node.facing);
                // Resample until the label changes; six facings guarantee one exists.
                loop {
                    let label = params.random_label(rng);
                    if label != old {
                        node.kind = label.0;
                        node.facing = label.1;
                        break;
                    }
                }
            }
            MutationKind::Regrow => {
                let depth = self.nodes()[idx].1;
                *self.nth_mut(idx) = params.grow(rng, depth);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S: BlockType = BlockType::STONE;

    fn leaf() -> TreeNode {
        TreeNode::leaf(S, Orientation::North)
    }

    #[test]
    fn single_node_decodes_to_base() {
        let t = TreeGenome::new(leaf());
        assert_eq!(t.decode(Position::new(3, 4, 5)), vec![Block::new(Position::new(3, 4, 5), S, Orientation::North)]);
    }

    #[test]
    fn up_chain_is_a_column() {
        let t = TreeGenome::new(leaf().with_child(2, leaf().with_child(2, leaf())));
        let ps: Vec<_> = t.decode(Position::ORIGIN).iter().map(|b| b.position).collect();
        assert_eq!(ps, vec![Position::new(0, 0, 0), Position::new(0, 1, 0), Position::new(0, 2, 0)]);
    }

    #[test]
    fn north_branch_wins_collisions() {
        let nw = TreeNode::leaf(BlockType::GLASS, Orientation::North).with_child(1, TreeNode::leaf(BlockType::GLASS, Orientation::Up));
        let wn = TreeNode::leaf(BlockType::SLIME, Orientation::North).with_child(0, TreeNode::leaf(BlockType::SLIME, Orientation::Down));
        let t = TreeGenome::new(leaf().with_child(0, nw).with_child(1, wn));
        let blocks = t.decode(Position::ORIGIN);
        assert_eq!(blocks.len(), 4);
        let corner = blocks.iter().find(|b| b.position == Position::new(-1, 0, -1)).unwrap();
        assert_eq!((corner.kind, corner.orientation), (BlockType::GLASS, Orientation::Up));
    }

    #[test]
    fn same_seed_same_tree() {
        let params = TreeParams::new(vec![S, BlockType::GLASS]);
        let a = TreeGenome::random(&params, &mut ChaCha8Rng::seed_from_u64(9));
        let b = TreeGenome::random(&params, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn root_only_crossover_grafts_into_a_slot() {
        let params = TreeParams::new(vec![S, BlockType::GLASS]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = TreeGenome::new(leaf());
        let b = TreeGenome::random(&params, &mut rng);
        for _ in 0..20 {
            let c = a.crossover(&b, &mut rng);
            assert_eq!(c.root.kind, S);
            assert_eq!(c.root.children.iter().flatten().count(), 1);
            assert!(c.node_count() >= 2);
        }
    }

    #[test]
    fn parent_slot_lookup_matches_preorder() {
        let params = TreeParams::new(vec![S, BlockType::GLASS, BlockType::SLIME]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = (0..50).map(|_| TreeGenome::random(&params, &mut rng)).max_by_key(|t| t.node_count()).unwrap();
        let order: Vec<TreeNode> = t.nodes().iter().map(|(n, _)| (*n).clone()).collect();
        for (i, node) in order.iter().enumerate().skip(1) {
            let mut copy = t.clone();
            let (parent, slot) = copy.root.parent_slot_mut(i).unwrap();
            assert_eq!(parent.children[slot].as_deref(), Some(node));
        }
    }
}
