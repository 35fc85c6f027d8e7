//! Genotype to structure decoders.

pub mod mlp;
pub mod text;
pub mod tree;

pub use mlp::{ActivationSet, DecodeBox, MlpConfig, MlpGenome};
pub use tree::{MutationKind, TreeGenome, TreeNode, TreeParams};
