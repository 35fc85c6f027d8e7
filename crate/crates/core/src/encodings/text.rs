//! Versioned text formats for genomes.
//!
//! MLP genomes are a header of `key value` lines followed by one parameter
//! per line:
//!
//! ```text
//! mlp-genome v1
//! palette OBSIDIAN GLASS SLIME
//! orientation false
//! symmetrize false
//! activation default
//! params 603
//! 0.013
//! ...
//! ```
//!
//! Trees are a single s-expression after the header; children are tagged by
//! slot (`:n`, `:w`, `:u`):
//!
//! ```text
//! tree-genome v1
//! (OBSIDIAN NORTH :n (GLASS UP) :u (SLIME DOWN :w (GLASS NORTH)))
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::mlp::{ActivationSet, MlpConfig, MlpGenome};
use super::tree::{TreeGenome, TreeNode, SLOT_NAMES};
use crate::block::BlockType;
use crate::geom::Orientation;

pub const MLP_HEADER: &str = "mlp-genome v1";
pub const TREE_HEADER: &str = "tree-genome v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("genome text, line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

pub fn mlp_to_text(g: &MlpGenome) -> String {
    let mut s = String::new();
    let c = &g.config;
    let palette: Vec<&str> = c.palette.iter().map(|t| t.name()).collect();
    writeln!(s, "{MLP_HEADER}").unwrap();
    writeln!(s, "palette {}", palette.join(" ")).unwrap();
    writeln!(s, "orientation {}", c.with_orientation).unwrap();
    writeln!(s, "symmetrize {}", c.symmetrize).unwrap();
    writeln!(s, "activation {}", c.activation.name()).unwrap();
    writeln!(s, "params {}", g.theta.len()).unwrap();
    for v in &g.theta {
        // `{:?}` prints the shortest string that round-trips.
        writeln!(s, "{v:?}").unwrap();
    }
    s
}

pub fn mlp_from_text(text: &str) -> Result<MlpGenome, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MLP_HEADER)) => {}
        Some((n, other)) => return Err(err(n, format!("expected header {MLP_HEADER:?}, got {other:?}"))),
        None => return Err(err(0, "empty input")),
    }
    let mut field = |key: &str| -> Result<(usize, String), ParseError> {
        let (n, line) = lines.next().ok_or_else(|| err(0, format!("missing {key}")))?;
        let rest = line.strip_prefix(key).and_then(|r| r.strip_prefix(' ').or(r.is_empty().then_some("")));
        rest.map(|r| (n, r.trim().to_string())).ok_or_else(|| err(n, format!("expected {key}")))
    };
    let (n, palette) = field("palette")?;
    let palette = palette
        .split_whitespace()
        .map(|name| BlockType::from_name(name).ok_or_else(|| err(n, format!("unknown block type {name}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let parse_bool = |(n, v): (usize, String)| v.parse::<bool>().map_err(|_| err(n, format!("bad boolean {v:?}")));
    let with_orientation = parse_bool(field("orientation")?)?;
    let symmetrize = parse_bool(field("symmetrize")?)?;
    let (n, act) = field("activation")?;
    let activation = ActivationSet::from_name(&act).ok_or_else(|| err(n, format!("unknown activation set {act:?}")))?;
    let (n, count) = field("params")?;
    let count: usize = count.parse().map_err(|_| err(n, "bad parameter count"))?;
    let theta = lines
        .map(|(n, l)| l.parse::<f64>().map_err(|_| err(n, format!("bad parameter {l:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if theta.len() != count {
        return Err(err(n, format!("header says {count} parameters, found {}", theta.len())));
    }
    let config = MlpConfig { palette, with_orientation, symmetrize, activation };
    MlpGenome::new(theta, config).map_err(|e| err(n, e.to_string()))
}

fn write_node(node: &TreeNode, out: &mut String) {
    write!(out, "({} {}", node.kind.name(), node.facing.name()).unwrap();
    for (slot, child) in node.children.iter().enumerate() {
        if let Some(c) = child {
            write!(out, " :{} ", SLOT_NAMES[slot]).unwrap();
            write_node(c, out);
        }
    }
    out.push(')');
}

pub fn tree_to_sexpr(tree: &TreeGenome) -> String {
    let mut s = String::new();
    write_node(&tree.root, &mut s);
    s
}

pub fn tree_to_text(tree: &TreeGenome) -> String {
    format!("{TREE_HEADER}\n{}\n", tree_to_sexpr(tree))
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(&s[st..i]);
            }
            if !ch.is_whitespace() {
                out.push(&s[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

fn parse_node(tokens: &[&str], pos: &mut usize) -> Result<TreeNode, String> {
    let mut next = || -> Result<&str, String> {
        let t = tokens.get(*pos).copied().ok_or("unexpected end of tree")?;
        *pos += 1;
        Ok(t)
    };
    if next()? != "(" {
        return Err("expected '('".into());
    }
    let kind = next()?;
    let kind = BlockType::from_name(kind).ok_or_else(|| format!("unknown block type {kind}"))?;
    let facing = next()?;
    let facing = Orientation::from_name(facing).ok_or_else(|| format!("unknown orientation {facing}"))?;
    let mut node = TreeNode::leaf(kind, facing);
    loop {
        let t = tokens.get(*pos).copied().ok_or("unexpected end of tree")?;
        if t == ")" {
            *pos += 1;
            return Ok(node);
        }
        *pos += 1;
        let slot = t
            .strip_prefix(':')
            .and_then(|name| SLOT_NAMES.iter().position(|s| *s == name))
            .ok_or_else(|| format!("expected slot tag, got {t:?}"))?;
        if node.children[slot].is_some() {
            return Err(format!("slot {t} given twice"));
        }
        node.children[slot] = Some(Box::new(parse_node(tokens, pos)?));
    }
}

pub fn tree_from_sexpr(s: &str) -> Result<TreeGenome, String> {
    let tokens = tokenize(s);
    let mut pos = 0;
    let root = parse_node(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err("trailing input after tree".into());
    }
    Ok(TreeGenome::new(root))
}

pub fn tree_from_text(text: &str) -> Result<TreeGenome, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == TREE_HEADER => {}
        Some((n, l)) => return Err(err(n + 1, format!("expected header {TREE_HEADER:?}, got {l:?}"))),
        None => return Err(err(0, "empty input")),
    }
    let body: Vec<&str> = lines.map(|(_, l)| l).collect();
    tree_from_sexpr(&body.join(" ")).map_err(|m| err(2, m))
}
