//! Block-diagonal semidefinite programs in standard primal form
//!
//! ```text
//! minimize    <C, X>
//! subject to  <A_i, X> = b_i,   i = 1..m
//!             X = diag(X_1, ..., X_k),  X_j PSD or non-negative diagonal
//! ```
//!
//! with dual `maximize b'y s.t. C - sum_i y_i A_i = Z ⪰ 0`.

mod sdpa;
mod solver;

use serde::{Deserialize, Serialize};

pub use sdpa::write_sdpa;
pub use solver::{solve_sdp, SdpSolution, SolveStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Dense symmetric positive semidefinite block.
    Psd,
    /// Non-negative diagonal block (linear cone).
    Diag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    pub size: usize,
    pub kind: BlockKind,
    pub label: String,
}

/// One entry of a symmetric block matrix; `row <= col`, and the entry
/// stands for both `(row, col)` and `(col, row)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl SymEntry {
    pub fn new(block: usize, row: usize, col: usize, value: f64) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        SymEntry { block, row, col, value }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SdpInstance {
    pub blocks: Vec<Block>,
    pub objective: Vec<SymEntry>,
    pub constraints: Vec<Vec<SymEntry>>,
    pub rhs: Vec<f64>,
}

impl SdpInstance {
    pub fn add_block(&mut self, size: usize, kind: BlockKind, label: impl Into<String>) -> usize {
        self.blocks.push(Block { size, kind, label: label.into() });
        self.blocks.len() - 1
    }

    /// Adds `<A, X> = b` with `A` given as symmetric entries; duplicate
    /// positions are summed.
    pub fn add_constraint(&mut self, entries: Vec<SymEntry>, b: f64) -> usize {
        self.constraints.push(merge_entries(entries));
        self.rhs.push(b);
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// Checks block indices, triangular ordering and diagonal-block shape.
    pub fn validate(&self) -> Result<(), String> {
        let check = |e: &SymEntry, what: &str| -> Result<(), String> {
            let blk = self
                .blocks
                .get(e.block)
                .ok_or_else(|| format!("{what}: block {} out of range", e.block))?;
            if e.row > e.col || e.col >= blk.size {
                return Err(format!("{what}: entry ({}, {}) outside block {}", e.row, e.col, e.block));
            }
            if blk.kind == BlockKind::Diag && e.row != e.col {
                return Err(format!("{what}: off-diagonal entry in diagonal block {}", e.block));
            }
            if !e.value.is_finite() {
                return Err(format!("{what}: non-finite value"));
            }
            Ok(())
        };
        for e in &self.objective {
            check(e, "objective")?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for e in c {
                check(e, &format!("constraint {i}"))?;
            }
        }
        if self.rhs.len() != self.constraints.len() {
            return Err("rhs length differs from constraint count".into());
        }
        Ok(())
    }
}

pub(crate) fn merge_entries(mut entries: Vec<SymEntry>) -> Vec<SymEntry> {
    entries.sort_by_key(|e| (e.block, e.row, e.col));
    let mut out: Vec<SymEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        match out.last_mut() {
            Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => last.value += e.value,
            _ => out.push(e),
        }
    }
    out.retain(|e| e.value != 0.0);
    out
}
