//! Standard-form semidefinite programming.
//!
//! Problems are stored in the standard primal form
//!
//! ```text
//!   maximize   <C, X>
//!   subject to <A_j, X> = b_j,  j = 1..k,
//!              X psd (blockwise)
//! ```
//!
//! whose dual is `minimize b^T y` subject to `sum_j y_j A_j - C` psd.
//! For feasible pairs the primal objective is at most the dual
//! objective. The solver is a dense primal-dual path-following method;
//! problems round-trip through the SDPA sparse format.

mod sdpa;
mod solver;

pub use sdpa::{export_sdpa, import_sdpa};
pub use solver::solve;

use faer::Mat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("problem has {na} constraint matrices but {nb} right-hand sides")]
    ConstraintCountMismatch { na: usize, nb: usize },
    #[error("matrix {mat} touches block {blk} at ({i}, {j}), outside its {size}x{size} shape")]
    EntryOutOfRange {
        mat: String,
        blk: usize,
        i: usize,
        j: usize,
        size: usize,
    },
    #[error("matrix {mat} has {got} block lists, problem has {expected} blocks")]
    BlockCountMismatch {
        mat: String,
        got: usize,
        expected: usize,
    },
    #[error("diagonal block {blk} has an off-diagonal entry at ({i}, {j})")]
    OffDiagonalInDiagBlock { blk: usize, i: usize, j: usize },
    #[error("SDPA export requires at least one constraint")]
    EmptyProblem,
    #[error("SDPA parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A block of the block-diagonal matrix variable. `Diag(n)` is the SDPA
/// negative-size convention for a diagonal (linear) block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Psd(usize),
    Diag(usize),
}

impl Block {
    pub fn size(&self) -> usize {
        match self {
            Block::Psd(n) | Block::Diag(n) => *n,
        }
    }
}

/// A sparse symmetric block matrix: per block, upper-triangular entries
/// `(i, j, value)` with `i <= j`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMat {
    pub blocks: Vec<Vec<(u32, u32, f64)>>,
}

impl SparseSymMat {
    pub fn zero(nblocks: usize) -> Self {
        SparseSymMat {
            blocks: vec![Vec::new(); nblocks],
        }
    }

    /// Builds from arbitrary entries, flipping lower-triangle indices,
    /// sorting, and summing duplicates. Zero entries are dropped.
    pub fn from_entries(
        nblocks: usize,
        entries: impl IntoIterator<Item = (usize, u32, u32, f64)>,
    ) -> Self {
        let mut blocks: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); nblocks];
        for (blk, i, j, v) in entries {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            blocks[blk].push((i, j, v));
        }
        for list in &mut blocks {
            list.sort_by_key(|&(i, j, _)| (i, j));
            let mut out: Vec<(u32, u32, f64)> = Vec::with_capacity(list.len());
            for &(i, j, v) in list.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == i && last.1 == j => last.2 += v,
                    _ => out.push((i, j, v)),
                }
            }
            out.retain(|&(_, _, v)| v != 0.0);
            *list = out;
        }
        SparseSymMat { blocks }
    }

    /// `<self, X>` against dense symmetric blocks; off-diagonal entries
    /// count twice.
    pub fn inner(&self, x: &[Mat<f64>]) -> f64 {
        let mut acc = 0.0;
        for (blk, entries) in self.blocks.iter().enumerate() {
            let xb = &x[blk];
            for &(i, j, v) in entries {
                let (i, j) = (i as usize, j as usize);
                if i == j {
                    acc += v * xb[(i, i)];
                } else {
                    acc += 2.0 * v * xb[(i, j)];
                }
            }
        }
        acc
    }

    /// Dense symmetric realization: `out += s * self`.
    pub fn add_scaled_to(&self, out: &mut [Mat<f64>], s: f64) {
        for (blk, entries) in self.blocks.iter().enumerate() {
            let ob = &mut out[blk];
            for &(i, j, v) in entries {
                let (i, j) = (i as usize, j as usize);
                ob[(i, j)] += s * v;
                if i != j {
                    ob[(j, i)] += s * v;
                }
            }
        }
    }

    pub fn frob_norm(&self) -> f64 {
        let mut acc = 0.0;
        for entries in &self.blocks {
            for &(i, j, v) in entries {
                acc += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|&(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|b| b.is_empty())
    }
}

/// Standard-form SDP data.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub c: SparseSymMat,
    pub a: Vec<SparseSymMat>,
    pub b: Vec<f64>,
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<Block>,
        c: SparseSymMat,
        a: Vec<SparseSymMat>,
        b: Vec<f64>,
    ) -> Result<Self, SdpError> {
        if a.len() != b.len() {
            return Err(SdpError::ConstraintCountMismatch {
                na: a.len(),
                nb: b.len(),
            });
        }
        let p = SdpProblem { blocks, c, a, b };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), SdpError> {
        let check = |mat: &SparseSymMat, name: String| -> Result<(), SdpError> {
            if mat.blocks.len() != self.blocks.len() {
                return Err(SdpError::BlockCountMismatch {
                    mat: name,
                    got: mat.blocks.len(),
                    expected: self.blocks.len(),
                });
            }
            for (blk, entries) in mat.blocks.iter().enumerate() {
                let size = self.blocks[blk].size();
                for &(i, j, _) in entries {
                    if i as usize >= size || j as usize >= size {
                        return Err(SdpError::EntryOutOfRange {
                            mat: name.clone(),
                            blk,
                            i: i as usize,
                            j: j as usize,
                            size,
                        });
                    }
                    if matches!(self.blocks[blk], Block::Diag(_)) && i != j {
                        return Err(SdpError::OffDiagonalInDiagBlock {
                            blk,
                            i: i as usize,
                            j: j as usize,
                        });
                    }
                }
            }
            Ok(())
        };
        check(&self.c, "C".to_string())?;
        for (j, aj) in self.a.iter().enumerate() {
            check(aj, format!("A_{}", j + 1))?;
        }
        Ok(())
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// Total side length over blocks.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }
}

/// Solver status classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// The primal constraint set is empty (the dual objective diverges
    /// below or an improving dual ray was found).
    PrimalInfeasible,
    /// The dual constraint set is empty; the primal objective is
    /// unbounded above.
    DualInfeasible,
    NumericalTrouble,
    IterationLimit,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::PrimalInfeasible => "primal_infeasible",
            SdpStatus::DualInfeasible => "dual_infeasible",
            SdpStatus::NumericalTrouble => "numerical_trouble",
            SdpStatus::IterationLimit => "iteration_limit",
        };
        write!(f, "{s}")
    }
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Infinity-norm bound on `A(X) - b` at optimality.
    pub feas_tol: f64,
    /// Relative primal-dual gap bound at optimality.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction of the maximal step to the boundary.
    pub step_frac: f64,
    /// Objective magnitude treated as divergence.
    pub divergence_threshold: f64,
    /// Residual tolerance for improving-ray (Farkas) certificates.
    pub ray_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            step_frac: 0.98,
            divergence_threshold: 1e10,
            ray_tol: 1e-8,
        }
    }
}

/// Per-iteration progress, kept for diagnostics and weak-duality checks.
#[derive(Debug, Clone, Copy)]
pub struct IterStat {
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_feas: f64,
    pub dual_feas: f64,
    pub mu: f64,
}

/// Solution of a standard-form SDP.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal blocks `X`.
    pub x: Vec<Mat<f64>>,
    /// Dual vector `y`.
    pub y: Vec<f64>,
    /// Dual slack blocks `Z = sum y_j A_j - C`.
    pub z: Vec<Mat<f64>>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal - dual|`.
    pub gap: f64,
    pub iterations: usize,
    /// `max |A(X) - b|` at the final iterate.
    pub primal_feas: f64,
    /// `max |sum y A - C - Z|` at the final iterate.
    pub dual_feas: f64,
    pub trace: Vec<IterStat>,
}
