//! Noncommutative polynomial optimization.
//!
//! This crate computes eigenvalue and trace minimization bounds for
//! polynomials in noncommuting variables. A polynomial that is matrix
//! positive is a sum of Hermitian squares (SOHS), and membership in the
//! SOHS cone reduces to semidefinite feasibility of a Gram matrix. The
//! dual side works with linear functionals represented as nc Hankel
//! (moment) matrices. Constrained problems over nc semialgebraic sets use
//! quadratic-module truncations and localizing matrices.
//!
//! Module map:
//!
//! - [`freealg`]: words, involution, exact polynomial arithmetic, cyclic
//!   equivalence, parsing and printing.
//! - [`gram`]: Gram-matrix constraint systems and SOHS certificate
//!   extraction.
//! - [`moment`]: moment-matrix layouts, localizing templates, and
//!   equality rows on moment variables.
//! - [`sdp`]: standard-form semidefinite programs, a dense primal-dual
//!   interior-point solver, and SDPA sparse-format I/O.
//! - [`hierarchy`]: assembly and solution of the eigenvalue/trace
//!   hierarchies, the psd-rank lower bound, and a sampling upper-bound
//!   oracle.
//! - [`cli`]: problem-file parsing and the command front end used by the
//!   `ncsohs` binary.

pub mod cli;
pub mod freealg;
pub mod gram;
pub mod hierarchy;
pub mod moment;
pub mod sdp;

/// Which linear functionals the moment side ranges over: symmetric ones
/// (eigenvalue optimization) or tracial ones (trace optimization, where
/// functionals also vanish on commutators).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Eigenvalue,
    Trace,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Eigenvalue => write!(f, "eigenvalue"),
            Mode::Trace => write!(f, "trace"),
        }
    }
}
