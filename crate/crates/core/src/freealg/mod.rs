//! Exact symbolic arithmetic in the free algebra R<x1,...,xn>.
//!
//! Words form the free monoid with the involution `*` reversing letters.
//! Polynomials are sparse maps from words to coefficients; the symbolic
//! layer keeps coefficients as exact rationals and converts to floats
//! only when semidefinite program data is assembled.

mod basis;
mod parse;
mod poly;
mod word;

pub use basis::{
    basis_size, enumerate_basis, enumerate_basis_with_limit, WordBasis, DEFAULT_WORD_LIMIT,
};
pub use parse::{parse_poly, parse_poly_with_options, poly_to_string, ParseOptions};
pub use poly::{
    cyclically_equivalent, evaluate, evaluate_with_tol, Coeff, FloatPoly, NcPoly, NcPolynomial,
};
pub use word::{cyclic_canonical, word_mul, CyclicClass, Word};

use thiserror::Error;

/// Errors from the symbolic layer.
#[derive(Debug, Error)]
pub enum FreeAlgError {
    #[error("word basis for n={nvars}, d={degree} has {size} words, above the limit of {limit}")]
    BasisTooLarge {
        nvars: usize,
        degree: usize,
        size: u128,
        limit: usize,
    },
    #[error("nvars must be at least 1")]
    NoVariables,
    #[error("evaluation point has {got} matrices, polynomial has {expected} variables")]
    ArityMismatch { got: usize, expected: usize },
    #[error("matrix {index} is {rows}x{cols}, expected square matrices of equal size")]
    NotSquare {
        index: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix {index} is not symmetric (max asymmetry {asym:.3e})")]
    NotSymmetric { index: usize, asym: f64 },
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
}
