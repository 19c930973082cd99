//! Gram-matrix machinery for sums-of-Hermitian-squares membership.
//!
//! A symmetric polynomial `f` of degree at most `2d` is an SOHS exactly
//! when `f = W_d* G W_d` for some psd matrix `G` over the word basis
//! `W_d`. Comparing coefficients gives one linear constraint per word
//! (grouped with its reverse), which this module materializes as sparse
//! constraint matrices. The trace-side analogue groups words by cyclic
//! equivalence class instead.

use std::collections::BTreeMap;

use faer::{Mat, Side};
use num_rational::BigRational;
use thiserror::Error;

use crate::freealg::{
    cyclic_canonical, enumerate_basis, Coeff, FloatPoly, NcPoly, NcPolynomial, Word, WordBasis,
};
use crate::Mode;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("polynomial degree {deg} exceeds 2d = {max}")]
    DegreeOverflow { deg: usize, max: usize },
    #[error("Gram matrix is {rows}x{cols}, basis has {expected} words")]
    SizeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix is indefinite beyond tolerance (min eigenvalue {lambda_min:.3e}, tol {tol:.3e})")]
    Indefinite { lambda_min: f64, tol: f64 },
    #[error(transparent)]
    FreeAlg(#[from] crate::freealg::FreeAlgError),
}

/// One linear constraint `<A, G> = rhs` of a Gram system. Entries hold
/// the upper triangle (`u <= v`); the matrix is symmetric.
#[derive(Debug, Clone)]
pub struct GramConstraint {
    /// Canonical key: `min(w, w*)` in eigenvalue mode, the cyclic
    /// canonical representative in trace mode.
    pub key: Word,
    /// Upper-triangular entries `(u, v, value)` with `u <= v`.
    pub entries: Vec<(usize, usize, i64)>,
    pub rhs: BigRational,
}

impl GramConstraint {
    /// `<A, G>` against a dense symmetric matrix given as an entry lookup.
    pub fn inner_product<C: Coeff>(&self, g: impl Fn(usize, usize) -> C) -> C {
        let mut acc = C::zero();
        for &(u, v, a) in &self.entries {
            let weight = C::from_int(if u == v { a } else { 2 * a });
            acc = acc + weight * g(u, v);
        }
        acc
    }
}

/// The linear system whose psd solutions are exactly the Gram matrices
/// witnessing SOHS membership (eigenvalue mode) or membership in the
/// cyclic-equivalence SOHS cone (trace mode).
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub basis: WordBasis,
    pub mode: Mode,
    pub constraints: Vec<GramConstraint>,
    /// True when the eigenvalue-mode builder replaced `f` by `(f+f*)/2`.
    pub symmetrized: bool,
    /// The (symmetrized) target polynomial the system encodes.
    pub target: NcPolynomial,
}

/// Builds the Gram constraint system for `f` at relaxation degree `d`.
///
/// In eigenvalue mode the target is symmetrized first and each
/// constraint matrix follows the three-case rule: entry 2 where
/// `u*v = w` with `w = w*`, entry 1 where `u*v` is `w` or `w*` with
/// `w != w*`, and 0 otherwise, with right-hand side `f_w + f_{w*}`.
/// In trace mode constraints are indexed by cyclic classes, entries
/// count membership of `u*v` in the class, and the right-hand side is
/// the class sum of coefficients.
pub fn build_gram_system(
    f: &NcPolynomial,
    d: usize,
    mode: Mode,
) -> Result<GramSystem, GramError> {
    if let Some(deg) = f.degree() {
        if deg > 2 * d {
            return Err(GramError::DegreeOverflow { deg, max: 2 * d });
        }
    }
    let (target, symmetrized) = match mode {
        Mode::Eigenvalue => {
            let sym = f.symmetrize();
            let changed = &sym != f;
            (sym, changed)
        }
        Mode::Trace => (f.clone(), false),
    };
    let basis = enumerate_basis(f.nvars(), d)?;
    let key_of = |w: &Word| -> Word {
        match mode {
            Mode::Eigenvalue => {
                let ws = w.star();
                if ws < *w {
                    ws
                } else {
                    w.clone()
                }
            }
            Mode::Trace => cyclic_canonical(w),
        }
    };

    let mut groups: BTreeMap<Word, Vec<(usize, usize, i64)>> = BTreeMap::new();
    for v in 0..basis.len() {
        for u in 0..=v {
            let prod = basis.word(u).star().concat(basis.word(v));
            let value = match mode {
                Mode::Eigenvalue => {
                    if prod == prod.star() {
                        2
                    } else {
                        1
                    }
                }
                Mode::Trace => 1,
            };
            groups.entry(key_of(&prod)).or_default().push((u, v, value));
        }
    }

    // right-hand side per key: f_w + f_{w*} in eigenvalue mode, the class
    // sum in trace mode
    let mut rhs_of: BTreeMap<Word, BigRational> = BTreeMap::new();
    for (w, c) in target.terms() {
        let contribution = match mode {
            Mode::Eigenvalue => {
                if *w == w.star() {
                    c.clone() + c.clone()
                } else {
                    c.clone()
                }
            }
            Mode::Trace => c.clone(),
        };
        let cur = rhs_of
            .entry(key_of(w))
            .or_insert_with(<BigRational as Coeff>::zero);
        *cur = cur.clone() + contribution;
    }

    let constraints = groups
        .into_iter()
        .map(|(key, entries)| {
            let rhs = rhs_of
                .remove(&key)
                .unwrap_or_else(<BigRational as Coeff>::zero);
            GramConstraint { key, entries, rhs }
        })
        .collect();

    Ok(GramSystem {
        basis,
        mode,
        constraints,
        symmetrized,
        target,
    })
}

/// Expands `W_d* G W_d` for a matrix given by an entry lookup.
pub fn gram_to_poly_with<C: Coeff>(
    basis: &WordBasis,
    entry: impl Fn(usize, usize) -> C,
) -> NcPoly<C> {
    let mut out = NcPoly::zero(basis.nvars());
    for u in 0..basis.len() {
        for v in 0..basis.len() {
            let c = entry(u, v);
            if !c.is_zero() {
                out.add_term(basis.word(u).star().concat(basis.word(v)), c);
            }
        }
    }
    out
}

/// Expands a dense float Gram matrix over `basis`.
pub fn gram_to_poly(g: &Mat<f64>, basis: &WordBasis) -> Result<FloatPoly, GramError> {
    if g.nrows() != basis.len() || g.ncols() != basis.len() {
        return Err(GramError::SizeMismatch {
            rows: g.nrows(),
            cols: g.ncols(),
            expected: basis.len(),
        });
    }
    Ok(gram_to_poly_with(basis, |u, v| g[(u, v)]))
}

/// Expands an exact rational Gram matrix over `basis`.
pub fn gram_to_poly_exact(
    g: &[Vec<BigRational>],
    basis: &WordBasis,
) -> Result<NcPolynomial, GramError> {
    if g.len() != basis.len() || g.iter().any(|row| row.len() != basis.len()) {
        return Err(GramError::SizeMismatch {
            rows: g.len(),
            cols: g.first().map_or(0, |r| r.len()),
            expected: basis.len(),
        });
    }
    Ok(gram_to_poly_with(basis, |u, v| g[u][v].clone()))
}

/// An SOHS certificate: `f ~ sum_i g_i* g_i` plus, for constrained
/// problems, weight polynomials per constraint so that
/// `f - lambda = sum_i g_i* g_i + sum_j sum_i p_{ji}* h_j p_{ji}`.
#[derive(Debug, Clone)]
pub struct SohsCertificate {
    /// The square summands `g_i`.
    pub summands: Vec<FloatPoly>,
    /// Per-constraint weights `(constraint index, [p_i])`, empty for
    /// unconstrained certificates.
    pub weights: Vec<(usize, Vec<FloatPoly>)>,
    /// Target minus the certificate expansion.
    pub residual: FloatPoly,
}

impl SohsCertificate {
    /// `sum_i g_i* g_i` (the unconstrained part only).
    pub fn expand_squares(&self) -> FloatPoly {
        let nvars = self
            .summands
            .first()
            .map(|p| p.nvars())
            .unwrap_or_else(|| self.residual.nvars());
        let mut acc = FloatPoly::zero(nvars);
        for g in &self.summands {
            acc = &acc + &(&g.star() * g);
        }
        acc
    }

    /// Full expansion including constraint weights, given the constraint
    /// polynomials `gs` (indexed as in `weights`).
    pub fn expand_with(&self, gs: &[NcPolynomial]) -> FloatPoly {
        let mut acc = self.expand_squares();
        for (j, ps) in &self.weights {
            let gj = gs[*j].to_float();
            for p in ps {
                acc = &acc + &(&(&p.star() * &gj) * p);
            }
        }
        acc
    }

    pub fn residual_linf(&self) -> f64 {
        self.residual.max_abs_coeff()
    }
}

/// Extracts square summands from a psd Gram matrix by eigendecomposition,
/// clipping eigenvalues below `tol`. Fails if the matrix is indefinite
/// beyond `tol`. The reported residual is against `gram_to_poly(g)`.
pub fn extract_sohs(
    g: &Mat<f64>,
    basis: &WordBasis,
    tol: f64,
) -> Result<SohsCertificate, GramError> {
    if g.nrows() != basis.len() || g.ncols() != basis.len() {
        return Err(GramError::SizeMismatch {
            rows: g.nrows(),
            cols: g.ncols(),
            expected: basis.len(),
        });
    }
    let n = basis.len();
    let target = gram_to_poly(g, basis)?;
    if n == 0 {
        return Ok(SohsCertificate {
            summands: Vec::new(),
            weights: Vec::new(),
            residual: target,
        });
    }
    let eig = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| GramError::Indefinite {
            lambda_min: f64::NAN,
            tol,
        })?;
    let lambda_min = (0..n).map(|i| eig.S()[i]).fold(f64::INFINITY, f64::min);
    if lambda_min < -tol {
        return Err(GramError::Indefinite { lambda_min, tol });
    }
    // largest eigenvalue first for a deterministic, well-ordered listing
    let mut summands = Vec::new();
    for k in (0..n).rev() {
        let lambda = eig.S()[k];
        if lambda <= tol {
            continue;
        }
        let scale = lambda.sqrt();
        let mut p = FloatPoly::zero(basis.nvars());
        for u in 0..n {
            p.add_term(basis.word(u).clone(), scale * eig.U()[(u, k)]);
        }
        summands.push(p);
    }
    let mut cert = SohsCertificate {
        summands,
        weights: Vec::new(),
        residual: FloatPoly::zero(basis.nvars()),
    };
    cert.residual = &target - &cert.expand_squares();
    Ok(cert)
}
