//! The optimization programs: unconstrained and constrained eigenvalue
//! and trace minimization, and the psd-rank lower bound.
//!
//! All programs share one pipeline: build the moment layout, compile
//! inequality constraints to localizing templates and equalities to
//! linear rows on moment variables, eliminate the rows exactly, and
//! solve the resulting standard-form SDP. The solver's dual vector holds
//! the moment values; its primal matrix is the Gram certificate of the
//! sums-of-Hermitian-squares side.

mod assemble;
mod sample;

pub use assemble::{AffineRow, MomentProgram, PresolveError};
pub use sample::{sample_upper_bound, SampleReport};

use faer::Mat;
use num_rational::BigRational;
use thiserror::Error;

use crate::freealg::{Coeff, NcPolynomial, Word};
use crate::gram::{extract_sohs, GramError, SohsCertificate};
use crate::moment::{build_layout, build_localizing, equality_rows, half_degree, MomentError};
use crate::sdp::{solve, SdpOptions, SdpStatus};
use crate::Mode;

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("objective degree {deg} exceeds 2d = {max}; raise the relaxation order")]
    OrderTooSmall { deg: usize, max: usize },
    #[error("inequality constraint must be symmetric: {poly}")]
    NonSymmetricConstraint { poly: String },
    #[error("all polynomials must share the problem's variable count {nvars}, found {got}")]
    VariableCountMismatch { nvars: usize, got: usize },
    #[error("psd-rank input must be entrywise nonnegative (entry ({i}, {j}) = {value})")]
    NegativeMatrixEntry { i: usize, j: usize, value: f64 },
    #[error("psd-rank input must be a nonempty rectangular matrix")]
    BadMatrixShape,
    #[error("psd-rank requires order d >= 1")]
    OrderZero,
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error(transparent)]
    FreeAlg(#[from] crate::freealg::FreeAlgError),
}

/// A noncommutative polynomial optimization problem over the
/// semialgebraic set `{g >= 0 for g in inequalities, h = 0 for h in
/// equalities}`.
#[derive(Debug, Clone)]
pub struct NcProblem {
    objective: NcPolynomial,
    inequalities: Vec<NcPolynomial>,
    equalities: Vec<NcPolynomial>,
    kind: Mode,
    order: usize,
}

impl NcProblem {
    /// Validates degrees and symmetry; the objective is symmetrized on
    /// ingest.
    pub fn new(
        objective: NcPolynomial,
        inequalities: Vec<NcPolynomial>,
        equalities: Vec<NcPolynomial>,
        kind: Mode,
        order: usize,
    ) -> Result<Self, HierarchyError> {
        let nvars = objective.nvars();
        for p in inequalities.iter().chain(&equalities) {
            if p.nvars() != nvars {
                return Err(HierarchyError::VariableCountMismatch {
                    nvars,
                    got: p.nvars(),
                });
            }
        }
        for g in &inequalities {
            if !g.is_symmetric() {
                return Err(HierarchyError::NonSymmetricConstraint {
                    poly: crate::freealg::poly_to_string(g),
                });
            }
        }
        let objective = objective.symmetrize();
        let needed = min_order(&objective, &inequalities, &equalities);
        if order < needed {
            return Err(HierarchyError::OrderTooSmall {
                deg: objective.degree().unwrap_or(0),
                max: 2 * order,
            });
        }
        Ok(NcProblem {
            objective,
            inequalities,
            equalities,
            kind,
            order,
        })
    }

    pub fn objective(&self) -> &NcPolynomial {
        &self.objective
    }

    pub fn inequalities(&self) -> &[NcPolynomial] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[NcPolynomial] {
        &self.equalities
    }

    pub fn kind(&self) -> Mode {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.objective.nvars()
    }
}

/// Smallest well-posed relaxation order:
/// `max(ceil(deg f / 2), max_g d_g, max_h d_h)`.
pub fn min_order(
    objective: &NcPolynomial,
    inequalities: &[NcPolynomial],
    equalities: &[NcPolynomial],
) -> usize {
    let mut d = objective.degree().unwrap_or(0).div_ceil(2);
    for p in inequalities.iter().chain(equalities) {
        d = d.max(half_degree(p));
    }
    d
}

/// Options for the hierarchy solves.
#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    pub sdp: SdpOptions,
    /// Eigenvalue clipping tolerance for certificate extraction.
    pub clip_tol: f64,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            sdp: SdpOptions::default(),
            clip_tol: 1e-8,
        }
    }
}

/// Primal/dual answers of one relaxation solve.
#[derive(Debug)]
pub struct BoundReport {
    pub kind: Mode,
    pub order: usize,
    pub status: SdpStatus,
    /// Bound certified by the sums-of-squares side (the solver's primal);
    /// `-inf` when the program is unbounded below.
    pub primal_bound: f64,
    /// Value of the moment side (the solver's dual).
    pub dual_bound: f64,
    /// `|primal - dual|` when both are finite.
    pub gap: f64,
    /// SOHS certificate, available when the problem has no equality
    /// constraints and the solve reached optimality.
    pub certificate: Option<SohsCertificate>,
    /// The optimal moment matrix `M_d(L)`.
    pub moment_matrix: Option<Mat<f64>>,
    pub iterations: usize,
    pub primal_feas: f64,
    pub dual_feas: f64,
}

impl BoundReport {
    /// The headline bound: the certified side for minimization programs.
    pub fn bound(&self) -> f64 {
        self.primal_bound
    }

    pub fn is_unbounded(&self) -> bool {
        self.primal_bound == f64::NEG_INFINITY
    }
}

/// Builds the moment relaxation of `prob` without solving it. With
/// empty constraint sets this produces exactly the unconstrained
/// program's data.
pub fn build_relaxation(prob: &NcProblem) -> Result<MomentProgram, HierarchyError> {
    let layout = build_layout(prob.nvars(), prob.order(), prob.kind())?;
    let mut templates = vec![build_localizing(&layout, &NcPolynomial::one(prob.nvars()))?];
    for g in &prob.inequalities {
        templates.push(build_localizing(&layout, g)?);
    }
    let mut rows: Vec<AffineRow> = Vec::new();
    // normalization L(1) = 1
    rows.push(AffineRow {
        terms: vec![(layout.unit_class(), <BigRational as Coeff>::one())],
        rhs: <BigRational as Coeff>::one(),
    });
    for h in &prob.equalities {
        for r in equality_rows(&layout, h)? {
            rows.push(AffineRow {
                terms: r.terms,
                rhs: <BigRational as Coeff>::zero(),
            });
        }
    }
    let objective = class_weights(&layout, &prob.objective);
    Ok(assemble::assemble(layout, templates, rows, objective)?)
}

/// Class-indexed coefficient sums of a polynomial.
fn class_weights(
    layout: &crate::moment::MomentLayout,
    f: &NcPolynomial,
) -> Vec<(u32, BigRational)> {
    let mut acc: std::collections::BTreeMap<u32, BigRational> = std::collections::BTreeMap::new();
    for (w, c) in f.terms() {
        let class = layout.class_of(w).expect("objective degree within 2d");
        let cur = acc.entry(class).or_insert_with(<BigRational as Coeff>::zero);
        *cur = cur.clone() + c.clone();
    }
    acc.retain(|_, v| !Coeff::is_zero(v));
    acc.into_iter().collect()
}

/// Solves an assembled relaxation and interprets both sides.
fn solve_program(
    prob: Option<&NcProblem>,
    program: &MomentProgram,
    opts: &HierarchyOptions,
) -> BoundReport {
    let sol = solve(&program.sdp, &opts.sdp);
    let kind = program.layout.mode();
    let order = program.layout.degree();
    let (primal_bound, dual_bound, gap, certificate, moment_matrix) = match sol.status {
        SdpStatus::Optimal | SdpStatus::IterationLimit | SdpStatus::NumericalTrouble => {
            let primal = program.constant + sol.primal_value;
            let dual = program.constant + sol.dual_value;
            let mut cert = None;
            if let (Some(p), SdpStatus::Optimal) = (prob, sol.status) {
                if p.equalities().is_empty() {
                    cert = build_certificate(p, program, &sol.x, primal, opts.clip_tol);
                }
            }
            let y = program.moment_values(&sol.y);
            let moment = Some(program.templates[0].instantiate(&y));
            ((primal), (dual), (primal - dual).abs(), cert, moment)
        }
        SdpStatus::PrimalInfeasible => {
            // no Gram witness at any level: the program value diverges
            (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0, None, None)
        }
        SdpStatus::DualInfeasible => {
            // the moment set is empty (infeasible constraints)
            (f64::INFINITY, f64::INFINITY, 0.0, None, None)
        }
    };
    BoundReport {
        kind,
        order,
        status: sol.status,
        primal_bound,
        dual_bound,
        gap,
        certificate,
        moment_matrix,
        iterations: sol.iterations,
        primal_feas: sol.primal_feas,
        dual_feas: sol.dual_feas,
    }
}

/// Extracts the SOHS certificate `f - bound = sum g_i* g_i +
/// sum_j sum_i p_ji* h_j p_ji` from the solver's primal blocks.
fn build_certificate(
    prob: &NcProblem,
    program: &MomentProgram,
    x: &[Mat<f64>],
    bound: f64,
    clip_tol: f64,
) -> Option<SohsCertificate> {
    let mut cert = extract_sohs(&x[0], &program.templates[0].rows, clip_tol).ok()?;
    let mut weights = Vec::new();
    for (j, tpl) in program.templates.iter().enumerate().skip(1) {
        let sub = extract_sohs(&x[j], &tpl.rows, clip_tol).ok()?;
        if !sub.summands.is_empty() {
            weights.push((j - 1, sub.summands));
        }
    }
    cert.weights = weights;
    // residual against the symmetrized objective shifted by the bound;
    // trace certificates only match up to cyclic equivalence, so their
    // residual is the class-sum defect placed on canonical words
    let mut target = prob.objective().to_float();
    target.add_term(Word::empty(), -bound);
    let raw = &target - &cert.expand_with(prob.inequalities());
    cert.residual = match prob.kind() {
        Mode::Eigenvalue => raw,
        Mode::Trace => {
            let mut folded = crate::freealg::FloatPoly::zero(raw.nvars());
            for (word, sum) in raw.cyclic_class_sums() {
                folded.add_term(word, sum);
            }
            folded
        }
    };
    Some(cert)
}

/// Eigenvalue minimization over all symmetric matrix tuples.
pub fn eig_min_unconstrained(
    f: &NcPolynomial,
    d: usize,
    opts: &HierarchyOptions,
) -> Result<BoundReport, HierarchyError> {
    let prob = NcProblem::new(f.clone(), Vec::new(), Vec::new(), Mode::Eigenvalue, d)?;
    eig_min_constrained(&prob, opts)
}

/// Trace minimization over all symmetric matrix tuples.
pub fn trace_min_unconstrained(
    f: &NcPolynomial,
    d: usize,
    opts: &HierarchyOptions,
) -> Result<BoundReport, HierarchyError> {
    let prob = NcProblem::new(f.clone(), Vec::new(), Vec::new(), Mode::Trace, d)?;
    trace_min_constrained(&prob, opts)
}

/// Constrained eigenvalue minimization at the problem's relaxation
/// order.
pub fn eig_min_constrained(
    prob: &NcProblem,
    opts: &HierarchyOptions,
) -> Result<BoundReport, HierarchyError> {
    assert_eq!(prob.kind(), Mode::Eigenvalue, "problem kind must be eigenvalue");
    let program = build_relaxation(prob)?;
    Ok(solve_program(Some(prob), &program, opts))
}

/// Constrained trace minimization at the problem's relaxation order.
pub fn trace_min_constrained(
    prob: &NcProblem,
    opts: &HierarchyOptions,
) -> Result<BoundReport, HierarchyError> {
    assert_eq!(prob.kind(), Mode::Trace, "problem kind must be trace");
    let program = build_relaxation(prob)?;
    Ok(solve_program(Some(prob), &program, opts))
}

/// Lower bound on the psd rank of an entrywise nonnegative matrix.
///
/// In `p + q` letters, the program minimizes the (1,1) moment subject to
/// `M_d(L)_{x_i, x_{p+j}} = M_ij`, localizing constraints
/// `x_i - x_i^2 >= 0` and `(sum_i M_ij) x_{p+j} - x_{p+j}^2 >= 0`, the
/// zero localizing constraint for `1 - sum_{i<=p} x_i`, and cyclic
/// moment identification. Unlike the eigenvalue and trace programs the
/// moment matrix is not normalized: its (1,1) entry is the objective.
pub fn psd_rank_lower_bound(
    m: &[Vec<BigRational>],
    d: usize,
    opts: &HierarchyOptions,
) -> Result<BoundReport, HierarchyError> {
    if d == 0 {
        return Err(HierarchyError::OrderZero);
    }
    let p = m.len();
    if p == 0 || m[0].is_empty() || m.iter().any(|row| row.len() != m[0].len()) {
        return Err(HierarchyError::BadMatrixShape);
    }
    let q = m[0].len();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v < &<BigRational as Coeff>::zero() {
                return Err(HierarchyError::NegativeMatrixEntry {
                    i,
                    j,
                    value: v.to_f64(),
                });
            }
        }
    }
    let nvars = p + q;
    let layout = build_layout(nvars, d, Mode::Trace)?;

    let mut templates = vec![build_localizing(&layout, &NcPolynomial::one(nvars))?];
    // x_i - x_i^2 for the row factors
    for i in 1..=p {
        let mut g = NcPolynomial::variable(nvars, i as u32);
        g.add_term(
            Word::from_letters(vec![i as u32, i as u32]),
            -<BigRational as Coeff>::one(),
        );
        templates.push(build_localizing(&layout, &g)?);
    }
    // (sum_i M_ij) x_{p+j} - x_{p+j}^2 for the column factors
    for j in 1..=q {
        let col_sum: BigRational = m
            .iter()
            .fold(<BigRational as Coeff>::zero(), |acc, row| acc + row[j - 1].clone());
        let letter = (p + j) as u32;
        let mut g = NcPolynomial::monomial(nvars, Word::letter(letter), col_sum);
        g.add_term(
            Word::from_letters(vec![letter, letter]),
            -<BigRational as Coeff>::one(),
        );
        templates.push(build_localizing(&layout, &g)?);
    }

    let mut rows: Vec<AffineRow> = Vec::new();
    // pinned entries L(x_i x_{p+j}) = M_ij
    for i in 1..=p {
        for j in 1..=q {
            let word = Word::from_letters(vec![i as u32, (p + j) as u32]);
            let class = layout.class_of(&word).expect("degree 2 within 2d");
            rows.push(AffineRow {
                terms: vec![(class, <BigRational as Coeff>::one())],
                rhs: m[i - 1][j - 1].clone(),
            });
        }
    }
    // zero localizing rows for h = 1 - sum_{i<=p} x_i
    let mut h = NcPolynomial::one(nvars);
    for i in 1..=p {
        h.add_term(Word::letter(i as u32), -<BigRational as Coeff>::one());
    }
    for r in equality_rows(&layout, &h)? {
        rows.push(AffineRow {
            terms: r.terms,
            rhs: <BigRational as Coeff>::zero(),
        });
    }

    // objective: minimize the unnormalized unit moment
    let objective = vec![(layout.unit_class(), <BigRational as Coeff>::one())];
    let program = assemble::assemble(layout, templates, rows, objective)?;
    Ok(solve_program(None, &program, opts))
}

/// The CHSH maximal-violation program in four letters
/// (`x1, x2` for one party, `x3, x4` for the other): minimize
/// `-(g + g*)/2` for `g = x1 x3 + x1 x4 + x2 x3 - x2 x4` subject to
/// `x_i^2 = 1` and commutation between the parties' letters.
pub fn chsh_problem(order: usize) -> Result<NcProblem, HierarchyError> {
    let n = 4;
    let one = <BigRational as Coeff>::one();
    let mut g = NcPolynomial::zero(n);
    for (a, b, sign) in [(1u32, 3u32, 1i64), (1, 4, 1), (2, 3, 1), (2, 4, -1)] {
        g.add_term(
            Word::from_letters(vec![a, b]),
            <BigRational as Coeff>::from_int(sign),
        );
    }
    let objective = (-&g).symmetrize();
    let mut equalities = Vec::new();
    for i in 1..=4u32 {
        let mut h = NcPolynomial::monomial(n, Word::from_letters(vec![i, i]), one.clone());
        h.add_term(Word::empty(), -one.clone());
        equalities.push(h);
    }
    for a in [1u32, 2] {
        for b in [3u32, 4] {
            let mut h = NcPolynomial::monomial(n, Word::from_letters(vec![a, b]), one.clone());
            h.add_term(Word::from_letters(vec![b, a]), -one.clone());
            equalities.push(h);
        }
    }
    NcProblem::new(objective, Vec::new(), equalities, Mode::Eigenvalue, order)
}

/// The 3x3 circulant example matrix for the psd-rank program, with
/// entries 1, 1.75, 0.
pub fn psd_rank_example_matrix() -> Vec<Vec<BigRational>> {
    let v = |n: i64, d: i64| BigRational::new(num_bigint::BigInt::from(n), num_bigint::BigInt::from(d));
    vec![
        vec![v(1, 1), v(7, 4), v(0, 1)],
        vec![v(0, 1), v(1, 1), v(7, 4)],
        vec![v(7, 4), v(0, 1), v(1, 1)],
    ]
}
