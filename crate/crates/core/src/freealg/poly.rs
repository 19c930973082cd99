use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::word::{cyclic_canonical, Word};
use super::FreeAlgError;

/// Coefficient ring for nc polynomials. Implemented for exact rationals
/// (the symbolic layer) and for `f64` (numerical certificates).
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_int(v: i64) -> Self;
    /// Exact halving, used by symmetrization.
    fn div2(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Text rendering used by the polynomial grammar printer; must parse
    /// back to the same value.
    fn repr(&self) -> String;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn div2(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // fall back to a quotient of approximations for huge operands
            self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
        })
    }
    fn repr(&self) -> String {
        if num_traits::One::is_one(self.denom()) {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn div2(&self) -> Self {
        self * 0.5
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn repr(&self) -> String {
        if *self != 0.0 && self.abs() < 1e-4 {
            format!("{:e}", self)
        } else {
            format!("{}", self)
        }
    }
}

/// A noncommutative polynomial: a sparse map from words to coefficients.
///
/// Stored coefficients are never zero, and terms iterate in graded
/// lexicographic order of their words.
#[derive(Clone, PartialEq, Eq)]
pub struct NcPoly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Word, C>,
}

/// Exact-rational nc polynomial, the symbolic workhorse.
pub type NcPolynomial = NcPoly<BigRational>;

/// Float-coefficient nc polynomial, used for numerical certificates.
pub type FloatPoly = NcPoly<f64>;

impl<C: Coeff> NcPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        NcPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Word::empty(), c);
        p
    }

    /// The monomial `c * w`.
    pub fn monomial(nvars: usize, w: Word, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(w, c);
        p
    }

    /// The single variable `x_i` (1-based) as a polynomial.
    pub fn variable(nvars: usize, i: u32) -> Self {
        assert!(i >= 1 && (i as usize) <= nvars, "variable index out of range");
        Self::monomial(nvars, Word::letter(i), C::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * w`, removing the entry if the sum cancels.
    pub fn add_term(&mut self, w: Word, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert!(
            w.max_letter() as usize <= self.nvars,
            "word uses a letter beyond nvars"
        );
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Degree of the polynomial: the length of its longest word, or
    /// `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(|w| w.degree())
    }

    /// The involution `f*`: every word reversed, coefficients unchanged.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (w, c) in &self.terms {
            out.add_term(w.star(), c.clone());
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(w, c)| self.terms.get(&w.star()) == Some(c))
    }

    /// `(f + f*) / 2`.
    pub fn symmetrize(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.div2());
            out.add_term(w.star(), c.div2());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.clone() * s.clone());
        }
        out
    }

    /// Sums of coefficients over cyclic equivalence classes, keyed by the
    /// canonical class representative.
    pub fn cyclic_class_sums(&self) -> BTreeMap<Word, C> {
        let mut sums: BTreeMap<Word, C> = BTreeMap::new();
        for (w, c) in &self.terms {
            let key = cyclic_canonical(w);
            match sums.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().clone() + c.clone();
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        sums
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> NcPoly<D> {
        let mut out = NcPoly::zero(self.nvars);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> FloatPoly {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Largest absolute coefficient value, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl NcPolynomial {
    /// The commutator `[p, q] = pq - qp`.
    pub fn commutator(p: &NcPolynomial, q: &NcPolynomial) -> NcPolynomial {
        &(p * q) - &(q * p)
    }
}

/// Coefficient sums over cyclic classes agree if and only if the
/// difference is a sum of commutators.
pub fn cyclically_equivalent<C: Coeff>(f: &NcPoly<C>, g: &NcPoly<C>) -> bool {
    assert_eq!(
        f.nvars, g.nvars,
        "cyclic equivalence requires the same variable count"
    );
    f.cyclic_class_sums() == g.cyclic_class_sums()
}

impl<C: Coeff> Add for &NcPoly<C> {
    type Output = NcPoly<C>;
    fn add(self, rhs: &NcPoly<C>) -> NcPoly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &NcPoly<C> {
    type Output = NcPoly<C>;
    fn sub(self, rhs: &NcPoly<C>) -> NcPoly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &NcPoly<C> {
    type Output = NcPoly<C>;
    fn mul(self, rhs: &NcPoly<C>) -> NcPoly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = NcPoly::zero(self.nvars);
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a.clone() * b.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &NcPoly<C> {
    type Output = NcPoly<C>;
    fn neg(self) -> NcPoly<C> {
        let mut out = NcPoly::zero(self.nvars);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> fmt::Debug for NcPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NcPoly({})", super::parse::poly_to_string(self))
    }
}

impl<C: Coeff> fmt::Display for NcPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::parse::poly_to_string(self))
    }
}

/// Evaluates `f` at a tuple of symmetric matrices, substituting `A_i`
/// for `x_i`. Size-1 matrices recover commutative evaluation.
pub fn evaluate<C: Coeff>(f: &NcPoly<C>, point: &[Mat<f64>]) -> Result<Mat<f64>, FreeAlgError> {
    evaluate_with_tol(f, point, 1e-9)
}

/// As [`evaluate`], with an explicit symmetry tolerance for the inputs.
pub fn evaluate_with_tol<C: Coeff>(
    f: &NcPoly<C>,
    point: &[Mat<f64>],
    sym_tol: f64,
) -> Result<Mat<f64>, FreeAlgError> {
    if point.len() != f.nvars() {
        return Err(FreeAlgError::ArityMismatch {
            got: point.len(),
            expected: f.nvars(),
        });
    }
    let r = if point.is_empty() { 1 } else { point[0].nrows() };
    for (index, a) in point.iter().enumerate() {
        if a.nrows() != a.ncols() || a.nrows() != r {
            return Err(FreeAlgError::NotSquare {
                index,
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let mut asym = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..r {
            for j in 0..r {
                asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
                scale = scale.max(a[(i, j)].abs());
            }
        }
        if asym > sym_tol * scale {
            return Err(FreeAlgError::NotSymmetric { index, asym });
        }
    }

    let mut acc = Mat::<f64>::zeros(r, r);
    for (w, c) in f.terms() {
        let coeff = c.to_f64();
        let mut prod = Mat::<f64>::identity(r, r);
        for &l in w.letters() {
            prod = &prod * &point[(l - 1) as usize];
        }
        for i in 0..r {
            for j in 0..r {
                acc[(i, j)] += coeff * prod[(i, j)];
            }
        }
    }
    Ok(acc)
}
