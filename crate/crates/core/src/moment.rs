//! Moment-side machinery: nc Hankel matrix layouts, localizing
//! templates, and equality rows on moment variables.
//!
//! A symmetric linear functional `L` on polynomials of degree at most
//! `2d` is represented by the matrix `M_d(L)_{u,v} = L(u* v)` over the
//! word basis of degree `d`. Entries coincide whenever the products
//! agree (eigenvalue mode, where also `L(w) = L(w*)`), or whenever they
//! are cyclically equivalent (trace mode). The layout assigns one scalar
//! variable per identification class; localizing templates express
//! `M_{d-d_g}(g L)_{u,v} = L(u* g v)` as linear forms in those scalars.

use std::collections::{BTreeMap, HashMap};

use faer::Mat;
use num_rational::BigRational;
use thiserror::Error;

use crate::freealg::{
    cyclic_canonical, enumerate_basis, Coeff, NcPolynomial, Word, WordBasis,
};
use crate::Mode;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("constraint degree d_g = {dg} exceeds relaxation order d = {d}")]
    ConstraintDegreeTooHigh { dg: usize, d: usize },
    #[error("localizing constraint must be a nonzero polynomial")]
    ZeroConstraint,
    #[error("localizing constraint must be symmetric: {poly}")]
    NotSymmetric { poly: String },
    #[error("functional is inconsistent on class of {class}: {a} vs {b} at {word}")]
    InconsistentFunctional {
        class: Word,
        word: Word,
        a: f64,
        b: f64,
    },
    #[error(transparent)]
    FreeAlg(#[from] crate::freealg::FreeAlgError),
}

/// One identification class of words of degree at most `2d`.
#[derive(Debug, Clone)]
pub struct MomentClass {
    /// Graded-lex least member; the class key.
    pub representative: Word,
    /// All members of degree at most `2d`, sorted.
    pub words: Vec<Word>,
}

/// The indexing structure for nc Hankel and localizing matrices: a
/// partition of words of degree at most `2d` into identification
/// classes, one moment variable per class.
#[derive(Debug, Clone)]
pub struct MomentLayout {
    nvars: usize,
    degree: usize,
    mode: Mode,
    basis: WordBasis,
    classes: Vec<MomentClass>,
    class_of: HashMap<Word, u32>,
}

impl MomentLayout {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Relaxation order `d`; the layout identifies words of degree `2d`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The row/column basis of `M_d(L)`: words of degree at most `d`.
    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }

    pub fn classes(&self) -> &[MomentClass] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, w: &Word) -> Option<u32> {
        self.class_of.get(w).copied()
    }

    /// Class id of the empty word; always 0.
    pub fn unit_class(&self) -> u32 {
        0
    }
}

/// Partitions words of degree at most `2d` into moment identification
/// classes: involution pairs `{w, w*}` in eigenvalue mode, joint
/// rotation/involution closures in trace mode.
pub fn build_layout(n: usize, d: usize, mode: Mode) -> Result<MomentLayout, MomentError> {
    let basis = enumerate_basis(n, d)?;
    let all_words = enumerate_basis(n, 2 * d)?;
    let mut groups: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    for w in all_words.words() {
        let key = match mode {
            Mode::Eigenvalue => {
                let ws = w.star();
                if ws < *w {
                    ws
                } else {
                    w.clone()
                }
            }
            Mode::Trace => cyclic_canonical(w),
        };
        groups.entry(key).or_default().push(w.clone());
    }
    let mut classes = Vec::with_capacity(groups.len());
    let mut class_of = HashMap::new();
    for (id, (representative, words)) in groups.into_iter().enumerate() {
        for w in &words {
            class_of.insert(w.clone(), id as u32);
        }
        classes.push(MomentClass {
            representative,
            words,
        });
    }
    debug_assert!(classes[0].representative.is_empty());
    debug_assert_eq!(classes[0].words.len(), 1);
    Ok(MomentLayout {
        nvars: n,
        degree: d,
        mode,
        basis,
        classes,
        class_of,
    })
}

/// A linear form `sum_c coeff_c * y_c` over moment variables, with an
/// optional constant offset (used by affine equality rows).
pub type ClassForm = Vec<(u32, BigRational)>;

fn push_term(form: &mut BTreeMap<u32, BigRational>, class: u32, coeff: BigRational) {
    let cur = form.entry(class).or_insert_with(<BigRational as Coeff>::zero);
    *cur = cur.clone() + coeff;
    if Coeff::is_zero(cur) {
        form.remove(&class);
    }
}

/// The localizing matrix `M_{d-d_g}(g L)` as class-indexed linear forms:
/// entry `(u, v)` is `sum_w g_w y_{class(u* w v)}`.
#[derive(Debug, Clone)]
pub struct LocalizingTemplate {
    pub g: NcPolynomial,
    pub dg: usize,
    /// Row/column basis: words of degree at most `d - d_g`.
    pub rows: WordBasis,
    /// Upper-triangular entries, indexed by `v*(v+1)/2 + u` for `u <= v`.
    pub entries: Vec<ClassForm>,
}

impl LocalizingTemplate {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Linear form at entry `(u, v)`, `u <= v`.
    pub fn entry(&self, u: usize, v: usize) -> &ClassForm {
        debug_assert!(u <= v);
        &self.entries[v * (v + 1) / 2 + u]
    }

    /// Instantiates the template at a class assignment.
    pub fn instantiate(&self, y: &[f64]) -> Mat<f64> {
        let n = self.size();
        let mut m = Mat::<f64>::zeros(n, n);
        for v in 0..n {
            for u in 0..=v {
                let val: f64 = self
                    .entry(u, v)
                    .iter()
                    .map(|(c, q)| q.to_f64() * y[*c as usize])
                    .sum();
                m[(u, v)] = val;
                m[(v, u)] = val;
            }
        }
        m
    }
}

/// Half-degree of a constraint polynomial: `ceil(deg(g) / 2)`; 0 for
/// constants.
pub fn half_degree(g: &NcPolynomial) -> usize {
    match g.degree() {
        None | Some(0) => 0,
        Some(deg) => deg.div_ceil(2),
    }
}

/// Builds the localizing template for a symmetric, nonzero `g`. With
/// `g = 1` this degenerates to the moment matrix layout itself.
pub fn build_localizing(
    layout: &MomentLayout,
    g: &NcPolynomial,
) -> Result<LocalizingTemplate, MomentError> {
    if g.is_zero() {
        return Err(MomentError::ZeroConstraint);
    }
    if !g.is_symmetric() {
        return Err(MomentError::NotSymmetric {
            poly: crate::freealg::poly_to_string(g),
        });
    }
    let dg = half_degree(g);
    if dg > layout.degree() {
        return Err(MomentError::ConstraintDegreeTooHigh {
            dg,
            d: layout.degree(),
        });
    }
    let rows = enumerate_basis(layout.nvars(), layout.degree() - dg)?;
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * (n + 1) / 2);
    for v in 0..n {
        for u in 0..=v {
            let mut form: BTreeMap<u32, BigRational> = BTreeMap::new();
            for (w, coeff) in g.terms() {
                let prod = rows.word(u).star().concat(w).concat(rows.word(v));
                let class = layout
                    .class_of(&prod)
                    .expect("product degree bounded by 2d");
                push_term(&mut form, class, coeff.clone());
            }
            entries.push(form.into_iter().collect());
        }
    }
    Ok(LocalizingTemplate {
        g: g.clone(),
        dg,
        rows,
        entries,
    })
}

/// A homogeneous linear equality `sum_c coeff_c * y_c = 0` on moment
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentRow {
    pub terms: ClassForm,
}

/// Linear equalities forcing every entry of the zero localizing matrix
/// `M_{d-d_h}(h L)` to vanish, deduplicated by their normalized class
/// support. `h` need not be symmetric; `h = 0` yields no rows.
pub fn equality_rows(layout: &MomentLayout, h: &NcPolynomial) -> Result<Vec<MomentRow>, MomentError> {
    if h.is_zero() {
        return Ok(Vec::new());
    }
    let dh = half_degree(h);
    if dh > layout.degree() {
        return Err(MomentError::ConstraintDegreeTooHigh {
            dg: dh,
            d: layout.degree(),
        });
    }
    let rows_basis = enumerate_basis(layout.nvars(), layout.degree() - dh)?;
    let n = rows_basis.len();
    let mut seen = std::collections::BTreeSet::new();
    let mut rows = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let mut form: BTreeMap<u32, BigRational> = BTreeMap::new();
            for (w, coeff) in h.terms() {
                let prod = rows_basis.word(u).star().concat(w).concat(rows_basis.word(v));
                let class = layout
                    .class_of(&prod)
                    .expect("product degree bounded by 2d");
                push_term(&mut form, class, coeff.clone());
            }
            if form.is_empty() {
                continue;
            }
            let terms: ClassForm = form.into_iter().collect();
            // normalize scale and sign so transposed or proportional
            // entries deduplicate
            let lead = terms[0].1.clone();
            let normalized: Vec<(u32, BigRational)> = terms
                .iter()
                .map(|(c, q)| (*c, q / &lead))
                .collect();
            if seen.insert(normalized) {
                rows.push(MomentRow { terms });
            }
        }
    }
    Ok(rows)
}

/// Builds the nc Hankel matrix of a functional given as a word map,
/// checking that the functional is constant on each identification
/// class within `tol`.
pub fn hankel_from_functional(
    l: impl Fn(&Word) -> f64,
    layout: &MomentLayout,
    tol: f64,
) -> Result<Mat<f64>, MomentError> {
    let mut values = vec![0.0f64; layout.num_classes()];
    for (id, class) in layout.classes().iter().enumerate() {
        let rep_value = l(&class.representative);
        for w in &class.words {
            let v = l(w);
            if (v - rep_value).abs() > tol * (1.0 + rep_value.abs()) {
                return Err(MomentError::InconsistentFunctional {
                    class: class.representative.clone(),
                    word: w.clone(),
                    a: rep_value,
                    b: v,
                });
            }
        }
        values[id] = rep_value;
    }
    let basis = layout.basis();
    let n = basis.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for v in 0..n {
        for u in 0..n {
            let prod = basis.word(u).star().concat(basis.word(v));
            let class = layout.class_of(&prod).expect("within 2d");
            m[(u, v)] = values[class as usize];
        }
    }
    Ok(m)
}
