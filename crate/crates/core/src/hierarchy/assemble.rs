//! Assembly of moment-side relaxations into standard-form SDP data.
//!
//! The moment program has one scalar variable per identification class.
//! Equality constraints (normalization, zero localizing rows, pinned
//! matrix entries) are eliminated first by exact rational row reduction,
//! leaving free variables `z` with `y = y0 + N z`. Each psd block is the
//! matrix pencil of a localizing template evaluated at `y0 + N z`, so
//! the whole relaxation becomes
//!
//! ```text
//!   minimize  constant + q^T z   s.t.  H_0 + sum_i z_i H_i  psd
//! ```
//!
//! which is the dual of the standard-form problem with `C = -H_0`,
//! `A_i = H_i`, `b_i = q_i`. The solver's primal matrix then carries the
//! sums-of-squares side and its dual vector the moment values.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use thiserror::Error;

use crate::freealg::Coeff;
use crate::moment::{ClassForm, LocalizingTemplate, MomentLayout};
use crate::sdp::{Block, SdpProblem, SparseSymMat};

#[derive(Debug, Error)]
pub enum PresolveError {
    #[error("equality constraints are inconsistent (reduced to 0 = {rhs})")]
    Inconsistent { rhs: String },
}

/// An affine equality `sum_c coeff_c y_c = rhs` over moment classes.
#[derive(Debug, Clone)]
pub struct AffineRow {
    pub terms: ClassForm,
    pub rhs: BigRational,
}

/// Affine expression over free classes: `constant + sum coeff * z`.
#[derive(Debug, Clone)]
pub(crate) struct AffineExpr {
    pub constant: BigRational,
    /// Terms over class ids (after back-substitution: free classes only).
    pub terms: Vec<(u32, BigRational)>,
}

/// Result of eliminating the equality rows: pivot classes are affine in
/// the remaining free classes.
#[derive(Debug)]
pub(crate) struct Presolve {
    pivots: BTreeMap<u32, AffineExpr>,
    free: Vec<u32>,
    free_index: HashMap<u32, usize>,
}

impl Presolve {
    pub fn free_classes(&self) -> &[u32] {
        &self.free
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Expands a linear form over classes into (constant, coefficients
    /// over free-variable positions).
    pub fn substitute(&self, form: &[(u32, BigRational)]) -> (BigRational, Vec<(usize, BigRational)>) {
        let mut constant = <BigRational as Coeff>::zero();
        let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
        let push = |acc: &mut BTreeMap<usize, BigRational>, pos: usize, q: BigRational| {
            let cur = acc.entry(pos).or_insert_with(<BigRational as Coeff>::zero);
            *cur = cur.clone() + q;
            if Coeff::is_zero(cur) {
                acc.remove(&pos);
            }
        };
        for (class, q) in form {
            if let Some(expr) = self.pivots.get(class) {
                constant += q * &expr.constant;
                for (c2, q2) in &expr.terms {
                    let pos = self.free_index[c2];
                    push(&mut acc, pos, q * q2);
                }
            } else {
                let pos = self.free_index[class];
                push(&mut acc, pos, q.clone());
            }
        }
        (constant, acc.into_iter().collect())
    }

    /// Full moment vector from the free variables.
    pub fn reconstruct(&self, z: &[f64], num_classes: usize) -> Vec<f64> {
        let mut y = vec![0.0f64; num_classes];
        for (pos, &class) in self.free.iter().enumerate() {
            y[class as usize] = z[pos];
        }
        for (&class, expr) in &self.pivots {
            let mut v = expr.constant.to_f64();
            for (c2, q) in &expr.terms {
                v += q.to_f64() * y[*c2 as usize];
            }
            y[class as usize] = v;
        }
        y
    }
}

/// Exact Gaussian elimination of the affine rows. Pivots on the highest
/// class id of each reduced row, so every pivot expression references
/// strictly smaller ids; a final pass in increasing pivot order makes
/// all expressions reference free classes only.
pub(crate) fn presolve(rows: &[AffineRow], num_classes: usize) -> Result<Presolve, PresolveError> {
    let mut pivots: BTreeMap<u32, AffineExpr> = BTreeMap::new();
    for row in rows {
        // substitute known pivots
        let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
        let mut rhs = row.rhs.clone();
        let push = |acc: &mut BTreeMap<u32, BigRational>, class: u32, q: BigRational| {
            let cur = acc.entry(class).or_insert_with(<BigRational as Coeff>::zero);
            *cur = cur.clone() + q;
            if Coeff::is_zero(cur) {
                acc.remove(&class);
            }
        };
        for (class, q) in &row.terms {
            if let Some(expr) = pivots.get(class) {
                rhs -= q * &expr.constant;
                for (c2, q2) in &expr.terms {
                    push(&mut acc, *c2, q * q2);
                }
            } else {
                push(&mut acc, *class, q.clone());
            }
        }
        if acc.is_empty() {
            if !Coeff::is_zero(&rhs) {
                return Err(PresolveError::Inconsistent {
                    rhs: rhs.to_string(),
                });
            }
            continue;
        }
        let (&pivot, _) = acc.iter().next_back().expect("nonempty");
        let lead = acc.remove(&pivot).expect("pivot coefficient");
        let expr = AffineExpr {
            constant: &rhs / &lead,
            terms: acc
                .into_iter()
                .map(|(c, q)| (c, -(&q / &lead)))
                .collect(),
        };
        pivots.insert(pivot, expr);
    }

    // back-substitution in increasing pivot order: expressions reference
    // only smaller ids, so earlier pivots are already resolved
    let pivot_ids: Vec<u32> = pivots.keys().copied().collect();
    for &p in &pivot_ids {
        let expr = pivots.get(&p).expect("pivot").clone();
        let mut constant = expr.constant;
        let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (class, q) in expr.terms {
            if let Some(sub) = pivots.get(&class) {
                debug_assert!(class < p);
                constant += &q * &sub.constant;
                for (c2, q2) in &sub.terms {
                    let cur = acc.entry(*c2).or_insert_with(<BigRational as Coeff>::zero);
                    *cur = cur.clone() + &q * q2;
                }
            } else {
                let cur = acc.entry(class).or_insert_with(<BigRational as Coeff>::zero);
                *cur = cur.clone() + q;
            }
        }
        acc.retain(|_, v| !Coeff::is_zero(v));
        pivots.insert(
            p,
            AffineExpr {
                constant,
                terms: acc.into_iter().collect(),
            },
        );
    }

    let free: Vec<u32> = (0..num_classes as u32)
        .filter(|c| !pivots.contains_key(c))
        .collect();
    let free_index = free.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    Ok(Presolve {
        pivots,
        free,
        free_index,
    })
}

/// A fully assembled moment relaxation.
#[derive(Debug)]
pub struct MomentProgram {
    pub layout: MomentLayout,
    /// Template `[0]` is the moment matrix itself (`g = 1`); the rest
    /// follow the problem's inequality constraints in order.
    pub templates: Vec<LocalizingTemplate>,
    pub(crate) presolve: Presolve,
    /// Objective as class weights (before elimination).
    pub objective: Vec<(u32, BigRational)>,
    /// Objective value at the particular solution `y0`.
    pub constant: f64,
    pub sdp: SdpProblem,
}

impl MomentProgram {
    /// Moment values for all classes from the solver's dual vector.
    pub fn moment_values(&self, z: &[f64]) -> Vec<f64> {
        self.presolve.reconstruct(z, self.layout.num_classes())
    }

    /// Class ids of the moment variables that survived elimination.
    pub fn free_classes(&self) -> &[u32] {
        self.presolve.free_classes()
    }
}

/// Assembles templates, equality rows, and an objective over classes
/// into standard-form SDP data.
pub(crate) fn assemble(
    layout: MomentLayout,
    templates: Vec<LocalizingTemplate>,
    rows: Vec<AffineRow>,
    objective: Vec<(u32, BigRational)>,
) -> Result<MomentProgram, PresolveError> {
    let pre = presolve(&rows, layout.num_classes())?;
    let m = pre.num_free();
    let nblocks = templates.len();
    let blocks: Vec<Block> = templates.iter().map(|t| Block::Psd(t.size())).collect();

    let mut c_entries: Vec<(usize, u32, u32, f64)> = Vec::new();
    let mut a_entries: Vec<Vec<(usize, u32, u32, f64)>> = vec![Vec::new(); m];
    for (blk, tpl) in templates.iter().enumerate() {
        let n = tpl.size();
        for v in 0..n {
            for u in 0..=v {
                let (constant, coeffs) = pre.substitute(tpl.entry(u, v));
                let c0 = constant.to_f64();
                if c0 != 0.0 {
                    // C = -H_0
                    c_entries.push((blk, u as u32, v as u32, -c0));
                }
                for (pos, q) in coeffs {
                    let qf = q.to_f64();
                    if qf != 0.0 {
                        a_entries[pos].push((blk, u as u32, v as u32, qf));
                    }
                }
            }
        }
    }
    let (obj_const, obj_coeffs) = pre.substitute(&objective);
    let mut b = vec![0.0f64; m];
    for (pos, q) in obj_coeffs {
        b[pos] = q.to_f64();
    }

    let c = SparseSymMat::from_entries(nblocks, c_entries);
    let a: Vec<SparseSymMat> = a_entries
        .into_iter()
        .map(|e| SparseSymMat::from_entries(nblocks, e))
        .collect();
    let sdp = SdpProblem::new(blocks, c, a, b).expect("assembled data is consistent");

    Ok(MomentProgram {
        layout,
        templates,
        presolve: pre,
        objective,
        constant: obj_const.to_f64(),
        sdp,
    })
}
