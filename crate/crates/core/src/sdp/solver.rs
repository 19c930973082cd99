//! Dense primal-dual path-following solver with Nesterov-Todd scaling
//! and a Mehrotra predictor-corrector step.
//!
//! Solves `max <C, X> s.t. <A_j, X> = b_j, X psd` together with its dual
//! `min b^T y s.t. Z = sum y_j A_j - C psd` from an infeasible start.
//! Each iteration forms the Schur complement `S_ij = <A_i, W A_j W>`
//! with the NT scaling point `W` (`W Z W = X`) and factors it by
//! Cholesky. Infeasibility is classified by divergence thresholds and
//! normalized improving-ray (Farkas) certificates rather than a
//! homogeneous embedding.
//!
//! Directions are computed in the NT scaled space: with `W = R R^T`,
//! both `R^-1 X R^-T` and `R^T Z R` equal the same matrix `V`, and the
//! factor `R` is chosen so that `V` is diagonal. The scaled Newton
//! equation is `dXhat + dZhat = D`, and the Mehrotra second-order term
//! is a Lyapunov solve that is entrywise in this basis.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{IterStat, SdpOptions, SdpProblem, SdpSolution, SdpStatus, SparseSymMat};

struct Workspace<'p> {
    p: &'p SdpProblem,
    sizes: Vec<usize>,
}

impl<'p> Workspace<'p> {
    fn zeros(&self) -> Vec<Mat<f64>> {
        self.sizes.iter().map(|&n| Mat::zeros(n, n)).collect()
    }

    fn identity(&self, scale: f64) -> Vec<Mat<f64>> {
        self.sizes
            .iter()
            .map(|&n| Mat::from_fn(n, n, |i, j| if i == j { scale } else { 0.0 }))
            .collect()
    }

    /// `A(X)`: all constraint inner products.
    fn apply_a(&self, x: &[Mat<f64>]) -> Vec<f64> {
        self.p.a.iter().map(|aj| aj.inner(x)).collect()
    }

    /// `sum_j y_j A_j - c_weight * C` as dense blocks.
    fn combine(&self, y: &[f64], c_weight: f64) -> Vec<Mat<f64>> {
        let mut out = self.zeros();
        for (j, aj) in self.p.a.iter().enumerate() {
            if y[j] != 0.0 {
                aj.add_scaled_to(&mut out, y[j]);
            }
        }
        if c_weight != 0.0 {
            self.p.c.add_scaled_to(&mut out, -c_weight);
        }
        out
    }
}

fn max_abs(blocks: &[Mat<f64>]) -> f64 {
    let mut m = 0.0f64;
    for b in blocks {
        for j in 0..b.ncols() {
            for i in 0..b.nrows() {
                m = m.max(b[(i, j)].abs());
            }
        }
    }
    m
}

fn frob(blocks: &[Mat<f64>]) -> f64 {
    let mut acc = 0.0f64;
    for b in blocks {
        for j in 0..b.ncols() {
            for i in 0..b.nrows() {
                acc += b[(i, j)] * b[(i, j)];
            }
        }
    }
    acc.sqrt()
}

fn inner_blocks(a: &[Mat<f64>], b: &[Mat<f64>]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                acc += x[(i, j)] * y[(i, j)];
            }
        }
    }
    acc
}

fn axpy(dst: &mut [Mat<f64>], src: &[Mat<f64>], s: f64) {
    for (d, x) in dst.iter_mut().zip(src) {
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                d[(i, j)] += s * x[(i, j)];
            }
        }
    }
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn min_eig(m: &Mat<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map(|ev| ev.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN)
}

/// Cholesky factor with escalating diagonal jitter; `None` when the
/// matrix stays indefinite at the largest perturbation.
fn chol_with_jitter(m: &Mat<f64>) -> Option<Mat<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Mat::zeros(0, 0));
    }
    let mean_diag = (0..n).map(|i| m[(i, i)].abs()).sum::<f64>() / n as f64;
    let mut jitter = 0.0f64;
    for attempt in 0..8 {
        let mut trial = m.clone();
        if jitter > 0.0 {
            for i in 0..n {
                trial[(i, i)] += jitter;
            }
        }
        match trial.llt(Side::Lower) {
            Ok(f) => return Some(f.L().to_owned()),
            Err(_) => {
                jitter = if attempt == 0 {
                    1e-14 * (1.0 + mean_diag)
                } else {
                    jitter * 100.0
                };
            }
        }
    }
    None
}

/// Per-block NT scaling data: `W = R R^T` with
/// `R^-1 X R^-T = R^T Z R = diag(v)`.
struct Scaling {
    r: Mat<f64>,
    /// The diagonal scaled point, `v_k = sqrt(d_k)` for the eigenvalues
    /// `d` of `Lx^T Z Lx`.
    v: Vec<f64>,
    w: Mat<f64>,
}

fn nt_scaling(x: &Mat<f64>, z: &Mat<f64>) -> Option<Scaling> {
    let n = x.nrows();
    if n == 0 {
        return Some(Scaling {
            r: Mat::zeros(0, 0),
            v: Vec::new(),
            w: Mat::zeros(0, 0),
        });
    }
    let lx = chol_with_jitter(x)?;
    let t = lx.transpose() * z * &lx;
    let eig = t.self_adjoint_eigen(Side::Lower).ok()?;
    let mut d_quarter = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for k in 0..n {
        let d = eig.S()[k];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        d_quarter.push(d.powf(0.25));
        v.push(d.sqrt());
    }
    // R = Lx U D^{-1/4}; then R^T Z R = D^{-1/4} (U^T T U) D^{-1/4} =
    // D^{1/2} and R^-1 X R^-T = D^{1/4} U^T (Lx^-1 X Lx^-T) U D^{1/4} =
    // D^{1/2} as well.
    let mut r = &lx * eig.U();
    for k in 0..n {
        let s = 1.0 / d_quarter[k];
        for i in 0..n {
            r[(i, k)] *= s;
        }
    }
    let mut w = &r * r.transpose();
    symmetrize(&mut w);
    Some(Scaling { r, v, w })
}

impl Scaling {
    /// `R^T M R` for symmetric `M` (the dual-side scaling).
    fn scale_z(&self, m: &Mat<f64>) -> Mat<f64> {
        let mut s = self.r.transpose() * m * &self.r;
        symmetrize(&mut s);
        s
    }

    /// `R M R^T` for symmetric `M` (back to the unscaled space).
    fn unscale(&self, m: &Mat<f64>) -> Mat<f64> {
        let mut s = &self.r * m * self.r.transpose();
        symmetrize(&mut s);
        s
    }

}

/// Largest step `alpha` keeping `diag(v) + alpha * dhat` psd.
fn max_step_scaled(v: &[f64], dhat: &Mat<f64>) -> f64 {
    let n = v.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let mut e = dhat.clone();
    for j in 0..n {
        for i in 0..n {
            e[(i, j)] /= (v[i] * v[j]).sqrt();
        }
    }
    let lam = min_eig(&e);
    if !lam.is_finite() {
        return 0.0;
    }
    if lam >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

/// Schur complement `S_ij = <A_i, W A_j W>`, upper triangle.
///
/// Per constraint, `W H_i W = P Q^T + Q P^T` where the columns of `P`
/// and `Q` are (scaled) columns of `W` picked by the sparse entries of
/// `A_i`; the skinny product is one small matmul and the inner products
/// against `A_j` are gathers from it. Rows are interleaved across two
/// worker threads with disjoint writes, so the result is deterministic.
fn form_schur(ws: &Workspace, w: &[Mat<f64>], s: &mut Mat<f64>) {
    use faer::linalg::matmul::matmul;
    use faer::mat::{MatMut, MatRef};
    use faer::{Accum, Par};

    let k = ws.p.num_constraints();
    if k == 0 {
        return;
    }
    let nblocks = ws.sizes.len();
    // flat column-major copies of the scaling blocks
    let w_flat: Vec<Vec<f64>> = w
        .iter()
        .map(|wb| {
            let n = wb.nrows();
            let mut v = vec![0.0f64; n * n];
            for j in 0..n {
                v[j * n..(j + 1) * n].copy_from_slice(wb.col_as_slice(j));
            }
            v
        })
        .collect();
    let max_entries: usize = (0..k)
        .map(|i| {
            ws.p.a[i]
                .blocks
                .iter()
                .map(|b| b.len())
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let max_n = ws.sizes.iter().copied().max().unwrap_or(0);

    let mut out = vec![0.0f64; k * k];
    struct SendPtr(*mut f64);
    unsafe impl Sync for SendPtr {}
    let out_ptr = SendPtr(out.as_mut_ptr());
    let nthreads = if k >= 64 { 2usize } else { 1 };

    std::thread::scope(|scope| {
        for t in 0..nthreads {
            let out_ptr = &out_ptr;
            let w_flat = &w_flat;
            scope.spawn(move || {
                let mut pbuf = vec![0.0f64; max_n * max_entries];
                let mut qbuf = vec![0.0f64; max_n * max_entries];
                let mut pq: Vec<Vec<f64>> =
                    ws.sizes.iter().map(|&n| vec![0.0f64; n * n]).collect();
                let mut active: Vec<usize> = Vec::with_capacity(nblocks);
                let mut i = t;
                while i < k {
                    let ai = &ws.p.a[i];
                    active.clear();
                    for blk in 0..nblocks {
                        let entries = &ai.blocks[blk];
                        if entries.is_empty() {
                            continue;
                        }
                        active.push(blk);
                        let n = ws.sizes[blk];
                        let ke = entries.len();
                        let wf = &w_flat[blk];
                        for (e, &(a, bcol, v)) in entries.iter().enumerate() {
                            let (a, bcol) = (a as usize, bcol as usize);
                            let scale = if a == bcol { 0.5 * v } else { v };
                            let wa = &wf[a * n..(a + 1) * n];
                            let wb = &wf[bcol * n..(bcol + 1) * n];
                            let pe = &mut pbuf[e * n..(e + 1) * n];
                            for (dst, &src) in pe.iter_mut().zip(wa) {
                                *dst = scale * src;
                            }
                            qbuf[e * n..(e + 1) * n].copy_from_slice(wb);
                        }
                        // pq = P * Q^T
                        let p_ref =
                            MatRef::from_column_major_slice(&pbuf[..n * ke], n, ke);
                        let q_ref =
                            MatRef::from_column_major_slice(&qbuf[..n * ke], n, ke);
                        let dst =
                            MatMut::from_column_major_slice_mut(&mut pq[blk][..], n, n);
                        matmul(dst, Accum::Replace, p_ref, q_ref.transpose(), 1.0, Par::Seq);
                    }
                    // S_ij = sum over entries of A_j of the symmetrized
                    // gather pq[a, b] + pq[b, a]
                    for j in i..k {
                        let mut acc = 0.0f64;
                        for &blk in &active {
                            let n = ws.sizes[blk];
                            let t_blk = &pq[blk];
                            for &(a, bcol, v) in &ws.p.a[j].blocks[blk] {
                                let (a, bcol) = (a as usize, bcol as usize);
                                let sym = t_blk[a + bcol * n] + t_blk[bcol + a * n];
                                acc += v * if a == bcol { sym } else { 2.0 * sym };
                            }
                        }
                        // SAFETY: entry (i, j) is written exactly once, by
                        // the thread that owns row i
                        unsafe {
                            *out_ptr.0.add(i + j * k) = acc;
                        }
                    }
                    i += nthreads;
                }
            });
        }
    });

    for j in 0..k {
        s.col_as_slice_mut(j)[..j + 1].copy_from_slice(&out[j * k..j * k + j + 1]);
    }
}

/// Factors the Schur matrix, escalating a diagonal damping when it is
/// numerically singular.
fn factor_schur(s: &Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    let k = s.nrows();
    if k == 0 {
        return s.llt(Side::Upper).ok();
    }
    let mean_diag = (0..k).map(|i| s[(i, i)].abs()).sum::<f64>() / k as f64;
    let mut damp = 0.0f64;
    for attempt in 0..10 {
        let mut trial = s.clone();
        if damp > 0.0 {
            for i in 0..k {
                trial[(i, i)] += damp;
            }
        }
        if let Ok(f) = trial.llt(Side::Upper) {
            return Some(f);
        }
        damp = if attempt == 0 {
            1e-14 * (1.0 + mean_diag)
        } else {
            damp * 100.0
        };
        if damp > 1e-4 * (1.0 + mean_diag) {
            break;
        }
    }
    None
}

/// Polished primal-dual triple `(X, y, Z)`.
type PolishedPair = (Vec<Mat<f64>>, Vec<f64>, Vec<Mat<f64>>);

struct Direction {
    dy: Vec<f64>,
    dx: Vec<Mat<f64>>,
    dz: Vec<Mat<f64>>,
    dx_hat: Vec<Mat<f64>>,
    dz_hat: Vec<Mat<f64>>,
}

/// Snapshot of the best iterate seen so far, by combined merit.
struct BestIterate {
    merit: f64,
    x: Vec<Mat<f64>>,
    y: Vec<f64>,
    z: Vec<Mat<f64>>,
}

/// Recovers an optimal pair on the face predicted by the dual slack.
///
/// Degenerate problems stall the interior-point tail at a few digits,
/// but the optimal face is usually identified well before that. The
/// polish re-solves the dual under the complementarity equations
/// `Z q = 0` on the face (anchored at the stalled iterate), restricts
/// `X` to the face, and then applies a minimum-norm correction hitting
/// the constraints and the polished dual value exactly. Every output is
/// verified: psd-ness of both sides within tolerance, exact primal
/// feasibility, and a closed gap.
fn polish_pair(
    ws: &Workspace,
    x: &[Mat<f64>],
    y: &[f64],
    z: &[Mat<f64>],
    opts: &SdpOptions,
) -> Option<PolishedPair> {
    // Gram matrix of the constraints and the objective in the identity
    // metric; its solve gives minimum-norm corrections hitting both the
    // constraint values and a target objective
    let k = ws.p.num_constraints();
    let ident: Vec<Mat<f64>> = ws
        .sizes
        .iter()
        .map(|&n| Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }))
        .collect();
    let mut s0 = Mat::<f64>::zeros(k, k);
    form_schur(ws, &ident, &mut s0);
    let mut c_dense = ws.zeros();
    ws.p.c.add_scaled_to(&mut c_dense, 1.0);
    let mut s_ext = Mat::<f64>::zeros(k + 1, k + 1);
    for j in 0..k {
        for i in 0..=j {
            s_ext[(i, j)] = s0[(i, j)];
        }
    }
    for i in 0..k {
        s_ext[(i, k)] = ws.p.a[i].inner(&c_dense);
    }
    s_ext[(k, k)] = inner_blocks(&c_dense, &c_dense);
    let s_ext_chol = factor_schur(&s_ext)?;
    for rel_cut in [1e-6f64, 1e-4, 1e-2, 1e-8] {
        if let Some(result) = polish_pair_at(ws, x, y, z, opts, rel_cut, &s_ext_chol) {
            return Some(result);
        }
    }
    None
}

fn polish_pair_at(
    ws: &Workspace,
    x: &[Mat<f64>],
    y_anchor: &[f64],
    z: &[Mat<f64>],
    opts: &SdpOptions,
    rel_cut: f64,
    s_ext_chol: &faer::linalg::solvers::Llt<f64>,
) -> Option<PolishedPair> {
    let k = ws.p.num_constraints();
    if k == 0 {
        return None;
    }
    // face bases: eigenvectors of Z with small eigenvalues
    let mut bases: Vec<Mat<f64>> = Vec::with_capacity(z.len());
    let mut dims: Vec<usize> = Vec::with_capacity(z.len());
    for zb in z {
        let n = zb.nrows();
        if n == 0 {
            bases.push(Mat::zeros(0, 0));
            dims.push(0);
            continue;
        }
        let eig = zb.self_adjoint_eigen(Side::Lower).ok()?;
        let zmax = (0..n).map(|i| eig.S()[i].abs()).fold(0.0f64, f64::max);
        let cut = rel_cut * (1.0 + zmax);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.S()[i] <= cut).collect();
        let q = Mat::<f64>::from_fn(n, keep.len(), |i, c| eig.U()[(i, keep[c])]);
        dims.push(keep.len());
        bases.push(q);
    }
    let unknowns: usize = dims.iter().map(|&r| r * (r + 1) / 2).sum();
    let total_rows: usize = ws.sizes.iter().zip(&dims).map(|(&n, &r)| n * r).sum();
    if unknowns == 0 || unknowns > 4000 || total_rows == 0 {
        return None;
    }

    // dual side first: zero the slack on the face while staying close to
    // the anchor vector, so the slack stays near the psd cone
    let mut e2 = Mat::<f64>::zeros(total_rows, k);
    let mut rhs2 = Mat::<f64>::zeros(total_rows, 1);
    let mut row0 = 0usize;
    for (blk, q) in bases.iter().enumerate() {
        let n = ws.sizes[blk];
        let r = dims[blk];
        if r == 0 {
            continue;
        }
        for (j, aj) in ws.p.a.iter().enumerate() {
            for &(a, b, v) in &aj.blocks[blk] {
                let (a, b) = (a as usize, b as usize);
                for col in 0..r {
                    e2[(row0 + a * r + col, j)] += v * q[(b, col)];
                    if a != b {
                        e2[(row0 + b * r + col, j)] += v * q[(a, col)];
                    }
                }
            }
        }
        for &(a, b, v) in &ws.p.c.blocks[blk] {
            let (a, b) = (a as usize, b as usize);
            for col in 0..r {
                rhs2[(row0 + a * r + col, 0)] += v * q[(b, col)];
                if a != b {
                    rhs2[(row0 + b * r + col, 0)] += v * q[(a, col)];
                }
            }
        }
        row0 += n * r;
    }
    let mut normal2 = e2.transpose() * &e2;
    let ridge2 = 1e-8
        * (0..k)
            .map(|i| normal2[(i, i)])
            .fold(0.0f64, f64::max)
            .max(1e-300);
    for i in 0..k {
        normal2[(i, i)] += ridge2;
    }
    let mut et_b2 = e2.transpose() * &rhs2;
    for i in 0..k {
        et_b2[(i, 0)] += ridge2 * y_anchor[i];
    }
    let chol2 = normal2.llt(Side::Lower).ok()?;
    let y_mat = chol2.solve(&et_b2);
    let y_pol: Vec<f64> = (0..k).map(|i| y_mat[(i, 0)]).collect();
    let z_pol = ws.combine(&y_pol, 1.0);
    // the scale factor is capped: a diverging iterate must not get its
    // infeasibility absorbed into a huge relative tolerance
    let z_scale = (1.0 + max_abs(&z_pol)).min(1e2);
    let z_min = z_pol.iter().map(min_eig).fold(f64::INFINITY, f64::min);
    let dobj: f64 = ws.p.b.iter().zip(&y_pol).map(|(b, y)| b * y).sum();
    if z_min < -10.0 * opts.feas_tol * z_scale {
        return None;
    }

    // primal side: face-restricted anchored least squares, then a
    // minimum-norm correction hitting the constraints and the polished
    // dual value exactly
    let mut e = Mat::<f64>::zeros(k, unknowns);
    for i in 0..k {
        let mut col = 0usize;
        for (blk, q) in bases.iter().enumerate() {
            let r = dims[blk];
            if r == 0 {
                continue;
            }
            let mut aq = Mat::<f64>::zeros(r, r);
            for &(a, b, v) in &ws.p.a[i].blocks[blk] {
                let (a, b) = (a as usize, b as usize);
                for s in 0..r {
                    for t in 0..r {
                        let mut acc = v * q[(a, s)] * q[(b, t)];
                        if a != b {
                            acc += v * q[(b, s)] * q[(a, t)];
                        }
                        aq[(s, t)] += acc;
                    }
                }
            }
            for t in 0..r {
                for s in 0..=t {
                    let w = if s == t { aq[(s, s)] } else { aq[(s, t)] + aq[(t, s)] };
                    e[(i, col)] = w;
                    col += 1;
                }
            }
        }
        debug_assert_eq!(col, unknowns);
    }
    let mut m0 = Mat::<f64>::zeros(unknowns, 1);
    {
        let mut col = 0usize;
        for (blk, q) in bases.iter().enumerate() {
            let r = dims[blk];
            if r == 0 {
                continue;
            }
            let xf = q.transpose() * &x[blk] * q;
            for t in 0..r {
                for s in 0..=t {
                    m0[(col, 0)] = 0.5 * (xf[(s, t)] + xf[(t, s)]);
                    col += 1;
                }
            }
        }
    }
    let bvec = Mat::<f64>::from_fn(k, 1, |i, _| ws.p.b[i]);
    let mut normal = e.transpose() * &e;
    let ridge = 1e-10
        * (0..unknowns)
            .map(|i| normal[(i, i)])
            .fold(0.0f64, f64::max)
            .max(1e-300);
    for i in 0..unknowns {
        normal[(i, i)] += ridge;
    }
    let mut rhs_m = e.transpose() * &bvec;
    for i in 0..unknowns {
        rhs_m[(i, 0)] += ridge * m0[(i, 0)];
    }
    let chol = normal.llt(Side::Lower).ok()?;
    let m_vec = chol.solve(&rhs_m);

    // rebuild the blocks, clipping tiny negative face eigenvalues
    let mut x_pol: Vec<Mat<f64>> = Vec::with_capacity(ws.sizes.len());
    let mut col = 0usize;
    for (blk, q) in bases.iter().enumerate() {
        let n = ws.sizes[blk];
        let r = dims[blk];
        let mut mface = Mat::<f64>::zeros(r, r);
        for t in 0..r {
            for s in 0..=t {
                let v = m_vec[(col, 0)];
                mface[(s, t)] = v;
                mface[(t, s)] = v;
                col += 1;
            }
        }
        if r == 0 {
            x_pol.push(Mat::zeros(n, n));
            continue;
        }
        let eig = mface.self_adjoint_eigen(Side::Lower).ok()?;
        let scale = (0..r).map(|i| eig.S()[i].abs()).fold(0.0f64, f64::max);
        let lam_min = (0..r).map(|i| eig.S()[i]).fold(f64::INFINITY, f64::min);
        if lam_min < -1e-7 * (1.0 + scale) {
            return None;
        }
        let mut clipped = Mat::<f64>::zeros(r, r);
        for t in 0..r {
            let lam = eig.S()[t].max(0.0);
            for s in 0..r {
                for u in 0..r {
                    clipped[(s, u)] += lam * eig.U()[(s, t)] * eig.U()[(u, t)];
                }
            }
        }
        let mut xb = q * &clipped * q.transpose();
        symmetrize(&mut xb);
        x_pol.push(xb);
    }

    // minimum-norm correction over the full space, targeting both the
    // constraint values and the polished dual objective
    {
        let ax = ws.apply_a(&x_pol);
        let pobj_pre = ws.p.c.inner(&x_pol);
        let resid = Mat::<f64>::from_fn(k + 1, 1, |i, _| {
            if i < k {
                ws.p.b[i] - ax[i]
            } else {
                dobj - pobj_pre
            }
        });
        let lam = s_ext_chol.solve(&resid);
        let lam_vec: Vec<f64> = (0..k).map(|i| lam[(i, 0)]).collect();
        let corr = ws.combine(&lam_vec, -lam[(k, 0)]);
        axpy(&mut x_pol, &corr, 1.0);
    }
    let ax = ws.apply_a(&x_pol);
    let prif = ws
        .p
        .b
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a).abs())
        .fold(0.0f64, f64::max);
    let x_scale = (1.0 + max_abs(&x_pol)).min(1e2);
    let x_min = x_pol.iter().map(min_eig).fold(f64::INFINITY, f64::min);
    let pobj = ws.p.c.inner(&x_pol);
    if prif > opts.feas_tol || x_min < -10.0 * opts.feas_tol * x_scale {
        return None;
    }
    if (pobj - dobj).abs() > opts.gap_tol * (1.0 + pobj.abs()) {
        return None;
    }
    Some((x_pol, y_pol, z_pol))
}

pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    // normalize constraints to unit Frobenius norm; the dual vector is
    // rescaled on the way out
    let scales: Vec<f64> = p
        .a
        .iter()
        .map(|aj| {
            let n = aj.frob_norm();
            if n > 1e-300 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    if scales.iter().any(|&s| s != 1.0) {
        let scaled = SdpProblem {
            blocks: p.blocks.clone(),
            c: p.c.clone(),
            a: p
                .a
                .iter()
                .zip(&scales)
                .map(|(aj, &s)| SparseSymMat {
                    blocks: aj
                        .blocks
                        .iter()
                        .map(|list| list.iter().map(|&(i, j, v)| (i, j, v * s)).collect())
                        .collect(),
                })
                .collect(),
            b: p.b.iter().zip(&scales).map(|(b, &s)| b * s).collect(),
        };
        let mut sol = solve_normalized(&scaled, opts);
        for (yj, &s) in sol.y.iter_mut().zip(&scales) {
            *yj *= s;
        }
        // residuals against the caller's data
        let sizes: Vec<usize> = p.blocks.iter().map(|b| b.size()).collect();
        let ws = Workspace { p, sizes };
        let ax = ws.apply_a(&sol.x);
        sol.primal_feas = p
            .b
            .iter()
            .zip(&ax)
            .map(|(b, a)| (b - a).abs())
            .fold(0.0f64, f64::max);
        let mut rd = ws.combine(&sol.y, 1.0);
        axpy(&mut rd, &sol.z, -1.0);
        sol.dual_feas = max_abs(&rd);
        sol.dual_value = p.b.iter().zip(&sol.y).map(|(b, y)| b * y).sum();
        sol.gap = (sol.primal_value - sol.dual_value).abs();
        return sol;
    }
    solve_normalized(p, opts)
}

fn solve_normalized(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let sizes: Vec<usize> = p.blocks.iter().map(|b| b.size()).collect();
    let total_dim: usize = sizes.iter().sum();
    let ws = Workspace { p, sizes };
    let k = p.num_constraints();

    // no constraints: the optimum is 0 at X = 0 when C has no positive
    // eigenvalue direction, otherwise the primal is unbounded
    if k == 0 {
        let mut c_dense = ws.zeros();
        p.c.add_scaled_to(&mut c_dense, 1.0);
        let lam_max = c_dense
            .iter()
            .filter(|cb| cb.nrows() > 0)
            .map(|cb| -min_eig(&(-cb)))
            .fold(0.0f64, f64::max);
        let status = if lam_max > 1e-10 {
            SdpStatus::DualInfeasible
        } else {
            SdpStatus::Optimal
        };
        let z = ws.combine(&[], 1.0);
        return SdpSolution {
            status,
            x: ws.zeros(),
            y: Vec::new(),
            z,
            primal_value: 0.0,
            dual_value: 0.0,
            gap: 0.0,
            iterations: 0,
            primal_feas: 0.0,
            dual_feas: 0.0,
            trace: Vec::new(),
        };
    }

    let n_f = total_dim.max(1) as f64;
    let norm_b = p.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm_c = p.c.frob_norm();
    let max_a_norm = p.a.iter().map(|a| a.frob_norm()).fold(0.0, f64::max);
    let xi = (10.0f64)
        .max(n_f.sqrt())
        .max(
            p.a.iter()
                .zip(&p.b)
                .map(|(a, b)| (1.0 + b.abs()) / (1.0 + a.frob_norm()))
                .fold(0.0, f64::max),
        )
        .min(1e8);
    let eta = (10.0f64)
        .max(n_f.sqrt())
        .max(norm_c / n_f.sqrt())
        .max(max_a_norm)
        .min(1e8);

    let mut x = ws.identity(xi);
    let mut y = vec![0.0f64; k];
    let mut z = ws.identity(eta);

    let mut schur = Mat::<f64>::zeros(k, k);
    let mut trace = Vec::new();
    let mut status = SdpStatus::IterationLimit;
    let mut iterations = 0;
    let mut consecutive_tiny_steps = 0usize;
    let mut best: Option<BestIterate> = None;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let ax = ws.apply_a(&x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let prif = rp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Rd = sum y A - C - Z
        let mut rd = ws.combine(&y, 1.0);
        axpy(&mut rd, &z, -1.0);
        let duif = max_abs(&rd);

        let pobj = p.c.inner(&x);
        let dobj: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let mu = inner_blocks(&x, &z) / n_f;
        trace.push(IterStat {
            primal_obj: pobj,
            dual_obj: dobj,
            primal_feas: prif,
            dual_feas: duif,
            mu,
        });

        // feasibility violations corrupt the objective values at roughly
        // norm(y) times their size, so they weigh heavier than the gap
        let merit = (1e2 * prif / (1.0 + norm_b))
            .max(1e2 * duif / (1.0 + norm_c))
            .max((pobj - dobj).abs() / (1.0 + pobj.abs()));
        if best.as_ref().is_none_or(|b| merit < b.merit) {
            best = Some(BestIterate {
                merit,
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
            });
        }

        let gap_ok = (pobj - dobj).abs() <= opts.gap_tol * (1.0 + pobj.abs());
        let feas_ok = prif <= opts.feas_tol && duif <= opts.feas_tol * (1.0 + p.c.max_abs());
        if gap_ok && feas_ok {
            status = SdpStatus::Optimal;
            break;
        }

        // divergence and improving-ray classification
        if iter >= 5 {
            if dobj < -opts.divergence_threshold {
                status = SdpStatus::PrimalInfeasible;
                break;
            }
            if pobj > opts.divergence_threshold {
                status = SdpStatus::DualInfeasible;
                break;
            }
            // the dual objective diverging below any problem scale,
            // along a direction that is an approximate improving ray,
            // certifies primal infeasibility; degenerate stalls grow
            // norm(y) too but keep the objective finite
            let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm_y > 1e4 && dobj < -1e3 * (1.0 + norm_b) {
                let yhat: Vec<f64> = y.iter().map(|v| v / norm_y).collect();
                let ray = ws.combine(&yhat, 0.0);
                let by: f64 = p.b.iter().zip(&yhat).map(|(b, y)| b * y).sum();
                let lam = ray.iter().map(min_eig).fold(f64::INFINITY, f64::min);
                let scale = max_abs(&ray).max(1e-12);
                if lam >= -opts.ray_tol * scale && by < 0.0 {
                    status = SdpStatus::PrimalInfeasible;
                    break;
                }
            }
            let norm_x = frob(&x);
            if norm_x > 1e7 * n_f {
                let axn = ax.iter().fold(0.0f64, |m, v| m.max(v.abs())) / norm_x;
                let cx = pobj / norm_x;
                if axn <= opts.ray_tol && cx > opts.ray_tol {
                    status = SdpStatus::DualInfeasible;
                    break;
                }
            }
        }

        let scalings: Vec<Scaling> = match x
            .iter()
            .zip(&z)
            .map(|(xb, zb)| nt_scaling(xb, zb))
            .collect::<Option<_>>()
        {
            Some(v) => v,
            None => {
                status = SdpStatus::NumericalTrouble;
                break;
            }
        };
        let w: Vec<Mat<f64>> = scalings.iter().map(|s| s.w.clone()).collect();

        form_schur(&ws, &w, &mut schur);
        let schur_chol = match factor_schur(&schur) {
            Some(f) => f,
            None => {
                status = SdpStatus::NumericalTrouble;
                break;
            }
        };


        // W Rd W is shared between predictor and corrector
        let wrdw: Vec<Mat<f64>> = scalings
            .iter()
            .zip(&rd)
            .map(|(s, rb)| {
                let mut m = &s.w * rb * &s.w;
                symmetrize(&mut m);
                m
            })
            .collect();

        // solves the Newton system for a scaled target `D`:
        // dXhat + dZhat = D, A(dX) = rp, sum dy A - dZ = -Rd
        let solve_direction = |d_hat: &[Mat<f64>]| -> Direction {
            let rc: Vec<Mat<f64>> = scalings
                .iter()
                .zip(d_hat)
                .map(|(s, dh)| s.unscale(dh))
                .collect();
            let mut m = rc.clone();
            axpy(&mut m, &wrdw, -1.0);
            let am = ws.apply_a(&m);
            let rhs = Mat::<f64>::from_fn(k, 1, |i, _| am[i] - rp[i]);
            let mut dy_mat = schur_chol.solve(&rhs);
            // one round of iterative refinement on the Schur solve
            {
                let mut resid: Vec<f64> = (0..k).map(|i| rhs[(i, 0)]).collect();
                let dyv: Vec<f64> = (0..k).map(|i| dy_mat[(i, 0)]).collect();
                for j in 0..k {
                    let col = &schur.col_as_slice(j)[..j + 1];
                    let dj = dyv[j];
                    let mut acc_j = 0.0f64;
                    for i in 0..j {
                        resid[i] -= col[i] * dj;
                        acc_j += col[i] * dyv[i];
                    }
                    resid[j] -= acc_j + col[j] * dj;
                }
                let resid_mat = Mat::<f64>::from_fn(k, 1, |i, _| resid[i]);
                let corr = schur_chol.solve(&resid_mat);
                for i in 0..k {
                    dy_mat[(i, 0)] += corr[(i, 0)];
                }
            }
            let dy: Vec<f64> = (0..k).map(|i| dy_mat[(i, 0)]).collect();
            // dZ = sum dy A + Rd
            let mut dz = ws.combine(&dy, 0.0);
            axpy(&mut dz, &rd, 1.0);
            let dz_hat: Vec<Mat<f64>> = scalings
                .iter()
                .zip(&dz)
                .map(|(s, dzb)| s.scale_z(dzb))
                .collect();
            // dXhat = D - dZhat, dX = R dXhat R^T
            let dx_hat: Vec<Mat<f64>> = d_hat
                .iter()
                .zip(&dz_hat)
                .map(|(dh, dzh)| {
                    let mut m = dh.clone();
                    for j in 0..m.ncols() {
                        for i in 0..m.nrows() {
                            m[(i, j)] -= dzh[(i, j)];
                        }
                    }
                    m
                })
                .collect();
            let dx: Vec<Mat<f64>> = scalings
                .iter()
                .zip(&dx_hat)
                .map(|(s, dxh)| s.unscale(dxh))
                .collect();
            Direction {
                dy,
                dx,
                dz,
                dx_hat,
                dz_hat,
            }
        };

        let steps = |dir: &Direction| -> (f64, f64) {
            let ap = scalings
                .iter()
                .zip(&dir.dx_hat)
                .map(|(s, dh)| max_step_scaled(&s.v, dh))
                .fold(f64::INFINITY, f64::min);
            let ad = scalings
                .iter()
                .zip(&dir.dz_hat)
                .map(|(s, dh)| max_step_scaled(&s.v, dh))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // predictor: D = -V
        let d_aff: Vec<Mat<f64>> = scalings
            .iter()
            .map(|s| {
                let n = s.v.len();
                Mat::<f64>::from_fn(n, n, |i, j| if i == j { -s.v[i] } else { 0.0 })
            })
            .collect();
        let aff = solve_direction(&d_aff);
        let (ap_aff_max, ad_aff_max) = steps(&aff);
        let ap_aff = ap_aff_max.min(1.0);
        let ad_aff = ad_aff_max.min(1.0);

        let mut x_try = x.clone();
        axpy(&mut x_try, &aff.dx, ap_aff);
        let mut z_try = z.clone();
        axpy(&mut z_try, &aff.dz, ad_aff);
        let mu_aff = inner_blocks(&x_try, &z_try) / n_f;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-10, 1.0);

        // corrector: D = sigma mu V^-1 - V - E, where E solves the
        // Lyapunov equation H(E V) = H(dXhat_aff dZhat_aff) entrywise in
        // the diagonal basis
        let d_corr: Vec<Mat<f64>> = scalings
            .iter()
            .zip(aff.dx_hat.iter().zip(&aff.dz_hat))
            .map(|(s, (dxh, dzh))| {
                let n = s.v.len();
                let prod = dxh * dzh;
                Mat::<f64>::from_fn(n, n, |i, j| {
                    let khat = 0.5 * (prod[(i, j)] + prod[(j, i)]);
                    let e = 2.0 * khat / (s.v[i] + s.v[j]);
                    let center = if i == j {
                        sigma * mu / s.v[i] - s.v[i]
                    } else {
                        0.0
                    };
                    center - e
                })
            })
            .collect();
        let mut dir = solve_direction(&d_corr);
        let (apm, adm) = steps(&dir);
        let mut ap = (opts.step_frac * apm).min(1.0);
        let mut ad = (opts.step_frac * adm).min(1.0);

        // fall back to a plain centering direction when the corrector
        // step collapses
        if ap.min(ad) < 0.01 {
            let sigma_c = 0.8f64;
            let d_center: Vec<Mat<f64>> = scalings
                .iter()
                .map(|s| {
                    let n = s.v.len();
                    Mat::<f64>::from_fn(n, n, |i, j| {
                        if i == j {
                            sigma_c * mu / s.v[i] - s.v[i]
                        } else {
                            0.0
                        }
                    })
                })
                .collect();
            let dir2 = solve_direction(&d_center);
            let (ap2m, ad2m) = steps(&dir2);
            let ap2 = (opts.step_frac * ap2m).min(1.0);
            let ad2 = (opts.step_frac * ad2m).min(1.0);
            if ap2.min(ad2) > ap.min(ad) {
                dir = dir2;
                ap = ap2;
                ad = ad2;
            }
        }

        if ap.min(ad) < 1e-8 {
            consecutive_tiny_steps += 1;
            if consecutive_tiny_steps >= 5 {
                status = SdpStatus::NumericalTrouble;
                break;
            }
        } else {
            consecutive_tiny_steps = 0;
        }

        axpy(&mut x, &dir.dx, ap);
        for (yj, dyj) in y.iter_mut().zip(&dir.dy) {
            *yj += ad * dyj;
        }
        axpy(&mut z, &dir.dz, ad);
    }

    // on a degenerate stall, try to recover an optimal pair on the face
    // predicted by the dual slack, first from the last iterate and then
    // from the best one seen
    if matches!(
        status,
        SdpStatus::IterationLimit | SdpStatus::NumericalTrouble
    ) {
        // polish only when the dual value has settled: a still-drifting
        // objective signals slow divergence (weak infeasibility), where
        // tolerance-level certificates are meaningless
        let dual_settled = {
            let n = trace.len();
            if n < 8 {
                false
            } else {
                let last = trace[n - 1].dual_obj;
                let earlier = trace[n - 1 - (n / 4).max(2)].dual_obj;
                // weakly infeasible programs drift by orders of magnitude
                // here; genuinely stalled ones move at tolerance level
                (last - earlier).abs() <= 1e-4 * (1.0 + last.abs())
            }
        };
        let polish_feasible = dual_settled && k <= 2500 && total_dim <= 600;
        let polished = if polish_feasible {
            polish_pair(&ws, &x, &y, &z, opts).or_else(|| {
                best.as_ref()
                    .and_then(|b| polish_pair(&ws, &b.x, &b.y, &b.z, opts))
            })
        } else {
            None
        };
        if let Some((x_pol, y_pol, z_pol)) = polished {
            x = x_pol;
            y = y_pol;
            z = z_pol;
            status = SdpStatus::Optimal;
        } else if let Some(b) = best.take() {
            x = b.x;
            y = b.y;
            z = b.z;
        }
    }

    let ax = ws.apply_a(&x);
    let primal_feas = p
        .b
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a).abs())
        .fold(0.0f64, f64::max);
    let mut rd = ws.combine(&y, 1.0);
    axpy(&mut rd, &z, -1.0);
    let dual_feas = max_abs(&rd);
    let primal_value = p.c.inner(&x);
    let dual_value = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();

    SdpSolution {
        status,
        x,
        y,
        z,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        iterations,
        primal_feas,
        dual_feas,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Block, SparseSymMat};
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn solve_default(p: &SdpProblem) -> SdpSolution {
        solve(p, &SdpOptions::default())
    }

    #[test]
    fn scalar_trace_problem() {
        // max <-I, X> s.t. <I, X> = 1 on a 1x1 block: X = [1], value -1
        let p = SdpProblem::new(
            vec![Block::Psd(1)],
            SparseSymMat::from_entries(1, [(0usize, 0u32, 0u32, -1.0)]),
            vec![SparseSymMat::from_entries(1, [(0usize, 0u32, 0u32, 1.0)])],
            vec![1.0],
        )
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.primal_value + 1.0).abs() < 1e-7,
            "value {}",
            sol.primal_value
        );
        assert!((sol.x[0][(0, 0)] - 1.0).abs() < 1e-6);
        assert!(sol.primal_feas <= 1e-8);
        assert!(
            (sol.primal_value - sol.dual_value).abs() <= 1e-8 * (1.0 + sol.primal_value.abs())
        );
    }

    /// Builds a random problem with a known optimal pair: X* and Z* share
    /// an eigenbasis with complementary supports, so the primal-dual pair
    /// (X*, y*, Z*) satisfies the optimality conditions exactly.
    fn constructed_optimum(seed: u64, n: usize, k: usize) -> (SdpProblem, f64) {
        let mut rng = StdRng::seed_from_u64(seed);
        // orthogonal basis via Gram-Schmidt on a random matrix
        let mut q = Mat::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        for j in 0..n {
            for prev in 0..j {
                let dot: f64 = (0..n).map(|i| q[(i, j)] * q[(i, prev)]).sum();
                for i in 0..n {
                    let sub = dot * q[(i, prev)];
                    q[(i, j)] -= sub;
                }
            }
            let norm: f64 = (0..n).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
            for i in 0..n {
                q[(i, j)] /= norm;
            }
        }
        let r = (n / 2).max(1);
        let mut rank1 = |m: &mut Mat<f64>, t: usize, lam: f64| {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += lam * q[(i, t)] * q[(j, t)];
                }
            }
        };
        let mut xstar = Mat::<f64>::zeros(n, n);
        let mut zstar = Mat::<f64>::zeros(n, n);
        {
            let lams: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
            for (t, lam) in lams.iter().enumerate() {
                if t < r {
                    rank1(&mut xstar, t, *lam);
                } else {
                    rank1(&mut zstar, t, *lam);
                }
            }
        }
        let mut a_mats = Vec::new();
        let mut b = Vec::new();
        let mut ystar = Vec::new();
        let mut az_sum = Mat::<f64>::zeros(n, n);
        for _ in 0..k {
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if rng.random::<f64>() < 0.6 {
                        entries.push((0usize, i as u32, j as u32, rng.random::<f64>() - 0.5));
                    }
                }
            }
            let aj = SparseSymMat::from_entries(1, entries);
            let mut dense = vec![Mat::<f64>::zeros(n, n)];
            aj.add_scaled_to(&mut dense, 1.0);
            let yj = rng.random::<f64>() - 0.5;
            for i in 0..n {
                for j in 0..n {
                    az_sum[(i, j)] += yj * dense[0][(i, j)];
                }
            }
            b.push(aj.inner(std::slice::from_ref(&xstar)));
            ystar.push(yj);
            a_mats.push(aj);
        }
        // C = sum y* A - Z*
        let mut c_entries: Vec<(usize, u32, u32, f64)> = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = az_sum[(i, j)] - zstar[(i, j)];
                if v != 0.0 {
                    c_entries.push((0usize, i as u32, j as u32, v));
                }
            }
        }
        let c = SparseSymMat::from_entries(1, c_entries);
        let opt: f64 = b.iter().zip(&ystar).map(|(b, y)| b * y).sum();
        let p = SdpProblem::new(vec![Block::Psd(n)], c, a_mats, b).unwrap();
        (p, opt)
    }

    #[test]
    fn recovers_constructed_optima() {
        for (seed, n, k) in [(1u64, 4, 5), (2, 6, 9), (3, 8, 12), (4, 5, 3), (5, 10, 16)] {
            let (p, opt) = constructed_optimum(seed, n, k);
            let sol = solve_default(&p);
            assert_eq!(sol.status, SdpStatus::Optimal, "seed {seed}: {:?}", sol.status);
            let err = (sol.primal_value - opt).abs() / (1.0 + opt.abs());
            assert!(err < 1e-6, "seed {seed}: value {} vs {}", sol.primal_value, opt);
            let derr = (sol.dual_value - opt).abs() / (1.0 + opt.abs());
            assert!(derr < 1e-6, "seed {seed}: dual {} vs {}", sol.dual_value, opt);
        }
    }

    #[test]
    fn weak_duality_along_feasible_iterates() {
        let (p, _) = constructed_optimum(7, 6, 8);
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        let scale = 1.0 + p.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for stat in &sol.trace {
            if stat.primal_feas < 1e-9 && stat.dual_feas < 1e-9 {
                // maximization primal stays below minimization dual
                assert!(
                    stat.primal_obj <= stat.dual_obj + 1e-12 * scale + 1e-9,
                    "primal {} above dual {}",
                    stat.primal_obj,
                    stat.dual_obj
                );
            }
        }
    }

    #[test]
    fn classifies_primal_infeasible() {
        // <I, X> = -1 cannot hold for psd X
        let p = SdpProblem::new(
            vec![Block::Psd(3)],
            SparseSymMat::zero(1),
            vec![SparseSymMat::from_entries(
                1,
                [(0usize, 0u32, 0u32, 1.0), (0, 1, 1, 1.0), (0, 2, 2, 1.0)],
            )],
            vec![-1.0],
        )
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::PrimalInfeasible);
    }

    #[test]
    fn classifies_rotated_infeasible() {
        // <P, X> = -1 with P psd
        let p_mat = SparseSymMat::from_entries(
            1,
            [
                (0usize, 0u32, 0u32, 2.0),
                (0, 0, 1, 1.0),
                (0, 1, 1, 2.0),
                (0, 2, 2, 0.5),
            ],
        );
        let p = SdpProblem::new(
            vec![Block::Psd(3)],
            SparseSymMat::zero(1),
            vec![p_mat],
            vec![-1.0],
        )
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::PrimalInfeasible);
    }

    #[test]
    fn classifies_dual_infeasible() {
        // max <I, X> s.t. X_{00} = 1: X_{11} escapes to infinity
        let p = SdpProblem::new(
            vec![Block::Psd(2)],
            SparseSymMat::from_entries(1, [(0usize, 0u32, 0u32, 1.0), (0, 1, 1, 1.0)]),
            vec![SparseSymMat::from_entries(1, [(0usize, 0u32, 0u32, 1.0)])],
            vec![1.0],
        )
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::DualInfeasible);
    }

    #[test]
    fn multi_block_with_diagonal() {
        // max -(x11 + d1 + d2) s.t. x11 + d1 = 1, x11 + d2 = 1; the
        // objective equals x11 - 2, maximized at x11 = 1, d = 0
        let c = SparseSymMat::from_entries(
            2,
            [
                (0usize, 0u32, 0u32, -1.0),
                (1, 0, 0, -1.0),
                (1, 1, 1, -1.0),
            ],
        );
        let a1 = SparseSymMat::from_entries(2, [(0usize, 0u32, 0u32, 1.0), (1, 0, 0, 1.0)]);
        let a2 = SparseSymMat::from_entries(2, [(0usize, 0u32, 0u32, 1.0), (1, 1, 1, 1.0)]);
        let p = SdpProblem::new(
            vec![Block::Psd(2), Block::Diag(2)],
            c,
            vec![a1, a2],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.primal_value + 1.0).abs() < 1e-6,
            "value {}",
            sol.primal_value
        );
    }

    #[test]
    fn solution_invariants_on_optimal() {
        let (p, _) = constructed_optimum(11, 7, 10);
        let opts = SdpOptions::default();
        let sol = solve(&p, &opts);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.primal_feas <= opts.feas_tol);
        assert!(
            (sol.primal_value - sol.dual_value).abs()
                <= opts.gap_tol * (1.0 + sol.primal_value.abs())
        );
        for xb in &sol.x {
            assert!(min_eig(xb) >= -1e-8);
        }
        for zb in &sol.z {
            assert!(min_eig(zb) >= -1e-8);
        }
    }
}
