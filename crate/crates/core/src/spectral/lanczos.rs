//! Memory-bounded Lanczos for the lowest eigenpair of a symmetric operator.
//!
//! The solver keeps an explicit orthonormal basis and reorthogonalizes every
//! new Krylov vector against all of it (two passes of classical
//! Gram–Schmidt), so the projected matrix is the exact Rayleigh quotient
//! `V^T A V` up to rounding. When the basis reaches `max_basis` vectors it is
//! thick-restarted: the `keep` lowest Ritz vectors are formed in place and
//! the current residual direction is appended, which preserves the Krylov
//! relation `A V = V T + w e^T`.
//!
//! Vectors listed in `deflate` are projected out of the start vector and of
//! every operator application, so the solver finds the lowest eigenpair of
//! `P A P` on the orthogonal complement of their span. This gives excited
//! states (deflate the ground state) and the short-path energy (deflate the
//! uniform superposition) with the same code path.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A symmetric linear operator on `R^dim`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `out = A v`.
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// What "converged" means for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Residual norm `||A y - theta y|| <= tol`; needed when the vector is used.
    Vector,
    /// Eigenvalue error estimate `r^2 / gap <= tol` (or `r <= tol`).
    Value,
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    pub target: Target,
    pub max_matvecs: usize,
    pub max_basis: usize,
    pub keep: usize,
}

impl LanczosOptions {
    /// Defaults scaled to the problem dimension. Reorthogonalization is
    /// memory-bound and grows linearly with the basis, so a short basis
    /// (at most 16 vectors, fewer if they would exceed about 2 GB) with
    /// frequent thick restarts is faster than a long one.
    pub fn for_dim(dim: usize, tol: f64, target: Target) -> Self {
        let per_vector = 8 * dim.max(1);
        let max_basis = (2_000_000_000 / per_vector).clamp(12, 16).min(dim.max(2));
        Self { tol, target, max_matvecs: 20_000, max_basis, keep: (max_basis / 3).max(2).min(max_basis - 1) }
    }
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// True residual norm of the returned pair.
    pub residual: f64,
    pub matvecs: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Fixed-order blocked summation: deterministic and a little more accurate.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(deflate: &[&[f64]], w: &mut [f64]) {
    for _ in 0..2 {
        for d in deflate {
            let c = dot(d, w);
            axpy(-c, d, w);
        }
    }
}

/// Lowest eigenpair of `A` restricted to the complement of `deflate`
/// (which must be orthonormal).
pub fn lowest_eigenpair<A: LinearOperator + ?Sized>(
    a: &A,
    deflate: &[&[f64]],
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<EigenPair> {
    let dim = a.dim();
    if start.len() != dim {
        return Err(Error::InvalidParameter("start vector has wrong dimension".into()));
    }
    let m_max = opts.max_basis.max(2).min(dim.max(2));
    let keep = opts.keep.clamp(1, m_max - 1);

    let mut q0 = start.to_vec();
    project_out(deflate, &mut q0);
    let nrm = norm(&q0);
    if !(nrm > 1e-300) {
        return Err(Error::InvalidParameter("start vector lies in the deflated subspace".into()));
    }
    q0.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut t = vec![vec![0.0f64; m_max]; m_max];
    let mut w = vec![0.0f64; dim];
    let mut matvecs = 0usize;

    loop {
        let j = basis.len() - 1;
        a.apply(&basis[j], &mut w);
        matvecs += 1;
        project_out(deflate, &mut w);
        // Two passes of classical Gram–Schmidt; the accumulated coefficients
        // are the entries <q_i, A q_j> of the projected matrix.
        let coeffs = cgs_twice(deflate, &basis, &mut w);
        for (i, &c) in coeffs.iter().enumerate() {
            t[i][j] = c;
            t[j][i] = c;
        }
        let beta = norm(&w);
        let size = j + 1;
        let tm = DMatrix::from_fn(size, size, |r, c| t[r][c]);
        let eig = SymmetricEigen::new(tm);
        let order = sorted_indices(eig.eigenvalues.as_slice());
        let theta0 = eig.eigenvalues[order[0]];
        let s_last = eig.eigenvectors[(j, order[0])];
        let estimate = beta * s_last.abs();
        // Ritz gap; only trusted once a few Ritz values exist.
        let gap = if size > 2 { eig.eigenvalues[order[1]] - theta0 } else { 0.0 };

        let invariant = beta <= 1e-14 * (1.0 + theta0.abs()) || size == dim;
        let converged = match opts.target {
            Target::Vector => estimate <= opts.tol,
            Target::Value => estimate <= opts.tol || (gap > 0.0 && estimate * estimate <= 0.1 * opts.tol * gap),
        };
        if converged || invariant {
            let coef: Vec<f64> = (0..size).map(|i| eig.eigenvectors[(i, order[0])]).collect();
            let mut y = vec![0.0f64; dim];
            for (q, &c) in basis.iter().zip(&coef) {
                axpy(c, q, &mut y);
            }
            project_out(deflate, &mut y);
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            a.apply(&y, &mut w);
            matvecs += 1;
            project_out(deflate, &mut w);
            let value = dot(&y, &w);
            axpy(-value, &y, &mut w);
            let residual = norm(&w);
            let ok = match opts.target {
                Target::Vector => residual <= 10.0 * opts.tol,
                Target::Value => residual <= 10.0 * opts.tol || residual * residual <= opts.tol * gap.max(0.0),
            };
            if ok || invariant {
                return Ok(EigenPair { value, vector: y, residual, matvecs });
            }
            // The recurrence estimate was optimistic (loss of orthogonality);
            // restart from the assembled Ritz vector.
            basis.clear();
            basis.push(y);
            for row in t.iter_mut() {
                row.iter_mut().for_each(|x| *x = 0.0);
            }
            if matvecs >= opts.max_matvecs {
                return Err(Error::NotConverged { iterations: matvecs, residual });
            }
            continue;
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NotConverged { iterations: matvecs, residual: estimate });
        }

        if size == m_max {
            // Thick restart with the `keep` lowest Ritz vectors.
            let s: Vec<Vec<f64>> =
                (0..keep).map(|c| (0..size).map(|r| eig.eigenvectors[(r, order[c])]).collect()).collect();
            rotate_in_place(&mut basis, &s);
            basis.truncate(keep);
            for row in t.iter_mut() {
                row.iter_mut().for_each(|x| *x = 0.0);
            }
            for c in 0..keep {
                t[c][c] = eig.eigenvalues[order[c]];
                let coupling = beta * s[c][size - 1];
                t[c][keep] = coupling;
                t[keep][c] = coupling;
            }
        }
        let mut next = std::mem::replace(&mut w, vec![0.0f64; dim]);
        next.iter_mut().for_each(|x| *x /= beta);
        basis.push(next);
    }
}

/// Two cache-blocked classical Gram–Schmidt passes against `Q` = `deflate`
/// followed by `basis`; returns the summed coefficients of `basis`.
///
/// The passes are fused into three sweeps over memory: `c1 = Q^T w`; then,
/// block by block, `w -= Q c1` followed by the block's contribution to
/// `c2 = Q^T w`; finally `w -= Q c2`. Each block of `w` is final for the
/// first pass as soon as it has been updated, so the second pass's inner
/// products can be accumulated while the block is still in cache.
fn cgs_twice(deflate: &[&[f64]], basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    const BLOCK: usize = 4096;
    let vecs: Vec<&[f64]> = deflate.iter().copied().chain(basis.iter().map(|q| q.as_slice())).collect();
    let dim = w.len();
    let blocks = |f: &mut dyn FnMut(usize, usize)| {
        let mut start = 0;
        while start < dim {
            let end = (start + BLOCK).min(dim);
            f(start, end);
            start = end;
        }
    };
    let mut c1 = vec![0.0f64; vecs.len()];
    let mut c2 = vec![0.0f64; vecs.len()];
    blocks(&mut |s, e| {
        for (ci, q) in c1.iter_mut().zip(&vecs) {
            *ci += dot(&q[s..e], &w[s..e]);
        }
    });
    blocks(&mut |s, e| {
        let wb = &mut w[s..e];
        for (&ci, q) in c1.iter().zip(&vecs) {
            axpy(-ci, &q[s..e], wb);
        }
        for (ci, q) in c2.iter_mut().zip(&vecs) {
            *ci += dot(&q[s..e], wb);
        }
    });
    blocks(&mut |s, e| {
        let wb = &mut w[s..e];
        for (&ci, q) in c2.iter().zip(&vecs) {
            axpy(-ci, &q[s..e], wb);
        }
    });
    c1.iter().zip(&c2).skip(deflate.len()).map(|(a, b)| a + b).collect()
}

fn sorted_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Replace the first `s.len()` basis vectors by `V s_c`, row block by row block,
/// without allocating new full-length vectors.
fn rotate_in_place(basis: &mut [Vec<f64>], s: &[Vec<f64>]) {
    const BLOCK: usize = 512;
    let m = basis.len();
    let keep = s.len();
    let dim = basis[0].len();
    let mut rows = vec![0.0f64; m * BLOCK];
    let mut out = vec![0.0f64; keep * BLOCK];
    let mut start = 0;
    while start < dim {
        let len = BLOCK.min(dim - start);
        for (i, q) in basis.iter().enumerate() {
            rows[i * BLOCK..i * BLOCK + len].copy_from_slice(&q[start..start + len]);
        }
        for c in 0..keep {
            let o = &mut out[c * BLOCK..c * BLOCK + len];
            o.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..m {
                let coef = s[c][i];
                let r = &rows[i * BLOCK..i * BLOCK + len];
                for (oi, ri) in o.iter_mut().zip(r) {
                    *oi += coef * ri;
                }
            }
        }
        for c in 0..keep {
            basis[c][start..start + len].copy_from_slice(&out[c * BLOCK..c * BLOCK + len]);
        }
        start += len;
    }
}
