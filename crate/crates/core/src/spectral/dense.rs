//! Dense assembly and full diagonalization for small instances.

use nalgebra::{DMatrix, SymmetricEigen};

use super::lanczos::LinearOperator;
use super::HbOperator;
use crate::error::{Error, Result};

/// Hard cap for dense methods (a `2^14 x 2^14` matrix is 2 GiB).
pub const DENSE_LIMIT: usize = 14;

fn check(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT, what: "dense diagonalization" });
    }
    Ok(())
}

/// Explicit matrix of `H_b`, assembled entry by entry (not via `matvec`).
pub fn assemble(op: &HbOperator) -> Result<DMatrix<f64>> {
    check(op.n())?;
    let dim = op.dim();
    let n = op.n();
    let off = -1.0 / n as f64;
    let mut m = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        m[(x, x)] = op.diag_entry(x);
        for i in 0..n {
            m[(x, x ^ (1 << i))] = off;
        }
    }
    Ok(m)
}

/// Matrix whose column `x` is `matvec(e_x)`.
pub fn assemble_from_matvec<A: LinearOperator + ?Sized>(a: &A) -> DMatrix<f64> {
    let dim = a.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for x in 0..dim {
        e[x] = 1.0;
        a.apply(&e, &mut col);
        e[x] = 0.0;
        m.set_column(x, &nalgebra::DVector::from_column_slice(&col));
    }
    m
}

/// Full spectrum, ascending, with eigenvectors as columns in the same order.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }
}

/// Diagonalize a symmetric matrix and sort the eigenpairs.
pub fn diagonalize(m: DMatrix<f64>) -> DenseSpectrum {
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    DenseSpectrum { values, vectors }
}

/// Full spectrum of `H_b`.
pub fn dense_spectrum(op: &HbOperator) -> Result<DenseSpectrum> {
    Ok(diagonalize(assemble(op)?))
}

/// Lowest eigenvalue of `H_b` restricted to the complement of `|+>`.
///
/// The projected matrix `P H P` (with `P = 1 - |+><+|`) has `|+>` as an exact
/// eigenvector with eigenvalue 0; adding a large multiple of `|+><+|` moves
/// that eigenvalue above the rest of the spectrum.
pub fn dense_deflated_ground_energy(op: &HbOperator) -> Result<f64> {
    let m = assemble(op)?;
    let dim = op.dim();
    let u = 1.0 / dim as f64; // entries of |+><+|
    let mh = &m * DMatrix::from_element(dim, 1, 1.0); // H|1>
    let row_sums: Vec<f64> = mh.iter().copied().collect();
    let total: f64 = row_sums.iter().sum();
    let shift = 4.0 + 2.0 * op.b().abs();
    // (P H P)_{xy} = H_xy - u (r_x + r_y) + u^2 total, with r = H 1.
    let p = DMatrix::from_fn(dim, dim, |x, y| m[(x, y)] - u * (row_sums[x] + row_sums[y]) + u * u * total + shift * u);
    Ok(diagonalize(p).values[0])
}
