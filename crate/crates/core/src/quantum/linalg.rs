//! Small dense complex linear algebra on top of `nalgebra`.
//!
//! Everything here works on [`CMatrix`] (a dynamically sized `DMatrix` of
//! `Complex64`). Matrices in this crate are tiny (at most 10×4 or 16×16), so
//! dynamic sizing costs little and keeps the dimension `d` a runtime value.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on `‖A − A†‖_max` for a matrix to count as Hermitian.
pub const TOL_HERM: f64 = 1e-10;
/// Most negative eigenvalue accepted for a PSD matrix.
pub const TOL_PSD: f64 = 1e-10;
/// Eigenvalues below this are treated as zero before taking square roots.
pub const EIG_CLIP: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `a − b`. Shapes must agree.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖A − A†‖_max`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(A + A†)/2`, removing rounding asymmetry before an eigensolve.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix. The input
/// is symmetrized first, so slightly non-Hermitian rounding noise is fine.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitize(m).symmetric_eigenvalues().iter().copied().collect()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Square root of a Hermitian PSD matrix. Eigenvalues below [`EIG_CLIP`]
/// (including small negatives from rounding) are set to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= EIG_CLIP {
            continue;
        }
        let s = lam.sqrt();
        let v = vecs.column(k);
        for i in 0..n {
            let vi = v[i] * s;
            for j in 0..n {
                out[(i, j)] += vi * v[j].conj();
            }
        }
    }
    out
}

/// `Tr √M` for Hermitian PSD `M`, clipping small eigenvalues.
pub fn trace_sqrt(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .filter(|&l| l > EIG_CLIP)
        .map(f64::sqrt)
        .sum()
}

/// Projects a Hermitian matrix onto the PSD cone by dropping negative
/// eigenvalues.
pub fn psd_project(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j].conj() * lam;
            }
        }
    }
    out
}

/// Matrix with i.i.d. complex Gaussian entries, `E|g|² = std²`.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, std: f64, rng: &mut R) -> CMatrix {
    let s = std / std::f64::consts::SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * s, im * s)
    })
}

/// Thin QR factorization `M = Q R` returning `Q` with the phase convention
/// that `R` has a positive real diagonal. That convention makes the map from
/// Ginibre matrices to `Q` Haar distributed.
///
/// `M` must have at least as many rows as columns and full column rank.
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        if norm > 0.0 {
            let phase = rjj / norm;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Haar-distributed column-orthonormal `rows × cols` matrix (the first `cols`
/// columns of a Haar unitary), via QR of a Ginibre matrix.
pub fn haar_random_unitary<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "haar_random_unitary needs rows >= cols");
    orthonormalize_columns(&ginibre(rows, cols, 1.0, rng))
}

/// Haar-random pure state vector of dimension `d`.
pub fn haar_random_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, 1, 1.0, rng);
    let n = g.norm();
    g.unscale(n)
}
