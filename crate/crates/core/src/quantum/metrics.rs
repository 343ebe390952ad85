//! Process metrics on χ-matrices.

use super::linalg::{hermitian_deviation, min_eigenvalue, psd_sqrt, trace, trace_sqrt, CMatrix};
use super::repr::ChiMatrix;
use crate::error::{Error, Result};

/// PSD tolerance for Bures arguments. Slightly looser than the χ invariant
/// so that estimates accumulated from many particles are accepted.
const BURES_TOL: f64 = 1e-9;

/// Squared Bures distance `Tr A + Tr B − 2 Tr √(√A B √A)` between two
/// Hermitian PSD matrices of equal size. Traces need not be one.
pub fn bures_distance_sq(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Bures distance between {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    for m in [a, b] {
        let dev = hermitian_deviation(m);
        if dev > BURES_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let min = min_eigenvalue(m);
        if min < -BURES_TOL {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(bures_sq_unchecked(a, b))
}

/// Bures distance without input validation.
pub(crate) fn bures_sq_unchecked(a: &CMatrix, b: &CMatrix) -> f64 {
    BuresReference::new(a).distance_sq(b)
}

/// One side of a Bures distance with its square root precomputed, for many
/// distances to the same matrix.
pub(crate) struct BuresReference {
    sqrt: CMatrix,
    trace: f64,
}

impl BuresReference {
    pub(crate) fn new(a: &CMatrix) -> Self {
        Self {
            sqrt: psd_sqrt(a),
            trace: trace(a).re,
        }
    }

    pub(crate) fn distance_sq(&self, b: &CMatrix) -> f64 {
        let inner = &self.sqrt * b * &self.sqrt;
        (self.trace + trace(b).re - 2.0 * trace_sqrt(&inner)).max(0.0)
    }
}

/// Squared Bures distance between the χ-matrices of two processes.
pub fn process_distance(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "processes of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(bures_sq_unchecked(a.mat(), b.mat()))
}

/// `Tr χ² / (Tr χ)²`, one for unitary (rank-1) processes.
pub fn purity(chi: &ChiMatrix) -> f64 {
    let m = chi.mat();
    // Tr(χ²) = Σ |χ_ij|² for Hermitian χ.
    let tr2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let tr = chi.trace();
    tr2 / (tr * tr)
}

/// `Tr χ / d`, the transmittance averaged over Haar-random input states.
pub fn average_transmittance(chi: &ChiMatrix) -> f64 {
    chi.trace() / chi.dim() as f64
}

/// `1 − Tr χ / d`.
pub fn average_loss(chi: &ChiMatrix) -> f64 {
    1.0 - average_transmittance(chi)
}
