//! Process representations: operator-sum (Kraus) elements, the dilation block
//! column that houses them, and the χ-matrix in the `|l⟩⟨l'|` operator basis.
//!
//! Basis convention: operator basis element `m = l·d + l'` (0-based) is
//! `|l⟩⟨l'|`, so the coefficient vector of an operator `E` is its row-major
//! flattening. With this choice `χ = d·ρ_E` (Choi state) and the process
//! measurement operators factorize as `M ⊗ ρ*`.

use super::linalg::{
    self, c64, hermitian_deviation, hermitian_eigen, identity, max_abs_diff, min_eigenvalue,
    trace, zeros, CMatrix, TOL_HERM, TOL_PSD,
};
use crate::error::{Error, Result};

/// Tolerance on `‖Σ E_k†E_k − I‖_max` for a trace-preserving Kraus set.
pub const TOL_COMPLETENESS: f64 = 1e-10;
/// Tolerance on trace and partial-trace conditions of a trace-preserving χ.
pub const TOL_CHI_TRACE: f64 = 1e-9;

fn check_psd(m: &CMatrix) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > TOL_HERM {
        return Err(Error::NotHermitian(dev));
    }
    let min = min_eigenvalue(m);
    if min < -TOL_PSD {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// A (possibly sub-normalized) density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and `0 ≤ Tr ρ ≤ 1`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_psd(&mat)?;
        let tr = trace(&mat).re;
        if !(-TOL_PSD..=1.0 + TOL_PSD).contains(&tr) {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|` for a column vector `ψ`.
    pub fn pure(ket: &CMatrix) -> Result<Self> {
        Self::new(ket * ket.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    /// `Tr ρ² / (Tr ρ)²`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        (&self.mat * &self.mat).trace().re / (tr * tr)
    }
}

/// Operator-sum elements `{E_k}` of a process on dimension `d`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    d: usize,
    elements: Vec<CMatrix>,
    trace_preserving: bool,
}

impl KrausSet {
    /// Validates shapes, `1 ≤ K ≤ d²+1` and trace non-increase
    /// `Σ E_k†E_k ⪯ I`. The set is flagged trace preserving when the
    /// completeness relation holds within [`TOL_COMPLETENESS`].
    pub fn new(d: usize, elements: Vec<CMatrix>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        if elements.is_empty() || elements.len() > d * d + 1 {
            return Err(Error::DimensionMismatch(format!(
                "need 1..={} elements, got {}",
                d * d + 1,
                elements.len()
            )));
        }
        if let Some(bad) = elements.iter().find(|e| e.shape() != (d, d)) {
            return Err(Error::DimensionMismatch(format!(
                "element of shape {:?} in a d={d} set",
                bad.shape()
            )));
        }
        let q = completeness(&elements, d);
        let headroom = min_eigenvalue(&(identity(d) - &q));
        if headroom < -TOL_COMPLETENESS {
            return Err(Error::InvalidParameter(format!(
                "Kraus set increases trace (min eigenvalue of I - Q is {headroom:.3e})"
            )));
        }
        let trace_preserving = max_abs_diff(&q, &identity(d)) <= TOL_COMPLETENESS;
        Ok(Self {
            d,
            elements,
            trace_preserving,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Q = Σ_k E_k† E_k`.
    pub fn completeness(&self) -> CMatrix {
        completeness(&self.elements, self.d)
    }
}

fn completeness(elements: &[CMatrix], d: usize) -> CMatrix {
    elements
        .iter()
        .fold(zeros(d, d), |acc, e| acc + e.adjoint() * e)
}

/// The `d²×d²` process matrix in the `|l⟩⟨l'|` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    d: usize,
    mat: CMatrix,
    trace_preserving: bool,
}

impl ChiMatrix {
    /// Validates Hermiticity, positivity and `Tr χ ≤ d`; when
    /// `trace_preserving` is set, also `Tr_1 χ = I`.
    pub fn new(d: usize, mat: CMatrix, trace_preserving: bool) -> Result<Self> {
        if d == 0 || mat.shape() != (d * d, d * d) {
            return Err(Error::DimensionMismatch(format!(
                "χ for d={d} must be {0}x{0}, got {1:?}",
                d * d,
                mat.shape()
            )));
        }
        check_psd(&mat)?;
        let tr = trace(&mat).re;
        if tr > d as f64 + TOL_CHI_TRACE {
            return Err(Error::InvalidTrace(tr));
        }
        let chi = Self {
            d,
            mat,
            trace_preserving,
        };
        if trace_preserving {
            if (tr - d as f64).abs() > TOL_CHI_TRACE {
                return Err(Error::NotTracePreserving(format!("Tr χ = {tr}, expected {d}")));
            }
            let dev = max_abs_diff(&chi.partial_trace_output(), &identity(d));
            if dev > TOL_CHI_TRACE {
                return Err(Error::NotTracePreserving(format!(
                    "partial trace deviates from identity by {dev:.3e}"
                )));
            }
        }
        Ok(chi)
    }

    /// Skips validation; for matrices that are valid by construction.
    pub(crate) fn from_unchecked(d: usize, mat: CMatrix, trace_preserving: bool) -> Self {
        Self {
            d,
            mat,
            trace_preserving,
        }
    }

    /// χ of the identity process: ones at the four "corner" entries for d=2.
    pub fn identity(d: usize) -> Self {
        let mut mat = zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                mat[(a * d + a, b * d + b)] = c64(1.0, 0.0);
            }
        }
        Self::from_unchecked(d, mat, true)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    /// Partial trace over the output factor (index `l` of `m = l·d + l'`).
    /// Equals the transpose of `Σ E_k†E_k`, hence `I` for trace-preserving
    /// processes.
    pub fn partial_trace_output(&self) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, d, |a, b| {
            (0..d).map(|l| self.mat[(l * d + a, l * d + b)]).sum()
        })
    }

    /// Same matrix with a different trace-preservation flag, revalidated.
    pub fn with_trace_preserving(self, trace_preserving: bool) -> Result<Self> {
        Self::new(self.d, self.mat, trace_preserving)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.d, self.mat.scale(factor), false)
    }
}

/// The stacked blocks `(E_1; E_2; …; E_K)`, a `(dK)×d` matrix. When the set
/// is trace preserving this is an isometry (the first block column of a
/// Stinespring unitary).
#[derive(Clone, Debug, PartialEq)]
pub struct DilationColumn {
    d: usize,
    col: CMatrix,
}

impl DilationColumn {
    pub fn new(d: usize, col: CMatrix) -> Result<Self> {
        if d == 0 || col.ncols() != d || !col.nrows().is_multiple_of(d) || col.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "dilation column for d={d} must be (d·K)x{d}, got {:?}",
                col.shape()
            )));
        }
        Ok(Self { d, col })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of stacked blocks.
    pub fn blocks(&self) -> usize {
        self.col.nrows() / self.d
    }

    pub fn col(&self) -> &CMatrix {
        &self.col
    }

    pub fn into_col(self) -> CMatrix {
        self.col
    }

    pub fn block(&self, k: usize) -> CMatrix {
        self.col.rows(k * self.d, self.d).into_owned()
    }

    /// `col† · col = Σ E_k†E_k`.
    pub fn gram(&self) -> CMatrix {
        self.col.adjoint() * &self.col
    }

    /// χ built from the first `k` blocks without going through a
    /// [`KrausSet`]. Used on the particle hot path.
    pub(crate) fn chi_from_blocks(&self, k: usize, trace_preserving: bool) -> ChiMatrix {
        let d = self.d;
        let n = d * d;
        let mut mat = zeros(n, n);
        let mut v = vec![c64(0.0, 0.0); n];
        for b in 0..k {
            for l in 0..d {
                for lp in 0..d {
                    v[l * d + lp] = self.col[(b * d + l, lp)];
                }
            }
            accumulate_outer(&mut mat, &v);
        }
        ChiMatrix::from_unchecked(d, mat, trace_preserving)
    }
}

fn accumulate_outer(mat: &mut CMatrix, v: &[num_complex::Complex64]) {
    let n = v.len();
    for j in 0..n {
        let vj = v[j].conj();
        for i in 0..n {
            mat[(i, j)] += v[i] * vj;
        }
    }
}

/// `χ = Σ_k vec(E_k) vec(E_k)†`.
pub fn kraus_to_chi(ks: &KrausSet) -> ChiMatrix {
    let d = ks.d;
    let n = d * d;
    let mut mat = zeros(n, n);
    let mut v = vec![c64(0.0, 0.0); n];
    for e in &ks.elements {
        for l in 0..d {
            for lp in 0..d {
                v[l * d + lp] = e[(l, lp)];
            }
        }
        accumulate_outer(&mut mat, &v);
    }
    ChiMatrix::from_unchecked(d, mat, ks.trace_preserving)
}

/// Eigenvalues below this are dropped when recovering Kraus elements.
pub const KRAUS_EIG_DROP: f64 = 1e-12;

/// Kraus elements `E_k = √λ_k Σ_m V_mk Ẽ_m` from the eigendecomposition of χ.
/// A zero process yields a single zero element.
pub fn chi_to_kraus(chi: &ChiMatrix) -> KrausSet {
    let d = chi.d;
    let (vals, vecs) = hermitian_eigen(&chi.mat);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut elements: Vec<CMatrix> = order
        .into_iter()
        .filter(|&k| vals[k] >= KRAUS_EIG_DROP)
        .map(|k| {
            let s = vals[k].sqrt();
            CMatrix::from_fn(d, d, |l, lp| vecs[(l * d + lp, k)] * s)
        })
        .collect();
    if elements.is_empty() {
        elements.push(zeros(d, d));
    }
    // Build directly: the elements come from a valid χ, and re-checking
    // completeness against TOL_COMPLETENESS would reject χ's that are
    // trace preserving only within TOL_CHI_TRACE.
    KrausSet {
        d,
        elements,
        trace_preserving: chi.trace_preserving,
    }
}

pub fn kraus_to_dilation(ks: &KrausSet) -> DilationColumn {
    let d = ks.d;
    let mut col = zeros(d * ks.len(), d);
    for (k, e) in ks.elements.iter().enumerate() {
        col.rows_mut(k * d, d).copy_from(e);
    }
    DilationColumn { d, col }
}

pub fn dilation_to_kraus(dc: &DilationColumn) -> Result<KrausSet> {
    let elements = (0..dc.blocks()).map(|k| dc.block(k)).collect();
    KrausSet::new(dc.d, elements)
}

/// `E(ρ) = Σ_k E_k ρ E_k†`.
pub fn apply_channel(ks: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ks.d {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} through a d={} channel",
            rho.dim(),
            ks.d
        )));
    }
    let out = ks
        .elements
        .iter()
        .fold(zeros(ks.d, ks.d), |acc, e| acc + e * rho.mat() * e.adjoint());
    Ok(DensityMatrix::from_unchecked(linalg::hermitize(&out)))
}

/// `E(ρ) = Σ_{mn} χ_mn Ẽ_m ρ Ẽ_n†`, i.e.
/// `E(ρ)_{l k} = Σ_{l' k'} χ_{(l l'),(k k')} ρ_{l' k'}`.
pub fn apply_channel_chi(chi: &ChiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = chi.d;
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} through a d={} channel",
            rho.dim(),
            d
        )));
    }
    let r = rho.mat();
    let out = CMatrix::from_fn(d, d, |l, k| {
        let mut acc = c64(0.0, 0.0);
        for lp in 0..d {
            for kp in 0..d {
                acc += chi.mat[(l * d + lp, k * d + kp)] * r[(lp, kp)];
            }
        }
        acc
    });
    Ok(DensityMatrix::from_unchecked(linalg::hermitize(&out)))
}

/// Choi–Jamiołkowski state `ρ_E = χ / d` of a trace-preserving process.
pub fn choi_state(chi: &ChiMatrix) -> Result<DensityMatrix> {
    if !chi.trace_preserving {
        return Err(Error::NotTracePreserving(
            "Choi state is defined for trace-preserving χ only".into(),
        ));
    }
    Ok(DensityMatrix::from_unchecked(
        chi.mat.unscale(chi.d as f64),
    ))
}
