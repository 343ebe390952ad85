//! Simulated polarization apparatus: state preparation with a half- and a
//! quarter-wave plate, projective measurement with a quarter-wave plate, a
//! half-wave plate and a polarizing splitter, angular jitter of the motorized
//! stages, and photon-count generation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channels::waveplate_jones;
use crate::error::{invalid, Error, Result};
use crate::quantum::linalg::{c64, CMatrix};
use crate::quantum::{ChiMatrix, DensityMatrix};

/// Four wave-plate angles in degrees: preparation HWP and QWP, measurement
/// QWP and HWP. Angles are stored modulo 180°, the period of a retarder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementConfig {
    pub prep_hwp: f64,
    pub prep_qwp: f64,
    pub meas_qwp: f64,
    pub meas_hwp: f64,
}

fn canonical_angle(a: f64) -> f64 {
    let a = a.rem_euclid(180.0);
    if a >= 180.0 {
        0.0
    } else {
        a
    }
}

impl MeasurementConfig {
    pub fn new(prep_hwp: f64, prep_qwp: f64, meas_qwp: f64, meas_hwp: f64) -> Result<Self> {
        let angles = [prep_hwp, prep_qwp, meas_qwp, meas_hwp];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(invalid("wave-plate angles must be finite"));
        }
        Ok(Self::from_array_unchecked(angles))
    }

    fn from_array_unchecked(a: [f64; 4]) -> Self {
        Self {
            prep_hwp: canonical_angle(a[0]),
            prep_qwp: canonical_angle(a[1]),
            meas_qwp: canonical_angle(a[2]),
            meas_hwp: canonical_angle(a[3]),
        }
    }

    /// `[prep_hwp, prep_qwp, meas_qwp, meas_hwp]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.prep_hwp, self.prep_qwp, self.meas_qwp, self.meas_hwp]
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// All plates at zero: prepares `|H⟩` and measures in the H/V basis.
    pub fn aligned() -> Self {
        Self::from_array_unchecked([0.0; 4])
    }

    /// Four i.i.d. angles uniform on `[0°, 180°)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_array_unchecked(std::array::from_fn(|_| rng.random_range(0.0..180.0)))
    }
}

/// Fixed retardance errors of the four plates (radians), added to the
/// nominal π and π/2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Retardances {
    pub prep_hwp: f64,
    pub prep_qwp: f64,
    pub meas_qwp: f64,
    pub meas_hwp: f64,
}

/// Instrumental noise: every plate lands at its commanded angle plus a
/// uniform error on `[−φ0, φ0]`, redrawn for every block.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseModel {
    phi0_deg: f64,
    pub retardance_errors: Retardances,
}

impl NoiseModel {
    pub fn new(phi0_deg: f64) -> Result<Self> {
        if !(0.0..=45.0).contains(&phi0_deg) {
            return Err(invalid(format!("jitter half-width must be in [0, 45] degrees, got {phi0_deg}")));
        }
        Ok(Self {
            phi0_deg,
            retardance_errors: Retardances::default(),
        })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn with_retardance_errors(mut self, r: Retardances) -> Self {
        self.retardance_errors = r;
        self
    }

    pub fn phi0_deg(&self) -> f64 {
        self.phi0_deg
    }
}

fn hwp(theta: f64, err: f64) -> CMatrix {
    waveplate_jones(theta, PI + err)
}

fn qwp(theta: f64, err: f64) -> CMatrix {
    waveplate_jones(theta, PI / 2.0 + err)
}

fn ket_h() -> CMatrix {
    CMatrix::from_column_slice(2, 1, &[c64(1.0, 0.0), c64(0.0, 0.0)])
}

fn ket_v() -> CMatrix {
    CMatrix::from_column_slice(2, 1, &[c64(0.0, 0.0), c64(1.0, 0.0)])
}

fn prepared_ket(cfg: &MeasurementConfig, r: &Retardances) -> CMatrix {
    qwp(cfg.prep_qwp, r.prep_qwp) * hwp(cfg.prep_hwp, r.prep_hwp) * ket_h()
}

/// `ρ_α = |ψ⟩⟨ψ|`, `|ψ⟩ = W_QWP · W_HWP · |H⟩`.
pub fn prepared_state(cfg: &MeasurementConfig) -> DensityMatrix {
    prepared_state_with(cfg, &Retardances::default())
}

pub fn prepared_state_with(cfg: &MeasurementConfig, r: &Retardances) -> DensityMatrix {
    let k = prepared_ket(cfg, r);
    DensityMatrix::from_unchecked(&k * k.adjoint())
}

/// Two-outcome projective POVM `{W†|H⟩⟨H|W, W†|V⟩⟨V|W}` with
/// `W = W_HWP · W_QWP` (light meets the QWP first).
pub fn measurement_povm(cfg: &MeasurementConfig) -> [CMatrix; 2] {
    measurement_povm_with(cfg, &Retardances::default())
}

pub fn measurement_povm_with(cfg: &MeasurementConfig, r: &Retardances) -> [CMatrix; 2] {
    let w = hwp(cfg.meas_hwp, r.meas_hwp) * qwp(cfg.meas_qwp, r.meas_qwp);
    let wd = w.adjoint();
    let h = ket_h();
    let v = ket_v();
    [&wd * &h * h.adjoint() * &w, &wd * &v * v.adjoint() * &w]
}

/// Process measurement operator `M ⊗ ρ*`, so that `Tr((M ⊗ ρ*) χ)` equals
/// `Tr(M E(ρ))`.
pub fn effective_op(m: &CMatrix, rho: &DensityMatrix) -> CMatrix {
    m.kronecker(&rho.mat().map(|z| z.conj()))
}

/// Effective operators of one configuration, laid out for fast
/// `Tr(M^χ χ)` evaluation against many χ's.
#[derive(Clone, Debug)]
pub struct Probe {
    config: MeasurementConfig,
    // (M^χ_γ)ᵀ in column-major order, so Tr(M^χ χ) is a flat dot product.
    ops: [Vec<Complex64>; 2],
}

impl Probe {
    pub fn new(cfg: &MeasurementConfig) -> Self {
        Self::with_retardances(cfg, &Retardances::default())
    }

    pub fn with_retardances(cfg: &MeasurementConfig, r: &Retardances) -> Self {
        let rho = prepared_state_with(cfg, r);
        let povm = measurement_povm_with(cfg, r);
        let ops = std::array::from_fn(|g| {
            effective_op(&povm[g], &rho)
                .transpose()
                .as_slice()
                .to_vec()
        });
        Self { config: *cfg, ops }
    }

    pub fn config(&self) -> &MeasurementConfig {
        &self.config
    }

    /// `P(γ | χ, α)`, clamped to `[0, 1]` against rounding.
    #[inline]
    pub fn prob(&self, chi: &ChiMatrix, outcome: usize) -> f64 {
        let c = chi.mat().as_slice();
        let op = &self.ops[outcome];
        debug_assert_eq!(c.len(), op.len());
        let mut acc = 0.0;
        for (a, b) in op.iter().zip(c) {
            acc += a.re * b.re - a.im * b.im;
        }
        acc.clamp(0.0, 1.0)
    }

    pub fn probs(&self, chi: &ChiMatrix) -> [f64; 2] {
        [self.prob(chi, 0), self.prob(chi, 1)]
    }
}

/// `P(γ | χ, α) = Tr(M^χ_{αγ} χ)`.
pub fn outcome_prob(chi: &ChiMatrix, cfg: &MeasurementConfig, outcome: usize) -> f64 {
    assert!(outcome < 2, "two-outcome apparatus");
    Probe::new(cfg).prob(chi, outcome)
}

/// Shifts each angle by an independent draw from `U[−φ0, φ0]`.
pub fn jitter<R: Rng + ?Sized>(cfg: &MeasurementConfig, noise: &NoiseModel, rng: &mut R) -> MeasurementConfig {
    let phi0 = noise.phi0_deg;
    if phi0 == 0.0 {
        return *cfg;
    }
    let a = cfg.as_array();
    MeasurementConfig::from_array_unchecked(std::array::from_fn(|i| a[i] + rng.random_range(-phi0..=phi0)))
}

/// How a block of counts was collected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exposure {
    /// Trace-preserving mode: exactly `b` detected photons.
    Block(u64),
    /// Lossy mode: counts accumulated for a fixed duration.
    Duration(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tp,
    Lossy,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Tp => "tp",
            Mode::Lossy => "lossy",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tp" => Ok(Mode::Tp),
            "lossy" => Ok(Mode::Lossy),
            _ => Err(Error::Parse(format!("mode must be tp or lossy, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Detector counts for one measurement block at a commanded configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountRecord {
    pub config: MeasurementConfig,
    pub counts: [u64; 2],
    pub exposure: Exposure,
}

impl CountRecord {
    pub fn new(config: MeasurementConfig, counts: [u64; 2], exposure: Exposure) -> Result<Self> {
        match exposure {
            Exposure::Block(b) if counts[0] + counts[1] != b => Err(invalid(format!(
                "counts {counts:?} do not sum to block size {b}"
            ))),
            Exposure::Duration(t) if !(t > 0.0 && t.is_finite()) => {
                Err(invalid(format!("duration must be positive, got {t}")))
            }
            _ => Ok(Self {
                config,
                counts,
                exposure,
            }),
        }
    }

    pub fn mode(&self) -> Mode {
        match self.exposure {
            Exposure::Block(_) => Mode::Tp,
            Exposure::Duration(_) => Mode::Lossy,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts[0] + self.counts[1]
    }
}

/// Per-detector count rates with no process in the beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub intensities: [f64; 2],
}

impl Calibration {
    pub fn new(i0: f64, i1: f64) -> Result<Self> {
        if !(i0 > 0.0 && i1 > 0.0 && i0.is_finite() && i1.is_finite()) {
            return Err(invalid(format!("intensities must be positive, got ({i0}, {i1})")));
        }
        Ok(Self {
            intensities: [i0, i1],
        })
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            intensities: [1e4, 1e4],
        }
    }
}

fn true_probs(chi: &ChiMatrix, cfg: &MeasurementConfig, noise: &NoiseModel) -> [f64; 2] {
    Probe::with_retardances(cfg, &noise.retardance_errors).probs(chi)
}

/// Collects `b` photons at `cfg` through `true_chi`. The stage jitter is
/// drawn once for the block; the record carries the commanded config.
pub fn simulate_block_tp<R: Rng + ?Sized>(
    true_chi: &ChiMatrix,
    cfg: &MeasurementConfig,
    b: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> CountRecord {
    let actual = jitter(cfg, noise, rng);
    let p = true_probs(true_chi, &actual, noise)[0];
    let n0 = Binomial::new(b, p).expect("p is clamped to [0, 1]").sample(rng);
    CountRecord {
        config: *cfg,
        counts: [n0, b - n0],
        exposure: Exposure::Block(b),
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Counts for a duration `t` with a Poissonian source:
/// `n_γ ~ Poisson(I_γ · P(γ | χ, α) · t)`, independent across detectors.
pub fn simulate_block_lossy<R: Rng + ?Sized>(
    true_chi: &ChiMatrix,
    cfg: &MeasurementConfig,
    t: f64,
    cal: &Calibration,
    noise: &NoiseModel,
    rng: &mut R,
) -> CountRecord {
    let actual = jitter(cfg, noise, rng);
    let p = true_probs(true_chi, &actual, noise);
    let counts = std::array::from_fn(|g| poisson(cal.intensities[g] * p[g] * t, rng));
    CountRecord {
        config: *cfg,
        counts,
        exposure: Exposure::Duration(t),
    }
}

/// Measures the detector intensities: with an identity process in place, all
/// light is steered into one detector at a time for `t_cal`. An infinite
/// `t_cal` returns the true intensities.
pub fn calibrate<R: Rng + ?Sized>(cal_true: &Calibration, t_cal: f64, rng: &mut R) -> Result<Calibration> {
    if !(t_cal > 0.0) {
        return Err(invalid(format!("calibration time must be positive, got {t_cal}")));
    }
    if t_cal.is_infinite() {
        return Ok(*cal_true);
    }
    let id = ChiMatrix::identity(2);
    // meas HWP at 0° sends |H⟩ to detector 0, at 45° to detector 1.
    let routes = [MeasurementConfig::aligned(), MeasurementConfig::from_array_unchecked([0.0, 0.0, 0.0, 45.0])];
    let mut est = [0.0; 2];
    for (g, cfg) in routes.iter().enumerate() {
        let rec = simulate_block_lossy(&id, cfg, t_cal, cal_true, &NoiseModel::noiseless(), rng);
        est[g] = rec.counts[g] as f64 / t_cal;
    }
    Calibration::new(est[0], est[1])
}
