//! Particle approximation of the posterior over χ-matrices.
//!
//! Each particle carries the stacked Kraus blocks of its process. In
//! trace-preserving mode the column is a `d³×d` isometry; in lossy mode it
//! is `(d³+d)×d` and the last block is an auxiliary element that completes
//! the physical ones to an isometry without entering χ. Proposals move the
//! whole column and re-orthonormalize it, so walks never leave the set of
//! valid processes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::apparatus::{Calibration, CountRecord, Exposure, Mode, Probe};
use crate::error::{invalid, Error, Result};
use crate::quantum::linalg::{ginibre, identity, orthonormalize_columns, psd_sqrt, zeros, CMatrix};
use crate::quantum::metrics::BuresReference;
use crate::quantum::{chi_to_kraus, haar_random_unitary, ChiMatrix, DilationColumn, KrausSet};

/// Default particle counts per mode.
pub const DEFAULT_PARTICLES_TP: usize = 1_000;
pub const DEFAULT_PARTICLES_LOSSY: usize = 10_000;

#[derive(Clone, Debug)]
pub struct Particle {
    chi: ChiMatrix,
    dilation: DilationColumn,
    log_weight: f64,
    // Log-likelihood of the full history at this particle, up to a constant
    // shared by all particles.
    log_likelihood: f64,
}

impl Particle {
    pub fn chi(&self) -> &ChiMatrix {
        &self.chi
    }

    /// Full stacked column, auxiliary block included in lossy mode.
    pub fn dilation(&self) -> &DilationColumn {
        &self.dilation
    }

    /// The `d²` physical Kraus elements.
    pub fn kraus(&self) -> KrausSet {
        let d = self.dilation.dim();
        let elements = (0..d * d).map(|k| self.dilation.block(k)).collect();
        KrausSet::new(d, elements).expect("particle blocks form a valid Kraus set")
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }
}

/// How far MH proposals reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProposalScale {
    /// `σ = c·√d̄²_B` with `c` steered toward a target acceptance rate.
    Adaptive,
    /// Constant Ginibre scale.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResampleConfig {
    /// Resample once `S_eff < ess_fraction · S`.
    pub ess_fraction: f64,
    pub n_mh: usize,
    pub scale: ProposalScale,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        Self {
            ess_fraction: 0.1,
            n_mh: 20,
            scale: ProposalScale::Adaptive,
        }
    }
}

/// What one resampling pass did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResampleStats {
    pub acceptance: f64,
    pub sigma: f64,
}

const TARGET_ACCEPTANCE: f64 = 0.3;
const INITIAL_PROPOSAL_C: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    d: usize,
    mode: Mode,
    calibration: Calibration,
    particles: Vec<Particle>,
    history: Vec<CountRecord>,
    probes: Vec<Probe>,
    proposal_c: f64,
}

fn column_rows(d: usize, mode: Mode) -> usize {
    match mode {
        Mode::Tp => d * d * d,
        Mode::Lossy => d * d * d + d,
    }
}

fn particle_from_column(d: usize, mode: Mode, col: CMatrix, log_weight: f64) -> Particle {
    let dilation = DilationColumn::new(d, col).expect("column shape fixed by mode");
    let chi = dilation.chi_from_blocks(d * d, mode == Mode::Tp);
    Particle {
        chi,
        dilation,
        log_weight,
        log_likelihood: 0.0,
    }
}

fn xlogy(n: u64, p: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * p.ln()
    }
}

fn block_log_likelihood(chi: &ChiMatrix, probe: &Probe, rec: &CountRecord, cal: &Calibration) -> f64 {
    match rec.exposure {
        Exposure::Block(_) => {
            let p0 = probe.prob(chi, 0);
            xlogy(rec.counts[0], p0) + xlogy(rec.counts[1], 1.0 - p0)
        }
        Exposure::Duration(t) => (0..2)
            .map(|g| {
                let lambda = cal.intensities[g] * probe.prob(chi, g) * t;
                xlogy(rec.counts[g], lambda) - lambda
            })
            .sum(),
    }
}

fn history_log_likelihood(chi: &ChiMatrix, history: &[CountRecord], probes: &[Probe], cal: &Calibration) -> f64 {
    let mut ll = 0.0;
    for (rec, probe) in history.iter().zip(probes) {
        ll += block_log_likelihood(chi, probe, rec, cal);
        if ll == f64::NEG_INFINITY {
            break;
        }
    }
    ll
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `S` particles whose dilation columns are Haar distributed, with uniform
/// weights.
pub fn init_ensemble<R: Rng + ?Sized>(s: usize, d: usize, mode: Mode, rng: &mut R) -> Result<ParticleEnsemble> {
    if s < 2 {
        return Err(invalid(format!("an ensemble needs at least 2 particles, got {s}")));
    }
    if d < 1 {
        return Err(invalid("dimension must be positive"));
    }
    let rows = column_rows(d, mode);
    let lw = -(s as f64).ln();
    let particles = (0..s)
        .map(|_| particle_from_column(d, mode, haar_random_unitary(rows, d, rng), lw))
        .collect();
    Ok(ParticleEnsemble::assemble(d, mode, particles))
}

impl ParticleEnsemble {
    fn assemble(d: usize, mode: Mode, particles: Vec<Particle>) -> Self {
        Self {
            d,
            mode,
            calibration: Calibration::default(),
            particles,
            history: Vec::new(),
            probes: Vec::new(),
            proposal_c: INITIAL_PROPOSAL_C,
        }
    }

    /// Ensemble over given processes with given (unnormalized) weights.
    /// Each χ is decomposed into Kraus elements and completed to a full
    /// column; trace-preserving mode requires trace-preserving χ's.
    pub fn from_chis(mode: Mode, chis: &[ChiMatrix], weights: &[f64]) -> Result<Self> {
        if chis.is_empty() || chis.len() != weights.len() {
            return Err(invalid("need one positive weight per χ"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(invalid("weights must be non-negative with positive sum"));
        }
        let d = chis[0].dim();
        let total: f64 = weights.iter().sum();
        let mut particles = Vec::with_capacity(chis.len());
        for (chi, &w) in chis.iter().zip(weights) {
            if chi.dim() != d {
                return Err(Error::DimensionMismatch("χ's of different dimension".into()));
            }
            if mode == Mode::Tp && !chi.is_trace_preserving() {
                return Err(Error::NotTracePreserving("particle for a trace-preserving ensemble".into()));
            }
            let col = complete_column(chi, mode);
            let mut p = particle_from_column(d, mode, col, (w / total).ln());
            // Keep the caller's χ exactly rather than its reconstruction.
            p.chi = chi.clone();
            particles.push(p);
        }
        Ok(Self::assemble(d, mode, particles))
    }

    /// Detector intensities used by the lossy likelihood.
    pub fn with_calibration(mut self, cal: Calibration) -> Self {
        self.calibration = cal;
        self
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(Particle::weight).collect()
    }

    pub fn history(&self) -> &[CountRecord] {
        &self.history
    }

    /// Current proposal constant `c` in `σ = c·√d̄²_B`.
    pub fn proposal_constant(&self) -> f64 {
        self.proposal_c
    }

    /// Bayes update with one block of counts. On a degenerate outcome the
    /// ensemble is left untouched.
    pub fn update_weights(&mut self, rec: &CountRecord) -> Result<()> {
        if rec.mode() != self.mode {
            return Err(Error::ModeMismatch {
                record: rec.mode().to_string(),
                ensemble: self.mode.to_string(),
            });
        }
        if self.d != 2 {
            return Err(Error::DimensionMismatch(format!(
                "the polarization apparatus measures qubits, ensemble has d={}",
                self.d
            )));
        }
        let probe = Probe::new(&rec.config);
        let cal = self.calibration;
        let increments: Vec<f64> = self
            .particles
            .par_iter()
            .map(|p| block_log_likelihood(&p.chi, &probe, rec, &cal))
            .collect();
        let norm = log_sum_exp(self.particles.iter().zip(&increments).map(|(p, inc)| p.log_weight + inc));
        if norm == f64::NEG_INFINITY {
            return Err(Error::DegenerateEnsemble);
        }
        for (p, inc) in self.particles.iter_mut().zip(&increments) {
            p.log_weight += inc - norm;
            p.log_likelihood += inc;
        }
        self.history.push(*rec);
        self.probes.push(probe);
        Ok(())
    }

    fn reset_weights(&mut self) {
        let lw = -(self.particles.len() as f64).ln();
        for p in &mut self.particles {
            p.log_weight = lw;
        }
    }

    /// Weight-proportional selection, equal weights, then `n_mh`
    /// Metropolis–Hastings moves per particle against the full history.
    pub fn resample<R: Rng + ?Sized>(&mut self, cfg: &ResampleConfig, rng: &mut R) -> ResampleStats {
        let base = distribution_size(self).sqrt();
        let weights = self.weights();
        let pick = WeightedIndex::new(&weights).expect("normalized weights");
        let selected: Vec<Particle> = (0..self.particles.len())
            .map(|_| self.particles[pick.sample(rng)].clone())
            .collect();
        self.particles = selected;
        self.reset_weights();

        if self.history.is_empty() || cfg.n_mh == 0 {
            return ResampleStats {
                acceptance: 0.0,
                sigma: 0.0,
            };
        }

        let seed: u64 = rng.random();
        let mut rngs: Vec<ChaCha8Rng> = (0..self.particles.len())
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i as u64);
                r
            })
            .collect();

        let (d, mode, cal) = (self.d, self.mode, self.calibration);
        let rows = column_rows(d, mode);
        let (history, probes) = (&self.history, &self.probes);
        let mut accepted_total = 0usize;
        let mut sigma = 0.0;
        for _ in 0..cfg.n_mh {
            sigma = match cfg.scale {
                ProposalScale::Adaptive => self.proposal_c * base,
                ProposalScale::Fixed(s) => s,
            };
            let accepted: usize = self
                .particles
                .par_iter_mut()
                .zip(rngs.par_iter_mut())
                .map(|(p, r)| {
                    let moved = p.dilation.col() + ginibre(rows, d, sigma, r);
                    let cand = particle_from_column(d, mode, orthonormalize_columns(&moved), p.log_weight);
                    let ll = history_log_likelihood(&cand.chi, history, probes, &cal);
                    let u: f64 = r.random();
                    if ll > f64::NEG_INFINITY && u.ln() < ll - p.log_likelihood {
                        *p = Particle {
                            log_likelihood: ll,
                            ..cand
                        };
                        1
                    } else {
                        0
                    }
                })
                .sum();
            accepted_total += accepted;
            if cfg.scale == ProposalScale::Adaptive {
                let rate = accepted as f64 / self.particles.len() as f64;
                let factor = (rate / TARGET_ACCEPTANCE).clamp(0.5, 2.0);
                self.proposal_c = (self.proposal_c * factor).clamp(1e-3, 1e3);
            }
        }
        ResampleStats {
            acceptance: accepted_total as f64 / (cfg.n_mh * self.particles.len()) as f64,
            sigma,
        }
    }

    /// Resamples when the effective sample size has dropped below the
    /// configured fraction of `S`.
    pub fn maybe_resample<R: Rng + ?Sized>(&mut self, cfg: &ResampleConfig, rng: &mut R) -> Option<ResampleStats> {
        if effective_sample_size(self) < cfg.ess_fraction * self.particles.len() as f64 {
            Some(self.resample(cfg, rng))
        } else {
            None
        }
    }
}

/// Kraus decomposition of `chi` padded to `d²` blocks, plus an auxiliary
/// block `√(I − Σ E†E)` in lossy mode.
fn complete_column(chi: &ChiMatrix, mode: Mode) -> CMatrix {
    let d = chi.dim();
    let ks = chi_to_kraus(chi);
    let mut col = zeros(column_rows(d, mode), d);
    for (k, e) in ks.elements().iter().take(d * d).enumerate() {
        col.rows_mut(k * d, d).copy_from(e);
    }
    if mode == Mode::Lossy {
        let defect = identity(d) - ks.completeness();
        col.rows_mut(d * d * d, d).copy_from(&psd_sqrt(&crate::quantum::linalg::hermitize(&defect)));
    }
    col
}

/// Bayesian mean estimate `Σ_s w_s χ_s`.
pub fn bme(ens: &ParticleEnsemble) -> ChiMatrix {
    let n = ens.d * ens.d;
    let mut acc = zeros(n, n);
    for p in &ens.particles {
        acc += p.chi.mat().scale(p.weight());
    }
    ChiMatrix::from_unchecked(ens.d, acc, ens.mode == Mode::Tp)
}

/// `Σ_s w_s d²_B(χ_s, χ̂)`.
pub fn distribution_size(ens: &ParticleEnsemble) -> f64 {
    let reference = BuresReference::new(bme(ens).mat());
    let terms: Vec<f64> = ens
        .particles
        .par_iter()
        .map(|p| {
            let w = p.weight();
            if w == 0.0 {
                0.0
            } else {
                w * reference.distance_sq(p.chi.mat())
            }
        })
        .collect();
    terms.iter().sum()
}

/// `(Σ_s w_s²)⁻¹`.
pub fn effective_sample_size(ens: &ParticleEnsemble) -> f64 {
    1.0 / ens.particles.iter().map(|p| p.weight().powi(2)).sum::<f64>()
}
