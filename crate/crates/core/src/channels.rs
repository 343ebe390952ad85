//! Reference single-qubit channels and wave-plate parameter recovery.
//!
//! Jones convention used throughout the crate: a retarder with fast axis at
//! angle `θ` from horizontal and retardance `δ` is
//! `W(θ, δ) = R(θ) · diag(e^{−iδ/2}, e^{iδ/2}) · R(−θ)` with
//! `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::optim::nelder_mead;
use crate::quantum::linalg::{c64, identity, zeros, CMatrix};
use crate::quantum::metrics::bures_sq_unchecked;
use crate::quantum::{kraus_to_chi, ChiMatrix, KrausSet};

/// Phase samples used for a liquid-crystal partial depolarizer by default.
pub const DEFAULT_LCWP_PHASES: usize = 64;

/// Jones matrix of a retarder; angle in degrees, retardance in radians.
pub fn waveplate_jones(theta_deg: f64, delta: f64) -> CMatrix {
    let t = theta_deg.to_radians();
    let (s, c) = t.sin_cos();
    let a = Complex64::from_polar(1.0, -delta / 2.0);
    let b = Complex64::from_polar(1.0, delta / 2.0);
    // R(θ) diag(a, b) R(−θ)
    CMatrix::from_row_slice(
        2,
        2,
        &[
            a * c * c + b * s * s,
            (a - b) * c * s,
            (a - b) * c * s,
            a * s * s + b * c * c,
        ],
    )
}

/// Projector onto linear polarization at `axis_deg` from horizontal.
pub fn linear_projector(axis_deg: f64) -> CMatrix {
    let (s, c) = axis_deg.to_radians().sin_cos();
    CMatrix::from_row_slice(2, 2, &[c64(c * c, 0.0), c64(c * s, 0.0), c64(c * s, 0.0), c64(s * s, 0.0)])
}

/// A reference channel.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Identity,
    /// Retarder with fast axis `theta_deg` and retardance `delta` (radians).
    Waveplate { theta_deg: f64, delta: f64 },
    /// `(1 − q)·identity + q·(complete depolarization)`.
    Depolarizing { q: f64 },
    /// Liquid-crystal retarder whose retardance is modulated as
    /// `δ0 + Δδ·sin(2πj/n)`, averaged uniformly over `n_phases` samples.
    PartialDepolarizer {
        delta0: f64,
        ddelta: f64,
        axis_deg: f64,
        n_phases: usize,
    },
    Polarizer { axis_deg: f64, transmittance: f64 },
    NeutralFilter { transmission: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite")))
            }
        };
        let unit = |x: f64, name: &str| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in [0, 1], got {x}")))
            }
        };
        match *self {
            ChannelSpec::Identity => Ok(()),
            ChannelSpec::Waveplate { theta_deg, delta } => {
                finite(theta_deg, "wave plate angle")?;
                finite(delta, "retardance")
            }
            ChannelSpec::Depolarizing { q } => unit(q, "depolarization"),
            ChannelSpec::PartialDepolarizer {
                delta0,
                ddelta,
                axis_deg,
                n_phases,
            } => {
                finite(delta0, "retardance")?;
                finite(ddelta, "retardance modulation")?;
                finite(axis_deg, "axis angle")?;
                if n_phases == 0 {
                    return Err(invalid("n_phases must be positive"));
                }
                Ok(())
            }
            ChannelSpec::Polarizer {
                axis_deg,
                transmittance,
            } => {
                finite(axis_deg, "polarizer axis")?;
                unit(transmittance, "polarizer transmittance")
            }
            ChannelSpec::NeutralFilter { transmission } => unit(transmission, "filter transmission"),
        }
    }

    /// Whether the channel loses no photons.
    pub fn is_trace_preserving(&self) -> bool {
        match *self {
            ChannelSpec::Polarizer { .. } => false,
            ChannelSpec::NeutralFilter { transmission } => transmission == 1.0,
            _ => true,
        }
    }
}

fn parse_args(body: &str, min: usize, max: usize, kind: &str) -> Result<Vec<f64>> {
    let args: Vec<f64> = body
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?} in {kind} spec")))
        })
        .collect::<Result<_>>()?;
    if args.len() < min || args.len() > max {
        return Err(Error::Parse(format!(
            "{kind} takes {min}..={max} arguments, got {}",
            args.len()
        )));
    }
    Ok(args)
}

impl FromStr for ChannelSpec {
    type Err = Error;

    /// Grammar: `identity`, `waveplate:THETA_DEG,DELTA_RAD`, `depol:Q`,
    /// `lcwp:DELTA0,DDELTA[,AXIS_DEG[,N_PHASES]]`, `polarizer:AXIS_DEG,T`,
    /// `filter:TRANSMISSION`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = match s.split_once(':') {
            Some((k, b)) => (k.trim(), Some(b)),
            None => (s, None),
        };
        let need = || body.ok_or_else(|| Error::Parse(format!("{kind} needs arguments")));
        let spec = match kind {
            "identity" => {
                if body.is_some() {
                    return Err(Error::Parse("identity takes no arguments".into()));
                }
                ChannelSpec::Identity
            }
            "waveplate" => {
                let a = parse_args(need()?, 2, 2, kind)?;
                ChannelSpec::Waveplate {
                    theta_deg: a[0],
                    delta: a[1],
                }
            }
            "depol" => {
                let a = parse_args(need()?, 1, 1, kind)?;
                ChannelSpec::Depolarizing { q: a[0] }
            }
            "lcwp" => {
                let a = parse_args(need()?, 2, 4, kind)?;
                let n_phases = match a.get(3) {
                    Some(&n) if n >= 1.0 && n.fract() == 0.0 => n as usize,
                    Some(&n) => return Err(Error::Parse(format!("bad phase count {n}"))),
                    None => DEFAULT_LCWP_PHASES,
                };
                ChannelSpec::PartialDepolarizer {
                    delta0: a[0],
                    ddelta: a[1],
                    axis_deg: a.get(2).copied().unwrap_or(0.0),
                    n_phases,
                }
            }
            "polarizer" => {
                let a = parse_args(need()?, 2, 2, kind)?;
                ChannelSpec::Polarizer {
                    axis_deg: a[0],
                    transmittance: a[1],
                }
            }
            "filter" => {
                let a = parse_args(need()?, 1, 1, kind)?;
                ChannelSpec::NeutralFilter { transmission: a[0] }
            }
            other => return Err(Error::Parse(format!("unknown channel kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelSpec::Identity => write!(f, "identity"),
            ChannelSpec::Waveplate { theta_deg, delta } => write!(f, "waveplate:{theta_deg},{delta}"),
            ChannelSpec::Depolarizing { q } => write!(f, "depol:{q}"),
            ChannelSpec::PartialDepolarizer {
                delta0,
                ddelta,
                axis_deg,
                n_phases,
            } => write!(f, "lcwp:{delta0},{ddelta},{axis_deg},{n_phases}"),
            ChannelSpec::Polarizer {
                axis_deg,
                transmittance,
            } => write!(f, "polarizer:{axis_deg},{transmittance}"),
            ChannelSpec::NeutralFilter { transmission } => write!(f, "filter:{transmission}"),
        }
    }
}

impl Serialize for ChannelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChannelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn waveplate_chi(theta_deg: f64, delta: f64) -> ChiMatrix {
    let ks = KrausSet::new(2, vec![waveplate_jones(theta_deg, delta)])
        .expect("Jones matrices are unitary");
    kraus_to_chi(&ks)
}

/// Builds the χ-matrix of a reference channel.
pub fn make_channel(spec: &ChannelSpec) -> Result<ChiMatrix> {
    spec.validate()?;
    let id = ChiMatrix::identity(2);
    Ok(match *spec {
        ChannelSpec::Identity => id,
        ChannelSpec::Waveplate { theta_deg, delta } => waveplate_chi(theta_deg, delta),
        ChannelSpec::Depolarizing { q } => {
            let mat = id.mat().scale(1.0 - q) + identity(4).scale(q / 2.0);
            ChiMatrix::new(2, mat, true)?
        }
        ChannelSpec::PartialDepolarizer {
            delta0,
            ddelta,
            axis_deg,
            n_phases,
        } => {
            let mut mat = zeros(4, 4);
            for j in 0..n_phases {
                let delta = delta0 + ddelta * (TAU * j as f64 / n_phases as f64).sin();
                mat += waveplate_chi(axis_deg, delta).mat();
            }
            ChiMatrix::new(2, mat.unscale(n_phases as f64), true)?
        }
        ChannelSpec::Polarizer {
            axis_deg,
            transmittance,
        } => {
            let e = linear_projector(axis_deg).scale(transmittance.sqrt());
            kraus_to_chi(&KrausSet::new(2, vec![e])?)
        }
        ChannelSpec::NeutralFilter { transmission } => {
            ChiMatrix::new(2, id.mat().scale(transmission), transmission == 1.0)?
        }
    })
}

/// Result of fitting a retarder to a χ-matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveplateFit {
    /// Fast-axis angle in degrees, in `[0, 180)`.
    pub theta_deg: f64,
    /// Retardance in radians, in `[0, π]`.
    pub delta: f64,
    /// Achieved squared Bures distance.
    pub residual: f64,
}

/// Residuals above this mean the input is not close to any wave plate.
pub const WAVEPLATE_RESIDUAL_LIMIT: f64 = 0.5;
const FIT_RESTARTS: usize = 8;

/// Maps `(θ, δ)` to the canonical representative of its equivalence class.
/// `W(θ + 90°, 2π − δ) = −W(θ, δ)` and `W(θ + 180°, δ) = W(θ, δ)`, so every
/// retarder has exactly one representative with `θ ∈ [0°, 180°)` and
/// `δ ∈ [0, π]`.
pub fn canonical_waveplate(theta_deg: f64, delta: f64) -> (f64, f64) {
    let mut theta = theta_deg;
    let mut delta = delta.rem_euclid(TAU);
    if delta > PI {
        theta += 90.0;
        delta = TAU - delta;
    }
    let theta = theta.rem_euclid(180.0);
    // rem_euclid can return exactly 180.0 for tiny negative inputs
    let theta = if theta >= 180.0 { 0.0 } else { theta };
    (theta, delta)
}

/// Recovers the retarder `(θ, δ)` whose χ-matrix is closest to `chi` in
/// Bures distance, using multi-start Nelder–Mead. Fails with
/// [`Error::NotAWaveplate`] when the best residual exceeds
/// [`WAVEPLATE_RESIDUAL_LIMIT`].
pub fn fit_waveplate(chi: &ChiMatrix) -> Result<WaveplateFit> {
    if chi.dim() != 2 {
        return Err(Error::DimensionMismatch("wave plate fit needs d = 2".into()));
    }
    let target = chi.mat();
    let objective = |x: &[f64]| bures_sq_unchecked(target, waveplate_chi(x[0], x[1]).mat());

    // Fixed seed: the fit is a deterministic function of its input.
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_df17);
    let mut best: Option<(f64, f64, f64)> = None;
    for _ in 0..FIT_RESTARTS {
        let x0 = [rng.random_range(0.0..180.0), rng.random_range(0.0..TAU)];
        let m = nelder_mead(objective, &x0, &[20.0, 0.6], 1e-15, 2000);
        if best.is_none_or(|b| m.f < b.2) {
            best = Some((m.x[0], m.x[1], m.f));
        }
    }
    let (theta, delta, residual) = best.expect("at least one restart");
    let (theta_deg, delta) = canonical_waveplate(theta, delta);
    if residual > WAVEPLATE_RESIDUAL_LIMIT {
        return Err(Error::NotAWaveplate { residual });
    }
    Ok(WaveplateFit {
        theta_deg,
        delta,
        residual,
    })
}
