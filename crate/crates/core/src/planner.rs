//! Choice of the next measurement setting and of the block length.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::{MeasurementConfig, Probe};
use crate::bayes::ParticleEnsemble;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Adaptive,
    Random,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(Strategy::Adaptive),
            "random" => Ok(Strategy::Random),
            _ => Err(Error::Parse(format!("strategy must be adaptive or random, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Adaptive => "adaptive",
            Strategy::Random => "random",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub strategy: Strategy,
    pub pool_size: usize,
    pub b_min: u64,
    pub eta: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Adaptive,
            pool_size: 100,
            b_min: 50,
            eta: 0.1,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 1 {
            return Err(invalid("candidate pool must hold at least one config"));
        }
        if self.b_min < 1 {
            return Err(invalid("minimum block size must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(format!("eta must be in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }
}

/// Binary Shannon entropy in bits.
fn entropy2(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

/// Entropy of the predictive distribution minus the expected entropy of the
/// per-particle distributions, each over the two-element outcome
/// distribution `(P(0), 1 − P(0))`.
fn gain_from_p0(ens: &ParticleEnsemble, probe: &Probe) -> f64 {
    let mut marginal = 0.0;
    let mut expected = 0.0;
    for p in ens.particles() {
        let w = p.weight();
        if w == 0.0 {
            continue;
        }
        let p0 = probe.prob(p.chi(), 0);
        marginal += w * p0;
        expected += w * entropy2(p0);
    }
    (entropy2(marginal.clamp(0.0, 1.0)) - expected).max(0.0)
}

/// Expected information (bits) a single photon at `cfg` carries about χ.
/// For a trace-preserving ensemble `P(1) = 1 − P(0)`.
pub fn info_gain(ens: &ParticleEnsemble, cfg: &MeasurementConfig) -> f64 {
    gain_from_p0(ens, &Probe::new(cfg))
}

/// The lossy-mode heuristic: the same entropy difference with the outcome
/// distribution replaced by `π(0) = P(0)`, `π(1) = 1 − P(0)`. Identical to
/// [`info_gain`] on trace-preserving ensembles.
pub fn info_gain_lossy(ens: &ParticleEnsemble, cfg: &MeasurementConfig) -> f64 {
    gain_from_p0(ens, &Probe::new(cfg))
}

/// Gains for each config, in order.
pub fn pool_gains(ens: &ParticleEnsemble, pool: &[MeasurementConfig]) -> Vec<f64> {
    pool.par_iter().map(|c| gain_from_p0(ens, &Probe::new(c))).collect()
}

/// A chosen configuration and, for adaptive choices, its gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Choice {
    pub config: MeasurementConfig,
    pub gain: Option<f64>,
}

pub fn choose<R: Rng + ?Sized>(ens: &ParticleEnsemble, planner: &PlannerConfig, rng: &mut R) -> Choice {
    match planner.strategy {
        Strategy::Random => Choice {
            config: MeasurementConfig::random(rng),
            gain: None,
        },
        Strategy::Adaptive => {
            let pool: Vec<MeasurementConfig> =
                (0..planner.pool_size.max(1)).map(|_| MeasurementConfig::random(rng)).collect();
            let gains = pool_gains(ens, &pool);
            let mut best = 0;
            for (i, g) in gains.iter().enumerate() {
                if *g > gains[best] {
                    best = i;
                }
            }
            Choice {
                config: pool[best],
                gain: Some(gains[best]),
            }
        }
    }
}

pub fn next_config<R: Rng + ?Sized>(ens: &ParticleEnsemble, planner: &PlannerConfig, rng: &mut R) -> MeasurementConfig {
    choose(ens, planner, rng).config
}

/// `max(b_min, ⌈η·N⌉)` photons for the next block after `n` so far.
pub fn block_size(n: u64, planner: &PlannerConfig) -> u64 {
    let prop = (planner.eta * n as f64).ceil() as u64;
    prop.max(planner.b_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::Mode;
    use crate::bayes::init_ensemble;
    use crate::channels::make_channel;
    use crate::quantum::linalg::{c64, zeros};
    use crate::quantum::ChiMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rotator(p: f64) -> ChiMatrix {
        let theta = p.sqrt().acos().to_degrees() / 2.0;
        make_channel(&format!("waveplate:{theta},{}", std::f64::consts::PI).parse().unwrap()).unwrap()
    }

    #[test]
    fn point_mass_has_no_gain() {
        let ens = ParticleEnsemble::from_chis(Mode::Tp, &[rotator(0.3)], &[1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = MeasurementConfig::random(&mut rng);
            assert_eq!(info_gain(&ens, &c), 0.0);
            assert_eq!(info_gain_lossy(&ens, &c), 0.0);
        }
    }

    #[test]
    fn opposite_certain_particles_give_one_bit() {
        let ens = ParticleEnsemble::from_chis(Mode::Tp, &[rotator(1.0), rotator(0.0)], &[1.0, 1.0]).unwrap();
        let g = info_gain(&ens, &MeasurementConfig::aligned());
        assert!((g - 1.0).abs() < 1e-9, "{g}");
    }

    #[test]
    fn gain_is_bounded_and_modes_agree_when_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ens = init_ensemble(200, 2, Mode::Tp, &mut rng).unwrap();
        for _ in 0..50 {
            let c = MeasurementConfig::random(&mut rng);
            let g = info_gain(&ens, &c);
            assert!((0.0..=1.0).contains(&g));
            assert!((g - info_gain_lossy(&ens, &c)).abs() < 1e-12);
        }
    }

    #[test]
    fn lossy_gain_matches_direct_formula() {
        let mut a = zeros(4, 4);
        a[(0, 0)] = c64(0.8, 0.0);
        let mut b = zeros(4, 4);
        b[(3, 3)] = c64(0.6, 0.0);
        b[(0, 0)] = c64(0.1, 0.0);
        let chis = [ChiMatrix::new(2, a, false).unwrap(), ChiMatrix::new(2, b, false).unwrap()];
        let ens = ParticleEnsemble::from_chis(Mode::Lossy, &chis, &[0.3, 0.7]).unwrap();
        let cfg = MeasurementConfig::new(10.0, 20.0, 30.0, 40.0).unwrap();
        let probe = Probe::new(&cfg);
        let p: Vec<f64> = chis.iter().map(|c| probe.prob(c, 0)).collect();
        let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        let m = 0.3 * p[0] + 0.7 * p[1];
        let direct = h(m) - 0.3 * h(p[0]) - 0.7 * h(p[1]);
        assert!((info_gain_lossy(&ens, &cfg) - direct).abs() < 1e-12);
    }

    #[test]
    fn gain_ignores_labels_and_duplication() {
        let chis = [rotator(0.2), rotator(0.7), rotator(0.5)];
        let w = [0.2, 0.5, 0.3];
        let base = ParticleEnsemble::from_chis(Mode::Tp, &chis, &w).unwrap();
        let perm = ParticleEnsemble::from_chis(Mode::Tp, &[chis[2].clone(), chis[0].clone(), chis[1].clone()], &[w[2], w[0], w[1]]).unwrap();
        let doubled_chis: Vec<ChiMatrix> = chis.iter().chain(chis.iter()).cloned().collect();
        let doubled_w: Vec<f64> = w.iter().chain(w.iter()).map(|x| x / 2.0).collect();
        let dup = ParticleEnsemble::from_chis(Mode::Tp, &doubled_chis, &doubled_w).unwrap();
        let cfg = MeasurementConfig::new(5.0, 60.0, 12.0, 100.0).unwrap();
        let g = info_gain(&base, &cfg);
        assert!((g - info_gain(&perm, &cfg)).abs() < 1e-12);
        assert!((g - info_gain(&dup, &cfg)).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_pool_is_the_random_strategy() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let ens = init_ensemble(20, 2, Mode::Tp, &mut r).unwrap();
        let adaptive = PlannerConfig {
            pool_size: 1,
            ..Default::default()
        };
        let random = PlannerConfig {
            strategy: Strategy::Random,
            ..Default::default()
        };
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            assert_eq!(next_config(&ens, &adaptive, &mut a), next_config(&ens, &random, &mut b));
        }
    }

    #[test]
    fn adaptive_choice_beats_random_probes() {
        // Identity vs a π rotation about z: the two only differ for inputs
        // and measurements off the z axis.
        let z = make_channel(&"waveplate:0,3.141592653589793".parse().unwrap()).unwrap();
        let ens = ParticleEnsemble::from_chis(Mode::Tp, &[ChiMatrix::identity(2), z], &[1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let choice = choose(&ens, &PlannerConfig::default(), &mut rng);
        let g = choice.gain.unwrap();
        assert!((g - info_gain(&ens, &choice.config)).abs() < 1e-12);
        for _ in 0..20 {
            assert!(g >= info_gain(&ens, &MeasurementConfig::random(&mut rng)));
        }
        assert!(g > 0.5, "{g}");
    }

    #[test]
    fn choices_are_reproducible() {
        let mut r = ChaCha8Rng::seed_from_u64(6);
        let ens = init_ensemble(100, 2, Mode::Tp, &mut r).unwrap();
        let seq = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5).map(|_| next_config(&ens, &PlannerConfig::default(), &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(seq(7), seq(7));
    }

    #[test]
    fn planning_step_is_fast() {
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let ens = init_ensemble(1000, 2, Mode::Tp, &mut r).unwrap();
        let planner = PlannerConfig::default();
        choose(&ens, &planner, &mut r);
        let start = std::time::Instant::now();
        choose(&ens, &planner, &mut r);
        let elapsed = start.elapsed();
        assert!(elapsed.as_millis() < 100, "{elapsed:?}");
    }

    #[test]
    fn block_schedule() {
        let p = PlannerConfig::default();
        assert_eq!(block_size(0, &p), 50);
        assert_eq!(block_size(10_000, &p), 1_000);
        assert_eq!(block_size(10_001, &p), 1_001);
        let mut prev = 0;
        for n in (0..100_000).step_by(37) {
            let b = block_size(n, &p);
            assert!(b >= prev);
            prev = b;
        }
        let n = 1_000_000_000;
        assert!((block_size(n, &p) as f64 / n as f64 - 0.1).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(PlannerConfig::default().validate().is_ok());
        for bad in [
            PlannerConfig { pool_size: 0, ..Default::default() },
            PlannerConfig { b_min: 0, ..Default::default() },
            PlannerConfig { eta: 0.0, ..Default::default() },
            PlannerConfig { eta: 1.5, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
