//! Closed-loop tomography runs and parameter sweeps.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    calibrate, simulate_block_lossy, simulate_block_tp, Calibration, CountRecord, Mode, NoiseModel, Retardances,
};
use crate::bayes::{
    bme, distribution_size, effective_sample_size, init_ensemble, ParticleEnsemble, ProposalScale, ResampleConfig,
    DEFAULT_PARTICLES_LOSSY, DEFAULT_PARTICLES_TP,
};
use crate::channels::{make_channel, ChannelSpec};
use crate::diagnostics::{
    chi_squared, plateau_detect_from, power_law_fit, r_dd, Field, PowerLawFit, TracePoint, DEFAULT_PLATEAU_SLOPE,
    DEFAULT_PLATEAU_WINDOW,
};
use crate::error::{invalid, Error, Result};
use crate::io;
use crate::planner::{block_size, choose, PlannerConfig, Strategy};
use crate::quantum::{process_distance, ChiMatrix};

/// Everything that defines one simulated tomography run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub channel: ChannelSpec,
    pub mode: Mode,
    pub strategy: Strategy,
    pub pool_size: usize,
    pub b_min: u64,
    pub eta: f64,
    /// Particle count; the mode's default when absent.
    pub particles: Option<usize>,
    /// Half-width of the uniform wave-plate angle error, degrees.
    pub noise_deg: f64,
    pub retardance_errors: Retardances,
    /// Photon budget. In lossy mode this is the lossless-equivalent
    /// exposure: the number of photons that would have been detected with
    /// no loss.
    pub max_events: u64,
    pub seed: u64,
    pub checkpoints_per_decade: u32,
    /// True detector intensities (lossy mode).
    pub intensities: [f64; 2],
    /// Duration of the calibration run; `null` uses exact intensities.
    pub calibration_time: Option<f64>,
    pub n_mh: usize,
    pub ess_fraction: f64,
    /// Fixed MH proposal scale; adaptive when absent.
    pub proposal_sigma: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PlannerConfig::default();
        let r = ResampleConfig::default();
        Self {
            channel: ChannelSpec::Identity,
            mode: Mode::Tp,
            strategy: p.strategy,
            pool_size: p.pool_size,
            b_min: p.b_min,
            eta: p.eta,
            particles: None,
            noise_deg: 0.0,
            retardance_errors: Retardances::default(),
            max_events: 100_000,
            seed: 0,
            checkpoints_per_decade: 20,
            intensities: Calibration::default().intensities,
            calibration_time: Some(1000.0),
            n_mh: r.n_mh,
            ess_fraction: r.ess_fraction,
            proposal_sigma: None,
        }
    }
}

impl RunConfig {
    pub fn planner(&self) -> PlannerConfig {
        PlannerConfig {
            strategy: self.strategy,
            pool_size: self.pool_size,
            b_min: self.b_min,
            eta: self.eta,
        }
    }

    pub fn resample_config(&self) -> ResampleConfig {
        ResampleConfig {
            ess_fraction: self.ess_fraction,
            n_mh: self.n_mh,
            scale: match self.proposal_sigma {
                Some(s) => ProposalScale::Fixed(s),
                None => ProposalScale::Adaptive,
            },
        }
    }

    pub fn particle_count(&self) -> usize {
        self.particles.unwrap_or(match self.mode {
            Mode::Tp => DEFAULT_PARTICLES_TP,
            Mode::Lossy => DEFAULT_PARTICLES_LOSSY,
        })
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        Ok(NoiseModel::new(self.noise_deg)?.with_retardance_errors(self.retardance_errors))
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.planner().validate()?;
        self.noise()?;
        Calibration::new(self.intensities[0], self.intensities[1])?;
        if self.mode == Mode::Tp && !self.channel.is_trace_preserving() {
            return Err(Error::NotTracePreserving(format!(
                "channel {} needs lossy mode",
                self.channel
            )));
        }
        if self.particle_count() < 2 {
            return Err(invalid("at least 2 particles are needed"));
        }
        if self.max_events < self.b_min {
            return Err(invalid(format!(
                "max_events {} is below the minimum block size {}",
                self.max_events, self.b_min
            )));
        }
        if self.checkpoints_per_decade < 1 {
            return Err(invalid("checkpoints_per_decade must be at least 1"));
        }
        if let Some(t) = self.calibration_time {
            if !(t > 0.0) {
                return Err(invalid(format!("calibration time must be positive, got {t}")));
            }
        }
        if !(self.ess_fraction >= 0.0 && self.ess_fraction <= 1.0) {
            return Err(invalid("ess_fraction must be in [0, 1]"));
        }
        if let Some(s) = self.proposal_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(invalid("proposal_sigma must be non-negative"));
            }
        }
        Ok(())
    }
}

/// `round(10^(k/per_decade))` for all values below `max`, then `max`.
pub fn checkpoint_grid(max: u64, per_decade: u32) -> Vec<u64> {
    let mut grid = Vec::new();
    for k in 0.. {
        let v = 10f64.powf(k as f64 / per_decade as f64).round() as u64;
        if v >= max {
            break;
        }
        if grid.last() != Some(&v) {
            grid.push(v);
        }
    }
    grid.push(max);
    grid
}

/// Result of one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: Vec<TracePoint>,
    pub estimate: ChiMatrix,
    pub records: Vec<CountRecord>,
    pub ensemble: ParticleEnsemble,
}

/// Independent RNG streams of a run, so that e.g. switching strategy does
/// not change the particle prior.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

/// Plans, simulates and updates until the event budget is spent, emitting a
/// trace point at each checkpoint passed.
pub fn run_tomography(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let truth = make_channel(&cfg.channel)?;
    let noise = cfg.noise()?;
    let planner = cfg.planner();
    let resample = cfg.resample_config();
    let mut rng_init = stream(cfg.seed, 0);
    let mut rng_plan = stream(cfg.seed, 1);
    let mut rng_sim = stream(cfg.seed, 2);
    let mut rng_mh = stream(cfg.seed, 3);

    let cal_true = Calibration::new(cfg.intensities[0], cfg.intensities[1])?;
    let cal_est = match cfg.calibration_time {
        Some(t) => calibrate(&cal_true, t, &mut stream(cfg.seed, 4))?,
        None => cal_true,
    };
    let mean_intensity = (cal_est.intensities[0] + cal_est.intensities[1]) / 2.0;

    let mut ens = init_ensemble(cfg.particle_count(), 2, cfg.mode, &mut rng_init)?.with_calibration(cal_est);
    let grid = checkpoint_grid(cfg.max_events, cfg.checkpoints_per_decade);
    let mut next_checkpoint = 0;
    let mut exposure = 0u64;
    let mut detected = 0u64;
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut records = Vec::new();

    while exposure < cfg.max_events {
        let b = block_size(exposure, &planner).min(cfg.max_events - exposure);
        let config = choose(&ens, &planner, &mut rng_plan).config;
        let rec = match cfg.mode {
            Mode::Tp => simulate_block_tp(&truth, &config, b, &noise, &mut rng_sim),
            Mode::Lossy => {
                let t = b as f64 / mean_intensity;
                simulate_block_lossy(&truth, &config, t, &cal_true, &noise, &mut rng_sim)
            }
        };
        // Consistency of the data with the estimate it was planned from.
        let chi2_norm = if rec.total() > 0 {
            chi_squared(&rec, &bme(&ens)) / rec.total() as f64
        } else {
            0.0
        };
        ens.update_weights(&rec).map_err(|e| Error::RunFailed {
            events: detected,
            source: Box::new(e),
        })?;
        records.push(rec);
        exposure += b;
        detected += rec.total();

        if next_checkpoint < grid.len() && exposure >= grid[next_checkpoint] {
            while next_checkpoint < grid.len() && grid[next_checkpoint] <= exposure {
                next_checkpoint += 1;
            }
            if trace.last().is_none_or(|p| detected > p.n) {
                let estimate = bme(&ens);
                let d2_truth = process_distance(&estimate, &truth)?;
                let dist_size = distribution_size(&ens);
                trace.push(TracePoint {
                    n: detected,
                    d2_truth: Some(d2_truth),
                    dist_size,
                    chi2_norm,
                    r_dd: r_dd(Some(d2_truth), dist_size),
                    ess: effective_sample_size(&ens),
                });
            }
        }
        ens.maybe_resample(&resample, &mut rng_mh);
    }

    Ok(RunOutput {
        trace,
        estimate: bme(&ens),
        records,
        ensemble: ens,
    })
}

/// Grid of runs: every combination of the axis values, each repeated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Axis values; an empty list keeps the base value.
    pub noise_deg: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub channels: Vec<ChannelSpec>,
    pub repeats: usize,
    /// Explicit per-repeat seeds, overriding the derived ones.
    pub seeds: Option<Vec<u64>>,
    /// Power-law fit window in N; the whole trace when absent.
    pub fit_range: Option<[f64; 2]>,
    pub fit_field: String,
    pub plateau_window: usize,
    pub plateau_slope: f64,
    /// Plateau search starts at this `N`.
    pub plateau_min_n: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: RunConfig::default(),
            noise_deg: Vec::new(),
            strategies: Vec::new(),
            channels: Vec::new(),
            repeats: 1,
            seeds: None,
            fit_range: None,
            fit_field: "d2_truth".into(),
            plateau_window: DEFAULT_PLATEAU_WINDOW,
            plateau_slope: DEFAULT_PLATEAU_SLOPE,
            plateau_min_n: 0,
        }
    }
}

/// Seed for repeat `r`, derived from the base seed. Cells share the seed of
/// a repeat, so strategies and noise levels are compared on paired runs.
pub fn derive_seed(base: u64, repeat: usize) -> u64 {
    stream(base, 1 << 32 | repeat as u64).next_u64()
}

impl SweepConfig {
    pub fn seeds(&self) -> Result<Vec<u64>> {
        let seeds = match &self.seeds {
            Some(s) => {
                if s.len() != self.repeats {
                    return Err(invalid(format!(
                        "{} explicit seeds given for {} repeats",
                        s.len(),
                        self.repeats
                    )));
                }
                s.clone()
            }
            None => (0..self.repeats).map(|r| derive_seed(self.base.seed, r)).collect(),
        };
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("repeat seeds must be distinct"));
        }
        Ok(seeds)
    }

    /// One base config per cell, with the repeat seed still unset.
    pub fn cells(&self) -> Vec<RunConfig> {
        let channels = if self.channels.is_empty() {
            vec![self.base.channel.clone()]
        } else {
            self.channels.clone()
        };
        let strategies = if self.strategies.is_empty() {
            vec![self.base.strategy]
        } else {
            self.strategies.clone()
        };
        let noises = if self.noise_deg.is_empty() {
            vec![self.base.noise_deg]
        } else {
            self.noise_deg.clone()
        };
        let mut out = Vec::new();
        for ch in &channels {
            for &st in &strategies {
                for &nz in &noises {
                    out.push(RunConfig {
                        channel: ch.clone(),
                        strategy: st,
                        noise_deg: nz,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(invalid("repeats must be at least 1"));
        }
        self.seeds()?;
        self.fit_field.parse::<Field>()?;
        for c in self.cells() {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

fn stat(xs: &[f64]) -> Stat {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stderr = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Stat { mean, stderr }
}

/// Mean and standard error of each trace field across repeats at one
/// checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    #[serde(rename = "N")]
    pub n: f64,
    pub d2_truth: Option<Stat>,
    pub dist_size: Stat,
    pub chi2_norm: Stat,
    pub r_dd: Option<Stat>,
    pub ess: Stat,
}

impl AggregatePoint {
    /// The means as a trace point (`N` rounded).
    pub fn mean_point(&self) -> TracePoint {
        TracePoint {
            n: self.n.round() as u64,
            d2_truth: self.d2_truth.map(|s| s.mean),
            dist_size: self.dist_size.mean,
            chi2_norm: self.chi2_norm.mean,
            r_dd: self.r_dd.map(|s| s.mean),
            ess: self.ess.mean,
        }
    }
}

/// Averages traces checkpoint by checkpoint, truncated to the shortest.
pub fn aggregate(traces: &[Vec<TracePoint>]) -> Vec<AggregatePoint> {
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let col = |f: &dyn Fn(&TracePoint) -> f64| -> Stat { stat(&traces.iter().map(|t| f(&t[i])).collect::<Vec<_>>()) };
            let opt = |f: &dyn Fn(&TracePoint) -> Option<f64>| -> Option<Stat> {
                traces.iter().map(|t| f(&t[i])).collect::<Option<Vec<f64>>>().map(|v| stat(&v))
            };
            AggregatePoint {
                n: col(&|p| p.n as f64).mean,
                d2_truth: opt(&|p| p.d2_truth),
                dist_size: col(&|p| p.dist_size),
                chi2_norm: col(&|p| p.chi2_norm),
                r_dd: opt(&|p| p.r_dd),
                ess: col(&|p| p.ess),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub channel: ChannelSpec,
    pub strategy: Strategy,
    pub noise_deg: f64,
    pub seeds: Vec<u64>,
    pub mean: Vec<AggregatePoint>,
    pub fit: Option<PowerLawFit>,
    pub plateau_d2_truth: Option<u64>,
    pub plateau_chi2_norm: Option<u64>,
    #[serde(skip)]
    pub traces: Vec<Vec<TracePoint>>,
    #[serde(skip)]
    pub estimates: Vec<ChiMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub cells: Vec<CellReport>,
}

/// Fits `field` of a mean trace over `range`.
pub fn fit_trace(trace: &[TracePoint], field: Field, range: Option<[f64; 2]>) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter_map(|p| field.get(p).map(|y| (p.n as f64, y)))
        .collect();
    let [lo, hi] = range.unwrap_or([0.0, f64::INFINITY]);
    power_law_fit(&pts, lo, hi)
}

/// Runs every cell and repeat (in parallel on `jobs` threads) and
/// aggregates per cell.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<SweepReport> {
    cfg.validate()?;
    let seeds = cfg.seeds()?;
    let cells = cfg.cells();
    let field: Field = cfg.fit_field.parse()?;
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..seeds.len()).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let outputs: Vec<Result<(Vec<TracePoint>, ChiMatrix)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let run = RunConfig {
                    seed: seeds[r],
                    ..cells[c].clone()
                };
                run_tomography(&run).map(|o| (o.trace, o.estimate))
            })
            .collect()
    });
    let mut per_cell: Vec<(Vec<Vec<TracePoint>>, Vec<ChiMatrix>)> = vec![(Vec::new(), Vec::new()); cells.len()];
    for (&(c, _), out) in tasks.iter().zip(outputs) {
        let (t, e) = out?;
        per_cell[c].0.push(t);
        per_cell[c].1.push(e);
    }
    let reports = cells
        .iter()
        .zip(per_cell)
        .map(|(cell, (traces, estimates))| {
            let mean = aggregate(&traces);
            let mean_trace: Vec<TracePoint> = mean.iter().map(AggregatePoint::mean_point).collect();
            CellReport {
                channel: cell.channel.clone(),
                strategy: cell.strategy,
                noise_deg: cell.noise_deg,
                seeds: seeds.clone(),
                fit: fit_trace(&mean_trace, field, cfg.fit_range).ok(),
                plateau_d2_truth: plateau_detect_from(
                    &mean_trace,
                    Field::D2Truth,
                    cfg.plateau_window,
                    cfg.plateau_slope,
                    cfg.plateau_min_n,
                ),
                plateau_chi2_norm: plateau_detect_from(
                    &mean_trace,
                    Field::Chi2Norm,
                    cfg.plateau_window,
                    cfg.plateau_slope,
                    cfg.plateau_min_n,
                ),
                mean,
                traces,
                estimates,
            }
        })
        .collect();
    Ok(SweepReport { cells: reports })
}

/// `report.json` plus one trace and estimate per run under
/// `cell_<i>/run_<r>`.
pub fn write_sweep(report: &SweepReport, dir: &Path) -> Result<()> {
    for (i, cell) in report.cells.iter().enumerate() {
        let cd = dir.join(format!("cell_{i}"));
        for (r, (t, e)) in cell.traces.iter().zip(&cell.estimates).enumerate() {
            io::write_atomic(&cd.join(format!("run_{r}.jsonl")), &io::trace_to_jsonl(t))?;
            io::write_atomic(&cd.join(format!("run_{r}_estimate.json")), &io::chi_to_string(e))?;
        }
    }
    let json = serde_json::to_string_pretty(report)?;
    io::write_atomic(&dir.join("report.json"), &(json + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> RunConfig {
        RunConfig {
            particles: Some(100),
            max_events: 2_000,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn grid_shape() {
        let g = checkpoint_grid(1000, 20);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 1000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.contains(&100));
        assert_eq!(checkpoint_grid(50, 20).last(), Some(&50));
    }

    #[test]
    fn single_block_run() {
        let cfg = RunConfig {
            max_events: 50,
            ..quick(1)
        };
        let out = run_tomography(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].n, 50);
    }

    #[test]
    fn trace_is_strictly_increasing_and_ends_at_budget() {
        let out = run_tomography(&quick(2)).unwrap();
        assert!(out.trace.windows(2).all(|w| w[0].n < w[1].n));
        assert_eq!(out.trace.last().unwrap().n, 2_000);
        assert_eq!(out.records.iter().map(|r| r.total()).sum::<u64>(), 2_000);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_tomography(&quick(3)).unwrap();
        let b = run_tomography(&quick(3)).unwrap();
        assert_eq!(io::trace_to_jsonl(&a.trace), io::trace_to_jsonl(&b.trace));
        let c = run_tomography(&quick(4)).unwrap();
        assert_ne!(io::trace_to_jsonl(&a.trace), io::trace_to_jsonl(&c.trace));
    }

    #[test]
    fn lossy_run_counts_detected_photons() {
        let cfg = RunConfig {
            channel: "filter:0.5".parse().unwrap(),
            mode: Mode::Lossy,
            particles: Some(200),
            max_events: 2_000,
            seed: 5,
            ..Default::default()
        };
        let out = run_tomography(&cfg).unwrap();
        assert!(out.trace.windows(2).all(|w| w[0].n < w[1].n));
        let total: u64 = out.records.iter().map(|r| r.total()).sum();
        assert_eq!(out.trace.last().unwrap().n, total);
        // Half the light is absorbed.
        assert!((total as f64 / 1000.0 - 1.0).abs() < 0.2, "{total}");
    }

    #[test]
    fn invalid_configs() {
        let lossy_in_tp = RunConfig {
            channel: "filter:0.5".parse().unwrap(),
            ..quick(0)
        };
        assert!(run_tomography(&lossy_in_tp).unwrap_err().is_validation());
        let short = RunConfig {
            max_events: 10,
            ..quick(0)
        };
        assert!(run_tomography(&short).unwrap_err().is_validation());
        let one = RunConfig {
            particles: Some(1),
            ..quick(0)
        };
        assert!(run_tomography(&one).is_err());
    }

    #[test]
    fn single_repeat_aggregate_is_the_trace() {
        let sweep = SweepConfig {
            base: quick(6),
            ..Default::default()
        };
        let rep = run_sweep(&sweep, 1).unwrap();
        let cell = &rep.cells[0];
        let single = &cell.traces[0];
        let mean: Vec<TracePoint> = cell.mean.iter().map(AggregatePoint::mean_point).collect();
        assert_eq!(&mean, single);
        assert!(cell.mean.iter().all(|p| p.dist_size.stderr == 0.0));
    }

    #[test]
    fn aggregate_is_the_arithmetic_mean() {
        let traces: Vec<Vec<TracePoint>> = (0..3)
            .map(|s| run_tomography(&quick(10 + s)).unwrap().trace)
            .collect();
        let agg = aggregate(&traces);
        for (i, p) in agg.iter().enumerate() {
            let m = traces.iter().map(|t| t[i].dist_size).sum::<f64>() / 3.0;
            assert!((p.dist_size.mean - m).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let sweep = SweepConfig {
            base: quick(0),
            repeats: 2,
            seeds: Some(vec![7, 7]),
            ..Default::default()
        };
        assert!(run_sweep(&sweep, 1).unwrap_err().is_validation());
        let derived = SweepConfig {
            repeats: 50,
            ..sweep
        };
        let derived = SweepConfig { seeds: None, ..derived };
        assert_eq!(derived.seeds().unwrap().len(), 50);
    }

    #[test]
    fn cells_cover_the_product() {
        let sweep = SweepConfig {
            noise_deg: vec![0.0, 1.0],
            strategies: vec![Strategy::Adaptive, Strategy::Random],
            ..Default::default()
        };
        let cells = sweep.cells();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1].noise_deg, 1.0);
        assert_eq!(cells[2].strategy, Strategy::Random);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"channel":"depol:0.5","seed":9}"#).unwrap();
        assert_eq!(cfg.channel, "depol:0.5".parse().unwrap());
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.b_min, 50);
        assert!(serde_json::from_str::<RunConfig>(r#"{"chanel":"identity"}"#).is_err());
    }
}
