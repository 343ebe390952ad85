//! Command-line front end: `run`, `sweep`, `fit` and `channel-info`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::apparatus::Mode;
use crate::channels::{fit_waveplate, make_channel, ChannelSpec};
use crate::diagnostics::Field;
use crate::error::{invalid, Error, Result};
use crate::io;
use crate::planner::Strategy;
use crate::quantum::{average_transmittance, purity};
use crate::runner::{fit_trace, run_sweep, run_tomography, write_sweep, RunConfig, SweepConfig};

#[derive(Parser, Debug)]
#[command(name = "aqpt", version, about = "Adaptive Bayesian process tomography of polarization channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one tomography run and write its convergence trace.
    Run(RunArgs),
    /// Run a grid of configurations with repeats and aggregate them.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit C·N^alpha to a trace column.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// `NMIN:NMAX`; either side may be empty.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value = "d2_truth")]
        field: String,
    },
    /// Print the χ-matrix, purity and transmittance of a channel.
    ChannelInfo { spec: String },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON run config; flags given explicitly override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    noise_deg: Option<f64>,
    #[arg(long)]
    max_events: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long)]
    bmin: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Trace JSONL; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final estimate as χ JSON.
    #[arg(long)]
    estimate: Option<PathBuf>,
    /// All count records as JSONL.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Final particle χ's and weights.
    #[arg(long)]
    dump_ensemble: Option<PathBuf>,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &self.channel {
            cfg.channel = c.parse::<ChannelSpec>()?;
        }
        if let Some(m) = &self.mode {
            cfg.mode = m.parse::<Mode>()?;
        }
        if let Some(s) = &self.strategy {
            cfg.strategy = s.parse::<Strategy>()?;
        }
        if self.particles.is_some() {
            cfg.particles = self.particles;
        }
        macro_rules! take {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        take!(noise_deg => noise_deg, max_events => max_events, seed => seed, pool => pool_size, bmin => b_min, eta => eta);
        Ok(cfg)
    }
}

fn parse_range(s: &str) -> Result<[f64; 2]> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("range must look like NMIN:NMAX, got {s:?}")))?;
    let side = |t: &str, default: f64| -> Result<f64> {
        let t = t.trim();
        if t.is_empty() {
            Ok(default)
        } else {
            t.parse().map_err(|_| Error::Parse(format!("bad range bound {t:?}")))
        }
    };
    let r = [side(lo, 0.0)?, side(hi, f64::INFINITY)?];
    if r[0] > r[1] {
        return Err(invalid(format!("empty range {s}")));
    }
    Ok(r)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(args) => {
            let cfg = args.to_config()?;
            let out = run_tomography(&cfg).inspect_err(|e| {
                if let Error::RunFailed { .. } = e {
                    if let Ok(json) = serde_json::to_string(&cfg) {
                        eprintln!("failing config: {json}");
                    }
                }
            })?;
            let trace = io::trace_to_jsonl(&out.trace);
            match &args.out {
                Some(p) => io::write_atomic(p, &trace)?,
                None => print!("{trace}"),
            }
            if let Some(p) = &args.estimate {
                io::write_atomic(p, &(io::chi_to_string(&out.estimate) + "\n"))?;
            }
            if let Some(p) = &args.records {
                io::write_atomic(p, &io::records_to_jsonl(&out.records))?;
            }
            if let Some(p) = &args.dump_ensemble {
                io::write_atomic(p, &(io::snapshot_to_string(&out.ensemble) + "\n"))?;
            }
            Ok(())
        }
        Command::Sweep { config, jobs, out_dir } => {
            let cfg: SweepConfig = serde_json::from_str(&std::fs::read_to_string(&config)?)?;
            let report = run_sweep(&cfg, jobs)?;
            write_sweep(&report, &out_dir)
        }
        Command::Fit { input, range, field } => {
            let trace = io::read_trace(&input)?;
            let range = range.as_deref().map(parse_range).transpose()?;
            let fit = fit_trace(&trace, field.parse::<Field>()?, range)?;
            println!("{}", serde_json::to_string(&fit)?);
            Ok(())
        }
        Command::ChannelInfo { spec } => {
            let spec: ChannelSpec = spec.parse()?;
            let chi = make_channel(&spec)?;
            println!("channel: {spec}");
            println!("trace_preserving: {}", chi.is_trace_preserving());
            println!("chi:");
            let m = chi.mat();
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols())
                    .map(|j| format!("{:>8.4}{:+.4}i", m[(i, j)].re, m[(i, j)].im))
                    .collect();
                println!("  {}", row.join("  "));
            }
            println!("purity: {}", purity(&chi));
            println!("transmittance: {}", average_transmittance(&chi));
            if let Ok(wp) = fit_waveplate(&chi) {
                println!(
                    "waveplate: theta {:.4} deg, retardance {:.6} rad (residual {:.2e})",
                    wp.theta_deg, wp.delta, wp.residual
                );
            }
            println!("chi_json: {}", io::chi_to_string(&chi));
            Ok(())
        }
    }
}

/// Runs the CLI on `args` and returns the process exit code: 0 on success,
/// 1 for invalid input, 2 when a run fails.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
