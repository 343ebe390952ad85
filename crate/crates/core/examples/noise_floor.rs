//! Distance floors reached under wave-plate angle jitter, averaged over a
//! few runs per setting.

use aqpt::planner::Strategy;
use aqpt::runner::{run_sweep, RunConfig, SweepConfig};

fn main() -> aqpt::Result<()> {
    let cfg = SweepConfig {
        base: RunConfig {
            max_events: 100_000,
            particles: Some(500),
            seed: 5,
            ..RunConfig::default()
        },
        noise_deg: vec![0.0, 1.0, 4.0],
        strategies: vec![Strategy::Adaptive, Strategy::Random],
        repeats: 4,
        ..SweepConfig::default()
    };
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_sweep(&cfg, jobs)?;
    for cell in &report.cells {
        let last = cell.mean.last().unwrap();
        let d2 = last.d2_truth.unwrap();
        println!(
            "jitter {:>3}°  {:<8}  d2 at N={:.0}: {:.3e} ± {:.1e}",
            cell.noise_deg, cell.strategy, last.n, d2.mean, d2.stderr
        );
    }
    Ok(())
}
