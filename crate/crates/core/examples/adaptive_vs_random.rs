//! One identity-channel run per strategy and the fitted convergence rate of
//! each.

use aqpt::diagnostics::Field;
use aqpt::planner::Strategy;
use aqpt::runner::{fit_trace, run_tomography, RunConfig};

fn main() -> aqpt::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    for strategy in [Strategy::Adaptive, Strategy::Random] {
        let cfg = RunConfig {
            strategy,
            max_events: n,
            particles: Some(1000),
            seed: 11,
            ..RunConfig::default()
        };
        let out = run_tomography(&cfg)?;
        let fit = fit_trace(&out.trace, Field::D2Truth, Some([1e3, n as f64]))?;
        let last = out.trace.last().unwrap();
        println!(
            "{strategy:<8}  final d2 {:.3e}  alpha {:.3} ± {:.3}",
            last.d2_truth.unwrap(),
            fit.alpha,
            fit.stderr_alpha
        );
    }
    Ok(())
}
