//! Reconstructs an unknown retarder and reads its axis and retardance off
//! the estimate.

use aqpt::channels::{fit_waveplate, ChannelSpec};
use aqpt::runner::{run_tomography, RunConfig};

fn main() -> aqpt::Result<()> {
    let (theta, delta) = (35.0, 1.9);
    let cfg = RunConfig {
        channel: ChannelSpec::Waveplate { theta_deg: theta, delta },
        max_events: 50_000,
        particles: Some(1000),
        seed: 4,
        ..RunConfig::default()
    };
    let out = run_tomography(&cfg)?;
    let fit = fit_waveplate(&out.estimate)?;
    println!("true      theta {theta:.2}°  delta {delta:.4} rad");
    println!(
        "estimated theta {:.2}°  delta {:.4} rad  (residual {:.2e})",
        fit.theta_deg, fit.delta, fit.residual
    );
    Ok(())
}
