//! Tomography of a neutral filter with the Poissonian model, including the
//! intensity calibration step.

use aqpt::apparatus::Mode;
use aqpt::channels::ChannelSpec;
use aqpt::quantum::{average_transmittance, purity};
use aqpt::runner::{run_tomography, RunConfig};

fn main() -> aqpt::Result<()> {
    let cfg = RunConfig {
        channel: ChannelSpec::NeutralFilter { transmission: 0.5 },
        mode: Mode::Lossy,
        particles: Some(2000),
        max_events: 20_000,
        seed: 8,
        ..RunConfig::default()
    };
    let out = run_tomography(&cfg)?;
    for p in out.trace.iter().step_by(5) {
        println!("N {:>6}  d2 {:.3e}  spread {:.3e}", p.n, p.d2_truth.unwrap(), p.dist_size);
    }
    println!(
        "estimated transmittance {:.4} (true 0.5), purity {:.4}",
        average_transmittance(&out.estimate),
        purity(&out.estimate)
    );
    Ok(())
}
