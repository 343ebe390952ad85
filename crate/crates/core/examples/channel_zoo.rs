//! Builds each reference channel and prints its basic figures of merit.

use aqpt::channels::{fit_waveplate, make_channel, ChannelSpec};
use aqpt::quantum::{average_transmittance, purity};

fn main() -> aqpt::Result<()> {
    let specs = [
        "identity",
        "waveplate:22.5,1.5708",
        "depol:0.5",
        "depol:1",
        "lcwp:1.2,2.5,0,64",
        "polarizer:0,0.9",
        "filter:0.5",
    ];
    println!("{:<24} {:>8} {:>8}  wave plate", "channel", "purity", "T");
    for s in specs {
        let spec: ChannelSpec = s.parse()?;
        let chi = make_channel(&spec)?;
        let wp = match fit_waveplate(&chi).ok().filter(|_| spec.is_trace_preserving()) {
            Some(f) => format!("theta {:.2}°, delta {:.3} rad", f.theta_deg, f.delta),
            None => "-".into(),
        };
        println!("{:<24} {:>8.4} {:>8.4}  {wp}", spec.to_string(), purity(&chi), average_transmittance(&chi));
    }
    Ok(())
}
