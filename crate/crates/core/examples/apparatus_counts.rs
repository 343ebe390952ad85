//! Simulated photon counting at a handful of wave-plate settings, with and
//! without stage jitter.

use aqpt::apparatus::{outcome_prob, simulate_block_tp, MeasurementConfig, NoiseModel};
use aqpt::channels::{make_channel, ChannelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> aqpt::Result<()> {
    let chi = make_channel(&ChannelSpec::Waveplate { theta_deg: 30.0, delta: 1.0 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let b = 10_000;
    for phi0 in [0.0, 2.0] {
        let noise = NoiseModel::new(phi0)?;
        println!("stage jitter ±{phi0}°");
        for _ in 0..4 {
            let cfg = MeasurementConfig::random(&mut rng);
            let rec = simulate_block_tp(&chi, &cfg, b, &noise, &mut rng);
            let [h, q, q2, h2] = cfg.as_array();
            println!(
                "  prep ({h:6.1}, {q:6.1}) meas ({q2:6.1}, {h2:6.1})  P0 {:.4}  n0/b {:.4}",
                outcome_prob(&chi, &cfg, 0),
                rec.counts[0] as f64 / b as f64
            );
        }
    }
    Ok(())
}
