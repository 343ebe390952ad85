//! Feeds random measurement blocks into a particle ensemble by hand and
//! watches the posterior contract around an unknown wave plate.

use aqpt::apparatus::{simulate_block_tp, MeasurementConfig, Mode, NoiseModel};
use aqpt::bayes::{bme, distribution_size, effective_sample_size, init_ensemble, ResampleConfig};
use aqpt::channels::{make_channel, ChannelSpec};
use aqpt::quantum::process_distance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> aqpt::Result<()> {
    let truth = make_channel(&ChannelSpec::Waveplate { theta_deg: 10.0, delta: 2.0 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ens = init_ensemble(500, 2, Mode::Tp, &mut rng)?;
    let cfg = ResampleConfig::default();
    let mut n = 0;
    for block in 1..=60 {
        let m = MeasurementConfig::random(&mut rng);
        let rec = simulate_block_tp(&truth, &m, 100, &NoiseModel::noiseless(), &mut rng);
        n += rec.total();
        ens.update_weights(&rec)?;
        let resampled = ens.maybe_resample(&cfg, &mut rng);
        if block % 10 == 0 || resampled.is_some() {
            println!(
                "N {n:>5}  d2 to truth {:.4}  spread {:.4}  ESS {:>6.1}{}",
                process_distance(&bme(&ens), &truth)?,
                distribution_size(&ens),
                effective_sample_size(&ens),
                resampled.map_or(String::new(), |s| format!("  resampled, MH acceptance {:.2}", s.acceptance))
            );
        }
    }
    Ok(())
}
