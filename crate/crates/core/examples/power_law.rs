//! Power-law fit and plateau detection on a trace file, or on a fresh noisy
//! run when no file is given.

use std::path::Path;

use aqpt::diagnostics::{plateau_detect_from, Field, DEFAULT_PLATEAU_SLOPE, DEFAULT_PLATEAU_WINDOW};
use aqpt::runner::{fit_trace, run_tomography, RunConfig};

fn main() -> aqpt::Result<()> {
    let trace = match std::env::args().nth(1) {
        Some(p) => aqpt::io::read_trace(Path::new(&p))?,
        None => {
            let cfg = RunConfig {
                noise_deg: 2.0,
                max_events: 200_000,
                particles: Some(500),
                seed: 6,
                ..RunConfig::default()
            };
            run_tomography(&cfg)?.trace
        }
    };
    for field in [Field::D2Truth, Field::DistSize] {
        match fit_trace(&trace, field, Some([1e3, f64::INFINITY])) {
            Ok(f) => println!("{field:?}: C {:.3} alpha {:.3} ± {:.3} over {} points", f.c, f.alpha, f.stderr_alpha, f.n_points),
            Err(e) => println!("{field:?}: {e}"),
        }
    }
    for field in [Field::D2Truth, Field::Chi2Norm] {
        let n = plateau_detect_from(&trace, field, DEFAULT_PLATEAU_WINDOW, DEFAULT_PLATEAU_SLOPE, 1_000);
        println!("{field:?} plateau at N = {n:?}");
    }
    Ok(())
}
