//! A small strategy-by-channel sweep read from JSON and written to disk.

use aqpt::runner::{run_sweep, write_sweep, SweepConfig};

const CONFIG: &str = r#"{
    "base": {"max_events": 20000, "particles": 300, "seed": 42},
    "strategies": ["adaptive", "random"],
    "channels": ["identity", "depol:0.5"],
    "repeats": 3,
    "fit_range": [1000, 20000]
}"#;

fn main() -> aqpt::Result<()> {
    let cfg: SweepConfig = serde_json::from_str(CONFIG)?;
    let out = std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into());
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_sweep(&cfg, jobs)?;
    for cell in &report.cells {
        let alpha = cell.fit.as_ref().map_or(f64::NAN, |f| f.alpha);
        println!("{:<12} {:<8} alpha {alpha:.3}", cell.channel.to_string(), cell.strategy);
    }
    write_sweep(&report, out.as_ref())?;
    println!("wrote {out}/report.json");
    Ok(())
}
