//! Writes an identification run to disk, reads the CSV back and rebuilds
//! the estimation table from the file alone.

use rhonn_lateral::harness::metrics::EstimatorRun;
use rhonn_lateral::harness::record::{read_csv, TickRecord};
use rhonn_lateral::harness::{estimation_report, run_scenario, write_run, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("rhonn_estimation_example");
    let cfg = ScenarioConfig { mu: 0.35, identification_only: true, ..ScenarioConfig::default() };
    let out = run_scenario(&cfg)?;
    let files = write_run(&cfg, &out, &dir)?;
    println!("wrote {}", files.trajectory.display());

    let (hash, rows): (String, Vec<TickRecord>) = read_csv(&files.trajectory)?;
    let report = estimation_report(&EstimatorRun::from_records(&rows, &hash), cfg.metrics.warmup)?;
    print!("{}", report.to_markdown());
    Ok(())
}
