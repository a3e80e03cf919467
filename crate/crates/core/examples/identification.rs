//! Online identification on a double lane change with no yaw moment, and
//! the estimation error table for the three estimators.

use rhonn_lateral::harness::metrics::EstimatorRun;
use rhonn_lateral::harness::{estimation_report, run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = std::env::args().nth(1).map_or(Ok(0.7), |s| s.parse())?;
    let cfg = ScenarioConfig { mu, v0: 65.0, identification_only: true, ..ScenarioConfig::default() };
    let out = run_scenario(&cfg)?;
    println!("mu {mu}: {:?} after {} ticks", out.summary.termination, out.records.len());
    let runs = EstimatorRun::from_records(&out.records, &out.summary.plant_hash);
    print!("{}", estimation_report(&runs, cfg.metrics.warmup)?.to_markdown());

    // last few ticks, truth vs network
    for r in out.records.iter().rev().take(5).rev() {
        println!("t {:5.2}  vy {:+.3} / {:+.3}  r {:+.3} / {:+.3}", r.t, r.vy, r.rhonn_vy, r.yaw_rate, r.rhonn_yaw_rate);
    }
    Ok(())
}
