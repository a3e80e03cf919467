//! Double lane change with every controller; prints the comparison table.
//!
//! Usage: closed_loop_dlc [mu] [v0_kmh]

use rhonn_lateral::control::ControllerKind;
use rhonn_lateral::harness::run::{comparison_markdown, run_batch};
use rhonn_lateral::harness::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mu: f64 = args.next().map_or(Ok(0.35), |s| s.parse())?;
    let v0: f64 = args.next().map_or(Ok(65.0), |s| s.parse())?;
    let cfgs: Vec<_> = ControllerKind::ALL
        .iter()
        .map(|&controller| ScenarioConfig { controller, mu, v0, ..ScenarioConfig::default() })
        .collect();
    let outs = run_batch(&cfgs).into_iter().collect::<Result<Vec<_>, _>>()?;
    let summaries: Vec<_> = outs.iter().map(|o| o.summary.clone()).collect();
    println!("DLC, mu {mu}, {v0} km/h\n");
    print!("{}", comparison_markdown(&summaries)?);
    Ok(())
}
