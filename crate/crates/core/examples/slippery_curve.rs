//! Constant-radius curve on low adhesion, controller active from 5 s.

use rhonn_lateral::control::ControllerKind;
use rhonn_lateral::harness::run::{comparison_markdown, run_batch};
use rhonn_lateral::harness::ScenarioConfig;
use rhonn_lateral::plant::path::ScenarioKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v0: f64 = std::env::args().nth(1).map_or(Ok(85.0), |s| s.parse())?;
    let cfgs: Vec<_> = [ControllerKind::NmpcRhonn, ControllerKind::Lmpc, ControllerKind::Off]
        .into_iter()
        .map(|controller| ScenarioConfig { scenario: ScenarioKind::SlipperyCurve, controller, mu: 0.35, v0, ..ScenarioConfig::default() })
        .collect();
    let outs = run_batch(&cfgs).into_iter().collect::<Result<Vec<_>, _>>()?;
    print!("{}", comparison_markdown(&outs.iter().map(|o| o.summary.clone()).collect::<Vec<_>>())?);

    let rhonn = &outs[0].records;
    println!("\nNMPC-RHONN, every second:");
    for r in rhonn.iter().step_by(20) {
        println!(
            "t {:5.1}  dev {:+.2} m  r {:+.3} (ref {:+.3})  dM {:+7.1}",
            r.t, r.deviation, r.yaw_rate, r.ref_yaw_rate, r.dm_applied
        );
    }
    Ok(())
}
