//! Highest DLC entry speed each controller completes within the deviation
//! limit. Slow: every bisection step is a full run.

use rhonn_lateral::control::ControllerKind;
use rhonn_lateral::harness::frontier::frontiers;
use rhonn_lateral::harness::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu: f64 = std::env::args().nth(1).map_or(Ok(0.35), |s| s.parse())?;
    let base = ScenarioConfig { mu, ..ScenarioConfig::default() };
    let kinds = [ControllerKind::NmpcRhonn, ControllerKind::Lmpc, ControllerKind::Off];
    for r in frontiers(&base, &kinds)? {
        let tried: Vec<String> = r.trials.iter().map(|(v, ok)| format!("{v}{}", if *ok { "+" } else { "-" })).collect();
        println!("{:<11} {:5.1} km/h   [{}]", r.controller.to_string(), r.frontier, tried.join(" "));
    }
    Ok(())
}
