//! Steady-state targets from a model learned mid-manoeuvre.

use rhonn_lateral::harness::run::run_scenario_with;
use rhonn_lateral::harness::ScenarioConfig;
use rhonn_lateral::reference::reference_targets;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default();
    let mut snapshot = None;
    run_scenario_with(&cfg, |ctx| {
        if snapshot.is_none() && ctx.t >= 2.5 {
            snapshot = Some((ctx.model.clone(), ctx.measured, ctx.held, ctx.refs));
        }
    })?;
    let (model, x, held, used) = snapshot.ok_or("run ended before 2.5 s")?;
    println!("state vx {:.2} vy {:+.3} r {:+.3}, steer {:+.3}", x.vx, x.vy, x.yaw_rate, held.steer_wheel);
    println!("targets used in the run: vy {:+.3}, r {:+.4}", used.vy, used.yaw_rate);

    let bounds = cfg.search.limits(x.vx, cfg.mu);
    println!("box vy {:?}, r ({:+.4}, {:+.4})", bounds.vy, bounds.yaw_rate.0, bounds.yaw_rate.1);
    for start in [(0.0, 0.0), (used.vy, used.yaw_rate), (-2.0, -0.2)] {
        let (refs, out) = reference_targets(&model, x.vx, start, &held, cfg.mu, &cfg.search)?;
        println!(
            "from {start:?}: vy {:+.3}, r {:+.4}, beta {:+.4}; cost {:.2e}, {} passes, {} points, converged {}",
            refs.vy, refs.yaw_rate, refs.sideslip, out.cost, out.passes, out.evaluated, out.converged
        );
    }
    Ok(())
}
