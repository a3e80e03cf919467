//! One NMPC solve on a learned model, compared against a coarse grid.

use rhonn_lateral::control::{nmpc_cost, predict_rhonn, solve_nmpc, NmpcConfig};
use rhonn_lateral::harness::run::run_scenario_with;
use rhonn_lateral::harness::ScenarioConfig;
use rhonn_lateral::ControlCommand;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default();
    let mut snapshot = None;
    run_scenario_with(&cfg, |ctx| {
        if snapshot.is_none() && ctx.t >= 3.0 {
            snapshot = Some((ctx.model.clone(), ctx.measured, ctx.held, ctx.refs));
        }
    })?;
    let (model, x, held, refs) = snapshot.ok_or("run ended early")?;
    let nmpc = NmpcConfig::default();

    let out = solve_nmpc(&model, &x, &held, &refs, &nmpc, &[0.0; 3]);
    println!("targets r {:+.4} beta {:+.4}", refs.yaw_rate, refs.sideslip);
    println!("solver: dm {:?} cost {:.4e} in {} evaluations", out.sequence.map(|v| v.round()), out.cost, out.iterations);

    let n = 41;
    let v = |i: usize| nmpc.dm_min + (nmpc.dm_max - nmpc.dm_min) * i as f64 / (n - 1) as f64;
    let mut best = (f64::INFINITY, [0.0; 3]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let seq = [v(i), v(j), v(k)];
                let c = nmpc_cost(&predict_rhonn(&model, &x, &seq, &held)?, &refs, &nmpc);
                if c < best.0 {
                    best = (c, seq);
                }
            }
        }
    }
    println!("grid {n}^3: dm {:?} cost {:.4e}", best.1, best.0);

    let p = predict_rhonn(&model, &x, &out.sequence, &ControlCommand { yaw_moment: 0.0, ..held })?;
    for (i, s) in p.iter().enumerate() {
        println!("  step {}: vy {:+.3} r {:+.4}", i + 1, s.vy, s.yaw_rate);
    }
    Ok(())
}
