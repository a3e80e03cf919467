//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhonn_lateral::allocation::allocate;
use rhonn_lateral::control::{solve_nmpc, ControllerKind, NmpcConfig, HORIZON};
use rhonn_lateral::ekf::{Covariance, EkfLearner};
use rhonn_lateral::harness::frontier::frontiers;
use rhonn_lateral::harness::oracle::OracleInstance;
use rhonn_lateral::harness::record::TickRecord;
use rhonn_lateral::harness::{run_scenario, write_run, RunOutput, ScenarioConfig};
use rhonn_lateral::plant::path::ScenarioKind;
use rhonn_lateral::plant::VehicleParams;
use rhonn_lateral::reference::{neighbors_search, SearchBox, SearchConfig};
use rhonn_lateral::rhonn::{build_basis, RhonnConfig, RhonnModel, Weights, BASIS_LEN};
use rhonn_lateral::{ControlCommand, PlanarState, MPS_TO_KMH};

use common::{enumerate_basis, grid_oracle, matrix_ekf, scalar_kalman, RefModel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Every record emitted by a run in this binary, for the bound check.
#[derive(Default)]
struct Emitted {
    records: Vec<(String, NmpcConfig, Vec<TickRecord>)>,
}

impl Emitted {
    fn run(&mut self, cfg: &ScenarioConfig) -> RunOutput {
        let out = run_scenario(cfg).expect("scenario runs");
        let label = format!("{} {} mu={} v0={}", cfg.scenario, cfg.controller, cfg.mu, cfg.v0);
        self.records.push((label, cfg.nmpc, out.records.clone()));
        out
    }
}

fn scenario(kind: ScenarioKind, controller: ControllerKind, mu: f64, v0: f64) -> ScenarioConfig {
    ScenarioConfig {
        scenario: kind,
        controller,
        mu,
        v0,
        ..ScenarioConfig::default()
    }
}

fn identification(mu: f64, v0: f64) -> ScenarioConfig {
    ScenarioConfig {
        identification_only: true,
        controller: ControllerKind::Off,
        ..scenario(ScenarioKind::Dlc, ControllerKind::Off, mu, v0)
    }
}

fn random_weights(rng: &mut ChaCha8Rng, scale: f64) -> Weights {
    Weights::from_fn(|_, _| rng.random_range(-scale..scale))
}

fn c1_basis() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let xi: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let lib = build_basis(&xi);
        let oracle = enumerate_basis(&xi);
        if lib.as_slice() != oracle.as_slice() {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 1.0, format!("1000 cases, {mismatches} mismatches, {secs:.4} s"))
}

fn c2_ekf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;

    // One active regressor with diagonal P reduces to the scalar filter.
    for _ in 0..200 {
        let (p, h, r, q, zeta, w, e) = (
            rng.random_range(0.1..20.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.01..1.0),
            rng.random_range(0.0..1e-2),
            rng.random_range(0.1..1.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-2.0..2.0),
        );
        let mut learner = EkfLearner::from_parts(Covariance::identity() * p, Covariance::identity() * q, r, zeta);
        let mut hv = Weights::zeros();
        hv[0] = h;
        let mut wv = Weights::zeros();
        wv[0] = w;
        let k = learner.gain(&hv).unwrap();
        let w_next = learner.update(&wv, e, &hv).unwrap();
        let (k_ref, w_ref, p_ref) = scalar_kalman(p, h, r, q, zeta, w, e);
        worst = worst
            .max((k[0] - k_ref).abs())
            .max((w_next[0] - w_ref).abs())
            .max((learner.p[(0, 0)] - p_ref).abs());
    }

    // Full 15-dimensional updates against loop arithmetic.
    for _ in 0..200 {
        let a = Covariance::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let p = a * a.transpose() + Covariance::identity() * 0.1;
        let qd = Covariance::from_diagonal(&Weights::from_fn(|_, _| rng.random_range(0.0..1e-3)));
        let (r, zeta, e) = (rng.random_range(0.01..1.0), rng.random_range(0.1..1.0), rng.random_range(-2.0..2.0));
        let w = random_weights(&mut rng, 3.0);
        let h = random_weights(&mut rng, 1.0);
        let mut learner = EkfLearner::from_parts(p, qd, r, zeta);
        let w_next = learner.update(&w, e, &h).unwrap();
        let rows = |m: &Covariance| (0..BASIS_LEN).map(|i| (0..BASIS_LEN).map(|j| m[(i, j)]).collect()).collect::<Vec<Vec<f64>>>();
        let (w_ref, p_ref) = matrix_ekf(&rows(&p), &rows(&qd), r, zeta, w.as_slice(), e, h.as_slice());
        for i in 0..BASIS_LEN {
            worst = worst.max((w_next[i] - w_ref[i]).abs());
            for (j, v) in p_ref[i].iter().enumerate() {
                worst = worst.max((learner.p[(i, j)] - v).abs());
            }
        }
    }

    // Long run of random updates.
    let mut learner = EkfLearner::from_parts(Covariance::identity() * 10.0, Covariance::identity() * 1e-4, 0.01, 1.0);
    let mut w = Weights::zeros();
    for _ in 0..10_000 {
        let xi: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let h = *build_basis(&xi).entries();
        w = learner.update(&w, rng.random_range(-1.0..1.0), &h).unwrap();
    }
    let asym = (learner.p - learner.p.transpose()).abs().max();
    let min_eig = SymmetricEigen::new(learner.p).eigenvalues.min();
    let pass = worst <= 1e-10 && asym == 0.0 && min_eig >= 0.0;
    outcome(pass, format!("max deviation from oracles {worst:.2e}; after 10000 updates asymmetry {asym:.1e}, min eigenvalue {min_eig:.3e}"))
}

fn c3_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut m = RhonnModel::new(&VehicleParams::default(), &RhonnConfig::default(), 0.05).unwrap();
        for n in 0..3 {
            *m.weights_mut(n) = random_weights(&mut rng, 2.0);
        }
        let x = PlanarState::new(rng.random_range(5.0..35.0), rng.random_range(-3.0..3.0), rng.random_range(-0.8..0.8));
        let u = ControlCommand::new(rng.random_range(-500.0..500.0), rng.random_range(-1600.0..1600.0), rng.random_range(-3.0..3.0));
        let phi = m.basis(&x, u.steer_wheel);
        for n in 0..3 {
            for j in 0..BASIS_LEN {
                let h = 1e-6;
                let mut plus = m.clone();
                plus.weights_mut(n)[j] += h;
                let mut minus = m.clone();
                minus.weights_mut(n)[j] -= h;
                let fd = (plus.step(&x, &u).unwrap().as_array()[n] - minus.step(&x, &u).unwrap().as_array()[n]) / (2.0 * h);
                let exact = phi.as_slice()[j];
                worst = worst.max((fd - exact).abs() / exact.abs().max(1e-6));
            }
        }
    }
    outcome(worst <= 1e-4, format!("100 configurations x 45 weights, worst relative error {worst:.2e}"))
}

fn c4_identification(em: &mut Emitted) -> Outcome {
    let cfg = identification(0.7, 65.0);
    let out = em.run(&cfg);
    let Some(e) = out.summary.metrics.estimation.rhonn else {
        return outcome(false, "no estimation statistics");
    };
    // Earliest time after which the V_x error stays within 1 km/h.
    let mut settled = 0.0;
    for r in &out.records {
        if ((r.rhonn_vx - r.vx) * MPS_TO_KMH).abs() > 1.0 {
            settled = r.t + cfg.timing.control_dt;
        }
    }
    let pass = e.vx.rmse <= 1.0 && e.vy.rmse <= 1.0 && settled < 1.0;
    outcome(
        pass,
        format!(
            "RMSE Vx {:.3} km/h, Vy {:.3} km/h; Vx within 1 km/h from t = {settled:.2} s ({:?}, {} ticks)",
            e.vx.rmse, e.vy.rmse, out.summary.termination, out.records.len()
        ),
    )
}

fn c5_low_mu_ordering(em: &mut Emitted) -> Outcome {
    let out = em.run(&identification(0.35, 65.0));
    let est = &out.summary.metrics.estimation;
    let (Some(rh), Some(mf), Some(li)) = (est.rhonn, est.mf, est.li) else {
        return outcome(false, "missing estimation statistics");
    };
    let pass = rh.vy.rmse < li.vy.rmse && rh.yaw_rate.rmse < li.yaw_rate.rmse && rh.vy.rmse < mf.vy.rmse;
    outcome(
        pass,
        format!(
            "Vy RMSE RHONN {:.3} / MF {:.3} / LI {:.3} km/h; yaw RMSE RHONN {:.3} / LI {:.3} deg/s",
            rh.vy.rmse, mf.vy.rmse, li.vy.rmse, rh.yaw_rate.rmse, li.yaw_rate.rmse
        ),
    )
}

fn c6_solver_oracle(em: &Emitted) -> Outcome {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/nmpc_oracle.json")).expect("fixture present");
    let instances: Vec<OracleInstance> = serde_json::from_str(&text).expect("fixture parses");
    let mut worst_ratio = 0.0f64;
    let mut fixture_mismatch = 0.0f64;
    for inst in &instances {
        let m = inst.model();
        let reference = RefModel {
            w: [0, 1, 2].map(|n| std::array::from_fn(|j| m.weights(n)[j])),
            sig: [m.sigmoids.vx, m.sigmoids.vy, m.sigmoids.yaw_rate, m.sigmoids.steer].map(|s| (s.mu, s.beta)),
            gain_vx: m.fixed_gain_vx,
            gain_yaw: m.fixed_gain_yaw,
            scale: if m.fixed_term_dt_scaling { m.dt } else { 1.0 },
        };
        let c = &inst.nmpc;
        let grid = grid_oracle(
            &reference,
            inst.state.as_array(),
            inst.held.total_torque,
            inst.held.steer_wheel,
            c.dm_min,
            c.dm_max,
            c.q,
            c.r,
            inst.refs.yaw_rate,
            inst.refs.sideslip,
            201,
        );
        fixture_mismatch = fixture_mismatch.max((grid - inst.grid_min).abs() / grid.max(1e-12));
        let fresh = solve_nmpc(&m, &inst.state, &inst.held, &inst.refs, c, &[0.0; HORIZON]);
        for cost in [inst.solver_cost, fresh.cost] {
            let ratio = if grid > 0.0 { cost / grid } else if cost <= 1e-12 { 1.0 } else { f64::INFINITY };
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    let mut violations = 0;
    let mut emitted = 0;
    for (_, nmpc, recs) in &em.records {
        for r in recs {
            for dm in [r.dm_cmd, r.dm_applied] {
                emitted += 1;
                if !(nmpc.dm_min..=nmpc.dm_max).contains(&dm) {
                    violations += 1;
                }
            }
        }
    }
    let pass = instances.len() == 20 && worst_ratio <= 1.01 && violations == 0;
    outcome(
        pass,
        format!(
            "{} instances, worst solver/grid ratio {worst_ratio:.6}, fixture grid drift {fixture_mismatch:.1e}; {violations} bound violations in {emitted} emitted moments over {} runs",
            instances.len(),
            em.records.len()
        ),
    )
}

fn c7_search_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SearchConfig::default();
    let bounds = SearchBox { vy: (-4.0, 4.0), yaw_rate: (-0.4, 0.4) };
    let mut hits = 0;
    let mut worst = [0.0f64; 2];
    for _ in 0..50 {
        // Affine map in coordinates where one grid step is one unit on
        // both axes; the fixed point is known in closed form.
        let s = [[rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)], [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)]];
        let fixed = (rng.random_range(-3.0..3.0), rng.random_range(-0.3..0.3));
        let prev = (rng.random_range(-3.5..3.5), rng.random_range(-0.35..0.35));
        let scale = [cfg.grid[0], cfg.grid[1]];
        let map = |p: (f64, f64)| {
            let d = [(p.0 - fixed.0) / scale[0], (p.1 - fixed.1) / scale[1]];
            (
                fixed.0 + scale[0] * (s[0][0] * d[0] + s[0][1] * d[1]),
                fixed.1 + scale[1] * (s[1][0] * d[0] + s[1][1] * d[1]),
            )
        };
        let out = neighbors_search(prev, &cfg, &bounds, |p| {
            let n = map(p);
            Ok((n.0 - p.0).abs() + cfg.eta * (n.1 - p.1).abs())
        })
        .unwrap();
        let err = [(out.point.0 - fixed.0).abs(), (out.point.1 - fixed.1).abs()];
        worst = [worst[0].max(err[0] / cfg.grid[0]), worst[1].max(err[1] / cfg.grid[1])];
        if err[0] <= cfg.grid[0] + 1e-12 && err[1] <= cfg.grid[1] + 1e-12 {
            hits += 1;
        }
    }
    outcome(hits == 50, format!("{hits}/50 within one grid interval; worst error {:.2} / {:.2} intervals", worst[0], worst[1]))
}

fn c8_stability(em: &mut Emitted) -> (Outcome, [f64; 3]) {
    let mut dlc = |c| em.run(&scenario(ScenarioKind::Dlc, c, 0.35, 65.0));
    let rh = dlc(ControllerKind::NmpcRhonn);
    let lm = dlc(ControllerKind::Lmpc);
    let off = dlc(ControllerKind::Off);
    let (a_rh, a_lm, a_off) = (rh.summary.metrics.phase_area, lm.summary.metrics.phase_area, off.summary.metrics.phase_area);
    let curve_rh = em.run(&scenario(ScenarioKind::SlipperyCurve, ControllerKind::NmpcRhonn, 0.35, 85.0));
    let curve_lm = em.run(&scenario(ScenarioKind::SlipperyCurve, ControllerKind::Lmpc, 0.35, 85.0));
    let (d_rh, d_lm) = (curve_rh.summary.metrics.max_deviation, curve_lm.summary.metrics.max_deviation);
    let phase_ok = a_rh < a_lm && a_rh < a_off;
    let curve_ok = d_rh < d_lm;
    let detail = format!(
        "DLC phase area NMPC-RHONN {a_rh:.4} / LMPC {a_lm:.4} / OFF {a_off:.4} (OFF {:?}) [{}]; curve max deviation NMPC-RHONN {d_rh:.3} m / LMPC {d_lm:.3} m [{}]",
        off.summary.termination,
        if phase_ok { "ok" } else { "violated" },
        if curve_ok { "ok" } else { "violated" },
    );
    (outcome(phase_ok && curve_ok, detail), [rh.summary.mean_compute_ms, rh.summary.max_compute_ms, rh.records.len() as f64])
}

fn c9_frontier() -> Outcome {
    let base = ScenarioConfig { mu: 0.35, ..ScenarioConfig::default() };
    let kinds = [ControllerKind::NmpcRhonn, ControllerKind::NmpcMf, ControllerKind::Lmpc];
    let res = frontiers(&base, &kinds).expect("frontier runs");
    let f: Vec<f64> = res.iter().map(|r| r.frontier).collect();
    let pass = f[0] >= f[1] && f[1] >= f[2];
    outcome(
        pass,
        format!(
            "mu 0.35, bracket [{}, {}] km/h: NMPC-RHONN {:.1} / NMPC-MF {:.1} / LMPC {:.1} km/h",
            base.frontier.v_min, base.frontier.v_max, f[0], f[1], f[2]
        ),
    )
}

fn c10_budget(timing: [f64; 3]) -> Outcome {
    let [mean, max, ticks] = timing;
    outcome(mean <= 50.0, format!("NMPC-RHONN DLC mu 0.35: mean {mean:.3} ms, max {max:.3} ms per tick over {ticks} ticks"))
}

fn c11_allocation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cap = 400.0;
    let (mut worst, mut saturated, mut total_drift) = (0.0f64, 0, 0);
    for _ in 0..10_000 {
        let total = rng.random_range(-1500.0..1500.0);
        let dm = rng.random_range(-3000.0..3000.0);
        let a = allocate(total, dm, cap).unwrap();
        let t = a.torques.0;
        let sum = t.iter().sum::<f64>();
        let diff = t[1] + t[3] - t[0] - t[2];
        worst = worst.max((sum - total).abs()).max((diff - a.yaw_moment).abs());
        if a.saturated {
            saturated += 1;
            if sum != total && (sum - total).abs() > 1e-9 {
                total_drift += 1;
            }
            if t.iter().any(|w| w.abs() > cap + 1e-9) {
                total_drift += 1;
            }
        } else {
            worst = worst.max((a.yaw_moment - dm).abs());
        }
    }
    outcome(
        worst <= 1e-9 && total_drift == 0,
        format!("10000 pairs, {saturated} saturated, worst identity residual {worst:.1e}, {total_drift} saturated cases altered the total"),
    )
}

fn c12_determinism() -> Outcome {
    let mut cfg = scenario(ScenarioKind::Dlc, ControllerKind::NmpcRhonn, 0.35, 65.0);
    cfg.seed = 42;
    cfg.noise.vy_std = 0.02;
    cfg.noise.yaw_rate_std = 0.005;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let bytes: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| {
            let out = run_scenario(&cfg).unwrap();
            let files = write_run(&cfg, &out, d.path()).unwrap();
            std::fs::read(files.trajectory).unwrap()
        })
        .collect();
    let mut other = cfg.clone();
    other.seed = 43;
    let changed = run_scenario(&other).unwrap().records != run_scenario(&cfg).unwrap().records;
    outcome(
        bytes[0] == bytes[1] && changed,
        format!("{} bytes each, identical: {}; a different seed changes the trajectory: {changed}", bytes[0].len(), bytes[0] == bytes[1]),
    )
}

fn main() {
    let mut em = Emitted::default();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "basis correctness", c1_basis()),
        (2, "EKF algebra", c2_ekf()),
        (3, "Jacobian", c3_jacobian()),
        (4, "identification convergence", c4_identification(&mut em)),
        (5, "low-adhesion estimation ordering", c5_low_mu_ordering(&mut em)),
    ];
    let (c8, timing) = c8_stability(&mut em);
    for kind in [ControllerKind::NmpcMf, ControllerKind::Lmpc] {
        em.run(&scenario(ScenarioKind::Dlc, kind, 0.7, 65.0));
    }
    results.push((6, "solver oracle", c6_solver_oracle(&em)));
    results.push((7, "reference search oracle", c7_search_oracle()));
    results.push((8, "closed-loop stability ordering", c8));
    results.push((9, "speed frontier ordering", c9_frontier()));
    results.push((10, "real-time budget", c10_budget(timing)));
    results.push((11, "allocation round trip", c11_allocation()));
    results.push((12, "determinism", c12_determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
