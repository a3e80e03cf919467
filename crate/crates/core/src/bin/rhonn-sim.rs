use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use rhonn_lateral::control::ControllerKind;
use rhonn_lateral::harness::frontier::frontiers;
use rhonn_lateral::harness::metrics::EstimatorRun;
use rhonn_lateral::harness::oracle::collect_instances;
use rhonn_lateral::harness::record::write_json;
use rhonn_lateral::harness::run::{comparison_markdown, run_batch, run_stem};
use rhonn_lateral::harness::{estimation_report, run_scenario, write_run, HarnessError, ScenarioConfig};
use rhonn_lateral::plant::path::ScenarioKind;

#[derive(Parser)]
#[command(name = "rhonn-sim", version, about = "Vehicle lateral-stability simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory, timings and summary.
    Run {
        #[command(flatten)]
        common: Common,
        /// Identify only; no yaw moment is applied.
        #[arg(long)]
        identification_only: bool,
    },
    /// Estimation table plus a comparison of all controllers.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Highest stable DLC entry speed per controller.
    Frontier {
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the solver oracle fixture.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Output file; defaults to <out>/nmpc_oracle.json.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Road adhesion coefficient.
    #[arg(long)]
    mu: Option<f64>,
    /// Entry speed, km/h.
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(v) = self.scenario {
            cfg.scenario = v;
        }
        if let Some(v) = self.controller {
            cfg.controller = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if let Some(v) = self.v0 {
            cfg.v0 = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { common, identification_only } => {
            let mut cfg = common.config()?;
            cfg.identification_only |= identification_only;
            let out = run_scenario(&cfg)?;
            let files = write_run(&cfg, &out, &cfg.out_dir)?;
            let m = &out.summary.metrics;
            println!(
                "{}: {:?}, phase area {:.5}, max deviation {:.3} m, mean compute {:.3} ms",
                run_stem(&cfg),
                out.summary.termination,
                m.phase_area,
                m.max_deviation,
                out.summary.mean_compute_ms
            );
            println!("wrote {}", files.trajectory.display());
        }
        Command::Report { common } => {
            let base = common.config()?;
            let mut cfgs = vec![ScenarioConfig { identification_only: true, ..base.clone() }];
            cfgs.extend(ControllerKind::ALL.map(|c| ScenarioConfig { controller: c, identification_only: false, ..base.clone() }));
            let outs = run_batch(&cfgs).into_iter().collect::<Result<Vec<_>, _>>()?;
            for (cfg, out) in cfgs.iter().zip(&outs) {
                write_run(cfg, out, &base.out_dir)?;
            }
            let ident = &outs[0];
            let est = estimation_report(&EstimatorRun::from_records(&ident.records, &ident.summary.plant_hash), base.metrics.warmup)?;
            let stem = format!("{}_mu{:.2}_v{:.1}", base.scenario, base.mu, base.v0);
            write_json(&base.out_dir.join(format!("{stem}.estimation.json")), &est)?;
            let summaries: Vec<_> = outs[1..].iter().map(|o| o.summary.clone()).collect();
            let table = comparison_markdown(&summaries)?;
            let md = format!("## Estimation errors\n\n{}\n## Controllers\n\n{}", est.to_markdown(), table);
            std::fs::write(base.out_dir.join(format!("{stem}.report.md")), &md)?;
            print!("{md}");
        }
        Command::Frontier { common } => {
            let base = common.config()?;
            let kinds: Vec<ControllerKind> = match common.controller {
                Some(c) => vec![c],
                None => ControllerKind::ALL.to_vec(),
            };
            let results = frontiers(&base, &kinds)?;
            std::fs::create_dir_all(&base.out_dir)?;
            write_json(&base.out_dir.join(format!("frontier_mu{:.2}.json", base.mu)), &results)?;
            for r in &results {
                println!("{}: {:.1} km/h", r.controller, r.frontier);
            }
        }
        Command::Oracle { common, count, fixture } => {
            let mut cfg = common.config()?;
            cfg.controller = ControllerKind::NmpcRhonn;
            cfg.identification_only = false;
            let path = fixture.unwrap_or_else(|| cfg.out_dir.join("nmpc_oracle.json"));
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            info!("recording {count} instances");
            let instances = collect_instances(&cfg, count, 2.0, 6.5)?;
            write_json(&path, &instances)?;
            println!("wrote {} instances to {}", instances.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
