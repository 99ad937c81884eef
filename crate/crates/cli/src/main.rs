use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use platoon_core::harness::{self, HarnessError, RunConfig};
use platoon_core::marl::AlgorithmId;

#[derive(Parser)]
#[command(name = "platoon-sim", version, about = "Semantic-aware platooning resource allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one algorithm on one seed.
    Run(Common),
    /// Sweep one parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// intra_platoon_gap, semantic_demand_size, transform_factor or custom:<section>.<key>
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Paired per-seed comparison of episodes CSV files.
    Compare {
        /// Episodes files; rows are grouped by configuration hash.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Exhaustive optimum of the first slot, optionally scoring a checkpoint.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    algo: Option<String>,
    /// Output directory; overrides run.output_dir.
    #[arg(long, env = "PLATOON_SIM_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    episodes: Option<u32>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => harness::load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(a) = &self.algo {
            let alg: AlgorithmId = a.parse().map_err(|e: platoon_core::marl::MarlError| HarnessError::Config(e.to_string()))?;
            cfg.learner.algorithm = alg;
        }
        if let Some(o) = &self.out {
            cfg.run.output_dir = o.clone();
        }
        if self.deterministic {
            cfg.run.deterministic = true;
        }
        if let Some(e) = self.episodes {
            cfg.learner.episodes = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let out = harness::run(&cfg)?;
            let e = &out.summary.eval;
            println!(
                "{} seed {}: eval reward {:.4} qoe {:.4} srs {:.4} delay {:.2} ms",
                out.summary.algorithm, cfg.run.seed, e.reward.mean, e.qoe.mean, e.srs.mean, e.delay_ms.mean
            );
            println!("{}", out.episodes_file.display());
            println!("{}", out.summary_file.display());
        }
        Command::Sweep { common, param, values } => {
            let mut cfg = common.resolve()?;
            if let Some(e) = common.episodes {
                cfg.sweep.episodes_per_point = Some(e);
            }
            let param = param
                .or_else(|| cfg.sweep.param.clone())
                .ok_or_else(|| HarnessError::Config("sweep: --param or sweep.param required".into()))?;
            let values = if values.is_empty() { cfg.sweep.values.clone() } else { values };
            let out = harness::sweep(&cfg, &param, &values)?;
            for r in out.rows.iter().filter(|r| r.kind == "mean") {
                println!("{} = {} {}: qoe {:.4} srs {:.4} delay {:.2} ms", r.param, r.value, r.algorithm, r.qoe, r.srs, r.delay_ms);
            }
            println!("{}", out.file.display());
        }
        Command::Compare { files } => {
            let mut rows = Vec::new();
            for f in &files {
                rows.extend(harness::read_episodes(f).map_err(|e| HarnessError::Config(e.to_string()))?);
            }
            let diffs = harness::compare_algorithms(&harness::group_rows(rows))?;
            print!("{}", harness::render_report(&diffs));
        }
        Command::Oracle { common, checkpoint } => {
            let mut cfg = common.resolve()?;
            if checkpoint.is_some() {
                cfg.run.eval_checkpoint = checkpoint;
            }
            let (report, file) = harness::oracle_report(&cfg)?;
            println!("optimum {:.6} over {} assignments", report.optimum.value, report.optimum.evaluated);
            if let (Some(p), Some(r)) = (&report.policy, report.policy_ratio) {
                println!("policy {:.6} ({:.1}% of optimum)", p.total, 100.0 * r);
            }
            println!("{}", file.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
