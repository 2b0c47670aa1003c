use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Run swarm scenarios and sweeps, fit energy distributions, draw plots.
#[derive(Debug, Parser)]
#[command(name = "entroswarm", version)]
struct Cli {
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario; writes snapshots.csv, metrics.jsonl and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed (also read from SWARM_SEED).
        #[arg(long, env = "SWARM_SEED")]
        seed: Option<u64>,
    },
    /// Run a parameter grid; writes summary.csv and manifest.json.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit an energy model to a numeric CSV; writes fit.json.
    Fit {
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Exp2mix)]
        model: Model,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kinematics and phase fits from a snapshots CSV; writes analysis.json.
    Analyze {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an SVG from run or sweep output; writes <kind>.svg.
    Plot {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Exp1,
    Exp2mix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Pv,
    Scaling,
    Phases,
    Trajectories,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Ctx { quiet: cli.quiet };
    let result = match cli.cmd {
        Command::Run { config, out, seed } => commands::run(&ctx, &config, &out, seed),
        Command::Sweep { config, out, jobs } => commands::sweep(&ctx, &config, &out, jobs),
        Command::Fit { data, model, out } => commands::fit(&ctx, &data, matches!(model, Model::Exp2mix), &out),
        Command::Analyze { data, out } => commands::analyze(&ctx, &data, &out),
        Command::Plot { input, kind, out } => {
            let kind = match kind {
                Kind::Pv => entroswarm::io::plots::PlotKind::Pv,
                Kind::Scaling => entroswarm::io::plots::PlotKind::Scaling,
                Kind::Phases => entroswarm::io::plots::PlotKind::Phases,
                Kind::Trajectories => entroswarm::io::plots::PlotKind::Trajectories,
            };
            commands::plot(&ctx, &input, kind, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
