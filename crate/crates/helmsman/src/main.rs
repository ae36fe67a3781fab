use clap::{Parser, Subcommand};
use helmsman::cli::{self, RunOptions};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "helmsman",
    version,
    about = "Point-cloud CBF local navigation: run scenarios, benchmark kernels, emit the scenario suite"
)]
struct Cli {
    /// Worker pool size for the point-cloud kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario episode and write trajectory.csv + metrics.json.
    Run {
        /// Scenario TOML file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (env HELMSMAN_OUT overrides the default).
        #[arg(long, env = "HELMSMAN_OUT", default_value = "helmsman_out")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the integration step, seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the episode duration, seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Ablation: bypass the barrier safety filter.
        #[arg(long)]
        disable_vessel: bool,
        /// Ablation: track raw waypoints instead of needle previews.
        #[arg(long)]
        disable_mariner: bool,
    },
    /// Benchmark the barrier and preview kernels on a synthetic cloud.
    Bench {
        #[arg(long, default_value_t = 57_600)]
        points: usize,
        #[arg(long, default_value_t = 100)]
        needles: usize,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Emit the shipped scenario files.
    Scenarios {
        #[arg(long, env = "HELMSMAN_OUT", default_value = "helmsman_out")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("worker pool is configured once, before any parallel work");
    }
    let code = match cli.command {
        Command::Run { scenario, out, seed, dt, duration, disable_vessel, disable_mariner } => {
            cli::cmd_run(&RunOptions {
                scenario_path: scenario,
                out_dir: out,
                seed,
                dt,
                duration,
                disable_vessel,
                disable_mariner,
            })
        }
        Command::Bench { points, needles, iters, seed } => {
            cli::cmd_bench(points, needles, iters, seed)
        }
        Command::Scenarios { out } => cli::cmd_scenarios(&out),
    };
    std::process::exit(code);
}
