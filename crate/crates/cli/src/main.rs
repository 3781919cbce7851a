use std::net::TcpListener;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fednod::config::{DatasetSource, ExperimentConfig};
use fednod::metrics::{emit_metrics, ensure_writable, ConfigResult};
use fednod::net::{join_run, serve_run};
use fednod::pipeline::{run_experiment, RunOptions};
use fednod::report;
use fednod::sweep::{sweep, GridSpec};
use fednod_core::Arch;
use fednod_data::{synth_generate, write_folder_dataset, SynthSpec};

#[derive(Parser)]
#[command(name = "fednod", version, about = "Federated driver-state classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset in the folder layout.
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 500)]
        n_per_class: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, env = "FEDNOD_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run every repetition of one configuration and write the metrics.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Run the repetitions concurrently.
        #[arg(long)]
        parallel_runs: bool,
        /// Print the effective configuration as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Run a grid of configurations, appending to `sweep.csv` (resumable).
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, env = "FEDNOD_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        parallel_runs: bool,
    },
    /// Coordinate one networked run; clients connect with `join`.
    Serve {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Which repetition (its seed is master_seed + run).
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Take part in a networked run as one client.
    Join {
        #[arg(long)]
        connect: String,
        #[arg(long)]
        client_id: usize,
    },
    /// Aggregate final accuracies from summary.json / sweep.csv files.
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

/// A JSON config file (or the default preset) with flag overrides.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<Arch>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    local_epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    sequence_length: Option<usize>,
    #[arg(long)]
    frame_skipping: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, env = "FEDNOD_SEED")]
    seed: Option<u64>,
    /// Train on a folder dataset instead of synthetic frames.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    allow_out_of_grid: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(
            model => model,
            resolution => resolution,
            clients => nbr_clients,
            rounds => rounds,
            local_epochs => local_epochs,
            lr => hyper.learning_rate,
            momentum => hyper.momentum,
            batch_size => hyper.batch_size,
            weight_decay => hyper.weight_decay,
            runs => runs,
            seed => master_seed,
            output => output_dir,
        );
        if self.sequence_length.is_some() {
            c.sequence_length = self.sequence_length;
        }
        if self.frame_skipping.is_some() {
            c.frame_skipping = self.frame_skipping;
        }
        if let Some(root) = &self.dataset {
            c.dataset = DatasetSource::Folder(root.clone());
        }
        c.allow_out_of_grid |= self.allow_out_of_grid;
        Ok(c)
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            output,
            n_per_class,
            resolution,
            noise,
            seed,
        } => {
            let frames = synth_generate(&SynthSpec::new(n_per_class, resolution, noise), seed);
            write_folder_dataset(&output, &frames)?;
            println!("wrote {} frames to {}", frames.len(), output.display());
        }
        Command::Train {
            exp,
            parallel_runs,
            print_config,
        } => {
            let config = exp.resolve()?;
            if print_config {
                println!("{}", serde_json::to_string_pretty(&config)?);
                return Ok(());
            }
            ensure_writable(&config.output_dir)?;
            let runs = run_experiment(&config, RunOptions { parallel_runs })?;
            let result = ConfigResult::new(&config, runs);
            for path in emit_metrics(std::slice::from_ref(&result), &config.output_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Sweep {
            grid,
            output,
            seed,
            parallel_runs,
        } => {
            let mut spec = GridSpec::from_file(&grid)?;
            if let Some(s) = seed {
                spec.base.master_seed = s;
            }
            let dir = output.unwrap_or_else(|| spec.base.output_dir.clone());
            let added = sweep(&spec, &dir, RunOptions { parallel_runs })?;
            println!("{added} new rows in {}", dir.join(fednod::sweep::SWEEP_CSV).display());
        }
        Command::Serve { exp, listen, run } => {
            let config = exp.resolve()?;
            ensure_writable(&config.output_dir)?;
            let listener = TcpListener::bind(&listen).with_context(|| format!("binding {listen}"))?;
            let (summary, _) = serve_run(&config, run, &listener)?;
            let result = ConfigResult::new(&config, vec![summary]);
            for path in emit_metrics(std::slice::from_ref(&result), &config.output_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Join { connect, client_id } => {
            let outcome = join_run(&connect, client_id)?;
            println!("client {client_id}: trained {} rounds", outcome.rounds_trained);
        }
        Command::Report { paths } => {
            print!("{}", report::render(&report::collect(&paths)?));
        }
    }
    Ok(())
}
