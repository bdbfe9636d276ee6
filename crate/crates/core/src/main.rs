use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdn_inverse::cli::{
    cmd_gen_data, cmd_predict, cmd_report, cmd_sweep, cmd_train, GenDataArgs, PredictArgs, ReportArgs,
};
use mdn_inverse::config::{RunConfig, OUT_DIR_ENV};
use mdn_inverse::dataset::DEFAULT_SAMPLES;
use mdn_inverse::transfer::StrategyKind;
use mdn_inverse::Result;

/// Mixture density network inverse design of absorber spectra.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample designs and simulate their spectra into a CSV dataset.
    GenData {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "data/dataset.csv")]
        out: PathBuf,
    },
    /// Train a single network from scratch.
    Train {
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train K = 1..K_max, optionally growing each model from the previous one.
    Sweep {
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Predict the most probable designs for a spectrum and re-simulate them.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        spectrum_file: PathBuf,
        /// Data row of the spectrum file (zero-based).
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(long, default_value_t = 4)]
        top: usize,
        /// Autoencoder for checkpoints trained on latent inputs.
        #[arg(long)]
        autoencoder: Option<PathBuf>,
        #[arg(long, default_value = "predict")]
        out: PathBuf,
    },
    /// Render loss curves, loss against K and marginal pdfs for a run.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
        /// Test record (zero-based) whose marginals are plotted.
        #[arg(long, default_value_t = 0)]
        record: usize,
    },
}

/// Settings shared by `train` and `sweep`; flags override the config file.
#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strategy: Option<StrategyKind>,
    /// Train on autoencoder latents instead of raw spectra.
    #[arg(long)]
    autoencoder: bool,
    /// Reuse a trained autoencoder (implies --autoencoder).
    #[arg(long)]
    autoencoder_path: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    dropout_rate: Option<f64>,
    #[arg(long)]
    growth_jitter: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {$(
                if let Some(v) = self.$field { c.$target = v; }
            )*};
        }
        set!(dataset => dataset, seed => seed, strategy => strategy, batch_size => batch_size,
             learning_rate => learning_rate, max_epochs => max_epochs, patience => patience,
             dropout_rate => dropout_rate, growth_jitter => growth_jitter, out => out_dir);
        if self.autoencoder || self.autoencoder_path.is_some() {
            c.use_autoencoder = true;
        }
        if self.autoencoder_path.is_some() {
            c.autoencoder_path = self.autoencoder_path;
        }
        Ok(c.with_env())
    }
}

fn env_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()).map(PathBuf::from)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { samples, seed, out } => {
            let out = match (env_dir(), out.file_name()) {
                (Some(dir), Some(name)) => dir.join(name),
                _ => out,
            };
            let meta = cmd_gen_data(&GenDataArgs { samples, seed, out: out.clone() })?;
            let c = meta.split_counts;
            println!("wrote {} ({} samples: {} train, {} val, {} test)", out.display(), meta.samples, c.train, c.val, c.test);
        }
        Command::Train { k, run } => {
            let mut cfg = run.resolve()?;
            if let Some(k) = k {
                cfg.k = k;
            }
            let s = cmd_train(&cfg)?;
            println!(
                "K={} epochs={} best_epoch={} train_nll={:.6} val_nll={:.6} test_nll={:.6} -> {}",
                s.k, s.epochs, s.best_epoch, s.train_nll, s.val_nll, s.test_nll, cfg.out_dir.display()
            );
        }
        Command::Sweep { k_max, run } => {
            let mut cfg = run.resolve()?;
            if let Some(k) = k_max {
                cfg.k_max = k;
            }
            let (result, summary) = cmd_sweep(&cfg)?;
            print!("{}", result.to_csv());
            println!(
                "total epochs {} in {:.1} s -> {}",
                summary.total_epochs,
                summary.total_seconds,
                cfg.out_dir.display()
            );
        }
        Command::Predict { checkpoint, spectrum_file, row, top, autoencoder, out } => {
            let out_dir = env_dir().unwrap_or(out);
            let o = cmd_predict(&PredictArgs { checkpoint, autoencoder, spectrum_file, row, top, out_dir })?;
            for p in &o.predictions {
                let d = p.design;
                println!(
                    "#{} pi={:.4} p={:.1} w={:.1} h1={:.1} h2={:.1} h3={:.1} rmse={:.4}",
                    p.rank, p.pi, d.p, d.w, d.h1, d.h2, d.h3, p.rmse
                );
            }
        }
        Command::Report { run_dir, record } => {
            let o = cmd_report(&ReportArgs { run_dir, record })?;
            for f in &o.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
