//! The whole command-line pipeline driven through the library: generate data,
//! run a small transfer sweep, predict and render the report.

use mdn_inverse::cli::{cmd_gen_data, cmd_predict, cmd_report, cmd_sweep, k_dir, GenDataArgs, PredictArgs, ReportArgs, MODEL_FILE};
use mdn_inverse::config::RunConfig;
use mdn_inverse::transfer::StrategyKind;

fn main() -> mdn_inverse::Result<()> {
    let root = std::path::PathBuf::from("target/example_pipeline");
    let data = root.join("dataset.csv");
    cmd_gen_data(&GenDataArgs { samples: 300, seed: 6, out: data.clone() })?;

    let cfg = RunConfig {
        dataset: data.clone(),
        seed: 6,
        k_max: 3,
        strategy: StrategyKind::Tl1,
        max_epochs: 30,
        out_dir: root.join("run"),
        ..RunConfig::default()
    };
    let (result, summary) = cmd_sweep(&cfg)?;
    print!("{}", result.to_csv());
    println!("{} epochs in {:.1} s", summary.total_epochs, summary.total_seconds);

    let out = cmd_predict(&PredictArgs {
        checkpoint: k_dir(&cfg.out_dir, 3).join(MODEL_FILE),
        autoencoder: None,
        spectrum_file: data,
        row: 0,
        top: 2,
        out_dir: root.join("predict"),
    })?;
    for p in &out.predictions {
        println!("#{} pi {:.3} rmse {:.4}", p.rank, p.pi, p.rmse);
    }

    let report = cmd_report(&ReportArgs { run_dir: cfg.out_dir.clone(), record: 0 })?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}
