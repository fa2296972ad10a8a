//! Command-line front end: gen, train, eval, report, export.
//!
//! Exit codes follow the library's error classes: 1 for usage and
//! configuration problems, 2 for numerical failures, 3 for I/O and
//! file-format problems.

use clap::{Parser, Subcommand};
use rdo_core::formats::{export_dataset_csv, load_dataset, load_model, save_dataset, save_model};
use rdo_core::harness::report::{parse_metrics_csv, write_history_csv, write_metrics_csv, write_report};
use rdo_core::harness::{evaluate_multi_resolution, train_with, ConfigFile};
use rdo_core::pdegen::{make_dataset, ExperimentSpec};
use rdo_core::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "rdo",
    version,
    about = "Resolution-invariant operator learning: data generation, training, cross-resolution evaluation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a multi-resolution dataset for one benchmark problem.
    Gen {
        /// Benchmark id: sbvp, darcy_tri, or burgers.
        #[arg(long)]
        experiment: String,
        /// Number of samples.
        #[arg(long)]
        n: usize,
        /// Comma-separated resolutions; coarser grids must nest in the finest.
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        #[arg(long)]
        seed: u64,
        /// Output dataset file.
        #[arg(long)]
        out: PathBuf,
        /// Override the input sampler's kernel length scale.
        #[arg(long)]
        length_scale: Option<f64>,
    },
    /// Train the model described by a config file; writes the
    /// checkpoint to OUT (architecture to OUT.arch, per-epoch history
    /// to OUT.history.csv).
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override [train] epochs.
        #[arg(long)]
        epochs: Option<usize>,
        /// Override [train] seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a checkpoint on the held-out test split at each
    /// resolution; writes a metrics CSV.
    Eval {
        /// Checkpoint written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated test resolutions.
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        /// Output metrics CSV.
        #[arg(long)]
        out: PathBuf,
        /// Record wall seconds per resolution (off by default so output
        /// is byte-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Merge metrics CSVs into a summary table plus one SVG error chart
    /// per experiment.
    Report {
        /// One or more metrics CSV files from `eval`.
        #[arg(long, num_args = 1.., required = true)]
        metrics: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Mirror a binary dataset as a plain CSV for inspection.
    Export {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |e| format!("{e:.6}"))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Gen { experiment, n, resolutions, seed, out, length_scale } => {
            let mut spec = ExperimentSpec::default_for(&experiment)?;
            if let Some(l) = length_scale {
                match &mut spec {
                    ExperimentSpec::Sbvp { kernel, .. }
                    | ExperimentSpec::DarcyTriangle { kernel, .. } => kernel.length_scale = l,
                    ExperimentSpec::Burgers { .. } => {
                        return Err(Error::InvalidArg(
                            "burgers inputs are sine waves, not kernel draws; --length-scale does not apply".into(),
                        ))
                    }
                }
            }
            let ds = make_dataset(&spec, n, &resolutions, seed)?;
            save_dataset(&ds, &out)?;
            println!(
                "wrote {}: {} samples of {} at resolutions {:?}",
                out.display(),
                ds.n_samples(),
                ds.experiment,
                ds.resolutions()
            );
        }
        Cmd::Train { config, data, out, epochs, seed } => {
            let mut resolved = ConfigFile::load(&config)?.resolve()?;
            if let Some(e) = epochs {
                resolved.train.epochs = e;
            }
            if let Some(s) = seed {
                resolved.train.seed = s;
            }
            resolved.train.validate()?;
            let ds = load_dataset(&data)?;
            if ds.experiment != resolved.experiment_id {
                return Err(Error::Config(format!(
                    "config is for '{}' but {} holds '{}' data",
                    resolved.experiment_id,
                    data.display(),
                    ds.experiment
                )));
            }
            for &r in &resolved.test_resolutions {
                if ds.block(r).is_err() {
                    return Err(Error::Config(format!(
                        "config lists test resolution {r} but the dataset only has {:?}",
                        ds.resolutions()
                    )));
                }
            }
            let mut model = resolved.build_model()?;
            let report = train_with(&mut model, &ds, &resolved.train, |r| {
                eprintln!(
                    "epoch {:>4}  train_loss {:.6e}  val_rl2e {:.6}  lr {:.2e}",
                    r.epoch, r.train_loss, r.val_rl2e, r.lr
                );
            })?;
            save_model(&model, &resolved.experiment_id, resolved.train.train_resolution, &resolved.train.ratios, &out)?;
            let mut history_path = out.as_os_str().to_os_string();
            history_path.push(".history.csv");
            write_history_csv(&report.history, history_path.as_ref())?;
            println!(
                "wrote {}: {} on {}, best val_rl2e {:.6} at epoch {}/{}",
                out.display(),
                resolved.arch.kind,
                resolved.experiment_id,
                report.best_val,
                report.best_epoch,
                resolved.train.epochs
            );
        }
        Cmd::Eval { model, data, resolutions, out, timing } => {
            let (m, arch) = load_model(&model)?;
            let ds = load_dataset(&data)?;
            if ds.experiment != arch.experiment {
                return Err(Error::InvalidArg(format!(
                    "model was trained on '{}' but {} holds '{}' data",
                    arch.experiment,
                    data.display(),
                    ds.experiment
                )));
            }
            let records = evaluate_multi_resolution(
                &m,
                &arch.kind,
                &ds,
                &resolutions,
                arch.train_resolution,
                &arch.ratios,
                timing,
            )?;
            write_metrics_csv(&records, &out)?;
            for r in &records {
                println!(
                    "{} {} trained@{} tested@{}: rl2e {} (n={})",
                    r.experiment,
                    r.model,
                    r.train_res,
                    r.test_res,
                    fmt_cell(r.rl2e),
                    r.n
                );
            }
            println!("wrote {}", out.display());
        }
        Cmd::Report { metrics, out } => {
            let mut records = Vec::new();
            for path in &metrics {
                let text = std::fs::read_to_string(path)?;
                records.extend(parse_metrics_csv(&text)?);
            }
            for path in write_report(&records, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Cmd::Export { data, out } => {
            let ds = load_dataset(&data)?;
            export_dataset_csv(&ds, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not failures.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
