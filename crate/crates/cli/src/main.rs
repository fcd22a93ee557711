//! `classsplom` command-line interface.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 input/output or
//! data error, 3 numerical degeneracy.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use classsplom::data::{generate_gaussian_blobs, save_csv};
use classsplom::nalgebra::DMatrix;
use classsplom::pipeline::{run, RunConfig, DEFAULT_BOOTSTRAP};
use classsplom::render::DEFAULT_CELL_SIZE;
use classsplom::{Error, ErrorClass, DEFAULT_RIDGE};

#[derive(Debug, Parser)]
#[command(name = "classsplom", version, about = "Pairwise discriminant scatterplot matrix for multiclass data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the class-pair matrix and write the SVG figure and JSON model.
    Run(RunArgs),
    /// Write a synthetic Gaussian-blob dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Input CSV file.
    #[arg(short, long)]
    input: PathBuf,
    /// Label column: header name, zero-based index, or `last`.
    #[arg(short, long, default_value = "last")]
    label_column: String,
    /// File with one predicted class name per input row.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Keep at most this many points per class.
    #[arg(long)]
    per_class: Option<usize>,
    /// Reduce to this many principal components before projecting.
    #[arg(long)]
    pca_dims: Option<usize>,
    /// Relative ridge added to the within-class scatter.
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Bootstrap replicates per class pair.
    #[arg(short = 'b', long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(short, long, env = "CLASSSPLOM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "classsplom.svg")]
    svg: PathBuf,
    #[arg(long, default_value = "classsplom.json")]
    json: PathBuf,
    /// Cell side length in pixels.
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE)]
    cell_size: f64,
    /// Omit the AUC / AUCBA label in ROC cells.
    #[arg(long)]
    no_auc_label: bool,
    /// Worker threads (0 = all cores). Outputs do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    /// Distance of each class mean from the origin.
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    /// Standard deviation of every class.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(short, long, env = "CLASSSPLOM_SEED", default_value_t = 0)]
    seed: u64,
}

fn exit_code(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Config => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

fn run_command(args: RunArgs) -> Result<(), Error> {
    let config = RunConfig {
        input: args.input,
        label_column: args.label_column,
        predictions: args.predictions,
        per_class: args.per_class,
        pca_dims: args.pca_dims,
        ridge: args.ridge,
        bootstrap: args.bootstrap,
        seed: args.seed,
        output_svg: args.svg,
        output_json: args.json,
        cell_size: args.cell_size,
        annotate_auc: !args.no_auc_label,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let model = pool.install(|| run(&config))?;
    eprintln!(
        "wrote {} ({} classes, {} pairs) and {}",
        config.output_svg.display(),
        model.num_classes(),
        model.pairs.len(),
        config.output_json.display()
    );
    Ok(())
}

/// Class `k` sits at `separation` along axis `k`, or along its negative for
/// the second group of `dim` classes.
fn blob_means(classes: usize, dim: usize, separation: f64) -> Result<DMatrix<f64>, Error> {
    if dim < 2 {
        return Err(Error::Config("dimension must be at least 2".into()));
    }
    if classes > 2 * dim {
        return Err(Error::Config(format!(
            "at most {} classes fit in {dim} dimensions",
            2 * dim
        )));
    }
    Ok(DMatrix::from_fn(classes, dim, |k, j| {
        if k % dim == j {
            if k < dim {
                separation
            } else {
                -separation
            }
        } else {
            0.0
        }
    }))
}

fn generate_command(args: GenerateArgs) -> Result<(), Error> {
    let means = blob_means(args.classes, args.dim, args.separation)?;
    let ds = generate_gaussian_blobs(&means, &vec![args.scale; args.classes], args.per_class, args.seed)?;
    save_csv(&ds, &args.output)?;
    eprintln!("wrote {} rows to {}", ds.len(), args.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Generate(args) => generate_command(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
