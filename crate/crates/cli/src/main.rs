//! Batch front end for the granular-ball SVM pipeline: generate ball
//! covers, train and serialize models, predict, and run the two benchmark
//! protocols. Every command logs its effective configuration to stderr and
//! is deterministic given `--seed`.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 solver
//! degeneracy.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gbsvm::experiment::{self, ExperimentConfig};
use gbsvm::model::ModelRecord;
use gbsvm::seeding::derive_seed;
use gbsvm::{
    exec, granular_ball, pso, BallGenConfig, ColumnSelector, Dataset, GbsvmError, GbsvmModel,
    GranularBall, PsoConfig, RadiusMode, Result,
};
use serde::Serialize;

/// Purpose tag separating the training solver's RNG stream from the
/// benchmark streams derived elsewhere from the same root seed.
const STREAM_TRAIN: u64 = 100;

#[derive(Parser, Serialize)]
#[command(
    name = "gbsvm",
    version,
    about = "Granular-ball SVM: ball generation, training, prediction, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Generate the granular-ball cover of a dataset and export it
    GenBalls(GenBallsArgs),
    /// Train a model and save it as JSON
    Train(TrainArgs),
    /// Predict labels for a dataset using a saved model
    Predict(PredictArgs),
    /// Label-noise robustness benchmark: granular-ball vs point SVM
    BenchNoise(BenchNoiseArgs),
    /// Training-time benchmark: granular-ball vs point SVM
    BenchTime(BenchTimeArgs),
}

#[derive(Args, Serialize)]
struct DataArgs {
    /// Input CSV; header auto-detected, labels must take exactly two values
    #[arg(long)]
    input: PathBuf,
    /// Label column: zero-based index or header name (default: last column)
    #[arg(long)]
    label_col: Option<String>,
    /// Label value treated as the positive class (default: first seen)
    #[arg(long)]
    positive_label: Option<String>,
}

#[derive(Args, Serialize)]
struct BallArgs {
    /// Purity threshold T, in (0.5, 1]
    #[arg(long, default_value_t = 0.9)]
    purity: f64,
    /// Radius statistic: mean or max member distance
    #[arg(long, default_value = "average", value_parser = RadiusMode::from_str)]
    radius_mode: RadiusMode,
    /// Smallest ball still eligible for splitting
    #[arg(long, default_value_t = 2)]
    min_split_size: usize,
}

impl BallArgs {
    fn config(&self) -> Result<BallGenConfig> {
        let cfg = BallGenConfig {
            purity_threshold: self.purity,
            radius_mode: self.radius_mode,
            min_split_size: self.min_split_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize)]
struct SolverArgs {
    /// Box bound on the multipliers
    #[arg(long = "C", default_value_t = 10.0)]
    c: f64,
    /// Swarm size
    #[arg(long, default_value_t = 400)]
    pop: usize,
    /// Iteration cap
    #[arg(long, default_value_t = 1050)]
    iters: usize,
    /// Inertia weight
    #[arg(long, default_value_t = 0.5)]
    inertia: f64,
    /// Cognitive learning factor
    #[arg(long, default_value_t = 1.6)]
    c1: f64,
    /// Social learning factor
    #[arg(long, default_value_t = 1.6)]
    c2: f64,
    /// Velocity cap (default 0.2·C)
    #[arg(long)]
    vmax: Option<f64>,
    /// Root seed; all randomness derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn pso_config(&self, seed: u64) -> Result<PsoConfig> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(GbsvmError::InvalidConfig(format!(
                "C must be finite and positive, got {}",
                self.c
            )));
        }
        let cfg = PsoConfig {
            pop: self.pop,
            max_iter: self.iters,
            inertia: self.inertia,
            cognitive: self.c1,
            social: self.c2,
            vmax: self.vmax,
            seed,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize)]
struct GenBallsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    balls: BallArgs,
    /// Accepted for interface symmetry; generation itself is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Export path; `.json` for JSON, anything else for CSV (default: none)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    balls: BallArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the model JSON
    #[arg(long)]
    model_out: PathBuf,
    /// Optional CSV convergence trace (iteration, best fitness, residual)
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PredictArgs {
    /// Model JSON produced by `train`
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Predictions CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct BenchNoiseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    balls: BallArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Noise rates to sweep
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = vec![0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30]
    )]
    rates: Vec<f64>,
    /// Repeats per rate
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Training fraction of the stratified split
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BenchTimeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    balls: BallArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Training fraction of the stratified split
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let ok = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if ok { 0 } else { 1 };
        }
    };
    if let Err(err) = exec::configure_threads_from_env() {
        eprintln!("error: {err}");
        return 1;
    }
    banner(&cli.command);
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                GbsvmError::InvalidConfig(_) => 1,
                GbsvmError::DegenerateSolution { .. } | GbsvmError::NoSupportBalls => 3,
                _ => 2,
            }
        }
    }
}

/// One-line reproducibility banner: the full effective configuration.
fn banner(command: &Command) {
    let mode = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };
    let threads = std::env::var("GBSVM_THREADS").ok();
    let line = serde_json::json!({
        "command": command,
        "mode": mode,
        "threads": threads,
    });
    eprintln!("gbsvm config: {line}");
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenBalls(args) => gen_balls(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::BenchNoise(args) => bench_noise(args),
        Command::BenchTime(args) => bench_time(args),
    }
}

fn load_dataset(data: &DataArgs) -> Result<Dataset> {
    let selector = match &data.label_col {
        None => ColumnSelector::Last,
        Some(raw) => match raw.parse::<usize>() {
            Ok(index) => ColumnSelector::Index(index),
            Err(_) => ColumnSelector::Name(raw.clone()),
        },
    };
    Dataset::load_csv(&data.input, &selector, data.positive_label.as_deref())
}

/// Writer for `--out`, falling back to stdout.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn gen_balls(args: GenBallsArgs) -> Result<()> {
    let cfg = args.balls.config()?;
    let ds = load_dataset(&args.data)?;
    let balls = granular_ball::generate(&ds, &cfg)?;

    let min_purity = balls.iter().map(|b| b.purity).fold(f64::INFINITY, f64::min);
    let mean_purity = balls.iter().map(|b| b.purity).sum::<f64>() / balls.len() as f64;
    println!("balls: {}", balls.len());
    println!("min purity: {min_purity}");
    println!("mean purity: {mean_purity}");

    if let Some(out) = &args.out {
        if out.extension().is_some_and(|e| e == "json") {
            serde_json::to_writer_pretty(File::create(out)?, &balls)?;
        } else {
            write_balls_csv(File::create(out)?, &balls)?;
        }
    }
    Ok(())
}

fn write_balls_csv<W: Write>(writer: W, balls: &[GranularBall]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let d = balls.first().map_or(0, |b| b.center.len());
    let mut header: Vec<String> = (0..d).map(|j| format!("center_{j}")).collect();
    header.extend(["radius", "label", "purity", "size"].map(String::from));
    csv.write_record(&header)?;
    for ball in balls {
        let mut record: Vec<String> = ball.center.iter().map(f64::to_string).collect();
        record.push(ball.radius.to_string());
        record.push(i8::from(ball.label).to_string());
        record.push(ball.purity.to_string());
        record.push(ball.size().to_string());
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let ball_cfg = args.balls.config()?;
    let pso_cfg = args.solver.pso_config(derive_seed(args.solver.seed, &[STREAM_TRAIN]))?;
    let ds = load_dataset(&args.data)?;
    let balls = granular_ball::generate(&ds, &ball_cfg)?;
    let (solution, trace) = pso::solve_traced(&balls, args.solver.c, &pso_cfg)?;

    if let Some(path) = &args.trace_out {
        let mut csv = csv::Writer::from_writer(File::create(path)?);
        csv.write_record(["iteration", "best_fitness", "feasibility_residual"])?;
        for row in &trace {
            csv.write_record([
                row.iteration.to_string(),
                row.best_fitness.to_string(),
                row.feasibility_residual.to_string(),
            ])?;
        }
        csv.flush()?;
    }

    let model = GbsvmModel {
        w: solution.w.clone(),
        b: solution.b,
        balls,
        alpha: solution.alpha.clone(),
    };
    let norm_w: f64 = model.w.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("balls: {}", model.balls.len());
    println!("support balls: {}", solution.support_ids.len());
    println!("||w||: {norm_w}");
    println!("b: {}", model.b);
    println!("margin: {}", model.margin()?);

    ModelRecord::from_model(&model, args.solver.c, &ball_cfg).save(&args.model_out)
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = ModelRecord::load(&args.model)?.into_model();
    let ds = load_dataset(&args.data)?;

    let mut correct = 0usize;
    let mut csv = csv::Writer::from_writer(sink(args.out.as_deref())?);
    csv.write_record(["id", "prediction"])?;
    for i in 0..ds.len() {
        let predicted = model.predict(ds.row(i))?;
        if predicted == ds.label(i) {
            correct += 1;
        }
        csv.write_record([ds.id(i).to_string(), i8::from(predicted).to_string()])?;
    }
    csv.flush()?;
    drop(csv);
    eprintln!("accuracy: {} on {} rows", correct as f64 / ds.len() as f64, ds.len());
    Ok(())
}

fn experiment_config(
    balls: &BallArgs,
    solver: &SolverArgs,
    rates: Vec<f64>,
    repeats: usize,
    train_fraction: f64,
) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig {
        noise_rates: rates,
        repeats,
        train_fraction,
        c: solver.c,
        ball_cfg: balls.config()?,
        pso: solver.pso_config(solver.seed)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn bench_noise(args: BenchNoiseArgs) -> Result<()> {
    let cfg = experiment_config(
        &args.balls,
        &args.solver,
        args.rates.clone(),
        args.repeats,
        args.train_fraction,
    )?;
    let ds = load_dataset(&args.data)?;
    let report = experiment::run_noise_sweep(&ds, &cfg)?;

    for agg in report.aggregates() {
        eprintln!(
            "rate {:>4}: {:<5} mean accuracy {:.4} (mean {:.1} balls, {:.3} s)",
            agg.rate, agg.method.to_string(), agg.mean_accuracy, agg.mean_ball_count,
            agg.mean_seconds
        );
    }
    let out = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => report.write_csv(out),
        Format::Json => report.write_json(out),
    }
}

fn bench_time(args: BenchTimeArgs) -> Result<()> {
    let cfg = experiment_config(&args.balls, &args.solver, vec![0.0], 1, args.train_fraction)?;
    let ds = load_dataset(&args.data)?;
    let report = experiment::run_timing_comparison(&ds, &cfg)?;

    eprintln!(
        "granular-ball: {:.3} s on {} balls (accuracy {:.4}); point SVM: {:.3} s on {} points \
         (accuracy {:.4}); speedup {:.1}x",
        report.gbsvm_seconds, report.ball_count, report.gbsvm_accuracy, report.svm_seconds,
        report.point_count, report.svm_accuracy, report.speedup
    );
    let out = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => report.write_csv(out),
        Format::Json => report.write_json(out),
    }
}
