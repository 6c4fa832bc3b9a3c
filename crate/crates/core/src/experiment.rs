//! Benchmark protocol: label-noise robustness sweep and ball-vs-point
//! timing comparison, with a point-level SVM baseline solved by the same
//! swarm (every training point wrapped as a radius-0 ball).

use std::io;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::dataset::{Dataset, Label, NoiseSpec};
use crate::error::{GbsvmError, Result};
use crate::exec;
use crate::granular_ball::{self, BallGenConfig, GranularBall};
use crate::model::GbsvmModel;
use crate::pso::{self, PsoConfig};
use crate::seeding::derive_seed;

const STREAM_REPEAT: u64 = 10;
const STREAM_SPLIT: u64 = 11;
const STREAM_NOISE: u64 = 12;
const STREAM_SOLVE: u64 = 13;

/// Full benchmark protocol configuration. `pso.seed` is the root seed:
/// split, noise, and solver seeds for every cell derive from it.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub noise_rates: Vec<f64>,
    pub repeats: usize,
    pub train_fraction: f64,
    /// Box bound handed to the solver for both methods.
    pub c: f64,
    pub ball_cfg: BallGenConfig,
    pub pso: PsoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            noise_rates: vec![0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            repeats: 5,
            train_fraction: 0.7,
            c: 10.0,
            ball_cfg: BallGenConfig::default(),
            pso: PsoConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.noise_rates.is_empty() {
            return Err(GbsvmError::EmptyInput("noise rate list"));
        }
        if let Some(bad) = self.noise_rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(GbsvmError::InvalidConfig(format!(
                "noise rates must lie in [0, 1], got {bad}"
            )));
        }
        if self.repeats == 0 {
            return Err(GbsvmError::InvalidConfig("repeats must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(GbsvmError::InvalidConfig(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(GbsvmError::InvalidConfig(format!(
                "C must be finite and positive, got {}",
                self.c
            )));
        }
        self.ball_cfg.validate()?;
        self.pso.validate()
    }

    /// Per-repeat seeds, derived from the root seed.
    pub fn repeat_seeds(&self) -> Vec<u64> {
        (0..self.repeats)
            .map(|r| derive_seed(self.pso.seed, &[STREAM_REPEAT, r as u64]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "GBSVM")]
    Gbsvm,
    #[serde(rename = "SVM")]
    Svm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Gbsvm => write!(f, "GBSVM"),
            Method::Svm => write!(f, "SVM"),
        }
    }
}

/// One trained model plus its training cost.
#[derive(Clone, Debug)]
pub struct Trained {
    pub model: GbsvmModel,
    pub solution: crate::model::DualSolution,
    pub ball_count: usize,
    pub seconds: f64,
}

/// One (rate, repeat, method) observation.
#[derive(Clone, Debug, Serialize)]
pub struct NoiseCell {
    pub rate: f64,
    pub repeat: usize,
    pub seed: u64,
    pub method: Method,
    pub accuracy: f64,
    pub seconds: f64,
    /// Training units: ball count for GBSVM, point count for the baseline.
    pub ball_count: usize,
}

/// Per-(rate, method) aggregate over repeats.
#[derive(Clone, Debug, Serialize)]
pub struct NoiseAggregate {
    pub rate: f64,
    pub method: Method,
    pub mean_accuracy: f64,
    pub per_seed_accuracy: Vec<f64>,
    pub mean_seconds: f64,
    pub mean_ball_count: f64,
}

/// The noise sweep's raw cells, rate-major, repeats inside, GBSVM before
/// SVM within each (rate, repeat).
#[derive(Clone, Debug, Serialize)]
pub struct NoiseSweepReport {
    pub cells: Vec<NoiseCell>,
}

/// Wall-time comparison of the two methods on one clean split.
#[derive(Clone, Debug, Serialize)]
pub struct TimingReport {
    pub point_count: usize,
    pub ball_count: usize,
    pub gbsvm_seconds: f64,
    pub svm_seconds: f64,
    pub gbsvm_accuracy: f64,
    pub svm_accuracy: f64,
    /// svm_seconds / gbsvm_seconds.
    pub speedup: f64,
}

/// Two interleaved isotropic Gaussian classes in 2-D, unit variance,
/// centers `separation` apart along the first axis.
pub fn gaussian_blobs(n: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(GbsvmError::InsufficientData { needed: 4, found: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal parameters");
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
        let center_x = 0.5 * separation * label.sign();
        features.push(vec![center_x + normal.sample(&mut rng), normal.sample(&mut rng)]);
        labels.push(label);
    }
    Dataset::new(features, labels)
}

/// Wrap every training point as its own radius-0, purity-1 ball: the
/// degenerate cover under which the dual is exactly the classical SVM dual.
pub fn point_balls(ds: &Dataset) -> Vec<GranularBall> {
    (0..ds.len())
        .map(|i| GranularBall {
            center: ds.row(i).to_vec(),
            radius: 0.0,
            label: ds.label(i),
            purity: 1.0,
            members: vec![ds.id(i)],
            terminal: false,
        })
        .collect()
}

/// Generate balls, solve the dual, assemble the model; wall time covers
/// both stages.
pub fn train_gbsvm(train: &Dataset, cfg: &ExperimentConfig, solver_seed: u64) -> Result<Trained> {
    let started = Instant::now();
    let balls = granular_ball::generate(train, &cfg.ball_cfg)?;
    train_on_balls(balls, cfg, solver_seed, started)
}

/// Same solver, but over per-point degenerate balls: the fair point-SVM
/// baseline.
pub fn train_point_svm(train: &Dataset, cfg: &ExperimentConfig, solver_seed: u64) -> Result<Trained> {
    let started = Instant::now();
    let balls = point_balls(train);
    train_on_balls(balls, cfg, solver_seed, started)
}

fn train_on_balls(
    balls: Vec<GranularBall>,
    cfg: &ExperimentConfig,
    solver_seed: u64,
    started: Instant,
) -> Result<Trained> {
    let pso_cfg = PsoConfig { seed: solver_seed, ..cfg.pso.clone() };
    let solution = pso::solve(&balls, cfg.c, &pso_cfg)?;
    let seconds = started.elapsed().as_secs_f64();
    let model = GbsvmModel {
        w: solution.w.clone(),
        b: solution.b,
        alpha: solution.alpha.clone(),
        balls,
    };
    Ok(Trained { ball_count: model.balls.len(), model, solution, seconds })
}

/// Fraction of test rows the model labels correctly.
pub fn evaluate_accuracy(model: &GbsvmModel, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(GbsvmError::EmptyInput("test set"));
    }
    let mut correct = 0usize;
    for (row, label) in test.iter() {
        if model.predict(row)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// The noise-robustness protocol: normalize, then for every (rate, repeat)
/// split the data, corrupt ONLY the training labels, train both methods
/// with identical solver configuration, and score on the untouched test
/// split. Cells are independent and may run in parallel; output order is
/// deterministic regardless.
pub fn run_noise_sweep(ds: &Dataset, cfg: &ExperimentConfig) -> Result<NoiseSweepReport> {
    cfg.validate()?;
    let data = ds.normalize_minmax();
    let repeat_seeds = cfg.repeat_seeds();
    let cell_count = cfg.noise_rates.len() * cfg.repeats;

    let outcomes: Vec<Result<[NoiseCell; 2]>> = exec::map_indexed(cell_count, |idx| {
        let rate_idx = idx / cfg.repeats;
        let repeat = idx % cfg.repeats;
        let rate = cfg.noise_rates[rate_idx];
        let seed = repeat_seeds[repeat];

        let (train, test) =
            data.split_train_test(cfg.train_fraction, derive_seed(seed, &[STREAM_SPLIT]))?;
        let noisy = train.inject_label_noise(&NoiseSpec {
            rate,
            seed: derive_seed(seed, &[STREAM_NOISE, rate_idx as u64]),
        })?;
        debug_assert!(
            test.ids().iter().all(|id| !noisy.ids().contains(id)),
            "noise must never touch test rows"
        );

        let solver_seed = derive_seed(seed, &[STREAM_SOLVE, rate_idx as u64]);
        let cell = |method, trained: &Trained, accuracy| NoiseCell {
            rate,
            repeat,
            seed,
            method,
            accuracy,
            seconds: trained.seconds,
            ball_count: trained.ball_count,
        };
        let gb = train_gbsvm(&noisy, cfg, solver_seed)?;
        let sv = train_point_svm(&noisy, cfg, solver_seed)?;
        Ok([
            cell(Method::Gbsvm, &gb, evaluate_accuracy(&gb.model, &test)?),
            cell(Method::Svm, &sv, evaluate_accuracy(&sv.model, &test)?),
        ])
    });

    let mut cells = Vec::with_capacity(cell_count * 2);
    for outcome in outcomes {
        let [gb, sv] = outcome?;
        cells.push(gb);
        cells.push(sv);
    }
    Ok(NoiseSweepReport { cells })
}

/// Wall-time comparison on one clean split; both methods get the identical
/// solver configuration and seed, run back to back.
pub fn run_timing_comparison(ds: &Dataset, cfg: &ExperimentConfig) -> Result<TimingReport> {
    cfg.validate()?;
    let data = ds.normalize_minmax();
    let (train, test) =
        data.split_train_test(cfg.train_fraction, derive_seed(cfg.pso.seed, &[STREAM_SPLIT]))?;
    let solver_seed = derive_seed(cfg.pso.seed, &[STREAM_SOLVE, 0]);
    let gb = train_gbsvm(&train, cfg, solver_seed)?;
    let sv = train_point_svm(&train, cfg, solver_seed)?;
    Ok(TimingReport {
        point_count: train.len(),
        ball_count: gb.ball_count,
        gbsvm_seconds: gb.seconds,
        svm_seconds: sv.seconds,
        gbsvm_accuracy: evaluate_accuracy(&gb.model, &test)?,
        svm_accuracy: evaluate_accuracy(&sv.model, &test)?,
        speedup: sv.seconds / gb.seconds,
    })
}

impl NoiseSweepReport {
    /// Mean accuracy over repeats for one (rate, method), if present.
    pub fn mean_accuracy(&self, rate: f64, method: Method) -> Option<f64> {
        let accs: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.rate == rate && c.method == method)
            .map(|c| c.accuracy)
            .collect();
        if accs.is_empty() {
            None
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    }

    /// Per-(rate, method) aggregates, rates in first-appearance order.
    pub fn aggregates(&self) -> Vec<NoiseAggregate> {
        let mut rates: Vec<f64> = Vec::new();
        for cell in &self.cells {
            if !rates.contains(&cell.rate) {
                rates.push(cell.rate);
            }
        }
        let mut out = Vec::with_capacity(rates.len() * 2);
        for rate in rates {
            for method in [Method::Gbsvm, Method::Svm] {
                let group: Vec<&NoiseCell> = self
                    .cells
                    .iter()
                    .filter(|c| c.rate == rate && c.method == method)
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let k = group.len() as f64;
                out.push(NoiseAggregate {
                    rate,
                    method,
                    mean_accuracy: group.iter().map(|c| c.accuracy).sum::<f64>() / k,
                    per_seed_accuracy: group.iter().map(|c| c.accuracy).collect(),
                    mean_seconds: group.iter().map(|c| c.seconds).sum::<f64>() / k,
                    mean_ball_count: group.iter().map(|c| c.ball_count as f64).sum::<f64>() / k,
                });
            }
        }
        out
    }

    /// One CSV row per cell.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["rate", "repeat", "seed", "method", "accuracy", "seconds", "ball_count"])?;
        for c in &self.cells {
            csv.write_record([
                c.rate.to_string(),
                c.repeat.to_string(),
                c.seed.to_string(),
                c.method.to_string(),
                c.accuracy.to_string(),
                c.seconds.to_string(),
                c.ball_count.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Nested JSON: aggregates plus the raw cells.
    pub fn write_json<W: io::Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Report<'a> {
            aggregates: Vec<NoiseAggregate>,
            cells: &'a [NoiseCell],
        }
        serde_json::to_writer_pretty(writer, &Report { aggregates: self.aggregates(), cells: &self.cells })?;
        Ok(())
    }
}

impl TimingReport {
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([
            "point_count",
            "ball_count",
            "gbsvm_seconds",
            "svm_seconds",
            "gbsvm_accuracy",
            "svm_accuracy",
            "speedup",
        ])?;
        csv.write_record([
            self.point_count.to_string(),
            self.ball_count.to_string(),
            self.gbsvm_seconds.to_string(),
            self.svm_seconds.to_string(),
            self.gbsvm_accuracy.to_string(),
            self.svm_accuracy.to_string(),
            self.speedup.to_string(),
        ])?;
        csv.flush()?;
        Ok(())
    }

    pub fn write_json<W: io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}
