//! Granular-ball support vector machine.
//!
//! Instead of feeding individual points to a maximum-margin classifier, the
//! training set is first covered by *granular balls*: hyper-balls whose center
//! is the mean of their member points and whose label is the member majority.
//! Balls are split recursively until each one is label-pure enough, and the
//! classifier is then trained on the balls alone. A ball's coarse granularity
//! absorbs label noise that would otherwise distort the boundary, and the ball
//! count is usually far below the point count, which makes the swarm-based
//! solver much cheaper than solving over raw points.
//!
//! The pipeline:
//!
//! 1. [`dataset`] — load a binary-labelled CSV, min-max normalize, split
//!    train/test, optionally inject seeded label noise.
//! 2. [`granular_ball`] — generate a purity-constrained ball cover.
//! 3. [`model`] — the ball-based dual objective, weight/offset recovery,
//!    and prediction.
//! 4. [`pso`] — maximize the dual with a particle swarm plus a
//!    clamp-and-rescale feasibility projection.
//! 5. [`experiment`] — noise-robustness and timing comparisons against a
//!    point-level SVM solved by the same swarm.
//!
//! With the default `parallel` feature, particle fitness evaluation and
//! experiment cells run on rayon. Building with `--no-default-features`
//! produces a sequential binary with bit-identical results: every random
//! stream is keyed by (seed, particle, iteration), never by scheduling order.

pub mod dataset;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod granular_ball;
mod linalg;
pub mod model;
pub mod pso;
pub mod seeding;

pub use dataset::{ColumnSelector, Dataset, Label, NoiseSpec};
pub use error::{GbsvmError, Result};
pub use experiment::{ExperimentConfig, Method, NoiseSweepReport, TimingReport};
pub use granular_ball::{BallGenConfig, GranularBall, RadiusMode};
pub use model::{DualSolution, GbsvmModel, ModelRecord};
pub use pso::{PsoConfig, Swarm};
