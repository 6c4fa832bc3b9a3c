//! Particle swarm maximization of the dual objective.
//!
//! Particles are candidate multiplier vectors α (one coordinate per ball).
//! After every velocity/position update each particle is projected back to
//! the feasible set: coordinates are clamped to [0, C], then the two class
//! sums are balanced by the δ-rescaling rule δ = √(S₋/S₊) — positive-class
//! coordinates scaled by δ, negative-class ones by 1/δ — re-clamping and
//! repeating until the balance residual falls inside tolerance.
//!
//! Every random draw comes from a stream keyed by (seed, phase, iteration,
//! particle), so results are bit-identical whether fitness evaluation runs
//! on rayon or sequentially, and personal/global bests are merged in a
//! deterministic in-order pass after each parallel phase.

use rand::Rng;
use serde::Serialize;

use crate::dataset::Label;
use crate::error::{GbsvmError, Result};
use crate::exec;
use crate::granular_ball::GranularBall;
use crate::model::{self, DualSolution};
use crate::seeding;

const STREAM_INIT: u64 = 0;
const STREAM_STEP: u64 = 1;

/// Swarm hyperparameters.
#[derive(Clone, Debug, Serialize)]
pub struct PsoConfig {
    /// Particle count.
    pub pop: usize,
    /// Iteration cap.
    pub max_iter: usize,
    /// Inertia weight on the previous velocity.
    pub inertia: f64,
    /// Pull toward each particle's personal best.
    pub cognitive: f64,
    /// Pull toward the global best.
    pub social: f64,
    /// Per-coordinate velocity cap; `None` means 0.2·C.
    pub vmax: Option<f64>,
    pub seed: u64,
    /// Max δ-rescaling rounds per projection.
    pub projection_rounds: usize,
    /// Balance tolerance, relative to max(1, Σα).
    pub feas_tol: f64,
    /// Minimum global-best improvement that counts as progress.
    pub stall_tol: f64,
    /// Consecutive non-improving iterations tolerated before stopping.
    /// Set to 1 to stop on the first non-improving iteration.
    pub stall_patience: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            pop: 400,
            max_iter: 1050,
            inertia: 0.5,
            cognitive: 1.6,
            social: 1.6,
            vmax: None,
            seed: 0,
            projection_rounds: 10,
            feas_tol: 1e-6,
            stall_tol: 1e-9,
            stall_patience: 25,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let complain = |msg: String| Err(GbsvmError::InvalidConfig(msg));
        if self.pop < 2 {
            return complain(format!("population must be at least 2, got {}", self.pop));
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return complain(format!("inertia must lie in [0, 1], got {}", self.inertia));
        }
        if self.cognitive <= 0.0 || self.social <= 0.0 {
            return complain(format!(
                "learning factors must be positive, got c1={} c2={}",
                self.cognitive, self.social
            ));
        }
        if let Some(v) = self.vmax {
            if v <= 0.0 {
                return complain(format!("vmax must be positive, got {v}"));
            }
        }
        if self.projection_rounds == 0 {
            return complain("projection rounds must be at least 1".into());
        }
        if self.feas_tol <= 0.0 {
            return complain(format!("feasibility tolerance must be positive, got {}", self.feas_tol));
        }
        if self.stall_patience == 0 {
            return complain("stall patience must be at least 1".into());
        }
        Ok(())
    }

    fn velocity_cap(&self, c: f64) -> f64 {
        self.vmax.unwrap_or(0.2 * c)
    }
}

/// Swarm state. All stored positions are feasible (projected).
#[derive(Clone, Debug, PartialEq)]
pub struct Swarm {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub best_positions: Vec<Vec<f64>>,
    pub best_fitness: Vec<f64>,
    pub global_best: Vec<f64>,
    pub global_best_fitness: f64,
    pub iteration: usize,
}

/// One convergence-trace sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub best_fitness: f64,
    pub feasibility_residual: f64,
}

/// Project `alpha` onto the feasible set: box [0, C] exactly, class
/// balance within `cfg.feas_tol`. If either class sum hits zero during
/// rescaling the whole vector collapses to zero (still feasible).
pub fn project_feasible(alpha: &[f64], labels: &[Label], c: f64, cfg: &PsoConfig) -> Result<Vec<f64>> {
    if alpha.len() != labels.len() {
        return Err(GbsvmError::LengthMismatch { left: alpha.len(), right: labels.len() });
    }
    let mut out = alpha.to_vec();
    project_in_place(&mut out, labels, c, cfg);
    Ok(out)
}

fn project_in_place(alpha: &mut [f64], labels: &[Label], c: f64, cfg: &PsoConfig) {
    clamp_box(alpha, c);
    for _ in 0..cfg.projection_rounds {
        let (pos_sum, neg_sum) = class_sums(alpha, labels);
        let residual = pos_sum - neg_sum;
        if residual.abs() <= cfg.feas_tol * (pos_sum + neg_sum).max(1.0) {
            return;
        }
        if pos_sum <= 0.0 || neg_sum <= 0.0 {
            alpha.fill(0.0);
            return;
        }
        let delta = (neg_sum / pos_sum).sqrt();
        for (a, y) in alpha.iter_mut().zip(labels) {
            match y {
                Label::Positive => *a *= delta,
                Label::Negative => *a /= delta,
            }
        }
        clamp_box(alpha, c);
    }
    // Rounds exhausted. Against a class pinned at the upper bound the δ
    // rounds shrink the imbalance only geometrically, so they can stop short
    // of the tolerance; close the rest by scaling the heavier class straight
    // down to the lighter class's sum, which cannot leave the box.
    let (pos_sum, neg_sum) = class_sums(alpha, labels);
    if (pos_sum - neg_sum).abs() <= cfg.feas_tol * (pos_sum + neg_sum).max(1.0) {
        return;
    }
    if pos_sum <= 0.0 || neg_sum <= 0.0 {
        alpha.fill(0.0);
        return;
    }
    let (heavier, scale) = if pos_sum > neg_sum {
        (Label::Positive, neg_sum / pos_sum)
    } else {
        (Label::Negative, pos_sum / neg_sum)
    };
    for (a, y) in alpha.iter_mut().zip(labels) {
        if *y == heavier {
            *a *= scale;
        }
    }
}

fn class_sums(alpha: &[f64], labels: &[Label]) -> (f64, f64) {
    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    for (a, y) in alpha.iter().zip(labels) {
        match y {
            Label::Positive => pos_sum += a,
            Label::Negative => neg_sum += a,
        }
    }
    (pos_sum, neg_sum)
}

fn clamp_box(alpha: &mut [f64], c: f64) {
    for a in alpha {
        *a = a.clamp(0.0, c);
    }
}

/// Seed a swarm with uniform positions in [0, C]^m (projected feasible)
/// and uniform velocities in [−vmax, vmax]^m.
pub fn initialize_swarm(
    cfg: &PsoConfig,
    labels: &[Label],
    c: f64,
    fitness: &(impl Fn(&[f64]) -> f64 + Sync),
) -> Result<Swarm> {
    cfg.validate()?;
    check_problem(labels, c)?;
    let dim = labels.len();
    let cap = cfg.velocity_cap(c);

    let seeded: Vec<(Vec<f64>, Vec<f64>, f64)> = exec::map_indexed(cfg.pop, |p| {
        let mut rng = seeding::stream_rng(cfg.seed, &[STREAM_INIT, p as u64]);
        let mut position: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..=c)).collect();
        let velocity: Vec<f64> = (0..dim).map(|_| rng.gen_range(-cap..=cap)).collect();
        project_in_place(&mut position, labels, c, cfg);
        let fit = fitness(&position);
        (position, velocity, fit)
    });

    let mut positions = Vec::with_capacity(cfg.pop);
    let mut velocities = Vec::with_capacity(cfg.pop);
    let mut best_fitness = Vec::with_capacity(cfg.pop);
    for (position, velocity, fit) in seeded {
        positions.push(position);
        velocities.push(velocity);
        best_fitness.push(fit);
    }
    let best_positions = positions.clone();
    let mut best = 0;
    for p in 1..cfg.pop {
        if best_fitness[p] > best_fitness[best] {
            best = p;
        }
    }
    Ok(Swarm {
        global_best: best_positions[best].clone(),
        global_best_fitness: best_fitness[best],
        positions,
        velocities,
        best_positions,
        best_fitness,
        iteration: 0,
    })
}

/// One synchronous swarm iteration: velocity/position updates and
/// projection for every particle (order-independent, possibly parallel),
/// then a deterministic in-order merge of personal and global bests.
/// The global best never decreases.
pub fn pso_step(
    swarm: &mut Swarm,
    fitness: &(impl Fn(&[f64]) -> f64 + Sync),
    cfg: &PsoConfig,
    labels: &[Label],
    c: f64,
) -> Result<()> {
    let dim = labels.len();
    if swarm.positions.is_empty() || swarm.positions[0].len() != dim {
        return Err(GbsvmError::LengthMismatch {
            left: swarm.positions.first().map_or(0, Vec::len),
            right: dim,
        });
    }
    let cap = cfg.velocity_cap(c);
    let iteration = swarm.iteration as u64;
    let state = &*swarm;

    let moved: Vec<(Vec<f64>, Vec<f64>, f64)> = exec::map_indexed(state.positions.len(), |p| {
        let mut rng = seeding::stream_rng(cfg.seed, &[STREAM_STEP, iteration, p as u64]);
        let x = &state.positions[p];
        let v = &state.velocities[p];
        let pbest = &state.best_positions[p];
        let mut velocity = Vec::with_capacity(dim);
        for j in 0..dim {
            let r1: f64 = rng.gen();
            let r2: f64 = rng.gen();
            let vj = cfg.inertia * v[j]
                + cfg.cognitive * r1 * (pbest[j] - x[j])
                + cfg.social * r2 * (state.global_best[j] - x[j]);
            velocity.push(vj.clamp(-cap, cap));
        }
        let mut position: Vec<f64> = x.iter().zip(&velocity).map(|(xi, vi)| xi + vi).collect();
        project_in_place(&mut position, labels, c, cfg);
        let fit = fitness(&position);
        (velocity, position, fit)
    });

    for (p, (velocity, position, fit)) in moved.into_iter().enumerate() {
        swarm.velocities[p] = velocity;
        swarm.positions[p] = position;
        if fit > swarm.best_fitness[p] {
            swarm.best_fitness[p] = fit;
            swarm.best_positions[p] = swarm.positions[p].clone();
        }
    }
    for p in 0..swarm.positions.len() {
        if swarm.best_fitness[p] > swarm.global_best_fitness {
            swarm.global_best_fitness = swarm.best_fitness[p];
            swarm.global_best = swarm.best_positions[p].clone();
        }
    }
    swarm.iteration += 1;
    Ok(())
}

/// Maximize the dual over the given balls and return the solved model
/// pieces. Stops at `max_iter` or after `stall_patience` consecutive
/// iterations without a global-best improvement above `stall_tol`.
pub fn solve(balls: &[GranularBall], c: f64, cfg: &PsoConfig) -> Result<DualSolution> {
    solve_traced(balls, c, cfg).map(|(solution, _)| solution)
}

/// Like [`solve`], also returning one trace row per iteration (the first
/// row describes the initialized swarm).
pub fn solve_traced(
    balls: &[GranularBall],
    c: f64,
    cfg: &PsoConfig,
) -> Result<(DualSolution, Vec<TraceRow>)> {
    if balls.len() < 2 {
        return Err(GbsvmError::InsufficientBalls(balls.len()));
    }
    let labels: Vec<Label> = balls.iter().map(|b| b.label).collect();
    let fitness =
        |alpha: &[f64]| model::dual_objective(alpha, balls).expect("alpha matches ball count");

    let mut swarm = initialize_swarm(cfg, &labels, c, &fitness)?;
    let mut trace = Vec::with_capacity(cfg.max_iter.min(4096) + 1);
    trace.push(trace_row(&swarm, &labels));

    let mut stall = 0;
    while swarm.iteration < cfg.max_iter {
        let before = swarm.global_best_fitness;
        pso_step(&mut swarm, &fitness, cfg, &labels, c)?;
        trace.push(trace_row(&swarm, &labels));
        if swarm.global_best_fitness - before > cfg.stall_tol {
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.stall_patience {
                break;
            }
        }
    }

    let alpha = swarm.global_best.clone();
    let (center_sum, radius_sum) = model::aggregates(&alpha, balls);
    let w = model::recover_w(&alpha, balls)?;
    let b = model::recover_b(&alpha, &w, balls, c)?;
    let support_ids = model::support_indices(&alpha, c);
    Ok((
        DualSolution {
            alpha,
            center_sum,
            radius_sum,
            w,
            b,
            c_bound: c,
            support_ids,
            objective: swarm.global_best_fitness,
        },
        trace,
    ))
}

fn trace_row(swarm: &Swarm, labels: &[Label]) -> TraceRow {
    let residual = model::constraint_residual(&swarm.global_best, labels)
        .expect("swarm dimension matches labels")
        .abs();
    TraceRow {
        iteration: swarm.iteration,
        best_fitness: swarm.global_best_fitness,
        feasibility_residual: residual,
    }
}

fn check_problem(labels: &[Label], c: f64) -> Result<()> {
    if labels.len() < 2 {
        return Err(GbsvmError::InsufficientBalls(labels.len()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(GbsvmError::InvalidConfig(format!(
            "the swarm needs a finite positive box bound, got {c}"
        )));
    }
    let has_pos = labels.contains(&Label::Positive);
    let has_neg = labels.contains(&Label::Negative);
    if !(has_pos && has_neg) {
        return Err(GbsvmError::SingleClass);
    }
    Ok(())
}
