//! Purity-constrained granular-ball covers.
//!
//! A granular ball is a hyper-ball summarizing a subset of the training
//! data: its center is the member mean, its radius the average (or maximum)
//! member distance, its label the member majority. Starting from one ball
//! holding the whole dataset, any ball whose purity falls below the
//! threshold is split by nearest-centroid clustering seeded at the
//! per-class centroids, until every ball is pure enough or too small or
//! too degenerate to split further.
//!
//! Generation is fully deterministic: centroid seeding, tie-breaking, and
//! empty-cluster repair are all rule-based, so no RNG is involved.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{GbsvmError, Result};
use crate::linalg::dist;

/// How a ball's radius summarizes member distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusMode {
    /// Mean distance from center to members; fits the mass of the ball.
    #[default]
    Average,
    /// Maximum distance; the ball geometrically covers its members.
    Max,
}

impl std::fmt::Display for RadiusMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadiusMode::Average => write!(f, "average"),
            RadiusMode::Max => write!(f, "max"),
        }
    }
}

impl std::str::FromStr for RadiusMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "average" => Ok(RadiusMode::Average),
            "max" => Ok(RadiusMode::Max),
            other => Err(format!("radius mode must be 'average' or 'max', got {other:?}")),
        }
    }
}

/// Ball-generation parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BallGenConfig {
    /// Purity threshold T; balls below it are split. Must lie in (0.5, 1].
    pub purity_threshold: f64,
    pub radius_mode: RadiusMode,
    /// Balls smaller than this are never split (accepted as terminal).
    pub min_split_size: usize,
}

impl Default for BallGenConfig {
    fn default() -> Self {
        BallGenConfig {
            purity_threshold: 0.9,
            radius_mode: RadiusMode::Average,
            min_split_size: 2,
        }
    }
}

impl BallGenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.purity_threshold > 0.5 && self.purity_threshold <= 1.0) {
            return Err(GbsvmError::InvalidConfig(format!(
                "purity threshold must lie in (0.5, 1], got {}",
                self.purity_threshold
            )));
        }
        if self.min_split_size < 2 {
            return Err(GbsvmError::InvalidConfig(format!(
                "min split size must be at least 2, got {}",
                self.min_split_size
            )));
        }
        Ok(())
    }
}

/// One granular ball. `members` holds the stable row ids of the source
/// dataset, sorted ascending. `terminal` marks a ball that was accepted
/// below the purity threshold because it could not be split further.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub label: Label,
    pub purity: f64,
    pub members: Vec<u64>,
    pub terminal: bool,
}

impl GranularBall {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Outcome of asking a ball to split.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitOutcome {
    /// Child balls partitioning the parent's members.
    Split(Vec<GranularBall>),
    /// The ball cannot be split (too small, or all points identical);
    /// accept it as-is, flagged terminal.
    Terminal,
}

/// Arithmetic mean of a nonempty point set.
pub fn ball_center(points: &[&[f64]]) -> Result<Vec<f64>> {
    let first = points.first().ok_or(GbsvmError::EmptyInput("ball has no member points"))?;
    let mut center = vec![0.0; first.len()];
    for p in points {
        for (c, x) in center.iter_mut().zip(*p) {
            *c += x;
        }
    }
    let k = points.len() as f64;
    center.iter_mut().for_each(|c| *c /= k);
    Ok(center)
}

/// Radius of a point set around `center` under the given mode.
pub fn ball_radius(points: &[&[f64]], center: &[f64], mode: RadiusMode) -> Result<f64> {
    if points.is_empty() {
        return Err(GbsvmError::EmptyInput("ball has no member points"));
    }
    let distances = points.iter().map(|p| dist(p, center));
    Ok(match mode {
        RadiusMode::Average => distances.sum::<f64>() / points.len() as f64,
        RadiusMode::Max => distances.fold(0.0, f64::max),
    })
}

/// Majority fraction and majority label of a nonempty label multiset.
/// An exact tie goes to the positive class.
pub fn ball_purity(labels: &[Label]) -> Result<(f64, Label)> {
    if labels.is_empty() {
        return Err(GbsvmError::EmptyInput("ball has no member labels"));
    }
    let pos = labels.iter().filter(|l| **l == Label::Positive).count();
    let neg = labels.len() - pos;
    let majority = if pos >= neg { Label::Positive } else { Label::Negative };
    Ok((pos.max(neg) as f64 / labels.len() as f64, majority))
}

/// Generate the purity-constrained ball cover of `ds`.
///
/// Every returned ball either meets the purity threshold or is flagged
/// `terminal`; member sets partition the dataset's row ids. Output is
/// sorted by smallest member id.
pub fn generate(ds: &Dataset, cfg: &BallGenConfig) -> Result<Vec<GranularBall>> {
    cfg.validate()?;
    let mut queue: Vec<Vec<usize>> = vec![(0..ds.len()).collect()];
    let mut out = Vec::new();
    while let Some(indices) = queue.pop() {
        let labels: Vec<Label> = indices.iter().map(|&i| ds.label(i)).collect();
        let (purity, _) = ball_purity(&labels)?;
        if purity >= cfg.purity_threshold {
            out.push(build_ball(ds, &indices, cfg.radius_mode, false)?);
            continue;
        }
        match split_indices(ds, &indices, cfg.min_split_size) {
            Some(children) => queue.extend(children),
            None => out.push(build_ball(ds, &indices, cfg.radius_mode, true)?),
        }
    }
    out.sort_by_key(|b| b.members[0]);
    Ok(out)
}

/// Split one ball into child balls by nearest-centroid clustering.
///
/// The cluster count equals the number of distinct labels in the ball; a
/// single-label ball is split in two, seeded at the point farthest from
/// the center and the point farthest from that seed.
pub fn split_ball(ball: &GranularBall, ds: &Dataset, cfg: &BallGenConfig) -> Result<SplitOutcome> {
    let index_of = ds.id_index();
    let indices: Vec<usize> = ball
        .members
        .iter()
        .map(|id| {
            index_of.get(id).copied().ok_or(GbsvmError::LengthMismatch {
                left: ball.members.len(),
                right: index_of.len(),
            })
        })
        .collect::<Result<_>>()?;
    match split_indices(ds, &indices, cfg.min_split_size) {
        Some(children) => Ok(SplitOutcome::Split(
            children
                .iter()
                .map(|child| build_ball(ds, child, cfg.radius_mode, false))
                .collect::<Result<_>>()?,
        )),
        None => Ok(SplitOutcome::Terminal),
    }
}

fn build_ball(
    ds: &Dataset,
    indices: &[usize],
    mode: RadiusMode,
    terminal: bool,
) -> Result<GranularBall> {
    let points: Vec<&[f64]> = indices.iter().map(|&i| ds.row(i)).collect();
    let labels: Vec<Label> = indices.iter().map(|&i| ds.label(i)).collect();
    let center = ball_center(&points)?;
    let radius = ball_radius(&points, &center, mode)?;
    let (purity, label) = ball_purity(&labels)?;
    let mut members: Vec<u64> = indices.iter().map(|&i| ds.id(i)).collect();
    members.sort_unstable();
    Ok(GranularBall { center, radius, label, purity, members, terminal })
}

/// Nearest-centroid split of `indices`; `None` means unsplittable.
fn split_indices(ds: &Dataset, indices: &[usize], min_split_size: usize) -> Option<Vec<Vec<usize>>> {
    if indices.len() < min_split_size {
        return None;
    }
    let identical = indices.iter().all(|&i| ds.row(i) == ds.row(indices[0]));
    if identical {
        return None;
    }

    let points: Vec<&[f64]> = indices.iter().map(|&i| ds.row(i)).collect();
    let mut centroids = seed_centroids(ds, indices, &points);
    let k = centroids.len();
    let mut assignment = vec![0usize; points.len()];

    for _round in 0..100 {
        assign_nearest(&points, &centroids, &mut assignment);
        // Repair empty clusters by reseeding at the member farthest from
        // its assigned centroid; bounded by k attempts per round.
        for _ in 0..k {
            let mut counts = vec![0usize; k];
            for &a in &assignment {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else { break };
            let farthest = (0..points.len())
                .max_by(|&a, &b| {
                    let da = dist(points[a], &centroids[assignment[a]]);
                    let db = dist(points[b], &centroids[assignment[b]]);
                    da.partial_cmp(&db).unwrap().then(b.cmp(&a))
                })
                .expect("nonempty ball");
            centroids[empty] = points[farthest].to_vec();
            assign_nearest(&points, &centroids, &mut assignment);
        }
        let mut counts = vec![0usize; k];
        for &a in &assignment {
            counts[a] += 1;
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }

        let mut shift: f64 = 0.0;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let cluster: Vec<&[f64]> =
                (0..points.len()).filter(|&i| assignment[i] == c).map(|i| points[i]).collect();
            let mean = ball_center(&cluster).expect("nonempty cluster");
            shift = shift.max(dist(&mean, centroid));
            *centroid = mean;
        }
        if shift <= 1e-6 {
            break;
        }
    }

    let mut children = vec![Vec::new(); k];
    for (pos, &idx) in indices.iter().enumerate() {
        children[assignment[pos]].push(idx);
    }
    Some(children)
}

/// Initial centroids: one per distinct label (positive class first); a
/// single-label ball gets two geometric seeds instead.
fn seed_centroids(ds: &Dataset, indices: &[usize], points: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut seeds = Vec::new();
    for class in [Label::Positive, Label::Negative] {
        let members: Vec<&[f64]> = indices
            .iter()
            .filter(|&&i| ds.label(i) == class)
            .map(|&i| ds.row(i))
            .collect();
        if !members.is_empty() {
            seeds.push(ball_center(&members).expect("nonempty class"));
        }
    }
    if seeds.len() >= 2 {
        return seeds;
    }
    let center = ball_center(points).expect("nonempty ball");
    let first = farthest_from(points, &center);
    let second = farthest_from(points, points[first]);
    vec![points[first].to_vec(), points[second].to_vec()]
}

/// Index of the point farthest from `origin`; ties go to the lowest index.
fn farthest_from(points: &[&[f64]], origin: &[f64]) -> usize {
    (0..points.len())
        .max_by(|&a, &b| {
            dist(points[a], origin)
                .partial_cmp(&dist(points[b], origin))
                .unwrap()
                .then(b.cmp(&a))
        })
        .expect("nonempty point set")
}

/// Assign each point to its nearest centroid; ties go to the lowest
/// centroid index.
fn assign_nearest(points: &[&[f64]], centroids: &[Vec<f64>], assignment: &mut [usize]) {
    for (slot, p) in assignment.iter_mut().zip(points) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, centroid) in centroids.iter().enumerate() {
            let d = dist(p, centroid);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        *slot = best;
    }
}
