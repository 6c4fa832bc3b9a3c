//! The granular-ball SVM model: dual objective, weight/offset recovery,
//! margin, and prediction.
//!
//! With multipliers α over balls (centers cᵢ, radii rᵢ, labels yᵢ), the
//! dual objective is
//!
//! ```text
//! f(α) = −½‖A‖² + ½B² + |‖A‖ − B|·B + Σαᵢ,
//! A = Σ αᵢ yᵢ cᵢ,   B = Σ αᵢ rᵢ,
//! ```
//!
//! maximized subject to Σαᵢyᵢ = 0 and 0 ≤ αᵢ ≤ C. When every radius is
//! zero this is exactly the classical soft-margin SVM dual, so a point-level
//! SVM falls out as the degenerate case. The weight vector is recovered as
//! w = (‖A‖ − B)·A/‖A‖, giving ‖w‖ = |‖A‖ − B|, and the margin between the
//! two support planes is √2/‖w‖.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{GbsvmError, Result};
use crate::granular_ball::{BallGenConfig, GranularBall, RadiusMode};
use crate::linalg::{axpy, dot, norm};

/// Below this ‖A‖ the weight direction is undefined.
pub const EPS_DEGENERATE: f64 = 1e-12;

/// Multipliers above `support_epsilon` count as support balls.
pub fn support_epsilon(c_bound: f64, alpha: &[f64]) -> f64 {
    let scale = if c_bound.is_finite() {
        c_bound
    } else {
        alpha.iter().copied().fold(1.0, f64::max)
    };
    1e-6 * scale
}

/// A solved dual: multipliers plus everything recovered from them.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// A = Σ αᵢ yᵢ cᵢ.
    pub center_sum: Vec<f64>,
    /// B = Σ αᵢ rᵢ.
    pub radius_sum: f64,
    pub w: Vec<f64>,
    pub b: f64,
    /// Box bound C; `f64::INFINITY` for the separable model.
    pub c_bound: f64,
    /// Ball indices with αᵢ above the support threshold.
    pub support_ids: Vec<usize>,
    /// Dual objective value at `alpha`.
    pub objective: f64,
}

/// A trained classifier: decision plane plus the balls it was fit on.
#[derive(Clone, Debug, PartialEq)]
pub struct GbsvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub balls: Vec<GranularBall>,
    pub alpha: Vec<f64>,
}

/// Label-weighted center sum A and radius sum B.
pub(crate) fn aggregates(alpha: &[f64], balls: &[GranularBall]) -> (Vec<f64>, f64) {
    let d = balls[0].center.len();
    let mut center_sum = vec![0.0; d];
    let mut radius_sum = 0.0;
    for (a, ball) in alpha.iter().zip(balls) {
        axpy(&mut center_sum, a * ball.label.sign(), &ball.center);
        radius_sum += a * ball.radius;
    }
    (center_sum, radius_sum)
}

fn check_lengths(alpha: &[f64], balls: &[GranularBall]) -> Result<()> {
    if alpha.len() != balls.len() || balls.is_empty() {
        return Err(GbsvmError::LengthMismatch { left: alpha.len(), right: balls.len() });
    }
    Ok(())
}

/// Dual objective f(α); the swarm's fitness function.
pub fn dual_objective(alpha: &[f64], balls: &[GranularBall]) -> Result<f64> {
    check_lengths(alpha, balls)?;
    let (center_sum, radius_sum) = aggregates(alpha, balls);
    let norm_sq = dot(&center_sum, &center_sum);
    let norm_a = norm_sq.sqrt();
    let alpha_total: f64 = alpha.iter().sum();
    Ok(-0.5 * norm_sq
        + 0.5 * radius_sum * radius_sum
        + (norm_a - radius_sum).abs() * radius_sum
        + alpha_total)
}

/// Balance-constraint residual Σ αᵢ yᵢ.
pub fn constraint_residual(alpha: &[f64], labels: &[Label]) -> Result<f64> {
    if alpha.len() != labels.len() {
        return Err(GbsvmError::LengthMismatch { left: alpha.len(), right: labels.len() });
    }
    Ok(alpha.iter().zip(labels).map(|(a, y)| a * y.sign()).sum())
}

/// Weight vector w = (‖A‖ − B)·A/‖A‖.
pub fn recover_w(alpha: &[f64], balls: &[GranularBall]) -> Result<Vec<f64>> {
    check_lengths(alpha, balls)?;
    let (center_sum, radius_sum) = aggregates(alpha, balls);
    let norm_a = norm(&center_sum);
    if norm_a <= EPS_DEGENERATE {
        return Err(GbsvmError::DegenerateSolution { norm_a });
    }
    let scale = (norm_a - radius_sum) / norm_a;
    Ok(center_sum.iter().map(|a| a * scale).collect())
}

/// Offset b, averaged over interior support balls (0 < α < C away from
/// both bounds); falls back to all support balls when none are interior.
///
/// Each support ball i sits on its class's support plane, giving
/// bᵢ = yᵢ(1 + ‖w‖rᵢ) − w·cᵢ.
pub fn recover_b(alpha: &[f64], w: &[f64], balls: &[GranularBall], c_bound: f64) -> Result<f64> {
    check_lengths(alpha, balls)?;
    let eps = support_epsilon(c_bound, alpha);
    let interior = |a: f64| a > eps && (!c_bound.is_finite() || a < c_bound - eps);
    let support = |a: f64| a > eps;

    let mut chosen: Vec<usize> = (0..alpha.len()).filter(|&i| interior(alpha[i])).collect();
    if chosen.is_empty() {
        chosen = (0..alpha.len()).filter(|&i| support(alpha[i])).collect();
    }
    if chosen.is_empty() {
        return Err(GbsvmError::NoSupportBalls);
    }
    let norm_w = norm(w);
    let sum: f64 = chosen
        .iter()
        .map(|&i| {
            let ball = &balls[i];
            ball.label.sign() * (1.0 + norm_w * ball.radius) - dot(w, &ball.center)
        })
        .sum();
    Ok(sum / chosen.len() as f64)
}

/// Indices of support balls (α above the support threshold).
pub fn support_indices(alpha: &[f64], c_bound: f64) -> Vec<usize> {
    let eps = support_epsilon(c_bound, alpha);
    (0..alpha.len()).filter(|&i| alpha[i] > eps).collect()
}

impl GbsvmModel {
    /// Distance between the two support planes: √2/‖w‖.
    pub fn margin(&self) -> Result<f64> {
        let norm_w = norm(&self.w);
        if norm_w <= EPS_DEGENERATE {
            return Err(GbsvmError::DegenerateSolution { norm_a: norm_w });
        }
        Ok(std::f64::consts::SQRT_2 / norm_w)
    }

    /// Signed distance proxy w·x + b.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(GbsvmError::DimensionMismatch { expected: self.w.len(), got: x.len() });
        }
        Ok(dot(&self.w, x) + self.b)
    }

    /// Predicted label of `x`; a decision value of exactly zero maps to
    /// the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.decision_value(x)?))
    }

    /// Per-ball slack ξᵢ = max(0, 1 − [yᵢ(w·cᵢ + b) − ‖w‖rᵢ]): how far each
    /// ball violates its margin constraint. All zeros on a separable fit.
    pub fn primal_slacks(&self) -> Vec<f64> {
        let norm_w = norm(&self.w);
        self.balls
            .iter()
            .map(|ball| {
                let activation =
                    ball.label.sign() * (dot(&self.w, &ball.center) + self.b) - norm_w * ball.radius;
                (1.0 - activation).max(0.0)
            })
            .collect()
    }
}

/// On-disk model format: a single JSON object.
///
/// `C` serializes as `null` when the model was trained without an upper
/// box bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(rename = "C", with = "c_bound_serde")]
    pub c: f64,
    pub purity_threshold: f64,
    pub radius_mode: RadiusMode,
    pub balls: Vec<GranularBall>,
    pub alpha: Vec<f64>,
}

mod c_bound_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &f64, s: S) -> Result<S::Ok, S::Error> {
        if c.is_finite() {
            s.serialize_f64(*c)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl ModelRecord {
    pub fn from_model(model: &GbsvmModel, c: f64, ball_cfg: &BallGenConfig) -> ModelRecord {
        ModelRecord {
            w: model.w.clone(),
            b: model.b,
            c,
            purity_threshold: ball_cfg.purity_threshold,
            radius_mode: ball_cfg.radius_mode,
            balls: model.balls.clone(),
            alpha: model.alpha.clone(),
        }
    }

    pub fn into_model(self) -> GbsvmModel {
        GbsvmModel { w: self.w, b: self.b, balls: self.balls, alpha: self.alpha }
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<ModelRecord> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ball(center: &[f64], radius: f64, label: Label) -> GranularBall {
        GranularBall {
            center: center.to_vec(),
            radius,
            label,
            purity: 1.0,
            members: vec![0],
            terminal: false,
        }
    }

    #[test]
    fn zero_alpha_gives_zero_objective() {
        let balls =
            vec![ball(&[1.0, 0.0], 0.5, Label::Positive), ball(&[-1.0, 0.0], 0.5, Label::Negative)];
        assert_eq!(dual_objective(&[0.0, 0.0], &balls).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_pair_objective_value() {
        // A = (1, 0), B = 0 → f = −½ + 1 = ½.
        let balls =
            vec![ball(&[1.0, 0.0], 0.0, Label::Positive), ball(&[-1.0, 0.0], 0.0, Label::Negative)];
        assert_eq!(dual_objective(&[0.5, 0.5], &balls).unwrap(), 0.5);
    }

    #[test]
    fn zero_radius_collapses_to_point_svm_dual() {
        // Independent formula: −½‖Σαᵢyᵢxᵢ‖² + Σαᵢ.
        let balls = vec![
            ball(&[0.3, -1.2], 0.0, Label::Positive),
            ball(&[2.0, 0.7], 0.0, Label::Negative),
            ball(&[-0.4, 0.9], 0.0, Label::Positive),
        ];
        let alpha = [0.7, 1.3, 0.2];
        let mut acc = [0.0, 0.0];
        for (a, b) in alpha.iter().zip(&balls) {
            acc[0] += a * b.label.sign() * b.center[0];
            acc[1] += a * b.label.sign() * b.center[1];
        }
        let expected = -0.5 * (acc[0] * acc[0] + acc[1] * acc[1]) + alpha.iter().sum::<f64>();
        assert_eq!(dual_objective(&alpha, &balls).unwrap(), expected);
    }

    #[test]
    fn general_form_matches_simplified_form_when_norm_dominates() {
        // For ‖A‖ ≥ B the objective simplifies to −½(‖A‖−B)² + Σα.
        let balls = vec![
            ball(&[2.0, 1.0], 0.1, Label::Positive),
            ball(&[-1.5, -2.0], 0.2, Label::Negative),
        ];
        let alpha = [1.0, 0.8];
        let (a, b) = aggregates(&alpha, &balls);
        let norm_a = norm(&a);
        assert!(norm_a >= b);
        let simplified = -0.5 * (norm_a - b) * (norm_a - b) + alpha.iter().sum::<f64>();
        assert_relative_eq!(
            dual_objective(&alpha, &balls).unwrap(),
            simplified,
            max_relative = 1e-12
        );
    }

    #[test]
    fn objective_rejects_length_mismatch() {
        let balls = vec![ball(&[1.0], 0.0, Label::Positive)];
        assert!(matches!(
            dual_objective(&[0.1, 0.2], &balls),
            Err(GbsvmError::LengthMismatch { .. })
        ));
        assert!(matches!(
            constraint_residual(&[0.1], &[Label::Positive, Label::Negative]),
            Err(GbsvmError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn residual_arithmetic() {
        use Label::{Negative as N, Positive as P};
        assert_eq!(constraint_residual(&[1.0, 1.0], &[P, N]).unwrap(), 0.0);
        assert_eq!(constraint_residual(&[2.0, 1.0], &[P, N]).unwrap(), 1.0);
        assert_eq!(constraint_residual(&[0.0, 0.0], &[P, N]).unwrap(), 0.0);
    }

    #[test]
    fn weight_recovery_scales_center_sum() {
        // A = (3,4), B = 2 → w = (3/5)·(3,4) = (1.8, 2.4), ‖w‖ = 3.
        let balls = vec![ball(&[3.0, 4.0], 2.0, Label::Positive)];
        let w = recover_w(&[1.0], &balls).unwrap();
        assert_abs_diff_eq!(w[0], 1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 2.4, epsilon = 1e-15);
        assert_abs_diff_eq!(norm(&w), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_radius_weight_equals_center_sum_exactly() {
        let balls = vec![
            ball(&[0.123, -4.5], 0.0, Label::Positive),
            ball(&[1.7, 2.9], 0.0, Label::Negative),
        ];
        let alpha = [0.9, 0.4];
        let (a, _) = aggregates(&alpha, &balls);
        assert_eq!(recover_w(&alpha, &balls).unwrap(), a);
    }

    #[test]
    fn vanishing_center_sum_is_degenerate() {
        let balls =
            vec![ball(&[1.0, 0.0], 0.3, Label::Positive), ball(&[1.0, 0.0], 0.3, Label::Negative)];
        assert!(matches!(
            recover_w(&[1.0, 1.0], &balls),
            Err(GbsvmError::DegenerateSolution { .. })
        ));
    }

    #[test]
    fn offset_vanishes_on_the_symmetric_pair() {
        let balls =
            vec![ball(&[1.0, 0.0], 0.2, Label::Positive), ball(&[-1.0, 0.0], 0.2, Label::Negative)];
        let alpha = [0.78125, 0.78125];
        let w = recover_w(&alpha, &balls).unwrap();
        assert_abs_diff_eq!(w[0], 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.0);
        let b = recover_b(&alpha, &w, &balls, 10.0).unwrap();
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn offset_from_single_support_ball() {
        // y=+1, r=0, w·c = 0.5, ‖w‖ = 1 → b = 1 − 0.5 = 0.5.
        let balls =
            vec![ball(&[0.5, 0.0], 0.0, Label::Positive), ball(&[9.0, 9.0], 0.0, Label::Negative)];
        let b = recover_b(&[1.0, 0.0], &[1.0, 0.0], &balls, 10.0).unwrap();
        assert_abs_diff_eq!(b, 0.5);
    }

    #[test]
    fn no_support_balls_is_an_error() {
        let balls =
            vec![ball(&[1.0, 0.0], 0.0, Label::Positive), ball(&[-1.0, 0.0], 0.0, Label::Negative)];
        assert!(matches!(
            recover_b(&[0.0, 0.0], &[1.0, 0.0], &balls, 10.0),
            Err(GbsvmError::NoSupportBalls)
        ));
    }

    #[test]
    fn saturated_multipliers_fall_back_to_plain_support() {
        // Both α at the C bound: no interior support, fallback averages both.
        let balls =
            vec![ball(&[1.0, 0.0], 0.0, Label::Positive), ball(&[-1.0, 0.0], 0.0, Label::Negative)];
        let w = recover_w(&[2.0, 2.0], &balls).unwrap();
        let b = recover_b(&[2.0, 2.0], &w, &balls, 2.0).unwrap();
        assert_abs_diff_eq!(b, 0.0);
    }

    #[test]
    fn margin_is_sqrt2_over_norm() {
        let model = GbsvmModel { w: vec![2.0_f64.sqrt(), 0.0], b: 0.0, balls: vec![], alpha: vec![] };
        assert_abs_diff_eq!(model.margin().unwrap(), 1.0, epsilon = 1e-15);

        let model = GbsvmModel { w: vec![1.25, 0.0], b: 0.0, balls: vec![], alpha: vec![] };
        assert_abs_diff_eq!(model.margin().unwrap(), 1.1313708498984762, epsilon = 1e-12);

        let degenerate = GbsvmModel { w: vec![0.0, 0.0], b: 0.0, balls: vec![], alpha: vec![] };
        assert!(degenerate.margin().is_err());
    }

    #[test]
    fn prediction_signs_and_tie() {
        let model = GbsvmModel { w: vec![1.0, 0.0], b: 0.0, balls: vec![], alpha: vec![] };
        assert_eq!(model.predict(&[2.0, 5.0]).unwrap(), Label::Positive);
        assert_eq!(model.predict(&[-0.1, 9.0]).unwrap(), Label::Negative);
        assert_eq!(model.predict(&[0.0, -3.0]).unwrap(), Label::Positive);
        assert!(matches!(
            model.predict(&[1.0]),
            Err(GbsvmError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn slack_measures_constraint_violation() {
        let balls = vec![
            ball(&[1.0, 0.0], 0.0, Label::Positive),  // activation 1 → ξ = 0
            ball(&[0.4, 0.0], 0.0, Label::Positive),  // activation 0.4 → ξ = 0.6
            ball(&[3.0, 0.0], 0.0, Label::Positive),  // strictly outside → ξ = 0
        ];
        let model = GbsvmModel { w: vec![1.0, 0.0], b: 0.0, balls, alpha: vec![0.0; 3] };
        let slacks = model.primal_slacks();
        assert_abs_diff_eq!(slacks[0], 0.0);
        assert_abs_diff_eq!(slacks[1], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(slacks[2], 0.0);
    }

    #[test]
    fn model_record_round_trips_through_json() {
        let record = ModelRecord {
            w: vec![1.5, -0.25],
            b: 0.125,
            c: 10.0,
            purity_threshold: 0.9,
            radius_mode: RadiusMode::Average,
            balls: vec![ball(&[1.0, 2.0], 0.5, Label::Positive)],
            alpha: vec![0.75],
        };
        let json = serde_json::to_string(&record).unwrap();
        assert!(json.contains("\"C\":10.0"));
        let back: ModelRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);

        let unbounded = ModelRecord { c: f64::INFINITY, ..record };
        let json = serde_json::to_string(&unbounded).unwrap();
        assert!(json.contains("\"C\":null"));
        let back: ModelRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.c, f64::INFINITY);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn arb_balls(max_m: usize)(
                m in 2..max_m,
                d in 1..4usize,
            )(
                centers in proptest::collection::vec(
                    proptest::collection::vec(-10.0..10.0f64, d), m),
                radii in proptest::collection::vec(0.0..5.0f64, m),
                flags in proptest::collection::vec(prop::bool::ANY, m),
            ) -> Vec<GranularBall> {
                centers.into_iter().zip(radii).zip(flags).map(|((c, r), f)| GranularBall {
                    center: c,
                    radius: r,
                    label: if f { Label::Positive } else { Label::Negative },
                    purity: 1.0,
                    members: vec![0],
                    terminal: false,
                }).collect()
            }
        }

        proptest! {
            #[test]
            fn zero_radius_objective_matches_point_svm(
                balls in arb_balls(9),
                raw_alpha in proptest::collection::vec(0.0..10.0f64, 2..9),
            ) {
                let mut balls = balls;
                for ball in &mut balls { ball.radius = 0.0; }
                let m = balls.len().min(raw_alpha.len());
                let balls = &balls[..m];
                let alpha = &raw_alpha[..m];

                let d = balls[0].center.len();
                let mut acc = vec![0.0; d];
                for (a, ball) in alpha.iter().zip(balls) {
                    for (j, x) in ball.center.iter().enumerate() {
                        acc[j] += a * ball.label.sign() * x;
                    }
                }
                let norm_sq: f64 = acc.iter().map(|v| v * v).sum();
                let expected = -0.5 * norm_sq + alpha.iter().sum::<f64>();
                prop_assert_eq!(dual_objective(alpha, balls).unwrap(), expected);
            }

            #[test]
            fn recovered_norm_matches_identity(
                balls in arb_balls(9),
                raw_alpha in proptest::collection::vec(0.0..10.0f64, 2..9),
            ) {
                let m = balls.len().min(raw_alpha.len());
                let balls = &balls[..m];
                let alpha = &raw_alpha[..m];
                let (a, b) = aggregates(alpha, balls);
                let norm_a = norm(&a);
                prop_assume!(norm_a > EPS_DEGENERATE);
                let w = recover_w(alpha, balls).unwrap();
                prop_assert!((norm(&w) - (norm_a - b).abs()).abs() <= 1e-9);
            }

            #[test]
            fn prediction_is_scale_invariant(
                w in proptest::collection::vec(-5.0..5.0f64, 2),
                b in -5.0..5.0f64,
                x in proptest::collection::vec(-5.0..5.0f64, 2),
                t in 1e-3..1e3f64,
            ) {
                let model = GbsvmModel { w: w.clone(), b, balls: vec![], alpha: vec![] };
                let scaled = GbsvmModel {
                    w: w.iter().map(|v| v * t).collect(),
                    b: b * t,
                    balls: vec![],
                    alpha: vec![],
                };
                prop_assert_eq!(model.predict(&x).unwrap(), scaled.predict(&x).unwrap());
            }

            #[test]
            fn objective_is_concave_along_balanced_zero_radius_directions(
                balls in arb_balls(9),
                raw_alpha in proptest::collection::vec(1.0..5.0f64, 2..9),
                raw_dir in proptest::collection::vec(-1.0..1.0f64, 2..9),
            ) {
                let m = balls.len().min(raw_alpha.len()).min(raw_dir.len());
                prop_assume!(m >= 2);
                let mut balls = balls[..m].to_vec();
                for ball in &mut balls { ball.radius = 0.0; }
                let alpha = &raw_alpha[..m];

                // Balance the direction: zero out its label-weighted sum.
                let mut dir = raw_dir[..m].to_vec();
                let labels: Vec<Label> = balls.iter().map(|b| b.label).collect();
                let imbalance = constraint_residual(&dir, &labels).unwrap();
                dir[0] -= imbalance * labels[0].sign();

                let h = 0.25;
                let at = |s: f64| {
                    let shifted: Vec<f64> =
                        alpha.iter().zip(&dir).map(|(a, u)| a + s * u).collect();
                    dual_objective(&shifted, &balls).unwrap()
                };
                let second_difference = at(h) + at(-h) - 2.0 * at(0.0);
                prop_assert!(second_difference <= 1e-9);
            }
        }
    }
}
