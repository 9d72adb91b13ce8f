//! Trajectory smoothing.
//!
//! Each interior point is replaced by `0.6 * prev' + 0.2 * cur + 0.2 * next`,
//! where `prev'` is the previous point *after* smoothing, so one sweep is a
//! causal recursive filter running left to right. Endpoints are kept as-is.

use serde::{Deserialize, Serialize};

use crate::ink::{InkPoint, InkSample, Stroke};

const PREV_WEIGHT: f64 = 3.0 / 5.0;
const CUR_WEIGHT: f64 = 1.0 / 5.0;
const NEXT_WEIGHT: f64 = 1.0 / 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Number of smoothing sweeps; at least 1.
    pub passes: u32,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { passes: 1 }
    }
}

/// Concatenated x and y coordinate sequences of a sample, in stroke order.
pub fn extract_axes(sample: &InkSample) -> (Vec<f64>, Vec<f64>) {
    sample
        .strokes()
        .iter()
        .flat_map(|s| s.points().iter().map(|p| (p.x, p.y)))
        .unzip()
}

fn blend(prev: f64, cur: f64, next: f64) -> f64 {
    let v = PREV_WEIGHT * prev + CUR_WEIGHT * cur + NEXT_WEIGHT * next;
    // Convex combination: clamp away rounding so the result stays in range.
    let lo = prev.min(cur).min(next);
    let hi = prev.max(cur).max(next);
    v.clamp(lo, hi)
}

fn sweep(points: &mut [InkPoint]) {
    let n = points.len();
    for i in 1..n.saturating_sub(1) {
        let (prev, cur, next) = (points[i - 1], points[i], points[i + 1]);
        points[i].x = blend(prev.x, cur.x, next.x);
        points[i].y = blend(prev.y, cur.y, next.y);
    }
}

pub fn smooth_stroke(stroke: &Stroke, config: &PreprocessConfig) -> Stroke {
    let mut points = stroke.points().to_vec();
    for _ in 0..config.passes.max(1) {
        sweep(&mut points);
    }
    // Smoothing can land two neighbors on the same position; drop the repeat
    // so the result is a valid stroke that survives a file round trip.
    match Stroke::new(points.clone()) {
        Ok((s, _)) => s,
        Err(_) => Stroke::from_filtered(points),
    }
}

pub fn smooth_sample(sample: &InkSample, config: &PreprocessConfig) -> InkSample {
    sample.with_strokes(
        sample
            .strokes()
            .iter()
            .map(|s| smooth_stroke(s, config))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xs(stroke: &Stroke) -> Vec<f64> {
        stroke.points().iter().map(|p| p.x).collect()
    }

    #[test]
    fn extract_axes_concatenates_in_stroke_order() {
        let s = InkSample::new(
            "a",
            vec![
                Stroke::from_xy(&[(1.0, 1.0), (2.0, 2.0)]).unwrap(),
                Stroke::from_xy(&[(9.0, 9.0), (8.0, 8.0)]).unwrap(),
            ],
        )
        .unwrap();
        let (x, y) = extract_axes(&s);
        assert_eq!(x, vec![1.0, 2.0, 9.0, 8.0]);
        assert_eq!(y, vec![1.0, 2.0, 9.0, 8.0]);

        let one = InkSample::new("a", vec![Stroke::from_xy(&[(1.0, 2.0), (3.0, 4.0)]).unwrap()])
            .unwrap();
        assert_eq!(extract_axes(&one), (vec![1.0, 3.0], vec![2.0, 4.0]));
    }

    #[test]
    fn hand_evaluated_sequences() {
        let s = Stroke::from_xy(&[(0.0, 0.0), (10.0, 1.0), (20.0, 2.0)]).unwrap();
        let out = xs(&smooth_stroke(&s, &PreprocessConfig::default()));
        for (a, b) in out.iter().zip([0.0, 6.0, 20.0]) {
            assert!((a - b).abs() < 1e-12, "{out:?}");
        }

        let s = Stroke::from_xy(&[(0.0, 0.0), (10.0, 1.0), (20.0, 2.0), (30.0, 3.0)]).unwrap();
        let out = xs(&smooth_stroke(&s, &PreprocessConfig::default()));
        for (a, b) in out.iter().zip([0.0, 6.0, 13.6, 30.0]) {
            assert!((a - b).abs() < 1e-12, "{out:?}");
        }
    }

    #[test]
    fn constant_axis_is_fixed() {
        let eps = 1e-3;
        let s = Stroke::from_xy(&[(5.0, 5.0), (5.0, 5.0 + eps), (5.0, 5.0)]).unwrap();
        let out = smooth_stroke(&s, &PreprocessConfig { passes: 3 });
        assert!(out.points().iter().all(|p| p.x == 5.0));
    }

    #[test]
    fn timestamps_survive() {
        let (s, _) = Stroke::new(vec![
            InkPoint::timed(0.0, 0.0, 0.0),
            InkPoint::timed(1.0, 3.0, 8.0),
            InkPoint::timed(2.0, 0.0, 16.0),
        ])
        .unwrap();
        let out = smooth_stroke(&s, &PreprocessConfig::default());
        let ts: Vec<_> = out.points().iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![Some(0.0), Some(8.0), Some(16.0)]);
    }

    fn stroke_strategy() -> impl Strategy<Value = Stroke> {
        prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..40)
            .prop_filter_map("needs two distinct points", |pts| Stroke::from_xy(&pts).ok())
    }

    proptest! {
        #[test]
        fn preserves_count_pins_endpoints_stays_in_box(s in stroke_strategy(), passes in 1u32..4) {
            let out = smooth_stroke(&s, &PreprocessConfig { passes });
            prop_assert_eq!(out.len(), s.len());
            prop_assert_eq!(out.points()[0], s.points()[0]);
            prop_assert_eq!(out.points()[s.len() - 1], s.points()[s.len() - 1]);
            let bb = s.bounding_box();
            for p in out.points() {
                prop_assert!(p.x >= bb.x_min && p.x <= bb.x_max);
                prop_assert!(p.y >= bb.y_min && p.y <= bb.y_max);
            }
        }

        #[test]
        fn constant_coordinates_are_fixed(c in -1e6f64..1e6, ys in prop::collection::vec(-10.0f64..10.0, 2..20), passes in 1u32..5) {
            let pts: Vec<_> = ys.iter().enumerate().map(|(i, y)| (c, *y + i as f64 * 100.0)).collect();
            let s = Stroke::from_xy(&pts).unwrap();
            let out = smooth_stroke(&s, &PreprocessConfig { passes });
            prop_assert!(out.points().iter().all(|p| p.x == c));
        }
    }
}
