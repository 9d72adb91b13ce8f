//! Seeded generator of Arabic-like synthetic ink.
//!
//! Each class is a set of polyline skeletons in the unit box. A sample is
//! produced by displacing every skeleton point with Gaussian jitter,
//! applying a random similarity transform (scale 0.8..1.2, rotation within
//! ±5° about the box center), and resampling each polyline to 40..=120
//! evenly spaced points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ink::{InkPoint, InkSample, Stroke};

pub const MAX_NOISE: f64 = 0.1;
pub const MIN_POINTS: usize = 40;
pub const MAX_POINTS: usize = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub class_label: String,
    /// Control points of each stroke's polyline, in `[0, 1]^2`.
    pub strokes: Vec<Vec<(f64, f64)>>,
    pub stroke_count: usize,
}

impl TemplateSpec {
    pub fn new(label: &str, strokes: Vec<Vec<(f64, f64)>>) -> Self {
        let stroke_count = strokes.len();
        let t = Self {
            class_label: label.to_string(),
            strokes,
            stroke_count,
        };
        debug_assert!(t.is_valid(), "template {label} out of range");
        t
    }

    pub fn is_valid(&self) -> bool {
        self.stroke_count == self.strokes.len()
            && self.strokes.iter().all(|s| {
                s.len() >= 2
                    && s.iter()
                        .all(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y))
            })
    }

    /// Diagonal of the bounding box of all control points.
    pub fn diagonal(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in self.strokes.iter().flatten() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        (x1 - x0).hypot(y1 - y0)
    }
}

fn dot(x: f64, y: f64) -> Vec<(f64, f64)> {
    vec![(x, y), (x + 0.05, y + 0.01)]
}

// Flat boat-shaped body shared by the beh family.
fn flat_body() -> Vec<(f64, f64)> {
    vec![(0.95, 0.45), (0.88, 0.2), (0.5, 0.15), (0.12, 0.2), (0.05, 0.45)]
}

fn seen_body() -> Vec<(f64, f64)> {
    vec![
        (1.0, 0.55),
        (0.92, 0.7),
        (0.85, 0.55),
        (0.77, 0.7),
        (0.7, 0.55),
        (0.62, 0.7),
        (0.55, 0.55),
        (0.45, 0.2),
        (0.25, 0.1),
        (0.05, 0.3),
    ]
}

fn hah_body() -> Vec<(f64, f64)> {
    vec![
        (0.15, 0.9),
        (0.5, 1.0),
        (0.75, 0.95),
        (0.35, 0.7),
        (0.2, 0.45),
        (0.3, 0.15),
        (0.6, 0.02),
        (0.9, 0.1),
    ]
}

/// The default twelve-class template set; every stroke-count cluster
/// (1, 2, 3, and 4 strokes) has at least two classes.
pub fn default_templates() -> Vec<TemplateSpec> {
    vec![
        TemplateSpec::new("ا", vec![vec![(0.5, 1.0), (0.48, 0.0)]]),
        TemplateSpec::new("د", vec![vec![(0.35, 0.95), (0.75, 0.45), (0.65, 0.3), (0.2, 0.3)]]),
        TemplateSpec::new("س", vec![seen_body()]),
        TemplateSpec::new("ح", vec![hah_body()]),
        TemplateSpec::new(
            "ن",
            vec![
                vec![(0.95, 0.75), (0.85, 0.3), (0.5, 0.05), (0.15, 0.3), (0.05, 0.75)],
                dot(0.45, 0.85),
            ],
        ),
        TemplateSpec::new("ب", vec![flat_body(), dot(0.45, 0.02)]),
        TemplateSpec::new(
            "ط",
            vec![
                vec![(0.05, 0.02), (0.95, 0.12), (0.85, 0.4), (0.55, 0.55), (0.35, 0.1)],
                vec![(0.4, 0.98), (0.36, 0.12)],
            ],
        ),
        TemplateSpec::new("ت", vec![flat_body(), dot(0.35, 0.7), dot(0.55, 0.7)]),
        TemplateSpec::new(
            "ق",
            vec![
                vec![(0.7, 0.6), (0.82, 0.78), (0.7, 0.98), (0.58, 0.78), (0.75, 0.45), (0.6, 0.12), (0.25, 0.02), (0.02, 0.45)],
                dot(0.6, 0.95),
                dot(0.75, 0.97),
            ],
        ),
        TemplateSpec::new("ث", vec![flat_body(), dot(0.35, 0.7), dot(0.55, 0.7), dot(0.45, 0.9)]),
        TemplateSpec::new("ش", vec![seen_body(), dot(0.7, 0.85), dot(0.85, 0.85), dot(0.77, 0.98)]),
        TemplateSpec::new("چ", vec![hah_body(), dot(0.4, 0.3), dot(0.55, 0.3), dot(0.47, 0.45)]),
    ]
}

/// `n` points evenly spaced by arc length along a polyline, endpoints included.
pub fn resample_polyline(control: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    assert!(control.len() >= 2 && n >= 2);
    let seg_len: Vec<f64> = control
        .windows(2)
        .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
        .collect();
    let total: f64 = seg_len.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut walked = 0.0;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 1 < seg_len.len() && walked + seg_len[seg] < target {
            walked += seg_len[seg];
            seg += 1;
        }
        let t = if seg_len[seg] > 0.0 {
            ((target - walked) / seg_len[seg]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (control[seg], control[seg + 1]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    out
}

/// Generates `samples_per_class` samples of every template, grouped by class
/// in template order.
///
/// # Panics
///
/// Panics if `noise` is outside `[0, 0.1]` or `samples_per_class` is zero.
pub fn generate(
    templates: &[TemplateSpec],
    samples_per_class: usize,
    noise: f64,
    seed: u64,
) -> Vec<InkSample> {
    assert!(
        (0.0..=MAX_NOISE).contains(&noise),
        "noise must lie in [0, {MAX_NOISE}], got {noise}"
    );
    assert!(samples_per_class >= 1, "samples_per_class must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(templates.len() * samples_per_class);
    for template in templates {
        let jitter = Normal::new(0.0, noise * template.diagonal()).expect("finite std");
        for _ in 0..samples_per_class {
            let scale = rng.gen_range(0.8..=1.2);
            let angle = rng.gen_range(-5.0f64..=5.0).to_radians();
            let (sin, cos) = angle.sin_cos();
            let strokes = template
                .strokes
                .iter()
                .map(|control| {
                    // Transform before resampling so straight runs stay exactly monotone.
                    let placed: Vec<(f64, f64)> = control
                        .iter()
                        .map(|&(x, y)| {
                            let dx = (x + jitter.sample(&mut rng) - 0.5) * scale;
                            let dy = (y + jitter.sample(&mut rng) - 0.5) * scale;
                            (0.5 + dx * cos - dy * sin, 0.5 + dx * sin + dy * cos)
                        })
                        .collect();
                    let n = rng.gen_range(MIN_POINTS..=MAX_POINTS);
                    let points: Vec<InkPoint> = resample_polyline(&placed, n)
                        .into_iter()
                        .map(|(x, y)| InkPoint::new(x, y))
                        .collect();
                    Stroke::new(points)
                        .expect("resampled template strokes have distinct points")
                        .0
                })
                .collect();
            out.push(InkSample::new(template.class_label.clone(), strokes).expect("templates have strokes"));
        }
    }
    out
}
