//! Smooth and segment one hand-made stroke, printing its critical points,
//! tokens and token features.
//!
//! cargo run --example segment_stroke

use inkstroke::features::token_features;
use inkstroke::ink::Stroke;
use inkstroke::preprocess::{smooth_stroke, PreprocessConfig};
use inkstroke::segmentation::{segment_stroke, DEFAULT_WINDOW_FRACTION};

fn main() {
    // Two arches, like the teeth of a seen.
    let coords: Vec<(f64, f64)> = (0..=60)
        .map(|i| {
            let x = f64::from(i) / 60.0;
            (x, (x * std::f64::consts::TAU * 2.0).sin().abs() * 0.3)
        })
        .collect();
    let raw = Stroke::from_xy(&coords).expect("distinct points");
    let stroke = smooth_stroke(&raw, &PreprocessConfig::default());
    let seg = segment_stroke(&stroke, 0, DEFAULT_WINDOW_FRACTION);

    println!(
        "{} points, {:?} (raw length {:.3}), window m = {}",
        stroke.len(),
        seg.direction.value,
        seg.direction.raw_length,
        seg.scan.window
    );
    for cp in &seg.scan.points {
        let p = stroke.points()[cp.point_index];
        println!("  {:?} at {} ({:.3}, {:.3})", cp.kind, cp.point_index, p.x, p.y);
    }
    for (i, t) in seg.tokens.iter().enumerate() {
        let f = token_features(t, &stroke, &seg.direction).expect("stroke has extent");
        println!(
            "  token {i}: {}..={}  {:>6.2}% {:<12} {:>6.2} deg  mid ({:.3}, {:.3})  {}",
            t.start_index,
            t.end_index,
            f.length_ratio_pct,
            f.length_category.as_str(),
            f.direction_deg,
            f.midpoint.0,
            f.midpoint.1,
            f.orientation.as_str()
        );
    }
}
