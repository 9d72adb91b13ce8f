//! Chain the file-level stages (ink -> smoothed ink -> segment JSON -> CSV)
//! and check the result against the in-process pipeline.
//!
//! cargo run --example staged_files

use inkstroke::ink::write_ink_file;
use inkstroke::pipeline::{analyze, PipelineConfig};
use inkstroke::stages;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let config = PipelineConfig::default();
    let samples = generate(&default_templates()[..3], 2, 0.02, 5);
    let ink = write_ink_file(&samples);
    let smoothed = stages::preprocess(&ink, &config.preprocess()).expect("valid ink");
    let segments = stages::segment(&smoothed.bytes, config.window_fraction).expect("valid ink");
    let csv = stages::featurize(&segments.bytes).expect("valid segments");
    print!("{csv}");

    let analyses: Vec<_> = samples.iter().map(|s| analyze(s, &config).unwrap()).collect();
    assert_eq!(csv, stages::features_csv(&analyses));
    println!(
        "ink {} B -> smoothed {} B -> segments {} B -> csv {} B; identical to the in-process pipeline",
        ink.len(),
        smoothed.bytes.len(),
        segments.bytes.len(),
        csv.len()
    );
}
