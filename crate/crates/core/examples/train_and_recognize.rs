//! Train per-cluster models on synthetic data, save them, load them back,
//! and recognize a fresh sample.
//!
//! cargo run --release --example train_and_recognize -- [model_dir]

use inkstroke::ink::{InkSample, UNLABELED};
use inkstroke::pipeline::PipelineConfig;
use inkstroke::recognizer::Recognizer;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "models".into());
    let mut config = PipelineConfig::default();
    config.train.seed = 42;

    let training = generate(&default_templates(), 30, 0.02, 42);
    let recognizer = Recognizer::train_samples(&training, &config).expect("training");
    recognizer.save_dir(dir.as_ref()).expect("save models");
    for entry in recognizer.manifest().clusters {
        println!("cluster {}: {:?} -> {}/{}", entry.cluster_id, entry.class_labels, dir, entry.file);
    }

    let loaded = Recognizer::load_dir(dir.as_ref()).expect("load models");
    let fresh = generate(&default_templates(), 1, 0.02, 7);
    let mut correct = 0;
    for s in &fresh {
        let live = InkSample::new(UNLABELED, s.strokes().to_vec()).unwrap();
        let r = loaded.recognize(&live).expect("recognize");
        correct += usize::from(r.label == s.label);
        println!(
            "  {} -> {} (confidence {:.3}, cluster {}, {} tokens)",
            s.label, r.label, r.confidence, r.cluster_id, r.token_count
        );
    }
    println!("{correct}/{} correct", fresh.len());
}
