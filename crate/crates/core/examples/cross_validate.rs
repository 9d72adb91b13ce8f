//! Stratified k-fold cross validation on the synthetic set.
//!
//! cargo run --release --example cross_validate -- [k] [per_class]

use inkstroke::eval::kfold_analyzed;
use inkstroke::pipeline::PipelineConfig;
use inkstroke::recognizer::analyze_all;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k = args.first().and_then(|a| a.parse().ok()).unwrap_or(5);
    let per_class = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let mut config = PipelineConfig::default();
    config.train.seed = 42;

    let data = generate(&default_templates(), per_class, 0.02, 42);
    let analyses = analyze_all(&data, &config).expect("analyze");
    let report = kfold_analyzed(&analyses, k, 42, &config).expect("cross validation");
    print!("{}", report.to_text());
}
