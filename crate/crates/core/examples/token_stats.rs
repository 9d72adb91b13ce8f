//! Per-class minimum, most frequent and maximum token counts, for several
//! generator seeds.
//!
//! cargo run --release --example token_stats

use inkstroke::eval::token_stats;
use inkstroke::pipeline::PipelineConfig;
use inkstroke::recognizer::analyze_all;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let config = PipelineConfig::default();
    for seed in 42..45 {
        let data = generate(&default_templates(), 50, 0.02, seed);
        let stats = token_stats(&analyze_all(&data, &config).expect("analyze"));
        println!("seed {seed}: at min {:.3}, at mode {:.3}, at max {:.3}", stats.at_min, stats.at_mode, stats.at_max);
        for c in &stats.per_class {
            println!("  {}  min {:>2}  mode {:>2}  max {:>2}", c.label, c.min_tokens, c.mode_tokens, c.max_tokens);
        }
    }
}
