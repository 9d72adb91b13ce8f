//! Monte Carlo evaluation: repeated stratified 70/30 splits with derived seeds.
//!
//! cargo run --release --example monte_carlo -- [iterations]

use inkstroke::eval::monte_carlo;
use inkstroke::pipeline::PipelineConfig;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let iterations = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mut config = PipelineConfig::default();
    config.train.seed = 42;
    let data = generate(&default_templates(), 50, 0.02, 42);
    let summary = monte_carlo(&data, iterations, 42, &config).expect("monte carlo");
    print!("{}", summary.to_text());
}
