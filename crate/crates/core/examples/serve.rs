//! Train a small model in memory and serve the HTTP API.
//!
//! cargo run --release --example serve -- [port]
//!
//! curl -s localhost:8787/api/health
//! curl -s -d '{"strokes":[[[0.5,1],[0.5,0.5],[0.49,0]]]}' localhost:8787/api/recognize

use inkstroke::pipeline::PipelineConfig;
use inkstroke::recognizer::Recognizer;
use inkstroke::service::{Service, ServiceState, DEFAULT_PORT};
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let port: u16 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(DEFAULT_PORT);
    let mut config = PipelineConfig::default();
    config.train.seed = 42;
    let recognizer = Recognizer::train_samples(&generate(&default_templates(), 30, 0.02, 42), &config)
        .expect("training");
    let service = Service::bind(ServiceState::with_recognizer(recognizer), &format!("127.0.0.1:{port}"))
        .expect("bind");
    println!("listening on http://{}", service.local_addr());
    service.run(4);
}
