//! Train the perceptron directly on XOR.
//!
//! cargo run --release --example mlp_xor

use inkstroke::mlp::{init_uniform, train, Example, TrainConfig};

fn main() {
    let data: Vec<Example> = [([0.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([1.0, 0.0], 1.0), ([1.0, 1.0], 0.0)]
        .iter()
        .map(|(x, y)| Example {
            input: x.to_vec(),
            target: vec![*y],
        })
        .collect();
    let config = TrainConfig {
        learning_rate: 0.5,
        momentum: 0.05,
        max_epochs: 20_000,
        target_error: 1e-3,
        seed: 1,
        ..TrainConfig::default()
    };
    let model = init_uniform([2, 4, 1], 1.0, 1.0, 2).expect("valid sizes");
    let out = train(model, &data, &config).expect("valid data");
    println!("{} epochs, final mean loss {:.5}", out.history.len(), out.history.last().unwrap());
    for ex in &data {
        println!("  {:?} -> {:.4}", ex.input, out.model.forward(&ex.input).unwrap()[0]);
    }
}
