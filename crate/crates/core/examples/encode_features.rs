//! Run the in-process pipeline on one synthetic sample and print its
//! fixed-width encoding, one 15-bit slot per token.
//!
//! cargo run --example encode_features

use inkstroke::features::BITS_PER_TOKEN;
use inkstroke::pipeline::{analyze, PipelineConfig};
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let config = PipelineConfig::default();
    for sample in generate(&default_templates(), 1, 0.02, 1).iter().step_by(3) {
        let a = analyze(sample, &config).expect("synthetic strokes have extent");
        println!(
            "{} cluster {} ({} strokes), {} tokens, {} truncated",
            sample.label,
            a.group.cluster_id,
            a.group.stroke_count,
            a.token_count(),
            a.encoded.truncated
        );
        for slot in a.encoded.bits.chunks(BITS_PER_TOKEN).filter(|s| s[14] == 1) {
            let bits: String = slot.iter().map(|b| char::from(b'0' + b)).collect();
            println!("  {} {} {}", &bits[..4], &bits[4..12], &bits[12..]);
        }
    }
}
