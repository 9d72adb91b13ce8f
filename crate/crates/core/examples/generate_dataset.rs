//! Generate a seeded synthetic dataset and write it in the ink format.
//!
//! cargo run --example generate_dataset -- [per_class] [noise] [seed] [out.json]

use std::collections::BTreeMap;

use inkstroke::features::group_of;
use inkstroke::ink::write_ink_file;
use inkstroke::synthgen::{default_templates, generate};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let per_class = args.first().and_then(|a| a.parse().ok()).unwrap_or(20);
    let noise = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.02);
    let seed = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(42);
    let out = args.get(3).cloned().unwrap_or_else(|| "synthetic.json".into());

    let samples = generate(&default_templates(), per_class, noise, seed);
    let mut per_cluster: BTreeMap<u8, usize> = BTreeMap::new();
    for s in &samples {
        *per_cluster.entry(group_of(s).cluster_id).or_default() += 1;
    }
    std::fs::write(&out, write_ink_file(&samples)).expect("write dataset");
    println!("{} samples ({per_class} per class, noise {noise}, seed {seed}) -> {out}", samples.len());
    for (cluster, n) in per_cluster {
        println!("  cluster {cluster}: {n} samples");
    }
}
