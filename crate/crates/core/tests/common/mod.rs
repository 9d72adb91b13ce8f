#![allow(dead_code)]

use std::collections::BTreeSet;

use inkstroke::eval::ClassCounts;
use inkstroke::ink::{Stroke, Token};
use inkstroke::segmentation::{direction_length, scan_axis, window_size, ExtremumKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct O(N·m) reading of the critical-point definition.
pub fn brute_force_critical_points(stroke: &Stroke, window_fraction: f64) -> Vec<(usize, ExtremumKind)> {
    let dl = direction_length(stroke);
    let v = scan_axis(stroke, dl.value);
    let n = v.len();
    let m = window_size(n, window_fraction);
    if n < 2 * m + 1 {
        return Vec::new();
    }
    let qualifies = |k: usize, kind: ExtremumKind| -> bool {
        let window = k - m..=k + m;
        match kind {
            ExtremumKind::Maximum => {
                (k - m..k).all(|i| v[i] <= v[i + 1])
                    && (k..k + m).all(|i| v[i] >= v[i + 1])
                    && window.clone().any(|j| v[k] > v[j])
            }
            ExtremumKind::Minimum => {
                (k - m..k).all(|i| v[i] >= v[i + 1])
                    && (k..k + m).all(|i| v[i] <= v[i + 1])
                    && window.clone().any(|j| v[k] < v[j])
            }
        }
    };
    let mut out = Vec::new();
    for k in m..n - m {
        for kind in [ExtremumKind::Maximum, ExtremumKind::Minimum] {
            if !qualifies(k, kind) {
                continue;
            }
            // Suppressed if an earlier qualifying index of the same kind sits
            // on the same equal-valued run.
            let shadowed = (m..k)
                .rev()
                .take_while(|&j| v[j] == v[k])
                .any(|j| qualifies(j, kind));
            if !shadowed {
                out.push((k, kind));
            }
        }
    }
    out
}

/// True when tokens are contiguous, disjoint and cover `0..len` exactly.
pub fn covers_exactly(tokens: &[Token], len: usize) -> bool {
    let mut seen = BTreeSet::new();
    for t in tokens {
        if t.start_index > t.end_index || t.end_index >= len {
            return false;
        }
        for i in t.start_index..=t.end_index {
            if !seen.insert(i) {
                return false;
            }
        }
    }
    seen.len() == len
}

/// Random stroke whose scanned axis is a quantized random walk (so plateaus
/// and ties are frequent) and whose other axis advances strictly.
pub fn random_stroke(rng: &mut ChaCha8Rng) -> Stroke {
    let n = rng.gen_range(2..=200);
    let levels = rng.gen_range(2..=8) as f64;
    let mut level = rng.gen_range(0.0..levels).floor();
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        match rng.gen_range(0..4) {
            0 => level = (level + 1.0).min(levels),
            1 => level = (level - 1.0).max(0.0),
            _ => {}
        }
        coords.push((i as f64 * 10.0, level));
    }
    let s = Stroke::from_xy(&coords).expect("x strictly increases");
    if rng.gen_bool(0.5) {
        s.transposed()
    } else {
        s
    }
}

pub fn random_strokes(count: usize, seed: u64) -> Vec<Stroke> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_stroke(&mut rng)).collect()
}

/// One-vs-rest counts recomputed straight from the definition.
pub fn recount(classes: &[String], pairs: &[(String, Option<String>)]) -> Vec<ClassCounts> {
    classes
        .iter()
        .map(|c| {
            let mut k = ClassCounts::default();
            for (gold, pred) in pairs {
                let g = gold == c;
                let p = pred.as_deref() == Some(c.as_str());
                match (g, p) {
                    (true, true) => k.tp += 1,
                    (false, true) => k.fp += 1,
                    (true, false) => k.fn_ += 1,
                    (false, false) => k.tn += 1,
                }
            }
            k
        })
        .collect()
}

/// Random `(gold, predicted)` pairs over a small label alphabet.
pub fn random_pairs(rng: &mut ChaCha8Rng) -> Vec<(String, Option<String>)> {
    let classes = rng.gen_range(1..=6);
    let n = rng.gen_range(1..=60);
    (0..n)
        .map(|_| {
            let g = format!("c{}", rng.gen_range(0..classes));
            let p = if rng.gen_bool(0.05) {
                None
            } else if rng.gen_bool(0.6) {
                Some(g.clone())
            } else {
                Some(format!("c{}", rng.gen_range(0..classes)))
            };
            (g, p)
        })
        .collect()
}

/// Brute-force macro metrics: (accuracy, recall, precision) averaged over
/// classes where each is defined.
pub fn brute_metrics(counts: &[ClassCounts]) -> (f64, f64, f64) {
    let mut acc = Vec::new();
    let mut rec = Vec::new();
    let mut prec = Vec::new();
    for c in counts {
        let total = c.tp + c.fp + c.fn_ + c.tn;
        acc.push((c.tp + c.tn) as f64 / total as f64);
        if c.tp + c.fn_ > 0 {
            rec.push(c.tp as f64 / (c.tp + c.fn_) as f64);
        }
        if c.tp + c.fp > 0 {
            prec.push(c.tp as f64 / (c.tp + c.fp) as f64);
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    (mean(&acc), mean(&rec), mean(&prec))
}

/// Central-difference gradient of the loss for one example.
pub fn numeric_gradient(
    model: &inkstroke::mlp::MlpModel,
    x: &[f64],
    target: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let loss_of = |m: &inkstroke::mlp::MlpModel| inkstroke::mlp::loss(&m.forward(x).unwrap(), target);
    let mut hidden = Vec::with_capacity(model.weights_hidden.len());
    for i in 0..model.weights_hidden.len() {
        let mut plus = model.clone();
        plus.weights_hidden[i] += h;
        let mut minus = model.clone();
        minus.weights_hidden[i] -= h;
        hidden.push((loss_of(&plus) - loss_of(&minus)) / (2.0 * h));
    }
    let mut output = Vec::with_capacity(model.weights_output.len());
    for i in 0..model.weights_output.len() {
        let mut plus = model.clone();
        plus.weights_output[i] += h;
        let mut minus = model.clone();
        minus.weights_output[i] -= h;
        output.push((loss_of(&plus) - loss_of(&minus)) / (2.0 * h));
    }
    (hidden, output)
}

/// `||a - b|| / max(||a||, ||b||)` over the concatenated vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
