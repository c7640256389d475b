//! Weight patching: convex interpolation between two weight vectors,
//! `patched = (1 - mix) * zero_shot + mix * fine_tuned`.
//!
//! Trains two probes on conflicting objectives over the same features (class
//! labels vs. deliberately remapped labels) and sweeps the mixing
//! coefficient, showing the accuracy trade-off along the path.
//!
//! ```bash
//! cargo run -p scalelaw --example weight_patching
//! ```

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use scalelaw::embedding::EmbeddingMatrix;
use scalelaw::evalproto::{interpolate_weights, train_linear_probe, ProbeConfig};

const CLASSES: usize = 3;
const PER_CLASS: usize = 80;
const DIM: usize = 8;

fn accuracy(weights: &Array2<f64>, features: &EmbeddingMatrix, labels: &[usize]) -> f64 {
    let logits = features.data().dot(weights);
    let mut hits = 0;
    for (row, &y) in logits.rows().into_iter().zip(labels) {
        let mut best = 0;
        for (j, &z) in row.iter().enumerate() {
            if z > row[best] {
                best = j;
            }
        }
        if best == y {
            hits += 1;
        }
    }
    100.0 * hits as f64 / labels.len() as f64
}

fn main() -> scalelaw::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = CLASSES * PER_CLASS;
    let mut features = Array2::zeros((n, DIM));
    let mut task_a = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % CLASSES;
        task_a.push(class);
        for (j, v) in features.row_mut(i).iter_mut().enumerate() {
            *v = if j == class { 1.1 } else { 0.0 } + rng.gen_range(-0.5..0.5);
        }
    }
    // Task B relabels the same points cyclically, so the objectives conflict.
    let task_b: Vec<usize> = task_a.iter().map(|&y| (y + 1) % CLASSES).collect();
    let features = EmbeddingMatrix::new(features)?;

    let eval: Vec<usize> = (0..n).filter(|i| i % 4 == 0).collect();
    let config = ProbeConfig::default();
    let probe_a = train_linear_probe(&features, &task_a, &config, &eval)?;
    let probe_b = train_linear_probe(&features, &task_b, &config, &eval)?;

    let flat_a: Vec<f64> = probe_a.weights.iter().copied().collect();
    let flat_b: Vec<f64> = probe_b.weights.iter().copied().collect();
    let shape = (probe_a.weights.nrows(), probe_a.weights.ncols());

    println!("{:>5} {:>10} {:>10}", "mix", "task A %", "task B %");
    for step in 0..=10 {
        let mix = step as f64 / 10.0;
        let patched = interpolate_weights(&flat_a, &flat_b, mix)?;
        let weights = Array2::from_shape_vec(shape, patched).expect("shape preserved");
        println!(
            "{mix:>5.1} {:>10.2} {:>10.2}",
            accuracy(&weights, &features, &task_a),
            accuracy(&weights, &features, &task_b)
        );
    }
    println!("\nmix 0 keeps task A's weights exactly; mix 1 is task B's.");
    Ok(())
}
