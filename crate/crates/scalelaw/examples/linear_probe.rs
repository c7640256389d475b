//! Linear probing on cached features: softmax regression trained over the
//! standard learning-rate/epoch sweep, best member picked on the eval split.
//!
//! ```bash
//! cargo run -p scalelaw --example linear_probe
//! ```

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use scalelaw::embedding::EmbeddingMatrix;
use scalelaw::evalproto::{stratified_few_shot, train_linear_probe, ProbeConfig};

const CLASSES: usize = 4;
const PER_CLASS: usize = 120;
const DIM: usize = 12;

fn main() -> scalelaw::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // Gaussian-ish class clusters around random centers.
    let mut centers = vec![[0.0f64; DIM]; CLASSES];
    for c in centers.iter_mut() {
        for v in c.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let n = CLASSES * PER_CLASS;
    let mut features = Array2::zeros((n, DIM));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % CLASSES;
        labels.push(class);
        for (j, v) in features.row_mut(i).iter_mut().enumerate() {
            *v = centers[class][j] + rng.gen_range(-0.45..0.45);
        }
    }
    let features = EmbeddingMatrix::new(features)?;

    // Hold out every fifth row for evaluation.
    let eval_indices: Vec<usize> = (0..n).filter(|i| i % 5 == 0).collect();

    let config = ProbeConfig::default();
    let result = train_linear_probe(&features, &labels, &config, &eval_indices)?;
    println!(
        "full probe: best lr {} x {} epochs -> train {:.2}%, eval {:.2}%",
        result.learning_rate, result.epochs, result.train_accuracy, result.eval_accuracy
    );

    // Few-shot variants: train on k stratified examples per class. The eval
    // split is everything outside the selected shots.
    for shots in [10, 25] {
        let train_rows = stratified_few_shot(&labels, shots, config.seed);
        let eval_rows: Vec<usize> = (0..n).filter(|i| !train_rows.contains(i)).collect();
        let result = train_linear_probe(&features, &labels, &config, &eval_rows)?;
        println!(
            "{shots:>2}-shot probe: best lr {} x {} epochs -> eval {:.2}%",
            result.learning_rate, result.epochs, result.eval_accuracy
        );
    }
    Ok(())
}
