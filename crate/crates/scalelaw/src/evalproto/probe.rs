//! Softmax-regression linear probes on frozen features.
//!
//! Features are cached embeddings (no augmentation); the probe is a single
//! weight matrix W trained to minimize cross-entropy between softmax(W^T x)
//! and the label, using mini-batch adaptive-moment stochastic optimization.
//! A sweep over learning rate and epoch count is run and the member with the
//! best held-out accuracy wins. Everything is deterministic given the seed.

use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::util::log_sum_exp;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

/// Hyper-parameter sweep for probe training.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub learning_rates: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.1, 0.01, 0.001],
            epochs: vec![10, 20, 40],
            batch_size: 256,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty() || self.epochs.is_empty() {
            return Err(Error::InvalidInput("empty hyper-parameter sweep".into()));
        }
        if self.learning_rates.iter().any(|&lr| lr <= 0.0 || lr.is_nan()) {
            return Err(Error::InvalidInput("learning rates must be positive".into()));
        }
        if self.epochs.iter().any(|&e| e == 0) {
            return Err(Error::InvalidInput("epoch counts must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Trained probe weights and the sweep member that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// dim x n_classes weight matrix.
    pub weights: Array2<f64>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub train_accuracy: f64,
    pub eval_accuracy: f64,
}

/// Mean softmax cross-entropy of `weights` on a feature batch.
pub fn softmax_cross_entropy(
    weights: &Array2<f64>,
    features: &ArrayView2<f64>,
    labels: &[usize],
) -> Result<f64> {
    check_shapes(weights, features, labels)?;
    let logits = features.dot(weights);
    let mut total = 0.0;
    for (row, &y) in logits.rows().into_iter().zip(labels) {
        let z: Vec<f64> = row.to_vec();
        total += log_sum_exp(&z) - z[y];
    }
    Ok(total / labels.len() as f64)
}

/// Analytic gradient of [`softmax_cross_entropy`] with respect to the
/// weights: `X^T (P - Y) / B`.
pub fn softmax_cross_entropy_grad(
    weights: &Array2<f64>,
    features: &ArrayView2<f64>,
    labels: &[usize],
) -> Result<Array2<f64>> {
    check_shapes(weights, features, labels)?;
    let logits = features.dot(weights);
    let mut delta = Array2::zeros(logits.raw_dim());
    for (i, (row, &y)) in logits.rows().into_iter().zip(labels).enumerate() {
        let z: Vec<f64> = row.to_vec();
        let lse = log_sum_exp(&z);
        for (j, &zj) in z.iter().enumerate() {
            delta[[i, j]] = (zj - lse).exp() - if j == y { 1.0 } else { 0.0 };
        }
    }
    Ok(features.t().dot(&delta) / labels.len() as f64)
}

fn check_shapes(
    weights: &Array2<f64>,
    features: &ArrayView2<f64>,
    labels: &[usize],
) -> Result<()> {
    if features.ncols() != weights.nrows() {
        return Err(Error::Shape(format!(
            "feature dim {} != weight rows {}",
            features.ncols(),
            weights.nrows()
        )));
    }
    if features.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= weights.ncols()) {
        return Err(Error::Range(format!("label {y} out of range")));
    }
    Ok(())
}

/// Trains a linear probe over the full (learning rate x epochs) sweep and
/// returns the member with the best accuracy on the eval split.
///
/// `eval_indices` selects the held-out rows; all remaining rows train the
/// probe. Class count is `max(labels) + 1`. Ties in eval accuracy keep the
/// earlier sweep member (learning-rate major, epoch minor order).
pub fn train_linear_probe(
    features: &EmbeddingMatrix,
    labels: &[usize],
    config: &ProbeConfig,
    eval_indices: &[usize],
) -> Result<ProbeResult> {
    config.validate()?;
    if labels.len() != features.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} feature rows",
            labels.len(),
            features.rows()
        )));
    }
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    {
        let mut seen = vec![false; n_classes];
        for &y in labels {
            seen[y] = true;
        }
        if seen.iter().filter(|s| **s).count() < 2 {
            return Err(Error::Domain(
                "probe needs at least 2 distinct labels".into(),
            ));
        }
    }
    let mut is_eval = vec![false; features.rows()];
    for &i in eval_indices {
        if i >= features.rows() {
            return Err(Error::Range(format!("eval index {i} out of range")));
        }
        is_eval[i] = true;
    }
    let train_idx: Vec<usize> = (0..features.rows()).filter(|i| !is_eval[*i]).collect();
    let eval_idx: Vec<usize> = (0..features.rows()).filter(|i| is_eval[*i]).collect();
    if train_idx.is_empty() || eval_idx.is_empty() {
        return Err(Error::InvalidInput(
            "both train and eval splits must be non-empty".into(),
        ));
    }

    let mut best: Option<ProbeResult> = None;
    for (li, &lr) in config.learning_rates.iter().enumerate() {
        for (ei, &n_epochs) in config.epochs.iter().enumerate() {
            let member = li * config.epochs.len() + ei;
            let weights = train_one(
                features,
                labels,
                &train_idx,
                n_classes,
                lr,
                n_epochs,
                config.batch_size,
                config.seed,
                member as u64,
            )?;
            let train_accuracy = accuracy(&weights, features, labels, &train_idx);
            let eval_accuracy = accuracy(&weights, features, labels, &eval_idx);
            let better = match &best {
                None => true,
                Some(b) => eval_accuracy > b.eval_accuracy,
            };
            if better {
                best = Some(ProbeResult {
                    weights,
                    learning_rate: lr,
                    epochs: n_epochs,
                    train_accuracy,
                    eval_accuracy,
                });
            }
        }
    }
    Ok(best.expect("sweep is non-empty"))
}

#[allow(clippy::too_many_arguments)]
fn train_one(
    features: &EmbeddingMatrix,
    labels: &[usize],
    train_idx: &[usize],
    n_classes: usize,
    lr: f64,
    n_epochs: usize,
    batch_size: usize,
    seed: u64,
    member: u64,
) -> Result<Array2<f64>> {
    let dim = features.dim();
    let mut weights: Array2<f64> = Array2::zeros((dim, n_classes));
    let mut m: Array2<f64> = Array2::zeros((dim, n_classes));
    let mut v: Array2<f64> = Array2::zeros((dim, n_classes));
    let mut step = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member + 1);
    let mut order = train_idx.to_vec();
    for _ in 0..n_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            let batch = gather_rows(features, chunk);
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let loss = softmax_cross_entropy(&weights, &batch.view(), &batch_labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { lr, epochs: n_epochs });
            }
            let grad = softmax_cross_entropy_grad(&weights, &batch.view(), &batch_labels)?;
            step += 1;
            let t = step as i32;
            let bias1 = 1.0 - ADAM_BETA1.powi(t);
            let bias2 = 1.0 - ADAM_BETA2.powi(t);
            azip(&mut m, &grad, |m, g| *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g);
            azip(&mut v, &grad, |v, g| *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g);
            for ((w, &mi), &vi) in weights.iter_mut().zip(m.iter()).zip(v.iter()) {
                let m_hat = mi / bias1;
                let v_hat = vi / bias2;
                *w -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        }
    }
    Ok(weights)
}

fn azip(dst: &mut Array2<f64>, src: &Array2<f64>, f: impl Fn(&mut f64, f64)) {
    for (d, &s) in dst.iter_mut().zip(src.iter()) {
        f(d, s);
    }
}

fn gather_rows(features: &EmbeddingMatrix, indices: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((indices.len(), features.dim()));
    for (row, &i) in indices.iter().enumerate() {
        out.row_mut(row).assign(&features.row(i));
    }
    out
}

fn accuracy(
    weights: &Array2<f64>,
    features: &EmbeddingMatrix,
    labels: &[usize],
    indices: &[usize],
) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let rows = gather_rows(features, indices);
    let logits = rows.dot(weights);
    let mut hits = 0usize;
    for (row, &i) in logits.axis_iter(Axis(0)).zip(indices) {
        let mut best = 0usize;
        for (j, &z) in row.iter().enumerate() {
            if z > row[best] {
                best = j;
            }
        }
        if best == labels[i] {
            hits += 1;
        }
    }
    100.0 * hits as f64 / indices.len() as f64
}

/// Stratified few-shot selection: the first `shots` indices of each label
/// after a seeded per-label shuffle. Labels with fewer rows contribute all
/// of them. Output is grouped by label.
pub fn stratified_few_shot(labels: &[usize], shots: usize, seed: u64) -> Vec<usize> {
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut per_label: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        per_label[y].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = Vec::new();
    for bucket in per_label.iter_mut() {
        bucket.shuffle(&mut rng);
        selected.extend(bucket.iter().take(shots).copied());
    }
    selected
}
