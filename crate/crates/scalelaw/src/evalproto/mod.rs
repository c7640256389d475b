//! Evaluation mathematics over precomputed embedding matrices.
//!
//! Covers the three measurement protocols used on frozen contrastive models:
//! prompt-ensemble zero-shot classification (cosine similarity against
//! averaged-and-normalized per-class prompt embeddings), Recall@K retrieval,
//! and softmax-regression linear probes. Also hosts the weight-patching
//! interpolation used to trade accuracy between a zero-shot and a fine-tuned
//! model.
//!
//! No encoder inference happens here; embeddings arrive precomputed.

mod probe;
mod retrieval;

pub use probe::{
    stratified_few_shot, softmax_cross_entropy, softmax_cross_entropy_grad, train_linear_probe,
    ProbeConfig, ProbeResult,
};
pub use retrieval::recall_at_k;

use ndarray::{Array1, Array2};

use crate::embedding::{l2_norm, EmbeddingMatrix};
use crate::error::{Error, Result};

/// One unit-norm embedding per label, built by averaging prompt embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEmbeddings {
    embeddings: EmbeddingMatrix,
}

impl LabelEmbeddings {
    /// Wraps a matrix of per-label embeddings (>= 2 unit-norm rows).
    pub fn new(embeddings: EmbeddingMatrix) -> Result<Self> {
        if embeddings.rows() < 2 {
            return Err(Error::Shape(format!(
                "need at least 2 labels, got {}",
                embeddings.rows()
            )));
        }
        let embeddings = EmbeddingMatrix::new_normalized(embeddings.into_inner())?;
        Ok(Self { embeddings })
    }

    pub fn count(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.embeddings
    }
}

/// Averages each label's prompt embeddings, then L2-normalizes the mean.
///
/// `prompt_groups[c]` holds one row per prompt for label `c`; all groups must
/// share the embedding dimension and contain at least one prompt.
pub fn build_label_embeddings(prompt_groups: &[Array2<f64>]) -> Result<LabelEmbeddings> {
    if prompt_groups.len() < 2 {
        return Err(Error::Shape(format!(
            "need at least 2 labels, got {}",
            prompt_groups.len()
        )));
    }
    let dim = prompt_groups[0].ncols();
    let mut rows = Array2::zeros((prompt_groups.len(), dim));
    for (label, group) in prompt_groups.iter().enumerate() {
        if group.nrows() == 0 {
            return Err(Error::Shape(format!("label {label} has no prompts")));
        }
        if group.ncols() != dim {
            return Err(Error::Shape(format!(
                "label {label} has dim {}, expected {dim}",
                group.ncols()
            )));
        }
        let mean: Array1<f64> = group.mean_axis(ndarray::Axis(0)).expect("non-empty group");
        let norm = l2_norm(mean.view());
        if norm == 0.0 {
            return Err(Error::Domain(format!(
                "prompt embeddings for label {label} average to the zero vector"
            )));
        }
        rows.row_mut(label).assign(&(&mean / norm));
    }
    LabelEmbeddings::new(EmbeddingMatrix::new(rows)?)
}

/// Zero-shot predictions plus top-1 accuracy against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroShotResult {
    pub predictions: Vec<usize>,
    /// Percent of exact matches.
    pub accuracy: f64,
}

/// Classifies each image as the label with the largest cosine similarity.
///
/// Image rows must be unit-norm (enforce with
/// [`EmbeddingMatrix::new_normalized`]), so the dot product is the cosine.
/// Ties go to the lowest label index. `truth[i]` is the true label of row i.
pub fn zero_shot_classify(
    images: &EmbeddingMatrix,
    labels: &LabelEmbeddings,
    truth: &[usize],
) -> Result<ZeroShotResult> {
    if images.dim() != labels.dim() {
        return Err(Error::Shape(format!(
            "image dim {} != label dim {}",
            images.dim(),
            labels.dim()
        )));
    }
    if truth.len() != images.rows() {
        return Err(Error::Shape(format!(
            "{} truth labels for {} images",
            truth.len(),
            images.rows()
        )));
    }
    if let Some(bad) = truth.iter().find(|&&y| y >= labels.count()) {
        return Err(Error::Range(format!(
            "truth label {bad} out of range (labels: {})",
            labels.count()
        )));
    }
    let scores = images.data().dot(&labels.matrix().data().t());
    let mut predictions = Vec::with_capacity(images.rows());
    let mut hits = 0usize;
    for (i, row) in scores.rows().into_iter().enumerate() {
        let mut best = 0usize;
        for (j, &s) in row.iter().enumerate() {
            if s > row[best] {
                best = j;
            }
        }
        if best == truth[i] {
            hits += 1;
        }
        predictions.push(best);
    }
    let accuracy = 100.0 * hits as f64 / images.rows().max(1) as f64;
    Ok(ZeroShotResult {
        predictions,
        accuracy,
    })
}

/// Elementwise convex combination of two flat weight vectors:
/// `(1 - mix) * zero_shot + mix * fine_tuned`.
pub fn interpolate_weights(w_zero: &[f64], w_fine: &[f64], mix: f64) -> Result<Vec<f64>> {
    if w_zero.len() != w_fine.len() {
        return Err(Error::Shape(format!(
            "length mismatch: {} vs {}",
            w_zero.len(),
            w_fine.len()
        )));
    }
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::Domain(format!("mix {mix} outside [0, 1]")));
    }
    // Endpoints return the inputs bit-for-bit; the incremental form keeps
    // interpolation between identical vectors exact for every mix.
    if mix == 0.0 {
        return Ok(w_zero.to_vec());
    }
    if mix == 1.0 {
        return Ok(w_fine.to_vec());
    }
    Ok(w_zero
        .iter()
        .zip(w_fine)
        .map(|(z, f)| z + mix * (f - z))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_rows(rng: &mut impl Rng, rows: usize, dim: usize) -> Array2<f64> {
        let mut m = Array2::zeros((rows, dim));
        for mut row in m.rows_mut() {
            loop {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                let norm = l2_norm(row.view());
                if norm > 1e-3 {
                    row.mapv_inplace(|v| v / norm);
                    break;
                }
            }
        }
        m
    }

    #[test]
    fn single_unit_prompt_is_returned_unchanged() {
        let groups = vec![array![[1.0, 0.0]], array![[0.0, 1.0]]];
        let labels = build_label_embeddings(&groups).unwrap();
        assert_eq!(labels.matrix().data(), &array![[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn two_prompts_average_then_normalize() {
        let groups = vec![array![[1.0, 0.0], [0.0, 1.0]], array![[0.0, -1.0]]];
        let labels = build_label_embeddings(&groups).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        let got = labels.matrix().row(0);
        assert!((got[0] - inv_sqrt2).abs() < 1e-15);
        assert!((got[1] - inv_sqrt2).abs() < 1e-15);
    }

    #[test]
    fn opposite_prompts_are_degenerate() {
        let groups = vec![array![[1.0, 0.0], [-1.0, 0.0]], array![[0.0, 1.0]]];
        let err = build_label_embeddings(&groups).unwrap_err();
        assert!(err.to_string().contains("label 0"));
    }

    #[test]
    fn label_embeddings_match_recomputation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let groups: Vec<Array2<f64>> = (0..5)
            .map(|_| {
                let mut g = Array2::zeros((7, 6));
                g.mapv_inplace(|_: f64| rng.gen_range(-2.0..2.0));
                g
            })
            .collect();
        let labels = build_label_embeddings(&groups).unwrap();
        for (c, group) in groups.iter().enumerate() {
            // Independent mean-then-normalize recomputation.
            let mut mean = vec![0.0; 6];
            for row in group.rows() {
                for (m, v) in mean.iter_mut().zip(row.iter()) {
                    *m += v;
                }
            }
            for m in mean.iter_mut() {
                *m /= group.nrows() as f64;
            }
            let norm: f64 = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (got, want) in labels.matrix().row(c).iter().zip(&mean) {
                assert!((got - want / norm).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn images_equal_to_label_embeddings_score_100() {
        let labels = LabelEmbeddings::new(
            EmbeddingMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let images = EmbeddingMatrix::new_normalized(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let result = zero_shot_classify(&images, &labels, &[0, 1]).unwrap();
        assert_eq!(result.predictions, vec![0, 1]);
        assert_eq!(result.accuracy, 100.0);
    }

    #[test]
    fn equidistant_image_predicts_lowest_index() {
        let labels = LabelEmbeddings::new(
            EmbeddingMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let s = 1.0 / 2f64.sqrt();
        let images = EmbeddingMatrix::new_normalized(array![[s, s]]).unwrap();
        let result = zero_shot_classify(&images, &labels, &[1]).unwrap();
        assert_eq!(result.predictions, vec![0]);
        assert_eq!(result.accuracy, 0.0);
    }

    #[test]
    fn classify_matches_exhaustive_argmax_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let labels = LabelEmbeddings::new(
            EmbeddingMatrix::new(unit_rows(&mut rng, 10, 8)).unwrap(),
        )
        .unwrap();
        let images = EmbeddingMatrix::new_normalized(unit_rows(&mut rng, 64, 8)).unwrap();
        let truth: Vec<usize> = (0..64).map(|_| rng.gen_range(0..10)).collect();
        let result = zero_shot_classify(&images, &labels, &truth).unwrap();
        let mut oracle_hits = 0;
        for i in 0..images.rows() {
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for j in 0..labels.count() {
                let score: f64 = images
                    .row(i)
                    .iter()
                    .zip(labels.matrix().row(j).iter())
                    .map(|(a, b)| a * b)
                    .sum();
                if score > best_score {
                    best_score = score;
                    best = j;
                }
            }
            assert_eq!(result.predictions[i], best, "image {i}");
            if best == truth[i] {
                oracle_hits += 1;
            }
        }
        assert_eq!(result.accuracy, 100.0 * oracle_hits as f64 / 64.0);
    }

    #[test]
    fn predictions_invariant_to_positive_scaling_of_scores() {
        // Cosine ordering is preserved under a positive scalar on the image
        // side; verify via the raw score path (unnormalized rows).
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let labels = LabelEmbeddings::new(
            EmbeddingMatrix::new(unit_rows(&mut rng, 6, 5)).unwrap(),
        )
        .unwrap();
        let raw = unit_rows(&mut rng, 30, 5);
        let truth: Vec<usize> = (0..30).map(|_| rng.gen_range(0..6)).collect();
        let base = zero_shot_classify(
            &EmbeddingMatrix::new_normalized(raw.clone()).unwrap(),
            &labels,
            &truth,
        )
        .unwrap();
        // Scaling all image embeddings by a positive constant cannot change
        // the argmax; normalization maps both to the same unit rows.
        let scaled = EmbeddingMatrix::normalize_rows(raw * 37.5).unwrap();
        let result = zero_shot_classify(&scaled, &labels, &truth).unwrap();
        assert_eq!(result.predictions, base.predictions);
    }

    #[test]
    fn dim_mismatch_is_shape_error() {
        let labels = LabelEmbeddings::new(
            EmbeddingMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let images = EmbeddingMatrix::new_normalized(array![[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            zero_shot_classify(&images, &labels, &[0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let zero = [0.0, 2.0];
        let fine = [2.0, 4.0];
        assert_eq!(interpolate_weights(&zero, &fine, 0.0).unwrap(), zero);
        assert_eq!(interpolate_weights(&zero, &fine, 1.0).unwrap(), fine);
        assert_eq!(interpolate_weights(&zero, &fine, 0.5).unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn interpolation_of_identical_weights_is_identity() {
        let w = [1.5, -2.25, 0.0, 1e-12];
        for mix in [0.0, 0.1, 0.3, 0.77, 1.0] {
            assert_eq!(interpolate_weights(&w, &w, mix).unwrap(), w);
        }
    }

    #[test]
    fn interpolation_rejects_bad_inputs() {
        assert!(matches!(
            interpolate_weights(&[1.0], &[1.0, 2.0], 0.5),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            interpolate_weights(&[1.0], &[2.0], 1.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            interpolate_weights(&[1.0], &[2.0], -0.1),
            Err(Error::Domain(_))
        ));
    }
}
