//! Recall@K retrieval between paired query/candidate embeddings.
//!
//! Simulates an image/text retrieval benchmark: each query has one true
//! candidate (a noisy copy of itself) hidden among distractors.
//!
//! ```bash
//! cargo run -p scalelaw --example retrieval_recall
//! ```

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use scalelaw::embedding::{EmbeddingMatrix, TruthMap};
use scalelaw::evalproto::recall_at_k;

const QUERIES: usize = 200;
const DISTRACTORS: usize = 800;
const DIM: usize = 24;

fn main() -> scalelaw::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut random_row = |noise: f64, base: Option<&[f64]>| -> Vec<f64> {
        let mut v: Vec<f64> = match base {
            Some(b) => b.iter().map(|x| x + rng.gen_range(-noise..noise)).collect(),
            None => (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        v
    };

    let queries_rows: Vec<Vec<f64>> = (0..QUERIES).map(|_| random_row(0.0, None)).collect();
    let mut candidate_rows: Vec<Vec<f64>> = Vec::new();
    let mut truth = TruthMap::new();
    for (q, row) in queries_rows.iter().enumerate() {
        truth.insert(q, candidate_rows.len());
        candidate_rows.push(random_row(0.55, Some(row)));
    }
    for _ in 0..DISTRACTORS {
        candidate_rows.push(random_row(0.0, None));
    }

    let to_matrix = |rows: &[Vec<f64>]| -> scalelaw::Result<EmbeddingMatrix> {
        let mut m = Array2::zeros((rows.len(), DIM));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[[i, j]] = *v;
            }
        }
        EmbeddingMatrix::new(m)
    };
    let queries = to_matrix(&queries_rows)?;
    let candidates = to_matrix(&candidate_rows)?;

    println!(
        "{} queries against {} candidates ({} true + {} distractors)",
        QUERIES,
        candidate_rows.len(),
        QUERIES,
        DISTRACTORS
    );
    for k in [1, 5, 10, 50] {
        let recall = recall_at_k(&queries, &candidates, &truth, k)?;
        println!("Recall@{k:<3} = {recall:6.2}%");
    }
    Ok(())
}
