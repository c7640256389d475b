//! Prompt-ensemble zero-shot classification on synthetic embeddings.
//!
//! Each label gets several "prompt" embeddings scattered around a class
//! direction; they are averaged and normalized into one embedding per label,
//! and images are classified by largest cosine similarity.
//!
//! ```bash
//! cargo run -p scalelaw --example zero_shot_eval
//! ```

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use scalelaw::embedding::EmbeddingMatrix;
use scalelaw::evalproto::{build_label_embeddings, zero_shot_classify};

const DIM: usize = 16;
const LABELS: usize = 10;
const PROMPTS_PER_LABEL: usize = 7;
const IMAGES: usize = 500;

fn unit(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v {
        *x /= norm;
    }
}

fn main() -> scalelaw::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    // Random class directions.
    let mut directions = vec![[0.0f64; DIM]; LABELS];
    for dir in directions.iter_mut() {
        for v in dir.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        unit(dir);
    }

    // Prompts scatter around their class direction.
    let prompt_groups: Vec<Array2<f64>> = directions
        .iter()
        .map(|dir| {
            let mut group = Array2::zeros((PROMPTS_PER_LABEL, DIM));
            for mut row in group.rows_mut() {
                for (r, d) in row.iter_mut().zip(dir) {
                    *r = d + rng.gen_range(-0.3..0.3);
                }
            }
            group
        })
        .collect();
    let labels = build_label_embeddings(&prompt_groups)?;

    // Images: a noisy view of a random class.
    let mut images = Array2::zeros((IMAGES, DIM));
    let mut truth = Vec::with_capacity(IMAGES);
    for mut row in images.rows_mut() {
        let class = rng.gen_range(0..LABELS);
        truth.push(class);
        let mut v = directions[class];
        for x in v.iter_mut() {
            *x += rng.gen_range(-0.4..0.4);
        }
        unit(&mut v);
        for (r, x) in row.iter_mut().zip(&v) {
            *r = *x;
        }
    }
    let images = EmbeddingMatrix::new_normalized(images)?;

    let result = zero_shot_classify(&images, &labels, &truth)?;
    println!(
        "{} images, {} labels, {} prompts per label",
        IMAGES, LABELS, PROMPTS_PER_LABEL
    );
    println!("zero-shot top-1 accuracy: {:.2}%", result.accuracy);

    // Same protocol with a single prompt per label for comparison.
    let single_groups: Vec<Array2<f64>> = prompt_groups
        .iter()
        .map(|g| g.slice(ndarray::s![0..1, ..]).to_owned())
        .collect();
    let single = zero_shot_classify(&images, &build_label_embeddings(&single_groups)?, &truth)?;
    println!("single-prompt accuracy:   {:.2}%", single.accuracy);
    println!("prompt ensembling buys {:+.2} points here", result.accuracy - single.accuracy);
    Ok(())
}
