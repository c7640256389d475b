//! Symmetric InfoNCE loss with analytic gradients, plus a simulated sharded
//! computation across virtual workers.
//!
//! The loss treats matched image/text pairs as positives against all in-batch
//! negatives and averages the image-to-text and text-to-image cross-entropy
//! terms. Because the loss lower-bounds the mutual information between the
//! two views (`I(X;Y) >= log(N) - L_N` for batch size N), training benefits
//! from very large batches, which is what makes sharding interesting: a full
//! N x N similarity matrix at N = 32768 occupies 4 GB in FP32, while each
//! worker really only needs its two local-versus-global blocks (64 MB at a
//! local batch of 256).
//!
//! [`sharded_loss_grad`] reproduces that scheme with virtual workers: each
//! worker materializes only its `n x N` blocks, computes its loss share and
//! gradient contributions with respect to *all* embeddings (modeling a
//! differentiable all-gather), and the contributions are summed in a fixed
//! worker order. The aggregate equals the full-matrix computation; with one
//! worker the two paths are arithmetically identical.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::util::{log_sum_exp, KahanSum};

/// Paired image/text embeddings and the softmax temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveBatch {
    image: Array2<f64>,
    text: Array2<f64>,
    tau: f64,
}

impl ContrastiveBatch {
    /// Validates shapes, finiteness, positive temperature, and unit rows
    /// (within 1e-6).
    pub fn new(image: Array2<f64>, text: Array2<f64>, tau: f64) -> Result<Self> {
        let batch = Self::new_unchecked(image, text, tau)?;
        for (name, m) in [("image", &batch.image), ("text", &batch.text)] {
            for (i, row) in m.rows().into_iter().enumerate() {
                let norm = row.dot(&row).sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    return Err(Error::Shape(format!(
                        "{name} row {i} has norm {norm}, expected 1 within 1e-6"
                    )));
                }
            }
        }
        Ok(batch)
    }

    /// Skips the unit-norm check; the loss is defined for any finite
    /// embeddings (used by gradient checking, which perturbs single entries).
    pub fn new_unchecked(image: Array2<f64>, text: Array2<f64>, tau: f64) -> Result<Self> {
        if image.dim() != text.dim() {
            return Err(Error::Shape(format!(
                "image {:?} vs text {:?}",
                image.dim(),
                text.dim()
            )));
        }
        if image.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if tau <= 0.0 || tau.is_nan() || !tau.is_finite() {
            return Err(Error::Domain(format!("temperature must be positive, got {tau}")));
        }
        if image.iter().chain(text.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite embedding entries".into()));
        }
        Ok(Self { image, text, tau })
    }

    /// Seeded random batch with unit-norm rows; handy for simulations.
    pub fn random(n: usize, dim: usize, tau: f64, seed: u64) -> Result<Self> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut sample = |rows: usize| -> Array2<f64> {
            let mut m: Array2<f64> = Array2::zeros((rows, dim));
            for mut row in m.rows_mut() {
                loop {
                    for v in row.iter_mut() {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                    let norm = row.dot(&row).sqrt();
                    if norm > 1e-3 {
                        row.mapv_inplace(|v| v / norm);
                        break;
                    }
                }
            }
            m
        };
        Self::new(sample(n), sample(n), tau)
    }

    pub fn len(&self) -> usize {
        self.image.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.image.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.image.ncols()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn image(&self) -> &Array2<f64> {
        &self.image
    }

    pub fn text(&self) -> &Array2<f64> {
        &self.text
    }
}

/// Gradients of the loss with respect to the image and text embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub d_image: Array2<f64>,
    pub d_text: Array2<f64>,
}

/// Sequential in-order dot product; bit-identical under operand swap.
fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |s, (x, y)| s + x * y)
}

fn check_finite(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numeric("non-finite similarity logit".into()))
    }
}

/// Full N x N similarity logits `s_ij = (U_i . V_j) / tau`.
fn full_logits(batch: &ContrastiveBatch) -> Result<Array2<f64>> {
    let n = batch.len();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = check_finite(dot(batch.image.row(i), batch.text.row(j)) / batch.tau)?;
        }
    }
    Ok(s)
}

fn softmax_of(slice: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(slice);
    slice.iter().map(|&v| (v - lse).exp()).collect()
}

/// Cross-entropy of one similarity row/column against its diagonal target.
fn cross_entropy_term(slice: &[f64], target: usize) -> f64 {
    log_sum_exp(slice) - slice[target]
}

/// Symmetric InfoNCE loss (natural log):
/// `0.5 * (mean_i CE(row i, i) + mean_j CE(col j, j))`.
pub fn infonce_loss(batch: &ContrastiveBatch) -> Result<f64> {
    let s = full_logits(batch)?;
    let n = batch.len();
    let mut rows = KahanSum::new();
    let mut cols = KahanSum::new();
    for i in 0..n {
        rows.add(cross_entropy_term(s.row(i).as_slice().expect("row-major"), i));
    }
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| s[[i, j]]).collect();
        cols.add(cross_entropy_term(&col, j));
    }
    Ok((rows.value() + cols.value()) / (2 * n) as f64)
}

/// Gradient of the summed (unaveraged) two-sided cross-entropy with respect
/// to the logits: `P + Q - 2I`, where P is the row softmax and Q the column
/// softmax. Divide by `2N` to get the gradient of [`infonce_loss`] with
/// respect to the logits.
pub fn grad_wrt_logits(logits: &Array2<f64>) -> Array2<f64> {
    let n = logits.nrows();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        let p = softmax_of(logits.row(i).as_slice().expect("row-major"));
        for j in 0..n {
            g[[i, j]] += p[j];
        }
        g[[i, i]] -= 1.0;
    }
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| logits[[i, j]]).collect();
        let q = softmax_of(&col);
        for i in 0..n {
            g[[i, j]] += q[i];
        }
        g[[j, j]] -= 1.0;
    }
    g
}

/// Analytic gradients of [`infonce_loss`] with respect to both embedding
/// matrices.
pub fn infonce_grad(batch: &ContrastiveBatch) -> Result<GradientPair> {
    let s = full_logits(batch)?;
    let n = batch.len();
    let dim = batch.dim();
    let mut du_row: Array2<f64> = Array2::zeros((n, dim));
    let mut dv_row: Array2<f64> = Array2::zeros((n, dim));
    let mut du_col: Array2<f64> = Array2::zeros((n, dim));
    let mut dv_col: Array2<f64> = Array2::zeros((n, dim));
    for i in 0..n {
        let p = softmax_of(s.row(i).as_slice().expect("row-major"));
        accumulate_row_part(batch, i, &p, &mut du_row, &mut dv_row);
    }
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| s[[i, j]]).collect();
        let q = softmax_of(&col);
        accumulate_col_part(batch, j, &q, &mut du_col, &mut dv_col);
    }
    let scale = 1.0 / (2.0 * n as f64 * batch.tau);
    Ok(GradientPair {
        d_image: (du_row + du_col) * scale,
        d_text: (dv_row + dv_col) * scale,
    })
}

/// Image-to-text term for global row `i` with row softmax `p`:
/// coefficients `p_j - [j == i]` applied against the un-scaled embeddings.
fn accumulate_row_part(
    batch: &ContrastiveBatch,
    i: usize,
    p: &[f64],
    du: &mut Array2<f64>,
    dv: &mut Array2<f64>,
) {
    let n = batch.len();
    let dim = batch.dim();
    for j in 0..n {
        let c = p[j] - if j == i { 1.0 } else { 0.0 };
        for k in 0..dim {
            du[[i, k]] += c * batch.text[[j, k]];
            dv[[j, k]] += c * batch.image[[i, k]];
        }
    }
}

/// Text-to-image term for global column `j` with column softmax `q`.
fn accumulate_col_part(
    batch: &ContrastiveBatch,
    j: usize,
    q: &[f64],
    du: &mut Array2<f64>,
    dv: &mut Array2<f64>,
) {
    let n = batch.len();
    let dim = batch.dim();
    for i in 0..n {
        let c = q[i] - if i == j { 1.0 } else { 0.0 };
        for k in 0..dim {
            dv[[j, k]] += c * batch.image[[i, k]];
            du[[i, k]] += c * batch.text[[j, k]];
        }
    }
}

/// How batch rows are assigned to virtual workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assignment {
    /// Worker w owns rows `w*n .. (w+1)*n`.
    #[default]
    Contiguous,
    /// Worker w owns rows congruent to w modulo the worker count.
    Interleaved,
}

/// Virtual-worker layout: `workers * local_size == N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardLayout {
    workers: usize,
    assignment: Assignment,
}

impl ShardLayout {
    pub fn contiguous(workers: usize) -> Result<Self> {
        Self::with_assignment(workers, Assignment::Contiguous)
    }

    pub fn interleaved(workers: usize) -> Result<Self> {
        Self::with_assignment(workers, Assignment::Interleaved)
    }

    pub fn with_assignment(workers: usize, assignment: Assignment) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Layout("worker count must be >= 1".into()));
        }
        Ok(Self { workers, assignment })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Local batch size n with `workers * n == total`.
    pub fn local_size(&self, total: usize) -> Result<usize> {
        if total % self.workers != 0 {
            return Err(Error::Layout(format!(
                "{} workers do not divide batch size {total}",
                self.workers
            )));
        }
        Ok(total / self.workers)
    }

    /// Global indices owned by `worker`, ascending.
    pub fn indices(&self, worker: usize, total: usize) -> Result<Vec<usize>> {
        let n = self.local_size(total)?;
        if worker >= self.workers {
            return Err(Error::Layout(format!(
                "worker {worker} out of range ({} workers)",
                self.workers
            )));
        }
        Ok(match self.assignment {
            Assignment::Contiguous => (worker * n..(worker + 1) * n).collect(),
            Assignment::Interleaved => (0..n).map(|i| worker + i * self.workers).collect(),
        })
    }

    /// Similarity entries each worker materializes: two n x N blocks.
    pub fn per_worker_similarity_entries(&self, total: usize) -> Result<u64> {
        let n = self.local_size(total)? as u64;
        Ok(2 * n * total as u64)
    }

    /// Entries of the unsharded N x N similarity matrix.
    pub fn full_matrix_entries(total: usize) -> u64 {
        (total as u64) * (total as u64)
    }
}

/// Result of the sharded simulation, with memory accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardReport {
    pub loss: f64,
    pub grads: GradientPair,
    /// 2 n N: entries of the two local-versus-global blocks per worker.
    pub per_worker_similarity_entries: u64,
    /// N^2: entries of the unsharded similarity matrix.
    pub full_matrix_entries: u64,
}

impl ShardReport {
    /// Bytes for the per-worker blocks at the given scalar width.
    pub fn per_worker_bytes(&self, bytes_per_entry: u64) -> u64 {
        self.per_worker_similarity_entries * bytes_per_entry
    }

    /// Bytes for the full similarity matrix at the given scalar width.
    pub fn full_matrix_bytes(&self, bytes_per_entry: u64) -> u64 {
        self.full_matrix_entries * bytes_per_entry
    }
}

/// Simulates the sharded loss/gradient computation.
///
/// Each virtual worker materializes only its local-image-versus-all-text and
/// local-text-versus-all-image blocks, computes its loss share and gradient
/// contributions with respect to all embeddings, and contributions are summed
/// in worker order. The loss and gradients equal [`infonce_loss`] /
/// [`infonce_grad`]; with a single worker the arithmetic is identical
/// operation for operation.
pub fn sharded_loss_grad(batch: &ContrastiveBatch, layout: &ShardLayout) -> Result<ShardReport> {
    let n_total = batch.len();
    let dim = batch.dim();
    layout.local_size(n_total)?;

    let mut total_terms: Option<f64> = None;
    let mut du: Option<Array2<f64>> = None;
    let mut dv: Option<Array2<f64>> = None;

    for worker in 0..layout.workers() {
        let local = layout.indices(worker, n_total)?;

        // Block A: local images against every text.
        let mut block_a = Array2::zeros((local.len(), n_total));
        for (a, &i) in local.iter().enumerate() {
            for j in 0..n_total {
                block_a[[a, j]] =
                    check_finite(dot(batch.image.row(i), batch.text.row(j)) / batch.tau)?;
            }
        }
        // Block B: local texts against every image. Row `a` holds column
        // `local[a]` of the full logit matrix.
        let mut block_b = Array2::zeros((local.len(), n_total));
        for (a, &j) in local.iter().enumerate() {
            for i in 0..n_total {
                block_b[[a, i]] =
                    check_finite(dot(batch.text.row(j), batch.image.row(i)) / batch.tau)?;
            }
        }

        let mut rows = KahanSum::new();
        let mut cols = KahanSum::new();
        let mut du_row: Array2<f64> = Array2::zeros((n_total, dim));
        let mut dv_row: Array2<f64> = Array2::zeros((n_total, dim));
        let mut du_col: Array2<f64> = Array2::zeros((n_total, dim));
        let mut dv_col: Array2<f64> = Array2::zeros((n_total, dim));
        for (a, &i) in local.iter().enumerate() {
            let slice = block_a.row(a);
            let slice = slice.as_slice().expect("row-major");
            rows.add(cross_entropy_term(slice, i));
            let p = softmax_of(slice);
            accumulate_row_part(batch, i, &p, &mut du_row, &mut dv_row);
        }
        for (a, &j) in local.iter().enumerate() {
            let slice = block_b.row(a);
            let slice = slice.as_slice().expect("row-major");
            cols.add(cross_entropy_term(slice, j));
            let q = softmax_of(slice);
            accumulate_col_part(batch, j, &q, &mut du_col, &mut dv_col);
        }

        let term = rows.value() + cols.value();
        let worker_du = du_row + du_col;
        let worker_dv = dv_row + dv_col;
        match (&mut total_terms, &mut du, &mut dv) {
            (Some(t), Some(u), Some(v)) => {
                *t += term;
                *u += &worker_du;
                *v += &worker_dv;
            }
            _ => {
                total_terms = Some(term);
                du = Some(worker_du);
                dv = Some(worker_dv);
            }
        }
    }

    let scale = 1.0 / (2.0 * n_total as f64 * batch.tau);
    Ok(ShardReport {
        loss: total_terms.expect("at least one worker") / (2 * n_total) as f64,
        grads: GradientPair {
            d_image: du.expect("at least one worker") * scale,
            d_text: dv.expect("at least one worker") * scale,
        },
        per_worker_similarity_entries: layout.per_worker_similarity_entries(n_total)?,
        full_matrix_entries: ShardLayout::full_matrix_entries(n_total),
    })
}
