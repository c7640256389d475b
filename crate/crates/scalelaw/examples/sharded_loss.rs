//! Sharded InfoNCE: virtual workers compute local-versus-global similarity
//! blocks only, yet their summed contributions reproduce the full-matrix
//! loss and gradients. Also prints the memory accounting that motivates the
//! scheme at large batch sizes.
//!
//! ```bash
//! cargo run -p scalelaw --example sharded_loss
//! ```

use scalelaw::contrastive::{
    infonce_grad, infonce_loss, sharded_loss_grad, ContrastiveBatch, ShardLayout,
};

fn main() -> scalelaw::Result<()> {
    let batch = ContrastiveBatch::random(64, 16, 0.07, 3)?;
    let full_loss = infonce_loss(&batch)?;
    let full_grads = infonce_grad(&batch)?;
    println!(
        "batch: N = {}, d = {}, tau = {}",
        batch.len(),
        batch.dim(),
        batch.tau()
    );
    println!("full-matrix loss = {full_loss:.12}  (ln N = {:.4})\n", (batch.len() as f64).ln());

    println!(
        "{:>8} {:>14} {:>14} {:>18}",
        "workers", "loss diff", "grad diff", "entries/worker"
    );
    for workers in [1usize, 2, 4, 8] {
        let layout = ShardLayout::contiguous(workers)?;
        let report = sharded_loss_grad(&batch, &layout)?;
        let mut grad_diff = 0.0f64;
        for (a, b) in report
            .grads
            .d_image
            .iter()
            .zip(full_grads.d_image.iter())
            .chain(report.grads.d_text.iter().zip(full_grads.d_text.iter()))
        {
            grad_diff = grad_diff.max((a - b).abs());
        }
        println!(
            "{workers:>8} {:>14.3e} {:>14.3e} {:>18}",
            (report.loss - full_loss).abs(),
            grad_diff,
            report.per_worker_similarity_entries
        );
    }

    // Memory accounting at production scale: batch 32768, local batch 256.
    let total = 32_768usize;
    let layout = ShardLayout::contiguous(total / 256)?;
    let per_worker = layout.per_worker_similarity_entries(total)? * 4;
    let full = ShardLayout::full_matrix_entries(total) * 4;
    println!("\nFP32 similarity memory at N = {total}, local batch 256:");
    println!("  unsharded: {full:>13} bytes ({:.2} GB)", full as f64 / 1e9);
    println!("  sharded:   {per_worker:>13} bytes ({:.0} MB per worker)", per_worker as f64 / 1e6);
    Ok(())
}
