//! Scaling efficiency of data-parallel training from measured throughput:
//! `E(N) = 100 * T(N) / ((N / b) * T(b))` against a baseline of b GPUs.
//!
//! ```bash
//! cargo run -p scalelaw --example ddp_efficiency
//! ```

use scalelaw::scaling::{scaling_efficiency, ThroughputSample};

fn main() -> scalelaw::Result<()> {
    // Measured images/second for a data-parallel run at increasing GPU
    // counts (4 GPUs per node), eroding slowly from communication overhead.
    let measurements: &[(u32, f64)] = &[
        (4, 10_000.0),
        (16, 39_400.0),
        (64, 152_300.0),
        (256, 585_000.0),
        (1024, 2_128_000.0),
    ];
    let samples: Vec<ThroughputSample> = measurements
        .iter()
        .map(|&(n, t)| ThroughputSample::new(n, t))
        .collect::<scalelaw::Result<_>>()?;

    println!("baseline: one node (4 GPUs)");
    println!("{:>8} {:>14} {:>12} {:>10}", "gpus", "images/s", "speedup", "efficiency");
    let table = scaling_efficiency(&samples, Some(4))?;
    let base = samples[0].throughput;
    for (sample, (n, eff)) in samples.iter().zip(table) {
        println!(
            "{n:>8} {:>14.0} {:>11.1}x {:>9.1}%",
            sample.throughput,
            sample.throughput / base,
            eff
        );
    }
    Ok(())
}
