//! Extrapolates the fitted scaling laws to model/data scales beyond the
//! measured range: ViT-H/14, g/14, and G/14 at up to 68B samples seen.
//!
//! Extrapolation has its limits: every row is flagged, and predictions far
//! outside the fitted compute domain deserve corresponding skepticism.
//!
//! ```bash
//! cargo run -p scalelaw --example extrapolate
//! ```

use scalelaw::records::{parse_records, ArchRegistry, Family, RecordFormat};
use scalelaw::scaling::{build_fit_report, DEFAULT_NUM_BINS};

fn main() -> scalelaw::Result<()> {
    let records = parse_records(
        include_str!("../fixtures/results.csv").as_bytes(),
        RecordFormat::Csv,
    )?;
    let registry = ArchRegistry::builtin();

    let billions = |b: u64| b * 1_000_000_000;
    let mut targets = Vec::new();
    for arch in ["ViT-H/14", "ViT-g/14", "ViT-G/14"] {
        for samples in [3u64, 13, 34, 68] {
            targets.push((arch.to_string(), billions(samples)));
        }
    }

    for (task, label) in [
        ("imagenet-zeroshot", "ImageNet zero-shot top-1 (%)"),
        ("mscoco-image-r5", "MS-COCO image retrieval Recall@5 (%)"),
    ] {
        let report = build_fit_report(
            &records,
            task,
            Family::OpenClipLaion,
            &registry,
            DEFAULT_NUM_BINS,
            &targets,
        )?;
        println!("{label}: E = {:.3} * C^({:.4})", report.beta, report.alpha);
        println!("{:<10} {:>10} {:>14} {:>9}", "model", "samples", "compute GMAC", "metric");
        for p in &report.predictions {
            println!(
                "{:<10} {:>9}B {:>14.3e} {:>8.2}{}",
                p.arch,
                p.samples_seen / 1_000_000_000,
                p.compute_gmac,
                p.metric,
                if p.extrapolated { "*" } else { "" }
            );
        }
        println!("(* extrapolated beyond the fitted domain)\n");
    }
    Ok(())
}
