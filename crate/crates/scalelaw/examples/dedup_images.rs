//! Perceptual-hash duplication check between two image sets.
//!
//! Set A plays the role of a large pre-training corpus; set B is an
//! evaluation set that accidentally contains transformed copies of some A
//! images (here: blurred). The overlap report counts how much of B is
//! already present in A.
//!
//! ```bash
//! cargo run -p scalelaw --example dedup_images
//! ```

use scalelaw::dedup::{box_blur3, hamming, overlap_report, phash, synth, OverlapIndex};

fn main() -> scalelaw::Result<()> {
    // Corpus: 60 structured synthetic images.
    let corpus: Vec<_> = (0..60).map(|s| synth::structured_image(s, 64, 64)).collect();
    let hashes_a: Vec<_> = corpus.iter().map(phash).collect();

    // Probe set: 12 blurred copies of corpus images + 18 unrelated ones.
    let mut probe_hashes = Vec::new();
    for (i, image) in corpus.iter().enumerate().take(12) {
        let blurred = box_blur3(image);
        probe_hashes.push(phash(&blurred));
        if i < 3 {
            println!(
                "image {i}: hash {} vs blurred {} (hamming {})",
                phash(image).to_hex(),
                phash(&blurred).to_hex(),
                hamming(phash(image), phash(&blurred))
            );
        }
    }
    for s in 0..18 {
        probe_hashes.push(phash(&synth::structured_image(1000 + s, 64, 64)));
    }

    println!();
    for threshold in [0, 4, 10, 16] {
        let report = overlap_report(&hashes_a, &probe_hashes, threshold)?;
        println!(
            "threshold {threshold:>2}: {:>2}/{} matched ({:5.1}% overlap)",
            report.matched_b, report.total_b, report.overlap_percent
        );
    }

    // The bucketed index returns identical reports.
    let index = OverlapIndex::build(&hashes_a);
    let exhaustive = overlap_report(&hashes_a, &probe_hashes, 3)?;
    let indexed = index.overlap_report(&probe_hashes, 3)?;
    assert_eq!(exhaustive, indexed);
    println!("\nbucketed index agrees with the exhaustive scan at threshold 3");
    Ok(())
}
