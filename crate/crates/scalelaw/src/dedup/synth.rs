//! Seeded synthetic test images: smooth gradients with simple shapes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::ImageRaster;

/// Grayscale image built from a bilinear gradient between four random corner
/// intensities plus a few filled rectangles and discs. Deterministic in the
/// seed; structured enough that perceptual hashes behave as they do on
/// photographs rather than on pure noise.
pub fn structured_image(seed: u64, width: u32, height: u32) -> ImageRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corners: [f64; 4] = [
        rng.gen_range(0.0..255.0),
        rng.gen_range(0.0..255.0),
        rng.gen_range(0.0..255.0),
        rng.gen_range(0.0..255.0),
    ];
    let mut pixels = vec![0u8; (width * height) as usize];
    for y in 0..height {
        let fy = y as f64 / (height - 1).max(1) as f64;
        for x in 0..width {
            let fx = x as f64 / (width - 1).max(1) as f64;
            let top = corners[0] + (corners[1] - corners[0]) * fx;
            let bottom = corners[2] + (corners[3] - corners[2]) * fx;
            pixels[(y * width + x) as usize] = (top + (bottom - top) * fy).round() as u8;
        }
    }

    let shapes = rng.gen_range(2..6);
    for _ in 0..shapes {
        let value: u8 = rng.gen();
        if rng.gen_bool(0.5) {
            let x0 = rng.gen_range(0..width);
            let y0 = rng.gen_range(0..height);
            let w = rng.gen_range(width / 8..width / 2).max(1);
            let h = rng.gen_range(height / 8..height / 2).max(1);
            for y in y0..(y0 + h).min(height) {
                for x in x0..(x0 + w).min(width) {
                    pixels[(y * width + x) as usize] = value;
                }
            }
        } else {
            let cx = rng.gen_range(0..width) as i64;
            let cy = rng.gen_range(0..height) as i64;
            let r = rng.gen_range(width / 10..width / 3).max(1) as i64;
            for y in 0..height as i64 {
                for x in 0..width as i64 {
                    if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r {
                        pixels[(y * width as i64 + x) as usize] = value;
                    }
                }
            }
        }
    }
    ImageRaster::new(width, height, 1, pixels).expect("valid geometry")
}

/// Independent uniform-noise image; pairs of these almost never collide.
pub fn noise_image(seed: u64, width: u32, height: u32) -> ImageRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels: Vec<u8> = (0..width as usize * height as usize)
        .map(|_| rng.gen())
        .collect();
    ImageRaster::new(width, height, 1, pixels).expect("valid geometry")
}
