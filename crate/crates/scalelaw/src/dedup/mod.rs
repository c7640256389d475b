//! Perceptual-hash duplication checking between image sets.
//!
//! The hash is the DCT variant: luminance grayscale, area-average resize to
//! 32x32, 2-D type-II DCT, take the top-left 8x8 coefficient block, threshold
//! every coefficient against the median of the 63 non-DC coefficients
//! (strictly greater sets the bit), and pack the 64 bits row-major. Near
//! duplicates land within a small Hamming distance of each other even after
//! blurring, color changes, cropping, or rescaling; unrelated images collide
//! rarely.
//!
//! Non-DC coefficients are computed on the mean-removed raster and snapped
//! to zero below a small noise floor. Both steps leave the mathematical
//! values unchanged; together they make analytically-zero coefficients exact
//! zeros, so degenerate inputs (a constant image, a pure ramp) hash
//! deterministically: all bits clear except coefficients genuinely above the
//! median.

pub mod pnm;
pub mod synth;

use std::collections::BTreeSet;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the resized raster the DCT runs on.
const DCT_SIZE: usize = 32;
/// Side length of the retained low-frequency coefficient block.
const BLOCK_SIZE: usize = 8;

/// Default Hamming-distance threshold for calling two hashes a match.
pub const DEFAULT_THRESHOLD: u32 = 10;

/// 8-bit raster, row-major, 1 (grayscale) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRaster {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl ImageRaster {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Image(format!("channels must be 1 or 3, got {channels}")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::Image(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Luminance at (x, y): 0.299 R + 0.587 G + 0.114 B, rounded to nearest.
    pub fn luma(&self, x: u32, y: u32) -> u8 {
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize;
        match self.channels {
            1 => self.pixels[idx],
            _ => {
                let r = self.pixels[idx] as f64;
                let g = self.pixels[idx + 1] as f64;
                let b = self.pixels[idx + 2] as f64;
                (0.299 * r + 0.587 * g + 0.114 * b).round() as u8
            }
        }
    }
}

/// 64-bit DCT perceptual hash. Bit 63 (most significant) is the DC position;
/// the rest follow the 8x8 coefficient block in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashCode {
    pub bits: u64,
}

impl HashCode {
    pub fn to_hex(&self) -> String {
        format!("{:016x}", self.bits)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bits = u64::from_str_radix(s.trim(), 16)
            .map_err(|e| Error::InvalidInput(format!("bad hash hex `{s}`: {e}")))?;
        Ok(Self { bits })
    }
}

/// Population count of the bitwise XOR; ranges over [0, 64].
pub fn hamming(a: HashCode, b: HashCode) -> u32 {
    (a.bits ^ b.bits).count_ones()
}

/// Computes the perceptual hash of a raster. Total function: every valid
/// raster (including degenerate all-constant ones) hashes deterministically.
pub fn phash(image: &ImageRaster) -> HashCode {
    let resized = resize_area_average(image);
    let coeffs = dct_block(&resized);
    let mut non_dc: Vec<f64> = coeffs[1..].to_vec();
    non_dc.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let median = non_dc[(non_dc.len() - 1) / 2];
    let mut bits = 0u64;
    for (idx, &c) in coeffs.iter().enumerate() {
        if c > median {
            bits |= 1 << (63 - idx);
        }
    }
    HashCode { bits }
}

/// Area-average (box-filter) downscale of the luminance plane to 32x32.
/// Each target cell averages the source pixels it geometrically covers,
/// fractional overlaps weighted by covered area.
fn resize_area_average(image: &ImageRaster) -> [[f64; DCT_SIZE]; DCT_SIZE] {
    let w = image.width as usize;
    let h = image.height as usize;
    let mut out = [[0.0; DCT_SIZE]; DCT_SIZE];
    for ty in 0..DCT_SIZE {
        let y0 = ty as f64 * h as f64 / DCT_SIZE as f64;
        let y1 = (ty + 1) as f64 * h as f64 / DCT_SIZE as f64;
        for tx in 0..DCT_SIZE {
            let x0 = tx as f64 * w as f64 / DCT_SIZE as f64;
            let x1 = (tx + 1) as f64 * w as f64 / DCT_SIZE as f64;
            let mut sum = 0.0;
            let sy_end = (y1.ceil() as usize).min(h);
            let sx_end = (x1.ceil() as usize).min(w);
            for sy in y0.floor() as usize..sy_end {
                let wy = (y1.min((sy + 1) as f64) - y0.max(sy as f64)).max(0.0);
                if wy == 0.0 {
                    continue;
                }
                for sx in x0.floor() as usize..sx_end {
                    let wx = (x1.min((sx + 1) as f64) - x0.max(sx as f64)).max(0.0);
                    if wx == 0.0 {
                        continue;
                    }
                    sum += wy * wx * image.luma(sx as u32, sy as u32) as f64;
                }
            }
            out[ty][tx] = sum / ((y1 - y0) * (x1 - x0));
        }
    }
    out
}

/// Magnitudes below this are treated as exactly zero. DCT coefficients of an
/// 8-bit raster are either analytically zero (then rounding leaves at most
/// ~1e-8 of noise here) or of order one and far above the floor, so snapping
/// only canonicalizes the zeros and makes degenerate images hash
/// deterministically regardless of summation order.
const COEFF_NOISE_FLOOR: f64 = 1e-6;

/// Top-left 8x8 block of the 2-D type-II DCT (no per-frequency scaling),
/// flattened row-major. The DC slot holds the plain pixel sum; the other
/// coefficients are computed on the mean-removed raster (same values, but a
/// constant image yields exact zeros) and snapped to zero below
/// [`COEFF_NOISE_FLOOR`].
fn dct_block(grid: &[[f64; DCT_SIZE]; DCT_SIZE]) -> [f64; BLOCK_SIZE * BLOCK_SIZE] {
    let mut total = 0.0;
    for row in grid {
        for &v in row {
            total += v;
        }
    }
    let mean = total / (DCT_SIZE * DCT_SIZE) as f64;

    // Basis table: cos(pi * (2i + 1) * f / 64), f < 8.
    let mut basis = [[0.0; DCT_SIZE]; BLOCK_SIZE];
    for (f, row) in basis.iter_mut().enumerate() {
        for (i, b) in row.iter_mut().enumerate() {
            *b = (std::f64::consts::PI * (2 * i + 1) as f64 * f as f64
                / (2.0 * DCT_SIZE as f64))
                .cos();
        }
    }

    // Separable two-pass transform of the residual.
    let mut partial = [[0.0; BLOCK_SIZE]; DCT_SIZE];
    for y in 0..DCT_SIZE {
        for (v, basis_row) in basis.iter().enumerate() {
            let mut acc = 0.0;
            for x in 0..DCT_SIZE {
                acc += (grid[y][x] - mean) * basis_row[x];
            }
            partial[y][v] = acc;
        }
    }
    let mut coeffs = [0.0; BLOCK_SIZE * BLOCK_SIZE];
    for (u, basis_row) in basis.iter().enumerate() {
        for v in 0..BLOCK_SIZE {
            let mut acc = 0.0;
            for y in 0..DCT_SIZE {
                acc += partial[y][v] * basis_row[y];
            }
            coeffs[u * BLOCK_SIZE + v] = if acc.abs() < COEFF_NOISE_FLOOR { 0.0 } else { acc };
        }
    }
    coeffs[0] = total;
    coeffs
}

/// 3x3 box blur with clamped borders; used to probe hash robustness.
pub fn box_blur3(image: &ImageRaster) -> ImageRaster {
    let w = image.width as i64;
    let h = image.height as i64;
    let ch = image.channels as usize;
    let mut out = vec![0u8; image.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut sum = 0.0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        sum += image.pixels[(sy * w as usize + sx) * ch + c] as f64;
                    }
                }
                out[(y as usize * w as usize + x as usize) * ch + c] =
                    (sum / 9.0).round() as u8;
            }
        }
    }
    ImageRaster::new(image.width, image.height, image.channels, out).expect("same geometry")
}

/// One matched item of set B with its nearest neighbour in set A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub b_index: usize,
    pub a_index: usize,
    pub distance: u32,
}

/// Duplication summary: how much of set B already appears in set A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub total_b: usize,
    pub matched_b: usize,
    pub overlap_percent: f64,
    pub matches: Vec<MatchEntry>,
}

/// Exhaustive pairwise duplication check: a B item is matched when any A
/// hash lies within `threshold` bits; the listed neighbour is the nearest A
/// (ties keep the first encountered).
pub fn overlap_report(
    hashes_a: &[HashCode],
    hashes_b: &[HashCode],
    threshold: u32,
) -> Result<OverlapReport> {
    check_report_inputs(hashes_b, threshold)?;
    let mut matches = Vec::new();
    for (bi, &b) in hashes_b.iter().enumerate() {
        if let Some((ai, d)) = nearest_in(hashes_a.iter().enumerate(), b) {
            if d <= threshold {
                matches.push(MatchEntry {
                    b_index: bi,
                    a_index: ai,
                    distance: d,
                });
            }
        }
    }
    Ok(assemble_report(hashes_b.len(), matches))
}

fn check_report_inputs(hashes_b: &[HashCode], threshold: u32) -> Result<()> {
    if hashes_b.is_empty() {
        return Err(Error::Image(
            "set B is empty; the overlap ratio is undefined".into(),
        ));
    }
    if threshold > 64 {
        return Err(Error::Range(format!("threshold {threshold} outside [0, 64]")));
    }
    Ok(())
}

fn nearest_in<'a>(
    candidates: impl Iterator<Item = (usize, &'a HashCode)>,
    b: HashCode,
) -> Option<(usize, u32)> {
    let mut best: Option<(usize, u32)> = None;
    for (ai, &a) in candidates {
        let d = hamming(a, b);
        if best.map(|(_, bd)| d < bd).unwrap_or(true) {
            best = Some((ai, d));
        }
    }
    best
}

fn assemble_report(total_b: usize, matches: Vec<MatchEntry>) -> OverlapReport {
    let matched_b = matches.len();
    OverlapReport {
        total_b,
        matched_b,
        overlap_percent: 100.0 * matched_b as f64 / total_b as f64,
        matches,
    }
}

/// Bucketed index over the four 16-bit chunks of each hash.
///
/// By pigeonhole, two hashes within Hamming distance 3 or less agree exactly
/// on at least one 16-bit chunk, so chunk-bucket candidates are complete for
/// thresholds below 4; at larger thresholds the query falls back to the
/// exhaustive scan. Reports are identical to [`overlap_report`] either way.
#[derive(Debug, Clone, Default)]
pub struct OverlapIndex {
    hashes: Vec<HashCode>,
    buckets: [HashMap<u16, Vec<usize>>; 4],
}

impl OverlapIndex {
    pub fn build(hashes_a: &[HashCode]) -> Self {
        let mut index = Self {
            hashes: hashes_a.to_vec(),
            ..Self::default()
        };
        for (i, h) in hashes_a.iter().enumerate() {
            for chunk in 0..4 {
                let key = (h.bits >> (16 * chunk)) as u16;
                index.buckets[chunk].entry(key).or_default().push(i);
            }
        }
        index
    }

    fn candidates(&self, b: HashCode) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        for chunk in 0..4 {
            let key = (b.bits >> (16 * chunk)) as u16;
            if let Some(bucket) = self.buckets[chunk].get(&key) {
                set.extend(bucket.iter().copied());
            }
        }
        set
    }

    /// Index-accelerated [`overlap_report`]; same output, including tie
    /// handling, for every threshold.
    pub fn overlap_report(&self, hashes_b: &[HashCode], threshold: u32) -> Result<OverlapReport> {
        check_report_inputs(hashes_b, threshold)?;
        if threshold >= 4 {
            return overlap_report(&self.hashes, hashes_b, threshold);
        }
        let mut matches = Vec::new();
        for (bi, &b) in hashes_b.iter().enumerate() {
            let candidates = self.candidates(b);
            let nearest = nearest_in(
                candidates.iter().map(|&i| (i, &self.hashes[i])),
                b,
            );
            if let Some((ai, d)) = nearest {
                if d <= threshold {
                    matches.push(MatchEntry {
                        b_index: bi,
                        a_index: ai,
                        distance: d,
                    });
                }
            }
        }
        Ok(assemble_report(hashes_b.len(), matches))
    }
}

/// Reads a hash file: CSV `id,hash_hex` with optional header and `#` comments.
pub fn read_hash_csv<R: std::io::Read>(reader: R) -> Result<Vec<(String, HashCode)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in csv.records().enumerate() {
        let row = row?;
        let id = row
            .get(0)
            .ok_or_else(|| Error::Parse {
                line: i + 1,
                field: "id".into(),
                message: "missing".into(),
            })?
            .to_string();
        let hex = row.get(1).ok_or_else(|| Error::Parse {
            line: i + 1,
            field: "hash_hex".into(),
            message: "missing".into(),
        })?;
        if i == 0 && id == "id" {
            continue;
        }
        out.push((id, HashCode::from_hex(hex)?));
    }
    Ok(out)
}

/// Writes the `id,hash_hex` CSV format.
pub fn write_hash_csv<W: std::io::Write>(
    mut writer: W,
    hashes: &[(String, HashCode)],
) -> Result<()> {
    writeln!(writer, "id,hash_hex")?;
    for (id, h) in hashes {
        writeln!(writer, "{id},{}", h.to_hex())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn constant_gray(size: u32, value: u8) -> ImageRaster {
        ImageRaster::new(size, size, 1, vec![value; (size * size) as usize]).unwrap()
    }

    fn random_noise(rng: &mut impl Rng, size: u32) -> ImageRaster {
        let pixels: Vec<u8> = (0..size * size).map(|_| rng.gen()).collect();
        ImageRaster::new(size, size, 1, pixels).unwrap()
    }

    /// Naive four-loop DCT over the mean-removed raster, with independent
    /// median thresholding and packing. Coefficients whose analytic value is
    /// zero show up here as rounding noise around 1e-9, far from any real
    /// coefficient, so they are snapped to exact zero before thresholding.
    fn naive_phash_32(image: &ImageRaster) -> u64 {
        assert_eq!(image.width(), 32);
        assert_eq!(image.height(), 32);
        let mut g = [[0.0f64; 32]; 32];
        let mut total = 0.0;
        for y in 0..32 {
            for x in 0..32 {
                g[y][x] = image.luma(x as u32, y as u32) as f64;
                total += g[y][x];
            }
        }
        let mean = total / 1024.0;
        let mut coeffs = vec![0.0f64; 64];
        for u in 0..8 {
            for v in 0..8 {
                let mut acc = 0.0;
                for y in 0..32 {
                    for x in 0..32 {
                        acc += (g[y][x] - mean)
                            * (std::f64::consts::PI * (2 * y + 1) as f64 * u as f64 / 64.0).cos()
                            * (std::f64::consts::PI * (2 * x + 1) as f64 * v as f64 / 64.0).cos();
                    }
                }
                acc = if acc.abs() < 1e-6 { 0.0 } else { acc };
                coeffs[u * 8 + v] = acc;
            }
        }
        coeffs[0] = total;
        let mut sorted: Vec<f64> = coeffs[1..].to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[31];
        let mut bits = 0u64;
        for (idx, &c) in coeffs.iter().enumerate() {
            if c > median {
                bits |= 1 << (63 - idx);
            }
        }
        bits
    }

    #[test]
    fn hashing_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let image = random_noise(&mut rng, 48);
        let a = phash(&image);
        let b = phash(&image);
        assert_eq!(a, b);
        assert_eq!(hamming(a, b), 0);
    }

    #[test]
    fn constant_gray_hash_is_dc_only() {
        for size in [32u32, 48, 17] {
            assert_eq!(
                phash(&constant_gray(size, 128)).bits,
                1 << 63,
                "size {size}"
            );
            assert_eq!(phash(&constant_gray(size, 0)).bits, 0, "size {size}");
        }
    }

    #[test]
    fn horizontal_ramp_matches_naive_dct_oracle() {
        let mut pixels = Vec::with_capacity(1024);
        for _y in 0..32 {
            for x in 0..32u32 {
                pixels.push((x * 8) as u8);
            }
        }
        let image = ImageRaster::new(32, 32, 1, pixels).unwrap();
        assert_eq!(phash(&image).bits, naive_phash_32(&image));
    }

    #[test]
    fn random_rasters_match_naive_dct_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let image = random_noise(&mut rng, 32);
            assert_eq!(phash(&image).bits, naive_phash_32(&image));
        }
    }

    #[test]
    fn rgb_luminance_weights() {
        // Pure-red raster: luma = round(0.299 * 200) = 60.
        let image = ImageRaster::new(2, 1, 3, vec![200, 0, 0, 200, 0, 0]).unwrap();
        assert_eq!(image.luma(0, 0), 60);
        assert_eq!(image.luma(1, 0), 60);
    }

    #[test]
    fn hamming_trivial_cases() {
        let a = HashCode { bits: 0x0123_4567_89ab_cdef };
        assert_eq!(hamming(a, a), 0);
        assert_eq!(hamming(a, HashCode { bits: !a.bits }), 64);
    }

    #[test]
    fn hamming_matches_bit_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = HashCode { bits: rng.gen() };
            let b = HashCode { bits: rng.gen() };
            let mut count = 0;
            for bit in 0..64 {
                if (a.bits >> bit) & 1 != (b.bits >> bit) & 1 {
                    count += 1;
                }
            }
            assert_eq!(hamming(a, b), count);
        }
    }

    #[test]
    fn hamming_is_a_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = HashCode { bits: rng.gen() };
            let b = HashCode { bits: rng.gen() };
            let c = HashCode { bits: rng.gen() };
            assert_eq!(hamming(a, b), hamming(b, a));
            assert_eq!(hamming(a, b) == 0, a == b);
            assert!(hamming(a, c) <= hamming(a, b) + hamming(b, c));
        }
    }

    #[test]
    fn subset_b_matches_fully_at_threshold_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<HashCode> = (0..20).map(|_| HashCode { bits: rng.gen() }).collect();
        let b: Vec<HashCode> = a[5..12].to_vec();
        let report = overlap_report(&a, &b, 0).unwrap();
        assert_eq!(report.matched_b, b.len());
        assert_eq!(report.overlap_percent, 100.0);
        for m in &report.matches {
            assert_eq!(m.distance, 0);
        }
    }

    #[test]
    fn empty_a_means_zero_overlap() {
        let b = vec![HashCode { bits: 7 }];
        let report = overlap_report(&[], &b, 10).unwrap();
        assert_eq!(report.matched_b, 0);
        assert_eq!(report.overlap_percent, 0.0);
        assert!(report.matches.is_empty());
    }

    #[test]
    fn empty_b_is_an_error() {
        assert!(overlap_report(&[HashCode { bits: 1 }], &[], 10).is_err());
        assert!(overlap_report(&[], &[HashCode { bits: 1 }], 65).is_err());
    }

    #[test]
    fn report_matches_exhaustive_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<HashCode> = (0..30).map(|_| HashCode { bits: rng.gen() }).collect();
        let mut b: Vec<HashCode> = (0..25).map(|_| HashCode { bits: rng.gen() }).collect();
        // Plant some near-duplicates.
        for i in 0..8 {
            let mut bits = a[i * 3].bits;
            for _ in 0..rng.gen_range(0..6) {
                bits ^= 1 << rng.gen_range(0..64);
            }
            b[i * 3] = HashCode { bits };
        }
        let threshold = 8;
        let report = overlap_report(&a, &b, threshold).unwrap();
        // Oracle: double loop with per-bit distance counting.
        let mut expected = Vec::new();
        for (bi, bb) in b.iter().enumerate() {
            let mut best: Option<(usize, u32)> = None;
            for (ai, aa) in a.iter().enumerate() {
                let mut d = 0;
                for bit in 0..64 {
                    if (aa.bits >> bit) & 1 != (bb.bits >> bit) & 1 {
                        d += 1;
                    }
                }
                if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                    best = Some((ai, d));
                }
            }
            if let Some((ai, d)) = best {
                if d <= threshold {
                    expected.push((bi, ai, d));
                }
            }
        }
        let got: Vec<(usize, usize, u32)> = report
            .matches
            .iter()
            .map(|m| (m.b_index, m.a_index, m.distance))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(report.matched_b, expected.len());
    }

    #[test]
    fn overlap_is_monotone_in_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a: Vec<HashCode> = (0..15).map(|_| HashCode { bits: rng.gen() }).collect();
        let b: Vec<HashCode> = (0..15).map(|_| HashCode { bits: rng.gen() }).collect();
        let mut prev = -1.0;
        for threshold in 0..=64 {
            let report = overlap_report(&a, &b, threshold).unwrap();
            assert!(report.overlap_percent >= prev);
            prev = report.overlap_percent;
        }
        assert_eq!(prev, 100.0);
    }

    #[test]
    fn indexed_report_equals_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a: Vec<HashCode> = (0..40).map(|_| HashCode { bits: rng.gen() }).collect();
        let mut b: Vec<HashCode> = (0..30).map(|_| HashCode { bits: rng.gen() }).collect();
        for i in 0..10 {
            let mut bits = a[i].bits;
            for _ in 0..rng.gen_range(0..4) {
                bits ^= 1 << rng.gen_range(0..64);
            }
            b[i] = HashCode { bits };
        }
        let index = OverlapIndex::build(&a);
        for threshold in [0, 1, 2, 3, 4, 8, 12] {
            assert_eq!(
                index.overlap_report(&b, threshold).unwrap(),
                overlap_report(&a, &b, threshold).unwrap(),
                "threshold {threshold}"
            );
        }
    }

    #[test]
    fn blur_moves_hash_only_slightly_on_structured_images() {
        let mut within = 0;
        let total = 30;
        for seed in 0..total {
            let image = synth::structured_image(seed, 64, 64);
            let d = hamming(phash(&image), phash(&box_blur3(&image)));
            if d <= 12 {
                within += 1;
            }
        }
        assert!(within * 100 >= total * 90, "only {within}/{total} within 12 bits");
    }

    #[test]
    fn hash_csv_round_trip() {
        let hashes = vec![
            ("img-a".to_string(), HashCode { bits: 0xdead_beef_0123_4567 }),
            ("img-b".to_string(), HashCode { bits: 0 }),
        ];
        let mut buf = Vec::new();
        write_hash_csv(&mut buf, &hashes).unwrap();
        let back = read_hash_csv(buf.as_slice()).unwrap();
        assert_eq!(back, hashes);
    }
}
