//! Arithmetic units of the sum-of-absolute-differences datapath.
//!
//! Everything here mirrors the hardware word widths: pixels are u8, one
//! absolute difference fits in u8, and a sum of n <= 255 differences fits in
//! u16 (11 bits suffice for the default n = 8, worst case 8 * 255 = 2040).

use crate::geometry::{neighbor_address, OffsetRom};
use crate::image::Image;

/// Absolute value of difference between two pixels.
#[inline]
pub fn avd(a: u8, b: u8) -> u8 {
    a.abs_diff(b)
}

/// Balanced adder tree over u16 terms.
///
/// Pairs adjacent elements layer by layer, odd element carried through, until
/// one sum remains. Matches a hardware reduction tree; for commutative
/// addition the result equals the sequential sum, asserted in tests.
pub fn adder_tree(terms: &[u16]) -> u16 {
    debug_assert!(!terms.is_empty());
    let mut layer: Vec<u16> = terms.to_vec();
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2 + 1);
        let mut it = layer.chunks_exact(2);
        for pair in &mut it {
            next.push(pair[0] + pair[1]);
        }
        if let [odd] = it.remainder() {
            next.push(*odd);
        }
        layer = next;
    }
    layer[0]
}

/// Sum-of-differences computation unit: one direction, one center pixel.
///
/// Computes the AVD between the center value and each of the n neighbor
/// values, then reduces through the adder tree.
pub fn sdcu(center: u8, neighbors: &[u8]) -> u16 {
    let terms: Vec<u16> = neighbors.iter().map(|&v| avd(center, v) as u16).collect();
    adder_tree(&terms)
}

/// Per-pixel result of running all N SdCUs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdVector {
    /// S_d for each direction d.
    pub sums: Vec<u16>,
    /// In-bounds neighbor count per direction; sums skip the rest.
    pub valid_counts: Vec<usize>,
}

impl SdVector {
    /// True when every direction saw its full complement of n neighbors.
    pub fn fully_valid(&self, samples: usize) -> bool {
        self.valid_counts.iter().all(|&c| c == samples)
    }
}

/// Runs all N direction units for the pixel at (i, j).
///
/// Neighbors falling outside the image contribute nothing; `valid_counts`
/// records how many samples each direction actually saw so the caller can
/// decide whether the pixel's vote is trustworthy.
pub fn compute_sd_vector(img: &Image, i: usize, j: usize, rom: &OffsetRom) -> SdVector {
    let center = img.pixel_at(i, j);
    let n_dirs = rom.direction_count();
    let mut sums = Vec::with_capacity(n_dirs);
    let mut valid_counts = Vec::with_capacity(n_dirs);
    for d in 0..n_dirs {
        let mut terms: Vec<u16> = Vec::with_capacity(rom.samples_per_direction());
        for &off in rom.offsets(d) {
            if let Some((ni, nj)) = neighbor_address(i, j, off, img) {
                terms.push(avd(center, img.pixel_at(ni, nj)) as u16);
            }
        }
        valid_counts.push(terms.len());
        sums.push(if terms.is_empty() { 0 } else { adder_tree(&terms) });
    }
    SdVector { sums, valid_counts }
}
