//! Per-pixel direction selection and per-block histogram voting.
//!
//! A pixel's direction is the argmin of its S_d vector, picked by a tournament
//! tree of comparator switches. Directions of the pixels inside a block are
//! voted into saturating 8-bit counters and the block takes the argmax, again
//! through a switch tree. Ties break toward the lower index in both trees.

use std::fmt;

use crate::datapath::compute_sd_vector;
use crate::geometry::{DirectionSet, OffsetRom};
use crate::image::{partition_blocks, Image};

/// Index of one quantized direction, in [0, N).
pub type DirectionIndex = u8;

/// The 15-bit record routed through the Minimum tree: an 11-bit sum paired
/// with the 4-bit index of the direction it belongs to (widths for N = 16,
/// n = 8; the model is exact for any supported N and n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchPayload {
    pub sd: u16,
    pub index: DirectionIndex,
}

/// One comparator switch: routes the payload with the smaller sum, keeping
/// the first input on ties. Paired in input order, that convention makes the
/// whole tree resolve ties toward the lower index.
#[inline]
fn min_switch(a: SwitchPayload, b: SwitchPayload) -> SwitchPayload {
    if b.sd < a.sd {
        b
    } else {
        a
    }
}

/// Tournament tree over N payloads; returns the one with the smallest sum.
///
/// Built from N−1 switches when N is a power of two: N/2 in the first layer,
/// halving thereafter. Odd layer widths carry the last element through.
pub fn minimum_tree(payloads: &[SwitchPayload]) -> SwitchPayload {
    assert!(!payloads.is_empty(), "minimum tree needs at least one payload");
    let mut layer = payloads.to_vec();
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2 + 1);
        let mut it = layer.chunks_exact(2);
        for pair in &mut it {
            next.push(min_switch(pair[0], pair[1]));
        }
        if let [odd] = it.remainder() {
            next.push(*odd);
        }
        layer = next;
    }
    layer[0]
}

/// Argmax tournament over the N direction counters; ties break toward the
/// lower index. Mirrors [`minimum_tree`] with the comparison flipped.
pub fn maximum_tree(counts: &[u8]) -> DirectionIndex {
    assert!(!counts.is_empty(), "maximum tree needs at least one count");
    let mut layer: Vec<(u8, DirectionIndex)> = counts
        .iter()
        .enumerate()
        .map(|(d, &c)| (c, d as DirectionIndex))
        .collect();
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2 + 1);
        let mut it = layer.chunks_exact(2);
        for pair in &mut it {
            next.push(if pair[1].0 > pair[0].0 { pair[1] } else { pair[0] });
        }
        if let [odd] = it.remainder() {
            next.push(*odd);
        }
        layer = next;
    }
    layer[0].1
}

/// Direction of the pixel at (i, j), or `None` for border pixels.
///
/// A pixel votes only when every direction saw all n of its neighbors;
/// otherwise the truncated sums would bias the argmin toward directions that
/// lost the most samples.
pub fn pixel_direction(img: &Image, i: usize, j: usize, rom: &OffsetRom) -> Option<DirectionIndex> {
    let v = compute_sd_vector(img, i, j, rom);
    if !v.fully_valid(rom.samples_per_direction()) {
        return None;
    }
    let payloads: Vec<SwitchPayload> = v
        .sums
        .iter()
        .enumerate()
        .map(|(d, &sd)| SwitchPayload { sd, index: d as DirectionIndex })
        .collect();
    Some(minimum_tree(&payloads).index)
}

/// N saturating 8-bit counters, one per direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionHistogram {
    counters: Vec<u8>,
}

impl DirectionHistogram {
    pub fn new(direction_count: usize) -> Self {
        DirectionHistogram { counters: vec![0; direction_count] }
    }

    /// Adds one vote; the counter sticks at 255 instead of wrapping.
    #[inline]
    pub fn vote(&mut self, d: DirectionIndex) {
        let c = &mut self.counters[d as usize];
        *c = c.saturating_add(1);
    }

    pub fn counts(&self) -> &[u8] {
        &self.counters
    }

    /// Winning direction and whether any vote was cast at all.
    pub fn winner(&self) -> (DirectionIndex, bool) {
        let any = self.counters.iter().any(|&c| c > 0);
        (maximum_tree(&self.counters), any)
    }
}

/// Direction of one block: histogram over the block's voting pixels, then the
/// Maximum tree. `valid` is false when no pixel in the block voted.
pub fn block_direction(
    img: &Image,
    block_size: usize,
    bi: usize,
    bj: usize,
    rom: &OffsetRom,
) -> (DirectionIndex, bool) {
    let mut hist = DirectionHistogram::new(rom.direction_count());
    for i in bi * block_size..(bi + 1) * block_size {
        for j in bj * block_size..(bj + 1) * block_size {
            if let Some(d) = pixel_direction(img, i, j, rom) {
                hist.vote(d);
            }
        }
    }
    hist.winner()
}

/// Per-block winning directions over the image's full blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDirectionImage {
    block_size: usize,
    rows: usize,
    cols: usize,
    dirs: Vec<DirectionIndex>,
    valid: Vec<bool>,
}

impl BlockDirectionImage {
    pub(crate) fn from_parts(
        block_size: usize,
        rows: usize,
        cols: usize,
        dirs: Vec<DirectionIndex>,
        valid: Vec<bool>,
    ) -> Self {
        assert_eq!(dirs.len(), rows * cols);
        assert_eq!(valid.len(), rows * cols);
        BlockDirectionImage { block_size, rows, cols, dirs, valid }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn direction(&self, bi: usize, bj: usize) -> DirectionIndex {
        self.dirs[bi * self.cols + bj]
    }

    #[inline]
    pub fn is_valid(&self, bi: usize, bj: usize) -> bool {
        self.valid[bi * self.cols + bj]
    }

    /// Fraction of valid blocks, for quick reporting.
    pub fn valid_fraction(&self) -> f64 {
        if self.valid.is_empty() {
            return 0.0;
        }
        self.valid.iter().filter(|&&v| v).count() as f64 / self.valid.len() as f64
    }

    /// Text export: one `row col d angle_degrees valid` line per block,
    /// row-major, valid written as 1/0. Angles come from `dirs`, so the file
    /// is self-describing without knowing N.
    pub fn to_text(&self, dirs: &DirectionSet) -> String {
        let mut out = String::new();
        for bi in 0..self.rows {
            for bj in 0..self.cols {
                let d = self.direction(bi, bj);
                let v = if self.is_valid(bi, bj) { 1 } else { 0 };
                out.push_str(&format!("{bi} {bj} {d} {} {v}\n", dirs.angle(d as usize)));
            }
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format back. The grid shape is
    /// recovered from the indices; every block must appear exactly once.
    pub fn from_text(s: &str, block_size: usize) -> Result<Self, FieldTextError> {
        let mut parsed: Vec<(usize, usize, DirectionIndex, bool)> = Vec::new();
        let mut rows = 0usize;
        let mut cols = 0usize;
        for (ln, line) in s.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(FieldTextError::Malformed {
                    line: ln + 1,
                    reason: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let bi: usize = parse_field(fields[0], ln)?;
            let bj: usize = parse_field(fields[1], ln)?;
            let d: u8 = parse_field(fields[2], ln)?;
            let valid = match fields[4] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(FieldTextError::Malformed {
                        line: ln + 1,
                        reason: format!("valid flag must be 0 or 1, found {other:?}"),
                    })
                }
            };
            rows = rows.max(bi + 1);
            cols = cols.max(bj + 1);
            parsed.push((bi, bj, d, valid));
        }
        if parsed.is_empty() {
            return Err(FieldTextError::Empty);
        }
        let found = parsed.len();
        let mut dirs = vec![0u8; rows * cols];
        let mut valid = vec![false; rows * cols];
        let mut seen = vec![false; rows * cols];
        for (bi, bj, d, v) in parsed {
            let idx = bi * cols + bj;
            if seen[idx] {
                return Err(FieldTextError::DuplicateBlock { row: bi, col: bj });
            }
            seen[idx] = true;
            dirs[idx] = d;
            valid[idx] = v;
        }
        if found != rows * cols {
            return Err(FieldTextError::IncompleteGrid {
                expected: rows * cols,
                found,
            });
        }
        Ok(BlockDirectionImage { block_size, rows, cols, dirs, valid })
    }

    /// Binary export of the 4-bit indices: two blocks per byte row-major,
    /// first block in the high nibble, invalid blocks written as 0xF. A
    /// trailing odd nibble is padded with 0xF. Only meaningful for N ≤ 16;
    /// validity is carried by the separate mask (see
    /// [`to_mask_text`](Self::to_mask_text)), which disambiguates a valid
    /// direction 15 from an invalid block.
    pub fn to_packed(&self) -> Vec<u8> {
        let nibble = |idx: usize| -> u8 {
            if self.valid[idx] {
                debug_assert!(self.dirs[idx] < 16);
                self.dirs[idx] & 0x0F
            } else {
                0x0F
            }
        };
        let total = self.rows * self.cols;
        let mut out = Vec::with_capacity(total / 2 + 1);
        let mut idx = 0;
        while idx + 1 < total {
            out.push((nibble(idx) << 4) | nibble(idx + 1));
            idx += 2;
        }
        if idx < total {
            out.push((nibble(idx) << 4) | 0x0F);
        }
        out
    }

    /// Validity mask as text: one row of 1/0 characters per block row.
    pub fn to_mask_text(&self) -> String {
        let mut out = String::new();
        for bi in 0..self.rows {
            for bj in 0..self.cols {
                out.push(if self.is_valid(bi, bj) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, ln: usize) -> Result<T, FieldTextError> {
    s.parse().map_err(|_| FieldTextError::Malformed {
        line: ln + 1,
        reason: format!("cannot parse {s:?}"),
    })
}

/// Failures reading the text orientation-field format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldTextError {
    Empty,
    Malformed { line: usize, reason: String },
    IncompleteGrid { expected: usize, found: usize },
    DuplicateBlock { row: usize, col: usize },
}

impl fmt::Display for FieldTextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTextError::Empty => write!(f, "field file contains no blocks"),
            FieldTextError::Malformed { line, reason } => {
                write!(f, "line {line}: {reason}")
            }
            FieldTextError::IncompleteGrid { expected, found } => {
                write!(f, "grid incomplete: expected {expected} blocks, found {found}")
            }
            FieldTextError::DuplicateBlock { row, col } => {
                write!(f, "block ({row}, {col}) listed twice")
            }
        }
    }
}

impl std::error::Error for FieldTextError {}

/// Runs the full estimator: per-pixel argmin, per-block voting, over every
/// full `block_size` block of `img`.
pub fn estimate_orientation_field(
    img: &Image,
    rom: &OffsetRom,
    block_size: usize,
) -> BlockDirectionImage {
    let grid = partition_blocks(img, block_size);
    assert!(
        grid.rows() >= 1 && grid.cols() >= 1,
        "image smaller than one block"
    );
    let mut dirs = Vec::with_capacity(grid.len());
    let mut valid = Vec::with_capacity(grid.len());
    for bi in 0..grid.rows() {
        for bj in 0..grid.cols() {
            let (d, v) = block_direction(img, block_size, bi, bj, rom);
            dirs.push(d);
            valid.push(v);
        }
    }
    BlockDirectionImage {
        block_size,
        rows: grid.rows(),
        cols: grid.cols(),
        dirs,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_rom() -> OffsetRom {
        OffsetRom::generate(&DirectionSet::new(16).unwrap(), 8).unwrap()
    }

    fn payloads(sds: &[u16]) -> Vec<SwitchPayload> {
        sds.iter()
            .enumerate()
            .map(|(d, &sd)| SwitchPayload { sd, index: d as u8 })
            .collect()
    }

    fn flat_argmin(sds: &[u16]) -> u8 {
        let mut best = 0usize;
        for (d, &sd) in sds.iter().enumerate() {
            if sd < sds[best] {
                best = d;
            }
        }
        best as u8
    }

    #[test]
    fn minimum_tree_picks_unique_minimum() {
        let mut sds = vec![100u16; 16];
        sds[0] = 5;
        sds[1] = 3;
        sds[2] = 9;
        assert_eq!(minimum_tree(&payloads(&sds)).index, 1);
    }

    #[test]
    fn minimum_tree_all_ties_to_zero() {
        assert_eq!(minimum_tree(&payloads(&[42; 16])).index, 0);
    }

    #[test]
    fn minimum_tree_reports_index_four() {
        let mut sds = vec![900u16; 16];
        sds[4] = 17;
        let out = minimum_tree(&payloads(&sds));
        assert_eq!(out.index, 4);
        assert_eq!(out.sd, 17);
    }

    #[test]
    fn maximum_tree_cases() {
        let mut counts = [0u8; 16];
        counts[7] = 200;
        assert_eq!(maximum_tree(&counts), 7);

        let mut counts = [0u8; 16];
        counts[3] = 50;
        counts[12] = 50;
        assert_eq!(maximum_tree(&counts), 3);

        assert_eq!(maximum_tree(&[0u8; 16]), 0);
    }

    #[test]
    fn trees_match_flat_scans_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..10_000 {
            let sds: Vec<u16> = (0..16).map(|_| rng.random_range(0..=2040)).collect();
            assert_eq!(minimum_tree(&payloads(&sds)).index, flat_argmin(&sds));

            let counts: Vec<u8> = (0..16).map(|_| rng.random()).collect();
            let flat = counts
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|&(_, &c)| c)
                .map(|(d, _)| d as u8)
                .unwrap();
            assert_eq!(maximum_tree(&counts), flat);
        }
    }

    #[test]
    fn stripe_pixel_votes_horizontal() {
        let img = synth::stripes(32, 32, 0.0, 2.0);
        assert_eq!(pixel_direction(&img, 16, 16, &default_rom()), Some(0));
    }

    #[test]
    fn uniform_pixel_ties_to_zero() {
        let img = synth::uniform(32, 32, 128);
        assert_eq!(pixel_direction(&img, 16, 16, &default_rom()), Some(0));
    }

    #[test]
    fn border_pixel_does_not_vote() {
        let img = synth::uniform(32, 32, 128);
        assert_eq!(pixel_direction(&img, 1, 1, &default_rom()), None);
        assert_eq!(pixel_direction(&img, 3, 16, &default_rom()), None);
        assert_eq!(pixel_direction(&img, 4, 4, &default_rom()), Some(0));
    }

    #[test]
    fn histogram_saturates_without_wrapping() {
        let mut hist = DirectionHistogram::new(16);
        for _ in 0..300 {
            hist.vote(5);
        }
        assert_eq!(hist.counts()[5], 255);
        assert_eq!(hist.winner(), (5, true));
    }

    #[test]
    fn histogram_majority_wins() {
        let mut hist = DirectionHistogram::new(16);
        for _ in 0..200 {
            hist.vote(2);
        }
        for _ in 0..56 {
            hist.vote(9);
        }
        assert_eq!(hist.winner(), (2, true));
    }

    #[test]
    fn empty_histogram_flags_invalid() {
        let hist = DirectionHistogram::new(16);
        assert_eq!(hist.winner(), (0, false));
    }

    #[test]
    fn block_without_voters_is_invalid() {
        // 8×8 image: every pixel is within 4 of a border, so nothing votes.
        let img = synth::uniform(8, 8, 100);
        let (_, valid) = block_direction(&img, 8, 0, 0, &default_rom());
        assert!(!valid);
    }

    #[test]
    fn saturated_unanimous_block_still_wins() {
        // 32×32 uniform, center block: all 256 pixels vote direction 0 and
        // the counter clips at 255 without disturbing the argmax.
        let img = synth::uniform(48, 48, 60);
        let (d, valid) = block_direction(&img, 16, 1, 1, &default_rom());
        assert_eq!((d, valid), (0, true));
    }

    #[test]
    fn stripe_field_is_all_horizontal() {
        let img = synth::stripes(64, 64, 0.0, 2.0);
        let field = estimate_orientation_field(&img, &default_rom(), 16);
        assert_eq!((field.rows(), field.cols()), (4, 4));
        for bi in 0..4 {
            for bj in 0..4 {
                assert!(field.is_valid(bi, bj));
                assert_eq!(field.direction(bi, bj), 0);
            }
        }
    }

    #[test]
    fn uniform_field_ties_to_zero_everywhere() {
        let img = synth::uniform(64, 64, 128);
        let field = estimate_orientation_field(&img, &default_rom(), 16);
        for bi in 0..field.rows() {
            for bj in 0..field.cols() {
                assert!(field.is_valid(bi, bj));
                assert_eq!(field.direction(bi, bj), 0);
            }
        }
    }

    #[test]
    fn diagonal_sinusoid_elects_direction_four() {
        let img = synth::sinusoid(64, 64, 45.0, 8.0);
        let field = estimate_orientation_field(&img, &default_rom(), 16);
        for bi in 0..field.rows() {
            for bj in 0..field.cols() {
                assert!(field.is_valid(bi, bj));
                assert_eq!(field.direction(bi, bj), 4, "block ({bi},{bj})");
            }
        }
    }

    #[test]
    fn brightness_shift_and_inversion_leave_field_unchanged() {
        let img = synth::sinusoid(64, 64, 67.5, 8.0).map(|v| v / 2);
        let rom = default_rom();
        let base = estimate_orientation_field(&img, &rom, 16);
        let shifted = estimate_orientation_field(&img.map(|v| v + 100), &rom, 16);
        let inverted = estimate_orientation_field(&img.map(|v| 255 - v), &rom, 16);
        assert_eq!(base, shifted);
        assert_eq!(base, inverted);
    }

    #[test]
    fn transpose_reflects_directions_across_45_degrees() {
        let rom = default_rom();
        for d in 0..16usize {
            let angle = d as f64 * 11.25;
            let img = synth::sinusoid(64, 64, angle, 8.0);
            let field = estimate_orientation_field(&img, &rom, 16);
            let tfield = estimate_orientation_field(&img.transposed(), &rom, 16);
            for bi in 0..field.rows() {
                for bj in 0..field.cols() {
                    if !field.is_valid(bi, bj) || !tfield.is_valid(bj, bi) {
                        continue;
                    }
                    let expect = (8 + 16 - field.direction(bi, bj)) % 16;
                    assert_eq!(tfield.direction(bj, bi), expect, "angle {angle}");
                }
            }
        }
    }

    #[test]
    fn text_format_round_trips() {
        let img = synth::sinusoid(64, 48, 33.75, 8.0);
        let dirs = DirectionSet::new(16).unwrap();
        let field = estimate_orientation_field(&img, &default_rom(), 16);
        let text = field.to_text(&dirs);
        let back = BlockDirectionImage::from_text(&text, 16).unwrap();
        assert_eq!(field, back);
        assert!(text.lines().next().unwrap().ends_with(" 1"));
    }

    #[test]
    fn text_parse_rejects_bad_input() {
        assert_eq!(BlockDirectionImage::from_text("", 16), Err(FieldTextError::Empty));
        assert!(matches!(
            BlockDirectionImage::from_text("0 0 1 11.25\n", 16),
            Err(FieldTextError::Malformed { line: 1, .. })
        ));
        assert_eq!(
            BlockDirectionImage::from_text("0 1 0 0 1\n", 16),
            Err(FieldTextError::IncompleteGrid { expected: 2, found: 1 })
        );
        assert_eq!(
            BlockDirectionImage::from_text("0 0 1 11.25 1\n0 0 2 22.5 0\n", 16),
            Err(FieldTextError::DuplicateBlock { row: 0, col: 0 })
        );
    }

    #[test]
    fn packed_dump_encodes_nibbles() {
        let field = BlockDirectionImage {
            block_size: 16,
            rows: 1,
            cols: 5,
            dirs: vec![3, 15, 0, 9, 2],
            valid: vec![true, true, false, true, true],
        };
        // valid 15 and invalid both read 0xF in the dump; the mask separates them
        assert_eq!(field.to_packed(), vec![0x3F, 0xF9, 0x2F]);
        assert_eq!(field.to_mask_text(), "11011\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tree_equals_flat_argmin(sds in proptest::collection::vec(0u16..=2040, 2..33)) {
            prop_assert_eq!(minimum_tree(&payloads(&sds)).index, flat_argmin(&sds));
        }

        #[test]
        fn saturation_preserves_block_winner(votes in proptest::collection::vec(0usize..16, 0..=256)) {
            // Any histogram a real 16×16 block can produce has at most 256
            // total votes; compare wide counters against the 8-bit ones.
            let mut wide = [0u32; 16];
            let mut hist = DirectionHistogram::new(16);
            for &d in &votes {
                wide[d] += 1;
                hist.vote(d as u8);
            }
            let flat = (0..16).rev().max_by_key(|&d| wide[d]).unwrap() as u8;
            prop_assert_eq!(hist.winner().0, flat);
        }
    }
}
