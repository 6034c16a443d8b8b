//! Quantized directions over [0°, 180°) and the per-direction offset tables.
//!
//! Conventions, inherited by every other module: the row axis points down
//! (screen convention) and angles are measured counter-clockwise from the
//! +column axis, so a step of length k along angle θ moves by
//! (−k·sinθ, k·cosθ) in (row, col).

use std::fmt;

use crate::image::Image;

/// Invalid direction-set or offset-table parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    /// Direction count must be even and at least 2.
    DirectionCount(usize),
    /// Samples per direction must be even, at least 2, and small enough that
    /// every offset fits in a signed byte.
    SampleCount(usize),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DirectionCount(n) => {
                write!(f, "direction count must be even, >= 2 and <= 256, got {n}")
            }
            GeometryError::SampleCount(n) => {
                write!(f, "samples per direction must be even, >= 2 and <= 254, got {n}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// N equally spaced directions covering [0°, 180°).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    angles: Vec<f64>,
}

impl DirectionSet {
    /// Builds `count` directions at angles d·(180/count) for d = 0..count.
    pub fn new(count: usize) -> Result<Self, GeometryError> {
        if count < 2 || !count.is_multiple_of(2) || count > 256 {
            return Err(GeometryError::DirectionCount(count));
        }
        let step = 180.0 / count as f64;
        Ok(DirectionSet {
            angles: (0..count).map(|d| d as f64 * step).collect(),
        })
    }

    /// Number of directions N.
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Angle of direction `d` in degrees.
    #[inline]
    pub fn angle(&self, d: usize) -> f64 {
        self.angles[d]
    }

    /// All angles in index order.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Signed (row, col) displacement to one sample pixel.
pub type Offset = (i8, i8);

/// Per-direction table of the n pixel offsets sampled around a center pixel.
///
/// Entries for one direction are the integer points nearest the ideal line
/// through the origin at that angle, n/2 on each side of the center,
/// symmetric under negation. Stored in line order: the negative side from
/// farthest to nearest, then the positive side from nearest to farthest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetRom {
    samples_per_direction: usize,
    entries: Vec<Vec<Offset>>,
}

impl OffsetRom {
    /// Generates the offset table for every direction in `dirs`.
    ///
    /// Walks k = 1, 2, … along each direction, rounding (−k·sinθ, k·cosθ)
    /// half-away-from-zero and keeping the first n/2 distinct points; the
    /// other side is their negation. Duplicate rounded points extend the walk
    /// outward, so the table always holds n distinct non-zero offsets.
    pub fn generate(dirs: &DirectionSet, samples: usize) -> Result<Self, GeometryError> {
        if samples < 2 || !samples.is_multiple_of(2) || samples > 254 {
            return Err(GeometryError::SampleCount(samples));
        }
        // Directions past 90° are the column-reflections of their mirrors in
        // the lower half-plane. Deriving them that way keeps the reflection
        // exact where trig rounding at half-integer boundaries (cos 120° in
        // doubles is a hair above -0.5) would otherwise break it.
        let count = dirs.len();
        let mut entries: Vec<Vec<Offset>> = Vec::with_capacity(count);
        for d in 0..count {
            if d <= count / 2 {
                entries.push(direction_offsets(dirs.angle(d), samples));
            } else {
                let mirrored = entries[count - d]
                    .iter()
                    .map(|&(a, b)| (a, -b))
                    .collect();
                entries.push(mirrored);
            }
        }
        Ok(OffsetRom {
            samples_per_direction: samples,
            entries,
        })
    }

    /// Number of directions N.
    pub fn direction_count(&self) -> usize {
        self.entries.len()
    }

    /// Samples per direction n.
    pub fn samples_per_direction(&self) -> usize {
        self.samples_per_direction
    }

    /// The n offsets for direction `d`, in line order.
    #[inline]
    pub fn offsets(&self, d: usize) -> &[Offset] {
        &self.entries[d]
    }

    /// Total entry count N·n.
    pub fn len(&self) -> usize {
        self.direction_count() * self.samples_per_direction
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest reach of any offset: (max |di|, max |dj|) over the whole table.
    ///
    /// A pixel whose distance to every image border is at least this reach
    /// has all of its sample addresses in bounds for every direction.
    pub fn reach(&self) -> (usize, usize) {
        let mut ri = 0usize;
        let mut rj = 0usize;
        for dir in &self.entries {
            for &(di, dj) in dir {
                ri = ri.max(di.unsigned_abs() as usize);
                rj = rj.max(dj.unsigned_abs() as usize);
            }
        }
        (ri, rj)
    }

    /// Dump in the `gen-offsets` text format: one `d k di dj` line per entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (d, dir) in self.entries.iter().enumerate() {
            for (k, &(di, dj)) in dir.iter().enumerate() {
                out.push_str(&format!("{d} {k} {di} {dj}\n"));
            }
        }
        out
    }
}

fn direction_offsets(angle_deg: f64, samples: usize) -> Vec<Offset> {
    let theta = angle_deg.to_radians();
    let (sin, cos) = (theta.sin(), theta.cos());
    let mut positive: Vec<Offset> = Vec::with_capacity(samples / 2);
    let mut k = 0f64;
    while positive.len() < samples / 2 {
        k += 1.0;
        let di = round_half_away(-k * sin);
        let dj = round_half_away(k * cos);
        debug_assert!(di.abs() <= 127 && dj.abs() <= 127);
        let p = (di as i8, dj as i8);
        if !positive.contains(&p) {
            positive.push(p);
        }
    }
    let mut offsets: Vec<Offset> = positive.iter().rev().map(|&(a, b)| (-a, -b)).collect();
    offsets.extend_from_slice(&positive);
    offsets
}

/// Round half away from zero; sign-symmetric, so negating the input negates
/// the output and offset tables stay closed under negation. Values within
/// 1e-9 of a half-integer count as halves, absorbing trig round-off at angles
/// like 30° whose ideal products land exactly on .5.
#[inline]
fn round_half_away(x: f64) -> i32 {
    let mag = (x.abs() + 0.5 + 1e-9).floor() as i32;
    if x < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Applies one offset to (i, j); `None` when the target falls outside `img`.
#[inline]
pub fn neighbor_address(i: usize, j: usize, entry: Offset, img: &Image) -> Option<(usize, usize)> {
    let ni = i as i64 + entry.0 as i64;
    let nj = j as i64 + entry.1 as i64;
    if img.contains(ni, nj) {
        Some((ni as usize, nj as usize))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn set(offs: &[Offset]) -> HashSet<Offset> {
        offs.iter().copied().collect()
    }

    #[test]
    fn sixteen_directions_cover_half_turn() {
        let dirs = DirectionSet::new(16).unwrap();
        let expected: Vec<f64> = (0..16).map(|d| d as f64 * 11.25).collect();
        assert_eq!(dirs.angles(), expected.as_slice());
    }

    #[test]
    fn two_directions() {
        let dirs = DirectionSet::new(2).unwrap();
        assert_eq!(dirs.angles(), &[0.0, 90.0]);
    }

    #[test]
    fn odd_or_tiny_counts_rejected() {
        assert_eq!(DirectionSet::new(3), Err(GeometryError::DirectionCount(3)));
        assert_eq!(DirectionSet::new(1), Err(GeometryError::DirectionCount(1)));
        assert_eq!(DirectionSet::new(0), Err(GeometryError::DirectionCount(0)));
        assert_eq!(DirectionSet::new(258), Err(GeometryError::DirectionCount(258)));
    }

    #[test]
    fn horizontal_offsets() {
        let dirs = DirectionSet::new(16).unwrap();
        let rom = OffsetRom::generate(&dirs, 8).unwrap();
        assert_eq!(
            rom.offsets(0),
            &[(0, -4), (0, -3), (0, -2), (0, -1), (0, 1), (0, 2), (0, 3), (0, 4)]
        );
    }

    #[test]
    fn vertical_offsets() {
        let dirs = DirectionSet::new(16).unwrap();
        let rom = OffsetRom::generate(&dirs, 8).unwrap();
        assert_eq!(
            rom.offsets(8),
            &[(4, 0), (3, 0), (2, 0), (1, 0), (-1, 0), (-2, 0), (-3, 0), (-4, 0)]
        );
    }

    #[test]
    fn diagonal_offsets_skip_duplicates() {
        // At 45° the rounded walk hits (-1,1) twice; the outward extension
        // must still produce four distinct points per side.
        let dirs = DirectionSet::new(16).unwrap();
        let rom = OffsetRom::generate(&dirs, 8).unwrap();
        let expected = [
            (4, -4),
            (3, -3),
            (2, -2),
            (1, -1),
            (-1, 1),
            (-2, 2),
            (-3, 3),
            (-4, 4),
        ];
        assert_eq!(rom.offsets(4), &expected);
    }

    #[test]
    fn default_table_has_128_entries() {
        let dirs = DirectionSet::new(16).unwrap();
        let rom = OffsetRom::generate(&dirs, 8).unwrap();
        assert_eq!(rom.len(), 128);
        assert_eq!(rom.dump().lines().count(), 128);
    }

    #[test]
    fn sample_count_validation() {
        let dirs = DirectionSet::new(16).unwrap();
        assert!(OffsetRom::generate(&dirs, 7).is_err());
        assert!(OffsetRom::generate(&dirs, 0).is_err());
        assert!(OffsetRom::generate(&dirs, 256).is_err());
        assert!(OffsetRom::generate(&dirs, 2).is_ok());
    }

    #[test]
    fn neighbor_addressing() {
        let img = Image::from_pixels(256, 256, vec![0; 256 * 256]);
        assert_eq!(neighbor_address(10, 10, (-4, 0), &img), Some((6, 10)));
        assert_eq!(neighbor_address(2, 2, (-4, 0), &img), None);
        assert_eq!(neighbor_address(255, 255, (0, 4), &img), None);
    }

    proptest! {
        #[test]
        fn offset_invariants(count in (1usize..16).prop_map(|x| x * 2),
                             samples in (1usize..8).prop_map(|x| x * 2)) {
            let dirs = DirectionSet::new(count).unwrap();
            let rom = OffsetRom::generate(&dirs, samples).unwrap();
            for d in 0..count {
                let offs = set(rom.offsets(d));
                // n distinct entries, none of them the center pixel
                prop_assert_eq!(offs.len(), samples);
                prop_assert!(!offs.contains(&(0, 0)));
                // closed under negation
                for &(a, b) in &offs {
                    prop_assert!(offs.contains(&(-a, -b)));
                }
                // within Chebyshev distance n/2 of the center
                for &(a, b) in &offs {
                    let reach = a.unsigned_abs().max(b.unsigned_abs()) as usize;
                    prop_assert!(reach <= samples / 2);
                }
                // mirror: angle 180-θ is the column negation
                let mirrored = (count - d) % count;
                let refl: HashSet<Offset> =
                    rom.offsets(mirrored).iter().map(|&(a, b)| (a, -b)).collect();
                prop_assert_eq!(&offs, &refl);
            }
        }
    }
}
