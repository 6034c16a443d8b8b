//! 8-bit grayscale images, PGM I/O, and block partitioning.

use std::fmt;

/// An 8-bit grayscale raster, `height` rows by `width` columns, row-major.
///
/// Immutable after construction; shared freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl Image {
    /// Builds an image from raw row-major pixel data.
    ///
    /// Panics if `pixels.len() != height * width`.
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(
            pixels.len(),
            height * width,
            "pixel buffer does not match {height}x{width}"
        );
        Image { height, width, pixels }
    }

    /// Number of pixel rows (H).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixel columns (L).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Raw row-major pixel data.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Gray value at row `i`, column `j`.
    ///
    /// Out-of-bounds indices are a contract violation; callers clip first.
    #[inline]
    pub fn pixel_at(&self, i: usize, j: usize) -> u8 {
        assert!(
            i < self.height && j < self.width,
            "pixel ({i}, {j}) outside {}x{} image",
            self.height,
            self.width
        );
        self.pixels[i * self.width + j]
    }

    /// True when (i, j) addresses a pixel of this image.
    #[inline]
    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.height && (j as usize) < self.width
    }

    /// New image with rows and columns swapped.
    pub fn transposed(&self) -> Image {
        let mut pixels = vec![0u8; self.pixels.len()];
        for i in 0..self.height {
            for j in 0..self.width {
                pixels[j * self.height + i] = self.pixels[i * self.width + j];
            }
        }
        Image::from_pixels(self.width, self.height, pixels)
    }

    /// New image with every gray value mapped through `f`.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> Image {
        Image {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Partition of an image into non-overlapping square blocks.
///
/// Only full blocks are kept; trailing rows/columns that do not fill a block
/// are excluded from block voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    block_size: usize,
    rows: usize,
    cols: usize,
}

impl BlockGrid {
    /// Pixels per block side.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Block-row count, `floor(H / block_size)`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Block-column count, `floor(L / block_size)`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Total number of full blocks.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits `img` into full `block_size`×`block_size` blocks.
///
/// Panics if `block_size` is zero.
pub fn partition_blocks(img: &Image, block_size: usize) -> BlockGrid {
    assert!(block_size >= 1, "block size must be at least 1");
    BlockGrid {
        block_size,
        rows: img.height() / block_size,
        cols: img.width() / block_size,
    }
}

/// PGM parse failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmError {
    /// Magic number, dimensions, or maxval are missing or not numeric.
    MalformedHeader(String),
    /// maxval above 255 (16-bit samples are not supported).
    UnsupportedMaxval(u32),
    /// Payload ends before height*width samples.
    TruncatedPayload { expected: usize, found: usize },
    /// An ASCII sample exceeds the declared maxval or is not a number.
    InvalidSample(String),
}

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgmError::MalformedHeader(what) => write!(f, "malformed PGM header: {what}"),
            PgmError::UnsupportedMaxval(v) => write!(f, "unsupported maxval {v} (must be <= 255)"),
            PgmError::TruncatedPayload { expected, found } => {
                write!(f, "truncated payload: expected {expected} samples, found {found}")
            }
            PgmError::InvalidSample(what) => write!(f, "invalid sample: {what}"),
        }
    }
}

impl std::error::Error for PgmError {}

/// Parses a binary (P5) or ASCII (P2) PGM with maxval ≤ 255.
///
/// Pixel values are taken verbatim; no rescaling to the maxval range.
pub fn load_pgm(bytes: &[u8]) -> Result<Image, PgmError> {
    let mut cursor = 0usize;
    let magic = next_header_token(bytes, &mut cursor)
        .ok_or_else(|| PgmError::MalformedHeader("missing magic number".into()))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => {
            return Err(PgmError::MalformedHeader(format!(
                "expected P2 or P5, found {other:?}"
            )))
        }
    };

    let width = parse_header_number(bytes, &mut cursor, "width")?;
    let height = parse_header_number(bytes, &mut cursor, "height")?;
    let maxval = parse_header_number(bytes, &mut cursor, "maxval")?;
    if maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval as u32));
    }
    if maxval == 0 {
        return Err(PgmError::MalformedHeader("maxval is zero".into()));
    }

    let expected = height * width;
    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the payload.
        if cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        let payload = &bytes[cursor.min(bytes.len())..];
        if payload.len() < expected {
            return Err(PgmError::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        payload[..expected].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            match next_header_token(bytes, &mut cursor) {
                Some(tok) => {
                    let v: u32 = tok
                        .parse()
                        .map_err(|_| PgmError::InvalidSample(format!("{tok:?} is not a number")))?;
                    if v > maxval as u32 {
                        return Err(PgmError::InvalidSample(format!(
                            "{v} exceeds maxval {maxval}"
                        )));
                    }
                    pixels.push(v as u8);
                }
                None => {
                    return Err(PgmError::TruncatedPayload {
                        expected,
                        found: pixels.len(),
                    })
                }
            }
        }
        pixels
    };

    Ok(Image::from_pixels(height, width, pixels))
}

/// Serializes an image as ASCII PGM (P2), for debug dumps.
pub fn write_pgm_p2(img: &Image) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    for row in img.pixels().chunks(img.width().max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.extend_from_slice(line.join(" ").as_bytes());
        out.push(b'\n');
    }
    out
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn next_header_token(bytes: &[u8], cursor: &mut usize) -> Option<String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    Some(String::from_utf8_lossy(&bytes[start..*cursor]).into_owned())
}

fn parse_header_number(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize, PgmError> {
    let tok = next_header_token(bytes, cursor)
        .ok_or_else(|| PgmError::MalformedHeader(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| PgmError::MalformedHeader(format!("{what} {tok:?} is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_ascii_p2() {
        let img = load_pgm(b"P2 2 2 255 0 10 20 30").unwrap();
        assert_eq!(img.height(), 2);
        assert_eq!(img.width(), 2);
        assert_eq!(img.pixels(), &[0, 10, 20, 30]);
    }

    #[test]
    fn parses_binary_p5_with_comment() {
        let img = load_pgm(b"P5\n# gimp comment\n3 2\n255\nABCDEF").unwrap();
        assert_eq!(img.height(), 2);
        assert_eq!(img.width(), 3);
        assert_eq!(img.pixels(), b"ABCDEF");
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = load_pgm(b"P5 2 2 65535 \x00\x00\x00\x00\x00\x00\x00\x00").unwrap_err();
        assert_eq!(err, PgmError::UnsupportedMaxval(65535));
    }

    #[test]
    fn rejects_truncated_p5() {
        let err = load_pgm(b"P5 2 2 255 \x01\x02\x03").unwrap_err();
        assert_eq!(err, PgmError::TruncatedPayload { expected: 4, found: 3 });
    }

    #[test]
    fn rejects_truncated_p2() {
        let err = load_pgm(b"P2 2 2 255 1 2 3").unwrap_err();
        assert_eq!(err, PgmError::TruncatedPayload { expected: 4, found: 3 });
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(load_pgm(b"P6 1 1 255 x"), Err(PgmError::MalformedHeader(_))));
        assert!(matches!(load_pgm(b""), Err(PgmError::MalformedHeader(_))));
        assert!(matches!(load_pgm(b"P2 a 1 255 0"), Err(PgmError::MalformedHeader(_))));
    }

    #[test]
    fn rejects_sample_above_maxval() {
        assert!(matches!(load_pgm(b"P2 1 1 100 101"), Err(PgmError::InvalidSample(_))));
    }

    #[test]
    fn pixel_at_is_row_major() {
        let img = load_pgm(b"P2 2 2 255 0 10 20 30").unwrap();
        assert_eq!(img.pixel_at(0, 1), 10);
        assert_eq!(img.pixel_at(1, 0), 20);
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn pixel_at_out_of_bounds_panics() {
        let img = load_pgm(b"P2 2 2 255 0 10 20 30").unwrap();
        img.pixel_at(2, 0);
    }

    #[test]
    fn partition_counts() {
        let img = Image::from_pixels(256, 256, vec![0; 256 * 256]);
        let grid = partition_blocks(&img, 16);
        assert_eq!((grid.rows(), grid.cols()), (16, 16));
        assert_eq!(grid.len(), 256);

        let img = Image::from_pixels(16, 16, vec![0; 256]);
        assert_eq!(partition_blocks(&img, 16).len(), 1);

        let img = Image::from_pixels(20, 33, vec![0; 20 * 33]);
        let grid = partition_blocks(&img, 16);
        assert_eq!((grid.rows(), grid.cols()), (1, 2));
    }

    #[test]
    #[should_panic(expected = "block size")]
    fn partition_rejects_zero_block() {
        let img = Image::from_pixels(4, 4, vec![0; 16]);
        partition_blocks(&img, 0);
    }

    #[test]
    fn transpose_involution() {
        let img = Image::from_pixels(2, 3, vec![1, 2, 3, 4, 5, 6]);
        let t = img.transposed();
        assert_eq!(t.pixel_at(2, 1), img.pixel_at(1, 2));
        assert_eq!(t.transposed(), img);
    }

    proptest! {
        #[test]
        fn p2_round_trip(h in 1usize..12, w in 1usize..12, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let pixels: Vec<u8> = (0..h * w).map(|_| rng.random()).collect();
            let img = Image::from_pixels(h, w, pixels);
            let reloaded = load_pgm(&write_pgm_p2(&img)).unwrap();
            prop_assert_eq!(reloaded, img);
        }

        #[test]
        fn blocks_stay_in_bounds(h in 1usize..64, w in 1usize..64, b in 1usize..20) {
            let img = Image::from_pixels(h, w, vec![0; h * w]);
            let grid = partition_blocks(&img, b);
            // last pixel of the last block is inside the image
            if !grid.is_empty() {
                let max_row = grid.rows() * b - 1;
                let max_col = grid.cols() * b - 1;
                prop_assert!(max_row < h && max_col < w);
                prop_assert!(max_row * w + max_col < h * w);
            }
        }
    }
}
