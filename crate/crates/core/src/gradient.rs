//! Gradient-based block orientation, the software baseline the pixel-based
//! estimator is validated against, plus angular error metrics.

use crate::geometry::DirectionSet;
use crate::image::{partition_blocks, Image};
use crate::orientation::BlockDirectionImage;

/// Per-block orientation angles in degrees, in [0, 180), with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleField {
    block_size: usize,
    rows: usize,
    cols: usize,
    angles: Vec<f64>,
    valid: Vec<bool>,
}

impl AngleField {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn angle(&self, bi: usize, bj: usize) -> f64 {
        self.angles[bi * self.cols + bj]
    }

    #[inline]
    pub fn is_valid(&self, bi: usize, bj: usize) -> bool {
        self.valid[bi * self.cols + bj]
    }

    /// Lifts a block direction image to its angles, keeping the validity mask.
    pub fn from_blocks(blocks: &BlockDirectionImage, dirs: &DirectionSet) -> Self {
        let mut angles = Vec::with_capacity(blocks.len());
        let mut valid = Vec::with_capacity(blocks.len());
        for bi in 0..blocks.rows() {
            for bj in 0..blocks.cols() {
                angles.push(dirs.angle(blocks.direction(bi, bj) as usize));
                valid.push(blocks.is_valid(bi, bj));
            }
        }
        AngleField {
            block_size: blocks.block_size(),
            rows: blocks.rows(),
            cols: blocks.cols(),
            angles,
            valid,
        }
    }
}

/// Smallest angular distance between two orientations, on the 180°-periodic
/// circle of undirected lines. Never exceeds 90°.
#[inline]
pub fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Averaged-squared-gradient orientation estimator.
///
/// Pixel gradients come from 3x3 central differences (image-border pixels are
/// excluded). Per block, the dominant orientation is
/// 90° + atan2(Σ 2·Gx·Gy, Σ (Gx² − Gy²)) / 2, with Gx along +col and Gy along
/// visual up (−row), normalized into [0, 180). A block with no gradient
/// energy has no orientation and is marked invalid.
pub fn gradient_orientation(img: &Image, block_size: usize) -> AngleField {
    let grid = partition_blocks(img, block_size);
    assert!(
        grid.rows() >= 1 && grid.cols() >= 1,
        "image smaller than one block"
    );
    let (h, w) = (img.height(), img.width());
    let mut angles = Vec::with_capacity(grid.len());
    let mut valid = Vec::with_capacity(grid.len());
    for bi in 0..grid.rows() {
        for bj in 0..grid.cols() {
            let mut vxy = 0.0f64;
            let mut vxx_minus_vyy = 0.0f64;
            for i in (bi * block_size).max(1)..((bi + 1) * block_size).min(h - 1) {
                for j in (bj * block_size).max(1)..((bj + 1) * block_size).min(w - 1) {
                    let gx = (img.pixel_at(i, j + 1) as f64 - img.pixel_at(i, j - 1) as f64) / 2.0;
                    let gy = (img.pixel_at(i - 1, j) as f64 - img.pixel_at(i + 1, j) as f64) / 2.0;
                    vxy += 2.0 * gx * gy;
                    vxx_minus_vyy += gx * gx - gy * gy;
                }
            }
            if vxy == 0.0 && vxx_minus_vyy == 0.0 {
                angles.push(0.0);
                valid.push(false);
            } else {
                let theta = 90.0 + 0.5 * vxy.atan2(vxx_minus_vyy).to_degrees();
                angles.push(theta.rem_euclid(180.0));
                valid.push(true);
            }
        }
    }
    AngleField {
        block_size,
        rows: grid.rows(),
        cols: grid.cols(),
        angles,
        valid,
    }
}

/// Maps each angle to the nearest quantized direction; ties break toward the
/// lower index and distances wrap, so 179° lands on index 0 when N = 16.
pub fn quantize_field(field: &AngleField, dirs: &DirectionSet) -> BlockDirectionImage {
    let mut out_dirs = Vec::with_capacity(field.rows * field.cols);
    for idx in 0..field.rows * field.cols {
        let angle = field.angles[idx];
        let mut best = 0usize;
        let mut best_dist = circular_diff_deg(angle, dirs.angle(0));
        for d in 1..dirs.len() {
            let dist = circular_diff_deg(angle, dirs.angle(d));
            if dist < best_dist {
                best = d;
                best_dist = dist;
            }
        }
        out_dirs.push(best as u8);
    }
    BlockDirectionImage::from_parts(
        field.block_size,
        field.rows,
        field.cols,
        out_dirs,
        field.valid.clone(),
    )
}

/// Angular error statistics between two fields, over blocks valid in both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Mean of squared circular differences, degrees².
    pub mean_squared_error: f64,
    /// Square root of the MSE, degrees.
    pub rms_error: f64,
    /// Mean of absolute circular differences, degrees.
    pub mean_abs_error: f64,
    /// Number of blocks the means run over.
    pub valid_blocks: usize,
}

/// Compares two angle fields block by block.
///
/// Differences are circular with period 180°, so 179° vs 1° counts as 2°.
/// Blocks invalid in either field are skipped; with no common valid block all
/// errors report as 0 with `valid_blocks == 0`.
pub fn error_metric(g: &AngleField, p: &AngleField) -> ErrorReport {
    assert_eq!(
        (g.rows, g.cols),
        (p.rows, p.cols),
        "angle fields must have matching dimensions"
    );
    let mut sq_sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    let mut count = 0usize;
    for idx in 0..g.angles.len() {
        if !g.valid[idx] || !p.valid[idx] {
            continue;
        }
        let d = circular_diff_deg(g.angles[idx], p.angles[idx]);
        sq_sum += d * d;
        abs_sum += d;
        count += 1;
    }
    if count == 0 {
        return ErrorReport {
            mean_squared_error: 0.0,
            rms_error: 0.0,
            mean_abs_error: 0.0,
            valid_blocks: 0,
        };
    }
    let mse = sq_sum / count as f64;
    ErrorReport {
        mean_squared_error: mse,
        rms_error: mse.sqrt(),
        mean_abs_error: abs_sum / count as f64,
        valid_blocks: count,
    }
}
