//! Synthetic test images with known ridge orientation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Image;

/// Signed distance of pixel (i, j) from the ridge-phase origin, measured
/// across ridges running at `angle_deg`. Row axis points down, angles are
/// counter-clockwise from the +column axis, so a ridge at angle θ is constant
/// along (−sinθ, cosθ) and its phase advances along (cosθ, sinθ) in (row, col).
fn ridge_phase(i: usize, j: usize, angle_deg: f64) -> f64 {
    let theta = angle_deg.to_radians();
    i as f64 * theta.cos() + j as f64 * theta.sin()
}

/// Sinusoidal ridge pattern: full 0..=255 swing, ridges at `angle_deg`,
/// repeating every `period` pixels.
pub fn sinusoid(height: usize, width: usize, angle_deg: f64, period: f64) -> Image {
    assert!(period > 0.0, "period must be positive");
    let pixels = (0..height * width)
        .map(|p| {
            let (i, j) = (p / width, p % width);
            let phase = 2.0 * std::f64::consts::PI * ridge_phase(i, j, angle_deg) / period;
            let v = 128.0 + 127.0 * phase.cos();
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::from_pixels(height, width, pixels)
}

/// Hard-edged stripe pattern: the square wave with the same phase convention
/// as [`sinusoid`], alternating 0 and 255 every `period / 2` pixels.
pub fn stripes(height: usize, width: usize, angle_deg: f64, period: f64) -> Image {
    assert!(period > 0.0, "period must be positive");
    let pixels = (0..height * width)
        .map(|p| {
            let (i, j) = (p / width, p % width);
            let cycles = ridge_phase(i, j, angle_deg) / period;
            let frac = cycles - cycles.floor();
            if frac < 0.5 {
                255
            } else {
                0
            }
        })
        .collect();
    Image::from_pixels(height, width, pixels)
}

/// Independent uniform noise, reproducible from `seed`.
pub fn noise(height: usize, width: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..height * width).map(|_| rng.random()).collect();
    Image::from_pixels(height, width, pixels)
}

/// Constant-intensity image.
pub fn uniform(height: usize, width: usize, value: u8) -> Image {
    Image::from_pixels(height, width, vec![value; height * width])
}
