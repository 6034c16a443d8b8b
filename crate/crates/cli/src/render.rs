//! Orientation field rendering: line segments centered on each valid block,
//! at the block's angle, 0.75 of the block side long.

use std::fmt::Write as _;

use ridgefield::geometry::DirectionSet;
use ridgefield::image::Image;
use ridgefield::orientation::BlockDirectionImage;

/// Endpoints of the segment for block (bi, bj), in (row, col) coordinates.
/// The segment runs along the ridge direction (-sin θ, cos θ).
fn segment(
    field: &BlockDirectionImage,
    dirs: &DirectionSet,
    bi: usize,
    bj: usize,
) -> ((f64, f64), (f64, f64)) {
    let bs = field.block_size() as f64;
    let half = 0.75 * bs / 2.0;
    let ci = (bi as f64 + 0.5) * bs;
    let cj = (bj as f64 + 0.5) * bs;
    let theta = dirs
        .angle(field.direction(bi, bj) as usize)
        .to_radians();
    let (di, dj) = (-theta.sin(), theta.cos());
    (
        (ci - half * di, cj - half * dj),
        (ci + half * di, cj + half * dj),
    )
}

/// Vector rendering: black segments on white, one per valid block.
pub fn field_svg(field: &BlockDirectionImage, dirs: &DirectionSet) -> String {
    let w = field.cols() * field.block_size();
    let h = field.rows() * field.block_size();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    for bi in 0..field.rows() {
        for bj in 0..field.cols() {
            if !field.is_valid(bi, bj) {
                continue;
            }
            let ((i0, j0), (i1, j1)) = segment(field, dirs, bi, bj);
            let _ = writeln!(
                svg,
                "<line x1=\"{j0:.2}\" y1=\"{i0:.2}\" x2=\"{j1:.2}\" y2=\"{i1:.2}\" stroke=\"black\" stroke-width=\"1\"/>"
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Raster overlay: the grayscale image as RGB with red segments drawn over it.
pub fn field_ppm_overlay(
    field: &BlockDirectionImage,
    dirs: &DirectionSet,
    img: &Image,
) -> Vec<u8> {
    let (h, w) = (img.height(), img.width());
    let mut rgb: Vec<u8> = Vec::with_capacity(h * w * 3);
    for &v in img.pixels() {
        rgb.extend_from_slice(&[v, v, v]);
    }
    for bi in 0..field.rows() {
        for bj in 0..field.cols() {
            if !field.is_valid(bi, bj) {
                continue;
            }
            let ((i0, j0), (i1, j1)) = segment(field, dirs, bi, bj);
            draw_line(
                &mut rgb,
                h,
                w,
                (i0.round() as i64, j0.round() as i64),
                (i1.round() as i64, j1.round() as i64),
            );
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&rgb);
    out
}

fn draw_line(rgb: &mut [u8], h: usize, w: usize, from: (i64, i64), to: (i64, i64)) {
    let (mut i0, mut j0) = from;
    let (i1, j1) = to;
    let di = -(i1 - i0).abs();
    let dj = (j1 - j0).abs();
    let si = if i0 < i1 { 1 } else { -1 };
    let sj = if j0 < j1 { 1 } else { -1 };
    let mut err = dj + di;
    loop {
        if i0 >= 0 && j0 >= 0 && (i0 as usize) < h && (j0 as usize) < w {
            let at = (i0 as usize * w + j0 as usize) * 3;
            rgb[at] = 255;
            rgb[at + 1] = 0;
            rgb[at + 2] = 0;
        }
        if i0 == i1 && j0 == j1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= di {
            err += di;
            j0 += sj;
        }
        if e2 <= dj {
            err += dj;
            i0 += si;
        }
    }
}
