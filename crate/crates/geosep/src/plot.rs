//! Bare line plots rendered straight to an RGB PNG. No text: the CSV next
//! to every plot carries the numbers.

use std::path::Path;

use crate::error::Result;
use crate::io::write_png;

pub type Rgb = [u8; 3];

pub const RED: Rgb = [200, 30, 30];
pub const BLUE: Rgb = [30, 60, 200];
const GRID: Rgb = [225, 225, 225];
const AXIS: Rgb = [0, 0, 0];

pub struct Series<'a> {
    pub points: &'a [(f64, f64)],
    pub color: Rgb,
}

pub struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![255; width * height * 3],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, color: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = 3 * (y as usize * self.width + x as usize);
            self.pixels[i..i + 3].copy_from_slice(&color);
        }
    }

    /// Bresenham segment, `thickness` pixels square brush.
    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: Rgb, thickness: i64) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        let lo = -(thickness - 1) / 2;
        loop {
            for ox in lo..lo + thickness {
                for oy in lo..lo + thickness {
                    self.put(x + ox, y + oy, color);
                }
            }
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_png(path, self.width, self.height, png::ColorType::Rgb, png::BitDepth::Eight, &self.pixels)
    }
}

/// Plot of `series` over `x ∈ [0, 1]`, `y ∈ [0, max(1, largest y)]`, with a
/// 0.1 grid in x and y.
pub fn line_plot(series: &[Series<'_>], width: usize, height: usize) -> Canvas {
    const MARGIN: i64 = 30;
    let mut canvas = Canvas::new(width, height);
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max);
    let y_max = (y_max * 10.0).ceil() / 10.0;
    let (w, h) = (width as i64 - 2 * MARGIN, height as i64 - 2 * MARGIN);
    let to_px = |x: f64, y: f64| -> (i64, i64) {
        let px = MARGIN + (x.clamp(0.0, 1.0) * w as f64).round() as i64;
        let py = MARGIN + h - ((y.clamp(0.0, y_max) / y_max) * h as f64).round() as i64;
        (px, py)
    };
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        canvas.line(to_px(x, 0.0), to_px(x, y_max), GRID, 1);
    }
    let rows = (y_max * 10.0).round() as i64;
    for i in 0..=rows {
        let y = i as f64 / 10.0;
        canvas.line(to_px(0.0, y), to_px(1.0, y), GRID, 1);
    }
    canvas.line(to_px(0.0, 0.0), to_px(1.0, 0.0), AXIS, 1);
    canvas.line(to_px(0.0, 0.0), to_px(0.0, y_max), AXIS, 1);
    for s in series {
        let pts: Vec<(i64, i64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| to_px(x, y))
            .collect();
        for pair in pts.windows(2) {
            canvas.line(pair[0], pair[1], s.color, 2);
        }
    }
    canvas
}
