//! Point and curve phantoms.
//!
//! Pixel `(row, col)` sits at the point `x = col`, `y = row`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::image::RasterImage;

/// One point singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSource {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSceneSpec {
    pub points: Vec<PointSource>,
    /// distances below this are clamped, pixels
    pub r_clamp: f64,
}

impl Default for PointSceneSpec {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            r_clamp: 1.0,
        }
    }
}

fn check_inside(x: f64, y: f64, height: usize, width: usize, what: &'static str) -> Result<()> {
    if !(x >= 0.0 && x <= (width - 1) as f64 && y >= 0.0 && y <= (height - 1) as f64) {
        return Err(invalid(what, alloc::format!("({x}, {y}) lies outside the {height}x{width} image")));
    }
    Ok(())
}

impl PointSceneSpec {
    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        if !(self.r_clamp >= 0.5) || !self.r_clamp.is_finite() {
            return Err(invalid("r_clamp", "must be at least 0.5"));
        }
        for p in &self.points {
            check_inside(p.x, p.y, height, width, "points")?;
            if !(p.amplitude > 0.0) || !p.amplitude.is_finite() {
                return Err(invalid("points", "amplitudes must be positive"));
            }
        }
        Ok(())
    }

    pub fn transposed(&self) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| PointSource {
                    x: p.y,
                    y: p.x,
                    amplitude: p.amplitude,
                })
                .collect(),
            r_clamp: self.r_clamp,
        }
    }
}

/// `Σ_i a_i max(|x - x_i|, r_clamp)^{-3/2}`, normalized to peak 1.
pub fn gen_points(height: usize, width: usize, spec: &PointSceneSpec) -> Result<RasterImage> {
    let mut img = RasterImage::zeros(height, width)?;
    spec.validate(height, width)?;
    if spec.points.is_empty() {
        return Ok(img);
    }
    let r2_clamp = spec.r_clamp * spec.r_clamp;
    for r in 0..height {
        for c in 0..width {
            let mut v = 0.0;
            for p in &spec.points {
                let dx = c as f64 - p.x;
                let dy = r as f64 - p.y;
                let d2 = (dx * dx + dy * dy).max(r2_clamp);
                // d^{-3/2} = (d²)^{-3/4}
                v += p.amplitude * libm::pow(d2, -0.75);
            }
            img.set(r, c, v);
        }
    }
    let peak = img.max();
    Ok(img.scale(1.0 / peak))
}

/// Closed parameterized curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Curve {
    Circle {
        center: (f64, f64),
        radius: f64,
    },
    Ellipse {
        center: (f64, f64),
        axes: (f64, f64),
        /// radians, counterclockwise from the x axis
        rotation: f64,
    },
    /// Closed Catmull-Rom spline through the control points.
    Spline { points: Vec<(f64, f64)> },
}

impl Curve {
    /// Position at parameter `t ∈ [0, 1)`.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        match self {
            Curve::Circle { center, radius } => {
                let a = 2.0 * PI * t;
                (center.0 + radius * libm::cos(a), center.1 + radius * libm::sin(a))
            }
            Curve::Ellipse { center, axes, rotation } => {
                let a = 2.0 * PI * t;
                let (u, v) = (axes.0 * libm::cos(a), axes.1 * libm::sin(a));
                let (cr, sr) = (libm::cos(*rotation), libm::sin(*rotation));
                (center.0 + u * cr - v * sr, center.1 + u * sr + v * cr)
            }
            Curve::Spline { points } => {
                let n = points.len();
                let s = t * n as f64;
                let seg = (libm::floor(s) as usize).min(n - 1);
                let u = s - seg as f64;
                let p = |i: isize| points[i.rem_euclid(n as isize) as usize];
                let (p0, p1, p2, p3) = (p(seg as isize - 1), p(seg as isize), p(seg as isize + 1), p(seg as isize + 2));
                let cr = |a: f64, b: f64, c: f64, d: f64| {
                    0.5 * (2.0 * b + (c - a) * u + (2.0 * a - 5.0 * b + 4.0 * c - d) * u * u + (3.0 * b - a - 3.0 * c + d) * u * u * u)
                };
                (cr(p0.0, p1.0, p2.0, p3.0), cr(p0.1, p1.1, p2.1, p3.1))
            }
        }
    }

    /// Mirror image across the diagonal `x = y`.
    pub fn transposed(&self) -> Curve {
        match self {
            Curve::Circle { center, radius } => Curve::Circle {
                center: (center.1, center.0),
                radius: *radius,
            },
            Curve::Ellipse { center, axes, rotation } => Curve::Ellipse {
                center: (center.1, center.0),
                axes: *axes,
                rotation: PI / 2.0 - rotation,
            },
            Curve::Spline { points } => Curve::Spline {
                points: points.iter().map(|p| (p.1, p.0)).collect(),
            },
        }
    }

    fn validate(&self, height: usize, width: usize) -> Result<()> {
        match self {
            Curve::Circle { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(invalid("curves", "circle radius must be positive"));
                }
                check_inside(center.0, center.1, height, width, "curves")
            }
            Curve::Ellipse { center, axes, rotation } => {
                if !(axes.0 > 0.0 && axes.1 > 0.0) || !axes.0.is_finite() || !axes.1.is_finite() || !rotation.is_finite() {
                    return Err(invalid("curves", "ellipse axes must be positive"));
                }
                check_inside(center.0, center.1, height, width, "curves")
            }
            Curve::Spline { points } => {
                if points.len() < 3 {
                    return Err(invalid("curves", "a closed spline needs at least 3 control points"));
                }
                for p in points {
                    check_inside(p.0, p.1, height, width, "curves")?;
                }
                if points.iter().all(|p| p == &points[0]) {
                    return Err(invalid("curves", "degenerate spline"));
                }
                Ok(())
            }
        }
    }

    /// Samples with consecutive chords of at most `max_step` pixels.
    fn samples(&self, max_step: f64) -> Result<Vec<(f64, f64)>> {
        let mut n = 64usize;
        loop {
            let pts: Vec<(f64, f64)> = (0..n).map(|i| self.point_at(i as f64 / n as f64)).collect();
            let mut longest: f64 = 0.0;
            let mut total = 0.0;
            for i in 0..n {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                let d = libm::sqrt((b.0 - a.0) * (b.0 - a.0) + (b.1 - a.1) * (b.1 - a.1));
                longest = longest.max(d);
                total += d;
            }
            if !(total > 1e-9) {
                return Err(invalid("curves", "curve has zero length"));
            }
            if longest <= max_step {
                return Ok(pts);
            }
            if n >= 1 << 24 {
                return Err(invalid("curves", "curve too long to rasterize"));
            }
            n *= 2;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveSceneSpec {
    pub curves: Vec<Curve>,
    pub intensity: f64,
    pub stroke_width: f64,
}

impl Default for CurveSceneSpec {
    fn default() -> Self {
        Self {
            curves: Vec::new(),
            intensity: 1.0,
            stroke_width: 1.0,
        }
    }
}

impl CurveSceneSpec {
    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        if !(self.intensity > 0.0) || !self.intensity.is_finite() {
            return Err(invalid("intensity", "must be positive"));
        }
        if !(self.stroke_width > 0.0) || !self.stroke_width.is_finite() {
            return Err(invalid("stroke_width", "must be positive"));
        }
        for c in &self.curves {
            c.validate(height, width)?;
        }
        Ok(())
    }

    pub fn transposed(&self) -> Self {
        Self {
            curves: self.curves.iter().map(Curve::transposed).collect(),
            intensity: self.intensity,
            stroke_width: self.stroke_width,
        }
    }
}

/// Largest arc-length step between curve samples, pixels.
pub const CURVE_STEP: f64 = 0.25;

fn splat(img: &mut RasterImage, x: f64, y: f64, mass: f64) {
    let (h, w) = img.dims();
    let (x0, y0) = (libm::floor(x), libm::floor(y));
    let (fx, fy) = (x - x0, y - y0);
    for (dy, wy) in [(0.0, 1.0 - fy), (1.0, fy)] {
        for (dx, wx) in [(0.0, 1.0 - fx), (1.0, fx)] {
            let (r, c) = (y0 + dy, x0 + dx);
            if r >= 0.0 && c >= 0.0 && (r as usize) < h && (c as usize) < w && wx * wy > 0.0 {
                let (r, c) = (r as usize, c as usize);
                img.set(r, c, img.get(r, c) + mass * wx * wy);
            }
        }
    }
}

/// Unnormalized line measure: every segment deposits
/// `length × intensity` at its midpoint by bilinear splatting. Wider strokes
/// spread the same mass over parallel offsets at most half a pixel apart.
pub fn rasterize_curves(height: usize, width: usize, spec: &CurveSceneSpec) -> Result<RasterImage> {
    let mut img = RasterImage::zeros(height, width)?;
    spec.validate(height, width)?;
    let extra = (spec.stroke_width - 1.0).max(0.0);
    let lanes = if extra > 0.0 { libm::ceil(extra / 0.5) as usize + 1 } else { 1 };
    let offsets: Vec<f64> = if lanes == 1 {
        vec![0.0]
    } else {
        (0..lanes).map(|i| -extra / 2.0 + extra * i as f64 / (lanes - 1) as f64).collect()
    };
    let lane_share = 1.0 / lanes as f64;
    for curve in &spec.curves {
        let pts = curve.samples(CURVE_STEP)?;
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len = libm::sqrt(dx * dx + dy * dy);
            if len == 0.0 {
                continue;
            }
            let (mx, my) = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
            let (nx, ny) = (-dy / len, dx / len);
            let mass = len * spec.intensity * lane_share;
            for o in &offsets {
                splat(&mut img, mx + o * nx, my + o * ny, mass);
            }
        }
    }
    Ok(img)
}

/// [`rasterize_curves`] normalized to peak 1 (zero image if empty).
pub fn gen_curves(height: usize, width: usize, spec: &CurveSceneSpec) -> Result<RasterImage> {
    let img = rasterize_curves(height, width, spec)?;
    let peak = img.max();
    if peak > 0.0 {
        Ok(img.scale(1.0 / peak))
    } else {
        Ok(img)
    }
}

/// White Gaussian noise, deterministic under `seed`.
pub fn add_noise(img: &RasterImage, sigma: f64, seed: u64) -> Result<RasterImage> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", "must be a finite nonnegative number"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", alloc::format!("{e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(img.map(|v| v + normal.sample(&mut rng)))
}

/// `I = clamp(P + C, 0, 1) + noise` with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: RasterImage,
    pub points: RasterImage,
    pub curves: RasterImage,
}

pub fn gen_phantom(
    height: usize,
    width: usize,
    points: &PointSceneSpec,
    curves: &CurveSceneSpec,
    sigma: f64,
    seed: u64,
) -> Result<Phantom> {
    let p = gen_points(height, width, points)?;
    let c = gen_curves(height, width, curves)?;
    let clean = p.zip_with(&c, |a, b| (a + b).clamp(0.0, 1.0))?;
    let image = add_noise(&clean, sigma, seed)?;
    Ok(Phantom {
        image,
        points: p,
        curves: c,
    })
}

/// Default side length of the shipped phantom.
pub const DEFAULT_SIZE: usize = 512;
/// Default noise level, relative to peak 1.
pub const DEFAULT_SIGMA: f64 = 0.05;

/// Scattered points in a `height x width` frame, away from the default curves.
pub fn default_points(height: usize, width: usize) -> PointSceneSpec {
    // positions as fractions of (width, height)
    const LAYOUT: [(f64, f64); 16] = [
        (0.08, 0.10),
        (0.46, 0.07),
        (0.88, 0.12),
        (0.62, 0.25),
        (0.94, 0.40),
        (0.12, 0.62),
        (0.05, 0.88),
        (0.40, 0.58),
        (0.30, 0.92),
        (0.55, 0.95),
        (0.92, 0.92),
        (0.80, 0.60),
        (0.70, 0.08),
        (0.25, 0.40),
        (0.47, 0.33),
        (0.96, 0.72),
    ];
    let sx = (width - 1) as f64;
    let sy = (height - 1) as f64;
    PointSceneSpec {
        points: LAYOUT
            .iter()
            .map(|&(fx, fy)| PointSource {
                x: libm::round(fx * sx),
                y: libm::round(fy * sy),
                amplitude: 1.0,
            })
            .collect(),
        r_clamp: 1.0,
    }
}

/// A circle, a rotated ellipse and a closed spline with sharp bends.
pub fn default_curves(height: usize, width: usize) -> CurveSceneSpec {
    let sx = (width - 1) as f64;
    let sy = (height - 1) as f64;
    let s = sx.min(sy);
    const SPLINE: [(f64, f64); 8] = [
        (0.58, 0.66),
        (0.66, 0.58),
        (0.70, 0.70),
        (0.80, 0.66),
        (0.72, 0.78),
        (0.76, 0.88),
        (0.66, 0.80),
        (0.56, 0.84),
    ];
    CurveSceneSpec {
        curves: vec![
            Curve::Circle {
                center: (0.27 * sx, 0.22 * sy),
                radius: 0.14 * s,
            },
            Curve::Ellipse {
                center: (0.72 * sx, 0.40 * sy),
                axes: (0.16 * s, 0.07 * s),
                rotation: 0.5,
            },
            Curve::Spline {
                points: SPLINE.iter().map(|&(fx, fy)| (fx * sx, fy * sy)).collect(),
            },
            Curve::Ellipse {
                center: (0.27 * sx, 0.74 * sy),
                axes: (0.12 * s, 0.18 * s),
                rotation: -0.3,
            },
        ],
        intensity: 1.0,
        stroke_width: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenes_are_zero() {
        let p = gen_points(16, 16, &PointSceneSpec::default()).unwrap();
        assert!(p.data().iter().all(|&v| v == 0.0));
        let c = gen_curves(16, 16, &CurveSceneSpec::default()).unwrap();
        assert!(c.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_point_decay() {
        let spec = PointSceneSpec {
            points: vec![PointSource {
                x: 32.0,
                y: 32.0,
                amplitude: 2.0,
            }],
            r_clamp: 1.0,
        };
        let img = gen_points(65, 65, &spec).unwrap();
        assert_eq!(img.get(32, 32), 1.0);
        for d in [2usize, 5, 17] {
            let want = libm::pow(1.0 / d as f64, 1.5);
            assert!((img.get(32, 32 + d) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn spec_validation() {
        let bad = PointSceneSpec {
            points: vec![PointSource {
                x: 40.0,
                y: 1.0,
                amplitude: 1.0,
            }],
            r_clamp: 1.0,
        };
        assert!(gen_points(16, 16, &bad).is_err());
        let degenerate = CurveSceneSpec {
            curves: vec![Curve::Spline {
                points: vec![(3.0, 3.0); 4],
            }],
            ..Default::default()
        };
        assert!(gen_curves(16, 16, &degenerate).is_err());
        let zero = CurveSceneSpec {
            curves: vec![Curve::Circle {
                center: (3.0, 3.0),
                radius: 0.0,
            }],
            ..Default::default()
        };
        assert!(gen_curves(16, 16, &zero).is_err());
    }

    #[test]
    fn spline_passes_through_control_points() {
        let c = Curve::Spline {
            points: vec![(1.0, 2.0), (5.0, 2.0), (5.0, 7.0), (1.0, 6.0)],
        };
        let p = c.point_at(0.5);
        assert!((p.0 - 5.0).abs() < 1e-12 && (p.1 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn wide_stroke_keeps_mass() {
        let mut spec = CurveSceneSpec {
            curves: vec![Curve::Circle {
                center: (32.0, 32.0),
                radius: 12.0,
            }],
            ..Default::default()
        };
        let thin = rasterize_curves(64, 64, &spec).unwrap().sum();
        spec.stroke_width = 3.0;
        let wide = rasterize_curves(64, 64, &spec).unwrap();
        assert!((wide.sum() - thin).abs() < 1e-9 * thin);
        assert!(wide.max() < rasterize_curves(64, 64, &CurveSceneSpec { stroke_width: 1.0, ..spec.clone() }).unwrap().max());
    }

    #[test]
    fn noise_is_seeded() {
        let img = RasterImage::zeros(8, 8).unwrap();
        let a = add_noise(&img, 0.1, 7).unwrap();
        assert_eq!(a, add_noise(&img, 0.1, 7).unwrap());
        assert_ne!(a, add_noise(&img, 0.1, 8).unwrap());
        assert_eq!(add_noise(&img, 0.0, 7).unwrap(), img);
        assert!(add_noise(&img, -1.0, 7).is_err());
    }

    #[test]
    fn default_scene_is_valid() {
        for (h, w) in [(512, 512), (128, 256)] {
            default_points(h, w).validate(h, w).unwrap();
            default_curves(h, w).validate(h, w).unwrap();
        }
    }
}
