//! Orientation functions over the unit square and the angular weight.
//!
//! Orientations are directions mod pi, always reduced to (-pi/2, pi/2].
//! The angular weight is the sector indicator 1_{[-alpha, alpha]} applied to
//! the periodic distance between a band angle and the local orientation, or
//! its Gaussian regularization exp(-d^2 / (2 sigma^2)).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Regularized weights below this cutoff are treated as zero.
pub const WEIGHT_CUTOFF: f64 = 1e-8;

/// Reduce an angle mod pi into (-pi/2, pi/2].
#[inline]
pub fn reduce_mod_pi(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(PI);
    if a > FRAC_PI_2 {
        a -= PI;
    }
    a
}

/// pi-periodic distance between two directions, in [0, pi/2].
#[inline]
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Sector half-width plus regularization choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularWeightParams {
    pub alpha: f64,
    pub regularized: bool,
    pub sigma: f64,
}

impl AngularWeightParams {
    pub fn sharp(alpha: f64) -> Self {
        Self {
            alpha,
            regularized: false,
            sigma: alpha,
        }
    }

    /// Gaussian regularization; sigma defaults to alpha when unspecified.
    pub fn regularized(alpha: f64, sigma: f64) -> Self {
        Self {
            alpha,
            regularized: true,
            sigma,
        }
    }

    /// Weight of band direction `theta` for local orientation `alpha0`.
    pub fn weight(&self, alpha0: f64, theta: f64) -> f64 {
        let d = angular_distance(theta, alpha0);
        if self.regularized {
            (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
        } else if d <= self.alpha {
            1.0
        } else {
            0.0
        }
    }

    /// Distance beyond which the weight is below `WEIGHT_CUTOFF` (capped at
    /// pi/2, where the whole circle is active).
    pub fn max_active_distance(&self) -> f64 {
        if self.regularized {
            (self.sigma * (-2.0 * WEIGHT_CUTOFF.ln()).sqrt()).min(FRAC_PI_2)
        } else {
            self.alpha.min(FRAC_PI_2)
        }
    }
}

/// Angle raster with continuous pi-periodic interpolation.
///
/// Bilinear interpolation runs on the doubled-angle unit vectors
/// (cos 2a, sin 2a), which keeps the interpolant continuous across the
/// (-pi/2, pi/2] seam; the angle is recovered as atan2 / 2.
#[derive(Debug, Clone)]
pub struct AngleRaster {
    rows: usize,
    cols: usize,
    cos2: Vec<f64>,
    sin2: Vec<f64>,
    angles: Vec<f64>,
}

impl AngleRaster {
    pub fn from_angles(rows: usize, cols: usize, angles: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || angles.len() != rows * cols {
            return Err(Error::Config(format!(
                "raster of {rows}x{cols} needs {} values, got {}",
                rows * cols,
                angles.len()
            )));
        }
        let angles: Vec<f64> = angles.into_iter().map(reduce_mod_pi).collect();
        let cos2 = angles.iter().map(|a| (2.0 * a).cos()).collect();
        let sin2 = angles.iter().map(|a| (2.0 * a).sin()).collect();
        Ok(Self {
            rows,
            cols,
            cos2,
            sin2,
            angles,
        })
    }

    /// Build the orientation raster of grad F from a scalar raster F.
    ///
    /// Gradients use central differences (one-sided at borders). Where the
    /// gradient vanishes exactly the orientation is copied from the previous
    /// node in row-major scan order, or 0 at the very first node.
    pub fn from_scalar_field(rows: usize, cols: usize, field: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || field.len() != rows * cols {
            return Err(Error::Config(format!(
                "raster of {rows}x{cols} needs {} values, got {}",
                rows * cols,
                field.len()
            )));
        }
        let at = |r: usize, c: usize| field[r * cols + c];
        let hx = if cols > 1 { 1.0 / (cols - 1) as f64 } else { 1.0 };
        let hy = if rows > 1 { 1.0 / (rows - 1) as f64 } else { 1.0 };
        let mut angles = Vec::with_capacity(rows * cols);
        let mut last = 0.0;
        for r in 0..rows {
            for c in 0..cols {
                let gx = if cols == 1 {
                    0.0
                } else if c == 0 {
                    (at(r, 1) - at(r, 0)) / hx
                } else if c == cols - 1 {
                    (at(r, c) - at(r, c - 1)) / hx
                } else {
                    (at(r, c + 1) - at(r, c - 1)) / (2.0 * hx)
                };
                let gy = if rows == 1 {
                    0.0
                } else if r == 0 {
                    (at(1, c) - at(0, c)) / hy
                } else if r == rows - 1 {
                    (at(r, c) - at(r - 1, c)) / hy
                } else {
                    (at(r + 1, c) - at(r - 1, c)) / (2.0 * hy)
                };
                let a = if gx == 0.0 && gy == 0.0 {
                    last
                } else {
                    reduce_mod_pi(gy.atan2(gx))
                };
                last = a;
                angles.push(a);
            }
        }
        Self::from_angles(rows, cols, angles)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let fx = x.clamp(0.0, 1.0) * (self.cols - 1) as f64;
        let fy = y.clamp(0.0, 1.0) * (self.rows - 1) as f64;
        let c0 = (fx.floor() as usize).min(self.cols - 1);
        let r0 = (fy.floor() as usize).min(self.rows - 1);
        let c1 = (c0 + 1).min(self.cols - 1);
        let r1 = (r0 + 1).min(self.rows - 1);
        let tx = fx - c0 as f64;
        let ty = fy - r0 as f64;

        let lerp2 = |v: &[f64]| {
            let top = v[r0 * self.cols + c0] * (1.0 - tx) + v[r0 * self.cols + c1] * tx;
            let bot = v[r1 * self.cols + c0] * (1.0 - tx) + v[r1 * self.cols + c1] * tx;
            top * (1.0 - ty) + bot * ty
        };
        let c2 = lerp2(&self.cos2);
        let s2 = lerp2(&self.sin2);
        if c2 * c2 + s2 * s2 < 1e-24 {
            // Opposing directions cancelled; fall back to the nearest node.
            let rn = if ty < 0.5 { r0 } else { r1 };
            let cn = if tx < 0.5 { c0 } else { c1 };
            return self.angles[rn * self.cols + cn];
        }
        reduce_mod_pi(0.5 * s2.atan2(c2))
    }
}

/// The scalar potential of preset V3: F(x,y) = (4x-2) exp(-(4x-2)^2 - (4y-2)^2).
pub fn v3_scalar(x: f64, y: f64) -> f64 {
    let u = 4.0 * x - 2.0;
    let v = 4.0 * y - 2.0;
    u * (-u * u - v * v).exp()
}

/// Analytic gradient of `v3_scalar`.
pub fn v3_gradient(x: f64, y: f64) -> (f64, f64) {
    let u = 4.0 * x - 2.0;
    let v = 4.0 * y - 2.0;
    let e = (-u * u - v * v).exp();
    (4.0 * (1.0 - 2.0 * u * u) * e, -8.0 * u * v * e)
}

/// The map x -> alpha0(x) over [0,1]^2.
#[derive(Debug, Clone)]
pub enum OrientationField {
    Constant(f64),
    /// V1 = (cos(-pi/2 + y), sin(-pi/2 + y)).
    PresetV1,
    /// V2 = (cos(cos(36xy)), sin(cos(36xy))).
    PresetV2,
    /// V3 = grad F, F = (4x-2) exp(-(4x-2)^2 - (4y-2)^2).
    PresetV3,
    Raster(AngleRaster),
    GradientOfRaster(AngleRaster),
}

impl OrientationField {
    /// Orientation at (x, y) in [0,1]^2, reduced to (-pi/2, pi/2].
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            OrientationField::Constant(a) => reduce_mod_pi(*a),
            OrientationField::PresetV1 => reduce_mod_pi(-FRAC_PI_2 + y),
            OrientationField::PresetV2 => reduce_mod_pi((36.0 * x * y).cos()),
            OrientationField::PresetV3 => {
                let (gx, gy) = v3_gradient(x, y);
                if gx == 0.0 && gy == 0.0 {
                    0.0
                } else {
                    reduce_mod_pi(gy.atan2(gx))
                }
            }
            OrientationField::Raster(r) | OrientationField::GradientOfRaster(r) => r.eval(x, y),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            OrientationField::Constant(a) => format!("constant:{a}"),
            OrientationField::PresetV1 => "v1".into(),
            OrientationField::PresetV2 => "v2".into(),
            OrientationField::PresetV3 => "v3".into(),
            OrientationField::Raster(_) => "raster".into(),
            OrientationField::GradientOfRaster(_) => "gradient".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn v1_on_bottom_edge_reduces_to_half_pi() {
        // Vector (0, -1): direction mod pi is pi/2.
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(OrientationField::PresetV1.eval(x, 0.0), FRAC_PI_2);
        }
    }

    #[test]
    fn constant_field_returns_value() {
        let f = OrientationField::Constant(0.7);
        assert_eq!(f.eval(0.1, 0.9), 0.7);
    }

    #[test]
    fn v3_center_gradient_is_horizontal() {
        let (gx, gy) = v3_gradient(0.5, 0.5);
        assert_eq!((gx, gy), (4.0, 0.0));
        assert_eq!(OrientationField::PresetV3.eval(0.5, 0.5), 0.0);
    }

    #[test]
    fn v3_gradient_matches_finite_differences() {
        // Central differences on a 1e-5 stencil, 100 pseudo-random points.
        let mut s = crate::fbm::RandomStream::new(2024);
        let h = 1e-5;
        for _ in 0..100 {
            let x = 0.5 + 0.15 * s.standard_normal();
            let y = 0.5 + 0.15 * s.standard_normal();
            let (gx, gy) = v3_gradient(x, y);
            let fdx = (v3_scalar(x + h, y) - v3_scalar(x - h, y)) / (2.0 * h);
            let fdy = (v3_scalar(x, y + h) - v3_scalar(x, y - h)) / (2.0 * h);
            let norm = (gx * gx + gy * gy).sqrt();
            let err = ((gx - fdx).powi(2) + (gy - fdy).powi(2)).sqrt();
            assert!(err <= 1e-6 * norm.max(1e-12), "at ({x},{y}): err {err}");
        }
    }

    #[test]
    fn sharp_weight_inside_sector() {
        let w = AngularWeightParams::sharp(0.1);
        assert_eq!(w.weight(0.0, 0.05), 1.0);
        assert_eq!(w.weight(0.0, 0.15), 0.0);
    }

    #[test]
    fn sharp_weight_wraps_periodically() {
        // d = pi - |1.5 - (-1.6)| = 0.041593 <= 0.1.
        let w = AngularWeightParams::sharp(0.1);
        assert_eq!(w.weight(1.5, -1.6), 1.0);
        assert!((angular_distance(1.5, -1.6) - 0.041592653589793).abs() < 1e-12);
    }

    #[test]
    fn regularized_weight_gaussian_value() {
        let w = AngularWeightParams::regularized(0.1, 0.1);
        assert!((w.weight(0.0, 0.1) - 0.606530659712633).abs() < 1e-12);
    }

    #[test]
    fn raster_roundtrip_and_interpolation() {
        let r = AngleRaster::from_angles(2, 2, vec![0.1, 0.1, 0.3, 0.3]).unwrap();
        assert!((r.eval(0.0, 0.0) - 0.1).abs() < 1e-12);
        assert!((r.eval(0.5, 0.5) - 0.2).abs() < 1e-12);
        assert!((r.eval(1.0, 1.0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn raster_interpolates_across_seam() {
        // 1.5 and -1.5 are 0.14 rad apart mod pi; midpoint must stay near
        // the seam, not jump through 0.
        let r = AngleRaster::from_angles(1, 2, vec![1.5, -1.5]).unwrap();
        let mid = r.eval(0.5, 0.0);
        assert!(
            angular_distance(mid, FRAC_PI_2) < 0.1,
            "midpoint {mid} strayed from the seam"
        );
    }

    #[test]
    fn scalar_raster_gradient_orientation() {
        // F = x ramp: gradient points along +x everywhere, angle 0.
        let f: Vec<f64> = (0..3)
            .flat_map(|_| (0..3).map(|c| c as f64))
            .collect();
        let r = AngleRaster::from_scalar_field(3, 3, f).unwrap();
        assert_eq!(r.eval(0.5, 0.5), 0.0);
    }

    #[test]
    fn scalar_raster_flat_falls_back_deterministically() {
        let r = AngleRaster::from_scalar_field(2, 2, vec![1.0; 4]).unwrap();
        assert_eq!(r.eval(0.3, 0.7), 0.0);
    }

    proptest! {
        #[test]
        fn prop_weight_pi_periodic_and_symmetric(
            alpha0 in -2.0f64..2.0,
            d in 0.0f64..FRAC_PI_2,
            alpha in 0.01f64..FRAC_PI_2,
            sigma in 0.01f64..1.0,
        ) {
            for w in [AngularWeightParams::sharp(alpha), AngularWeightParams::regularized(alpha, sigma)] {
                let base = w.weight(alpha0, alpha0 + d);
                prop_assert!((w.weight(alpha0 + PI, alpha0 + d) - base).abs() < 1e-12);
                prop_assert!((w.weight(alpha0, alpha0 + d + PI) - base).abs() < 1e-12);
                prop_assert!((w.weight(alpha0, alpha0 - d) - base).abs() < 1e-9);
            }
        }

        #[test]
        fn prop_weight_range(
            alpha0 in -2.0f64..2.0,
            theta in -2.0f64..2.0,
            sigma in 0.01f64..1.0,
        ) {
            let sharp = AngularWeightParams::sharp(0.4).weight(alpha0, theta);
            prop_assert!(sharp == 0.0 || sharp == 1.0);
            let reg = AngularWeightParams::regularized(0.4, sigma).weight(alpha0, theta);
            // A Gaussian tail can underflow to exactly zero for tiny sigma.
            prop_assert!((0.0..=1.0).contains(&reg));
            let d = angular_distance(theta, alpha0);
            prop_assert_eq!(reg == 1.0, d == 0.0);
        }

        #[test]
        fn prop_eval_always_reduced(x in 0.0f64..1.0, y in 0.0f64..1.0, a in -10.0f64..10.0) {
            for f in [
                OrientationField::Constant(a),
                OrientationField::PresetV1,
                OrientationField::PresetV2,
                OrientationField::PresetV3,
            ] {
                let v = f.eval(x, y);
                prop_assert!(v > -FRAC_PI_2 - 1e-15 && v <= FRAC_PI_2 + 1e-15);
            }
        }
    }
}
