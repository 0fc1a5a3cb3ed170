//! The twelve fixed orthographic view cameras.

use serde::{Deserialize, Serialize};

use crate::dataset::Point3;

pub const VIEW_COUNT: usize = 12;
pub const AZIMUTH_STEP_DEG: u32 = 30;
pub const ELEVATION_DEG: u32 = 30;
/// Half-width of the square orthographic window, centred on the origin.
/// Wide enough for any chair (unit cube) seen from any of the views.
pub const VIEW_HALF_EXTENT: f64 = 1.0;

/// Exact `(cos, sin)` of a multiple of 30 degrees. Using a table instead of
/// `f64::cos` keeps projections identical across platforms and libm versions.
fn cos_sin_30(deg: u32) -> (f64, f64) {
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    match deg % 360 {
        0 => (1.0, 0.0),
        30 => (half_sqrt3, 0.5),
        60 => (0.5, half_sqrt3),
        90 => (0.0, 1.0),
        120 => (-0.5, half_sqrt3),
        150 => (-half_sqrt3, 0.5),
        180 => (-1.0, 0.0),
        210 => (-half_sqrt3, -0.5),
        240 => (-0.5, -half_sqrt3),
        270 => (0.0, -1.0),
        300 => (0.5, -half_sqrt3),
        330 => (half_sqrt3, -0.5),
        other => panic!("{other} is not a multiple of 30 degrees"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewCamera {
    pub view_index: usize,
    pub azimuth_deg: u32,
    pub elevation_deg: u32,
    pub half_extent: f64,
    right: Point3,
    up: Point3,
    /// Unit vector from the origin towards the eye.
    toward_eye: Point3,
}

impl ViewCamera {
    /// Camera `view_index` (0..12): azimuth `30 * view_index` degrees.
    pub fn fixed(view_index: usize) -> Option<ViewCamera> {
        if view_index >= VIEW_COUNT {
            return None;
        }
        let azimuth_deg = AZIMUTH_STEP_DEG * view_index as u32;
        let (ca, sa) = cos_sin_30(azimuth_deg);
        let (ce, se) = cos_sin_30(ELEVATION_DEG);
        Some(ViewCamera {
            view_index,
            azimuth_deg,
            elevation_deg: ELEVATION_DEG,
            half_extent: VIEW_HALF_EXTENT,
            right: [ca, 0.0, -sa],
            up: [-se * sa, ce, -se * ca],
            toward_eye: [ce * sa, se, ce * ca],
        })
    }

    pub fn all() -> [ViewCamera; VIEW_COUNT] {
        std::array::from_fn(|i| ViewCamera::fixed(i).expect("index in range"))
    }

    /// Screen coordinates in pixels (x right, y down, pixel centres at
    /// `i + 0.5`) and depth, larger meaning nearer to the eye.
    pub fn project(&self, p: Point3, size: usize) -> [f64; 3] {
        let dot = |a: Point3| a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
        let scale = size as f64 / (2.0 * self.half_extent);
        [
            (dot(self.right) + self.half_extent) * scale,
            (self.half_extent - dot(self.up)) * scale,
            dot(self.toward_eye),
        ]
    }

    /// Pixels per chair-local unit at resolution `size`.
    pub fn pixels_per_unit(&self, size: usize) -> f64 {
        size as f64 / (2.0 * self.half_extent)
    }
}
