//! Colored 3D polyline strokes.

use serde::{Deserialize, Serialize};

use crate::dataset::Point3;
use crate::error::{Error, Result};
use crate::palette::ColorId;

/// Strokes must stay inside `[-WORKING_HALF_EXTENT, WORKING_HALF_EXTENT]^3`.
pub const WORKING_HALF_EXTENT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub points: Vec<Point3>,
    pub color: ColorId,
    /// Diameter in chair-local units.
    pub width: f64,
}

impl Stroke {
    pub fn new(points: Vec<Point3>, color: ColorId, width: f64) -> Result<Self> {
        let s = Stroke { points, color, width };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::invalid("a stroke needs at least two points"));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::invalid(format!("stroke width {} must be positive", self.width)));
        }
        for p in &self.points {
            if p.iter().any(|c| !c.is_finite() || c.abs() > WORKING_HALF_EXTENT) {
                return Err(Error::invalid(format!("stroke point {p:?} outside the working volume")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub strokes: Vec<Stroke>,
}

impl Sketch {
    pub fn new(strokes: Vec<Stroke>) -> Result<Self> {
        let s = Sketch { strokes };
        s.validate()?;
        Ok(s)
    }

    pub fn empty() -> Self {
        Sketch::default()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.strokes.iter().try_for_each(Stroke::validate)
    }
}
