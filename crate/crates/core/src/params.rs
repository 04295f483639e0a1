//! Problem parameters and points of the semistrip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary value `d` on the short side and strip width `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub d: f64,
    pub width: f64,
}

impl ProblemParams {
    pub fn new(d: f64, width: f64) -> Result<Self> {
        if !d.is_finite() || d.abs() >= std::f64::consts::PI {
            return Err(Error::Config(format!("d = {d} must satisfy |d| < pi")));
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::Config(format!("L = {width} must be positive")));
        }
        Ok(Self { d, width })
    }

    /// `tan(d/2)`, the constant in the linearizable coefficient.
    pub fn tan_half_d(&self) -> f64 {
        (0.5 * self.d).tan()
    }
}

/// Point `(x, y)` in the open semistrip `x > 0`, `0 < y < L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPoint {
    pub x: f64,
    pub y: f64,
}

impl PhysicalPoint {
    pub fn interior(x: f64, y: f64, params: &ProblemParams) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || x <= 0.0 || y <= 0.0 || y >= params.width {
            return Err(Error::Domain(format!(
                "({x}, {y}) is not inside the semistrip of width {}",
                params.width
            )));
        }
        Ok(Self { x, y })
    }
}
