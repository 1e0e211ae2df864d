use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Separation `L` of the plates (or length of the interval), natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    length: f64,
}

impl Geometry {
    pub fn new(length: f64) -> Result<Self> {
        if length.is_finite() && length > 0.0 {
            Ok(Self { length })
        } else {
            Err(Error::InvalidInput(format!("length must be positive and finite, got {length}")))
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// A point between the boundaries, held both as `z ∈ [0, L]` and `θ = πz/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    z: f64,
    theta: f64,
}

impl Position {
    pub fn from_z(z: f64, g: &Geometry) -> Result<Self> {
        let l = g.length();
        if !(0.0..=l).contains(&z) {
            return Err(Error::Domain {
                function: "Position::from_z",
                value: z,
                reason: "position outside [0, L]",
            });
        }
        let theta = if z == l { PI } else { PI * z / l };
        Ok(Self { z, theta })
    }

    pub fn from_theta(theta: f64, g: &Geometry) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain {
                function: "Position::from_theta",
                value: theta,
                reason: "angle outside [0, π]",
            });
        }
        let l = g.length();
        let z = if theta == PI { l } else { theta * l / PI };
        Ok(Self { z, theta })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The mirror point `θ → π - θ`.
    pub fn mirrored(&self, g: &Geometry) -> Self {
        Self {
            z: g.length() - self.z,
            theta: PI - self.theta,
        }
    }
}
