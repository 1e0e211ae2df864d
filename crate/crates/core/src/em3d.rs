//! Electromagnetic field between perfectly conducting parallel plates.
//!
//! All three-dimensional energies are per unit plate area; densities are per
//! unit volume. The correlators depend on position through the profile
//! `F(θ) = 3/sin⁴θ - 2/sin²θ`, which cancels from the free energy density.

use std::f64::consts::PI;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Position};
use crate::specfun::{self, is_boundary_angle};

/// Fine-structure constant used when no coupling is given.
pub const DEFAULT_ALPHA: f64 = 1.0 / 137.035_999;
/// Electron-mass placeholder in natural units.
pub const DEFAULT_MASS: f64 = 1.0;

/// `2⁷·3³·5`, denominator of the Euler–Heisenberg density prefactor.
pub const EH_DENSITY_DENOMINATOR: i64 = 17_280;
/// Position-independent term `11/225` of the correction bracket.
pub const EH_CONSTANT: Ratio<i64> = Ratio::new_raw(11, 225);
/// Coefficient of `F²` in the correction bracket.
pub const EH_PROFILE_WEIGHT: i64 = 9;
/// `11/(2⁷·3⁵·5³)`, coefficient of `-α²π⁴/(m⁴L⁷)` in the corrected total.
pub const EH_TOTAL: Ratio<i64> = Ratio::new_raw(11, 3_888_000);

/// `⟨E²⟩` and `⟨B²⟩` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorPair {
    pub e2: f64,
    pub b2: f64,
}

impl CorrelatorPair {
    /// `(⟨E²⟩ + ⟨B²⟩)/2`.
    pub fn energy_density(&self) -> f64 {
        0.5 * (self.e2 + self.b2)
    }
}

/// Euler–Heisenberg couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhCouplings {
    alpha: f64,
    mass: f64,
}

impl EhCouplings {
    pub fn new(alpha: f64, mass: f64) -> Result<Self> {
        // α = 0 is accepted so the free limit can be taken continuously
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be non-negative, got {alpha}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { alpha, mass })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl Default for EhCouplings {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            mass: DEFAULT_MASS,
        }
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn interior(quantity: &'static str, theta: f64) -> Result<()> {
    if is_boundary_angle(theta) || !theta.is_finite() {
        Err(Error::Singularity { quantity, theta })
    } else {
        Ok(())
    }
}

/// `F(θ) = 3/sin⁴θ - 2/sin²θ`.
pub fn profile_f(theta: f64) -> Result<f64> {
    interior("F(θ)", theta)?;
    let x = specfun::csc2(theta)?;
    Ok(3.0 * x * x - 2.0 * x)
}

/// `F(θ) = -½ d³(cot θ)/dθ³`, the derivative form of the profile.
pub fn profile_f_from_cot(theta: f64) -> Result<f64> {
    interior("F(θ)", theta)?;
    Ok(-0.5 * specfun::cot_third_derivative(theta)?)
}

/// `⟨E²⟩ = -(π²/16L⁴)(1/45 - F)`, `⟨B²⟩ = -(π²/16L⁴)(1/45 + F)`.
pub fn correlators(g: &Geometry, pos: &Position) -> Result<CorrelatorPair> {
    let f = profile_f(pos.theta())?;
    let l = g.length();
    let pref = -PI * PI / (16.0 * l * l * l * l);
    let pair = CorrelatorPair {
        e2: pref * (1.0 / 45.0 - f),
        b2: pref * (1.0 / 45.0 + f),
    };
    debug_assert!(
        (pair.energy_density() - free_casimir_density(g)).abs()
            <= 64.0 * f64::EPSILON * (pair.e2.abs() + pair.b2.abs())
    );
    Ok(pair)
}

/// Leading behaviour near the plate at `z = 0`: `⟨E²⟩ = -⟨B²⟩ = 3/(16π²z⁴)`.
pub fn near_plate_asymptotics(g: &Geometry, z: f64) -> Result<CorrelatorPair> {
    if !(z.is_finite() && z > 0.0 && z < g.length()) {
        return Err(Error::Domain {
            function: "near_plate_asymptotics",
            value: z,
            reason: "distance must satisfy 0 < z < L",
        });
    }
    let e2 = 3.0 / (16.0 * PI * PI * z * z * z * z);
    Ok(CorrelatorPair { e2, b2: -e2 })
}

/// `ℰ = -π²/720L⁴`.
pub fn free_casimir_density(g: &Geometry) -> f64 {
    let l = g.length();
    -PI * PI / (720.0 * l * l * l * l)
}

/// Pressure on the plates, `π²/240L⁴` in magnitude (the force is attractive).
pub fn casimir_force_per_area(g: &Geometry) -> f64 {
    let l = g.length();
    PI * PI / (240.0 * l * l * l * l)
}

/// `-dE/dL` of the free energy per area by central differences with step
/// `rel_step·L`, returned as a magnitude for comparison with
/// [`casimir_force_per_area`].
pub fn casimir_force_per_area_numeric(g: &Geometry, rel_step: f64) -> Result<f64> {
    let l = g.length();
    let h = rel_step * l;
    let free = EhCouplings::new(0.0, DEFAULT_MASS)?;
    let up = corrected_total_energy(&Geometry::new(l + h)?, &free);
    let down = corrected_total_energy(&Geometry::new(l - h)?, &free);
    let force = -(up - down) / (2.0 * h);
    Ok(force.abs())
}

/// The two pieces of the Euler–Heisenberg correction density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhCorrection {
    /// `-(α²π⁴/17280 m⁴L⁸)·(11/225)`.
    pub constant: f64,
    /// `-(α²π⁴/17280 m⁴L⁸)·9F²(θ)`.
    pub position: f64,
}

impl EhCorrection {
    pub fn total(&self) -> f64 {
        self.constant + self.position
    }
}

fn eh_prefactor(g: &Geometry, c: &EhCouplings) -> f64 {
    let l2 = g.length() * g.length();
    let l8 = l2 * l2 * l2 * l2;
    let m4 = c.mass.powi(4);
    -c.alpha * c.alpha * PI.powi(4) / (EH_DENSITY_DENOMINATOR as f64 * m4 * l8)
}

/// Constant part of the correction density, well defined everywhere.
pub fn eh_constant_density(g: &Geometry, c: &EhCouplings) -> f64 {
    eh_prefactor(g, c) * ratio_f64(EH_CONSTANT)
}

pub fn eh_correction_parts(g: &Geometry, pos: &Position, c: &EhCouplings) -> Result<EhCorrection> {
    let f = profile_f(pos.theta())?;
    let pref = eh_prefactor(g, c);
    Ok(EhCorrection {
        constant: pref * ratio_f64(EH_CONSTANT),
        position: pref * EH_PROFILE_WEIGHT as f64 * f * f,
    })
}

/// `Δℰ = -(α²π⁴/2⁷3³5 m⁴L⁸)·(11/225 + 9F²(θ))`.
pub fn eh_correction_density(g: &Geometry, pos: &Position, c: &EhCouplings) -> Result<f64> {
    eh_correction_parts(g, pos, c).map(|p| p.total())
}

/// `(1/17280)·(11/225) = 11/3888000` exactly: the correction to the total
/// energy is `L` times the constant part of the correction density.
pub fn eh_total_identity() -> bool {
    Ratio::new(1, EH_DENSITY_DENOMINATOR) * EH_CONSTANT == EH_TOTAL
        && EH_DENSITY_DENOMINATOR * 225 == 2i64.pow(7) * 3i64.pow(5) * 5i64.pow(3)
}

/// `E₀/A = -π²/720L³ - 11α²π⁴/(2⁷3⁵5³ m⁴L⁷)`. The position-dependent `9F²`
/// piece is taken not to contribute to the integrated energy.
pub fn corrected_total_energy(g: &Geometry, c: &EhCouplings) -> f64 {
    free_casimir_density(g) * g.length() + eh_total_correction(g, c)
}

/// The Euler–Heisenberg part of the total energy per area alone.
pub fn eh_total_correction(g: &Geometry, c: &EhCouplings) -> f64 {
    debug_assert!(eh_total_identity());
    -ratio_f64(EH_TOTAL) * c.alpha * c.alpha * PI.powi(4) / (c.mass.powi(4) * g.length().powi(7))
}

/// Free energy density of the interacting photon gas at temperature `T`,
/// obtained as `E₀/L` with `L = 1/(2T)`.
pub fn thermal_free_energy_density(temperature: f64, c: &EhCouplings) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Domain {
            function: "thermal_free_energy_density",
            value: temperature,
            reason: "temperature must be positive",
        });
    }
    let g = Geometry::new(0.5 / temperature)?;
    Ok(corrected_total_energy(&g, c) / g.length())
}
