//! Massless scalar field on `[0, L]` with Dirichlet ends.
//!
//! The electric and magnetic densities are
//!
//! ```text
//! ℰ_E = (1/4L) Σ ω_n (1 - cos 2ω_n z) = (π/4L²) Σ n - (π/8L²) ∂θ S(θ)
//! ℰ_B = (1/4L) Σ ω_n (1 + cos 2ω_n z) = (π/4L²) Σ n + (π/8L²) ∂θ S(θ)
//! ```
//!
//! with `S(θ) = Σ sin 2θn`. The bulk sum `Σ n` is always assigned its zeta
//! value; the scheme only decides how `S` is regularized. The quartic
//! derivative interaction adds a correction whose closed form is taken as
//! given and checked for internal consistency.

use std::f64::consts::PI;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::quad;
use crate::regsum::{self, PowerSeries, RegScheme, SeriesRegularizer, ZetaEngine};
use crate::specfun::{self, is_boundary_angle};

pub use crate::geometry::{Geometry, Position};

/// Prefactor `1/8` of the interaction correction `-(απ²/m²L⁴)·(1/8)(1/18 + csc⁴θ)`.
pub const INTERACTING_PREFACTOR: Ratio<i64> = Ratio::new_raw(1, 8);
/// Position-independent part `1/18` inside the bracket.
pub const INTERACTING_CONSTANT: Ratio<i64> = Ratio::new_raw(1, 18);
/// Coefficient `1/144` of `-απ²/(m²L³)` in the corrected total energy.
pub const INTERACTING_TOTAL: Ratio<i64> = Ratio::new_raw(1, 144);

/// Couplings above this value of `α/(mL)²` are outside the perturbative regime.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-13;

/// A Dirichlet mode `φ_n(z) = √(2/L) sin(ω_n z)`, `ω_n = πn/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    n: u64,
    omega: f64,
}

impl Mode {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

pub fn mode(n: u64, g: &Geometry) -> Result<Mode> {
    if n == 0 {
        return Err(Error::InvalidInput("mode index must be at least 1".into()));
    }
    Ok(Mode {
        n,
        omega: PI * n as f64 / g.length(),
    })
}

pub fn mode_function(mode: &Mode, g: &Geometry, pos: &Position) -> Result<f64> {
    let l = g.length();
    if !(0.0..=l).contains(&pos.z()) {
        return Err(Error::Domain {
            function: "mode_function",
            value: pos.z(),
            reason: "position outside [0, L]",
        });
    }
    // sin(nπz/L) through sin_pi so the ends vanish exactly
    Ok((2.0 / l).sqrt() * specfun::sin_pi(mode.n as f64 * pos.z() / l))
}

/// Quartic self-coupling `α` and heavy mass `m` of the interacting model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    alpha: f64,
    mass: f64,
}

impl Couplings {
    pub fn new(alpha: f64, mass: f64) -> Result<Self> {
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

    /// `α / (mL)²`, small in the regime where first-order perturbation theory holds.
    pub fn validity_ratio(&self, g: &Geometry) -> f64 {
        let ml = self.mass * g.length();
        self.alpha / (ml * ml)
    }

    fn warn_if_strong(&self, g: &Geometry) {
        let r = self.validity_ratio(g);
        if r > VALIDITY_THRESHOLD {
            log::warn!("α/(mL)² = {r} exceeds {VALIDITY_THRESHOLD}; perturbative result may be unreliable");
        }
    }

    /// `απ²/(m²L⁴)`.
    fn strength(&self, g: &Geometry) -> f64 {
        let l = g.length();
        self.alpha * PI * PI / (self.mass * self.mass * l * l * l * l)
    }
}

/// Electric and magnetic parts of an energy density.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergySplit {
    pub electric: f64,
    pub magnetic: f64,
    pub total: f64,
}

impl EnergySplit {
    pub fn new(electric: f64, magnetic: f64) -> Self {
        Self {
            electric,
            magnetic,
            total: electric + magnetic,
        }
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `E₀ = (π/2L) Σ n`, regularized by the zeta engine.
pub fn free_total_energy(g: &Geometry) -> Result<f64> {
    free_total_energy_with(g, &ZetaEngine)
}

/// `E₀ = (π/2L) Σ n`, regularized by `engine`.
pub fn free_total_energy_with<R: SeriesRegularizer + ?Sized>(g: &Geometry, engine: &R) -> Result<f64> {
    engine.power_sum(&PowerSeries::new(1.0, PI / (2.0 * g.length()))?)
}

/// Bulk part `(π/4L²) Σ n` shared by the electric and magnetic densities;
/// equals `-π/48L²`.
pub fn half_bulk_density(g: &Geometry) -> Result<f64> {
    let l = g.length();
    regsum::zeta_regularize_power(&PowerSeries::new(1.0, PI / (4.0 * l * l))?)
}

/// `-(π/8L²) ∂θS`: position-dependent part of the electric density
/// (the magnetic one is its negative).
pub fn electric_position_part(g: &Geometry, pos: &Position, scheme: RegScheme) -> Result<f64> {
    let l = g.length();
    let theta = pos.theta();
    let ds = match scheme {
        RegScheme::ZetaContinuation => {
            if is_boundary_angle(theta) {
                return Err(Error::Singularity {
                    quantity: "zeta-regularized scalar density",
                    theta,
                });
            }
            // d/dθ (½ cot θ)
            -0.5 * specfun::csc2(theta)?
        }
        RegScheme::ExpCutoff(c) => regsum::abel_sum_sin_dtheta(c.value(), theta)?,
    };
    Ok(-PI / (8.0 * l * l) * ds)
}

/// `ℰ_E`; under zeta continuation `-(π/16L²)(1/3 - csc²θ)`.
pub fn electric_density(g: &Geometry, pos: &Position, scheme: RegScheme) -> Result<f64> {
    Ok(half_bulk_density(g)? + electric_position_part(g, pos, scheme)?)
}

/// `ℰ_B = ½⟨(∂_zφ)²⟩`; under zeta continuation `-(π/16L²)(1/3 + csc²θ)`.
pub fn magnetic_density(g: &Geometry, pos: &Position, scheme: RegScheme) -> Result<f64> {
    Ok(half_bulk_density(g)? - electric_position_part(g, pos, scheme)?)
}

pub fn density_split(g: &Geometry, pos: &Position, scheme: RegScheme) -> Result<EnergySplit> {
    let bulk = half_bulk_density(g)?;
    let p = electric_position_part(g, pos, scheme)?;
    Ok(EnergySplit::new(bulk + p, bulk - p))
}

/// Cutoff densities before the bulk sum is regularized: the bulk keeps
/// `(π/4L²) Σ n e^{-εn}`, which diverges like `1/ε²`.
pub fn cutoff_raw_split(g: &Geometry, pos: &Position, eps: f64) -> Result<EnergySplit> {
    let l = g.length();
    let bulk = PI / (4.0 * l * l) * regsum::abel_sum_linear(eps)?;
    let p = electric_position_part(g, pos, RegScheme::cutoff(eps)?)?;
    Ok(EnergySplit::new(bulk + p, bulk - p))
}

/// How the total energy is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    /// Regularize the mode sum `Σ ω_n/2` directly.
    SumThenRegularize,
    /// Integrate the regularized density over `[δ, L-δ]`.
    IntegrateRegularizedDensity { margin: f64 },
}

/// Integrals of the density split over `[δ, L-δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialTotals {
    pub margin: f64,
    pub electric: f64,
    pub magnetic: f64,
    pub total: f64,
    /// Closed-form value of the electric integral (`∝ cot(πδ/L)` under zeta).
    pub expected_electric: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RouteOutcome {
    Finite(f64),
    Partial(PartialTotals),
}

impl RouteOutcome {
    pub fn finite(&self) -> Option<f64> {
        match self {
            RouteOutcome::Finite(v) => Some(*v),
            RouteOutcome::Partial(_) => None,
        }
    }

    pub fn partial(&self) -> Option<&PartialTotals> {
        match self {
            RouteOutcome::Finite(_) => None,
            RouteOutcome::Partial(p) => Some(p),
        }
    }
}

/// Integrates `f(position)` over `z ∈ [a, b]`, adding breakpoints near the
/// plates where cutoff densities peak with width `~ εL/π`.
pub(crate) fn integrate_over_z<F>(g: &Geometry, a: f64, b: f64, eps_hint: Option<f64>, f: F) -> Result<quad::Quadrature>
where
    F: Fn(&Position) -> Result<f64>,
{
    let l = g.length();
    let mut breaks = vec![a];
    if let Some(eps) = eps_hint {
        let w = (8.0 * eps / PI * l).min(0.25 * l);
        for x in [w, 0.5 * w, l - w, l - 0.5 * w] {
            if x > a && x < b {
                breaks.push(x);
            }
        }
    }
    if 0.5 * l > a && 0.5 * l < b {
        breaks.push(0.5 * l);
    }
    breaks.push(b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let failure = std::cell::Cell::new(None);
    let integrand = |z: f64| {
        let value = Position::from_z(z.clamp(0.0, l), g).and_then(|p| f(&p));
        match value {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let q = quad::integrate_breaks(integrand, &breaks, QUAD_ABS_TOL, QUAD_REL_TOL);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    q
}

fn check_margin(g: &Geometry, margin: f64) -> Result<()> {
    if !(margin.is_finite() && margin >= 0.0 && margin < 0.5 * g.length()) {
        return Err(Error::InvalidInput(format!(
            "margin must satisfy 0 <= δ < L/2, got {margin}"
        )));
    }
    Ok(())
}

/// Closed form of `∫_δ^{L-δ} ℰ_E dz`.
pub fn expected_electric_partial(g: &Geometry, margin: f64, scheme: RegScheme) -> Result<f64> {
    check_margin(g, margin)?;
    let l = g.length();
    let x = PI * margin / l;
    // ∫ -(π/8L²) ∂θS dz = -(1/8L) [S(π - x) - S(x)]
    let s_diff = match scheme {
        RegScheme::ZetaContinuation => {
            if margin == 0.0 {
                return Err(divergence_diagnostic(g));
            }
            -2.0 * regsum::abel_sum_sin_limit(x)?
        }
        RegScheme::ExpCutoff(c) => regsum::abel_sum_sin(c.value(), PI - x)? - regsum::abel_sum_sin(c.value(), x)?,
    };
    Ok(half_bulk_density(g)? * (l - 2.0 * margin) - s_diff / (8.0 * l))
}

fn divergence_diagnostic(g: &Geometry) -> Error {
    Error::Divergent(format!(
        "zeta-regularized density integrated up to the plates diverges like cot(πδ/L)/(8L) with L = {}",
        g.length()
    ))
}

/// Total energy formed along `route`.
pub fn total_energy_by_route(g: &Geometry, route: Route, scheme: RegScheme) -> Result<RouteOutcome> {
    match route {
        Route::SumThenRegularize => {
            // under the cutoff the position terms integrate to S(ε,π) - S(ε,0) = 0
            // and the bulk sum is assigned its zeta value
            Ok(RouteOutcome::Finite(free_total_energy(g)?))
        }
        Route::IntegrateRegularizedDensity { margin } => {
            check_margin(g, margin)?;
            if margin == 0.0 && scheme == RegScheme::ZetaContinuation {
                return Err(divergence_diagnostic(g));
            }
            let l = g.length();
            let position = integrate_over_z(g, margin, l - margin, scheme.epsilon(), |p| {
                electric_position_part(g, p, scheme)
            })?;
            let bulk = half_bulk_density(g)? * (l - 2.0 * margin);
            let electric = bulk + position.value;
            let magnetic = bulk - position.value;
            Ok(RouteOutcome::Partial(PartialTotals {
                margin,
                electric,
                magnetic,
                total: electric + magnetic,
                expected_electric: expected_electric_partial(g, margin, scheme)?,
                quadrature_error: position.error,
            }))
        }
    }
}

/// `-(απ²/8m²L⁴)·(1/18)`.
pub fn interacting_constant_part(g: &Geometry, c: &Couplings) -> f64 {
    -c.strength(g) * ratio_f64(INTERACTING_PREFACTOR * INTERACTING_CONSTANT)
}

/// `-(απ²/8m²L⁴)·csc⁴θ`.
pub fn interacting_position_part(g: &Geometry, pos: &Position, c: &Couplings) -> Result<f64> {
    let theta = pos.theta();
    if is_boundary_angle(theta) {
        return Err(Error::Singularity {
            quantity: "interacting scalar density",
            theta,
        });
    }
    let csc2 = specfun::csc2(theta)?;
    Ok(-c.strength(g) * ratio_f64(INTERACTING_PREFACTOR) * csc2 * csc2)
}

/// Cutoff counterpart of [`interacting_position_part`], built from
/// `csc⁴θ = -(1/6) cot''' - (2/3) cot'` with `cot θ → 2S(ε, θ)`.
pub fn interacting_position_part_cutoff(g: &Geometry, pos: &Position, c: &Couplings, eps: f64) -> Result<f64> {
    let theta = pos.theta();
    let d1 = regsum::abel_sum_sin_dtheta(eps, theta)?;
    let d3 = regsum::abel_sum_sin_d3theta(eps, theta)?;
    let csc4 = -d3 / 3.0 - 4.0 * d1 / 3.0;
    Ok(-c.strength(g) * ratio_f64(INTERACTING_PREFACTOR) * csc4)
}

/// `ℰ = -π/24L² - (απ²/8m²L⁴)(1/18 + csc⁴θ)`.
pub fn interacting_density(g: &Geometry, pos: &Position, c: &Couplings) -> Result<f64> {
    c.warn_if_strong(g);
    let free = free_total_energy(g)? / g.length();
    Ok(free + interacting_constant_part(g, c) + interacting_position_part(g, pos, c)?)
}

/// `E₀ = -π/24L - απ²/(144 m²L³)`.
pub fn interacting_total_energy(g: &Geometry, c: &Couplings) -> Result<f64> {
    c.warn_if_strong(g);
    let l = g.length();
    let correction = -c.strength(g) * l * ratio_f64(INTERACTING_TOTAL);
    debug_assert!(interacting_total_identity());
    Ok(free_total_energy(g)? + correction)
}

/// `(1/8)·(1/18) = 1/144` in exact arithmetic: the corrected total is `L`
/// times the constant part of the corrected density.
pub fn interacting_total_identity() -> bool {
    INTERACTING_PREFACTOR * INTERACTING_CONSTANT == INTERACTING_TOTAL
}

/// Evidence that the corrected total comes from the constant part alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractingConsistency {
    pub total: f64,
    pub length_times_constant: f64,
    pub rational_identity: bool,
    /// `∫₀^L` of the cutoff position part at the given ε.
    pub cutoff_position_integral: f64,
    pub quadrature_error: f64,
}

pub fn interacting_total_consistency(g: &Geometry, c: &Couplings, eps: f64) -> Result<InteractingConsistency> {
    let l = g.length();
    let q = integrate_over_z(g, 0.0, l, Some(eps), |p| interacting_position_part_cutoff(g, p, c, eps))?;
    Ok(InteractingConsistency {
        total: interacting_total_energy(g, c)?,
        length_times_constant: free_total_energy(g)? + l * interacting_constant_part(g, c),
        rational_identity: interacting_total_identity(),
        cutoff_position_integral: q.value,
        quadrature_error: q.error,
    })
}

/// Integral of the interacting density over `[δ, L-δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractingPartial {
    pub margin: f64,
    pub total: f64,
    pub expected: f64,
    pub quadrature_error: f64,
}

pub fn interacting_partial_total(g: &Geometry, c: &Couplings, margin: f64) -> Result<InteractingPartial> {
    check_margin(g, margin)?;
    if margin == 0.0 {
        return Err(Error::Divergent(
            "interacting density integrated up to the plates diverges like cot³(πδ/L)".into(),
        ));
    }
    let l = g.length();
    let q = integrate_over_z(g, margin, l - margin, None, |p| interacting_density(g, p, c))?;
    let x = PI * margin / l;
    let cot = specfun::cot(x)?;
    let constant = free_total_energy(g)? / l + interacting_constant_part(g, c);
    let expected = constant * (l - 2.0 * margin)
        - c.strength(g) * ratio_f64(INTERACTING_PREFACTOR) * (l / PI) * 2.0 * (cot + cot * cot * cot / 3.0);
    Ok(InteractingPartial {
        margin,
        total: q.value,
        expected,
        quadrature_error: q.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::cell::RefCell;

    fn geom(l: f64) -> Geometry {
        Geometry::new(l).unwrap()
    }

    fn at(theta: f64, g: &Geometry) -> Position {
        Position::from_theta(theta, g).unwrap()
    }

    #[test]
    fn mode_frequencies() {
        assert_eq!(mode(1, &geom(1.0)).unwrap().omega(), PI);
        assert_eq!(mode(3, &geom(2.0)).unwrap().omega(), 3.0 * PI / 2.0);
        assert_eq!(mode(1_000_000, &geom(1.0)).unwrap().omega(), 1e6 * PI);
        assert!(mode(0, &geom(1.0)).is_err());
    }

    #[test]
    fn mode_function_values_and_normalization() {
        let g = geom(1.0);
        let m1 = mode(1, &g).unwrap();
        let mid = Position::from_z(0.5, &g).unwrap();
        assert!((mode_function(&m1, &g, &mid).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        for n in 1..=5 {
            let m = mode(n, &g).unwrap();
            assert_eq!(mode_function(&m, &g, &Position::from_z(0.0, &g).unwrap()).unwrap(), 0.0);
            assert_eq!(mode_function(&m, &g, &Position::from_z(1.0, &g).unwrap()).unwrap(), 0.0);
            let q = quad::integrate(
                |z| {
                    let p = Position::from_z(z, &g).unwrap();
                    mode_function(&m, &g, &p).unwrap().powi(2)
                },
                0.0,
                1.0,
                1e-13,
                0.0,
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-10, "n={n}");
        }
    }

    struct Recorder {
        seen: RefCell<Vec<PowerSeries>>,
    }

    impl SeriesRegularizer for Recorder {
        fn power_sum(&self, series: &PowerSeries) -> Result<f64> {
            self.seen.borrow_mut().push(*series);
            ZetaEngine.power_sum(series)
        }
    }

    #[test]
    fn free_total_goes_through_engine() {
        let rec = Recorder { seen: RefCell::new(Vec::new()) };
        let e = free_total_energy_with(&geom(1.0), &rec).unwrap();
        let seen = rec.seen.borrow();
        assert_eq!(seen.len(), 1);
        assert_eq!(seen[0].exponent, 1.0);
        assert_eq!(seen[0].scale, PI / 2.0);
        assert!((e + PI / 24.0).abs() < 1e-15);
        assert!((free_total_energy(&geom(2.0)).unwrap() + PI / 48.0).abs() < 1e-15);
        assert!((free_total_energy(&geom(0.5)).unwrap() + PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_densities_at_midpoint() {
        let g = geom(1.0);
        let p = at(PI / 2.0, &g);
        let e = electric_density(&g, &p, RegScheme::ZetaContinuation).unwrap();
        let b = magnetic_density(&g, &p, RegScheme::ZetaContinuation).unwrap();
        assert!((e - PI / 24.0).abs() < 1e-15);
        assert!((b + PI / 12.0).abs() < 1e-15);
        let b4 = magnetic_density(&g, &at(PI / 4.0, &g), RegScheme::ZetaContinuation).unwrap();
        assert!((b4 + PI / 16.0 * (1.0 / 3.0 + 2.0)).abs() < 1e-14);
        let split = density_split(&g, &p, RegScheme::ZetaContinuation).unwrap();
        assert!((split.total + PI / 24.0).abs() < 1e-15);
        let s3 = density_split(&geom(3.0), &at(2.0, &geom(3.0)), RegScheme::ZetaContinuation).unwrap();
        assert!((s3.total + PI / 216.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_density_singular_at_ends() {
        let g = geom(1.0);
        for theta in [0.0, PI] {
            let p = at(theta, &g);
            assert!(matches!(
                electric_density(&g, &p, RegScheme::ZetaContinuation),
                Err(Error::Singularity { .. })
            ));
            assert!(magnetic_density(&g, &p, RegScheme::ZetaContinuation).is_err());
            assert!(electric_density(&g, &p, RegScheme::cutoff(0.1).unwrap()).unwrap().is_finite());
        }
    }

    #[test]
    fn electric_divergence_ratio_near_wall() {
        let g = geom(1.0);
        let pos = |t| electric_position_part(&g, &at(t, &g), RegScheme::ZetaContinuation).unwrap();
        let ratio = pos(0.05) / pos(0.1);
        let expected = (0.1f64.sin() / 0.05f64.sin()).powi(2);
        assert!((ratio - expected).abs() < 1e-12);
        assert!(pos(0.05) > 0.0);
    }

    #[test]
    fn cutoff_extrapolates_to_zeta_at_midpoint() {
        let g = geom(1.0);
        let p = at(PI / 2.0, &g);
        let ex = regsum::CutoffLadder::STANDARD
            .extrapolate(|e| electric_density(&g, &p, RegScheme::cutoff(e)?))
            .unwrap();
        assert!((ex.value - PI / 24.0).abs() < 1e-8);
    }

    #[test]
    fn interior_scheme_agreement_and_wall_disagreement() {
        let g = geom(1.0);
        let mut theta = 0.2;
        while theta < PI - 0.2 {
            let p = at(theta, &g);
            let zeta = electric_density(&g, &p, RegScheme::ZetaContinuation).unwrap();
            let ex = regsum::CutoffLadder::for_angle(theta)
                .extrapolate(|e| electric_density(&g, &p, RegScheme::cutoff(e)?))
                .unwrap();
            assert!((ex.value - zeta).abs() < 1e-7, "θ={theta}");
            theta += 0.1;
        }
        for eps in [0.04, 0.01] {
            let theta = 2.0 * eps;
            let p = at(theta, &g);
            let zeta = electric_density(&g, &p, RegScheme::ZetaContinuation).unwrap();
            let cut = electric_density(&g, &p, RegScheme::cutoff(eps).unwrap()).unwrap();
            assert!((zeta - cut).abs() > 1e-7);
        }
    }

    #[test]
    fn cancellation_of_position_dependence() {
        let g = geom(1.7);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let theta = rng.gen_range(0.01..PI - 0.01);
            let p = at(theta, &g);
            for scheme in [RegScheme::ZetaContinuation, RegScheme::cutoff(0.05).unwrap()] {
                let s = density_split(&g, &p, scheme).unwrap();
                let expected = -PI / (24.0 * 1.7 * 1.7);
                assert!((s.total - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_mode_sum_matches_cutoff_closed_form() {
        // Σ_n (ω_n/2L)·sin²(ω_n z)·e^{-εn} with the bulk divergence left in
        let g = geom(1.0);
        let eps = 1e-3;
        let n_max = 50_000u64;
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let theta: f64 = rng.gen_range(0.05..PI - 0.05);
            let mut e = 0.0;
            let mut b = 0.0;
            for n in (1..=n_max).rev() {
                let nf = n as f64;
                let w = PI * nf * (-eps * nf).exp() / 4.0;
                let c = (2.0 * theta * nf).cos();
                e += w * (1.0 - c);
                b += w * (1.0 + c);
            }
            let raw = cutoff_raw_split(&g, &at(theta, &g), eps).unwrap();
            assert!((e - raw.electric).abs() < 1e-6, "θ={theta}: {e} vs {}", raw.electric);
            assert!((b - raw.magnetic).abs() < 1e-6, "θ={theta}: {b} vs {}", raw.magnetic);
        }
    }

    #[test]
    fn half_energy_split() {
        let g = geom(2.0);
        let bulk = half_bulk_density(&g).unwrap() * 2.0;
        assert!((bulk + PI / 96.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_position_integral_vanishes() {
        let g = geom(1.0);
        for eps in [0.5, 0.1, 0.02] {
            let scheme = RegScheme::cutoff(eps).unwrap();
            let q = integrate_over_z(&g, 0.0, 1.0, Some(eps), |p| electric_position_part(&g, p, scheme)).unwrap();
            assert!(q.value.abs() < 1e-10, "ε={eps}: {}", q.value);
        }
    }

    #[test]
    fn routes() {
        let g = geom(1.0);
        let r1 = total_energy_by_route(&g, Route::SumThenRegularize, RegScheme::ZetaContinuation).unwrap();
        assert!((r1.finite().unwrap() + PI / 24.0).abs() < 1e-15);

        let part = |d| {
            *total_energy_by_route(&g, Route::IntegrateRegularizedDensity { margin: d }, RegScheme::ZetaContinuation)
                .unwrap()
                .partial()
                .unwrap()
        };
        let a = part(0.01);
        let b = part(0.005);
        // antiderivative of csc²: the electric integral is cot(πδ)/8 plus a shrinking bulk piece
        let cot_diff = ((PI * 0.005f64).tan().recip() - (PI * 0.01f64).tan().recip()) / 8.0;
        let bulk_diff = -PI / 48.0 * ((1.0 - 0.01) - (1.0 - 0.02));
        assert!(((b.electric - a.electric) - (cot_diff + bulk_diff)).abs() < 1e-6);
        assert!((a.electric - a.expected_electric).abs() < 1e-9);
        assert!((a.total + PI / 24.0 * (1.0 - 0.02)).abs() < 1e-12);

        assert!(matches!(
            total_energy_by_route(&g, Route::IntegrateRegularizedDensity { margin: 0.0 }, RegScheme::ZetaContinuation),
            Err(Error::Divergent(_))
        ));
        assert!(total_energy_by_route(&g, Route::IntegrateRegularizedDensity { margin: 0.6 }, RegScheme::ZetaContinuation)
            .is_err());
        let cut = total_energy_by_route(
            &g,
            Route::IntegrateRegularizedDensity { margin: 0.0 },
            RegScheme::cutoff(0.05).unwrap(),
        )
        .unwrap();
        let cut = cut.partial().unwrap();
        assert!((cut.electric + PI / 48.0).abs() < 1e-10);
    }

    #[test]
    fn route_partials_monotone_in_margin() {
        let g = geom(1.0);
        let margins = [0.02, 0.01, 0.005, 0.0025];
        let vals: Vec<f64> = margins
            .iter()
            .map(|&d| {
                total_energy_by_route(&g, Route::IntegrateRegularizedDensity { margin: d }, RegScheme::ZetaContinuation)
                    .unwrap()
                    .partial()
                    .unwrap()
                    .electric
            })
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interacting_density_values() {
        let g = geom(1.0);
        let free = Couplings::new(0.0, 1.0).unwrap();
        for theta in [0.3, 1.0, 2.0] {
            let v = interacting_density(&g, &at(theta, &g), &free).unwrap();
            assert!((v + PI / 24.0).abs() < 1e-15);
        }
        let c = Couplings::new(1.0, 1.0).unwrap();
        let v = interacting_density(&g, &at(PI / 2.0, &g), &c).unwrap();
        let expected = -PI / 24.0 - PI * PI / 8.0 * 19.0 / 18.0;
        assert!((v - expected).abs() < 1e-14);
        let a = interacting_density(&g, &at(0.4, &g), &c).unwrap();
        let b = interacting_density(&g, &at(PI - 0.4, &g), &c).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
        assert!(interacting_density(&g, &at(0.0, &g), &c).is_err());
    }

    #[test]
    fn interacting_total_values() {
        let g = geom(1.0);
        let c = Couplings::new(0.01, 10.0).unwrap();
        let e = interacting_total_energy(&g, &c).unwrap();
        assert!((e - (-PI / 24.0 - 0.01 * PI * PI / 14400.0)).abs() < 1e-15);
        assert!((e + 0.130_906_55).abs() < 5e-9);
        let free = Couplings::new(0.0, 10.0).unwrap();
        assert_eq!(interacting_total_energy(&g, &free).unwrap(), free_total_energy(&g).unwrap());
        let corr = |l: f64| {
            let g = geom(l);
            interacting_total_energy(&g, &c).unwrap() - free_total_energy(&g).unwrap()
        };
        assert!((corr(1.0) / corr(2.0) - 8.0).abs() < 1e-12);
        assert!(interacting_total_identity());
    }

    #[test]
    fn interacting_consistency_checks() {
        let g = geom(1.0);
        let c = Couplings::new(0.05, 2.0).unwrap();
        for eps in [0.2, 0.05] {
            let k = interacting_total_consistency(&g, &c, eps).unwrap();
            assert!(k.rational_identity);
            assert!((k.total - k.length_times_constant).abs() < 1e-15);
            assert!(k.cutoff_position_integral.abs() < 1e-10, "{}", k.cutoff_position_integral);
        }
    }

    #[test]
    fn cutoff_csc4_replacement_tends_to_zeta_form() {
        let g = geom(1.0);
        let c = Couplings::new(1.0, 1.0).unwrap();
        let theta = 1.1;
        let p = at(theta, &g);
        let zeta = interacting_position_part(&g, &p, &c).unwrap();
        let ex = regsum::CutoffLadder::for_angle(theta)
            .extrapolate(|e| interacting_position_part_cutoff(&g, &p, &c, e))
            .unwrap();
        assert!((ex.value - zeta).abs() < 1e-9 * zeta.abs());
    }

    #[test]
    fn interacting_partial_matches_closed_form() {
        let g = geom(1.0);
        let c = Couplings::new(0.01, 10.0).unwrap();
        for d in [0.02, 0.005] {
            let p = interacting_partial_total(&g, &c, d).unwrap();
            assert!((p.total - p.expected).abs() < 1e-9 * p.expected.abs().max(1.0));
        }
        assert!(interacting_partial_total(&g, &c, 0.0).is_err());
    }

    #[test]
    fn coupling_validation() {
        assert!(Couplings::new(-1.0, 1.0).is_err());
        assert!(Couplings::new(0.1, 0.0).is_err());
        let c = Couplings::new(1.0, 1.0).unwrap();
        assert_eq!(c.validity_ratio(&geom(1.0)), 1.0);
    }
}
