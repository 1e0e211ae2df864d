//! Order-of-limits experiments.
//!
//! Regularizing the density first and integrating afterwards diverges at the
//! plates, while regularizing the integrated mode sum is finite. The helpers
//! here sample density profiles, fit the power laws at the boundaries, build
//! the commutation report comparing both orders, and tabulate the small-ε
//! expansion of the cutoff sine series.

use std::f64::consts::PI;

use serde::Serialize;

use crate::em3d::{self, EhCouplings};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Position};
use crate::regsum::{self, RegScheme};
use crate::scalar1d::{self, Couplings, EnergySplit, Route};

/// Which density a profile samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSource {
    ScalarFree,
    ScalarInteracting(Couplings),
    EmFree,
    EmEulerHeisenberg(EhCouplings),
}

impl ProfileSource {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileSource::ScalarFree => "scalar-free",
            ProfileSource::ScalarInteracting(_) => "scalar-interacting",
            ProfileSource::EmFree => "em-free",
            ProfileSource::EmEulerHeisenberg(_) => "em-euler-heisenberg",
        }
    }

    fn is_em(&self) -> bool {
        matches!(self, ProfileSource::EmFree | ProfileSource::EmEulerHeisenberg(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clustering {
    /// `θ_i = π i/(N+1)`.
    Uniform,
    /// Chebyshev points `θ_i = (π/2)(1 - cos(π i/(N+1)))`, dense at both plates.
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub count: usize,
    pub clustering: Clustering,
}

impl GridSpec {
    pub fn new(count: usize, clustering: Clustering) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(Self { count, clustering })
    }

    /// Strictly increasing angles strictly inside `(0, π)`.
    pub fn angles(&self) -> Vec<f64> {
        let denom = (self.count + 1) as f64;
        (1..=self.count)
            .map(|i| {
                let t = i as f64 / denom;
                match self.clustering {
                    Clustering::Uniform => PI * t,
                    Clustering::Endpoints => 0.5 * PI * (1.0 - (PI * t).cos()),
                }
            })
            .collect()
    }
}

/// Sampled densities on a θ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub geometry: Geometry,
    pub scheme: RegScheme,
    pub source: ProfileSource,
    pub grid: Vec<f64>,
    /// Free-field electric/magnetic split (for EM: `⟨E²⟩/2`, `⟨B²⟩/2`).
    pub values: Vec<EnergySplit>,
    /// Interaction correction at each point, when the source has one.
    pub corrections: Option<Vec<f64>>,
}

impl DensityProfile {
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.grid
            .iter()
            .map(|&t| Position::from_theta(t, &self.geometry).expect("grid lies in (0, π)"))
    }
}

fn sample_point(source: &ProfileSource, g: &Geometry, pos: &Position, scheme: RegScheme) -> Result<(EnergySplit, Option<f64>)> {
    match source {
        ProfileSource::ScalarFree => Ok((scalar1d::density_split(g, pos, scheme)?, None)),
        ProfileSource::ScalarInteracting(c) => {
            let split = scalar1d::density_split(g, pos, scheme)?;
            let position = match scheme {
                RegScheme::ZetaContinuation => scalar1d::interacting_position_part(g, pos, c)?,
                RegScheme::ExpCutoff(e) => scalar1d::interacting_position_part_cutoff(g, pos, c, e.value())?,
            };
            Ok((split, Some(scalar1d::interacting_constant_part(g, c) + position)))
        }
        ProfileSource::EmFree => {
            let c = em3d::correlators(g, pos)?;
            Ok((EnergySplit::new(0.5 * c.e2, 0.5 * c.b2), None))
        }
        ProfileSource::EmEulerHeisenberg(eh) => {
            let c = em3d::correlators(g, pos)?;
            let d = em3d::eh_correction_density(g, pos, eh)?;
            Ok((EnergySplit::new(0.5 * c.e2, 0.5 * c.b2), Some(d)))
        }
    }
}

/// Evaluates `source` on the grid described by `spec`.
pub fn sample_profile(source: ProfileSource, g: &Geometry, scheme: RegScheme, spec: &GridSpec) -> Result<DensityProfile> {
    if spec.count < 2 {
        return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {}", spec.count)));
    }
    if source.is_em() && scheme != RegScheme::ZetaContinuation {
        return Err(Error::InvalidInput(
            "electromagnetic profiles are only available in the zeta scheme".into(),
        ));
    }
    let grid = spec.angles();
    let mut values = Vec::with_capacity(grid.len());
    let mut corrections = Vec::with_capacity(grid.len());
    for &theta in &grid {
        let pos = Position::from_theta(theta, g)?;
        let (split, corr) = sample_point(&source, g, &pos, scheme)?;
        values.push(split);
        if let Some(c) = corr {
            corrections.push(c);
        }
    }
    let corrections = (corrections.len() == grid.len()).then_some(corrections);
    Ok(DensityProfile {
        geometry: *g,
        scheme,
        source,
        grid,
        values,
        corrections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitTarget {
    Electric,
    Magnetic,
    Total,
    Correction,
}

/// Abscissa of a divergence fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAxis {
    /// `sin θ`.
    SinTheta,
    /// Distance to the plate, `z` or `L - z`.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub endpoint: Endpoint,
    pub target: FitTarget,
    pub axis: FitAxis,
    pub window: usize,
}

impl FitOptions {
    /// Four points nearest the plate; distance axis for the free EM
    /// correlators, `sin θ` otherwise.
    pub fn for_source(source: &ProfileSource, endpoint: Endpoint, target: FitTarget) -> Self {
        let axis = match (source, target) {
            (ProfileSource::EmFree | ProfileSource::EmEulerHeisenberg(_), FitTarget::Electric | FitTarget::Magnetic) => {
                FitAxis::Distance
            }
            _ => FitAxis::SinTheta,
        };
        Self {
            endpoint,
            target,
            axis,
            window: 4,
        }
    }
}

/// Minimum `r²` for a fit to count as conclusive.
pub const CONCLUSIVE_R_SQUARED: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub axis: FitAxis,
    pub conclusive: bool,
}

/// Ordinary least squares line through `(x, y)`; returns slope, intercept, r².
pub fn least_squares_line(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok((slope, intercept, r_squared))
}

/// Fit of `|y| = A x^k` by least squares on logarithms.
pub fn log_log_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let logs = points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y != 0.0 && x.is_finite() && y.is_finite() {
                Ok((x.ln(), y.abs().ln()))
            } else {
                Err(Error::Fit(format!("cannot take logarithms of ({x}, {y})")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept, r2) = least_squares_line(&logs)?;
    Ok((slope, intercept.exp(), r2))
}

fn constant_part(profile: &DensityProfile, target: FitTarget) -> Result<f64> {
    let g = &profile.geometry;
    let l4 = g.length().powi(4);
    let correction_constant = match profile.source {
        ProfileSource::ScalarInteracting(c) => Some(scalar1d::interacting_constant_part(g, &c)),
        ProfileSource::EmEulerHeisenberg(c) => Some(em3d::eh_constant_density(g, &c)),
        _ => None,
    };
    let half = if profile.source.is_em() {
        -PI * PI / (16.0 * l4 * 45.0) * 0.5
    } else {
        scalar1d::half_bulk_density(g)?
    };
    Ok(match target {
        FitTarget::Electric | FitTarget::Magnetic => half,
        FitTarget::Total => 2.0 * half + correction_constant.unwrap_or(0.0),
        FitTarget::Correction => correction_constant
            .ok_or_else(|| Error::Fit(format!("source {} has no correction", profile.source.name())))?,
    })
}

fn target_value(profile: &DensityProfile, i: usize, target: FitTarget) -> f64 {
    let split = &profile.values[i];
    let corr = profile.corrections.as_ref().map_or(0.0, |c| c[i]);
    match target {
        FitTarget::Electric => split.electric,
        FitTarget::Magnetic => split.magnetic,
        FitTarget::Total => split.total + corr,
        FitTarget::Correction => corr,
    }
}

fn target_scale(profile: &DensityProfile, i: usize, target: FitTarget) -> f64 {
    let split = &profile.values[i];
    let corr = profile.corrections.as_ref().map_or(0.0, |c| c[i].abs());
    match target {
        FitTarget::Total => split.electric.abs() + split.magnetic.abs() + corr,
        _ => target_value(profile, i, target).abs(),
    }
}

/// Power-law exponent of `density - constant part` at the default window.
pub fn fit_divergence(profile: &DensityProfile, endpoint: Endpoint, target: FitTarget) -> Result<DivergenceFit> {
    fit_divergence_with(profile, &FitOptions::for_source(&profile.source, endpoint, target))
}

pub fn fit_divergence_with(profile: &DensityProfile, opts: &FitOptions) -> Result<DivergenceFit> {
    if opts.window < 2 {
        return Err(Error::Fit("fit window must hold at least 2 points".into()));
    }
    let constant = constant_part(profile, opts.target)?;
    let l = profile.geometry.length();
    let order: Vec<usize> = match opts.endpoint {
        Endpoint::Left => (0..profile.grid.len()).collect(),
        Endpoint::Right => (0..profile.grid.len()).rev().collect(),
    };
    let mut points = Vec::with_capacity(opts.window);
    let mut thetas = Vec::with_capacity(opts.window);
    let mut rejected = 0usize;
    for i in order {
        if points.len() == opts.window {
            break;
        }
        let theta = profile.grid[i];
        let value = target_value(profile, i, opts.target);
        let y = value - constant;
        // differences at rounding level of the summed parts carry no divergence
        let noise = 64.0 * f64::EPSILON * (target_scale(profile, i, opts.target) + constant.abs());
        if !(y.is_finite() && y.abs() > noise) {
            rejected += 1;
            continue;
        }
        let x = match (opts.axis, opts.endpoint) {
            (FitAxis::SinTheta, _) => theta.sin(),
            (FitAxis::Distance, Endpoint::Left) => theta * l / PI,
            (FitAxis::Distance, Endpoint::Right) => (PI - theta) * l / PI,
        };
        points.push((x, y));
        thetas.push(theta);
    }
    if points.len() < opts.window {
        return Err(Error::Fit(format!(
            "only {} usable points near the {:?} plate ({rejected} rejected as zero or non-finite), need {}",
            points.len(),
            opts.endpoint,
            opts.window
        )));
    }
    let (exponent, amplitude, r_squared) = log_log_fit(&points)?;
    let lo = thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DivergenceFit {
        exponent,
        amplitude,
        r_squared,
        window: (lo, hi),
        axis: opts.axis,
        conclusive: r_squared >= CONCLUSIVE_R_SQUARED,
    })
}

/// Model whose total energy is formed along both orders of limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    FreeScalar,
    InteractingScalar(Couplings),
}

/// Relative tolerance for sum-then-regularize against the ε → 0 cutoff total.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-7;
/// Absolute spread allowed in the bulk-subtracted cutoff totals across ε.
pub const EPSILON_INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialRow {
    pub delta: f64,
    /// Electric part; only reported for the free scalar.
    pub electric: Option<f64>,
    pub magnetic: Option<f64>,
    pub total: f64,
    /// Closed form of the diverging component.
    pub expected: f64,
    /// Diverging component minus its sum-then-regularize value.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaFit {
    pub component: &'static str,
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub conclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffRow {
    pub epsilon: f64,
    /// `(π/2L) Σ n e^{-εn}`, removed before comparison.
    pub bulk_divergence: f64,
    /// `∫₀^L` of the position-dependent electric density.
    pub electric_position_integral: f64,
    /// `∫₀^L` of the position-dependent interaction correction, if any.
    pub correction_position_integral: Option<f64>,
    pub electric: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub sum_then_regularize: f64,
    pub cutoff_limit: f64,
    pub limit_method: &'static str,
    pub route_difference: f64,
    pub routes_agree: bool,
    pub cutoff_spread: f64,
    pub epsilon_independent: bool,
    pub partial_totals_diverge: bool,
    pub route_tolerance: f64,
    pub independence_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutationReport {
    pub model: &'static str,
    pub length: f64,
    pub alpha: Option<f64>,
    pub mass: Option<f64>,
    pub sum_then_regularize: f64,
    pub partial_totals: Vec<PartialRow>,
    pub divergence_fit: DeltaFit,
    pub cutoff_totals: Vec<CutoffRow>,
    pub verdict: Verdict,
}

fn check_decreasing(name: &str, values: &[f64], upper: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("{name} list is empty")));
    }
    if values.iter().any(|&v| !(v.is_finite() && v > 0.0 && v < upper)) {
        return Err(Error::InvalidInput(format!("{name} values must lie in (0, {upper})")));
    }
    if values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput(format!("{name} list must be strictly decreasing")));
    }
    Ok(())
}

fn is_geometric(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let r = values[0] / values[1];
    values.windows(2).all(|w| ((w[0] / w[1]) - r).abs() <= 1e-9 * r)
}

/// Compares sum-then-regularize against integrate-then-regularize.
pub fn commutation_report(g: &Geometry, model: Model, deltas: &[f64], epsilons: &[f64]) -> Result<CommutationReport> {
    let l = g.length();
    check_decreasing("delta", deltas, 0.5 * l)?;
    check_decreasing("epsilon", epsilons, f64::INFINITY)?;
    if deltas.len() < 2 {
        return Err(Error::InvalidInput("need at least two margins to fit a divergence".into()));
    }

    let free_total = scalar1d::free_total_energy(g)?;
    let (model_name, couplings) = match model {
        Model::FreeScalar => ("free-scalar", None),
        Model::InteractingScalar(c) => ("interacting-scalar", Some(c)),
    };
    let finite = match couplings {
        None => free_total,
        Some(c) => scalar1d::interacting_total_energy(g, &c)?,
    };

    // (b) regularize the density, then integrate over [δ, L-δ]
    let mut partial_totals = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let row = match couplings {
            None => {
                let outcome = scalar1d::total_energy_by_route(
                    g,
                    Route::IntegrateRegularizedDensity { margin: delta },
                    RegScheme::ZetaContinuation,
                )?;
                let p = outcome.partial().expect("integration route yields partial totals");
                PartialRow {
                    delta,
                    electric: Some(p.electric),
                    magnetic: Some(p.magnetic),
                    total: p.total,
                    expected: p.expected_electric,
                    excess: p.electric - 0.5 * free_total,
                }
            }
            Some(c) => {
                let p = scalar1d::interacting_partial_total(g, &c, delta)?;
                PartialRow {
                    delta,
                    electric: None,
                    magnetic: None,
                    total: p.total,
                    expected: p.expected,
                    excess: p.total - finite,
                }
            }
        };
        partial_totals.push(row);
    }
    let points: Vec<(f64, f64)> = partial_totals.iter().map(|r| (r.delta, r.excess)).collect();
    let (exponent, amplitude, r_squared) = log_log_fit(&points)?;
    let divergence_fit = DeltaFit {
        component: if couplings.is_none() { "electric" } else { "total" },
        exponent,
        amplitude,
        r_squared,
        conclusive: r_squared >= CONCLUSIVE_R_SQUARED,
    };

    // (c) cutoff densities integrated over the whole interval, bulk removed
    let bulk_zeta_half = 0.5 * free_total;
    let mut cutoff_totals = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let scheme = RegScheme::cutoff(eps)?;
        let bulk_half_density = PI / (4.0 * l * l) * regsum::abel_sum_linear(eps)?;
        let electric_q = scalar1d::integrate_over_z(g, 0.0, l, Some(eps), |p| {
            Ok(scalar1d::cutoff_raw_split(g, p, eps)?.electric - bulk_half_density)
        })?;
        let magnetic_q = scalar1d::integrate_over_z(g, 0.0, l, Some(eps), |p| {
            Ok(scalar1d::cutoff_raw_split(g, p, eps)?.magnetic - bulk_half_density)
        })?;
        let correction = match couplings {
            None => None,
            Some(c) => Some(
                scalar1d::integrate_over_z(g, 0.0, l, Some(eps), |p| {
                    scalar1d::interacting_position_part_cutoff(g, p, &c, eps)
                })?
                .value,
            ),
        };
        let electric = bulk_zeta_half + electric_q.value;
        let mut total = electric + bulk_zeta_half + magnetic_q.value;
        if let (Some(c), Some(corr)) = (couplings, correction) {
            total += l * scalar1d::interacting_constant_part(g, &c) + corr;
        }
        debug_assert!(scheme.epsilon().is_some());
        cutoff_totals.push(CutoffRow {
            epsilon: eps,
            bulk_divergence: 2.0 * l * bulk_half_density,
            electric_position_integral: electric_q.value,
            correction_position_integral: correction,
            electric,
            total,
        });
    }

    // (d) verdict
    let totals: Vec<f64> = cutoff_totals.iter().map(|r| r.total).collect();
    let (cutoff_limit, limit_method) = if is_geometric(epsilons) {
        let samples: Vec<(f64, f64)> = epsilons.iter().cloned().zip(totals.iter().cloned()).collect();
        (regsum::richardson_extrapolate(&samples, 2)?.value, "richardson")
    } else {
        (*totals.last().expect("non-empty"), "smallest-epsilon")
    };
    let max = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = totals.iter().cloned().fold(f64::INFINITY, f64::min);
    let route_difference = cutoff_limit - finite;
    let verdict = Verdict {
        sum_then_regularize: finite,
        cutoff_limit,
        limit_method,
        route_difference,
        routes_agree: route_difference.abs() <= ROUTE_AGREEMENT_TOL * finite.abs(),
        cutoff_spread: max - min,
        epsilon_independent: max - min <= EPSILON_INDEPENDENCE_TOL,
        partial_totals_diverge: divergence_fit.conclusive && divergence_fit.exponent < -0.5,
        route_tolerance: ROUTE_AGREEMENT_TOL,
        independence_tolerance: EPSILON_INDEPENDENCE_TOL,
    };

    Ok(CommutationReport {
        model: model_name,
        length: l,
        alpha: couplings.map(|c| c.alpha()),
        mass: couplings.map(|c| c.mass()),
        sum_then_regularize: finite,
        partial_totals,
        divergence_fit,
        cutoff_totals,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub theta: f64,
    /// Coefficient `-(1/8) cos θ / sin³θ` of ε².
    pub eps2_coefficient: f64,
    /// `(ε, S(ε,θ) - ½cot θ + (1/8)(cos θ/sin³θ) ε²)`.
    pub residuals: Vec<(f64, f64)>,
    /// Log-log slope of |residual| against ε; `None` when the residuals sit
    /// at rounding level.
    pub slope: Option<f64>,
    /// The expansion is not expected to hold: θ (or π-θ) is below the largest ε.
    pub breakdown: bool,
}

/// Residual scaling of the small-ε expansion of `S(ε, θ)` at each angle.
pub fn epsilon_expansion_check(thetas: &[f64], epsilons: &[f64]) -> Result<Vec<ExpansionRow>> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidInput("need at least three cutoffs".into()));
    }
    if epsilons.iter().any(|&e| !(e.is_finite() && e > 0.0))
        || epsilons.windows(2).any(|w| ((w[0] / w[1]) - 2.0).abs() > 1e-9)
    {
        return Err(Error::InvalidInput("cutoffs must be positive and halve at each step".into()));
    }
    let eps_max = epsilons[0];
    thetas
        .iter()
        .map(|&theta| {
            let s = theta.sin();
            let limit = regsum::abel_sum_sin_limit(theta)?;
            let coeff = -theta.cos() / (8.0 * s * s * s);
            let residuals = epsilons
                .iter()
                .map(|&e| Ok((e, regsum::abel_sum_sin(e, theta)? - limit - coeff * e * e)))
                .collect::<Result<Vec<_>>>()?;
            let noise = 1e-14 * (1.0 + limit.abs());
            let slope = if residuals.iter().all(|r| r.1.abs() <= noise) {
                None
            } else {
                Some(log_log_fit(&residuals)?.0)
            };
            Ok(ExpansionRow {
                theta,
                eps2_coefficient: coeff,
                residuals,
                slope,
                breakdown: theta.min(PI - theta) < eps_max,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(l: f64) -> Geometry {
        Geometry::new(l).unwrap()
    }

    #[test]
    fn grids() {
        let u = GridSpec::new(3, Clustering::Uniform).unwrap().angles();
        assert!((u[1] - PI / 2.0).abs() < 1e-15);
        let c = GridSpec::new(5, Clustering::Endpoints).unwrap().angles();
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c[0] > 0.0 && c[4] < PI);
        assert!((c[2] - PI / 2.0).abs() < 1e-15);
        assert!(c[0] < u[0]);
        assert!(GridSpec::new(1, Clustering::Uniform).is_err());
    }

    #[test]
    fn scalar_profile_midpoint() {
        let g = geom(1.0);
        let spec = GridSpec::new(101, Clustering::Uniform).unwrap();
        let p = sample_profile(ProfileSource::ScalarFree, &g, RegScheme::ZetaContinuation, &spec).unwrap();
        assert_eq!(p.values.len(), 101);
        assert!((p.values[50].electric - PI / 24.0).abs() < 1e-14);
        assert!(p.corrections.is_none());
    }

    #[test]
    fn em_profile_is_constant() {
        let g = geom(1.0);
        let spec = GridSpec::new(21, Clustering::Endpoints).unwrap();
        let p = sample_profile(ProfileSource::EmFree, &g, RegScheme::ZetaContinuation, &spec).unwrap();
        for v in &p.values {
            assert!((v.total + PI * PI / 720.0).abs() < 1e-12 * v.electric.abs().max(1.0));
        }
        assert!(sample_profile(ProfileSource::EmFree, &g, RegScheme::cutoff(0.1).unwrap(), &spec).is_err());
    }

    #[test]
    fn divergence_exponents() {
        let g = geom(1.0);
        let spec = GridSpec::new(101, Clustering::Uniform).unwrap();
        let scalar = sample_profile(ProfileSource::ScalarFree, &g, RegScheme::ZetaContinuation, &spec).unwrap();
        for end in [Endpoint::Left, Endpoint::Right] {
            let f = fit_divergence(&scalar, end, FitTarget::Electric).unwrap();
            assert!((f.exponent + 2.0).abs() < 0.02, "{f:?}");
            assert!(f.conclusive);
        }
        let em = sample_profile(ProfileSource::EmFree, &g, RegScheme::ZetaContinuation, &spec).unwrap();
        let f = fit_divergence(&em, Endpoint::Left, FitTarget::Electric).unwrap();
        assert_eq!(f.axis, FitAxis::Distance);
        assert!((f.exponent + 4.0).abs() < 0.02, "{f:?}");
        let eh = sample_profile(
            ProfileSource::EmEulerHeisenberg(EhCouplings::default()),
            &g,
            RegScheme::ZetaContinuation,
            &spec,
        )
        .unwrap();
        let f = fit_divergence(&eh, Endpoint::Left, FitTarget::Correction).unwrap();
        assert!((f.exponent + 8.0).abs() < 0.1, "{f:?}");
        // free scalar total has no position dependence to fit
        assert!(fit_divergence(&scalar, Endpoint::Left, FitTarget::Total).is_err());
        assert!(fit_divergence(&scalar, Endpoint::Left, FitTarget::Correction).is_err());
    }

    #[test]
    fn fit_is_robust_to_window_halving() {
        let g = geom(1.0);
        let spec = GridSpec::new(201, Clustering::Endpoints).unwrap();
        let sources = [
            (ProfileSource::ScalarFree, FitTarget::Electric),
            (ProfileSource::EmFree, FitTarget::Electric),
            (ProfileSource::EmEulerHeisenberg(EhCouplings::default()), FitTarget::Correction),
            (ProfileSource::ScalarInteracting(Couplings::new(0.01, 10.0).unwrap()), FitTarget::Correction),
        ];
        for (src, target) in sources {
            let p = sample_profile(src, &g, RegScheme::ZetaContinuation, &spec).unwrap();
            let mut opts = FitOptions::for_source(&src, Endpoint::Left, target);
            opts.window = 8;
            let wide = fit_divergence_with(&p, &opts).unwrap();
            opts.window = 4;
            let narrow = fit_divergence_with(&p, &opts).unwrap();
            assert!((wide.exponent - narrow.exponent).abs() < 0.05, "{src:?}");
        }
    }

    #[test]
    fn least_squares_exact_line() {
        let (s, i, r2) = least_squares_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
        assert!(log_log_fit(&[(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(least_squares_line(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn free_scalar_commutation() {
        let g = geom(1.0);
        let r = commutation_report(
            &g,
            Model::FreeScalar,
            &[0.02, 0.01, 0.005, 0.0025],
            &[0.08, 0.04, 0.02, 0.01],
        )
        .unwrap();
        assert!((r.sum_then_regularize + PI / 24.0).abs() < 1e-15);
        assert!((r.divergence_fit.exponent + 1.0).abs() < 0.02, "{:?}", r.divergence_fit);
        assert!(r.verdict.epsilon_independent, "{:?}", r.verdict);
        assert!(r.verdict.routes_agree);
        assert!(r.verdict.partial_totals_diverge);
        for row in &r.cutoff_totals {
            assert!((row.total + PI / 24.0).abs() < 1e-8);
            assert!((row.electric + PI / 48.0).abs() < 1e-8);
        }
        let electric: Vec<f64> = r.partial_totals.iter().map(|p| p.electric.unwrap()).collect();
        assert!(electric.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interacting_scalar_commutation() {
        let g = geom(1.0);
        let c = Couplings::new(0.01, 10.0).unwrap();
        let r = commutation_report(
            &g,
            Model::InteractingScalar(c),
            &[0.02, 0.01, 0.005, 0.0025],
            &[0.08, 0.04, 0.02, 0.01],
        )
        .unwrap();
        assert!((r.sum_then_regularize + 0.130_906_55).abs() < 5e-9);
        assert!(r.verdict.routes_agree, "{:?}", r.verdict);
        assert!(r.verdict.epsilon_independent, "{:?}", r.verdict);
        assert!((r.divergence_fit.exponent + 3.0).abs() < 0.1, "{:?}", r.divergence_fit);
    }

    #[test]
    fn commutation_preconditions() {
        let g = geom(1.0);
        assert!(commutation_report(&g, Model::FreeScalar, &[0.6, 0.1], &[0.1]).is_err());
        assert!(commutation_report(&g, Model::FreeScalar, &[0.01, 0.02], &[0.1]).is_err());
        assert!(commutation_report(&g, Model::FreeScalar, &[0.02, 0.01], &[0.0]).is_err());
        assert!(commutation_report(&g, Model::FreeScalar, &[0.02], &[0.1]).is_err());
    }

    #[test]
    fn expansion_check() {
        let rows = epsilon_expansion_check(&[1.0, PI / 2.0, 0.005], &[0.04, 0.02, 0.01]).unwrap();
        assert!((rows[0].slope.unwrap() - 4.0).abs() < 0.1);
        assert!(!rows[0].breakdown);
        assert!(rows[1].eps2_coefficient.abs() < 1e-15);
        assert!(!rows[1].breakdown);
        assert!(rows[2].breakdown);
        assert!(epsilon_expansion_check(&[1.0], &[0.04, 0.02]).is_err());
        assert!(epsilon_expansion_check(&[1.0], &[0.04, 0.03, 0.01]).is_err());
    }
}
