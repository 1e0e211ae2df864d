//! Invariant suites run by `casimir verify`.

use std::f64::consts::PI;

use casimir_core::em3d::{self, EhCouplings};
use casimir_core::limits::{self, Clustering, Endpoint, FitTarget, GridSpec, Model, ProfileSource};
use casimir_core::regsum::{self, CutoffLadder};
use casimir_core::scalar1d::{self, Couplings};
use casimir_core::specfun;
use casimir_core::{Geometry, Position, RegScheme};
use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

/// Environment variable that multiplies every tolerance.
pub const TOLERANCE_SCALE_ENV: &str = "CASIMIR_VERIFY_TOLERANCE_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub length: f64,
    pub tolerance_scale: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Reads the tolerance scale from the environment; 1 when unset.
pub fn tolerance_scale_from_env() -> Result<f64, CliError> {
    match std::env::var(TOLERANCE_SCALE_ENV) {
        Err(_) => Ok(1.0),
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| CliError::config(TOLERANCE_SCALE_ENV, format!("cannot parse `{s}` as a non-negative number"))),
    }
}

/// Deterministic low-discrepancy points in `(lo, hi)`.
pub fn interior_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (1..=n).map(|i| lo + (hi - lo) * (i as f64 * GOLDEN).fract()).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

type Measure = Box<dyn Fn(&Geometry) -> casimir_core::Result<f64>>;

fn max_over(points: &[f64], f: impl Fn(f64) -> casimir_core::Result<f64>) -> casimir_core::Result<f64> {
    points.iter().try_fold(0.0f64, |m, &t| Ok(m.max(f(t)?)))
}

fn direct_sine_sum(eps: f64, theta: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 1u32;
    loop {
        let damp = (-eps * n as f64).exp();
        if damp < 1e-20 {
            break;
        }
        sum += damp * (2.0 * theta * n as f64).sin();
        n += 1;
    }
    sum
}

fn exponent(source: ProfileSource, target: FitTarget, expected: f64) -> Measure {
    Box::new(move |g| {
        let spec = GridSpec::new(101, Clustering::Uniform)?;
        let p = limits::sample_profile(source, g, RegScheme::ZetaContinuation, &spec)?;
        Ok((limits::fit_divergence(&p, Endpoint::Left, target)?.exponent - expected).abs())
    })
}

fn quick_checks() -> Vec<(&'static str, f64, Measure)> {
    vec![
        ("zeta(-1) = -1/12", 1e-14, Box::new(|_| Ok((specfun::riemann_zeta(-1.0)? + 1.0 / 12.0).abs()))),
        ("zeta(-2) = 0", 1e-14, Box::new(|_| Ok(specfun::riemann_zeta(-2.0)?.abs()))),
        (
            "free scalar total = -pi/24L",
            1e-12,
            Box::new(|g| Ok(rel(scalar1d::free_total_energy(g)?, -PI / (24.0 * g.length())))),
        ),
        (
            "scalar electric + magnetic = -pi/24L^2",
            1e-12,
            Box::new(|g| {
                let l = g.length();
                max_over(&interior_points(20, 0.01, PI - 0.01), |t| {
                    let s = scalar1d::density_split(g, &Position::from_theta(t, g)?, RegScheme::ZetaContinuation)?;
                    Ok(rel(s.total, -PI / (24.0 * l * l)))
                })
            }),
        ),
        (
            "em (<E^2>+<B^2>)/2 = -pi^2/720L^4",
            1e-12,
            Box::new(|g| {
                max_over(&interior_points(100, 0.5, PI - 0.5), |t| {
                    let c = em3d::correlators(g, &Position::from_theta(t, g)?)?;
                    Ok(rel(c.energy_density(), em3d::free_casimir_density(g)))
                })
            }),
        ),
        (
            "force per area: numeric vs analytic derivative",
            1e-8,
            Box::new(|g| Ok(rel(em3d::casimir_force_per_area_numeric(g, 1e-5)?, em3d::casimir_force_per_area(g)))),
        ),
        (
            "cutoff sine series: closed form vs direct sum",
            1e-10,
            Box::new(|_| {
                let mut worst = 0.0f64;
                for eps in [0.05, 0.1, 0.5] {
                    for theta in [0.3, 1.0, 2.5] {
                        worst = worst.max(rel(regsum::abel_sum_sin(eps, theta)?, direct_sine_sum(eps, theta)));
                    }
                }
                Ok(worst)
            }),
        ),
        (
            "small-cutoff residual slope = 4",
            0.1,
            Box::new(|_| {
                let rows = limits::epsilon_expansion_check(&[0.5, 1.0, 2.0], &[0.04, 0.02, 0.01])?;
                Ok(rows
                    .iter()
                    .map(|r| r.slope.map_or(f64::INFINITY, |s| (s - 4.0).abs()))
                    .fold(0.0, f64::max))
            }),
        ),
        (
            "zeta vs extrapolated cutoff electric density",
            1e-7,
            Box::new(|g| {
                let l = g.length();
                max_over(&interior_points(20, 0.2, PI - 0.2), |t| {
                    let pos = Position::from_theta(t, g)?;
                    let zeta = scalar1d::electric_density(g, &pos, RegScheme::ZetaContinuation)?;
                    let lim = CutoffLadder::for_angle(t)
                        .extrapolate(|e| scalar1d::electric_density(g, &pos, RegScheme::cutoff(e)?))?;
                    Ok((lim.value - zeta).abs() / (PI / (16.0 * l * l)))
                })
            }),
        ),
        (
            "integrate-then-regularize divergence exponent = -1",
            0.02,
            Box::new(|g| {
                let l = g.length();
                let r = limits::commutation_report(
                    g,
                    Model::FreeScalar,
                    &[0.02 * l, 0.01 * l, 0.005 * l, 0.0025 * l],
                    &[0.04, 0.02, 0.01],
                )?;
                Ok((r.divergence_fit.exponent + 1.0).abs())
            }),
        ),
        (
            "bulk-subtracted cutoff total spread over epsilon",
            1e-8,
            Box::new(|g| {
                let r = limits::commutation_report(g, Model::FreeScalar, &[0.02, 0.01], &[0.04, 0.02, 0.01])?;
                Ok(r.verdict.cutoff_spread)
            }),
        ),
        (
            "interacting scalar total = L x constant density",
            1e-14,
            Box::new(|g| {
                let c = Couplings::new(0.01, 10.0)?;
                let k = scalar1d::interacting_total_consistency(g, &c, 0.05)?;
                let identity = if k.rational_identity { 0.0 } else { 1.0 };
                Ok(identity + rel(k.length_times_constant, k.total))
            }),
        ),
        (
            "euler-heisenberg correction ratio L=1 vs L=2 = 128",
            1e-12,
            Box::new(|_| {
                let c = EhCouplings::default();
                let identity = if em3d::eh_total_identity() { 0.0 } else { 1.0 };
                let ratio = em3d::eh_total_correction(&Geometry::new(1.0)?, &c)
                    / em3d::eh_total_correction(&Geometry::new(2.0)?, &c);
                Ok(identity + rel(ratio, 128.0))
            }),
        ),
        (
            "near-plate <E^2> 16 pi^2 z^4 -> 3 at theta = 0.01",
            5e-4,
            Box::new(|g| {
                let z = 0.01 * g.length() / PI;
                let c = em3d::correlators(g, &Position::from_z(z, g)?)?;
                Ok(rel(c.e2 * 16.0 * PI * PI * z.powi(4), 3.0))
            }),
        ),
        (
            "profile F closed form vs -1/2 cot'''",
            1e-9,
            Box::new(|_| {
                max_over(&interior_points(20, 0.05, PI - 0.05), |t| {
                    let f = em3d::profile_f(t)?;
                    Ok((f - em3d::profile_f_from_cot(t)?).abs() / f.abs().max(1.0))
                })
            }),
        ),
        ("scalar electric near-plate exponent = -2", 0.02, exponent(ProfileSource::ScalarFree, FitTarget::Electric, -2.0)),
        ("em <E^2> near-plate exponent = -4", 0.02, exponent(ProfileSource::EmFree, FitTarget::Electric, -4.0)),
        (
            "euler-heisenberg correction near-plate exponent = -8",
            0.1,
            exponent(ProfileSource::EmEulerHeisenberg(EhCouplings::default()), FitTarget::Correction, -8.0),
        ),
    ]
}

fn full_checks() -> Vec<(&'static str, f64, Measure)> {
    vec![
        (
            "cutoff mode sum (N = 50000, eps = 1e-3) vs closed form",
            1e-6,
            Box::new(|g| {
                let l = g.length();
                let eps = 1e-3;
                max_over(&interior_points(20, 0.05, PI - 0.05), |t| {
                    let pos = Position::from_theta(t, g)?;
                    let closed = scalar1d::cutoff_raw_split(g, &pos, eps)?.electric;
                    let mut sum = 0.0;
                    for n in 1..=50_000u32 {
                        let nf = n as f64;
                        sum += nf * (-eps * nf).exp() * (1.0 - (2.0 * nf * t).cos());
                    }
                    Ok(rel(PI / (4.0 * l * l) * sum, closed))
                })
            }),
        ),
        (
            "zeta vs extrapolated cutoff electric density (100 points)",
            1e-7,
            Box::new(|g| {
                let l = g.length();
                max_over(&interior_points(100, 0.2, PI - 0.2), |t| {
                    let pos = Position::from_theta(t, g)?;
                    let zeta = scalar1d::electric_density(g, &pos, RegScheme::ZetaContinuation)?;
                    let lim = CutoffLadder::for_angle(t)
                        .extrapolate(|e| scalar1d::electric_density(g, &pos, RegScheme::cutoff(e)?))?;
                    Ok((lim.value - zeta).abs() / (PI / (16.0 * l * l)))
                })
            }),
        ),
        (
            "interacting scalar: routes agree",
            limits::ROUTE_AGREEMENT_TOL,
            Box::new(|g| {
                let c = Couplings::new(0.01, 10.0)?;
                let r = limits::commutation_report(
                    g,
                    Model::InteractingScalar(c),
                    &[0.02, 0.01, 0.005, 0.0025],
                    &[0.04, 0.02, 0.01],
                )?;
                Ok(r.verdict.route_difference.abs() / r.sum_then_regularize.abs())
            }),
        ),
        (
            "free scalar: routes agree",
            limits::ROUTE_AGREEMENT_TOL,
            Box::new(|g| {
                let r = limits::commutation_report(g, Model::FreeScalar, &[0.02, 0.01], &[0.04, 0.02, 0.01])?;
                Ok(r.verdict.route_difference.abs() / r.sum_then_regularize.abs())
            }),
        ),
        (
            "near-plate <E^2> 16 pi^2 z^4 -> 3 at theta = 0.05",
            1e-2,
            Box::new(|g| {
                let z = 0.05 * g.length() / PI;
                let c = em3d::correlators(g, &Position::from_z(z, g)?)?;
                Ok(rel(c.e2 * 16.0 * PI * PI * z.powi(4), 3.0))
            }),
        ),
        (
            "zeta functional equation at negative integers",
            1e-12,
            Box::new(|_| {
                let mut worst = 0.0f64;
                for n in 1..=9 {
                    let s = -(n as f64);
                    let exact = specfun::riemann_zeta(s)?;
                    // approach the integer from both sides
                    let near = 0.5 * (specfun::riemann_zeta(s + 1e-7)? + specfun::riemann_zeta(s - 1e-7)?);
                    worst = worst.max((near - exact).abs() / exact.abs().max(1e-3));
                }
                Ok(worst)
            }),
        ),
        (
            "gamma recurrence",
            1e-12,
            Box::new(|_| {
                max_over(&interior_points(100, 0.1, 20.0), |x| {
                    Ok(rel(specfun::gamma(x + 1.0)?, x * specfun::gamma(x)?))
                })
            }),
        ),
    ]
}

fn run_check(name: &'static str, tolerance: f64, scale: f64, g: &Geometry, measure: &Measure) -> Check {
    let tolerance = tolerance * scale;
    match measure(g) {
        Ok(measured) => Check {
            name,
            measured,
            tolerance,
            passed: measured < tolerance,
            error: None,
        },
        Err(e) => Check {
            name,
            measured: f64::NAN,
            tolerance,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

/// Runs a suite at the given separation. `scale` multiplies every tolerance.
pub fn run_suite(suite: Suite, g: &Geometry, scale: f64) -> VerifyReport {
    let mut specs = quick_checks();
    if suite == Suite::Full {
        specs.extend(full_checks());
    }
    let checks: Vec<Check> = specs
        .iter()
        .map(|(name, tol, m)| {
            let c = run_check(name, *tol, scale, g, m);
            log::info!("{} {}: measured {:e}, tolerance {:e}", if c.passed { "pass" } else { "FAIL" }, c.name, c.measured, c.tolerance);
            c
        })
        .collect();
    VerifyReport {
        suite,
        length: g.length(),
        tolerance_scale: scale,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run_suite(Suite::Quick, &Geometry::new(1.0).unwrap(), 1.0);
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.passed);
    }

    #[test]
    fn quick_suite_passes_at_other_length() {
        let r = run_suite(Suite::Quick, &Geometry::new(2.5).unwrap(), 1.0);
        assert!(r.passed, "{:?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }

    #[test]
    fn zero_scale_fails_everything() {
        let r = run_suite(Suite::Quick, &Geometry::new(1.0).unwrap(), 0.0);
        assert_eq!(r.failed(), r.checks.len());
    }

    #[test]
    fn points_are_interior_and_deterministic() {
        let a = interior_points(100, 0.2, 3.0);
        assert_eq!(a, interior_points(100, 0.2, 3.0));
        assert!(a.iter().all(|&t| t > 0.2 && t < 3.0));
    }
}
