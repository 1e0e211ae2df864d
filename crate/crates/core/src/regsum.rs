//! Regularized summation of the divergent series that appear in mode sums.
//!
//! Two schemes are supported. Zeta continuation assigns `Σ n^p → ζ(-p)` and
//! `Σ sin(2θn) → ½ cot θ`; the exponential cutoff damps every term by
//! `e^{-εn}` and evaluates the resulting geometric series in closed form.
//! Only the series shapes needed by the models are recognised: power series
//! and the harmonic sine/cosine series in `2θ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::specfun::{self, is_boundary_angle};

/// Positive exponential-cutoff parameter ε.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cutoff(f64);

impl Cutoff {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon("Cutoff", epsilon).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// How a divergent sum is given a finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegScheme {
    ZetaContinuation,
    ExpCutoff(Cutoff),
}

impl RegScheme {
    pub fn cutoff(epsilon: f64) -> Result<Self> {
        Cutoff::new(epsilon).map(RegScheme::ExpCutoff)
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            RegScheme::ZetaContinuation => None,
            RegScheme::ExpCutoff(c) => Some(c.value()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegScheme::ZetaContinuation => "zeta",
            RegScheme::ExpCutoff(_) => "cutoff",
        }
    }
}

/// Tolerances used by the agreement checks in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for closed-form against closed-form comparisons.
    pub closed_form: f64,
    /// Absolute tolerance for extrapolated limits.
    pub extrapolated: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closed_form: 1e-10,
            extrapolated: 1e-6,
        }
    }
}

/// The series `scale · Σ_{n≥1} n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSeries {
    pub exponent: f64,
    pub scale: f64,
}

impl PowerSeries {
    pub fn new(exponent: f64, scale: f64) -> Result<Self> {
        ensure_finite("PowerSeries exponent", exponent)?;
        ensure_finite("PowerSeries scale", scale)?;
        Ok(Self { exponent, scale })
    }
}

/// Something that can assign a finite value to a divergent power series.
///
/// Physical totals take the engine as a parameter so callers (and tests) can
/// see exactly which series was handed over for regularization.
pub trait SeriesRegularizer {
    fn power_sum(&self, series: &PowerSeries) -> Result<f64>;
}

/// Zeta-function continuation engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZetaEngine;

impl SeriesRegularizer for ZetaEngine {
    fn power_sum(&self, series: &PowerSeries) -> Result<f64> {
        zeta_regularize_power(series)
    }
}

/// `scale · ζ(-p)`.
pub fn zeta_regularize_power(series: &PowerSeries) -> Result<f64> {
    if series.exponent == -1.0 {
        return Err(Error::Pole {
            function: "zeta_regularize_power (harmonic series)",
            at: 1.0,
        });
    }
    Ok(series.scale * specfun::riemann_zeta(-series.exponent)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigFlavor {
    Sin,
    Cos,
}

/// `Σ_{n≥1} sin(2θn)` or `Σ_{n≥1} cos(2θn)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigSeries {
    theta: f64,
    flavor: TrigFlavor,
}

impl TrigSeries {
    pub fn new(theta: f64, flavor: TrigFlavor) -> Result<Self> {
        check_angle("TrigSeries", theta)?;
        Ok(Self { theta, flavor })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn flavor(&self) -> TrigFlavor {
        self.flavor
    }

    /// Zeta (equivalently ε → 0 Abel) value; singular at the endpoints.
    pub fn regularized(&self) -> Result<f64> {
        match self.flavor {
            TrigFlavor::Sin => abel_sum_sin_limit(self.theta),
            TrigFlavor::Cos => {
                if is_boundary_angle(self.theta) {
                    Err(Error::Singularity {
                        quantity: "Σ cos(2θn)",
                        theta: self.theta,
                    })
                } else {
                    Ok(-0.5)
                }
            }
        }
    }

    /// Value with every term damped by `e^{-εn}`.
    pub fn with_cutoff(&self, eps: f64) -> Result<f64> {
        match self.flavor {
            TrigFlavor::Sin => abel_sum_sin(eps, self.theta),
            TrigFlavor::Cos => abel_sum_cos(eps, self.theta),
        }
    }
}

fn check_epsilon(function: &'static str, eps: f64) -> Result<f64> {
    if eps.is_finite() && eps > 0.0 {
        Ok(eps)
    } else {
        Err(Error::Domain {
            function,
            value: eps,
            reason: "cutoff must be positive and finite",
        })
    }
}

fn check_angle(function: &'static str, theta: f64) -> Result<f64> {
    if (0.0..=PI).contains(&theta) {
        Ok(theta)
    } else {
        Err(Error::Domain {
            function,
            value: theta,
            reason: "angle must lie in [0, π]",
        })
    }
}

/// `(1 - e^{-ε})² + 4 e^{-ε} sin²θ`, the denominator of the cutoff sums
/// written without the cancellation in `1 - 2e^{-ε}cos 2θ + e^{-2ε}`.
fn cutoff_denominator(eps: f64, theta: f64) -> f64 {
    let one_minus = -(-eps).exp_m1();
    let s = theta.sin();
    one_minus * one_minus + 4.0 * (-eps).exp() * s * s
}

/// `S(ε, θ) = Σ e^{-εn} sin(2θn) = e^{-ε} sin 2θ / (1 - 2e^{-ε} cos 2θ + e^{-2ε})`.
pub fn abel_sum_sin(eps: f64, theta: f64) -> Result<f64> {
    check_epsilon("abel_sum_sin", eps)?;
    check_angle("abel_sum_sin", theta)?;
    if theta == 0.0 || theta == PI {
        return Ok(0.0);
    }
    let a = (-eps).exp();
    Ok(a * 2.0 * theta.sin() * theta.cos() / cutoff_denominator(eps, theta))
}

/// `Σ e^{-εn} cos(2θn) = (e^{-ε} cos 2θ - e^{-2ε}) / (1 - 2e^{-ε} cos 2θ + e^{-2ε})`.
pub fn abel_sum_cos(eps: f64, theta: f64) -> Result<f64> {
    check_epsilon("abel_sum_cos", eps)?;
    check_angle("abel_sum_cos", theta)?;
    let u = abel_kernel(eps, theta);
    Ok(u.re)
}

/// `u = 1 / (e^{ε - 2iθ} - 1) = Σ_{n≥1} e^{-εn} e^{2iθn}`.
fn abel_kernel(eps: f64, theta: f64) -> Complex64 {
    let y = -2.0 * theta;
    let half = 0.5 * y;
    let re = eps.exp_m1() * y.cos() - 2.0 * half.sin() * half.sin();
    let im = eps.exp() * y.sin();
    Complex64::new(re, im).inv()
}

/// `∂S(ε, θ)/∂θ`, from the analytic derivative of the closed form.
pub fn abel_sum_sin_dtheta(eps: f64, theta: f64) -> Result<f64> {
    check_epsilon("abel_sum_sin_dtheta", eps)?;
    check_angle("abel_sum_sin_dtheta", theta)?;
    // S = Im u(w), w = ε - 2iθ, u' = -u(1+u)
    let u = abel_kernel(eps, theta);
    Ok(2.0 * (u * (1.0 + u)).re)
}

/// `∂³S(ε, θ)/∂θ³`.
pub fn abel_sum_sin_d3theta(eps: f64, theta: f64) -> Result<f64> {
    check_epsilon("abel_sum_sin_d3theta", eps)?;
    check_angle("abel_sum_sin_d3theta", theta)?;
    // u''' = -u(1+u)(1+6u+6u²), ∂θ³ = (-2i)³ ∂w³
    let u = abel_kernel(eps, theta);
    let third = -(u * (1.0 + u) * (1.0 + 6.0 * u + 6.0 * u * u));
    Ok(8.0 * third.re)
}

/// `½ cot θ`: the ε → 0 limit of [`abel_sum_sin`] and the zeta value of `Σ sin(2θn)`.
pub fn abel_sum_sin_limit(theta: f64) -> Result<f64> {
    ensure_finite("abel_sum_sin_limit", theta)?;
    match specfun::cot(theta) {
        Ok(c) => Ok(0.5 * c),
        Err(_) => Err(Error::Singularity {
            quantity: "½ cot θ",
            theta,
        }),
    }
}

/// `Σ n e^{-εn} = e^{-ε} / (1 - e^{-ε})² = 1 / (4 sinh²(ε/2))`.
pub fn abel_sum_linear(eps: f64) -> Result<f64> {
    check_epsilon("abel_sum_linear", eps)?;
    let sh = (0.5 * eps).sinh();
    Ok(0.25 / (sh * sh))
}

/// An extrapolated limit with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// Difference between the last two extrapolation stages.
    pub error_estimate: f64,
}

/// Richardson extrapolation to `h → 0` for `f(h) = f₀ + c₁h^p + c₂h^{2p} + …`
/// with `p = order`. Samples must have strictly decreasing `h` in a constant ratio.
pub fn richardson_extrapolate(samples: &[(f64, f64)], order: u32) -> Result<Extrapolation> {
    if order == 0 {
        return Err(Error::InvalidInput("extrapolation order must be positive".into()));
    }
    let needed = (order as usize + 1).max(2);
    if samples.len() < needed {
        return Err(Error::InvalidInput(format!(
            "richardson extrapolation of order {order} needs at least {needed} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(h, v)| !(h.is_finite() && *h > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("samples must have finite values and positive h".into()));
    }
    let ratio = samples[0].0 / samples[1].0;
    if !(ratio > 1.0) {
        return Err(Error::InvalidInput("step sizes must be strictly decreasing".into()));
    }
    for w in samples.windows(2) {
        let r = w[0].0 / w[1].0;
        if !(r > 1.0) || (r - ratio).abs() > 1e-9 * ratio {
            return Err(Error::InvalidInput(format!(
                "step sizes are not geometric: ratio {r} differs from {ratio}"
            )));
        }
    }
    let mut row: Vec<f64> = vec![samples[0].1];
    let mut previous_stage_last = samples[0].1;
    for (i, &(_, v)) in samples.iter().enumerate().skip(1) {
        let mut next = Vec::with_capacity(i + 1);
        next.push(v);
        for k in 1..=i {
            let factor = ratio.powi((k as u32 * order) as i32);
            let improved = next[k - 1] + (next[k - 1] - row[k - 1]) / (factor - 1.0);
            next.push(improved);
        }
        previous_stage_last = next[i - 1];
        row = next;
    }
    let value = *row.last().expect("row is non-empty");
    Ok(Extrapolation {
        value,
        error_estimate: (value - previous_stage_last).abs(),
    })
}

/// Geometric ladder of cutoffs `ε_max, ε_max/2, …` used to take `ε → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffLadder {
    pub eps_max: f64,
    pub levels: usize,
}

impl CutoffLadder {
    /// The ladder `{0.04, 0.02, 0.01}`.
    pub const STANDARD: CutoffLadder = CutoffLadder {
        eps_max: 0.04,
        levels: 3,
    };

    /// A ladder whose largest ε stays well inside the radius of convergence
    /// (`2·min(θ, π-θ)`) of the small-ε expansion at `theta`.
    pub fn for_angle(theta: f64) -> Self {
        let dist = theta.min(PI - theta).max(0.0);
        Self {
            eps_max: 0.04 * dist.min(1.0),
            levels: 4,
        }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.eps_max / (1u64 << k) as f64).collect()
    }

    /// Evaluates `f` on the ladder and extrapolates to `ε = 0` in powers of ε².
    pub fn extrapolate<F>(&self, f: F) -> Result<Extrapolation>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let samples = self
            .epsilons()
            .into_iter()
            .map(|e| f(e).map(|v| (e, v)))
            .collect::<Result<Vec<_>>>()?;
        richardson_extrapolate(&samples, 2)
    }
}

/// Result of comparing the extrapolated cutoff sum with `½ cot θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeAgreement {
    pub zeta: f64,
    pub cutoff_limit: Extrapolation,
    pub agrees: bool,
}

/// Compares the ε → 0 extrapolation of `S(ε, θ)` with the zeta value.
pub fn sine_scheme_agreement(theta: f64, tol: &Tolerances) -> Result<SchemeAgreement> {
    let zeta = abel_sum_sin_limit(theta)?;
    let cutoff_limit = CutoffLadder::for_angle(theta).extrapolate(|e| abel_sum_sin(e, theta))?;
    Ok(SchemeAgreement {
        zeta,
        cutoff_limit,
        agrees: (cutoff_limit.value - zeta).abs() <= tol.extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // direct summation oracle, terms dropped once e^{-εn} < 1e-20
    fn direct_sum(eps: f64, mut term: impl FnMut(f64) -> f64) -> f64 {
        let n_max = (46.0 / eps).ceil() as u64;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for n in 1..=n_max {
            let y = term(n as f64) * (-eps * n as f64).exp() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn power_series_values() {
        let e = zeta_regularize_power(&PowerSeries::new(1.0, PI / 2.0).unwrap()).unwrap();
        assert!((e + PI / 24.0).abs() < 1e-15);
        assert_eq!(zeta_regularize_power(&PowerSeries::new(2.0, 1.0).unwrap()).unwrap(), 0.0);
        assert_eq!(zeta_regularize_power(&PowerSeries::new(0.0, 1.0).unwrap()).unwrap(), -0.5);
        assert!(matches!(
            zeta_regularize_power(&PowerSeries::new(-1.0, 1.0).unwrap()),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn abel_sin_matches_direct_sum() {
        let direct = direct_sum(0.1, |n| (2.0 * n).sin());
        let closed = abel_sum_sin(0.1, 1.0).unwrap();
        assert!((closed - direct).abs() < 1e-12);
        assert!((closed - 0.3199).abs() < 5e-5, "{closed}");
    }

    #[test]
    fn abel_sin_endpoints() {
        assert_eq!(abel_sum_sin(0.5, 0.0).unwrap(), 0.0);
        assert_eq!(abel_sum_sin(0.5, PI).unwrap(), 0.0);
        assert!(abel_sum_sin(0.0, 1.0).is_err());
        assert!(abel_sum_sin(-1.0, 1.0).is_err());
        assert!(abel_sum_sin(0.1, 4.0).is_err());
    }

    #[test]
    fn abel_cos_and_derivatives_match_direct_sums() {
        for &(eps, theta) in &[(0.2, 0.7), (0.05, 2.2), (0.5, 0.1)] {
            let c = direct_sum(eps, |n| (2.0 * theta * n).cos());
            assert!((abel_sum_cos(eps, theta).unwrap() - c).abs() < 1e-11);
            let d1 = direct_sum(eps, |n| 2.0 * n * (2.0 * theta * n).cos());
            assert!((abel_sum_sin_dtheta(eps, theta).unwrap() - d1).abs() < 1e-9 * d1.abs().max(1.0));
            let d3 = direct_sum(eps, |n| -8.0 * n * n * n * (2.0 * theta * n).cos());
            assert!((abel_sum_sin_d3theta(eps, theta).unwrap() - d3).abs() < 1e-9 * d3.abs().max(1.0));
            let s = direct_sum(eps, |n| (2.0 * theta * n).sin());
            assert!((abel_kernel(eps, theta).im - s).abs() < 1e-11);
        }
    }

    #[test]
    fn sine_limit_values() {
        assert!(abel_sum_sin_limit(PI / 2.0).unwrap().abs() < 1e-16);
        assert!((abel_sum_sin_limit(PI / 4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(abel_sum_sin_limit(0.0).is_err());
        assert!(abel_sum_sin_limit(PI).is_err());
        let samples: Vec<_> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| (e, abel_sum_sin(e, 1.0).unwrap()))
            .collect();
        let ex = richardson_extrapolate(&samples, 2).unwrap();
        assert!((ex.value - abel_sum_sin_limit(1.0).unwrap()).abs() < 1e-6);
        assert!((abel_sum_sin_limit(1.0).unwrap() - 0.321_05).abs() < 5e-5);
    }

    #[test]
    fn abel_linear_values() {
        let e = std::f64::consts::E;
        let direct = direct_sum(1.0, |n| n);
        let v = abel_sum_linear(1.0).unwrap();
        assert!((v - direct).abs() < 1e-14);
        assert!((v - e / ((e - 1.0) * (e - 1.0))).abs() < 1e-14);
        assert!((v - 0.920_673_5).abs() < 1e-7);

        let v = abel_sum_linear(0.01).unwrap();
        assert!((v - 1e4 + 1.0 / 12.0).abs() < 1e-4);
        assert!((v - 9999.9166).abs() < 1e-3);
        let direct = direct_sum(0.01, |n| n);
        assert!((v - direct).abs() < 1e-9 * v);

        let v = abel_sum_linear(50.0).unwrap();
        assert!((v / (-50f64).exp() - 1.0).abs() < 1e-15);
        assert!(abel_sum_linear(0.0).is_err());
    }

    #[test]
    fn richardson_examples() {
        let s: Vec<_> = [0.4, 0.2, 0.1].iter().map(|&h| (h, 3.0 + h * h)).collect();
        assert!((richardson_extrapolate(&s, 2).unwrap().value - 3.0).abs() < 1e-12);
        let c = [(1.0, 5.0), (0.5, 5.0), (0.25, 5.0)];
        let ex = richardson_extrapolate(&c, 1).unwrap();
        assert_eq!(ex.value, 5.0);
        assert_eq!(ex.error_estimate, 0.0);
    }

    #[test]
    fn richardson_errors() {
        assert!(richardson_extrapolate(&[(0.4, 1.0), (0.2, 1.0)], 2).is_err());
        assert!(richardson_extrapolate(&[(0.4, 1.0), (0.2, 1.0), (0.15, 1.0)], 2).is_err());
        assert!(richardson_extrapolate(&[(0.1, 1.0), (0.2, 1.0), (0.4, 1.0)], 2).is_err());
        assert!(richardson_extrapolate(&[(0.4, 1.0), (0.2, 1.0)], 0).is_err());
    }

    #[test]
    fn trig_series_wrapper() {
        let s = TrigSeries::new(1.0, TrigFlavor::Sin).unwrap();
        assert_eq!(s.regularized().unwrap(), abel_sum_sin_limit(1.0).unwrap());
        let c = TrigSeries::new(1.0, TrigFlavor::Cos).unwrap();
        assert_eq!(c.regularized().unwrap(), -0.5);
        // the cosine series has odd powers of ε as well
        let samples: Vec<_> = [0.04, 0.02, 0.01, 0.005]
            .iter()
            .map(|&e| (e, c.with_cutoff(e).unwrap()))
            .collect();
        let lim = richardson_extrapolate(&samples, 1).unwrap();
        assert!((lim.value + 0.5).abs() < 1e-10);
        assert!(TrigSeries::new(-0.1, TrigFlavor::Sin).is_err());
        assert!(TrigSeries::new(0.0, TrigFlavor::Cos).unwrap().regularized().is_err());
    }

    #[test]
    fn scheme_agreement_in_interior() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let tol = Tolerances {
            extrapolated: 1e-8,
            ..Tolerances::default()
        };
        for _ in 0..100 {
            let theta = rng.gen_range(0.1..PI - 0.1);
            let a = sine_scheme_agreement(theta, &tol).unwrap();
            assert!(a.agrees, "θ={theta}: {:?}", a);
        }
    }

    #[test]
    fn expansion_residual_is_fourth_order() {
        for &theta in &[0.5f64, 1.0, 2.0] {
            let s = theta.sin();
            let pts: Vec<(f64, f64)> = [0.04f64, 0.02, 0.01]
                .iter()
                .map(|&e| {
                    let r = abel_sum_sin(e, theta).unwrap() - 0.5 / theta.tan()
                        + theta.cos() / (8.0 * s * s * s) * e * e;
                    (e.ln(), r.abs().ln())
                })
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            assert!((slope - 4.0).abs() < 0.1, "θ={theta}: slope {slope}");
        }
    }

    proptest! {
        #[test]
        fn sine_sum_antisymmetric(eps in 1e-3f64..5.0, theta in 0.0f64..PI) {
            let a = abel_sum_sin(eps, theta).unwrap();
            let b = abel_sum_sin(eps, PI - theta).unwrap();
            // π - θ is rounded, which perturbs S by about |∂S/∂θ|·ulp(π)
            let slack = 1e-12 * (1.0 + abel_sum_sin_dtheta(eps, theta).unwrap().abs());
            prop_assert!((a + b).abs() <= slack, "a={} b={}", a, b);
        }

        #[test]
        fn sine_sum_endpoints_vanish(eps in 1e-6f64..100.0) {
            prop_assert_eq!(abel_sum_sin(eps, 0.0).unwrap(), 0.0);
            prop_assert_eq!(abel_sum_sin(eps, PI).unwrap(), 0.0);
        }

        #[test]
        fn closed_form_matches_kernel(eps in 1e-3f64..5.0, theta in 0.01f64..3.13) {
            let a = abel_sum_sin(eps, theta).unwrap();
            let b = abel_kernel(eps, theta).im;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
