//! Real-argument special functions: Riemann zeta, gamma, Bernoulli numbers
//! and a few trigonometric helpers that behave at their zeros and poles.
//!
//! Zeta is evaluated by Euler–Maclaurin summation for `s >= 0`, by the
//! functional equation for negative non-integer `s`, and from exact Bernoulli
//! numbers at the negative integers, so `ζ(-1) = -1/12` and `ζ(-2n) = 0`
//! come out bit-exact.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{ensure_finite, Error, Result};

/// Largest index served by [`bernoulli`].
pub const MAX_BERNOULLI_INDEX: usize = 64;

/// A finite real argument.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealArg(f64);

impl RealArg {
    pub fn new(value: f64) -> Result<Self> {
        ensure_finite("RealArg", value).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RealArg {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

fn bernoulli_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_n = -1/(n+1) * sum_{k<n} C(n+1, k) B_k, B_0 = 1
        let mut table: Vec<BigRational> = Vec::with_capacity(MAX_BERNOULLI_INDEX + 1);
        table.push(BigRational::one());
        for n in 1..=MAX_BERNOULLI_INDEX {
            let mut acc = BigRational::zero();
            let mut binom = BigInt::one(); // C(n+1, 0)
            for (k, b_k) in table.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * b_k;
                binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
            }
            table.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        table
    })
}

/// Bernoulli number `B_n` as an exact rational, with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Result<&'static BigRational> {
    bernoulli_table().get(n).ok_or_else(|| {
        Error::InvalidInput(format!(
            "bernoulli index {n} exceeds supported maximum {MAX_BERNOULLI_INDEX}"
        ))
    })
}

/// Bernoulli number `B_n` rounded to `f64`.
pub fn bernoulli_f64(n: usize) -> Result<f64> {
    bernoulli(n).map(rational_to_f64)
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if x.fract() == 0.0 {
        return 0.0;
    }
    let mut r = x % 2.0;
    if r < 0.0 {
        r += 2.0;
    }
    if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (r - 0.5)).cos()
    } else if r <= 1.25 {
        (PI * (1.0 - r)).sin()
    } else if r <= 1.75 {
        -(PI * (r - 1.5)).cos()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `cos(πx)` with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if (x - 0.5).fract() == 0.0 {
        return 0.0;
    }
    sin_pi(x + 0.5)
}

/// Treats `theta` as a boundary point of `[0, π]` when it is at or outside
/// the ends of the interval in double precision.
pub fn is_boundary_angle(theta: f64) -> bool {
    theta <= 0.0 || theta >= PI
}

fn interior_sin(quantity: &'static str, theta: f64) -> Result<f64> {
    ensure_finite(quantity, theta)?;
    let s = theta.sin();
    if is_boundary_angle(theta) || s == 0.0 {
        return Err(Error::Singularity { quantity, theta });
    }
    Ok(s)
}

/// `cot θ` for `θ` strictly inside `(0, π)`.
pub fn cot(theta: f64) -> Result<f64> {
    let s = interior_sin("cot", theta)?;
    Ok(theta.cos() / s)
}

/// `1 / sin²θ` for `θ` strictly inside `(0, π)`.
pub fn csc2(theta: f64) -> Result<f64> {
    let s = interior_sin("csc^2", theta)?;
    Ok(1.0 / (s * s))
}

/// Third derivative of `cot θ`: `-2 csc⁴θ - 4 cot²θ csc²θ`.
pub fn cot_third_derivative(theta: f64) -> Result<f64> {
    let s = interior_sin("cot'''", theta)?;
    let c = theta.cos();
    let csc2 = 1.0 / (s * s);
    let cot = c / s;
    Ok(-2.0 * csc2 * csc2 - 4.0 * cot * cot * csc2)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // split the power to stay finite up to x ~ 171
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * series
}

/// The gamma function on the real line.
pub fn gamma(x: f64) -> Result<f64> {
    ensure_finite("gamma", x)?;
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::Pole {
            function: "gamma",
            at: x,
        });
    }
    if x.fract() == 0.0 && x <= 171.0 {
        return Ok((1..x as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let reflected = gamma_lanczos(1.0 - x);
        return Ok(PI / (sin_pi(x) * reflected));
    }
    Ok(gamma_lanczos(x))
}

const EM_TERMS: usize = 20;
const EM_CORRECTIONS: usize = 16;

/// Euler–Maclaurin evaluation of ζ(s), valid for s > -(2·EM_CORRECTIONS + 1), s ≠ 1.
pub(crate) fn zeta_euler_maclaurin(s: f64) -> f64 {
    let n = EM_TERMS as f64;
    let mut sum = 0.0;
    for k in (1..EM_TERMS).rev() {
        sum += (k as f64).powf(-s);
    }
    let n_pow = n.powf(-s);
    sum += n * n_pow / (s - 1.0);
    sum += 0.5 * n_pow;
    // sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1)
    let mut rising = s; // s(s+1)...(s+2k-2)
    let mut fact = 2.0; // (2k)!
    let mut power = n_pow / n; // N^(-s-2k+1)
    for k in 1..=EM_CORRECTIONS {
        let b = bernoulli_f64(2 * k).expect("index within table");
        sum += b / fact * rising * power;
        let kf = k as f64;
        rising *= (s + 2.0 * kf - 1.0) * (s + 2.0 * kf);
        fact *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
        power /= n * n;
    }
    sum
}

/// Functional-equation route for s < 0:
/// ζ(s) = 2^s π^(s-1) sin(πs/2) Γ(1-s) ζ(1-s).
pub(crate) fn zeta_functional(s: f64) -> Result<f64> {
    let reflected = zeta_euler_maclaurin(1.0 - s);
    let g = gamma(1.0 - s)?;
    Ok(2f64.powf(s) * PI.powf(s - 1.0) * sin_pi(0.5 * s) * g * reflected)
}

/// ζ(-n) = (-1)^n B_{n+1} / (n+1) for integer n >= 0.
fn zeta_negative_integer(n: usize) -> Option<f64> {
    if n >= 2 && n % 2 == 0 {
        return Some(0.0);
    }
    let b = bernoulli(n + 1).ok()?;
    let value = b / BigRational::from_integer(BigInt::from(n + 1));
    let value = if n % 2 == 0 { value } else { -value };
    Some(rational_to_f64(&value))
}

/// The Riemann zeta function for real `s ≠ 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    ensure_finite("riemann_zeta", s)?;
    if s == 1.0 {
        return Err(Error::Pole {
            function: "riemann_zeta",
            at: s,
        });
    }
    if s <= 0.0 && s.fract() == 0.0 {
        if let Some(v) = zeta_negative_integer((-s) as usize) {
            return Ok(v);
        }
    }
    if s < 0.0 {
        return zeta_functional(s);
    }
    Ok(zeta_euler_maclaurin(s))
}
