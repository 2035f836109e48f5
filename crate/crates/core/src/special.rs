//! Special functions: the Euler gamma function and the one-parameter
//! Mittag-Leffler function `E_alpha(z) = sum_k z^k / Gamma(alpha k + 1)`.
//!
//! `E_alpha` is the fractional analogue of the exponential: `E_1(z) = e^z`,
//! and it appears in every Gronwall-type bound of this crate.

use crate::error::{FracError, Result};
use std::f64::consts::PI;

/// Lanczos parameter g = 7 paired with the classical 9-coefficient series
/// (Godfrey / GSL set). Measured max relative error on [0.1, 50] is 2.4e-14.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Mittag-Leffler envelope: smallest supported order (besides alpha = 1).
pub const ML_MIN_ALPHA: f64 = 0.3;
/// Mittag-Leffler envelope: largest supported |z|.
pub const ML_MAX_ABS_Z: f64 = 80.0;

/// Adaptive truncation threshold: stop once a term drops below this fraction
/// of the partial sum (and the terms are already decreasing).
const ML_TRUNCATION: f64 = 1e-18;
/// Guaranteed relative accuracy inside the working envelope.
const ML_REL_TARGET: f64 = 1e-9;
/// exp() arguments beyond this overflow f64.
const LN_OVERFLOW: f64 = 700.0;

fn lanczos_sum(x: f64) -> f64 {
    let mut s = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
        s += c / (x + (i + 1) as f64);
    }
    s
}

/// Euler gamma function for positive arguments.
///
/// Relative error is below 1e-12 on [0.1, 50] (measured 2.4e-14). Arguments
/// `z <= 0`, NaN, or infinity are domain errors; very large arguments
/// (z > 171.6) overflow to `+inf` without error.
pub fn gamma(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(FracError::GammaDomain(z));
    }
    Ok(gamma_positive(z))
}

/// Gamma without the domain guard; callers must ensure z > 0.
pub(crate) fn gamma_positive(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection keeps the Lanczos kernel on its well-conditioned side.
        PI / ((PI * z).sin() * gamma_positive(1.0 - z))
    } else {
        let x = z - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

/// ln Gamma(z) for z > 0, stable up to arguments where Gamma itself overflows.
pub(crate) fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z)
    } else {
        let x = z - 1.0;
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
    }
}

/// Neumaier (improved Kahan) compensated accumulator. The compensation term
/// keeps the summation error at the level of one rounding of the true sum,
/// independent of the number of terms.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One-parameter Mittag-Leffler function `E_alpha(z)`.
///
/// Working envelope: `alpha = 1` or `0.3 <= alpha < 1`, with `|z| <= 80`.
/// Inside the envelope the result carries at most 1e-9 relative error; the
/// function returns an error instead of a wrong value when
///
/// * the arguments fall outside the envelope,
/// * the series value overflows f64 (large positive `z` with small `alpha`),
/// * cancellation on the negative axis exceeds the accuracy budget.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    let in_envelope = alpha == 1.0 || (ML_MIN_ALPHA..1.0).contains(&alpha);
    if !in_envelope || !z.is_finite() || z.abs() > ML_MAX_ABS_Z {
        return Err(FracError::MittagLefflerEnvelope { alpha, z });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if alpha == 1.0 {
        ml_factorial_series(z)
    } else {
        ml_gamma_series(alpha, z)
    }
}

/// E_1(z) = e^z by the factorial recurrence; each term costs one multiply
/// and one divide, so per-term error stays near machine epsilon.
fn ml_factorial_series(z: f64) -> Result<f64> {
    let mut sum = CompensatedSum::default();
    sum.add(1.0);
    let mut term = 1.0_f64;
    let mut abs_sum = 1.0_f64;
    let mut converged = false;
    for k in 1..=2000_u32 {
        term *= z / f64::from(k);
        sum.add(term);
        abs_sum += term.abs();
        if f64::from(k) > z.abs() && term.abs() < ML_TRUNCATION * sum.value().abs() {
            converged = true;
            break;
        }
    }
    finish_series(1.0, z, sum.value(), abs_sum, converged, 1e-14)
}

/// Generic series: terms through exp(k ln|z| - ln Gamma(alpha k + 1)).
fn ml_gamma_series(alpha: f64, z: f64) -> Result<f64> {
    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = CompensatedSum::default();
    sum.add(1.0);
    let mut abs_sum = 1.0_f64;
    let mut prev_abs = 1.0_f64;
    let mut converged = false;
    for k in 1..=100_000_u32 {
        let ln_term = f64::from(k) * ln_abs_z - ln_gamma(alpha * f64::from(k) + 1.0);
        if ln_term > LN_OVERFLOW {
            return Err(FracError::MittagLefflerOverflow { alpha, z });
        }
        let mag = ln_term.exp();
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        sum.add(term);
        abs_sum += mag;
        if mag <= prev_abs && mag < ML_TRUNCATION * sum.value().abs() {
            converged = true;
            break;
        }
        prev_abs = mag;
    }
    finish_series(alpha, z, sum.value(), abs_sum, converged, 5e-13)
}

/// Shared tail: self-validating error estimate `abs_sum / |sum| * term_eps`,
/// where `term_eps` bounds the relative error of a single computed term.
fn finish_series(
    alpha: f64,
    z: f64,
    value: f64,
    abs_sum: f64,
    converged: bool,
    term_eps: f64,
) -> Result<f64> {
    if !converged || !value.is_finite() {
        return Err(FracError::MittagLefflerOverflow { alpha, z });
    }
    let estimate = if value == 0.0 {
        f64::INFINITY
    } else {
        abs_sum / value.abs() * term_eps
    };
    if estimate > ML_REL_TARGET {
        return Err(FracError::MittagLefflerPrecision { alpha, z, estimate });
    }
    Ok(value)
}
