//! One-dimensional Gaussian primitives and the single-bubble model profile
//! `I⁽¹⁾(v) = φ(Φ⁻¹(v))`.
//!
//! `Phi` is evaluated through the complementary error function (`libm::erfc`,
//! the fdlibm rational approximations, accurate to about one ulp), so both
//! tails keep full relative precision. `Phi_inv` starts from Acklam's rational
//! approximation and is polished by two Newton steps on the appropriate tail.

use crate::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `1/√(2π)`, the maximum of the standard normal density.
pub const PHI_0: f64 = 0.398_942_280_401_432_7;

/// Smallest distance to {0, 1} accepted by [`single_bubble_ode_residual`].
pub const ODE_CUTOFF: f64 = 1e-4;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    PHI_0 * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
#[allow(non_snake_case)]
pub fn Phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(x)`, without cancellation for large `x`.
pub fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Quantile function of the standard normal.
#[allow(non_snake_case)]
pub fn Phi_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("Phi_inv needs p in (0,1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail; the upper tail follows by reflection. For
    // p > 1/2 the complement 1 - p is exact.
    let (q, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let mut z = acklam_lower(q);
    for _ in 0..2 {
        // Φ(z) = q with z < 0, written through the upper tail of -z.
        let f = upper_tail(-z) - q;
        z -= f / phi(z);
    }
    Ok(sign * z)
}

/// Acklam's rational approximation for `Φ⁻¹(q)`, `q ∈ (0, 1/2]`; relative
/// error about 1.15e-9.
fn acklam_lower(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if q < P_LOW {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let s = q - 0.5;
        let r = s * s;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * s
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Single-bubble model profile `φ(Φ⁻¹(v))`, extended by 0 at the endpoints.
pub fn single_bubble_profile(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!(
            "single-bubble profile needs v in [0,1], got {v}"
        )));
    }
    if v == 0.0 || v == 1.0 {
        return Ok(0.0);
    }
    Ok(phi(Phi_inv(v)?))
}

/// Finite-difference step used for derivatives of the single-bubble profile.
pub fn profile_step(v: f64) -> f64 {
    (1e-3 * v.min(1.0 - v)).max(1e-5)
}

/// Residual `I''(v)·I(v) + 1` of the single-bubble ODE, with `I''` from a
/// five-point central difference at step [`profile_step`].
///
/// Points closer than [`ODE_CUTOFF`] to either endpoint are rejected: there
/// the stencil would leave `(0, 1)`.
pub fn single_bubble_ode_residual(v: f64) -> Result<f64> {
    if !(v >= ODE_CUTOFF && v <= 1.0 - ODE_CUTOFF) {
        return Err(Error::domain(format!(
            "ODE residual needs v in [{ODE_CUTOFF}, {}], got {v}",
            1.0 - ODE_CUTOFF
        )));
    }
    let h = profile_step(v);
    let i = |t: f64| single_bubble_profile(t);
    let d2 = (-i(v + 2.0 * h)? + 16.0 * i(v + h)? - 30.0 * i(v)? + 16.0 * i(v - h)?
        - i(v - 2.0 * h)?)
        / (12.0 * h * h);
    Ok(d2 * i(v)? + 1.0)
}

/// `√(2π)`, exposed for algebraic checks.
pub fn sqrt_two_pi() -> f64 {
    (2.0 * PI).sqrt()
}
