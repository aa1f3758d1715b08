//! Finite-difference oracles on `E`.
//!
//! All stencils are five-point central differences (fourth order). Mixed
//! second derivatives come from directional second derivatives along
//! `u₁ ± u₂`, so every entry uses the same one-dimensional stencil. These
//! routines only ever call the function they are given, which keeps them
//! independent of any closed-form derivative they are compared against.

use crate::{PlanePoint, Result, SimplexVolume};
use nalgebra::Matrix2;

/// `g'(0)` from `g(±h)`, `g(±2h)`.
pub fn derivative<F: FnMut(f64) -> Result<f64>>(mut g: F, h: f64) -> Result<f64> {
    Ok((g(-2.0 * h)? - 8.0 * g(-h)? + 8.0 * g(h)? - g(2.0 * h)?) / (12.0 * h))
}

/// `g''(0)` from `g(0)`, `g(±h)`, `g(±2h)`.
pub fn second_derivative<F: FnMut(f64) -> Result<f64>>(mut g: F, h: f64) -> Result<f64> {
    Ok((-g(-2.0 * h)? + 16.0 * g(-h)? - 30.0 * g(0.0)? + 16.0 * g(h)? - g(2.0 * h)?)
        / (12.0 * h * h))
}

/// Componentwise `g'(0)` for vector-valued `g`.
pub fn derivative_vec<const N: usize, F>(mut g: F, h: f64) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let (m2, m1, p1, p2) = (g(-2.0 * h)?, g(-h)?, g(h)?, g(2.0 * h)?);
    Ok(std::array::from_fn(|k| (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h)))
}

/// Componentwise `g''(0)` for vector-valued `g`.
pub fn second_derivative_vec<const N: usize, F>(mut g: F, h: f64) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let (m2, m1, c, p1, p2) = (g(-2.0 * h)?, g(-h)?, g(0.0)?, g(h)?, g(2.0 * h)?);
    Ok(std::array::from_fn(|k| {
        (-m2[k] + 16.0 * m1[k] - 30.0 * c[k] + 16.0 * p1[k] - p2[k]) / (12.0 * h * h)
    }))
}

fn unit(k: usize) -> PlanePoint {
    if k == 0 {
        PlanePoint::from_coords2(1.0, 0.0)
    } else {
        PlanePoint::from_coords2(0.0, 1.0)
    }
}

/// Gradient of `f` at `at`, in `(u₁, u₂)` coordinates.
pub fn gradient<F>(f: F, at: PlanePoint, h: f64) -> Result<[f64; 2]>
where
    F: Fn(&PlanePoint) -> Result<f64>,
{
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        let d = unit(k);
        *o = derivative(|t| f(&(at + t * d)), h)?;
    }
    Ok(out)
}

/// Hessian of `f` at `at`, in `(u₁, u₂)` coordinates.
pub fn hessian<F>(f: F, at: PlanePoint, h: f64) -> Result<Matrix2<f64>>
where
    F: Fn(&PlanePoint) -> Result<f64>,
{
    let along = |d: PlanePoint| second_derivative(|t| f(&(at + t * d)), h);
    let h11 = along(unit(0))?;
    let h22 = along(unit(1))?;
    let plus = along(unit(0) + unit(1))?;
    let minus = along(unit(0) - unit(1))?;
    let h12 = 0.25 * (plus - minus);
    Ok(Matrix2::new(h11, h12, h12, h22))
}

/// Gradient of a function on the simplex along `E`.
pub fn simplex_gradient<F>(f: F, v: &SimplexVolume, h: f64) -> Result<[f64; 2]>
where
    F: Fn(&SimplexVolume) -> Result<f64>,
{
    gradient(|d| f(&v.offset(d)?), PlanePoint::ORIGIN, h)
}

/// Hessian of a function on the simplex along `E`.
pub fn simplex_hessian<F>(f: F, v: &SimplexVolume, h: f64) -> Result<Matrix2<f64>>
where
    F: Fn(&SimplexVolume) -> Result<f64>,
{
    hessian(|d| f(&v.offset(d)?), PlanePoint::ORIGIN, h)
}

/// Jacobian of a map `E → E` (given in ℝ³ coordinates), as the 2×2 matrix
/// `Uᵀ J U` in the `(u₁, u₂)` basis.
pub fn jacobian<F>(f: F, at: PlanePoint, h: f64) -> Result<Matrix2<f64>>
where
    F: Fn(&PlanePoint) -> Result<[f64; 3]>,
{
    let u = crate::linalg::basis();
    let mut j = Matrix2::zeros();
    for k in 0..2 {
        let d = unit(k);
        let col = derivative_vec(|t| f(&(at + t * d)), h)?;
        for r in 0..2 {
            j[(r, k)] = u[(0, r)] * col[0] + u[(1, r)] * col[1] + u[(2, r)] * col[2];
        }
    }
    Ok(j)
}
