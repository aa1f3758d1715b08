//! The model tripod family.
//!
//! For a vertex `x ∈ E` the tripod cluster `x + Ω` has cells
//! `x + Ωᵢ = {z : max_j (z_j − x_j) = z_i − x_i}` separated by three
//! half-lines meeting at 120°. This module evaluates its interface areas, the
//! volume map `V(x) = γ(x + Ω)`, the Newton inverse of `V`, and the model
//! profile `I_m = (ΣA) ∘ V⁻¹` together with its gradient `V⁻¹/√2` and Hessian
//! `−L_A⁻¹`.

use crate::gauss1d::{phi, single_bubble_profile, upper_tail, Phi};
use crate::linalg::{frame, InterfaceAreas, Pair};
use crate::quadrature::integrate;
use crate::{EOperator, Error, PlanePoint, Result, SimplexVolume};
use std::f64::consts::SQRT_2;

/// Truncation of the outer quadrature variable; `Φ(−8.5) ≈ 9.5e-18`.
pub const QUAD_CUTOFF: f64 = 8.5;
/// Absolute quadrature tolerance used by [`volume_map`].
pub const VOLUME_QUAD_TOL: f64 = 1e-15;
/// Volume residual targeted when the profile inverts the volume map.
pub const PROFILE_TOL: f64 = 1e-13;
/// Below this smallest entry the boundary formula replaces inversion.
pub const INTERIOR_CUTOFF: f64 = 1e-6;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// Longest Newton step accepted in one iteration.
const MAX_STEP: f64 = 3.0;

/// `A_ij(x) = φ(⟨x, n_ij⟩)·(1 − Φ(⟨x, t_ij⟩))`.
pub fn interface_area(x: &PlanePoint, pair: Pair) -> f64 {
    let f = frame(pair);
    phi(x.dot(&f.n)) * upper_tail(x.dot(&f.t))
}

pub fn interface_areas(x: &PlanePoint) -> InterfaceAreas {
    InterfaceAreas::from_array(Pair::CYCLIC.map(|p| interface_area(x, p)))
}

/// Total Gaussian perimeter of the tripod with vertex `x`.
pub fn tripod_perimeter(x: &PlanePoint) -> f64 {
    interface_areas(x).total()
}

/// Offsets `(⟨x, n_ij⟩, ⟨x, n_ik⟩)` of the two half-planes whose
/// intersection is cell `i`.
fn wedge_offsets(x: &PlanePoint, i: usize) -> (f64, f64) {
    let c = x.coords3();
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    ((c[j] - c[i]) / SQRT_2, (c[k] - c[i]) / SQRT_2)
}

/// `P(S < a, T < b)` for standard normals with correlation 1/2, reduced to a
/// single integral over the more restrictive variable.
fn wedge_probability(a: f64, b: f64, tol: f64) -> Result<f64> {
    let (outer, inner) = if a <= b { (a, b) } else { (b, a) };
    if outer <= -QUAD_CUTOFF {
        return Ok(0.0);
    }
    let upper = outer.min(QUAD_CUTOFF);
    // T | S = s  ~  N(s/2, 3/4)
    let scale = 2.0 / 3f64.sqrt();
    let f = |s: f64| phi(s) * Phi((inner - 0.5 * s) * scale);
    let r = integrate(f, -QUAD_CUTOFF, upper, tol, 1e-14, 400)?;
    Ok(r.value)
}

fn check_cell(i: usize) -> Result<()> {
    if i > 2 {
        return Err(Error::domain(format!("cell index {i} out of range 0..3")));
    }
    Ok(())
}

/// Gaussian measure of cell `i` of the tripod with vertex `x`, to absolute
/// accuracy `tol ∈ [1e-15, 1e-6]`.
pub fn cell_measure(x: &PlanePoint, i: usize, tol: f64) -> Result<f64> {
    check_cell(i)?;
    if !(1e-15..=1e-6).contains(&tol) {
        return Err(Error::domain(format!("quadrature tolerance {tol:e} outside [1e-15, 1e-6]")));
    }
    let (a, b) = wedge_offsets(x, i);
    wedge_probability(a, b, tol)
}

/// Lower (product, via the Gaussian FKG inequality) and upper (minimum over
/// containing half-planes) bounds for the measure of cell `i`.
///
/// Under the standard Gaussian on `E` the coordinate `Z_i` has variance 2/3,
/// so the half-plane `{z_i > x_i}` has measure `1 − Φ(x_i·√(3/2))`.
pub fn measure_bounds(x: &PlanePoint, i: usize) -> Result<(f64, f64)> {
    check_cell(i)?;
    let c = x.coords3();
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let dij = upper_tail((c[i] - c[j]) / SQRT_2);
    let dik = upper_tail((c[i] - c[k]) / SQRT_2);
    let lower = dij * dik;
    let upper = upper_tail(c[i] * 1.5f64.sqrt()).min(dij).min(dik);
    Ok((lower, upper))
}

/// Result of [`volume_map_detailed`].
#[derive(Debug, Clone, Copy)]
pub struct MappedVolume {
    pub volume: SimplexVolume,
    /// Cell measures before projection onto the simplex.
    pub raw: [f64; 3],
    /// `|Σ raw − 1|`, the size of the renormalisation.
    pub renormalization: f64,
}

pub fn volume_map_detailed(x: &PlanePoint) -> Result<MappedVolume> {
    let mut raw = [0.0; 3];
    for (i, r) in raw.iter_mut().enumerate() {
        let (a, b) = wedge_offsets(x, i);
        *r = wedge_probability(a, b, VOLUME_QUAD_TOL)?;
    }
    let total: f64 = raw.iter().sum();
    Ok(MappedVolume {
        volume: SimplexVolume::normalized(raw)?,
        raw,
        renormalization: (total - 1.0).abs(),
    })
}

/// `V(x) = γ(x + Ω)`, projected exactly onto the simplex.
pub fn volume_map(x: &PlanePoint) -> Result<SimplexVolume> {
    Ok(volume_map_detailed(x)?.volume)
}

/// `DV(x) = −L_{A(x)}/√2`.
pub fn volume_jacobian(x: &PlanePoint) -> EOperator {
    interface_areas(x).laplacian().scale(-1.0 / SQRT_2)
}

fn residual(x: &PlanePoint, v: &SimplexVolume) -> Result<(PlanePoint, f64)> {
    let got = volume_map(x)?.values();
    let want = v.values();
    let d = [got[0] - want[0], got[1] - want[1], got[2] - want[2]];
    let inf = d.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    Ok((PlanePoint::project(d), inf))
}

/// Solve `V(x) = v` by damped Newton from the origin.
///
/// The step `−DV⁻¹ r = √2 L_A⁻¹ r` is halved until the residual decreases.
/// Once `|V(x) − v|∞ ≤ tol` up to two further steps are taken while they
/// still reduce the residual.
pub fn invert_volume_map(v: &SimplexVolume, tol: f64) -> Result<PlanePoint> {
    invert_volume_map_from(v, PlanePoint::ORIGIN, tol)
}

/// [`invert_volume_map`] with an explicit starting point.
pub fn invert_volume_map_from(v: &SimplexVolume, start: PlanePoint, tol: f64) -> Result<PlanePoint> {
    if v.min() < INTERIOR_CUTOFF {
        return Err(Error::domain(format!(
            "volume {:?} is closer than {INTERIOR_CUTOFF:e} to the boundary",
            v.values()
        )));
    }
    if !(1e-14..=1e-2).contains(&tol) {
        return Err(Error::domain(format!("inversion tolerance {tol:e} outside [1e-14, 1e-2]")));
    }
    let mut x = start;
    let (mut r, mut res) = residual(&x, v)?;
    let mut polish = 0;
    for iteration in 0..MAX_NEWTON_ITERATIONS {
        if res <= tol {
            if polish == 2 {
                return Ok(x);
            }
            polish += 1;
        }
        let step = match interface_areas(&x).laplacian().inverse() {
            Ok(inv) => SQRT_2 * inv.apply(&r),
            Err(_) if res <= tol => return Ok(x),
            Err(_) => {
                return Err(Error::Solver { iterations: iteration, residual: res, last: x.coords3() })
            }
        };
        let len = step.norm();
        let mut lambda = if len > MAX_STEP { MAX_STEP / len } else { 1.0 };
        let mut accepted = false;
        for _ in 0..40 {
            let trial = x + (lambda * step);
            let (tr, tres) = residual(&trial, v)?;
            if tres < res {
                x = trial;
                r = tr;
                res = tres;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if res <= tol {
                return Ok(x);
            }
            return Err(Error::Solver { iterations: iteration, residual: res, last: x.coords3() });
        }
    }
    if res <= tol {
        return Ok(x);
    }
    Err(Error::Solver { iterations: MAX_NEWTON_ITERATIONS, residual: res, last: x.coords3() })
}

/// Everything the model profile knows at one interior volume.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub volume: SimplexVolume,
    /// Tripod vertex `V⁻¹(v)`.
    pub vertex: PlanePoint,
    pub areas: InterfaceAreas,
    pub value: f64,
    /// `∇I_m = V⁻¹(v)/√2`.
    pub gradient: PlanePoint,
    /// `∇²I_m = −L_A⁻¹`.
    pub hessian: EOperator,
}

impl ProfilePoint {
    /// `|−tr[(∇²I_m)⁻¹] − 2 I_m|`.
    pub fn trace_residual(&self) -> Result<f64> {
        let inv = self.hessian.inverse()?;
        Ok((-inv.trace() - 2.0 * self.value).abs())
    }
}

pub fn profile_point(v: &SimplexVolume) -> Result<ProfilePoint> {
    let vertex = invert_volume_map(v, PROFILE_TOL)?;
    let areas = interface_areas(&vertex);
    let hessian = areas.laplacian().inverse()?.scale(-1.0);
    Ok(ProfilePoint {
        volume: *v,
        vertex,
        areas,
        value: areas.total(),
        gradient: (1.0 / SQRT_2) * vertex,
        hessian,
    })
}

/// Model double-bubble profile; on (or within [`INTERIOR_CUTOFF`] of) the
/// boundary it is the single-bubble profile of the largest entry.
pub fn model_profile(v: &SimplexVolume) -> Result<f64> {
    if v.min() < INTERIOR_CUTOFF {
        return single_bubble_profile(v.max());
    }
    let x = invert_volume_map(v, PROFILE_TOL)?;
    Ok(tripod_perimeter(&x))
}

pub fn model_profile_gradient(v: &SimplexVolume) -> Result<PlanePoint> {
    Ok((1.0 / SQRT_2) * invert_volume_map(v, PROFILE_TOL)?)
}

pub fn model_profile_hessian(v: &SimplexVolume) -> Result<EOperator> {
    Ok(profile_point(v)?.hessian)
}

pub fn trace_identity_residual(v: &SimplexVolume) -> Result<f64> {
    profile_point(v)?.trace_residual()
}

/// Weighted mean curvature `H_ij,γ = −⟨x, n_ij⟩` of the flat interface `Σ_ij`.
pub fn weighted_mean_curvature(x: &PlanePoint, pair: Pair) -> f64 {
    -x.dot(&frame(pair).n)
}

/// The multiplier `λ = x/√2` with `H_ij,γ = λ_i − λ_j`.
pub fn lagrange_multiplier(x: &PlanePoint) -> PlanePoint {
    (1.0 / SQRT_2) * *x
}

/// `√K · I_m(v)`: lower bound for the profile of a measure with a
/// `K`-strongly convex potential.
pub fn strongly_convex_lower_bound(k: f64, v: &SimplexVolume) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!("convexity constant must be positive, got {k}")));
    }
    Ok(k.sqrt() * model_profile(v)?)
}
