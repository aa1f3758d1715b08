//! First and second variations of volume and perimeter of a tripod under a
//! constant translation field `w`.
//!
//! Translating the tripod with vertex `x` by `t·w` gives the tripod with
//! vertex `x + t·w`, so every quantity here has an exact counterpart in
//! [`translation_scan`]. With `a_ij = ⟨w, n_ij⟩`, `c_n = ⟨x, n_ij⟩`,
//! `c_t = ⟨x, t_ij⟩` and
//! `J_ij = a_ij c_n A_ij + ⟨w, t_ij⟩ φ(c_n) φ(c_t)` (the integral of
//! `⟨w, z⟩` over `x + Σ_ij`):
//!
//! * `δV_i = Σ_{j≠i} a_ij A_ij`, i.e. `δV = M w`,
//! * `δA = ⟨λ, δV⟩` with `λ = x/√2`,
//! * `δ²V_i = −Σ_{j≠i} a_ij J_ij`,
//! * `δ²A = −Σ_{i<j} (H_ij,γ a_ij J_ij + a_ij² A_ij)`,
//! * `Q = δ²A − ⟨λ, δ²V⟩ = −Σ_{i<j} a_ij² A_ij`.

use crate::cluster::InterfaceStats;
use crate::gauss1d::phi;
use crate::linalg::{frame, Pair};
use crate::tripod::{
    interface_area, lagrange_multiplier, tripod_perimeter, volume_map, weighted_mean_curvature,
};
use crate::{Error, PlanePoint, Result, SimplexVolume};
use serde::Serialize;

/// Largest translation accepted by [`translation_scan`].
pub const MAX_SHIFT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub volume: SimplexVolume,
    pub perimeter: f64,
}

/// Volumes and perimeters of the translated tripods `x + t·w`.
pub fn translation_scan(x: &PlanePoint, w: &PlanePoint, ts: &[f64]) -> Result<Vec<ScanPoint>> {
    if !(w.norm() <= MAX_SHIFT) {
        return Err(Error::domain(format!("|w| = {} exceeds {MAX_SHIFT}", w.norm())));
    }
    if let Some(t) = ts.iter().find(|t| !(-1.0..=1.0).contains(*t)) {
        return Err(Error::domain(format!("scan parameter {t} outside [-1, 1]")));
    }
    ts.iter()
        .map(|&t| {
            let y = *x + t * *w;
            Ok(ScanPoint { t, volume: volume_map(&y)?, perimeter: tripod_perimeter(&y) })
        })
        .collect()
}

/// Variations of volume and perimeter along a translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationReport {
    #[serde(rename = "dV")]
    pub dv: [f64; 3],
    #[serde(rename = "dA")]
    pub da: f64,
    #[serde(rename = "d2V")]
    pub d2v: [f64; 3],
    #[serde(rename = "d2A")]
    pub d2a: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// The multiplier `λ = x/√2` used in `Q`, in ℝ³ coordinates.
    pub lambda: [f64; 3],
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed-form variations of the tripod at `x` along the translation `w`.
pub fn index_form_translation(x: &PlanePoint, w: &PlanePoint) -> VariationReport {
    let mut dv = [0.0; 3];
    let mut d2v = [0.0; 3];
    let mut d2a = 0.0;
    let mut q = 0.0;
    for p in Pair::CYCLIC {
        let f = frame(p);
        let (cn, ct) = (x.dot(&f.n), x.dot(&f.t));
        let area = interface_area(x, p);
        let a = w.dot(&f.n);
        let j = a * cn * area + w.dot(&f.t) * phi(cn) * phi(ct);
        // Σ_ij contributes +a to cell i and −a to cell j (n_ji = −n_ij).
        dv[p.i] += a * area;
        dv[p.j] -= a * area;
        d2v[p.i] -= a * j;
        d2v[p.j] += a * j;
        d2a -= weighted_mean_curvature(x, p) * a * j + a * a * area;
        q -= a * a * area;
    }
    let lambda = lagrange_multiplier(x).coords3();
    VariationReport { dv, da: dot3(&lambda, &dv), d2v, d2a, q, lambda }
}

impl VariationReport {
    /// `δ²A − ⟨λ, δ²V⟩`, which must agree with `Q`.
    pub fn q_from_parts(&self) -> f64 {
        self.d2a - dot3(&self.lambda, &self.d2v)
    }
}

/// `⟨λ, M w⟩` with `M` built from the tripod's interface statistics.
pub fn first_variation_from_m(x: &PlanePoint, w: &PlanePoint) -> f64 {
    let mw = InterfaceStats::tripod(x).m() * w.vec2();
    lagrange_multiplier(x).dot3(&mw)
}
