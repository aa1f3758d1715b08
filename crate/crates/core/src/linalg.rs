//! Points, operators and volume triples on the plane `E = {x ∈ ℝ³ : Σxᵢ = 0}`.
//!
//! `E` carries the fixed orthonormal basis `u₁ = (1,−1,0)/√2`,
//! `u₂ = (1,1,−2)/√6`; every object keeps its ℝ³ form and exposes the 2×2
//! view in that basis. Cells are indexed `0, 1, 2` (cells "1, 2, 3" in the
//! usual notation).

use crate::{Error, Result};
use nalgebra::{Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

const SQRT_6: f64 = 2.449_489_742_783_178;

/// Columns are the basis vectors `u₁`, `u₂` of `E`.
pub fn basis() -> Matrix3x2<f64> {
    Matrix3x2::new(
        1.0 / SQRT_2,
        1.0 / SQRT_6,
        -1.0 / SQRT_2,
        1.0 / SQRT_6,
        0.0,
        -2.0 / SQRT_6,
    )
}

/// A point (or vector) of `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    coords3: [f64; 3],
    coords2: [f64; 2],
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { coords3: [0.0; 3], coords2: [0.0; 2] };

    pub fn from_coords2(a: f64, b: f64) -> Self {
        let v = basis() * Vector2::new(a, b);
        PlanePoint { coords3: [v[0], v[1], v[2]], coords2: [a, b] }
    }

    /// Accepts a triple whose entries sum to zero within `1e-12·max(1, |x|∞)`.
    pub fn from_coords3(x: [f64; 3]) -> Result<Self> {
        let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let s = x[0] + x[1] + x[2];
        if !s.is_finite() || s.abs() > 1e-12 * scale {
            return Err(Error::domain(format!("{x:?} does not lie in E (sum {s:e})")));
        }
        Ok(Self::project(x))
    }

    /// Orthogonal projection of an arbitrary triple onto `E`.
    pub fn project(x: [f64; 3]) -> Self {
        let c = basis().transpose() * Vector3::from(x);
        Self::from_coords2(c[0], c[1])
    }

    pub fn coords3(&self) -> [f64; 3] {
        self.coords3
    }

    pub fn coords2(&self) -> [f64; 2] {
        self.coords2
    }

    pub fn vec3(&self) -> Vector3<f64> {
        Vector3::from(self.coords3)
    }

    pub fn vec2(&self) -> Vector2<f64> {
        Vector2::from(self.coords2)
    }

    pub fn dot(&self, other: &PlanePoint) -> f64 {
        self.coords2[0] * other.coords2[0] + self.coords2[1] * other.coords2[1]
    }

    /// Inner product with an arbitrary ℝ³ vector.
    pub fn dot3(&self, v: &Vector3<f64>) -> f64 {
        self.vec3().dot(v)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Relabel coordinates: the result has `y[perm[i]] = x[i]`.
    pub fn permute(&self, perm: [usize; 3]) -> Self {
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[perm[i]] = self.coords3[i];
        }
        Self::project(y)
    }
}

impl Add for PlanePoint {
    type Output = PlanePoint;
    fn add(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::from_coords2(self.coords2[0] + o.coords2[0], self.coords2[1] + o.coords2[1])
    }
}

impl Sub for PlanePoint {
    type Output = PlanePoint;
    fn sub(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::from_coords2(self.coords2[0] - o.coords2[0], self.coords2[1] - o.coords2[1])
    }
}

impl Neg for PlanePoint {
    type Output = PlanePoint;
    fn neg(self) -> PlanePoint {
        PlanePoint::from_coords2(-self.coords2[0], -self.coords2[1])
    }
}

impl Mul<PlanePoint> for f64 {
    type Output = PlanePoint;
    fn mul(self, p: PlanePoint) -> PlanePoint {
        PlanePoint::from_coords2(self * p.coords2[0], self * p.coords2[1])
    }
}

/// A triple of cell measures in the simplex `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexVolume([f64; 3]);

impl SimplexVolume {
    pub const CENTER: SimplexVolume = SimplexVolume([1.0 / 3.0; 3]);

    pub fn new(v: [f64; 3]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::domain(format!("volume {v:?} has a negative or non-finite entry")));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("volume {v:?} sums to {s}, not 1")));
        }
        Ok(SimplexVolume(v))
    }

    /// `(v1, v2, 1 − v1 − v2)`.
    pub fn from_pair(v1: f64, v2: f64) -> Result<Self> {
        Self::new([v1, v2, 1.0 - v1 - v2])
    }

    /// Scale a nonnegative triple onto the simplex.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let s: f64 = v.iter().sum();
        if !(s > 0.0) || v.iter().any(|x| *x < 0.0) {
            return Err(Error::domain(format!("cannot normalise {v:?}")));
        }
        let mut w = [v[0] / s, v[1] / s, v[2] / s];
        // Push the rounding error onto the largest entry until the
        // left-to-right sum is exactly one.
        let k = (0..3).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
        for _ in 0..4 {
            let r = 1.0 - (w[0] + w[1] + w[2]);
            if r == 0.0 {
                break;
            }
            w[k] += r;
        }
        Ok(SimplexVolume(w))
    }

    pub fn values(&self) -> [f64; 3] {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_interior(&self) -> bool {
        self.min() > 0.0
    }

    /// `v + d` for a displacement `d ∈ E`; fails if the result leaves `Δ`.
    pub fn offset(&self, d: &PlanePoint) -> Result<Self> {
        let d = d.coords3();
        let w = [self.0[0] + d[0], self.0[1] + d[1], self.0[2] + d[2]];
        if w.iter().any(|x| *x < 0.0) {
            return Err(Error::domain(format!("offset volume {w:?} leaves the simplex")));
        }
        Self::normalized(w)
    }

    pub fn permute(&self, perm: [usize; 3]) -> Self {
        let mut w = [0.0; 3];
        for i in 0..3 {
            w[perm[i]] = self.0[i];
        }
        SimplexVolume(w)
    }

    pub fn max_abs_diff(&self, other: &SimplexVolume) -> f64 {
        (0..3).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

/// An unordered or oriented pair of distinct cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl Pair {
    pub const P12: Pair = Pair { i: 0, j: 1 };
    pub const P23: Pair = Pair { i: 1, j: 2 };
    pub const P31: Pair = Pair { i: 2, j: 0 };
    /// The positively oriented pairs, in the order used by [`InterfaceAreas`].
    pub const CYCLIC: [Pair; 3] = [Pair::P12, Pair::P23, Pair::P31];

    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i > 2 || j > 2 || i == j {
            return Err(Error::domain(format!("({i}, {j}) is not a pair of distinct cells")));
        }
        Ok(Pair { i, j })
    }

    pub fn reversed(self) -> Self {
        Pair { i: self.j, j: self.i }
    }

    /// The remaining cell.
    pub fn other(self) -> usize {
        3 - self.i - self.j
    }

    /// Position of this (unordered) pair in [`Pair::CYCLIC`].
    pub fn slot(self) -> usize {
        match (self.i.min(self.j), self.i.max(self.j)) {
            (0, 1) => 0,
            (1, 2) => 1,
            _ => 2,
        }
    }
}

/// Unit normal `n_ij` (pointing from cell `i` into cell `j`) and unit
/// direction `t_ij` of the model interface `Σ_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePair {
    pub n: PlanePoint,
    pub t: PlanePoint,
}

pub fn frame(pair: Pair) -> FramePair {
    let (i, j, k) = (pair.i, pair.j, pair.other());
    let mut n = [0.0; 3];
    n[j] += 1.0 / SQRT_2;
    n[i] -= 1.0 / SQRT_2;
    let mut t = [0.0; 3];
    t[i] += 1.0 / SQRT_6;
    t[j] += 1.0 / SQRT_6;
    t[k] -= 2.0 / SQRT_6;
    FramePair { n: PlanePoint::project(n), t: PlanePoint::project(t) }
}

/// Gaussian-weighted interface lengths `(A₁₂, A₂₃, A₃₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InterfaceAreas {
    pub a12: f64,
    pub a23: f64,
    pub a31: f64,
}

impl InterfaceAreas {
    pub fn from_array(a: [f64; 3]) -> Self {
        InterfaceAreas { a12: a[0], a23: a[1], a31: a[2] }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.a12, self.a23, self.a31]
    }

    pub fn get(&self, pair: Pair) -> f64 {
        self.to_array()[pair.slot()]
    }

    pub fn total(&self) -> f64 {
        self.a12 + self.a23 + self.a31
    }

    /// `L_A = Σ A_ij (e_i − e_j)(e_i − e_j)ᵀ`.
    pub fn laplacian(&self) -> EOperator {
        let mut m = Matrix3::zeros();
        for p in Pair::CYCLIC {
            let a = self.get(p);
            m[(p.i, p.i)] += a;
            m[(p.j, p.j)] += a;
            m[(p.i, p.j)] -= a;
            m[(p.j, p.i)] -= a;
        }
        EOperator::from_matrix3(m)
    }
}

/// A symmetric bilinear form on `E`, stored as a 3×3 matrix annihilating
/// `(1,1,1)` together with its 2×2 matrix in the `(u₁, u₂)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EOperator {
    m33: Matrix3<f64>,
    m22: Matrix2<f64>,
}

impl EOperator {
    /// Compress an arbitrary 3×3 matrix to `E` (`P M P` with `P` the
    /// orthogonal projector onto `E`).
    pub fn from_matrix3(m: Matrix3<f64>) -> Self {
        let u = basis();
        Self::from_matrix2(u.transpose() * m * u)
    }

    pub fn from_matrix2(m22: Matrix2<f64>) -> Self {
        let u = basis();
        EOperator { m33: u * m22 * u.transpose(), m22 }
    }

    pub fn m33(&self) -> Matrix3<f64> {
        self.m33
    }

    pub fn m22(&self) -> Matrix2<f64> {
        self.m22
    }

    pub fn scale(&self, s: f64) -> Self {
        EOperator { m33: self.m33 * s, m22: self.m22 * s }
    }

    pub fn apply(&self, x: &PlanePoint) -> PlanePoint {
        let y = self.m22 * x.vec2();
        PlanePoint::from_coords2(y[0], y[1])
    }

    pub fn quadratic(&self, x: &PlanePoint) -> f64 {
        x.vec2().dot(&(self.m22 * x.vec2()))
    }

    pub fn trace(&self) -> f64 {
        self.m22.trace()
    }

    /// Eigenvalues of the 2×2 view, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = SymmetricEigen::new(self.m22).eigenvalues;
        if e[0] <= e[1] {
            [e[0], e[1]]
        } else {
            [e[1], e[0]]
        }
    }

    /// Inverse on `E`. Rejects operators whose eigenvalues differ in
    /// magnitude by more than `1e14` or vanish.
    pub fn inverse(&self) -> Result<Self> {
        let [a, b] = self.eigenvalues();
        let big = a.abs().max(b.abs());
        let small = a.abs().min(b.abs());
        if !(small > 0.0) || small < 1e-14 * big {
            return Err(Error::Conditioning(format!(
                "operator on E has eigenvalues {a:e}, {b:e}"
            )));
        }
        let inv = self.m22.try_inverse().ok_or_else(|| {
            Error::Conditioning("singular 2x2 operator".to_string())
        })?;
        Ok(Self::from_matrix2(inv))
    }

    pub fn max_abs_diff(&self, other: &EOperator) -> f64 {
        (self.m22 - other.m22).abs().max()
    }
}
