//! Interface statistics of planar 3-clusters and the matrices built from
//! them, plus the effectively one-dimensional competitor clusters.
//!
//! The ambient plane is identified with `E` through the `(u₁, u₂)` basis, so
//! a normal is a 2-vector. For a cluster with interface areas `A_ij` and
//! average normals `n̄_ij`:
//!
//! * `M = Σ A_ij (e_i − e_j) n̄_ijᵀ`, a 3×2 matrix from the plane into `E`,
//! * `N = Σ A_ij n̄_ij n̄_ijᵀ`, 2×2 and positive semi-definite,
//! * `L_A = Σ A_ij (e_i − e_j)(e_i − e_j)ᵀ`.

use crate::gauss1d::{phi, Phi, Phi_inv};
use crate::linalg::{frame, InterfaceAreas, Pair};
use crate::tripod::interface_areas;
use crate::{EOperator, Error, PlanePoint, Result, SimplexVolume};
use nalgebra::{Matrix2, Matrix3x2, SymmetricEigen, Vector2, Vector3};

/// Areas and average normals of the three interfaces, indexed like
/// [`Pair::CYCLIC`]. Each normal points from cell `i` into cell `j` of its
/// cyclic pair and is zero when the interface is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceStats {
    pub areas: InterfaceAreas,
    pub avg_normals: [[f64; 2]; 3],
}

impl InterfaceStats {
    pub fn new(areas: InterfaceAreas, avg_normals: [[f64; 2]; 3]) -> Self {
        let mut avg_normals = avg_normals;
        for (k, a) in areas.to_array().into_iter().enumerate() {
            if a == 0.0 {
                avg_normals[k] = [0.0; 2];
            }
        }
        InterfaceStats { areas, avg_normals }
    }

    /// Exact statistics of the tripod with vertex `x`: the normals are the
    /// constant model normals `n_ij`.
    pub fn tripod(x: &PlanePoint) -> Self {
        let normals = Pair::CYCLIC.map(|p| frame(p).n.coords2());
        Self::new(interface_areas(x), normals)
    }

    pub fn normal(&self, pair: Pair) -> Vector2<f64> {
        let n = Vector2::from(self.avg_normals[pair.slot()]);
        if Pair::CYCLIC.contains(&pair) {
            n
        } else {
            -n
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.areas.total()
    }

    pub fn m(&self) -> Matrix3x2<f64> {
        let mut m = Matrix3x2::zeros();
        for (k, p) in Pair::CYCLIC.into_iter().enumerate() {
            let mut d = Vector3::zeros();
            d[p.i] = 1.0;
            d[p.j] = -1.0;
            m += self.areas.to_array()[k] * d * Vector2::from(self.avg_normals[k]).transpose();
        }
        m
    }

    pub fn n(&self) -> Matrix2<f64> {
        let mut n = Matrix2::zeros();
        for k in 0..3 {
            let v = Vector2::from(self.avg_normals[k]);
            n += self.areas.to_array()[k] * v * v.transpose();
        }
        n
    }

    pub fn laplacian(&self) -> EOperator {
        self.areas.laplacian()
    }
}

/// `N − Mᵀ L_A⁻¹ M`, with `L_A` inverted on `E`. Needs at least two positive
/// areas.
///
/// With only three interfaces this matrix has rank at most one, so a
/// non-tripod cluster shows up in its largest eigenvalue; the smallest one
/// stays at zero.
pub fn cs_gap_matrix(stats: &InterfaceStats) -> Result<Matrix2<f64>> {
    let a = stats.areas.to_array();
    let empty: Vec<&str> = ["12", "23", "31"]
        .into_iter()
        .zip(a)
        .filter(|(_, v)| !(*v > 0.0))
        .map(|(n, _)| n)
        .collect();
    if empty.len() > 1 {
        return Err(Error::Conditioning(format!(
            "L_A is singular on E: interfaces {} are empty",
            empty.join(", ")
        )));
    }
    let linv = stats.laplacian().inverse()?.m33();
    let m = stats.m();
    let g = stats.n() - m.transpose() * linv * m;
    Ok(0.5 * (g + g.transpose()))
}

/// Smallest eigenvalue of [`cs_gap_matrix`].
pub fn matrix_cs_gap(stats: &InterfaceStats) -> Result<f64> {
    let e = SymmetricEigen::new(cs_gap_matrix(stats)?).eigenvalues;
    Ok(e[0].min(e[1]))
}

/// Number of singular values of `M` above `tol`.
pub fn dichotomy_rank(stats: &InterfaceStats, tol: f64) -> usize {
    let s = stats.m().svd(false, false).singular_values;
    s.iter().filter(|&&v| v > tol).count()
}

/// Cells laid out along a direction `θ`: `label_order[0]` on
/// `{⟨z,θ⟩ < a}`, `label_order[1]` on `a < ⟨z,θ⟩ < b`, `label_order[2]`
/// beyond `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneDimCluster {
    pub a: f64,
    pub b: f64,
    pub label_order: [usize; 3],
    /// Unit direction in `(u₁, u₂)` coordinates.
    pub direction: [f64; 2],
}

impl OneDimCluster {
    pub fn new(a: f64, b: f64, label_order: [usize; 3], direction: [f64; 2]) -> Result<Self> {
        let mut seen = [false; 3];
        for &l in &label_order {
            if l > 2 || seen[l] {
                return Err(Error::domain(format!("{label_order:?} is not a permutation of 0..3")));
            }
            seen[l] = true;
        }
        if !(a <= b) {
            return Err(Error::domain(format!("thresholds must satisfy a <= b, got {a}, {b}")));
        }
        let norm = direction[0].hypot(direction[1]);
        if !(norm > 0.0) {
            return Err(Error::domain("direction must be nonzero"));
        }
        let direction = [direction[0] / norm, direction[1] / norm];
        Ok(OneDimCluster { a, b, label_order, direction })
    }

    pub fn measures(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        m[self.label_order[0]] = Phi(self.a);
        m[self.label_order[1]] = Phi(self.b) - Phi(self.a);
        m[self.label_order[2]] = Phi(-self.b);
        m
    }

    pub fn perimeter(&self) -> f64 {
        phi(self.a) + phi(self.b)
    }

    /// Exact interface statistics: every normal is `±θ`.
    pub fn stats(&self) -> InterfaceStats {
        let mut areas = [0.0; 3];
        let mut normals = [[0.0; 2]; 3];
        let theta = self.direction;
        let o = self.label_order;
        for (from, to, area) in [(o[0], o[1], phi(self.a)), (o[1], o[2], phi(self.b))] {
            let pair = Pair { i: from, j: to };
            let k = pair.slot();
            let sign = if Pair::CYCLIC.contains(&pair) { 1.0 } else { -1.0 };
            areas[k] = area;
            normals[k] = [sign * theta[0], sign * theta[1]];
        }
        InterfaceStats::new(InterfaceAreas::from_array(areas), normals)
    }

    /// Cell containing the plane point with coordinates `z`.
    pub fn label_at(&self, z: [f64; 2]) -> usize {
        let s = z[0] * self.direction[0] + z[1] * self.direction[1];
        if s < self.a {
            self.label_order[0]
        } else if s < self.b {
            self.label_order[1]
        } else {
            self.label_order[2]
        }
    }
}

/// The interval cluster realising `v` with the cells in the given order
/// along `u₁`.
pub fn one_dim_with_order(v: &SimplexVolume, label_order: [usize; 3]) -> Result<OneDimCluster> {
    if !v.is_interior() {
        return Err(Error::domain(format!("one-dimensional competitor needs interior v, got {:?}", v.values())));
    }
    let w = v.values();
    let a = Phi_inv(w[label_order[0]])?;
    let b = Phi_inv(w[label_order[0]] + w[label_order[1]])?;
    OneDimCluster::new(a, b, label_order, [1.0, 0.0])
}

/// The interval competitor with cells in the natural order 1, 2, 3.
pub fn one_dim_competitor(v: &SimplexVolume) -> Result<OneDimCluster> {
    one_dim_with_order(v, [0, 1, 2])
}

/// The interval competitor of least perimeter over all six orders (the
/// largest cell goes in the middle).
pub fn best_one_dim_competitor(v: &SimplexVolume) -> Result<OneDimCluster> {
    const ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best: Option<OneDimCluster> = None;
    for o in ORDERS {
        let c = one_dim_with_order(v, o)?;
        if best.map_or(true, |b| c.perimeter() < b.perimeter()) {
            best = Some(c);
        }
    }
    Ok(best.expect("six orders"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tripod::model_profile;
    use proptest::prelude::*;

    #[test]
    fn tripod_matrices_match_laplacian() {
        let x = PlanePoint::from_coords2(0.4, -0.7);
        let s = InterfaceStats::tripod(&x);
        let l = s.laplacian();
        // M = −L/√2 as a map from the plane into E; N = L/2.
        let u = crate::linalg::basis();
        let m22 = u.transpose() * s.m();
        assert!((m22 + l.m22() / 2f64.sqrt()).abs().max() < 1e-14);
        assert!((s.n() - l.m22() / 2.0).abs().max() < 1e-14);
        assert!(matrix_cs_gap(&s).unwrap().abs() < 1e-12);
        assert_eq!(dichotomy_rank(&s, 1e-8), 2);
    }

    #[test]
    fn one_empty_interface_is_fine() {
        let s = InterfaceStats::new(
            InterfaceAreas::from_array([0.2, 0.1, 0.0]),
            [[0.0, 1.0], [1.0, 0.0], [0.3, 0.3]],
        );
        assert_eq!(s.avg_normals[2], [0.0, 0.0]);
        assert!(matrix_cs_gap(&s).unwrap() > -1e-12);
        let s = InterfaceStats::new(InterfaceAreas::from_array([0.2, 0.0, 0.0]), [[0.0, 1.0]; 3]);
        let err = matrix_cs_gap(&s).unwrap_err();
        assert!(err.to_string().contains("23, 31"));
    }

    #[test]
    fn degenerate_rank_is_zero() {
        let s = InterfaceStats::new(InterfaceAreas::default(), [[0.0; 2]; 3]);
        assert_eq!(dichotomy_rank(&s, 1e-10), 0);
    }

    #[test]
    fn competitor_at_center() {
        let c = one_dim_competitor(&SimplexVolume::CENTER).unwrap();
        assert!((c.a + 0.430_727_299_295_457_5).abs() < 1e-12);
        assert!((c.a + c.b).abs() < 1e-12);
        // 2φ(Φ⁻¹(1/3)), evaluated independently from the series value of a.
        let expected = 2.0 * (-0.5 * 0.430_727_299_295_457_5f64.powi(2)).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((c.perimeter() - expected).abs() < 1e-12);
        assert!(c.perimeter() > 0.72 && c.perimeter() < 0.73);
        let m = c.measures();
        for x in m {
            assert!((x - 1.0 / 3.0).abs() < 1e-14);
        }
        let s = c.stats();
        assert_eq!(dichotomy_rank(&s, 1e-10), 1);
        assert!(matrix_cs_gap(&s).unwrap() > -1e-12);
    }

    #[test]
    fn half_quarter_quarter() {
        let v = SimplexVolume::new([0.5, 0.25, 0.25]).unwrap();
        let c = one_dim_competitor(&v).unwrap();
        let expected = phi(0.0) + phi(Phi_inv(0.75).unwrap());
        assert!((c.perimeter() - expected).abs() < 1e-15);
        assert!(c.perimeter() > model_profile(&v).unwrap());
        let best = best_one_dim_competitor(&v).unwrap();
        assert_eq!(best.label_order[1], 0);
    }

    #[test]
    fn relabeling_keeps_perimeter() {
        let v = SimplexVolume::new([0.5, 0.3, 0.2]).unwrap();
        let perm = [2, 0, 1];
        let pv = v.permute(perm);
        let c = one_dim_competitor(&v).unwrap();
        let order = [perm[0], perm[1], perm[2]];
        let d = one_dim_with_order(&pv, order).unwrap();
        assert!((c.perimeter() - d.perimeter()).abs() < 1e-15);
    }

    #[test]
    fn boundary_volume_rejected() {
        let v = SimplexVolume::new([0.5, 0.5, 0.0]).unwrap();
        assert!(one_dim_competitor(&v).is_err());
    }

    proptest! {
        #[test]
        fn cs_gap_nonnegative_for_any_normals(
            a in proptest::array::uniform3(0.01f64..0.4),
            n in proptest::array::uniform3(proptest::array::uniform2(-1.0f64..1.0)),
        ) {
            let s = InterfaceStats::new(InterfaceAreas::from_array(a), n);
            let g = matrix_cs_gap(&s).unwrap();
            prop_assert!(g >= -1e-12);
            prop_assert!(SymmetricEigen::new(s.n()).eigenvalues.min() >= -1e-12);
        }

        #[test]
        fn curved_normals_give_positive_gap(
            a in proptest::array::uniform3(0.05f64..0.4),
            tilt in 0.05f64..0.5,
            x in proptest::array::uniform2(-1.5f64..1.5),
        ) {
            // Rotating one tripod normal breaks n̄12 + n̄23 + n̄31 = 0.
            let x = PlanePoint::from_coords2(x[0], x[1]);
            let mut normals = InterfaceStats::tripod(&x).avg_normals;
            let [c, s] = [tilt.cos(), tilt.sin()];
            let n = normals[0];
            normals[0] = [c * n[0] - s * n[1], s * n[0] + c * n[1]];
            let st = InterfaceStats::new(InterfaceAreas::from_array(a), normals);
            let e = SymmetricEigen::new(cs_gap_matrix(&st).unwrap()).eigenvalues;
            prop_assert!(e.max() > 1e-6);
            prop_assert!(e.min().abs() < 1e-12);
        }

        #[test]
        fn competitor_loses_to_model(v1 in 0.05f64..0.9, frac in 0.05f64..0.95) {
            let v2 = (1.0 - v1) * frac;
            let v = SimplexVolume::from_pair(v1, v2).unwrap();
            prop_assume!(v.min() > 0.02);
            let best = best_one_dim_competitor(&v).unwrap();
            prop_assert!(best.perimeter() > model_profile(&v).unwrap() + 1e-3);
        }
    }
}
