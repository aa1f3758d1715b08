//! Batch identity checks over the one-dimensional primitives, the tripod
//! model, translation variations and cluster geometry.
//!
//! Every check reduces to a scalar `residual` compared with a `tolerance`;
//! a check passes when `residual ≤ tolerance`. Residuals of one-sided
//! checks are signed, so a negative value means the inequality holds with
//! room to spare. A check whose computation errors records `NaN` (serialised
//! as `null`) and fails.

use crate::cluster::{dichotomy_rank, matrix_cs_gap, one_dim_with_order, InterfaceStats};
use crate::fd;
use crate::gauss1d::{profile_step, single_bubble_ode_residual, single_bubble_profile, Phi, Phi_inv};
use crate::grid::{make_tripod_grid, GridCluster};
use crate::linalg::Pair;
use crate::tripod::{
    cell_measure, interface_areas, invert_volume_map, measure_bounds, model_profile, model_profile_gradient,
    profile_point, strongly_convex_lower_bound, volume_jacobian, volume_map, PROFILE_TOL,
};
use crate::variation::{first_variation_from_m, index_form_translation};
use crate::{PlanePoint, Result, SimplexVolume};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(crate::Error::domain(format!("unknown level {s:?} (expected fast or full)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub level: Level,
    pub seed: u64,
    /// Multiplies the analytic Jacobian in the Jacobian checks; anything
    /// but 1 is a deliberate fault for testing the harness.
    pub jacobian_scale: f64,
}

impl Options {
    pub fn new(level: Level) -> Self {
        Options { level, seed: 20_240_601, jacobian_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn add(&mut self, name: impl Into<String>, tolerance: f64, f: impl FnOnce() -> Result<f64>) {
        let (residual, error) = match f() {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.checks.push(Check { name: name.into(), residual, tolerance, pass: residual <= tolerance, error });
    }
}

struct Sizes {
    random_points: usize,
    jacobian_points: usize,
    sandwich_points: usize,
    round_trips: usize,
    variations: usize,
    grid_resolution: usize,
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    it.into_iter().try_fold(f64::NEG_INFINITY, |m, r| Ok(m.max(r?)))
}

fn random_point(rng: &mut ChaCha8Rng, radius: f64) -> PlanePoint {
    loop {
        let p = PlanePoint::from_coords2(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if p.norm() <= radius {
            return p;
        }
    }
}

/// `15 × 15` grid over `(v₁, v₂) ∈ [0.01, 0.98]²`, keeping points with
/// `v₃ ≥ 0.01`; returned by row of `v₁`.
pub fn interior_grid() -> Vec<Vec<SimplexVolume>> {
    let t = |k: usize| 0.01 + 0.97 * k as f64 / 14.0;
    (0..15)
        .map(|i| {
            (0..15)
                .filter_map(|j| {
                    let (a, b) = (t(i), t(j));
                    let c = 1.0 - a - b;
                    (c >= 0.01 - 1e-12).then(|| SimplexVolume::new([a, b, c]).ok()).flatten()
                })
                .collect()
        })
        .filter(|row: &Vec<_>| !row.is_empty())
        .collect()
}

/// Run every check at the chosen level.
pub fn run(opts: &Options) -> Report {
    let sizes = match opts.level {
        Level::Fast => Sizes {
            random_points: 20,
            jacobian_points: 10,
            sandwich_points: 200,
            round_trips: 50,
            variations: 20,
            grid_resolution: 256,
        },
        Level::Full => Sizes {
            random_points: 100,
            jacobian_points: 100,
            sandwich_points: 1000,
            round_trips: 200,
            variations: 50,
            grid_resolution: 1024,
        },
    };
    let mut s = Suite::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    one_dim_checks(&mut s);
    tripod_checks(&mut s, &sizes, &mut rng, opts.jacobian_scale);
    profile_checks(&mut s);
    variation_checks(&mut s, &sizes, &mut rng);
    cluster_checks(&mut s, &sizes, &mut rng);
    let failed = s.checks.iter().filter(|c| !c.pass).count();
    Report { level: opts.level, seed: opts.seed, passed: s.checks.len() - failed, failed, checks: s.checks }
}

fn one_dim_checks(s: &mut Suite) {
    s.add("gauss1d.reflection", 1e-15, || {
        Ok((0..=6000).map(|k| -30.0 + 0.01 * k as f64).map(|x| (Phi(x) + Phi(-x) - 1.0).abs()).fold(0.0, f64::max))
    });
    s.add("gauss1d.quantile_round_trip", 1e-13, || {
        max_of((1..=999).map(|k| {
            let p = k as f64 / 1000.0;
            Ok((Phi(Phi_inv(p)?) - p).abs())
        }))
    });
    s.add("gauss1d.profile_derivative", 1e-6, || {
        max_of((1..50).map(|k| {
            let v = k as f64 / 50.0;
            let h = profile_step(v);
            let d = (single_bubble_profile(v + h)? - single_bubble_profile(v - h)?) / (2.0 * h);
            Ok((d + Phi_inv(v)?).abs())
        }))
    });
    s.add("gauss1d.ode_residual", 1e-5, || {
        max_of((0..97).map(|k| single_bubble_ode_residual(0.01 + 0.98 * k as f64 / 96.0).map(f64::abs)))
    });
    s.add("gauss1d.profile_symmetry", 1e-15, || {
        max_of((1..100).map(|k| {
            let v = k as f64 / 100.0;
            Ok((single_bubble_profile(v)? - single_bubble_profile(1.0 - v)?).abs())
        }))
    });
}

const PERMS: [[usize; 3]; 5] = [[1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];

fn tripod_checks(s: &mut Suite, n: &Sizes, rng: &mut ChaCha8Rng, jacobian_scale: f64) {
    let pts: Vec<PlanePoint> = (0..n.random_points).map(|_| random_point(rng, 3.0)).collect();
    s.add("tripod.equivariance.volume", 1e-10, || {
        max_of(pts.iter().flat_map(|x| {
            PERMS.map(|p| Ok(volume_map(&x.permute(p))?.max_abs_diff(&volume_map(x)?.permute(p))))
        }))
    });
    s.add("tripod.equivariance.areas", 1e-10, || {
        let mut worst: f64 = 0.0;
        for x in &pts {
            let a = interface_areas(x);
            for perm in PERMS {
                let b = interface_areas(&x.permute(perm));
                for q in Pair::CYCLIC {
                    worst = worst.max((a.get(q) - b.get(Pair { i: perm[q.i], j: perm[q.j] })).abs());
                }
            }
        }
        Ok(worst)
    });
    // Profile derivatives at the volumes of the sampled tripods.
    let vols: Vec<SimplexVolume> =
        pts.iter().filter(|x| x.norm() <= 2.0).filter_map(|x| volume_map(x).ok()).collect();
    s.add("tripod.equivariance.gradient", 1e-10, || {
        max_of(vols.iter().flat_map(|v| {
            PERMS.map(|p| {
                let g = model_profile_gradient(v)?.permute(p);
                let h = model_profile_gradient(&v.permute(p))?;
                Ok((g - h).norm())
            })
        }))
    });
    s.add("tripod.equivariance.hessian", 1e-10, || {
        max_of(vols.iter().flat_map(|v| {
            PERMS.map(|p| {
                let h = profile_point(v)?.hessian.m33();
                let hp = profile_point(&v.permute(p))?.hessian.m33();
                let mut worst: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        worst = worst.max((h[(i, j)] - hp[(p[i], p[j])]).abs());
                    }
                }
                Ok(worst)
            })
        }))
    });
    s.add("tripod.measure_sandwich", 1e-15, || {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..n.sandwich_points {
            let x = random_point(rng, 5.0);
            for i in 0..3 {
                let m = cell_measure(&x, i, 1e-15)?;
                let (lo, hi) = measure_bounds(&x, i)?;
                worst = worst.max(lo - m).max(m - hi);
            }
        }
        Ok(worst)
    });
    for k in 0..n.jacobian_points {
        let x = random_point(rng, 3.0);
        s.add(format!("tripod.jacobian.{k:03}"), 1e-6, || {
            let analytic = volume_jacobian(&x).m22() * jacobian_scale;
            let numeric = fd::jacobian(|y| Ok(volume_map(y)?.values()), x, 1e-3)?;
            Ok((analytic - numeric).abs().max())
        });
    }
    s.add("tripod.round_trip", 1e-7, || {
        max_of((0..n.round_trips).map(|_| {
            let x = random_point(rng, 4.0);
            let y = invert_volume_map(&volume_map(&x)?, PROFILE_TOL)?;
            Ok((y - x).norm())
        }))
    });
    s.add("tripod.center_profile", 1e-8, || {
        Ok((model_profile(&SimplexVolume::CENTER)? - 1.5 / crate::gauss1d::sqrt_two_pi()).abs())
    });
    s.add("tripod.convex_bound_scaling", 1e-15, || {
        let v = SimplexVolume::new([0.5, 0.3, 0.2])?;
        let base = model_profile(&v)?;
        max_of([0.25, 1.0, 4.0].map(|k: f64| Ok((strongly_convex_lower_bound(k, &v)? - k.sqrt() * base).abs())))
    });
}

/// Step for finite-difference Hessians: fourth-order truncation grows fast
/// near the boundary of the simplex, so the step shrinks with `min vᵢ`.
pub fn hessian_step(v: &SimplexVolume) -> f64 {
    (0.05 * v.min()).min(2e-3)
}

fn profile_checks(s: &mut Suite) {
    for (r, row) in interior_grid().into_iter().enumerate() {
        s.add(format!("profile.gradient_fd.row{r:02}"), 1e-5, || {
            max_of(row.iter().map(|v| {
                let g = model_profile_gradient(v)?.coords2();
                let n = fd::simplex_gradient(model_profile, v, 1e-4)?;
                Ok((g[0] - n[0]).abs().max((g[1] - n[1]).abs()))
            }))
        });
        s.add(format!("profile.hessian_fd.row{r:02}"), 1e-4, || {
            max_of(row.iter().map(|v| {
                let h = profile_point(v)?.hessian.m22();
                let n = fd::simplex_hessian(model_profile, v, hessian_step(v))?;
                Ok((h - n).abs().max())
            }))
        });
        s.add(format!("profile.trace_identity.row{r:02}"), 1e-7, || {
            max_of(row.iter().map(|v| profile_point(v)?.trace_residual()))
        });
        s.add(format!("profile.negative_definite.row{r:02}"), 0.0, || {
            max_of(row.iter().map(|v| Ok(profile_point(v)?.hessian.eigenvalues()[1])))
        });
    }
    // Rays from the centre to boundary points of the simplex.
    let rays: Vec<[f64; 3]> = (0..10)
        .map(|k| {
            let t = (k as f64 + 0.5) / 10.0;
            match k % 3 {
                0 => [t, 1.0 - t, 0.0],
                1 => [0.0, t, 1.0 - t],
                _ => [1.0 - t, 0.0, t],
            }
        })
        .collect();
    // v(ε) = (1 − ε)·b + ε·(1/3, 1/3, 1/3)
    let gap = |b: &[f64; 3], eps: f64| -> Result<f64> {
        let v = SimplexVolume::new(b.map(|bi| (1.0 - eps) * bi + eps / 3.0))?;
        Ok((model_profile(&v)? - single_bubble_profile(v.max())?).abs())
    };
    s.add("profile.boundary_agreement", 1e-2, || max_of(rays.iter().map(|b| gap(b, 1e-3))));
    s.add("profile.boundary_monotone", 0.0, || {
        max_of(rays.iter().map(|b| {
            let g = [gap(b, 1e-1)?, gap(b, 1e-2)?, gap(b, 1e-3)?];
            Ok((g[1] - g[0]).max(g[2] - g[1]))
        }))
    });
}

fn variation_checks(s: &mut Suite, n: &Sizes, rng: &mut ChaCha8Rng) {
    let cases: Vec<(PlanePoint, PlanePoint)> = (0..n.variations)
        .map(|_| (random_point(rng, 2.0), PlanePoint::from_coords2(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let h = 1e-3;
    s.add("variation.dv_sums_to_zero", 1e-15, || {
        Ok(cases.iter().map(|(x, w)| index_form_translation(x, w).dv.iter().sum::<f64>().abs()).fold(0.0, f64::max))
    });
    s.add("variation.dv_fd", 1e-8, || {
        max_of(cases.iter().map(|(x, w)| {
            let r = index_form_translation(x, w);
            let d = fd::derivative_vec(|t| Ok(volume_map(&(*x + t * *w))?.values()), h)?;
            Ok((0..3).map(|i| (d[i] - r.dv[i]).abs()).fold(0.0, f64::max))
        }))
    });
    s.add("variation.first_variation_fd", 1e-6, || {
        max_of(cases.iter().map(|(x, w)| {
            let d = fd::derivative(|t| Ok(crate::tripod::tripod_perimeter(&(*x + t * *w))), h)?;
            Ok((d - first_variation_from_m(x, w)).abs())
        }))
    });
    s.add("variation.index_form_fd", 1e-5, || {
        max_of(cases.iter().map(|(x, w)| {
            let r = index_form_translation(x, w);
            let d2a = fd::second_derivative(|t| Ok(crate::tripod::tripod_perimeter(&(*x + t * *w))), h)?;
            let d2v = fd::second_derivative_vec(|t| Ok(volume_map(&(*x + t * *w))?.values()), h)?;
            let q = d2a - (0..3).map(|i| r.lambda[i] * d2v[i]).sum::<f64>();
            Ok((q - r.q).abs())
        }))
    });
    s.add("variation.index_form_nonpositive", 0.0, || {
        Ok(cases.iter().map(|(x, w)| index_form_translation(x, w).q).fold(f64::NEG_INFINITY, f64::max))
    });
    s.add("variation.index_form_matrix_bound", 1e-12, || {
        max_of(cases.iter().map(|(x, w)| {
            let st = InterfaceStats::tripod(x);
            let mw = st.m() * w.vec2();
            let bound = (mw.transpose() * st.laplacian().inverse()?.m33() * mw)[(0, 0)];
            Ok((index_form_translation(x, w).q + bound).abs())
        }))
    });
}

fn grid_checks(s: &mut Suite, res: usize) {
    let tag = format!("res{res}");
    let extent = 6.0;
    let half = GridCluster::half_plane(extent, res, [0.6, 0.8], 0.3, 0, 1);
    // Shifting every interface by half a pixel moves about P·h/2 of mass,
    // and P ≤ 0.6 for these clusters.
    let measure_tol = 0.6 * extent / res as f64;
    s.add(format!("grid.half_plane_measure.{tag}"), measure_tol, || {
        let m = half.as_ref().map_err(|e| crate::Error::domain(e.to_string()))?.measures().inside;
        Ok((m[0] - Phi(0.3)).abs().max((m[1] - (1.0 - Phi(0.3))).abs()))
    });
    s.add(format!("grid.half_plane_perimeter.{tag}"), 0.03, || {
        let p = half.as_ref().map_err(|e| crate::Error::domain(e.to_string()))?.perimeter().perimeter;
        let exact = crate::gauss1d::phi(0.3);
        Ok((p - exact).abs() / exact)
    });
    for (k, x) in [PlanePoint::ORIGIN, PlanePoint::from_coords2(0.4, -0.3)].into_iter().enumerate() {
        let g = make_tripod_grid(&x, extent, res);
        s.add(format!("grid.tripod{k}_measure.{tag}"), measure_tol, || {
            let m = g.as_ref().map_err(|e| crate::Error::domain(e.to_string()))?.measures().inside;
            let exact = volume_map(&x)?.values();
            Ok((0..3).map(|i| (m[i] - exact[i]).abs()).fold(0.0, f64::max))
        });
        s.add(format!("grid.tripod{k}_perimeter.{tag}"), 0.03, || {
            let p = g.as_ref().map_err(|e| crate::Error::domain(e.to_string()))?.perimeter().perimeter;
            let exact = crate::tripod::tripod_perimeter(&x);
            Ok((p - exact).abs() / exact)
        });
        s.add(format!("grid.tripod{k}_cs_gap.{tag}"), 1e-8, || {
            let st = g.as_ref().map_err(|e| crate::Error::domain(e.to_string()))?.perimeter().stats;
            Ok(-matrix_cs_gap(&st)?)
        });
    }
}

fn cluster_checks(s: &mut Suite, n: &Sizes, rng: &mut ChaCha8Rng) {
    let tripods: Vec<PlanePoint> = (0..20).map(|_| random_point(rng, 2.5)).collect();
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let lines: Vec<InterfaceStats> = (0..20)
        .filter_map(|k| {
            let a: f64 = rng.gen_range(0.05..0.9);
            let b: f64 = rng.gen_range(0.02..(0.98 - a));
            let v = SimplexVolume::new([a, b, 1.0 - a - b]).ok()?;
            let mut c = one_dim_with_order(&v, orders[k % 6]).ok()?;
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            c.direction = [ang.cos(), ang.sin()];
            Some(c.stats())
        })
        .collect();
    s.add("cluster.cs_tripod_equality", 1e-10, || {
        max_of(tripods.iter().map(|x| {
            let g = crate::cluster::cs_gap_matrix(&InterfaceStats::tripod(x))?;
            let e = SymmetricEigen::new(g).eigenvalues;
            Ok(e[0].abs().max(e[1].abs()))
        }))
    });
    s.add("cluster.cs_nonnegative", 1e-8, || {
        max_of(tripods.iter().map(InterfaceStats::tripod).chain(lines.iter().copied()).map(|st| Ok(-matrix_cs_gap(&st)?)))
    });
    s.add("cluster.rank_tripod", 0.0, || {
        Ok(tripods.iter().filter(|x| dichotomy_rank(&InterfaceStats::tripod(x), 1e-9) != 2).count() as f64)
    });
    s.add("cluster.rank_one_dim", 0.0, || {
        Ok(lines.iter().filter(|st| dichotomy_rank(st, 1e-9) != 1).count() as f64)
    });
    s.add("cluster.one_dim_worse_than_model", -1e-3, || {
        max_of((0..50).map(|_| {
            let a: f64 = rng.gen_range(0.05..0.9);
            let b: f64 = rng.gen_range(0.02..(0.98 - a));
            let v = SimplexVolume::new([a, b, 1.0 - a - b])?;
            let best = crate::cluster::best_one_dim_competitor(&v)?.perimeter();
            Ok(model_profile(&v)? - best)
        }))
    });
    grid_checks(s, 256);
    if n.grid_resolution > 256 {
        grid_checks(s, n.grid_resolution);
    }
}
