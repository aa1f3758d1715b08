//! Pixelated 3-clusters on the window `[−R, R]²` of the plane `E`.
//!
//! Column `c` runs along `u₁`, row `r` along `u₂`; pixel `(r, c)` has centre
//! `(−R + (c + ½)h, −R + (r + ½)h)` with `h = 2R / resolution`. Labels are
//! stored as cell indices `0..3` and written to files as `1..3`.
//!
//! The Gaussian mass of a pixel is the product of two per-axis masses
//! `Φ(e_{k+1}) − Φ(e_k)`, so only those `resolution` numbers are stored.
//! Mass outside the window is reported on its own and never attributed to
//! a cell.

use crate::cluster::{InterfaceStats, OneDimCluster};
use crate::gauss1d::{phi, upper_tail, Phi};
use crate::linalg::{basis, InterfaceAreas, Pair};
use crate::{Error, PlanePoint, Result};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"GBC1";
pub const MAX_RESOLUTION: usize = 4096;
/// Width, in pixels, of the Gaussian kernel used to estimate interface
/// normals; the kernel is cut off at three widths.
pub const NORMAL_KERNEL: f64 = 3.0;

#[derive(Clone, PartialEq)]
pub struct GridCluster {
    extent: f64,
    resolution: usize,
    labels: Vec<u8>,
    axis_mass: Vec<f64>,
}

impl std::fmt::Debug for GridCluster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridCluster")
            .field("extent", &self.extent)
            .field("resolution", &self.resolution)
            .field("label_counts", &self.label_counts())
            .finish()
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn axis_masses(extent: f64, resolution: usize) -> Vec<f64> {
    let h = 2.0 * extent / resolution as f64;
    (0..resolution)
        .map(|k| {
            let lo = -extent + k as f64 * h;
            let hi = -extent + (k + 1) as f64 * h;
            // Difference taken in whichever tail keeps full precision.
            if lo >= 0.0 {
                upper_tail(lo) - upper_tail(hi)
            } else {
                Phi(hi) - Phi(lo)
            }
        })
        .collect()
}

/// Per-cell measures of a grid cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeasures {
    pub inside: [f64; 3],
    /// Gaussian mass of the plane outside the window.
    pub outside: f64,
}

impl GridMeasures {
    pub fn total_inside(&self) -> f64 {
        self.inside.iter().sum()
    }
}

/// One cut edge between pixels of different labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceEdge {
    /// Slot of the unordered pair in [`Pair::CYCLIC`].
    pub slot: usize,
    /// Edge midpoint in plane coordinates.
    pub midpoint: [f64; 2],
    /// Unit axis normal, oriented from cell `i` to cell `j` of the cyclic pair.
    pub axis_normal: [f64; 2],
    /// Estimated unit normal of the underlying interface, same orientation.
    pub normal: [f64; 2],
    /// Gaussian-weighted length of the edge itself.
    pub weight: f64,
}

impl InterfaceEdge {
    /// Factor turning the staircase length into interface length.
    pub fn correction(&self) -> f64 {
        1.0 / (self.normal[0].abs() + self.normal[1].abs())
    }
}

/// Output of [`GridCluster::perimeter`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerimeterEstimate {
    pub perimeter: f64,
    /// Edge-cut perimeter without the normal correction.
    pub raw_perimeter: f64,
    pub stats: InterfaceStats,
    pub cut_edges: usize,
}

impl GridCluster {
    /// Labels are cell indices `0..3`, row-major.
    pub fn new(extent: f64, resolution: usize, labels: Vec<u8>) -> Result<Self> {
        if !(extent > 0.0 && extent <= 10.0) {
            return Err(Error::domain(format!("window half-width must be in (0, 10], got {extent}")));
        }
        if !(2..=MAX_RESOLUTION).contains(&resolution) {
            return Err(Error::domain(format!("resolution must be in [2, {MAX_RESOLUTION}], got {resolution}")));
        }
        if labels.len() != resolution * resolution {
            return Err(Error::domain(format!(
                "expected {} labels, got {}",
                resolution * resolution,
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 2) {
            return Err(Error::domain(format!("label {bad} is not a cell index")));
        }
        Ok(GridCluster { extent, resolution, labels, axis_mass: axis_masses(extent, resolution) })
    }

    /// Label every pixel by `f(centre)`.
    pub fn from_fn<F: Fn([f64; 2]) -> usize>(extent: f64, resolution: usize, f: F) -> Result<Self> {
        let h = 2.0 * extent / resolution as f64;
        let mut labels = Vec::with_capacity(resolution * resolution);
        for r in 0..resolution {
            let y = -extent + (r as f64 + 0.5) * h;
            for c in 0..resolution {
                let x = -extent + (c as f64 + 0.5) * h;
                labels.push(f([x, y]).min(255) as u8);
            }
        }
        Self::new(extent, resolution, labels)
    }

    pub fn uniform(extent: f64, resolution: usize, label: usize) -> Result<Self> {
        Self::from_fn(extent, resolution, |_| label)
    }

    /// `below` on `{⟨z, normal⟩ < offset}`, `above` elsewhere.
    pub fn half_plane(
        extent: f64,
        resolution: usize,
        normal: [f64; 2],
        offset: f64,
        below: usize,
        above: usize,
    ) -> Result<Self> {
        Self::from_fn(extent, resolution, |z| {
            if z[0] * normal[0] + z[1] * normal[1] < offset {
                below
            } else {
                above
            }
        })
    }

    pub fn from_one_dim(cluster: &OneDimCluster, extent: f64, resolution: usize) -> Result<Self> {
        Self::from_fn(extent, resolution, |z| cluster.label_at(z))
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, r: usize, c: usize) -> usize {
        self.labels[r * self.resolution + c] as usize
    }

    pub fn set_label(&mut self, r: usize, c: usize, label: usize) {
        assert!(label < 3, "label {label} is not a cell index");
        self.labels[r * self.resolution + c] = label as u8;
    }

    /// Per-axis Gaussian masses of the pixel columns (equivalently rows).
    pub fn axis_mass(&self) -> &[f64] {
        &self.axis_mass
    }

    pub fn pixel_weight(&self, r: usize, c: usize) -> f64 {
        self.axis_mass[r] * self.axis_mass[c]
    }

    pub fn center(&self, r: usize, c: usize) -> [f64; 2] {
        let h = self.pixel_size();
        [-self.extent + (c as f64 + 0.5) * h, -self.extent + (r as f64 + 0.5) * h]
    }

    /// Gaussian mass of the window, `(Φ(R) − Φ(−R))²`.
    pub fn window_mass(&self) -> f64 {
        let t = Phi(-self.extent);
        (1.0 - 2.0 * t) * (1.0 - 2.0 * t)
    }

    /// Gaussian mass outside the window, `1 − (Φ(R) − Φ(−R))²`.
    pub fn outside_mass(&self) -> f64 {
        let t = Phi(-self.extent);
        4.0 * t * (1.0 - t)
    }

    /// Compensated sum of all pixel weights.
    pub fn total_weight(&self) -> f64 {
        let mut line = KahanSum::default();
        for &m in &self.axis_mass {
            line.add(m);
        }
        let l = line.value();
        let mut total = KahanSum::default();
        for &m in &self.axis_mass {
            total.add(m * l);
        }
        total.value()
    }

    /// Number of pixels carrying each label.
    pub fn label_counts(&self) -> [usize; 3] {
        let mut n = [0; 3];
        for &l in &self.labels {
            n[l as usize] += 1;
        }
        n
    }

    pub fn measures(&self) -> GridMeasures {
        let n = self.resolution;
        let mut cells = [KahanSum::default(); 3];
        for r in 0..n {
            let mut row = [KahanSum::default(); 3];
            for c in 0..n {
                row[self.labels[r * n + c] as usize].add(self.axis_mass[c]);
            }
            for k in 0..3 {
                cells[k].add(self.axis_mass[r] * row[k].value());
            }
        }
        GridMeasures { inside: cells.map(|s| s.value()), outside: self.outside_mass() }
    }

    /// The same cluster with every pixel split into 2×2.
    pub fn upsample(&self) -> Result<Self> {
        let n = self.resolution;
        let m = 2 * n;
        let mut labels = vec![0u8; m * m];
        for r in 0..m {
            for c in 0..m {
                labels[r * m + c] = self.labels[(r / 2) * n + c / 2];
            }
        }
        Self::new(self.extent, m, labels)
    }

    /// Kernel-weighted first moment of the `to`/`from` labels around `mid`
    /// (grid coordinates), normalised; `None` if it vanishes.
    fn local_normal(&self, mid: [f64; 2], from: u8, to: u8) -> Option<[f64; 2]> {
        let n = self.resolution as isize;
        let sigma = NORMAL_KERNEL;
        let rad = 3.0 * sigma;
        let inv = -0.5 / (sigma * sigma);
        let (r0, r1) = ((mid[1] - rad).floor() as isize, (mid[1] + rad).ceil() as isize);
        let (c0, c1) = ((mid[0] - rad).floor() as isize, (mid[0] + rad).ceil() as isize);
        let (mut sx, mut sy) = (0.0, 0.0);
        for r in r0.max(0)..=r1.min(n - 1) {
            let dy = r as f64 + 0.5 - mid[1];
            for c in c0.max(0)..=c1.min(n - 1) {
                let dx = c as f64 + 0.5 - mid[0];
                if dx * dx + dy * dy > rad * rad {
                    continue;
                }
                let l = self.labels[(r * n + c) as usize];
                let k = ((dx * dx + dy * dy) * inv).exp();
                let s = if l == to {
                    k
                } else if l == from {
                    -k
                } else {
                    continue;
                };
                sx += s * dx;
                sy += s * dy;
            }
        }
        let norm = sx.hypot(sy);
        (norm > 0.0).then(|| [sx / norm, sy / norm])
    }

    /// Every cut edge between differently labelled neighbours.
    pub fn interface_edges(&self) -> Vec<InterfaceEdge> {
        let n = self.resolution;
        let h = self.pixel_size();
        let mut edges = Vec::new();
        let mut push = |a: u8, b: u8, grid_mid: [f64; 2], axis: [f64; 2], weight: f64| {
            let pair = Pair { i: a as usize, j: b as usize };
            let (from, to, sign) = if Pair::CYCLIC.contains(&pair) { (a, b, 1.0) } else { (b, a, -1.0) };
            let axis_normal = [sign * axis[0], sign * axis[1]];
            let normal = self.local_normal(grid_mid, from, to).unwrap_or(axis_normal);
            edges.push(InterfaceEdge {
                slot: pair.slot(),
                midpoint: [-self.extent + grid_mid[0] * h, -self.extent + grid_mid[1] * h],
                axis_normal,
                normal,
                weight,
            });
        };
        for r in 0..n {
            for c in 0..n {
                let a = self.labels[r * n + c];
                if c + 1 < n {
                    let b = self.labels[r * n + c + 1];
                    if a != b {
                        let x = -self.extent + (c + 1) as f64 * h;
                        push(a, b, [(c + 1) as f64, r as f64 + 0.5], [1.0, 0.0], phi(x) * self.axis_mass[r]);
                    }
                }
                if r + 1 < n {
                    let b = self.labels[(r + 1) * n + c];
                    if a != b {
                        let y = -self.extent + (r + 1) as f64 * h;
                        push(a, b, [c as f64 + 0.5, (r + 1) as f64], [0.0, 1.0], phi(y) * self.axis_mass[c]);
                    }
                }
            }
        }
        edges
    }

    /// Normal-corrected Gaussian perimeter and interface statistics.
    ///
    /// Each cut edge contributes its Gaussian-weighted length divided by
    /// `|ν₁| + |ν₂|`, where `ν` is the local interface normal estimated from
    /// the labels under a Gaussian kernel of width [`NORMAL_KERNEL`] pixels. Average
    /// normals are the weighted fluxes `Σ w·(axis normal)` divided by the
    /// corrected areas.
    pub fn perimeter(&self) -> PerimeterEstimate {
        let edges = self.interface_edges();
        let mut area = [KahanSum::default(); 3];
        let mut raw = KahanSum::default();
        let mut flux = [[KahanSum::default(); 2]; 3];
        for e in &edges {
            area[e.slot].add(e.weight * e.correction());
            raw.add(e.weight);
            flux[e.slot][0].add(e.weight * e.axis_normal[0]);
            flux[e.slot][1].add(e.weight * e.axis_normal[1]);
        }
        let areas = area.map(|s| s.value());
        let mut normals = [[0.0; 2]; 3];
        for k in 0..3 {
            if areas[k] > 0.0 {
                normals[k] = [flux[k][0].value() / areas[k], flux[k][1].value() / areas[k]];
            }
        }
        let areas = InterfaceAreas::from_array(areas);
        PerimeterEstimate {
            perimeter: areas.total(),
            raw_perimeter: raw.value(),
            stats: InterfaceStats::new(areas, normals),
            cut_edges: edges.len(),
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.extent.to_le_bytes())?;
        w.write_all(&(self.resolution as u32).to_le_bytes())?;
        let bytes: Vec<u8> = self.labels.iter().map(|l| l + 1).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut rd: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        rd.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut f = [0u8; 8];
        rd.read_exact(&mut f)?;
        let extent = f64::from_le_bytes(f);
        let mut u = [0u8; 4];
        rd.read_exact(&mut u)?;
        let resolution = u32::from_le_bytes(u) as usize;
        if resolution > MAX_RESOLUTION {
            return Err(Error::Format(format!("resolution {resolution} too large")));
        }
        let mut bytes = vec![0u8; resolution * resolution];
        rd.read_exact(&mut bytes)?;
        let mut rest = Vec::new();
        rd.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", rest.len())));
        }
        let mut labels = Vec::with_capacity(bytes.len());
        for b in bytes {
            if !(1..=3).contains(&b) {
                return Err(Error::Format(format!("label byte {b} not in 1..=3")));
            }
            labels.push(b - 1);
        }
        Self::new(extent, resolution, labels).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// `x,y,label` rows at pixel centres, labels `1..3`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "x,y,label")?;
        for r in 0..self.resolution {
            for c in 0..self.resolution {
                let [x, y] = self.center(r, c);
                writeln!(w, "{x},{y},{}", self.label(r, c) + 1)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Rasterise the tripod with vertex `x`: each pixel centre `z` goes to the
/// cell maximising `(z − x)_j`, ties to the smaller index.
pub fn make_tripod_grid(x: &PlanePoint, extent: f64, resolution: usize) -> Result<GridCluster> {
    if !(4.0..=10.0).contains(&extent) {
        return Err(Error::domain(format!("R must be in [4, 10], got {extent}")));
    }
    if !(64..=MAX_RESOLUTION).contains(&resolution) {
        return Err(Error::domain(format!("resolution must be in [64, {MAX_RESOLUTION}], got {resolution}")));
    }
    Ok(tripod_labels(x, extent, resolution))
}

/// [`make_tripod_grid`] without the range checks, for coarse working grids.
pub(crate) fn tripod_labels(x: &PlanePoint, extent: f64, resolution: usize) -> GridCluster {
    let u = basis();
    let v = x.coords3();
    GridCluster::from_fn(extent, resolution, |z| {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for j in 0..3 {
            let val = u[(j, 0)] * z[0] + u[(j, 1)] * z[1] - v[j];
            if val > best_val {
                best = j;
                best_val = val;
            }
        }
        best
    })
    .expect("valid window")
}
