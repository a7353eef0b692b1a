//! Seeded synthetic point clouds.
//!
//! Every family has documented default parameters; a [`DatasetSpec`] field
//! left as `None` takes the family default.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Spiral,
    SwissRoll,
    GaussianClusters,
    UniformHypercube,
    SphereSurface,
    Grid,
    LinkedCircles,
    UnlinkedCircles,
    TrefoilKnot,
    TwoLinearClusters,
    CircularClusters,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Spiral,
        Family::SwissRoll,
        Family::GaussianClusters,
        Family::UniformHypercube,
        Family::SphereSurface,
        Family::Grid,
        Family::LinkedCircles,
        Family::UnlinkedCircles,
        Family::TrefoilKnot,
        Family::TwoLinearClusters,
        Family::CircularClusters,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Spiral => "spiral",
            Family::SwissRoll => "swiss_roll",
            Family::GaussianClusters => "gaussian_clusters",
            Family::UniformHypercube => "uniform_hypercube",
            Family::SphereSurface => "sphere_surface",
            Family::Grid => "grid",
            Family::LinkedCircles => "linked_circles",
            Family::UnlinkedCircles => "unlinked_circles",
            Family::TrefoilKnot => "trefoil_knot",
            Family::TwoLinearClusters => "two_linear_clusters",
            Family::CircularClusters => "circular_clusters",
        }
    }

    /// Ambient dimension when the family fixes it.
    pub fn native_dim(&self) -> Option<usize> {
        match self {
            Family::GaussianClusters | Family::UniformHypercube => None,
            Family::Spiral
            | Family::Grid
            | Family::TwoLinearClusters
            | Family::CircularClusters => Some(2),
            _ => Some(3),
        }
    }

    pub fn default_noise(&self) -> f64 {
        match self {
            Family::Spiral => SPIRAL_WIDTH,
            Family::SwissRoll => 0.1,
            Family::GaussianClusters => 1.0,
            Family::UniformHypercube => 0.0,
            Family::SphereSurface => 0.05,
            Family::Grid => 0.0,
            Family::LinkedCircles | Family::UnlinkedCircles | Family::TrefoilKnot => 0.02,
            Family::TwoLinearClusters => 0.1,
            Family::CircularClusters => 0.5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Spiral `r = SPIRAL_PITCH · θ` for `θ` in
/// `[SPIRAL_START, SPIRAL_START + 2π · turns]`.
pub const SPIRAL_START: f64 = 1.5 * PI;
pub const SPIRAL_PITCH: f64 = 1.0;
pub const SPIRAL_TURNS: f64 = 1.25;
/// Full width of the spiral strip (the spiral's noise parameter).
pub const SPIRAL_WIDTH: f64 = 2.0;
/// Consecutive points cycle through this many bands across the strip.
pub const SPIRAL_LEVELS: usize = 5;

/// Swiss roll `(t cos t, h, t sin t)`, `t` in `[1.5π, 4.5π]`, `h` in
/// `[0, SWISS_HEIGHT]`.
pub const SWISS_HEIGHT: f64 = 21.0;

/// Unit of the gaps between consecutive Gaussian cluster centres; the
/// `i`-th gap is `i · separation` unless explicit gaps are given.
pub const CLUSTER_SEPARATION: f64 = 10.0;
pub const CLUSTER_COUNT: usize = 3;
pub const CLUSTER_DIM: usize = 10;
pub const HYPERCUBE_DIM: usize = 10;

pub const LINE_LENGTH: f64 = 10.0;
pub const LINE_SEPARATION: f64 = 2.0;
pub const RING_RADIUS: f64 = 10.0;
pub const RING_CLUSTERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// Explicit gaps between consecutive collinear cluster centres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<f64>,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            p: None,
            noise: None,
            clusters: None,
            separation: None,
            gaps: None,
            turns: None,
            seed,
        }
    }

    pub fn with_p(mut self, p: usize) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_clusters(mut self, clusters: usize) -> Self {
        self.clusters = Some(clusters);
        self
    }

    pub fn with_gaps(mut self, gaps: Vec<f64>) -> Self {
        self.gaps = Some(gaps);
        self
    }

    pub fn noise(&self) -> f64 {
        self.noise.unwrap_or_else(|| self.family.default_noise())
    }

    pub fn dim(&self) -> usize {
        match self.family.native_dim() {
            Some(p) => p,
            None => self.p.unwrap_or(match self.family {
                Family::GaussianClusters => CLUSTER_DIM,
                _ => HYPERCUBE_DIM,
            }),
        }
    }

    pub fn clusters(&self) -> usize {
        self.clusters.unwrap_or(match self.family {
            Family::CircularClusters => RING_CLUSTERS,
            _ => CLUSTER_COUNT,
        })
    }

    /// Centres of the Gaussian clusters: collinear on the first axis.
    pub fn cluster_centres(&self) -> Result<Matrix> {
        let c = self.clusters();
        let p = self.dim();
        let gaps: Vec<f64> = match &self.gaps {
            Some(g) => {
                if g.len() + 1 != c {
                    return Err(Error::InvalidParameter(format!(
                        "{c} clusters need {} gaps, got {}",
                        c - 1,
                        g.len()
                    )));
                }
                g.clone()
            }
            None => {
                let unit = self.separation.unwrap_or(CLUSTER_SEPARATION);
                (1..c).map(|i| unit * i as f64).collect()
            }
        };
        let mut centres = Matrix::zeros(c, p);
        let mut pos = 0.0;
        for i in 1..c {
            pos += gaps[i - 1];
            centres[(i, 0)] = pos;
        }
        Ok(centres)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if let (Some(native), Some(p)) = (self.family.native_dim(), self.p) {
            if p != native {
                return Err(Error::InvalidParameter(format!(
                    "family {} lives in {native} dimensions, got p = {p}",
                    self.family
                )));
            }
        }
        if self.p == Some(0) {
            return Err(Error::InvalidParameter("p must be positive".into()));
        }
        let noise = self.noise();
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise must be non-negative, got {noise}"
            )));
        }
        if self.clusters == Some(0) {
            return Err(Error::InvalidParameter(
                "cluster count must be positive".into(),
            ));
        }
        if let Some(t) = self.turns {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "turns must be positive, got {t}"
                )));
            }
        }
        if let Some(gaps) = &self.gaps {
            if gaps.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
                return Err(Error::InvalidParameter(
                    "cluster gaps must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A generated point cloud with its generating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub points: Matrix,
    /// Per-point generating coordinates, family specific: spiral `(θ, offset)`,
    /// swiss roll `(t, h)`, sphere `(polar, azimuth)`, curves `(t)`, grid
    /// `(row, col)`, lines `(position)`.
    pub latent: Option<Matrix>,
    /// Cluster, circle or line membership.
    pub labels: Option<Vec<usize>>,
    pub centres: Option<Matrix>,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Generates the dataset described by `spec`; a pure function of the spec.
pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = stream(spec.seed, Stream::Generator);
    let n = spec.n;
    let p = spec.dim();
    let noise = spec.noise();
    let mut points = Matrix::zeros(n, p);
    let mut latent = None;
    let mut labels = None;
    let mut centres = None;
    match spec.family {
        Family::Spiral => {
            let turns = spec.turns.unwrap_or(SPIRAL_TURNS);
            let (t0, t1) = (SPIRAL_START, SPIRAL_START + 2.0 * PI * turns);
            // stratified in arc length s(θ) ≈ b θ² / 2: one draw per cell
            let b = SPIRAL_PITCH;
            let (s0, s1) = (0.5 * b * t0 * t0, 0.5 * b * t1 * t1);
            let cell = (s1 - s0) / n as f64;
            let mut lat = Matrix::zeros(n, 2);
            for i in 0..n {
                let s = s0 + cell * (i as f64 + rng.random::<f64>());
                let theta = (2.0 * s / b).sqrt();
                let level = (i % SPIRAL_LEVELS) as f64 + rng.random::<f64>();
                let offset = noise * (level / SPIRAL_LEVELS as f64 - 0.5);
                let r = b * theta + offset;
                points[(i, 0)] = r * theta.cos();
                points[(i, 1)] = r * theta.sin();
                lat[(i, 0)] = theta;
                lat[(i, 1)] = offset;
            }
            latent = Some(lat);
        }
        Family::SwissRoll => {
            let mut lat = Matrix::zeros(n, 2);
            for i in 0..n {
                let t = rng.random_range(1.5 * PI..4.5 * PI);
                let h = rng.random_range(0.0..SWISS_HEIGHT);
                points[(i, 0)] = t * t.cos() + noise * gauss(&mut rng);
                points[(i, 1)] = h + noise * gauss(&mut rng);
                points[(i, 2)] = t * t.sin() + noise * gauss(&mut rng);
                lat[(i, 0)] = t;
                lat[(i, 1)] = h;
            }
            latent = Some(lat);
        }
        Family::GaussianClusters => {
            let c = spec.cluster_centres()?;
            let k = c.rows();
            let mut lab = Vec::with_capacity(n);
            for i in 0..n {
                // balanced: cluster sizes differ by at most one
                let l = i * k / n;
                for j in 0..p {
                    points[(i, j)] = c[(l, j)] + noise * gauss(&mut rng);
                }
                lab.push(l);
            }
            labels = Some(lab);
            centres = Some(c);
        }
        Family::UniformHypercube => {
            for v in points.as_mut_slice() {
                *v = rng.random::<f64>();
            }
        }
        Family::SphereSurface => {
            let mut lat = Matrix::zeros(n, 2);
            for i in 0..n {
                let v: [f64; 3] = [gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                    .sqrt()
                    .max(f64::MIN_POSITIVE);
                let radius = if noise > 0.0 {
                    1.0 + noise * gauss(&mut rng)
                } else {
                    1.0
                };
                for j in 0..3 {
                    points[(i, j)] = radius * v[j] / norm;
                }
                lat[(i, 0)] = (v[2] / norm).clamp(-1.0, 1.0).acos();
                lat[(i, 1)] = v[1].atan2(v[0]);
            }
            latent = Some(lat);
        }
        Family::Grid => {
            let side = (n as f64).sqrt().ceil() as usize;
            let mut lat = Matrix::zeros(n, 2);
            for i in 0..n {
                let (r, c) = ((i / side) as f64, (i % side) as f64);
                points[(i, 0)] = c + noise * gauss(&mut rng);
                points[(i, 1)] = r + noise * gauss(&mut rng);
                lat[(i, 0)] = r;
                lat[(i, 1)] = c;
            }
            latent = Some(lat);
        }
        Family::LinkedCircles | Family::UnlinkedCircles => {
            let linked = spec.family == Family::LinkedCircles;
            let mut lat = Matrix::zeros(n, 1);
            let mut lab = Vec::with_capacity(n);
            for i in 0..n {
                let l = i * 2 / n;
                let t = rng.random_range(0.0..2.0 * PI);
                let (x, y, z) = if l == 0 {
                    (t.cos(), t.sin(), 0.0)
                } else if linked {
                    // passes through the first circle's disc
                    (1.0 + t.cos(), 0.0, t.sin())
                } else {
                    (3.0 + t.cos(), 0.0, t.sin())
                };
                points[(i, 0)] = x + noise * gauss(&mut rng);
                points[(i, 1)] = y + noise * gauss(&mut rng);
                points[(i, 2)] = z + noise * gauss(&mut rng);
                lat[(i, 0)] = t;
                lab.push(l);
            }
            latent = Some(lat);
            labels = Some(lab);
        }
        Family::TrefoilKnot => {
            let mut lat = Matrix::zeros(n, 1);
            for i in 0..n {
                let t = rng.random_range(0.0..2.0 * PI);
                let c = trefoil(t);
                for j in 0..3 {
                    points[(i, j)] = c[j] + noise * gauss(&mut rng);
                }
                lat[(i, 0)] = t;
            }
            latent = Some(lat);
        }
        Family::TwoLinearClusters => {
            let gap = spec.separation.unwrap_or(LINE_SEPARATION);
            let mut lat = Matrix::zeros(n, 1);
            let mut lab = Vec::with_capacity(n);
            for i in 0..n {
                let l = i * 2 / n;
                let s = rng.random_range(0.0..LINE_LENGTH);
                points[(i, 0)] = s + noise * gauss(&mut rng);
                points[(i, 1)] = gap * l as f64 + noise * gauss(&mut rng);
                lat[(i, 0)] = s;
                lab.push(l);
            }
            latent = Some(lat);
            labels = Some(lab);
        }
        Family::CircularClusters => {
            let k = spec.clusters();
            let radius = spec.separation.unwrap_or(RING_RADIUS);
            let mut c = Matrix::zeros(k, 2);
            for l in 0..k {
                let a = 2.0 * PI * l as f64 / k as f64;
                c[(l, 0)] = radius * a.cos();
                c[(l, 1)] = radius * a.sin();
            }
            let mut lab = Vec::with_capacity(n);
            for i in 0..n {
                let l = i * k / n;
                points[(i, 0)] = c[(l, 0)] + noise * gauss(&mut rng);
                points[(i, 1)] = c[(l, 1)] + noise * gauss(&mut rng);
                lab.push(l);
            }
            labels = Some(lab);
            centres = Some(c);
        }
    }
    Ok(Dataset {
        spec: spec.clone(),
        points,
        latent,
        labels,
        centres,
    })
}

/// The trefoil curve `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`.
pub fn trefoil(t: f64) -> [f64; 3] {
    [
        t.sin() + 2.0 * (2.0 * t).sin(),
        t.cos() - 2.0 * (2.0 * t).cos(),
        -(3.0 * t).sin(),
    ]
}
