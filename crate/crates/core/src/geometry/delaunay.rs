//! Incremental (Bowyer-Watson) Delaunay tessellation in up to six dimensions.
//!
//! The hull is closed with "ghost" cells: every convex-hull facet is paired
//! with a virtual vertex at infinity, so a point outside the current hull
//! conflicts with exactly the hull facets it can see. This avoids the
//! enclosing super-simplex and the missing-hull-cell artifacts that come
//! with it.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{det_in_place, svd};
use crate::numerics::matrix::{sq_dist, Matrix};
use crate::rng::{stream, Stream};

/// Highest dimension accepted by default.
pub const DEFAULT_MAX_DIM: usize = 6;
/// Jitter magnitude relative to the bounding-box diagonal.
pub const JITTER_SCALE: f64 = 1e-9;

const MAX_VERTS: usize = 7;
const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Undirected edge `a < b` with its Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

impl Edge {
    pub fn key(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

#[derive(Debug, Clone)]
pub struct TessellationOptions {
    pub max_dim: usize,
    pub jitter_seed: u64,
}

impl Default for TessellationOptions {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            jitter_seed: 0,
        }
    }
}

/// Delaunay tessellation of a point cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tessellation {
    pub n_points: usize,
    pub dim: usize,
    /// Full-dimensional cells, each a sorted list of `dim + 1` point indices.
    pub simplices: Vec<Vec<usize>>,
    /// Sorted by `(a, b)`.
    pub edges: Vec<Edge>,
}

impl Tessellation {
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by(|e| e.key().cmp(&key)).is_ok()
    }
}

pub fn delaunay_tessellation(points: &Matrix, opts: &TessellationOptions) -> Result<Tessellation> {
    let (n, dim) = points.shape();
    if dim > opts.max_dim || dim + 1 > MAX_VERTS {
        return Err(Error::DimensionTooHigh {
            dim,
            cap: opts.max_dim.min(MAX_VERTS - 1),
        });
    }
    if n < dim + 1 {
        return Err(Error::TooFewPoints {
            n,
            required: dim + 1,
        });
    }
    check_affine_rank(points)?;

    let normalized = normalize_and_jitter(points, opts.jitter_seed);
    let mut builder = Builder::new(dim, normalized, n);
    builder.run()?;

    let mut simplices: Vec<Vec<usize>> = builder
        .finite_cells()
        .filter(|s| !is_flat(points, s))
        .collect();
    simplices.sort();
    simplices.dedup();
    if simplices.is_empty() {
        return Err(Error::Degenerate(
            "no full-dimensional cells survive; points are not in general position".into(),
        ));
    }

    let mut keys: Vec<(usize, usize)> = Vec::new();
    for s in &simplices {
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                keys.push((s[i], s[j]));
            }
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let edges = keys
        .into_iter()
        .map(|(a, b)| Edge {
            a,
            b,
            length: sq_dist(points.row(a), points.row(b)).sqrt(),
        })
        .collect();

    Ok(Tessellation {
        n_points: n,
        dim,
        simplices,
        edges,
    })
}

fn check_affine_rank(points: &Matrix) -> Result<()> {
    let centered = points.centered();
    let gram = centered.t_matmul(&centered)?;
    let sv = svd(&gram)?.singular_values;
    let max = sv[0];
    let min = *sv.last().unwrap();
    // singular values of the Gram matrix are squared data singular values
    if max == 0.0 || min <= 1e-20 * max {
        return Err(Error::Degenerate(format!(
            "points span fewer than {} affine dimensions",
            points.cols()
        )));
    }
    Ok(())
}

// A cell whose volume is negligible next to its longest edge exists only
// because of the jitter (collinear or coplanar input points).
fn is_flat(points: &Matrix, s: &[usize]) -> bool {
    let dim = points.cols();
    let base = points.row(s[0]);
    let mut buf = Vec::with_capacity(dim * dim);
    let mut longest: f64 = 0.0;
    for &v in &s[1..] {
        let r = points.row(v);
        for c in 0..dim {
            buf.push(r[c] - base[c]);
        }
    }
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            longest = longest.max(sq_dist(points.row(s[i]), points.row(s[j])).sqrt());
        }
    }
    let vol = det_in_place(&mut buf, dim).abs();
    vol <= 1e-12 * longest.powi(dim as i32)
}

fn normalize_and_jitter(points: &Matrix, seed: u64) -> Vec<f64> {
    let (n, dim) = points.shape();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in points.row_iter() {
        for c in 0..dim {
            lo[c] = lo[c].min(r[c]);
            hi[c] = hi[c].max(r[c]);
        }
    }
    let diag = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l) * (h - l))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut rng = stream(seed, Stream::Jitter);
    let mut out = Vec::with_capacity(n * dim);
    for r in points.row_iter() {
        for c in 0..dim {
            let center = 0.5 * (lo[c] + hi[c]);
            let jitter: f64 = rng.random_range(-1.0..1.0) * JITTER_SCALE;
            out.push((r[c] - center) / diag + jitter);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Cell {
    verts: [u32; MAX_VERTS],
    alive: bool,
    // finite: (-1)^dim * sign(orientation); ghost: -sign(orient(facet, witness))
    sign: f64,
}

impl Cell {
    fn is_ghost(&self, dim: usize) -> bool {
        self.verts[dim] == GHOST
    }
}

type FacetKey = [u32; MAX_VERTS - 1];

struct Builder {
    dim: usize,
    pts: Vec<f64>,
    n: usize,
    cells: Vec<Cell>,
    facets: HashMap<FacetKey, [u32; 2]>,
    vertex_cell: Vec<u32>,
    inserted: Vec<usize>,
}

impl Builder {
    fn new(dim: usize, pts: Vec<f64>, n: usize) -> Self {
        Self {
            dim,
            pts,
            n,
            cells: Vec::new(),
            facets: HashMap::new(),
            vertex_cell: vec![NONE; n],
            inserted: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn pt(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    fn run(&mut self) -> Result<()> {
        let initial = self.initial_simplex()?;
        self.seed_triangulation(&initial)?;
        let mut is_initial = vec![false; self.n];
        for &i in &initial {
            is_initial[i] = true;
        }
        for q in 0..self.n {
            if !is_initial[q] {
                self.insert(q as u32)?;
            }
        }
        Ok(())
    }

    fn finite_cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let dim = self.dim;
        self.cells
            .iter()
            .filter(move |c| c.alive && !c.is_ghost(dim))
            .map(move |c| c.verts[..=dim].iter().map(|&v| v as usize).collect())
    }

    // Greedy choice of dim+1 affinely independent points: each new point is
    // the one farthest from the affine hull of those already chosen.
    fn initial_simplex(&self) -> Result<Vec<usize>> {
        let dim = self.dim;
        let mut chosen = vec![0usize];
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let origin = self.pt(0).to_vec();
        for _ in 0..dim {
            let mut best = (0.0, usize::MAX);
            for i in 0..self.n {
                if chosen.contains(&i) {
                    continue;
                }
                let mut v: Vec<f64> = self
                    .pt(i as u32)
                    .iter()
                    .zip(&origin)
                    .map(|(a, b)| a - b)
                    .collect();
                for b in &basis {
                    let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > best.0 {
                    best = (norm, i);
                }
            }
            if best.1 == usize::MAX || best.0 < 1e-13 {
                return Err(Error::Degenerate(
                    "could not find an initial full-dimensional simplex".into(),
                ));
            }
            let mut v: Vec<f64> = self
                .pt(best.1 as u32)
                .iter()
                .zip(&origin)
                .map(|(a, b)| a - b)
                .collect();
            for b in &basis {
                let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            chosen.push(best.1);
        }
        Ok(chosen)
    }

    fn seed_triangulation(&mut self, initial: &[usize]) -> Result<()> {
        let verts: Vec<u32> = initial.iter().map(|&v| v as u32).collect();
        let mut new_cells = vec![self.add_cell(&verts)?];
        for skip in 0..verts.len() {
            let mut g: Vec<u32> = verts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            g.push(GHOST);
            new_cells.push(self.add_cell(&g)?);
        }
        self.finish_ghosts(&new_cells)?;
        self.inserted.extend_from_slice(initial);
        Ok(())
    }

    fn insert(&mut self, q: u32) -> Result<()> {
        let seed = self.find_conflict(q)?;
        let dim = self.dim;

        let mut cavity: Vec<u32> = vec![seed];
        let mut state: HashMap<u32, bool> = HashMap::new(); // cell -> in cavity
        state.insert(seed, true);
        let mut boundary: Vec<FacetKey> = Vec::new();
        let mut head = 0;
        while head < cavity.len() {
            let c = cavity[head];
            head += 1;
            let verts = self.cells[c as usize].verts;
            for skip in 0..=dim {
                let key = facet_key(&verts[..=dim], skip, dim);
                let other = self.neighbor(&key, c)?;
                let inside = match state.get(&other) {
                    Some(&s) => s,
                    None => {
                        let s = self.conflicts(other, q);
                        state.insert(other, s);
                        if s {
                            cavity.push(other);
                        }
                        s
                    }
                };
                if !inside {
                    boundary.push(key);
                }
            }
        }

        for &c in &cavity {
            self.kill(c);
        }
        let mut created = Vec::with_capacity(boundary.len());
        for key in boundary {
            let mut verts: Vec<u32> = key[..dim].to_vec();
            verts.push(q);
            created.push(self.add_cell(&verts)?);
        }
        self.finish_ghosts(&created)?;
        self.inserted.push(q as usize);
        Ok(())
    }

    fn neighbor(&self, key: &FacetKey, c: u32) -> Result<u32> {
        let pair = self
            .facets
            .get(key)
            .ok_or_else(|| Error::Numerical("tessellation lost a facet".into()))?;
        let other = if pair[0] == c { pair[1] } else { pair[0] };
        if other == NONE {
            return Err(Error::Numerical("open facet in tessellation".into()));
        }
        Ok(other)
    }

    fn find_conflict(&self, q: u32) -> Result<u32> {
        let qp = self.pt(q);
        let nearest = self
            .inserted
            .iter()
            .copied()
            .min_by(|&a, &b| {
                sq_dist(self.pt(a as u32), qp)
                    .total_cmp(&sq_dist(self.pt(b as u32), qp))
                    .then(a.cmp(&b))
            })
            .expect("initial simplex inserted");
        let v = nearest as u32;
        let start = self.vertex_cell[nearest];
        if start != NONE && self.cells[start as usize].alive {
            // walk the star of the nearest vertex
            let dim = self.dim;
            let mut seen = vec![start];
            let mut head = 0;
            while head < seen.len() {
                let c = seen[head];
                head += 1;
                if self.conflicts(c, q) {
                    return Ok(c);
                }
                let verts = self.cells[c as usize].verts;
                for skip in 0..=dim {
                    if verts[skip] == v {
                        continue;
                    }
                    let key = facet_key(&verts[..=dim], skip, dim);
                    if let Ok(o) = self.neighbor(&key, c) {
                        if !seen.contains(&o) {
                            seen.push(o);
                        }
                    }
                }
            }
        }
        (0..self.cells.len() as u32)
            .find(|&c| self.cells[c as usize].alive && self.conflicts(c, q))
            .ok_or_else(|| {
                Error::Degenerate(format!(
                    "point {q} conflicts with no cell; input too degenerate"
                ))
            })
    }

    fn conflicts(&self, c: u32, q: u32) -> bool {
        let cell = &self.cells[c as usize];
        let dim = self.dim;
        if cell.is_ghost(dim) {
            self.orient_facet(&cell.verts[..dim], self.pt(q)) * cell.sign > 0.0
        } else {
            self.insphere(&cell.verts[..=dim], self.pt(q)) * cell.sign > 0.0
        }
    }

    fn add_cell(&mut self, verts: &[u32]) -> Result<u32> {
        let dim = self.dim;
        let mut sorted = [NONE; MAX_VERTS];
        sorted[..=dim].copy_from_slice(verts);
        sorted[..=dim].sort_unstable();
        let ghost = sorted[dim] == GHOST;
        let sign = if ghost {
            0.0
        } else {
            let o = self.orientation(&sorted[..=dim]);
            if o == 0.0 {
                return Err(Error::Degenerate("zero-volume cell created".into()));
            }
            let parity = if dim.is_multiple_of(2) { 1.0 } else { -1.0 };
            parity * o.signum()
        };
        let id = self.cells.len() as u32;
        self.cells.push(Cell {
            verts: sorted,
            alive: true,
            sign,
        });
        for skip in 0..=dim {
            let key = facet_key(&sorted[..=dim], skip, dim);
            let slot = self.facets.entry(key).or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = id;
            } else if slot[1] == NONE {
                slot[1] = id;
            } else {
                return Err(Error::Numerical(
                    "facet shared by more than two cells".into(),
                ));
            }
        }
        for &v in &sorted[..=dim] {
            if v != GHOST {
                self.vertex_cell[v as usize] = id;
            }
        }
        Ok(id)
    }

    fn finish_ghosts(&mut self, created: &[u32]) -> Result<()> {
        let dim = self.dim;
        for &c in created {
            if !self.cells[c as usize].is_ghost(dim) {
                continue;
            }
            let verts = self.cells[c as usize].verts;
            let key = facet_key(&verts[..=dim], dim, dim);
            let finite = self.neighbor(&key, c)?;
            let fverts = self.cells[finite as usize].verts;
            let witness = fverts[..=dim]
                .iter()
                .copied()
                .find(|v| !verts[..dim].contains(v))
                .ok_or_else(|| Error::Numerical("hull facet without witness".into()))?;
            let o = self.orient_facet(&verts[..dim], self.pt(witness));
            if o == 0.0 {
                return Err(Error::Degenerate("flat hull cell".into()));
            }
            self.cells[c as usize].sign = -o.signum();
        }
        Ok(())
    }

    fn kill(&mut self, c: u32) {
        let dim = self.dim;
        let verts = self.cells[c as usize].verts;
        self.cells[c as usize].alive = false;
        for skip in 0..=dim {
            let key = facet_key(&verts[..=dim], skip, dim);
            if let Some(slot) = self.facets.get_mut(&key) {
                if slot[0] == c {
                    slot[0] = slot[1];
                    slot[1] = NONE;
                } else if slot[1] == c {
                    slot[1] = NONE;
                }
                if slot[0] == NONE {
                    self.facets.remove(&key);
                }
            }
        }
    }

    // det of rows (v_i - v_0), i = 1..=dim
    fn orientation(&self, verts: &[u32]) -> f64 {
        let dim = self.dim;
        let mut buf = [0.0; MAX_VERTS * MAX_VERTS];
        let base = self.pt(verts[0]);
        for (r, &v) in verts[1..].iter().enumerate() {
            let p = self.pt(v);
            for c in 0..dim {
                buf[r * dim + c] = p[c] - base[c];
            }
        }
        det_in_place(&mut buf[..dim * dim], dim)
    }

    // det of rows (f_i - q) for the dim finite vertices of a facet
    fn orient_facet(&self, facet: &[u32], q: &[f64]) -> f64 {
        let dim = self.dim;
        let mut buf = [0.0; MAX_VERTS * MAX_VERTS];
        for (r, &v) in facet.iter().enumerate() {
            let p = self.pt(v);
            for c in 0..dim {
                buf[r * dim + c] = p[c] - q[c];
            }
        }
        det_in_place(&mut buf[..dim * dim], dim)
    }

    // det of rows (v_i - q, |v_i - q|^2); positive times (-1)^dim * orientation
    // means q is strictly inside the circumsphere
    fn insphere(&self, verts: &[u32], q: &[f64]) -> f64 {
        let dim = self.dim;
        let w = dim + 1;
        let mut buf = [0.0; MAX_VERTS * MAX_VERTS];
        for (r, &v) in verts.iter().enumerate() {
            let p = self.pt(v);
            let mut sq = 0.0;
            for c in 0..dim {
                let d = p[c] - q[c];
                buf[r * w + c] = d;
                sq += d * d;
            }
            buf[r * w + dim] = sq;
        }
        det_in_place(&mut buf[..w * w], w)
    }
}

fn facet_key(verts: &[u32], skip: usize, dim: usize) -> FacetKey {
    let mut key = [NONE; MAX_VERTS - 1];
    let mut k = 0;
    for (i, &v) in verts.iter().enumerate().take(dim + 1) {
        if i != skip {
            key[k] = v;
            k += 1;
        }
    }
    key
}
