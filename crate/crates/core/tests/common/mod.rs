//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lsdr_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut *rng))
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Random orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
    let g = gaussian_matrix(rng, p, p);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let mut v = g.col(j);
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
    }
    let mut m = Matrix::zeros(p, p);
    for (j, v) in q.iter().enumerate() {
        m.set_col(j, v);
    }
    m
}

pub fn naive_dist(x: &Matrix, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for c in 0..x.cols() {
        let d = x[(i, c)] - x[(j, c)];
        s += d * d;
    }
    s.sqrt()
}

/// Average ranks, ties sharing the mean rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// Largest gap between consecutive sorted values over the median gap.
pub fn max_to_median_gap(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let mut gaps: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let max = gaps.iter().copied().fold(0.0, f64::max);
    gaps.sort_by(|a, b| a.total_cmp(b));
    max / gaps[gaps.len() / 2]
}

/// Indices of the strict convex-hull vertices of 2D points, sorted.
pub fn hull_vertices(x: &Matrix) -> Vec<usize> {
    let mut hull = hull_cycle(x);
    hull.sort_unstable();
    hull
}

/// Strict convex-hull vertices in counter-clockwise order (monotone chain).
pub fn hull_cycle(x: &Matrix) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    idx.sort_by(|&a, &b| {
        x[(a, 0)]
            .total_cmp(&x[(b, 0)])
            .then(x[(a, 1)].total_cmp(&x[(b, 1)]))
    });
    let cross = |o: usize, a: usize, b: usize| {
        (x[(a, 0)] - x[(o, 0)]) * (x[(b, 1)] - x[(o, 1)])
            - (x[(a, 1)] - x[(o, 1)]) * (x[(b, 0)] - x[(o, 0)])
    };
    let mut hull: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// All-pairs shortest paths by Floyd-Warshall on an adjacency list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Brute-force TSI, trustworthiness and continuity with explicit
/// neighbour sets and ranks.
pub fn brute_knn(x: &Matrix, y: &Matrix, k: usize) -> (f64, f64, f64) {
    let n = x.rows();
    let rank_table = |m: &Matrix| -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let mut others: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (naive_dist(m, i, j), j))
                    .collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut r = vec![0usize; n];
                for (pos, &(_, j)) in others.iter().enumerate() {
                    r[j] = pos + 1;
                }
                r
            })
            .collect()
    };
    let (rx, ry) = (rank_table(x), rank_table(y));
    let mut shared = 0usize;
    let mut t_pen = 0usize;
    let mut c_pen = 0usize;
    for i in 0..n {
        let a: Vec<usize> = (0..n).filter(|&j| j != i && rx[i][j] <= k).collect();
        let b: Vec<usize> = (0..n).filter(|&j| j != i && ry[i][j] <= k).collect();
        shared += a.iter().filter(|j| b.contains(j)).count();
        for &j in b.iter().filter(|j| !a.contains(j)) {
            t_pen += rx[i][j] - k;
        }
        for &j in a.iter().filter(|j| !b.contains(j)) {
            c_pen += ry[i][j] - k;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let norm = nf * kf * (2.0 * nf - 3.0 * kf - 1.0);
    let score = |pen: usize| {
        if pen == 0 {
            1.0
        } else {
            1.0 - 2.0 * pen as f64 / norm
        }
    };
    (
        1.0 - (nf * kf - shared as f64) / (nf * kf),
        score(t_pen),
        score(c_pen),
    )
}
