//! Dense factorizations: one-sided Jacobi SVD, tridiagonal QL eigensolver,
//! Cholesky solves and LU determinants.

use crate::error::{Error, Result};
use crate::numerics::matrix::{dot, sq_dist, Matrix};

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `m = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: Matrix,
    /// Non-negative, sorted descending.
    pub singular_values: Vec<f64>,
    /// `cols x k` with orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    /// Number of singular values above `1e-12 * max`.
    pub fn rank(&self) -> usize {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * max)
            .count()
    }

    pub fn reconstruct(&self) -> Matrix {
        let (m, k) = self.u.shape();
        let n = self.v.rows();
        let mut out = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.u[(i, l)] * self.singular_values[l] * self.v[(j, l)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

pub fn svd(m: &Matrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if m.rows() >= m.cols() {
        jacobi_svd_tall(m)
    } else {
        let t = jacobi_svd_tall(&m.transpose())?;
        Ok(SvdResult {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

/// Sum of singular values (nuclear norm).
pub fn nuclear_norm(m: &Matrix) -> Result<f64> {
    Ok(svd(m)?.singular_values.iter().sum())
}

// Hestenes one-sided Jacobi on the columns of a tall matrix. Columns are kept
// as rows of `work` so that rotations touch contiguous memory.
fn jacobi_svd_tall(a: &Matrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let mut work = a.transpose(); // n x m, row j = column j of a
    let mut vt = Matrix::identity(n); // row j = column j of V

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..n {
            for k in (j + 1)..n {
                let (alpha, beta, gamma) = {
                    let cj = work.row(j);
                    let ck = work.row(k);
                    (dot(cj, cj), dot(ck, ck), dot(cj, ck))
                };
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut work, j, k, c, s);
                rotate_rows(&mut vt, j, k, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| dot(work.row(j), work.row(j)).sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let smax = norms[order[0]];
    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        for i in 0..n {
            v[(i, dst)] = vt[(src, i)];
        }
        if sigma > 1e-300 && sigma > f64::EPSILON * smax * 1e-3 {
            for i in 0..m {
                u[(i, dst)] = work[(src, i)] / sigma;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal_columns(&mut u, &missing);
    Ok(SvdResult {
        u,
        singular_values: s,
        v,
    })
}

fn rotate_rows(m: &mut Matrix, j: usize, k: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (lo, hi) = data.split_at_mut(k * cols);
    let rj = &mut lo[j * cols..(j + 1) * cols];
    let rk = &mut hi[..cols];
    for (x, y) in rj.iter_mut().zip(rk.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

// Fills the listed columns with unit vectors orthogonal to all other columns
// (modified Gram-Schmidt against canonical basis candidates).
fn complete_orthonormal_columns(u: &mut Matrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let (m, k) = u.shape();
    let mut filled: Vec<bool> = vec![true; k];
    for &c in missing {
        filled[c] = false;
    }
    let mut candidate = 0usize;
    for &c in missing {
        loop {
            assert!(candidate < m, "cannot complete orthonormal basis");
            let mut v = vec![0.0; m];
            v[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for j in 0..k {
                    if !filled[j] {
                        continue;
                    }
                    let col = u.col(j);
                    let proj = dot(&v, &col);
                    for (vi, ci) in v.iter_mut().zip(&col) {
                        *vi -= proj * ci;
                    }
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-8 {
                let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
                u.set_col(c, &unit);
                filled[c] = true;
                break;
            }
        }
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are returned in descending order; column `i` of the returned
/// matrix is the unit eigenvector for eigenvalue `i`.
pub fn sym_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let asym = m.asymmetry();
    if asym > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.rows();
    // symmetrize, then Householder to tridiagonal form
    let mut v: Vec<f64> = (0..n * n)
        .map(|idx| 0.5 * (m.as_slice()[idx] + m[(idx % n, idx / n)]))
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n);
    // transpose so that each eigenvector is a contiguous row during QL
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[j * n + i] = v[i * n + j];
        }
    }
    tridiagonal_ql(&mut w, &mut d, &mut e, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, dst)] = w[src * n + i];
        }
    }
    Ok((values, vecs))
}

// Householder reduction of the row-major symmetric `v` to tridiagonal form,
// accumulating the transformation in `v` (EISPACK tred2).
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e[..i].iter_mut() {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let g: f64 = (0..=i).map(|k| v[at(k, i + 1)] * v[at(k, j)]).sum();
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e); rows of `w` are rotated along
// (EISPACK tql2 on the transposed basis).
fn tridiagonal_ql(w: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numerical("tridiagonal QL did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[(l + 2)..n].iter_mut() {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for k in 0..n {
                        let hk = row_next[k];
                        row_next[k] = s * row_i[k] + c * hk;
                        row_i[k] = c * row_i[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Shape("Cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "matrix not positive definite (pivot {i} = {sum:.3e})"
                    )));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let l = cholesky(a)?;
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::Shape("right-hand side has wrong row count".into()));
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Moore-Penrose pseudo-inverse; singular values below `rel_tol * max` are
/// treated as zero. Returns the inverse and the numerical rank.
pub fn pinv(m: &Matrix, rel_tol: f64) -> Result<(Matrix, usize)> {
    let d = svd(m)?;
    let smax = d.singular_values.first().copied().unwrap_or(0.0);
    let (rows, cols) = m.shape();
    let mut out = Matrix::zeros(cols, rows);
    let mut rank = 0;
    for (l, &s) in d.singular_values.iter().enumerate() {
        if s <= rel_tol * smax || s == 0.0 {
            continue;
        }
        rank += 1;
        for i in 0..cols {
            let vi = d.v[(i, l)] / s;
            for j in 0..rows {
                out[(i, j)] += vi * d.u[(j, l)];
            }
        }
    }
    Ok((out, rank))
}

/// Determinant by LU with partial pivoting; `a` is a row-major `n x n` buffer
/// and is overwritten.
pub fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in (col + 1)..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}

/// Symmetric matrix of squared Euclidean distances between rows.
pub fn pairwise_sq_dists(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(x.row(i), x.row(j));
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Euclidean distances between rows.
pub fn pairwise_dists(x: &Matrix) -> Matrix {
    let mut d = pairwise_sq_dists(x);
    d.as_mut_slice().iter_mut().for_each(|v| *v = v.sqrt());
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn orthonormality_error(m: &Matrix) -> f64 {
        let g = m.t_matmul(m).unwrap();
        g.sub(&Matrix::identity(g.rows())).unwrap().max_abs()
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let s = svd(&Matrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        let s = svd(&Matrix::from_diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        for (r, c, seed) in [(5, 3, 1), (3, 5, 2), (50, 50, 3), (20, 7, 4), (1, 4, 5)] {
            let m = random(r, c, seed);
            let s = svd(&m).unwrap();
            let resid = s.reconstruct().sub(&m).unwrap().frobenius_norm();
            assert!(resid < 1e-10 * m.frobenius_norm(), "{r}x{c}: {resid}");
            assert!(orthonormality_error(&s.u) < 1e-10);
            assert!(orthonormality_error(&s.v) < 1e-10);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rank_deficient_keeps_orthonormal_u() {
        // rank one 4x3
        let m = Matrix::from_rows(&[
            [1.0, 2.0, 3.0],
            [2.0, 4.0, 6.0],
            [0.0, 0.0, 0.0],
            [-1.0, -2.0, -3.0],
        ])
        .unwrap();
        let s = svd(&m).unwrap();
        assert_eq!(s.rank(), 1);
        assert!(orthonormality_error(&s.u) < 1e-10);
        assert!(s.reconstruct().sub(&m).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite() {
        // from_vec already guards, so build through a finite matrix and poke it
        let mut m = Matrix::identity(2);
        m.as_mut_slice()[1] = f64::NAN;
        assert!(matches!(svd(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn eigen_small_cases() {
        let (vals, _) = sym_eigen(&Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(vals, vec![2.0, 1.0]);

        let (vals, vecs) =
            sym_eigen(&Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[(0, 0)].abs() - h).abs() < 1e-15);
        assert!((vecs[(0, 0)] - vecs[(1, 0)]).abs() < 1e-15);
        assert!((vecs[(0, 1)] + vecs[(1, 1)]).abs() < 1e-15);
    }

    #[test]
    fn eigen_residuals_random_symmetric() {
        for (n, seed) in [(6, 11), (1, 12), (2, 13), (40, 14), (120, 15)] {
            let r = random(n, n, seed);
            let m = r.add(&r.transpose()).unwrap();
            let (vals, vecs) = sym_eigen(&m).unwrap();
            assert!(vals.windows(2).all(|w| w[0] >= w[1]));
            let norm = m.frobenius_norm();
            for (i, &lambda) in vals.iter().enumerate() {
                let v = Matrix::column(&vecs.col(i)).unwrap();
                let mv = m.matmul(&v).unwrap();
                let resid = mv.sub(&v.scale(lambda)).unwrap().frobenius_norm();
                assert!(resid < 1e-8 * norm, "n={n} pair {i}: {resid}");
            }
            assert!(orthonormality_error(&vecs) < 1e-10);
        }
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn spd_solve_and_pinv() {
        let r = random(5, 5, 3);
        let a = r.t_matmul(&r).unwrap().add(&Matrix::identity(5)).unwrap();
        let b = random(5, 2, 4);
        let x = solve_spd(&a, &b).unwrap();
        assert!(a.matmul(&x).unwrap().sub(&b).unwrap().max_abs() < 1e-12);

        let (inv, rank) = pinv(&a, 1e-12).unwrap();
        assert_eq!(rank, 5);
        assert!(
            inv.matmul(&a)
                .unwrap()
                .sub(&Matrix::identity(5))
                .unwrap()
                .max_abs()
                < 1e-10
        );
    }

    #[test]
    fn determinant_by_lu() {
        let mut a = vec![2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 1.0];
        let d = det_in_place(&mut a, 3);
        // 2(3-2) - 0 + 1(1-3) = 0
        assert!(d.abs() < 1e-15);
        let mut b = vec![0.0, 1.0, 1.0, 0.0];
        assert_eq!(det_in_place(&mut b, 2), -1.0);
    }

    #[test]
    fn pairwise_matches_naive() {
        let m = Matrix::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let d = pairwise_sq_dists(&m);
        assert_eq!(d[(0, 1)], 25.0);
        assert_eq!(d[(1, 0)], 25.0);
        let single = pairwise_sq_dists(&Matrix::from_rows(&[[1.0, 2.0]]).unwrap());
        assert_eq!(single.shape(), (1, 1));
        assert_eq!(single[(0, 0)], 0.0);

        let x = random(10, 3, 21);
        let d = pairwise_sq_dists(&x);
        for i in 0..10 {
            for j in 0..10 {
                let mut naive = 0.0;
                for c in 0..3 {
                    let diff = x[(i, c)] - x[(j, c)];
                    naive += diff * diff;
                }
                assert_eq!(d[(i, j)], naive);
            }
        }
    }
}
