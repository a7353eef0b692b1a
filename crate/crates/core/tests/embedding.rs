mod common;

use common::*;
use lsdr_core::embedding::{
    fit_out_of_sample, fit_reconstruction, median_heuristic, metric_mds, metric_mds_with,
    nadaraya_embed, nearest_neighbour_scale, recommended_bandwidth, stress, KernelSpec, MdsOptions,
};
use lsdr_core::graph::{all_pairs, GraphEdge};
use lsdr_core::indices::procrustes_fit;
use lsdr_core::numerics::pairwise_dists;
use lsdr_core::pipeline::{generate, lsdr, DatasetSpec, Family, LsdrConfig};
use lsdr_core::{ManifoldGraph, Matrix, SkeletonReport};
use proptest::prelude::*;

fn gauss_kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += (x - y) * (x - y);
    }
    (-s / (2.0 * sigma * sigma)).exp()
}

/// Solves `A x = b` column by column with partial pivoting.
fn dense_solve(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols = b[0].len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| a[i].iter().chain(&b[i]).copied().collect())
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for k in c..n + cols {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![vec![0.0; cols]; n];
    for r in (0..n).rev() {
        for k in 0..cols {
            let mut s = m[r][n + k];
            for c in (r + 1)..n {
                s -= m[r][c] * x[c][k];
            }
            x[r][k] = s / m[r][r];
        }
    }
    x
}

fn report(skeletal: Vec<usize>, d_b: Vec<f64>) -> SkeletonReport {
    SkeletonReport {
        boundary_points: vec![],
        boundary_distance: d_b,
        skeletal_points: skeletal,
        k_neighbours: 3,
        all_boundary: false,
    }
}

fn unit_path(n: usize) -> ManifoldGraph {
    let edges = (0..n - 1)
        .map(|i| GraphEdge {
            a: i,
            b: i + 1,
            length: 1.0,
            mcst: true,
        })
        .collect();
    ManifoldGraph::new(n, 1, 0.95, edges, vec![])
}

#[test]
fn mds_of_three_collinear_points() {
    let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
    let y = metric_mds(&pairwise_dists(&x), 1).unwrap();
    let mut v = y.col(0);
    if v[0] > v[2] {
        v.iter_mut().for_each(|t| *t = -*t);
    }
    assert!((v[1] - v[0] - 1.0).abs() < 1e-9);
    assert!((v[2] - v[1] - 1.0).abs() < 1e-9);
}

#[test]
fn mds_of_unit_square() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let y = metric_mds(&pairwise_dists(&x), 2).unwrap();
    for i in 0..4 {
        assert!((naive_dist(&y, i, (i + 1) % 4) - 1.0).abs() < 1e-6);
    }
    assert!((naive_dist(&y, 0, 2) - 2f64.sqrt()).abs() < 1e-6);
    assert!((naive_dist(&y, 1, 3) - 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn mds_rejects_bad_distances() {
    let asym = Matrix::from_rows(&[[0.0, 1.0], [2.0, 0.0]]).unwrap();
    assert!(metric_mds(&asym, 1).is_err());
    let neg = Matrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]).unwrap();
    assert!(metric_mds(&neg, 1).is_err());
}

#[test]
fn stress_examples() {
    let x = gaussian_matrix(&mut rng(1), 6, 2);
    let q = pairwise_dists(&x);
    assert!(stress(&q, &x).unwrap() < 1e-12);

    let zeros = Matrix::zeros(2, 2);
    let y = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
    assert!((stress(&zeros, &y).unwrap() - 1.0).abs() < 1e-15);

    let y = gaussian_matrix(&mut rng(2), 6, 2);
    let mut s = 0.0;
    for i in 0..6 {
        for j in (i + 1)..6 {
            let r = q[(i, j)] - naive_dist(&y, i, j);
            s += r * r;
        }
    }
    assert!((stress(&q, &y).unwrap() - s.sqrt()).abs() < 1e-12);
}

#[test]
fn nadaraya_examples() {
    let sk = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
    let coords = Matrix::from_rows(&[[3.5]]).unwrap();
    let all = gaussian_matrix(&mut rng(3), 10, 2);
    let y = nadaraya_embed(&coords, &sk, &all, &KernelSpec::gaussian(0.7).unwrap()).unwrap();
    assert!(y.as_slice().iter().all(|&v| v == 3.5));

    let sk = Matrix::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
    let coords = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
    let mid = Matrix::from_rows(&[[0.0, 2.0]]).unwrap();
    let y = nadaraya_embed(&coords, &sk, &mid, &KernelSpec::gaussian(0.5).unwrap()).unwrap();
    assert!(y[(0, 0)].abs() < 1e-15);
}

#[test]
fn nadaraya_falls_back_when_weights_vanish() {
    let sk = Matrix::from_rows(&[[0.0], [10.0]]).unwrap();
    let coords = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
    let far = Matrix::from_rows(&[[9.0]]).unwrap();
    let y = nadaraya_embed(&coords, &sk, &far, &KernelSpec::BregmanIndicator).unwrap();
    assert_eq!(y[(0, 0)], 2.0);
}

#[test]
fn spiral_embedding_follows_the_angle() {
    let data = generate(&DatasetSpec::new(Family::Spiral, 300, 2)).unwrap();
    let out = lsdr(&data.points, &LsdrConfig::new(1).with_seed(2)).unwrap();
    assert!(out.fallback.is_none());
    let theta = data.latent.unwrap().col(0);
    let rho = spearman(&out.embedding.coords.col(0), &theta);
    assert!(rho.abs() >= 0.95, "spearman {rho}");
}

#[test]
fn bandwidth_examples() {
    let g = unit_path(3);
    let geo = all_pairs(&g).unwrap();
    let r = report(vec![0, 2], vec![0.0; 3]);
    assert!((recommended_bandwidth(&r, &geo).unwrap() - 2.0).abs() < 1e-15);

    let g = unit_path(5);
    let geo = all_pairs(&g).unwrap();
    let r = report((0..5).collect(), vec![1.0; 5]);
    assert!((recommended_bandwidth(&r, &geo).unwrap() - 2f64.sqrt()).abs() < 1e-15);

    let r = report(vec![2], vec![0.0, 0.0, 1.5, 0.0, 0.0]);
    assert_eq!(recommended_bandwidth(&r, &geo).unwrap(), 1.5);
}

#[test]
fn spiral_bandwidth_matches_brute_force() {
    let data = generate(&DatasetSpec::new(Family::Spiral, 300, 3)).unwrap();
    let out = lsdr(&data.points, &LsdrConfig::new(1).with_seed(3)).unwrap();
    let sk = &out.skeleton.skeletal_points;
    let d_b = &out.skeleton.boundary_distance;
    let mut best = 0.0_f64;
    for &i in sk {
        let mut nearest = f64::INFINITY;
        for &j in sk {
            if j != i {
                nearest = nearest.min(out.geodesics.get(i, j).unwrap());
            }
        }
        best = best.max((d_b[i] * d_b[i] + nearest * nearest).sqrt());
    }
    assert_eq!(
        recommended_bandwidth(&out.skeleton, &out.geodesics).unwrap(),
        best
    );
    assert_eq!(out.bandwidth, Some(best));
}

#[test]
fn out_of_sample_interpolates_training_points() {
    let x = gaussian_matrix(&mut rng(4), 15, 3);
    let y = gaussian_matrix(&mut rng(5), 15, 2);
    let model = fit_out_of_sample(&x, &y, &KernelSpec::gaussian(1.0).unwrap()).unwrap();
    let fitted = model.eval_many(&x).unwrap();
    assert!(fitted.sub(&y).unwrap().max_abs() < 1e-5);
}

#[test]
fn out_of_sample_single_training_point() {
    let x = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
    let y = Matrix::from_rows(&[[2.0, -4.0]]).unwrap();
    let model = fit_out_of_sample(&x, &y, &KernelSpec::gaussian(1.0).unwrap()).unwrap();
    let q = [0.0, 0.5];
    let scale = gauss_kernel(&q, &[1.0, 1.0], 1.0);
    let out = model.eval(&q);
    assert!((out[0] - 2.0 * scale).abs() < 1e-7);
    assert!((out[1] + 4.0 * scale).abs() < 1e-7);
}

#[test]
fn out_of_sample_matches_dense_solve_at_midpoint() {
    let x = uniform_matrix(&mut rng(6), 10, 2);
    let y = gaussian_matrix(&mut rng(7), 10, 2);
    let sigma = 0.4;
    let model = fit_out_of_sample(&x, &y, &KernelSpec::gaussian(sigma).unwrap()).unwrap();

    let mut k: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            (0..10)
                .map(|j| gauss_kernel(x.row(i), x.row(j), sigma))
                .collect()
        })
        .collect();
    let ridge = 1e-8 * (0..10).map(|i| k[i][i]).sum::<f64>() / 10.0;
    for (i, row) in k.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let rhs: Vec<Vec<f64>> = (0..10).map(|i| y.row(i).to_vec()).collect();
    let alpha = dense_solve(&k, &rhs);

    let j = (1..10)
        .min_by(|&a, &b| naive_dist(&x, 0, a).total_cmp(&naive_dist(&x, 0, b)))
        .unwrap();
    let q: Vec<f64> = (0..2).map(|c| 0.5 * (x[(0, c)] + x[(j, c)])).collect();
    let mut expected = [0.0; 2];
    for i in 0..10 {
        let w = gauss_kernel(&q, x.row(i), sigma);
        for c in 0..2 {
            expected[c] += w * alpha[i][c];
        }
    }
    let got = model.eval(&q);
    for c in 0..2 {
        assert!((got[c] - expected[c]).abs() < 1e-6 * (1.0 + expected[c].abs()));
    }
}

#[test]
fn duplicate_training_points_are_dropped() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]).unwrap();
    let y = Matrix::from_rows(&[[0.0], [1.0], [0.0]]).unwrap();
    let model = fit_out_of_sample(&x, &y, &KernelSpec::gaussian(1.0).unwrap()).unwrap();
    assert_eq!(model.dropped, vec![2]);
    assert_eq!(model.train.rows(), 2);
}

#[test]
fn identity_reduction_reconstructs_exactly() {
    let x = gaussian_matrix(&mut rng(8), 20, 2);
    let r = fit_reconstruction(&x, &x, &KernelSpec::Linear, &KernelSpec::Linear).unwrap();
    let back = r.reconstruct_all(&x).unwrap();
    assert!(back.sub(&x).unwrap().max_abs() < 1e-8);
}

#[test]
fn constant_embedding_reconstructs_the_mean() {
    let x = gaussian_matrix(&mut rng(9), 20, 3);
    let y = Matrix::from_vec(20, 1, vec![0.25; 20]).unwrap();
    let r = fit_reconstruction(
        &x,
        &y,
        &KernelSpec::gaussian(1.0).unwrap(),
        &KernelSpec::gaussian(1.0).unwrap(),
    )
    .unwrap();
    assert!(r.beta.max_abs() < 1e-12);
    let means = x.col_means();
    for q in [[0.25], [7.0]] {
        let f = r.reconstruct(&q).unwrap();
        for (a, b) in f.iter().zip(&means) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn swiss_roll_reconstruction() {
    let data = generate(&DatasetSpec::new(Family::SwissRoll, 50, 4)).unwrap();
    let x = &data.points;
    let out = lsdr(x, &LsdrConfig::new(2).with_seed(4)).unwrap();
    let y = &out.embedding.coords;
    let (sx, sy) = (nearest_neighbour_scale(x), median_heuristic(y));
    let r = fit_reconstruction(
        x,
        y,
        &KernelSpec::gaussian(sx).unwrap(),
        &KernelSpec::gaussian(sy).unwrap(),
    )
    .unwrap();
    let n = 50.0;

    // c_jl by the direct double loop
    for j in 0..2 {
        for l in 0..3 {
            let (mut sxy, mut sxl, mut syj) = (0.0, 0.0, 0.0);
            for i in 0..50 {
                sxy += x[(i, l)] * y[(i, j)];
                sxl += x[(i, l)];
                syj += y[(i, j)];
            }
            let c = sxy / n - (sxl / n) * (syj / n);
            assert!((r.c[(j, l)] - c).abs() < 1e-9 * (1.0 + c.abs()));
        }
    }

    // f(y_i) recomputed from scratch
    let mut ky_means = [0.0; 50];
    for (i, m) in ky_means.iter_mut().enumerate() {
        *m = (0..50)
            .map(|j| gauss_kernel(y.row(j), y.row(i), sy))
            .sum::<f64>()
            / n;
    }
    for probe in [0, 17, 49] {
        let got = r.reconstruct(y.row(probe)).unwrap();
        for l in 0..3 {
            let mut f = x.col(l).iter().sum::<f64>() / n;
            for i in 0..50 {
                f += r.beta[(i, l)] * (gauss_kernel(y.row(probe), y.row(i), sy) - ky_means[i]);
            }
            assert!((got[l] - f).abs() < 1e-9 * (1.0 + f.abs()));
        }
    }

    // residuals have zero mean and no covariance with the embedding
    let rec = r.reconstruct_all(y).unwrap();
    let eps = x.sub(&rec).unwrap();
    for l in 0..3 {
        let e = eps.col(l);
        let mean = e.iter().sum::<f64>() / n;
        assert!(mean.abs() <= 1e-6, "residual mean {mean}");
        for j in 0..2 {
            let yj = y.col(j);
            let ym = yj.iter().sum::<f64>() / n;
            let cov: f64 = e
                .iter()
                .zip(&yj)
                .map(|(a, b)| (a - mean) * (b - ym))
                .sum::<f64>()
                / n;
            assert!(cov.abs() <= 1e-6, "covariance {cov}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mds_recovers_euclidean_configurations(n in 5usize..30, p in 2usize..4, seed in any::<u64>()) {
        let x = gaussian_matrix(&mut rng(seed), n, p);
        let y = metric_mds(&pairwise_dists(&x), p).unwrap();
        let fit = procrustes_fit(&x, &y).unwrap();
        prop_assert!(fit.residual < 1e-8 * n as f64);
    }

    #[test]
    fn mds_scales_with_the_input(n in 5usize..30, seed in any::<u64>(), c in 0.1f64..10.0) {
        let x = gaussian_matrix(&mut rng(seed), n, 2);
        let y = metric_mds(&pairwise_dists(&x), 2).unwrap();
        let yc = metric_mds(&pairwise_dists(&x.scale(c)), 2).unwrap();
        let fit = procrustes_fit(&yc, &y).unwrap();
        prop_assert!(fit.residual < 1e-6 * n as f64);
        prop_assert!((fit.lambda - c).abs() < 1e-6);
    }

    #[test]
    fn stress_never_increases(n in 6usize..40, seed in any::<u64>()) {
        // perturbed distances are not Euclidean, so the refinement has work to do
        let x = gaussian_matrix(&mut rng(seed), n, 3);
        let noise = uniform_matrix(&mut rng(seed ^ 5), n, n);
        let mut q = pairwise_dists(&x);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = q[(i, j)] * (0.7 + 0.6 * noise[(i, j)]);
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        let res = metric_mds_with(&q, 2, &MdsOptions::default()).unwrap();
        prop_assert!(res.stress_trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!((stress(&q, &res.coords).unwrap() - res.final_stress()).abs() < 1e-9 * (1.0 + res.final_stress()));
    }
}
