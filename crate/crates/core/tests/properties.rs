//! Property tests for projections, sketches, the line search, gradients,
//! bound calculators and the loaders.

use nalgebra::DMatrix;
use proptest::prelude::*;

use sketchls::data::regression::{read_numeric_csv, write_matrix_csv};
use sketchls::data::Bundle;
use sketchls::problem::nuclear_norm;
use sketchls::projection::{project, project_l1, project_nuclear};
use sketchls::solvers::line_search::{composite_gap_exact, line_search, LineSearchParams};
use sketchls::solvers::{QuadraticObjective, SketchedSubproblem};
use sketchls::theory::{b_m, rho_bound, sigma_bound, BoundInputs};
use sketchls::{ConstraintSet, LsProblem, Point, SketchKind, SketchOperator};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn vector(max_d: usize) -> impl Strategy<Value = Point> {
    (1..=max_d).prop_flat_map(|d| matrix(d, 1))
}

fn l1(x: &Point) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn orthogonal(seed: &DMatrix<f64>) -> DMatrix<f64> {
    seed.clone().qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn l1_projection_is_feasible_and_idempotent(v in vector(12), r in 0.01..10.0f64) {
        let x = project_l1(&v, r).unwrap().point;
        prop_assert!(l1(&x) <= r * (1.0 + 1e-12));
        let again = project_l1(&x, r).unwrap().point;
        prop_assert!((&again - &x).amax() <= 1e-12 * (1.0 + r));
        if l1(&v) <= r {
            prop_assert_eq!(x, v);
        }
    }

    #[test]
    fn l1_projection_satisfies_variational_inequality(
        (v, z) in (1usize..10).prop_flat_map(|d| (matrix(d, 1), matrix(d, 1))),
        r in 0.1..5.0f64,
    ) {
        let x = project_l1(&v, r).unwrap().point;
        let feasible = project_l1(&z, r).unwrap().point;
        prop_assert!((&v - &x).dot(&(&feasible - &x)) <= 1e-9 * (1.0 + v.norm() * feasible.norm()));
    }

    #[test]
    fn l1_projection_is_nonexpansive(
        (u, v) in (1usize..10).prop_flat_map(|d| (matrix(d, 1), matrix(d, 1))),
        r in 0.1..5.0f64,
    ) {
        let pu = project_l1(&u, r).unwrap().point;
        let pv = project_l1(&v, r).unwrap().point;
        prop_assert!((&pu - &pv).norm() <= (&u - &v).norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn nuclear_projection_is_feasible(
        x in (1usize..8, 1usize..8).prop_flat_map(|(d, q)| matrix(d, q)),
        frac in 0.05..1.5f64,
    ) {
        let r = frac * nuclear_norm(&x).max(1e-3);
        let p = project_nuclear(&x, r).unwrap().point;
        prop_assert!(nuclear_norm(&p) <= r * (1.0 + 1e-9));
        let again = project_nuclear(&p, r).unwrap().point;
        prop_assert!((&again - &p).amax() <= 1e-9 * (1.0 + r));
    }

    #[test]
    fn transformed_projection_respects_the_gauge(
        (v, seed) in (2usize..8).prop_flat_map(|d| (matrix(d, 1), matrix(d, d))),
        r in 0.1..5.0f64,
    ) {
        let phi = orthogonal(&seed);
        let set = ConstraintSet::transformed_l1(phi.clone(), r).unwrap();
        let x = project(&set, &v).unwrap().point;
        prop_assert!(l1(&(&phi * &x)) <= r * (1.0 + 1e-9));
        prop_assert!(set.contains(&x, 1e-9));
    }

    #[test]
    fn count_sketch_structure(m in 1usize..20, extra in 0usize..40, seed in any::<u64>()) {
        let n = m + extra;
        let s = SketchOperator::new(SketchKind::Count, m, n, seed).unwrap();
        let dense = s.to_dense();
        let scale = (m as f64).sqrt();
        for col in dense.column_iter() {
            let nz: Vec<f64> = col.iter().copied().filter(|v| *v != 0.0).collect();
            prop_assert_eq!(nz.len(), 1);
            prop_assert_eq!(nz[0].abs(), scale);
        }
        let a = DMatrix::from_fn(n, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        prop_assert_eq!(s.apply(&a).unwrap(), &dense * &a);
    }

    #[test]
    fn sketches_are_reproducible(m in 1usize..10, n in 10usize..30, seed in any::<u64>(), gauss in any::<bool>()) {
        let kind = if gauss { SketchKind::Gaussian } else { SketchKind::Count };
        let a = SketchOperator::new(kind, m, n, seed).unwrap().to_dense();
        let b = SketchOperator::new(kind, m, n, seed).unwrap().to_dense();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn accepted_steps_pass_the_decrease_test(
        (sa, x, target) in (2usize..8, 1usize..8)
            .prop_flat_map(|(d, rows)| (matrix(rows, d), matrix(d, 1), matrix(d, 1))),
        eta_prev in 1e-4..10.0f64,
        r in 0.1..5.0f64,
        constrained in any::<bool>(),
    ) {
        let g = target * -1.0;
        let f = SketchedSubproblem::from_parts_hessian(sa.clone(), 1, Point::zeros(x.nrows(), 1), g).unwrap();
        let set = if constrained { ConstraintSet::l1(r).unwrap() } else { ConstraintSet::Unconstrained };
        let params = LineSearchParams::default();
        let grad = f.gradient(&x);
        let out = line_search(&f, &set, &x, &grad, eta_prev, params).unwrap();
        let delta = &out.x_next - &x;
        if delta.amax() > 0.0 {
            prop_assert!(out.evals >= 1);
            prop_assert!(composite_gap_exact(&f, &x, &out.x_next, out.eta) > 0.0);
            let top = sa.clone().singular_values().max();
            let l = top * top;
            prop_assert!(out.eta <= params.grow * eta_prev);
            if l > 0.0 {
                prop_assert!(out.eta >= (params.grow * eta_prev).min(1.0 / (params.shrink * l)) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn subproblem_gradients_match_finite_differences(
        (a, y, x, anchor) in (5usize..20, 1usize..6, 1usize..3).prop_flat_map(|(n, d, q)| {
            (matrix(n, d), matrix(n, q), matrix(d, q), matrix(d, q))
        }),
        seed in any::<u64>(),
    ) {
        let n = a.nrows();
        let p = LsProblem::new(a, y, ConstraintSet::Unconstrained).unwrap();
        let sketch = SketchOperator::new(SketchKind::Gaussian, 4.min(n), n, seed).unwrap();
        let g = p.gradient(&anchor).unwrap();
        let objectives = [
            SketchedSubproblem::classical(&p, &sketch).unwrap(),
            SketchedSubproblem::hessian(&p, &sketch, anchor, g).unwrap(),
        ];
        for f in &objectives {
            let exact = f.gradient(&x);
            let h = 1e-4;
            let mut fd = Point::zeros(x.nrows(), x.ncols());
            for k in 0..x.len() {
                let (mut up, mut down) = (x.clone(), x.clone());
                up[k] += h;
                down[k] -= h;
                fd[k] = (f.value(&up) - f.value(&down)) / (2.0 * h);
            }
            prop_assert!((&fd - &exact).norm() <= 1e-5 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn bounds_are_monotone_in_m(
        d in 1usize..200,
        width in 0.5..20.0f64,
        theta in 0.1..4.0f64,
        mu_frac in 0.0..1.0f64,
    ) {
        let input = |m: usize| BoundInputs { m, d, width, theta, l: 1.0, mu: mu_frac, k: 10, beta: 1.0 };
        let mut last: Option<(f64, f64)> = None;
        for j in 0..18 {
            let m = 1usize << j;
            if let (Ok(rho), Ok(sigma)) = (rho_bound(&input(m)), sigma_bound(&input(m))) {
                if let Some((r0, s0)) = last {
                    prop_assert!(rho <= r0 * (1.0 + 1e-12));
                    prop_assert!(sigma <= s0 * (1.0 + 1e-12));
                }
                prop_assert!(sigma >= 1.0);
                last = Some((rho, sigma));
            }
        }
    }

    #[test]
    fn b_m_is_bracketed(m in 1usize..100_000) {
        let b = b_m(m).unwrap();
        let mf = m as f64;
        prop_assert!(b <= mf.sqrt());
        prop_assert!(b >= mf / (mf + 1.0).sqrt());
        prop_assert!(b_m(m + 1).unwrap() > b);
    }

    #[test]
    fn csv_round_trip_is_exact(mat in (1usize..6, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), r * c)
            .prop_map(move |v| DMatrix::from_vec(r, c, v))
    })) {
        let header: Vec<String> = (0..mat.ncols()).map(|j| format!("c{j}")).collect();
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &mat, Some(&header)).unwrap();
        let table = read_numeric_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(table.header, Some(header));
        prop_assert_eq!(table.values, mat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bundle_round_trip(
        (a, y) in (3usize..12, 1usize..5).prop_flat_map(|(n, d)| (matrix(n, d), matrix(n, 1))),
        r in 0.1..10.0f64,
        sidecar in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let problem = LsProblem::new(a, y, ConstraintSet::l1(r).unwrap()).unwrap();
        let bundle = Bundle {
            problem,
            oracle: None,
            x_gt: None,
            seed: Some(seed),
            spec: serde_json::json!({"source": "property"}),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        bundle.save(&path, sidecar).unwrap();
        let back = Bundle::load(&path).unwrap();
        prop_assert_eq!(back.problem.a(), bundle.problem.a());
        prop_assert_eq!(back.problem.y(), bundle.problem.y());
        prop_assert_eq!(back.problem.constraint(), bundle.problem.constraint());
        prop_assert_eq!(back.seed, Some(seed));
        prop_assert_eq!(back.spec, bundle.spec);
    }
}

/// Entrywise Monte-Carlo check of `E[SᵀS/m] = I` at a family-wise level
/// that accounts for the `n²` entries tested at once.
#[test]
fn sketch_gram_is_unbiased_entrywise() {
    let (m, n, seeds) = (16, 48, 3000u64);
    for kind in [SketchKind::Gaussian, SketchKind::Count] {
        let mut sum = DMatrix::<f64>::zeros(n, n);
        let mut sum_sq = DMatrix::<f64>::zeros(n, n);
        for seed in 0..seeds {
            let s = SketchOperator::new(kind, m, n, seed).unwrap().to_dense();
            let g = s.tr_mul(&s) / m as f64;
            sum_sq += g.component_mul(&g);
            sum += g;
        }
        let k = seeds as f64;
        let mean = sum / k;
        let var = (sum_sq / k - mean.component_mul(&mean)) * (k / (k - 1.0));
        let identity = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                let se = (var[(i, j)].max(0.0) / k).sqrt();
                let dev = (mean[(i, j)] - identity[(i, j)]).abs();
                // 5.0σ keeps the family-wise false alarm rate near 1e-3 over n² entries
                assert!(dev <= 5.0 * se + 1e-12, "{kind} entry ({i},{j}): dev {dev:.3e}, se {se:.3e}");
            }
        }
    }
}
