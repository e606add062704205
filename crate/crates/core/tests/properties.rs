mod common;

use common::{grid_min_quadratic, quad, simplex_points, weighted_form};
use coposolve::p_copositivity::{b_epsilon_limit, MuSearchBudget};
use coposolve::solvability::constant_residual;
use coposolve::{
    b_epsilon_limit_form, check_psd, classify_copositivity, classify_solvability, constructive_mu_n2, find_mu, p_form,
    quadratic_form, sufficient_condition, verify_mu, ConeVector, CopositivityKind, Exponent, ProblemParams, PsdClass,
    Reason, SolvabilityBudget, SolvabilityKind, SymMatrix, Tolerance,
};
use proptest::prelude::*;

fn sym(n: usize, vals: &[f64]) -> SymMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            rows[i][j] = vals[i * n + j];
            rows[j][i] = vals[i * n + j];
        }
    }
    SymMatrix::from_rows(&rows).unwrap()
}

fn with_abs_diag(b: &SymMatrix) -> SymMatrix {
    let mut rows = b.rows();
    for (i, r) in rows.iter_mut().enumerate() {
        r[i] = r[i].abs();
    }
    SymMatrix::from_rows(&rows).unwrap()
}

prop_compose! {
    fn matrix(nmin: usize, nmax: usize)(n in nmin..=nmax)(vals in prop::collection::vec(-2.0..2.0f64, n * n), n in Just(n)) -> SymMatrix {
        sym(n, &vals)
    }
}

prop_compose! {
    fn matrix_and_point(nmin: usize, nmax: usize)(b in matrix(nmin, nmax))
        (c in prop::collection::vec(0.0..3.0f64, b.n()), b in Just(b)) -> (SymMatrix, Vec<f64>) {
        (b, c)
    }
}

prop_compose! {
    fn matrix_point_weights(nmin: usize, nmax: usize)(b in matrix(nmin, nmax))
        (c in prop::collection::vec(0.0..3.0f64, b.n()),
         mu in prop::collection::vec(0.05..2.0f64, b.n()),
         nu in prop::collection::vec(0.05..2.0f64, b.n()),
         b in Just(b)) -> (SymMatrix, Vec<f64>, Vec<f64>, Vec<f64>) {
        (b, c, mu, nu)
    }
}

fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(1.0)
}

fn abs_scale(b: &SymMatrix, c: &[f64], p: f64) -> f64 {
    let q = 0.5 * p;
    let n = b.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (b.get(i, j) * c[j].powf(q) * c[i].powf(q - 1.0)).abs();
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quadratic_form_is_two_homogeneous((b, c) in matrix_and_point(1, 8), t in 0.01..50.0f64) {
        let tc: Vec<f64> = c.iter().map(|x| t * x).collect();
        let a = quadratic_form(&b, &tc).unwrap().value;
        let e = t * t * quadratic_form(&b, &c).unwrap().value;
        let scale: f64 = t * t * c.iter().map(|x| x.abs()).sum::<f64>().powi(2) * 2.0;
        prop_assert!(close(a, e, 1e-12, scale), "{a} vs {e}");
    }

    #[test]
    fn weighted_form_homogeneity((b, c, mu, _nu) in matrix_point_weights(1, 6), t in 0.05..20.0f64, p in 2.2..7.0f64) {
        let cc = ConeVector::new(c.clone()).unwrap();
        let tc = ConeVector::new(c.iter().map(|x| t * x).collect()).unwrap();
        let mu = ConeVector::new(mu).unwrap();
        let a = p_form(&b, &tc, &mu, p).unwrap().value;
        let e = t.powf(p - 1.0) * p_form(&b, &cc, &mu, p).unwrap().value;
        let scale = t.powf(p - 1.0) * abs_scale(&b, &c, p) * 2.0;
        prop_assert!(close(a, e, 1e-12, scale), "{a} vs {e}");
    }

    #[test]
    fn weighted_form_linear_in_weight((b, c, mu, nu) in matrix_point_weights(1, 6), al in 0.0..3.0f64, be in 0.0..3.0f64, p in 2.2..7.0f64) {
        let cc = ConeVector::new(c.clone()).unwrap();
        let mix = ConeVector::new(mu.iter().zip(&nu).map(|(m, v)| al * m + be * v).collect()).unwrap();
        let a = p_form(&b, &cc, &mix, p).unwrap().value;
        let e = al * p_form(&b, &cc, &ConeVector::new(mu).unwrap(), p).unwrap().value
            + be * p_form(&b, &cc, &ConeVector::new(nu).unwrap(), p).unwrap().value;
        let scale = 2.0 * (al + be) * abs_scale(&b, &c, p);
        prop_assert!(close(a, e, 1e-12, scale), "{a} vs {e}");
    }

    #[test]
    fn weighted_form_matches_direct_sum((b, c, mu, _nu) in matrix_point_weights(1, 6), p in 2.2..7.0f64) {
        let a = p_form(&b, &ConeVector::new(c.clone()).unwrap(), &ConeVector::new(mu.clone()).unwrap(), p).unwrap().value;
        let e = weighted_form(&b, &c, &mu, p);
        prop_assert!(close(a, e, 1e-12, abs_scale(&b, &c, p) * 2.0));
    }

    #[test]
    fn diagonal_scaling_covariance((b, d, mu, _nu) in matrix_point_weights(1, 6)) {
        // scaled matrix built here, not through the library
        let n = b.n();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| mu[i] * mu[i] * b.get(i, j) * mu[j] * mu[j]).collect()).collect();
        let bt = SymMatrix::from_rows(&rows).unwrap();
        let c: Vec<f64> = d.iter().zip(&mu).map(|(x, m)| x / m).collect();
        let lhs = p_form(&bt, &ConeVector::new(c).unwrap(), &ConeVector::ones(n), 4.0).unwrap().value;
        let rhs = p_form(&b, &ConeVector::new(d.clone()).unwrap(), &ConeVector::new(mu.clone()).unwrap(), 4.0).unwrap().value;
        let scale: f64 = abs_scale(&b, &d, 4.0) * mu.iter().fold(1.0f64, |m, v| m.max(*v));
        prop_assert!(close(lhs, rhs, 1e-10, scale), "{lhs} vs {rhs}");
        let lib = b.weight_scaled(&mu).unwrap();
        for (x, y) in lib.entries().iter().zip(bt.entries()) {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs().max(1.0));
        }
    }

    #[test]
    fn quadratic_gradient_matches_finite_differences((b, c) in matrix_and_point(1, 8)) {
        let g = quadratic_form(&b, &c).unwrap().gradient.unwrap();
        let h = 1e-5;
        for k in 0..c.len() {
            let mut up = c.clone();
            let mut dn = c.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (quad(&b, &up) - quad(&b, &dn)) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0), "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn witness_is_a_simplex_minimizer(b in matrix(1, 5)) {
        let v = classify_copositivity(&b, Tolerance::DEFAULT).unwrap();
        let w = v.witness.as_slice();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((quadratic_form(&b, w).unwrap().value - v.min_value).abs() < 1e-10);
        // dense grid oracle: nothing on the grid is lower, and the grid comes close
        let res = if b.n() <= 3 { 96 } else { 24 };
        let gmin = grid_min_quadratic(&b, res);
        prop_assert!(v.min_value <= gmin + 1e-12, "{} > grid {gmin}", v.min_value);
        let lip = 2.0 * b.entries().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(v.min_value >= gmin - lip * b.n() as f64 / res as f64);
        let expected = if v.min_value > 1e-9 {
            CopositivityKind::StrictlyCopositive
        } else if v.min_value >= -1e-9 {
            CopositivityKind::CopositiveNotStrict
        } else {
            CopositivityKind::NotCopositive
        };
        prop_assert_eq!(v.kind, expected);
    }

    #[test]
    fn permutation_invariance(b in matrix(2, 6), seed in any::<u64>()) {
        let n = b.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = classify_copositivity(&b, Tolerance::DEFAULT).unwrap();
        let pb = classify_copositivity(&b.permuted(&perm).unwrap(), Tolerance::DEFAULT).unwrap();
        prop_assert_eq!(a.kind, pb.kind);
        prop_assert!((a.min_value - pb.min_value).abs() < 1e-10);
    }

    #[test]
    fn semidefinite_implies_copositive(g in prop::collection::vec(-1.5..1.5f64, 36), nn in prop::collection::vec(0.0..1.0f64, 36), n in 1usize..=6, rank in 1usize..=6) {
        // P = G Gᵀ with G of shape n × rank, plus an entrywise nonnegative part
        let rank = rank.min(n);
        let p: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (0..rank).map(|k| g[i * 6 + k] * g[j * 6 + k]).sum()).collect()).collect();
        let bp = SymMatrix::from_rows(&p).unwrap();
        let v = classify_copositivity(&bp, Tolerance::DEFAULT).unwrap();
        prop_assert_ne!(v.kind, CopositivityKind::NotCopositive);
        match check_psd(&bp, Tolerance::DEFAULT) {
            PsdClass::PositiveDefinite => prop_assert_eq!(v.kind, CopositivityKind::StrictlyCopositive),
            PsdClass::Indefinite => prop_assert!(false, "Gram matrix reported indefinite"),
            _ => {}
        }
        let sum: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p[i][j] + nn[i.min(j) * 6 + i.max(j)]).collect()).collect();
        let v = classify_copositivity(&SymMatrix::from_rows(&sum).unwrap(), Tolerance::DEFAULT).unwrap();
        prop_assert_ne!(v.kind, CopositivityKind::NotCopositive);
    }

    #[test]
    fn limit_form_matches_weighted_form(c in prop::collection::vec(0.0..5.0f64, 3)) {
        let cc = ConeVector::new(c).unwrap();
        let a = b_epsilon_limit_form(&cc).unwrap();
        let e = p_form(&b_epsilon_limit(), &cc, &ConeVector::ones(3), 4.0).unwrap().value;
        prop_assert!((a - e).abs() <= 1e-12 * e.abs().max(1.0), "{a} vs {e}");
    }

    #[test]
    fn sufficient_condition_is_sound(b in matrix(2, 4), p in prop::sample::select(vec![3.0, 4.0])) {
        // push the diagonal up so the condition usually holds
        let n = b.n();
        let mut rows = b.rows();
        for (i, row) in rows.iter_mut().enumerate() {
            let neg: f64 = (0..n).filter(|&j| j != i).map(|j| b.get(i, j).min(0.0)).sum();
            row[i] = row[i].abs() - neg;
        }
        let b = SymMatrix::from_rows(&rows).unwrap();
        if let Some(k0) = sufficient_condition(&b) {
            for c in simplex_points(n, 24) {
                let lhs = weighted_form(&b, &c, &vec![1.0; n], p);
                let rhs = k0 * c.iter().map(|x| x.powf(p - 1.0)).sum::<f64>();
                prop_assert!(lhs >= rhs - 1e-10, "{lhs} < {rhs} at {c:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn two_component_equivalence(a in 0.05..2.0f64, d in 0.05..2.0f64, t in -0.95..2.0f64, p in prop::sample::select(vec![3.0, 4.0, 6.0])) {
        // off-diagonal above -sqrt(a d) keeps the matrix strictly copositive
        let b12 = t * (a * d).sqrt();
        let b = SymMatrix::from_rows(&[vec![a, b12], vec![b12, d]]).unwrap();
        prop_assume!(classify_copositivity(&b, Tolerance::DEFAULT).unwrap().kind == CopositivityKind::StrictlyCopositive);
        let mu = constructive_mu_n2(&b, p).unwrap();
        let v = verify_mu(&b, &mu, p, 64).unwrap();
        let cert = v.certificate();
        prop_assert!(cert.is_some(), "{v:?}");
        prop_assert!(cert.unwrap().min_on_simplex > 0.0);
        prop_assert!(find_mu(&b, p, &MuSearchBudget::default()).unwrap().certificate().is_some());
    }

    #[test]
    fn certificates_imply_strict_copositivity(b in matrix(3, 3), p in prop::sample::select(vec![3.0, 4.0])) {
        let b = with_abs_diag(&b);
        let out = find_mu(&b, p, &MuSearchBudget { max_iterations: 20, ..MuSearchBudget::default() }).unwrap();
        if let Some(cert) = out.certificate() {
            let v = classify_copositivity(&b, Tolerance::DEFAULT).unwrap();
            prop_assert_eq!(v.kind, CopositivityKind::StrictlyCopositive);
            // grid oracle: the weighted form stays positive and kappa is a valid lower bound
            let mu = cert.mu.as_slice();
            for c in simplex_points(3, 48) {
                let f = weighted_form(&b, &c, mu, p);
                prop_assert!(f > 0.0, "{f} at {c:?}");
                let mc: f64 = mu.iter().zip(&c).map(|(m, x)| m * x).sum();
                prop_assert!(cert.kappa <= f / mc.powf(p - 1.0) + 1e-9);
            }
            prop_assert!(cert.kappa > 0.0);
            if p == 4.0 {
                let scaled = b.weight_scaled(mu).unwrap();
                prop_assert!(verify_mu(&scaled, &ConeVector::ones(3), 4.0, 64).unwrap().certificate().is_some());
            }
        }
    }

    #[test]
    fn small_systems_never_unknown(b in matrix(2, 2), dim in 1u32..=3) {
        let b = with_abs_diag(&b);
        let v = classify_solvability(&b, &ProblemParams::cubic(dim).unwrap(), &SolvabilityBudget::default()).unwrap();
        prop_assert_ne!(v.kind, SolvabilityKind::Unknown, "{:?}", v);
    }

    #[test]
    fn low_dimension_never_unknown(b in matrix(1, 6), dim in 1u32..=2, num in 5i64..=8) {
        // p = num / 2 ranges over (2, 4]
        let b = with_abs_diag(&b);
        let p = Exponent::rational(num, 2).unwrap();
        let v = classify_solvability(&b, &ProblemParams::new(dim, p).unwrap(), &SolvabilityBudget::default()).unwrap();
        prop_assert_ne!(v.kind, SolvabilityKind::Unknown, "{:?}", v);
    }

    #[test]
    fn verdict_kind_matches_reason(b in matrix(1, 4), dim in 1u32..=3) {
        let b = with_abs_diag(&b);
        let v = classify_solvability(&b, &ProblemParams::cubic(dim).unwrap(), &SolvabilityBudget::default()).unwrap();
        let expected = match v.reason {
            Reason::ConstantSolution | Reason::ZeroDiagonal | Reason::NotStrictlyCopositiveCubic | Reason::NotStrictlyCopositive => SolvabilityKind::ExistsNontrivial,
            Reason::OpenGap => SolvabilityKind::Unknown,
            _ => SolvabilityKind::NoNontrivial,
        };
        prop_assert_eq!(v.kind, expected);
        if let Some(coposolve::solvability::SolvabilityCertificate::ConstantSolution(cs)) = &v.certificate {
            prop_assert!(constant_residual(&b, &cs.u, 4.0).unwrap() < 1e-10);
            let direct: Vec<f64> = (0..b.n()).map(|i| {
                let u = cs.u.as_slice();
                (0..b.n()).map(|j| b.get(i, j) * u[j] * u[j]).sum::<f64>() * u[i]
            }).collect();
            prop_assert!(direct.iter().all(|x| x.abs() < 1e-10), "{direct:?}");
        }
    }

    #[test]
    fn raising_an_entry_keeps_nonexistence(b in matrix(2, 5), i in 0usize..5, j in 0usize..5, bump in 0.0..2.0f64) {
        let b = with_abs_diag(&b);
        let (i, j) = (i % b.n(), j % b.n());
        prop_assume!(i != j);
        let params = ProblemParams::cubic(2).unwrap();
        let before = classify_solvability(&b, &params, &SolvabilityBudget::default()).unwrap();
        prop_assume!(before.kind == SolvabilityKind::NoNontrivial);
        let mut rows = b.rows();
        rows[i][j] += bump;
        rows[j][i] += bump;
        let after = classify_solvability(&SymMatrix::from_rows(&rows).unwrap(), &params, &SolvabilityBudget::default()).unwrap();
        prop_assert_eq!(after.kind, SolvabilityKind::NoNontrivial);
    }
}

#[test]
fn constant_certificates_on_boundary_matrices() {
    // rank-one boundary matrices a aᵀ with a of mixed sign have positive kernel vectors
    for (a, d) in [(vec![1.0, -1.0], 4.0), (vec![2.0, -1.0, -1.0], 4.0), (vec![1.0, -2.0], 3.0)] {
        let n = a.len();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[i] * a[j]).collect()).collect();
        let b = SymMatrix::from_rows(&rows).unwrap();
        let cs = coposolve::constant_solution(&b, d).unwrap().expect("kernel vector");
        assert!(constant_residual(&b, &cs.u, d).unwrap() < 1e-10);
    }
}
