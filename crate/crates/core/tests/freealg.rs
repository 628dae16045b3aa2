use algebroid::exprjet::{eval_value, parse_expr};
use algebroid::fixtures;
use algebroid::freealg::*;
use algebroid::model::{load_spec, sample_points, AlgebroidSpec};
use nalgebra::DMatrix;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

fn build(spec: &AlgebroidSpec, d: usize, mode: FreeMode) -> FreeTruncation {
    free_extend(spec, d, mode, &FreeOptions::default()).unwrap()
}

fn pts(spec: &AlgebroidSpec, n: usize) -> Vec<Vec<f64>> {
    sample_points(&spec.chart, n, 7)
}

/// Number of anticommutative magma words by direct recursion on degrees.
fn magma_count(r: usize, d: usize) -> Vec<usize> {
    let mut m = vec![0usize; d + 1];
    m[1] = r;
    for k in 2..=d {
        let mut total = 0;
        for i in 1..k {
            let j = k - i;
            if i > j {
                total += m[i] * m[j];
            } else if i == j {
                total += m[i] * (m[i] - 1) / 2;
            }
        }
        m[k] = total;
    }
    m[1..].to_vec()
}

fn anchored(r: usize, anchor: &[[&str; 2]], connection: &[Vec<[&str; 2]>]) -> AlgebroidSpec {
    let quote = |v: &[&str; 2]| format!("[\"{}\", \"{}\"]", v[0], v[1]);
    let anchor: Vec<String> = anchor.iter().map(quote).collect();
    let conn: Vec<String> =
        connection.iter().map(|row| format!("[{}]", row.iter().map(quote).collect::<Vec<_>>().join(","))).collect();
    let doc = format!(
        r#"{{"chart": {{"coords": ["x", "y"], "domain": [[-1, 1], [-1, 1]]}},
            "rank": {r}, "mode": "anchored",
            "anchor": [{}], "connection": [{}]}}"#,
        anchor.join(","),
        conn.join(",")
    );
    load_spec(&doc).unwrap()
}

fn trivial(r: usize) -> AlgebroidSpec {
    anchored(r, &vec![["0", "0"]; r], &vec![vec![["0", "0"]; r]; r])
}

#[test]
fn basis_counts() {
    for (r, expected) in [(1, vec![1, 0, 0]), (2, vec![2, 1, 2]), (3, vec![3, 3, 8])] {
        let hall: Vec<usize> = hall_basis(r, 3).unwrap().iter().map(Vec::len).collect();
        assert_eq!(hall, expected);
        assert_eq!(hall, (1..=3).map(|d| witt(r, d)).collect::<Vec<_>>());
        assert_eq!(build(&trivial(r), 3, FreeMode::Quotient).counts(), expected);
        let magma: Vec<usize> = magma_basis(r, 3).unwrap().iter().map(Vec::len).collect();
        assert_eq!(magma, magma_count(r, 3));
        assert_eq!(build(&trivial(r), 3, FreeMode::Almost).counts(), magma);
    }
    // almost and quotient counts separate at degree 3 for three generators, at 4 for two
    assert_eq!(magma_count(3, 3)[2], 9);
    assert_eq!(build(&trivial(2), 4, FreeMode::Quotient).counts(), [2, 1, 2, 3]);
    assert_eq!(build(&trivial(2), 4, FreeMode::Almost).counts(), [2, 1, 2, 4]);
    assert_eq!(build(&trivial(3), 4, FreeMode::Quotient).counts(), [3, 3, 8, 18]);
    assert!(matches!(hall_basis(2, 5), Err(FreeError::Degree(_))));
    assert!(matches!(hall_basis(2, 0), Err(FreeError::Degree(_))));
}

fn random_matrix(n: usize, rng: &mut SplitMix64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
}

fn image(word: &HallWord, gens: &[DMatrix<f64>]) -> DMatrix<f64> {
    match word {
        HallWord::Gen(a) => gens[*a].clone(),
        HallWord::Pair(u, v) => {
            let (a, b) = (image(u, gens), image(v, gens));
            &a * &b - &b * &a
        }
    }
}

/// Generic matrices realise the free Lie algebra in low degree: the bracket
/// table must agree with matrix commutators, and Hall words must stay independent.
#[test]
fn quotient_brackets_match_matrix_commutators() {
    let mut rng = SplitMix64::seed_from_u64(3);
    for r in [2, 3] {
        let free = build(&trivial(r), 4, FreeMode::Quotient);
        let gens: Vec<DMatrix<f64>> = (0..r).map(|_| random_matrix(6, &mut rng)).collect();
        let images: Vec<DMatrix<f64>> = free.basis.iter().map(|w| image(w, &gens)).collect();
        for k in 1..=4 {
            let cols: Vec<usize> = (0..free.rank()).filter(|&w| free.degrees[w] == k).collect();
            let m = DMatrix::from_fn(36, cols.len(), |i, c| images[cols[c]][(i / 6, i % 6)]);
            assert_eq!(m.rank(1e-9), cols.len(), "r={r} degree {k}");
        }
        for u in 0..free.rank() {
            for v in 0..free.rank() {
                if !free.in_range(u, v) {
                    continue;
                }
                let direct = &images[u] * &images[v] - &images[v] * &images[u];
                let mut expanded = DMatrix::zeros(6, 6);
                for &(w, c) in &free.brackets[u][v] {
                    expanded += &images[w] * c;
                }
                assert!((direct - expanded).amax() < 1e-12, "[{}, {}]", free.basis[u], free.basis[v]);
            }
        }
        assert_eq!(jacobiator_defect(&free), 0.0);
    }
}

#[test]
fn almost_mode_keeps_jacobiators() {
    let free = build(&trivial(3), 3, FreeMode::Almost);
    assert!(jacobiator_defect(&free) > 0.5);
    for u in 0..free.rank() {
        for v in 0..free.rank() {
            if free.in_range(u, v) {
                for c in 0..free.rank() {
                    assert_eq!(free.bracket_coefficient(u, v, c), -free.bracket_coefficient(v, u, c));
                }
            }
        }
    }
}

#[test]
fn involutive_anchor_example() {
    let spec = fixtures::load(fixtures::FX_FREE_INVOLUTIVE);
    let free = build(&spec, 2, FreeMode::Quotient);
    assert_eq!(free.basis[2].to_string(), "[e2,e1]");
    // [x d_y, d_x] = -d_y
    let p = [0.3, -0.7];
    let rho: Vec<f64> = free.anchor_ext[2].iter().map(|e| eval_value(e, &p).unwrap()).collect();
    assert_eq!(rho, [0.0, -1.0]);
    assert!(free.conn_ext.iter().flatten().flatten().all(|e| e.is_zero()));

    let profile = anchor_rank_profile(&free, &pts(&spec, 20)).unwrap();
    assert!(profile.contains_input);
    let at_axis = anchor_rank_profile(&free, &[vec![0.0, 0.5]]).unwrap();
    assert_eq!(at_axis.samples[0].ranks, [1, 2]);

    let free3 = build(&spec, 3, FreeMode::Quotient);
    let profile = anchor_rank_profile(&free3, &pts(&spec, 20)).unwrap();
    assert!(profile.closed_at_top);
    for mode in [FreeMode::Almost, FreeMode::Quotient] {
        let free3 = build(&spec, 3, mode);
        assert!(cartan_check_extended(&free3, &pts(&spec, 50), FREE_CARTAN_TOL).unwrap().pass);
        assert!(anchor_morphism_extended(&free3, &pts(&spec, 50), FREE_ANCHOR_TOL).unwrap().pass);
    }
}

#[test]
fn rank_one_input_does_not_grow() {
    let spec = fixtures::load(fixtures::FX_RHO0_N1);
    let free = build(&spec, 3, FreeMode::Quotient);
    assert_eq!(free.counts(), [1, 0, 0]);
    assert_eq!(free.rank(), 1);
    let s = cartan_check_extended(&free, &pts(&spec, 10), 0.0).unwrap();
    assert_eq!(s.max_residual, 0.0);
    let profile = anchor_rank_profile(&free, &[vec![0.5, 0.1], vec![0.0, 0.1]]).unwrap();
    assert_eq!(profile.samples[0].ranks, [1, 1, 1]);
    assert_eq!(profile.samples[1].ranks, [0, 0, 0]);
}

fn nontrivial() -> Vec<AlgebroidSpec> {
    vec![
        fixtures::load(fixtures::FX_FREE_JACOBI_R3),
        anchored(
            2,
            &[["1 + y^2", "x"], ["sin(y)", "x*y"]],
            &[vec![["x", "y"], ["0", "1"]], vec![["y^2", "0"], ["x*y", "cos(x)"]]],
        ),
    ]
}

#[test]
fn extended_connection_is_cartan() {
    for spec in nontrivial() {
        let p = pts(&spec, 30);
        for mode in [FreeMode::Almost, FreeMode::Quotient] {
            let free = build(&spec, 3, mode);
            let s = cartan_check_extended(&free, &p, FREE_CARTAN_TOL).unwrap();
            assert!(s.pass, "{mode:?}: {s:?}");
            let e = extension_consistency(&free, &p, FREE_CARTAN_TOL).unwrap();
            assert!(e.pass, "{mode:?}: {e:?}");
            let a = anchor_morphism_extended(&free, &p, FREE_ANCHOR_TOL).unwrap();
            assert!(a.pass, "{mode:?}: {a:?}");
        }
    }
}

/// Without the degree-two words the generators alone do not satisfy `S = 0`.
#[test]
fn cartan_needs_the_new_words() {
    use algebroid::calculus::compatibility_tensor_frame;
    use algebroid::model::PointJets;
    let spec = &nontrivial()[1];
    let j = PointJets::new(spec, &[0.2, 0.4], 1).unwrap();
    assert!(compatibility_tensor_frame(&j).max_abs() > 1e-3);
}

#[test]
fn zero_anchor_agrees_with_generator_level() {
    use algebroid::calculus::compatibility_tensor_frame;
    use algebroid::model::PointJets;
    let spec = anchored(2, &[["0", "0"], ["0", "0"]], &[vec![["x*y", "0"], ["0", "y"]], vec![["0", "x"], ["1", "0"]]]);
    let free = build(&spec, 2, FreeMode::Quotient);
    for p in pts(&spec, 20) {
        let base = compatibility_tensor_frame(&PointJets::new(&spec, &p, 1).unwrap());
        let ext = compatibility_tensor_frame(&PointJets::new(&free.extended, &p, 1).unwrap());
        for c in 0..2 {
            for i in 0..2 {
                assert!((base.get(&[c, 0, 1, i]) - ext.get(&[c, 0, 1, i])).abs() <= 1e-8);
            }
        }
    }
    assert!(cartan_check_extended(&free, &pts(&spec, 20), 1e-8).unwrap().pass);
}

#[test]
fn jacobiator_is_covariantly_constant() {
    let trivial_r1 = build(&fixtures::load(fixtures::FX_RHO0_N1), 3, FreeMode::Almost);
    assert_eq!(jacobiator_check(&trivial_r1, &[vec![0.1, 0.2]], 0.0).unwrap().max_residual, 0.0);

    let inv = fixtures::load(fixtures::FX_FREE_INVOLUTIVE);
    let free = build(&inv, 3, FreeMode::Almost);
    assert!(jacobiator_check(&free, &pts(&inv, 50), FREE_JACOBI_TOL).unwrap().pass);

    for spec in nontrivial() {
        let free = build(&spec, 3, FreeMode::Almost);
        let rep = jacobiator_check(&free, &pts(&spec, 50), FREE_JACOBI_TOL).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
    let r3 = build(&nontrivial()[0], 3, FreeMode::Almost);
    assert!(jacobiator_defect(&r3) > 0.5, "the r = 3 check must see non-zero Jacobiators");

    let q = build(&inv, 3, FreeMode::Quotient);
    assert!(matches!(jacobiator_check(&q, &[vec![0.0, 0.0]], 1e-8), Err(FreeError::Precondition(_))));
    let low = build(&inv, 2, FreeMode::Almost);
    assert!(matches!(jacobiator_check(&low, &[vec![0.0, 0.0]], 1e-8), Err(FreeError::Precondition(_))));
}

/// Per-word frame Killing residual computed from the extended data with an
/// independent finite-difference Lie derivative.
fn killing_fd(free: &FreeTruncation, p: &[f64], h: f64) -> f64 {
    let n = 2;
    let val = |e: &algebroid::exprjet::Expr, q: &[f64]| eval_value(e, q).unwrap();
    let d = |e: &algebroid::exprjet::Expr, k: usize| {
        let (mut a, mut b) = (p.to_vec(), p.to_vec());
        a[k] += h;
        b[k] -= h;
        (val(e, &a) - val(e, &b)) / (2.0 * h)
    };
    let mut worst = 0.0f64;
    for w in 0..free.rank() {
        let rho = &free.anchor_ext[w];
        for i in 0..n {
            for j in 0..n {
                // g = identity
                let lie = d(&rho[j], i) + d(&rho[i], j);
                let mut corr = 0.0;
                for b in 0..free.rank() {
                    corr += val(&free.conn_ext[w][b][i], p) * val(&free.anchor_ext[b][j], p)
                        + val(&free.conn_ext[w][b][j], p) * val(&free.anchor_ext[b][i], p);
                }
                worst = worst.max((lie - corr).abs());
            }
        }
    }
    worst
}

#[test]
fn compatibility_propagates() {
    for doc in [fixtures::FX_FREE_TRANSLATION, fixtures::FX_FREE_NONABELIAN_KILLING] {
        let spec = fixtures::load(doc);
        let p = pts(&spec, 40);
        let generator = algebroid::calculus::check_killing_frame(&spec, &p, 1e-12).unwrap();
        assert!(generator.pass, "generator-level oracle first: {generator:?}");
        let free = build(&spec, 3, FreeMode::Quotient);
        let reports = propagate_compatibility(&free, &p, PROPAGATION_TOL).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
        for q in p.iter().take(5) {
            assert!(killing_fd(&free, q, 1e-5) < 1e-6);
        }
    }
    let nonabelian = build(&fixtures::load(fixtures::FX_FREE_NONABELIAN_KILLING), 3, FreeMode::Quotient);
    // [y d_x, d_y] = -d_x: a new direction appears in degree two
    let q = [0.5, 0.25];
    let rho: Vec<f64> = nonabelian.anchor_ext[2].iter().map(|e| eval_value(e, &q).unwrap()).collect();
    assert_eq!(rho, [-1.0, 0.0]);

    let failing = build(&fixtures::load(fixtures::FX_FREE_INVOLUTIVE), 2, FreeMode::Quotient);
    let err = propagate_compatibility(&failing, &pts(&failing.base, 10), PROPAGATION_TOL).unwrap_err();
    assert!(matches!(err, FreeError::GeneratorNotKilling { .. }));
}

#[test]
fn f_linearity_of_the_extension() {
    for spec in nontrivial() {
        let f = parse_expr("x^2*y + sin(x) + 1", &spec.chart.coords).unwrap();
        for mode in [FreeMode::Almost, FreeMode::Quotient] {
            let free = build(&spec, 3, mode);
            let rep = f_linearity_check(&free, &f, &pts(&spec, 20), F_LINEARITY_TOL).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}

#[test]
fn deterministic_construction() {
    let spec = &nontrivial()[0];
    let a = build(spec, 3, FreeMode::Quotient);
    let b = build(spec, 3, FreeMode::Quotient);
    assert_eq!(a.extended, b.extended);
    assert_eq!(a.relations, [0, 0, 1]);
}

#[test]
fn random_connections_stay_cartan() {
    let mut rng = SplitMix64::seed_from_u64(11);
    let monomials = ["1", "x", "y", "x*y", "x^2", "y^2"];
    for _ in 0..5 {
        let mut pick = || {
            let c = (rng.next_u64() % 5) as i64 - 2;
            let m = monomials[(rng.next_u64() % monomials.len() as u64) as usize];
            format!("{c}*{m}")
        };
        let anchor: Vec<[String; 2]> = (0..2).map(|_| [pick(), pick()]).collect();
        let conn: Vec<Vec<[String; 2]>> = (0..2).map(|_| (0..2).map(|_| [pick(), pick()]).collect()).collect();
        let a: Vec<[&str; 2]> = anchor.iter().map(|v| [v[0].as_str(), v[1].as_str()]).collect();
        let c: Vec<Vec<[&str; 2]>> =
            conn.iter().map(|r| r.iter().map(|v| [v[0].as_str(), v[1].as_str()]).collect()).collect();
        let spec = anchored(2, &a, &c);
        let free = build(&spec, 3, FreeMode::Quotient);
        let rep = cartan_check_extended(&free, &pts(&spec, 10), FREE_CARTAN_TOL).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
