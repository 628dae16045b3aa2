use algebroid::exprjet::*;
use algebroid::fixtures;
use algebroid::model::sample_points;
use proptest::prelude::*;

fn xyz() -> Vec<String> {
    ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
}

const FUNCS: [Func; 8] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt, Func::Tanh, Func::Abs];

/// Trees of the shape the parser produces: literals are never negative.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0u32..2000).prop_map(|k| Expr::Num(k as f64 / 8.0)), (0usize..3).prop_map(Expr::Var),];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |a| Expr::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(a, c)| Expr::Add(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(move |(a, c)| Expr::Sub(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(move |(a, c)| Expr::Mul(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(move |(a, c)| Expr::Div(b(a), b(c))),
            (inner.clone(), inner.clone()).prop_map(move |(a, c)| Expr::Pow(b(a), b(c))),
            (0usize..8, inner).prop_map(move |(f, a)| Expr::Call(FUNCS[f], b(a))),
        ]
    })
}

/// Polynomials in two variables, safe to evaluate anywhere.
fn arb_poly() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-40i32..40).prop_map(|k| Expr::Num(k as f64 / 8.0)), (0usize..2).prop_map(Expr::Var),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, c)| add(a, c)),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| mul(a, c)),
            (inner.clone(), inner).prop_map(|(a, c)| sub(a, c)),
        ]
    })
}

fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
    (arb_poly(), -1.5f64..1.5, -1.5f64..1.5).prop_map(move |(e, x, y)| eval_jet(&e, &[x, y], order).unwrap())
}

fn rel_close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * a.max_abs().max(b.max_abs()).max(1.0)
}

fn slots(j: &Jet) -> Vec<f64> {
    let mut v = vec![j.value()];
    v.extend_from_slice(j.gradient());
    v.extend_from_slice(j.hessian());
    v.extend_from_slice(j.third());
    v
}

proptest! {
    #[test]
    fn render_parse_round_trip(e in arb_expr()) {
        let names = xyz();
        let text = e.render(&names);
        let back = parse_expr(&text, &names).unwrap();
        prop_assert_eq!(back, e, "rendered as {}", text);
    }

    #[test]
    fn jet_addition_commutes_and_associates(a in arb_jet(3), b in arb_jet(3), c in arb_jet(3)) {
        prop_assert!(rel_close(&(&a + &b), &(&b + &a), 1e-12));
        prop_assert!(rel_close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-12));
    }

    #[test]
    fn jet_product_commutes_and_associates(a in arb_jet(3), b in arb_jet(3), c in arb_jet(3)) {
        prop_assert!(rel_close(&(&a * &b), &(&b * &a), 1e-12));
        prop_assert!(rel_close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-12));
    }

    #[test]
    fn lower_order_is_exact_truncation(e in arb_poly(), x in -1.5f64..1.5, y in -1.5f64..1.5, k in 0usize..3) {
        let lo = eval_jet(&e, &[x, y], k).unwrap();
        let hi = eval_jet(&e, &[x, y], k + 1).unwrap();
        prop_assert_eq!(slots(&lo), slots(&hi.truncate(k)));
    }

    #[test]
    fn smooth_functions_truncate_exactly(k in 0usize..3, x in 0.2f64..1.5, y in -1.0f64..1.0) {
        let e = parse_expr("sin(x*y) + exp(y)/sqrt(x) - ln(x+1)^2", &xyz()).unwrap();
        let p = [x, y, 0.0];
        let lo = eval_jet(&e, &p, k).unwrap();
        let hi = eval_jet(&e, &p, k + 1).unwrap();
        prop_assert_eq!(slots(&lo), slots(&hi.truncate(k)));
    }

    #[test]
    fn hessian_and_third_are_symmetric(x in 0.2f64..1.5, y in -1.0f64..1.0) {
        let e = parse_expr("x^3*y^2 + cos(x-y)*tanh(y) + x/(1+y^2)", &xyz()).unwrap();
        let j = eval_jet(&e, &[x, y, 0.5], 3).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                prop_assert_eq!(j.d2(i, k), j.d2(k, i));
                for l in 0..3 {
                    prop_assert_eq!(j.d3(i, k, l), j.d3(l, i, k));
                    prop_assert_eq!(j.d3(i, k, l), j.d3(k, i, l));
                }
            }
        }
    }
}

#[test]
fn fixture_expressions_match_finite_differences() {
    let mut checked = 0;
    for (name, doc) in fixtures::ALL {
        let spec = fixtures::load(doc);
        let mut exprs: Vec<&Expr> = Vec::new();
        exprs.extend(spec.anchor.iter().flatten());
        exprs.extend(spec.connection.iter().flatten().flatten());
        if let Some(g) = &spec.metric {
            let n = g.dim();
            for i in 0..n {
                for j in 0..n {
                    exprs.push(g.get(i, j));
                }
            }
        }
        for p in sample_points(&spec.chart, 100, 42) {
            for e in &exprs {
                let r = fd_crosscheck(e, &p, 1e-4).unwrap();
                assert!(r <= 1e-6, "{name}: {} at {p:?} gives {r}", e.render(&spec.chart.coords));
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn finite_difference_examples() {
    let x = vec!["x".to_string()];
    let cube = parse_expr("x^3", &x).unwrap();
    assert!(fd_crosscheck(&cube, &[1.0], 1e-4).unwrap() <= 1e-7);
    let five = parse_expr("5", &x).unwrap();
    assert_eq!(fd_crosscheck(&five, &[0.3], 1e-4).unwrap(), 0.0);
    let exp = parse_expr("exp(x)", &x).unwrap();
    assert!(fd_crosscheck(&exp, &[0.0], 1e-4).unwrap() <= 1e-7);
}

#[test]
fn grammar_examples() {
    let xy: Vec<String> = vec!["x".into(), "y".into()];
    let b = Box::new;
    assert_eq!(
        parse_expr("x^2 + sin(y)", &xy).unwrap(),
        Expr::Add(b(Expr::Pow(b(Expr::Var(0)), b(Expr::Num(2.0)))), b(Expr::Call(Func::Sin, b(Expr::Var(1)))))
    );
    assert_eq!(
        parse_expr("1/(1+y^2)", &xy).unwrap(),
        Expr::Div(b(Expr::Num(1.0)), b(Expr::Add(b(Expr::Num(1.0)), b(Expr::Pow(b(Expr::Var(1)), b(Expr::Num(2.0)))))))
    );
    let err = parse_expr("x + z", &xy).unwrap_err();
    assert!(err.to_string().contains('z'), "{err}");
}

#[test]
fn domain_errors_are_reported() {
    let xy: Vec<String> = vec!["x".into(), "y".into()];
    for (text, p) in [("1/x", [0.0, 1.0]), ("ln(x)", [-1.0, 0.0]), ("sqrt(y)", [0.0, -0.5])] {
        let e = parse_expr(text, &xy).unwrap();
        let err = eval_jet(&e, &p, 1).unwrap_err();
        assert_eq!(err.point, p.to_vec(), "{text}");
    }
}
