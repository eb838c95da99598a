//! Printer/parser round trips and jet accuracy on generated expressions.

use proptest::prelude::*;

use slantlab::expr_dsl::{parse_expression, parse_immersion, BinOp, Expr, ExpressionProgram, Func};

const ARITY: usize = 3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..40).prop_map(|n| Expr::Const(n as f64 / 8.0)),
        (0..ARITY).prop_map(Expr::Var),
    ]
}

/// Trees built from operations that are smooth everywhere.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone(), prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)])
                .prop_map(|(a, b, op)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            (inner, prop_oneof![Just(Func::Sin), Just(Func::Cos)])
                .prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
}

/// Any tree, including guarded operations.
fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (
                inner.clone(),
                inner.clone(),
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)]
            )
                .prop_map(|(a, b, op)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), -3i32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            (
                inner,
                prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Sqrt)]
            )
                .prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(e in any_expr()) {
        let text = e.to_string();
        let back = parse_expression(&text).unwrap();
        prop_assert_eq!(back, e, "text: {}", text);
    }

    #[test]
    fn documents_round_trip(outputs in prop::collection::vec(any_expr(), 1..5)) {
        let program = ExpressionProgram::from_exprs(ARITY, outputs);
        let doc = program.to_document();
        let back = parse_immersion(&doc).unwrap();
        prop_assert_eq!(back.outputs, program.outputs);
        prop_assert_eq!(back.arity, ARITY);
    }

    /// Jets agree with central differences of the values and are
    /// bit-identical across repeated evaluation.
    #[test]
    fn jets_match_finite_differences(
        e in smooth_expr(),
        x in prop::collection::vec(-1.0f64..1.0, ARITY),
    ) {
        let program = ExpressionProgram::from_exprs(ARITY, vec![e]);
        let jet = program.eval_jet2(&x).unwrap();
        prop_assert_eq!(&jet, &program.eval_jet2(&x).unwrap());
        let value = |y: &[f64]| program.eval_values(y).unwrap()[0];
        let scale = 1.0 + jet.value[0].abs() + jet.jacobian.amax();
        let h = 1e-5;
        for a in 0..ARITY {
            let (mut p, mut m) = (x.clone(), x.clone());
            p[a] += h;
            m[a] -= h;
            let fd = (value(&p) - value(&m)) / (2.0 * h);
            prop_assert!((jet.jacobian[(0, a)] - fd).abs() <= 1e-5 * scale,
                "∂{}: {} vs {}", a, jet.jacobian[(0, a)], fd);
            let d1 = |y: &[f64]| program.eval_jet1(y).unwrap().jacobian;
            let col = (d1(&p) - d1(&m)) / (2.0 * h);
            for b in 0..ARITY {
                let hs = jet.second_derivative(a, b)[0];
                prop_assert!((hs - col[(0, b)]).abs() <= 1e-3 * scale.max(hs.abs()),
                    "∂{}∂{}: {} vs {}", a, b, hs, col[(0, b)]);
            }
        }
    }
}
