//! Golden cases for the expression front-end. Each valid case is paired with a
//! native Rust closure evaluated at a few fixed points.

mod common;

use annulus_core::expr::{parse, EvalError, ParseError};
use common::{valid_cases, POINTS};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn golden_values_and_round_trip() {
    let cases = valid_cases();
    for (text, native) in &cases {
        let ast = parse(text).unwrap_or_else(|e| panic!("`{text}`: {e}"));
        let printed = ast.to_string();
        assert_eq!(parse(&printed).unwrap(), ast, "round trip of `{text}` via `{printed}`");
        for p in POINTS {
            let got = ast.evaluate(&p).unwrap();
            let want = native(p[0], p[1], p[2], p[3], p[4]);
            assert!(close(got, want), "`{text}` at {p:?}: {got} vs {want}");
        }
    }
}

#[test]
fn golden_errors() {
    let syntax = [("u + * v", 4), ("(u + v", 6), ("u v", 2), ("", 0), ("u $ v", 2), ("sin u", 4)];
    for (text, offset) in syntax {
        match parse(text) {
            Err(ParseError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "`{text}`"),
            other => panic!("`{text}`: {other:?}"),
        }
    }
    match parse("u + w") {
        Err(ParseError::UnknownIdentifier { offset, name }) => assert_eq!((offset, name.as_str()), (4, "w")),
        other => panic!("{other:?}"),
    }
    match parse("2 * foo(u)") {
        Err(ParseError::UnknownIdentifier { offset, .. }) => assert_eq!(offset, 4),
        other => panic!("{other:?}"),
    }
    match parse("min(u)") {
        Err(ParseError::WrongArity { expected: 2, found: 1, offset: 0, .. }) => {}
        other => panic!("{other:?}"),
    }
    match parse("1 + sin(u, v)") {
        Err(ParseError::WrongArity { expected: 1, found: 2, offset: 4, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("log(u - 5)").unwrap().evaluate_at(1.0, 1.0, 0.0, 0.0, 0.0), Err(EvalError::Domain { .. })));
}

#[test]
fn suite_size() {
    // 45 valid + 10 error cases, plus the evaluation failure above.
    assert!(valid_cases().len() + 10 >= 50);
}
