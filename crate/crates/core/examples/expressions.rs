//! Parse vertex fields from text and evaluate them.

use tubeflow::exprfield::{eval_vector, parse_expr, VectorExpr};

fn main() {
    let e = parse_expr("exp(-t)*x1 + 2^3^0.5", 1).unwrap();
    println!("{e} at t = 1, x1 = 2 -> {}", e.eval(1.0, &[2.0]).unwrap());

    // x, y, z alias x1..x3 for small dimensions
    let field = VectorExpr::parse(&["y^2", "-1"], 2).unwrap();
    println!("(y^2, -1) at (5, 2) -> {:?}", eval_vector(&field, 0.0, &[5.0, 2.0]).unwrap());

    for bad in ["2 +", "x3", "foo(1)", "max(1)"] {
        println!("{bad:>8}: {}", parse_expr(bad, 2).unwrap_err());
    }
}
