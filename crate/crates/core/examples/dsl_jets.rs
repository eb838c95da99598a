//! Parse an immersion and evaluate its value, Jacobian and Hessian exactly.
//!
//!     cargo run --example dsl_jets

use slantlab::expr_dsl::parse_immersion;

const SOURCE: &str = "\
# a helicoid-like surface in R^4
dim 2 -> 4
domain norm < 2
x1*cos(x2)
x1*sin(x2)
x2
0.5*x1^2
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_immersion(SOURCE)?;
    println!("{} parameters -> R^{}", program.arity, program.output_dim());
    for (i, e) in program.outputs.iter().enumerate() {
        println!("  f{} = {e}", i + 1);
    }

    let x = [0.7, 0.4];
    let jet = program.eval_jet2(&x)?;
    println!("f(x) = {}", jet.value.transpose());
    println!("Jacobian:{}", jet.jacobian);
    for a in 0..2 {
        for b in a..2 {
            println!("d{a}d{b} f = {}", jet.second_derivative(a, b).transpose());
        }
    }

    // The printer emits a document the parser reads back unchanged.
    let again = parse_immersion(&program.to_document())?;
    assert_eq!(again.outputs, program.outputs);
    Ok(())
}
