//! Second fundamental form, shape operators and Christoffel symbols of a
//! curved surface, with the Gauss and Weingarten identities checked inline.
//!
//!     cargo run --example second_fundamental_form

use slantlab::ambient::standard_structure;
use slantlab::connection_geometry::Immersion;
use slantlab::expr_dsl::parse_immersion;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_immersion("dim 2 -> 4\nx1*cos(x2)\nx1*sin(x2)\nx2\n0.5*x1^2\n")?;
    let imm = Immersion::new(program, standard_structure(2))?;
    let g = imm.geometry(&[0.7, 0.4], 1e-6)?;

    for a in 0..2 {
        for b in a..2 {
            let h = g.h(&g.coord_field(a), &g.coord_field(b));
            println!("h(d{a}, d{b}) = {:.6}", h.transpose());
            println!("Gamma^c_{a}{b} = {:.6}", g.christoffels.vector(a, b).transpose());
            // Gauss: the ambient second derivative splits into ∇ and h.
            let split = g.nabla_coord(a, b) + &h - g.jet.second_derivative(a, b);
            println!("  Gauss residual {:.2e}", split.amax());
        }
    }
    for j in 0..g.frame.codim() {
        let v = g.frame.nor_basis.column(j).into_owned();
        println!("A_V{j} in the tangent frame:{:.6}", g.frame.tan_basis.transpose() * g.shape_ambient(&v) * &g.frame.tan_basis);
    }
    println!("Christoffel condition number {:.3}", g.christoffels.condition_number);
    Ok(())
}
