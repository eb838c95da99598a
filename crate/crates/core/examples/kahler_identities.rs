//! Covariant derivatives of T, N, t and n by finite differences, and the
//! residuals of the identities that tie them to h and A.
//!
//!     cargo run --example kahler_identities

use slantlab::catalog::{geodesic_fixture, kslant_example};
use slantlab::connection_geometry::TensorField;
use slantlab::theorem_checks::hypothesis_norms;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = kslant_example(2)?;
    let x = [0.3, 0.2, 0.1, 0.2, -0.1];
    let cov = fx.to_immersion().covariant_data(&x, 1e-6, 1e-5)?;
    let g = &cov.base;

    // (∇_X T)Y = A_{NY}X + t h(X,Y) for every pair of coordinate fields.
    let mut worst = 0.0f64;
    for a in 0..g.dim() {
        for b in 0..g.dim() {
            let (xa, yb) = (g.coord_field(a), g.coord_field(b));
            let lhs = cov.covariant_tensor_derivative(TensorField::BigT, &xa, &yb);
            let rhs = g.shape(&(&g.big_n_amb * &yb), &xa) + &g.small_t_amb * g.h(&xa, &yb);
            worst = worst.max((lhs - rhs).amax());
        }
    }
    println!("{}: max residual of the nabla T identity {worst:.3e}", fx.id());
    println!("Richardson gap {:.3e}", cov.max_richardson_gap());
    println!("tensor norms {:?}", hypothesis_norms(&cov));

    // A complex-linear subspace has parallel T, N, t and n.
    let flat = geodesic_fixture().to_immersion().covariant_data(&[0.1, 0.2, 0.3, 0.4], 1e-6, 1e-5)?;
    println!("geodesic fixture tensor norms {:?}", hypothesis_norms(&flat));
    Ok(())
}
