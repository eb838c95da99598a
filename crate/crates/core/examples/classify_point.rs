//! Slant decomposition of a catalog submanifold at one point, compared with
//! the closed-form slant functions.
//!
//!     cargo run --example classify_point

use slantlab::catalog::pointwise_example;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = pointwise_example(3)?;
    let x = [0.3, 0.2, 0.5, 0.1, -0.1, 0.2, -0.3];
    let g = fx.to_immersion().geometry(&x, 1e-6)?;
    let dec = &g.decomposition;

    println!("{}: {}-dimensional in R^{}", fx.id(), g.dim(), g.ambient_dim());
    println!("Wirtinger spectrum: {:?}", g.spectrum.eigenvalues.as_slice());
    for c in &dec.clusters {
        println!(
            "  cos^2 = {:.10}  theta = {:.10}  multiplicity {}  {:?}",
            c.cos2, c.angle, c.multiplicity, c.kind
        );
    }
    for i in 0..fx.distribution_count() {
        let theta = fx.expected_theta_at(i, &x)?;
        let nearest = dec.nearest_cluster(fx.expected_cos2_at(i, &x)?).expect("clusters");
        println!(
            "D{i}: closed form {theta:.12}, measured {:.12}",
            dec.clusters[nearest].angle
        );
    }
    Ok(())
}
