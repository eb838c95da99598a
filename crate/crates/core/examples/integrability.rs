//! Lie brackets of frame fields and closure of the slant distributions.
//!
//!     cargo run --example integrability

use slantlab::catalog::pointwise_example;
use slantlab::connection_geometry::{lie_bracket, VectorFieldOnM};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // [∂1, x1 ∂2] = ∂2 on R^2.
    let d1 = VectorFieldOnM::coordinate(0, 2);
    let x1d2 = VectorFieldOnM::from_sources(&["0", "x1"])?;
    println!("[d1, x1 d2] at (0.5, 0.5) = {}", lie_bracket(&d1, &x1d2, &[0.5, 0.5])?.transpose());

    let fx = pointwise_example(2)?;
    let x = [0.3, 0.2, 0.1, 0.2, -0.1];
    let g = fx.to_immersion().geometry(&x, 1e-6)?;
    for i in 0..fx.distribution_count() {
        let frames = fx.frames_of(i);
        let Some(c) = g.decomposition.nearest_cluster(fx.expected_cos2_at(i, &x)?) else {
            continue;
        };
        let out_of_slot = &g.tan_proj - &g.cluster_proj[c];
        let mut closure = 0.0f64;
        for (n, &a) in frames.iter().enumerate() {
            for &b in &frames[n + 1..] {
                let br = lie_bracket(&fx.frames[a], &fx.frames[b], &x)?;
                let ambient = &g.jet.jacobian * br;
                closure = closure.max((&out_of_slot * ambient).amax());
            }
        }
        println!("D{i}: frames {frames:?}, bracket leaves D{i} by {closure:.2e}");
    }
    Ok(())
}
