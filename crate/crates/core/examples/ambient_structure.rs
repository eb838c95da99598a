//! Almost complex structures on R^{2m}: the standard one, one read from a
//! matrix file, and the residuals that certify them.
//!
//!     cargo run --example ambient_structure

use std::path::Path;

use nalgebra::DVector;
use slantlab::ambient::{load_phi_matrix, standard_structure, validate_structure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let std2 = standard_structure(2);
    println!("standard phi on R^4:{}", std2.phi());
    println!("residuals {:?}", validate_structure(&std2)?);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/swapped_phi.txt");
    let swapped = load_phi_matrix(&path)?;
    println!("phi from {}:{}", path.display(), swapped.phi());
    println!("residuals {:?}", validate_structure(&swapped)?);

    // φ is an isometry, and a single flipped sign breaks φ² = −I.
    let v = DVector::from_vec(vec![1.0, 2.0, -0.5, 0.25]);
    println!("|v| = {:.6}, |phi v| = {:.6}", v.norm(), swapped.apply(&v).norm());
    let broken = std2.with_flipped_entry(1, 0);
    println!("after a sign flip: {:?}", validate_structure(&broken));
    Ok(())
}
